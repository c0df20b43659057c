import logging

import numpy as np
import pytest

from mcdh.config import IngestConfig
from mcdh.errors import ConsistencyError, InvalidArgumentError, SchemaError
from mcdh.io import ingest, export_panel

HEADER = "individual_id,category_id,occasion_id,time_bucket,brand_id,price,chosen"


@pytest.fixture
def write_panel(tmp_path):
    def write(*rows, header=HEADER, name="panel.csv"):
        path = tmp_path / name
        path.write_text("\n".join([header, *rows]) + "\n", encoding="utf-8")
        return path

    return write


class TestIngest:
    def test_two_rows(self, write_panel):
        result = ingest(write_panel("a,cola,o1,0,x,1.0,0", "a,cola,o1,0,y,2.0,1"))
        panel, metadata = result.panel, result.metadata

        assert (panel.dims.I, panel.dims.C, panel.dims.T, panel.n_observations) == (1, 1, 1, 1)
        assert metadata.baselines == ("y",)
        assert (metadata.price_location, metadata.price_scale) == ((1.5,), (0.5,))
        assert panel.blocks[0].chosen.tolist() == [1]
        assert panel.blocks[0].features[0].tolist() == [[1.0, -1.0], [0.0, 1.0]]

    def test_ids_are_sorted_and_grid_spans_buckets(self, write_panel):
        panel = ingest(write_panel(
            "b,cola,o1,3,x,1.0,1", "b,cola,o1,3,y,2.0,0",
            "a,cola,o2,5,x,1.5,0", "a,cola,o2,5,y,2.5,1",
        )).panel

        assert panel.individual_ids == ("a", "b")
        assert panel.grid.points.tolist() == [3.0, 4.0, 5.0]
        assert sorted(panel.blocks[0].time.tolist()) == [0, 2]

    def test_zero_variance_prices(self, write_panel, caplog):
        with caplog.at_level(logging.WARNING, logger="mcdh.io.ingest"):
            result = ingest(write_panel("a,cola,o1,0,x,1.5,0", "a,cola,o1,0,y,1.5,1"))

        assert result.metadata.zero_variance_categories == ("cola",)
        assert np.all(result.panel.blocks[0].features[:, :, 1] == 0.0)
        assert "zero variance" in caplog.text

    def test_training_window_standardization(self, write_panel):
        result = ingest(write_panel(
            "a,cola,o1,0,x,1.0,1", "a,cola,o1,0,y,3.0,0",
            "a,cola,o2,1,x,100.0,0", "a,cola,o2,1,y,200.0,1",
        ), holdout_buckets=1)
        assert result.metadata.price_location == (2.0,) and result.metadata.price_scale == (1.0,)
        assert result.metadata.baselines == ("x",)

    def test_extra_features(self, write_panel):
        panel = ingest(write_panel("a,cola,o1,0,x,1.0,0,1", "a,cola,o1,0,y,2.0,1,0", header=f"{HEADER},display")).panel
        assert panel.dims.coefficient_names == ["cola:brand=x", "cola:price", "cola:display"]
        assert panel.blocks[0].features[0, :, 2].tolist() == [1.0, 0.0]

    def test_activity_filter(self, write_panel):
        result = ingest(write_panel(
            "a,cola,o1,0,x,1.0,1", "a,cola,o1,0,y,2.0,0",
            "b,cola,o2,1,x,1.0,0", "b,cola,o2,1,y,2.0,1",
        ), config=IngestConfig(head_buckets=1))
        assert result.panel.individual_ids == ("a",) and result.metadata.dropped_individuals == ("b",)

    def test_filter_dropping_everyone(self, write_panel):
        with pytest.raises(ConsistencyError):
            ingest(write_panel("a,cola,o1,1,x,1.0,1", "a,cola,o1,1,y,2.0,0", "a,cola,o0,0,x,1.0,1", "a,cola,o0,0,y,2.0,0"), config=IngestConfig(min_active_buckets=3))

    def test_simulated_round_trip(self, tiny_panel, tmp_path):
        path = export_panel(tiny_panel, tmp_path / "sim.csv")
        assert ingest(path).panel.equals(tiny_panel)


class TestSchemaErrors:
    def test_missing_file(self, tmp_path):
        with pytest.raises(InvalidArgumentError):
            ingest(tmp_path / "absent.csv")

    def test_missing_column(self, write_panel):
        with pytest.raises(SchemaError):
            ingest(write_panel("a,cola,o1,0,x,1.0", header="individual_id,category_id,occasion_id,time_bucket,brand_id,price"))

    def test_bad_chosen_names_row(self, write_panel):
        with pytest.raises(SchemaError) as info:
            ingest(write_panel("a,cola,o1,0,x,1.0,0", "a,cola,o1,0,y,2.0,2"))
        assert info.value.rows == [2]

    def test_two_chosen(self, write_panel):
        with pytest.raises(SchemaError) as info:
            ingest(write_panel("a,cola,o1,0,x,1.0,1", "a,cola,o1,0,y,2.0,1", "a,cola,o2,0,x,1.0,1", "a,cola,o2,0,y,2.0,0"))
        assert info.value.rows == [1, 2]

    def test_incomplete_choice_set(self, write_panel):
        with pytest.raises(SchemaError) as info:
            ingest(write_panel("a,cola,o1,0,x,1.0,0", "a,cola,o1,0,y,2.0,1", "a,cola,o2,1,x,1.0,1"))
        assert info.value.rows == [3]

    def test_non_numeric_price(self, write_panel):
        with pytest.raises(SchemaError) as info:
            ingest(write_panel("a,cola,o1,0,x,cheap,0", "a,cola,o1,0,y,2.0,1"))
        assert info.value.rows == [1]

    def test_non_positive_price(self, write_panel):
        with pytest.raises(SchemaError):
            ingest(write_panel("a,cola,o1,0,x,0.0,0", "a,cola,o1,0,y,2.0,1"))

    def test_mixed_time_buckets(self, write_panel):
        with pytest.raises(SchemaError):
            ingest(write_panel("a,cola,o1,0,x,1.0,0", "a,cola,o1,1,y,2.0,1"))

    def test_holdout_too_long(self, write_panel):
        with pytest.raises(InvalidArgumentError):
            ingest(write_panel("a,cola,o1,0,x,1.0,0", "a,cola,o1,0,y,2.0,1"), holdout_buckets=1)
