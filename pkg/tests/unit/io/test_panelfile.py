import pytest

from mcdh.errors import SchemaError
from mcdh.io import COLUMNS, PanelSidecar, sidecar_path, read_sidecar, panel_to_frame, export_panel


def test_sidecar_path(tmp_path):
    assert sidecar_path(tmp_path / "panel.csv").name == "panel.csv.meta.json"


class TestPanelSidecar:
    def test_dict_round_trip(self, tiny_panel):
        sidecar = PanelSidecar.from_panel(tiny_panel)
        assert PanelSidecar.from_dict(sidecar.to_dict()) == sidecar

    def test_rejects_other_format(self, tiny_panel):
        data = {**PanelSidecar.from_panel(tiny_panel).to_dict(), "version": 7}
        with pytest.raises(SchemaError):
            PanelSidecar.from_dict(data)

    def test_rejects_malformed(self):
        with pytest.raises(SchemaError):
            PanelSidecar.from_dict({"format": "mcdh-panel", "version": 1, "individual_ids": ["a"]})


class TestPanelToFrame:
    def test_rows(self, tiny_panel):
        frame = panel_to_frame(tiny_panel)
        assert list(frame.columns) == list(COLUMNS)
        assert len(frame) == 24 * 2 + 24 * 3
        assert frame["chosen"].sum() == 48
        assert frame.groupby(["category_id", "occasion_id"])["chosen"].sum().eq(1).all()

    def test_export_writes_sidecar(self, tiny_panel, tmp_path):
        path = export_panel(tiny_panel, tmp_path / "out" / "panel.csv")
        assert path.is_file() and read_sidecar(path) == PanelSidecar.from_panel(tiny_panel)


def test_no_sidecar(tmp_path):
    assert read_sidecar(tmp_path / "panel.csv") is None
