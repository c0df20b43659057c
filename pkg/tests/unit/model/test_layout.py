import numpy as np
import pytest

from mcdh.errors import ConsistencyError, InvalidArgumentError
from mcdh.model import ParameterBlock, ParameterLayout, ParameterState


@pytest.fixture
def layout():
    return ParameterLayout([ParameterBlock("scalar", ()), ParameterBlock("matrix", (2, 3)), ParameterBlock("empty", (0, 4))])


class TestParameterLayout:
    def test_size(self, layout):
        assert layout.size == 7

    def test_column_names(self, layout):
        assert layout.column_names[:3] == ["scalar", "matrix[0,0]", "matrix[0,1]"]
        assert len(layout.column_names) == 7

    def test_unflatten(self, layout):
        blocks = layout.unflatten(np.arange(7.0))
        assert blocks["scalar"].shape == ()
        assert blocks["matrix"].tolist() == [[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]
        assert blocks["empty"].shape == (0, 4)

    def test_flatten_inverts_unflatten(self, layout):
        vector = np.random.default_rng(0).normal(size=7)
        assert np.array_equal(layout.flatten(layout.unflatten(vector)), vector)

    def test_flatten_checks_shapes(self, layout):
        with pytest.raises(ConsistencyError):
            layout.flatten({"scalar": 0.0, "matrix": np.zeros((3, 2)), "empty": np.zeros((0, 4))})

    def test_flatten_checks_missing(self, layout):
        with pytest.raises(ConsistencyError):
            layout.flatten({"scalar": 0.0})

    def test_json(self, layout):
        assert ParameterLayout.from_json(layout.to_json()) == layout

    def test_contains(self, layout):
        assert "matrix" in layout and "other" not in layout

    def test_duplicate_names(self):
        with pytest.raises(InvalidArgumentError):
            ParameterLayout([ParameterBlock("a", ()), ParameterBlock("a", (2,))])


class TestParameterState:
    def test_wrong_length(self, layout):
        with pytest.raises(ConsistencyError):
            ParameterState(np.zeros(3), layout)

    def test_replace(self, layout):
        state = ParameterState.zeros(layout).replace(scalar=np.array(2.5))
        assert float(state["scalar"]) == 2.5
        assert np.all(state["matrix"] == 0)

    def test_is_finite(self, layout):
        assert ParameterState.zeros(layout).is_finite
        assert not ParameterState(np.full(7, np.nan), layout).is_finite
