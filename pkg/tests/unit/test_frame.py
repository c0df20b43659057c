import pathlib

import pandas as pd

from mcdh.frame import Frame


class TestFrame:
    def test_write_csv(self, tmp_path):
        path = Frame({"a": [0.1, 1 / 3], "b": ["x", "y"]}).write_csv(tmp_path / "out" / "table.csv")
        assert isinstance(path, pathlib.Path)
        assert pd.read_csv(path, float_precision="round_trip")["a"].tolist() == [0.1, 1 / 3]
        assert [item.name for item in path.parent.iterdir()] == ["table.csv"]

    def test_to_ascii(self):
        text = Frame({"model": ["mcdh"], "hit_rate": [0.5]}).to_ascii()
        assert "model" in text and "mcdh" in text

    def test_slicing_keeps_type(self):
        frame = Frame({"a": [1, 2, 3]})
        assert isinstance(frame[frame["a"] > 1], Frame)

    def test_tolist_is_native(self):
        values = Frame({"a": [1, 2]})["a"].tolist()
        assert values == [1, 2] and all(type(value) is int for value in values)

