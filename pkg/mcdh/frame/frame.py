from __future__ import annotations

import os
import pathlib
import tempfile
from typing import Any, Type, Union

import tabulate
import pandas as pd
from maybe import Maybe

PathLike = Union[str, os.PathLike, pathlib.Path]


class Series(pd.Series):
    def __getitem__(self, key):
        return self._try_native(super().__getitem__(key))

    def tolist(self) -> list:
        return [self._try_native(element) for element in super().__iter__()]

    def _try_native(self, element):
        try:
            return element.item()
        except (AttributeError, ValueError):
            return element


# noinspection PyFinal
class Frame(pd.DataFrame):
    """A pandas DataFrame for every tabular report: ASCII rendering through tabulate and all-or-nothing CSV writing."""
    _constructor_sliced = Series

    DEFAULT_FLOAT_FORMAT = "%.17g"

    def __repr__(self) -> str:
        return f"{type(self).__name__}(rows={len(self.index)}, columns={list(self.columns)})"

    def __str__(self) -> str:
        return self.to_ascii()

    @property
    def _constructor(self) -> Type[Frame]:
        return type(self)

    def to_ascii(self, index: bool = False, fancy: bool = True, floatfmt: str = ".4g") -> str:
        """Convert this Frame to an ascii representation."""
        return str(tabulate.tabulate(self, headers=list(self.columns), tablefmt="fancy_grid" if fancy else "grid", showindex="never" if not index else "default", floatfmt=floatfmt))

    def write_csv(self, path: PathLike, index: bool = False, float_format: str = None, **kwargs: Any) -> pathlib.Path:
        """Write this Frame as UTF-8 CSV to a temporary sibling of 'path' and move it into place, so no partial file is ever visible. Returns the path."""
        target = pathlib.Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)

        handle, temporary = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
        try:
            with os.fdopen(handle, "w", encoding="utf-8", newline="") as stream:
                super().to_csv(stream, index=index, float_format=Maybe(float_format).else_(self.DEFAULT_FLOAT_FORMAT), **kwargs)
            os.replace(temporary, target)
        except BaseException:
            if os.path.exists(temporary):
                os.remove(temporary)
            raise

        return target
