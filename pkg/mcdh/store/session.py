from __future__ import annotations

import logging
from functools import cached_property
from typing import Any, Optional, Union

from miscutils import ReprMixin
from sqlalchemy import text
from sqlalchemy.engine import Row, RowMapping
from sqlalchemy.orm import Session as BaseSession

from mcdh.frame import Frame

logger = logging.getLogger(__name__)


class Session(BaseSession):
    """sqlalchemy.orm.Session that logs every statement it executes, and the affected row count, at debug level."""

    def execute(self, statement: Any, params: Union[list, dict] = None, **kwargs: Any) -> Any:
        logger.debug(statement)

        raw_result = super().execute(text(statement) if isinstance(statement, str) else statement, params, **kwargs)

        if (rowcount := _rowcount(raw_result)) is not None and rowcount >= 0:
            logger.debug(f"{rowcount} row(s) affected")

        return raw_result

    def run(self, statement: Any, params: Union[list, dict] = None, **kwargs: Any) -> Result:
        """Execute a statement and wrap the outcome in a frozen Result."""
        return Result(self.execute(statement, params, **kwargs))


def _rowcount(raw_result: Any) -> Optional[int]:
    try:
        return raw_result.rowcount
    except Exception:
        return None


class Result(ReprMixin):
    def __init__(self, raw_result: Any) -> None:
        self.rowcount = _rowcount(raw_result)

        try:
            self.frozen = raw_result.freeze()
        except Exception:
            self.frozen = None

    @cached_property
    def all(self) -> list[Row]:
        return self.frozen().all()

    @cached_property
    def mappings(self) -> list[RowMapping]:
        return self.frozen().mappings().all()

    @cached_property
    def frame(self) -> Frame:
        return Frame([dict(mapping) for mapping in self.mappings])
