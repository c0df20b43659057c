__all__ = ["Frame", "Series"]

from .frame import Frame, Series
