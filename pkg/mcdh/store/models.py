from __future__ import annotations

import numpy as np
from sqlalchemy import Column, ForeignKey, types
from sqlalchemy.orm import declarative_base, declared_attr

from subtypes import Str


class BaseModel:
    """Base for the draw-store tables. Table names are the snake_case class names."""

    @declared_attr
    def __tablename__(cls):
        return str(Str(cls.__name__).case.snake())

    def __repr__(self) -> str:
        return f"{type(self).__name__}({', '.join([f'{col.name}={repr(getattr(self, col.name))}' for col in self.__table__.columns if not isinstance(col.type, types.LargeBinary)])})"


Model = declarative_base(cls=BaseModel, name="Model")


def to_blob(array: np.ndarray) -> bytes:
    return np.ascontiguousarray(array, dtype="<f8").tobytes()


def from_blob(blob: bytes) -> np.ndarray:
    return np.frombuffer(blob, dtype="<f8").astype(np.float64)


class StoreInfo(Model):
    id = Column(types.Integer, primary_key=True)
    format_version = Column(types.Integer, nullable=False)
    model_kind = Column(types.String(32), nullable=False)
    layout = Column(types.Text, nullable=False)
    config_hash = Column(types.String(64), nullable=False)
    seed = Column(types.BigInteger, nullable=False)
    n_chains = Column(types.Integer, nullable=False)
    n_samples = Column(types.Integer, nullable=False)
    dimension = Column(types.Integer, nullable=False)


class Parameter(Model):
    """One scalar parameter and its draws, a chain-major (n_chains, n_samples) blob."""
    column_index = Column(types.Integer, primary_key=True, autoincrement=False)
    name = Column(types.String(255), nullable=False, unique=True)
    block = Column(types.String(64), nullable=False)
    values = Column(types.LargeBinary, nullable=False)


class Chain(Model):
    chain = Column(types.Integer, primary_key=True, autoincrement=False)
    seed = Column(types.BigInteger, nullable=False)
    step_size = Column(types.Float(precision=53), nullable=False)
    inv_mass = Column(types.LargeBinary, nullable=False)


class Draw(Model):
    chain = Column(types.Integer, ForeignKey("chain.chain"), primary_key=True, autoincrement=False)
    iteration = Column(types.Integer, primary_key=True, autoincrement=False)
    accept_stat = Column(types.Float(precision=53), nullable=False)
    tree_depth = Column(types.Integer, nullable=False)
    n_leapfrog = Column(types.Integer, nullable=False)
    divergent = Column(types.Boolean, nullable=False)
    energy = Column(types.Float(precision=53), nullable=False)
    log_density = Column(types.Float(precision=53), nullable=False)
