from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Iterator, Mapping, Union

import numpy as np

from mcdh.errors import InvalidArgumentError, ConsistencyError


@dataclass(frozen=True)
class ParameterBlock:
    name: str
    shape: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "shape", tuple(int(size) for size in self.shape))

    @property
    def size(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64))

    @property
    def column_names(self) -> list[str]:
        if not self.shape:
            return [self.name]

        return [f"{self.name}[{','.join(str(index) for index in indices)}]" for indices in itertools.product(*[range(size) for size in self.shape])]


class ParameterLayout:
    """Ordered named blocks describing how a flat unconstrained vector splits into shaped arrays."""

    def __init__(self, blocks: list[ParameterBlock]) -> None:
        if len({block.name for block in blocks}) != len(blocks):
            raise InvalidArgumentError(f"Parameter block names must be unique, got {[block.name for block in blocks]}.")

        self.blocks = tuple(blocks)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({', '.join(f'{block.name}={block.shape}' for block in self.blocks)})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ParameterLayout) and self.blocks == other.blocks

    def __hash__(self) -> int:
        return hash(self.blocks)

    def __len__(self) -> int:
        return self.size

    def __iter__(self) -> Iterator[ParameterBlock]:
        return iter(self.blocks)

    def __contains__(self, name: str) -> bool:
        return name in self.slices

    def __getitem__(self, name: str) -> ParameterBlock:
        return self.blocks[self._positions[name]]

    @cached_property
    def size(self) -> int:
        return sum(block.size for block in self.blocks)

    @cached_property
    def slices(self) -> dict[str, slice]:
        bounds = np.cumsum([0, *[block.size for block in self.blocks]])
        return {block.name: slice(int(start), int(stop)) for block, start, stop in zip(self.blocks, bounds[:-1], bounds[1:])}

    @cached_property
    def column_names(self) -> list[str]:
        return [name for block in self.blocks for name in block.column_names]

    @cached_property
    def _positions(self) -> dict[str, int]:
        return {block.name: position for position, block in enumerate(self.blocks)}

    def unflatten(self, vector: Any) -> dict[str, Any]:
        """Split a flat vector (numpy or jax) into named, shaped blocks."""
        if vector.shape[-1] != self.size:
            raise ConsistencyError(f"Parameter vector has {vector.shape[-1]} entries but {self!r} needs {self.size}.")

        return {block.name: vector[..., self.slices[block.name]].reshape((*vector.shape[:-1], *block.shape)) for block in self.blocks}

    def flatten(self, values: Mapping[str, Any]) -> np.ndarray:
        if missing := [block.name for block in self.blocks if block.name not in values]:
            raise ConsistencyError(f"Missing parameter block(s) {missing} for {self!r}.")

        parts = []
        for block in self.blocks:
            if (array := np.asarray(values[block.name], dtype=np.float64)).shape != block.shape:
                raise ConsistencyError(f"Parameter block '{block.name}' should have shape {block.shape}, got {array.shape}.")
            parts.append(array.reshape(-1))

        return np.concatenate(parts) if parts else np.zeros(0)

    def to_json(self) -> str:
        return json.dumps([{"name": block.name, "shape": list(block.shape)} for block in self.blocks])

    @classmethod
    def from_json(cls, text: str) -> ParameterLayout:
        return cls([ParameterBlock(name=item["name"], shape=tuple(item["shape"])) for item in json.loads(text)])


class ParameterState:
    """One point of the unconstrained parameter space: a flat float64 vector plus the layout naming its entries."""

    def __init__(self, vector: Union[np.ndarray, list], layout: ParameterLayout) -> None:
        self.vector = np.array(vector, dtype=np.float64).reshape(-1)
        self.layout = layout

        if len(self.vector) != layout.size:
            raise ConsistencyError(f"Parameter vector has {len(self.vector)} entries but {layout!r} needs {layout.size}.")

    def __repr__(self) -> str:
        return f"{type(self).__name__}(layout={self.layout!r})"

    def __getitem__(self, name: str) -> np.ndarray:
        return self.layout.unflatten(self.vector)[name]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ParameterState) and self.layout == other.layout and np.array_equal(self.vector, other.vector)

    @property
    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.vector)))

    def blocks(self) -> dict[str, np.ndarray]:
        return self.layout.unflatten(self.vector)

    def replace(self, **blocks: np.ndarray) -> ParameterState:
        """Return a copy with the named blocks overwritten."""
        return type(self)(self.layout.flatten({**self.blocks(), **blocks}), self.layout)

    @classmethod
    def from_blocks(cls, blocks: Mapping[str, Any], layout: ParameterLayout) -> ParameterState:
        return cls(layout.flatten(blocks), layout)

    @classmethod
    def zeros(cls, layout: ParameterLayout) -> ParameterState:
        return cls(np.zeros(layout.size), layout)
