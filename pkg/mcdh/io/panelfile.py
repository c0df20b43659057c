"""
The canonical long-format panel file: one row per alternative of each choice occasion, UTF-8, comma separated, with the
header 'individual_id,category_id,occasion_id,time_bucket,brand_id,price,chosen' followed by any extra feature columns.
A sidecar '<file>.meta.json' may declare the id orders, baselines, grid and already-standardized prices.
"""

from __future__ import annotations

import logging
import os
import pathlib
from dataclasses import dataclass, field
from typing import Any, Optional, Union

import numpy as np
import pandas as pd

from mcdh.errors import SchemaError
from mcdh.frame import Frame
from mcdh.model.choice import Panel
from .manifest import write_json, read_json

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]

COLUMNS = ("individual_id", "category_id", "occasion_id", "time_bucket", "brand_id", "price", "chosen")
SIDECAR_FORMAT, SIDECAR_VERSION = "mcdh-panel", 1


def sidecar_path(path: PathLike) -> pathlib.Path:
    path = pathlib.Path(path)
    return path.with_name(f"{path.name}.meta.json")


@dataclass(frozen=True)
class CategorySidecar:
    name: str
    brands: tuple[str, ...]
    baseline: str
    extra_features: tuple[str, ...] = ()


@dataclass(frozen=True)
class PanelSidecar:
    """Declared structure of a panel file. With 'prices_standardized' the price column is used as is."""
    individual_ids: tuple[str, ...]
    categories: tuple[CategorySidecar, ...]
    grid: tuple[float, ...]
    prices_standardized: bool = True
    price_location: tuple[float, ...] = field(default=())
    price_scale: tuple[float, ...] = field(default=())
    factors: int = 0

    def to_dict(self) -> dict[str, Any]:
        return {
            "format": SIDECAR_FORMAT,
            "version": SIDECAR_VERSION,
            "individual_ids": list(self.individual_ids),
            "categories": [{"name": category.name, "brands": list(category.brands), "baseline": category.baseline, "extra_features": list(category.extra_features)} for category in self.categories],
            "grid": list(self.grid),
            "prices_standardized": self.prices_standardized,
            "price_location": list(self.price_location),
            "price_scale": list(self.price_scale),
            "factors": self.factors,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> PanelSidecar:
        if data.get("format") != SIDECAR_FORMAT or data.get("version") != SIDECAR_VERSION:
            raise SchemaError(f"Sidecar format should be '{SIDECAR_FORMAT}' version {SIDECAR_VERSION}, got '{data.get('format')}' version {data.get('version')}.")

        try:
            return cls(
                individual_ids=tuple(str(value) for value in data["individual_ids"]),
                categories=tuple(CategorySidecar(name=str(item["name"]), brands=tuple(str(brand) for brand in item["brands"]), baseline=str(item["baseline"]),
                                                 extra_features=tuple(item.get("extra_features", ()))) for item in data["categories"]),
                grid=tuple(float(point) for point in data["grid"]),
                prices_standardized=bool(data.get("prices_standardized", True)),
                price_location=tuple(float(value) for value in data.get("price_location", ())),
                price_scale=tuple(float(value) for value in data.get("price_scale", ())),
                factors=int(data.get("factors", 0)),
            )
        except (KeyError, TypeError, ValueError) as ex:
            raise SchemaError(f"Malformed panel sidecar: {ex!r}.")

    @classmethod
    def from_panel(cls, panel: Panel) -> PanelSidecar:
        return cls(
            individual_ids=panel.individual_ids,
            categories=tuple(CategorySidecar(name=layout.name, brands=layout.brands, baseline=layout.brands[layout.baseline], extra_features=layout.extra_features) for layout in panel.dims.categories),
            grid=tuple(panel.grid.points.tolist()),
            prices_standardized=True,
            price_location=panel.price_location,
            price_scale=panel.price_scale,
            factors=panel.dims.L,
        )


def read_sidecar(path: PathLike) -> Optional[PanelSidecar]:
    return PanelSidecar.from_dict(read_json(meta)) if (meta := sidecar_path(path)).is_file() else None


def panel_to_frame(panel: Panel) -> Frame:
    """The long-format rows of a panel, in category order and then occasion order, alternatives in brand order."""
    frames = []
    for block, layout in zip(panel.blocks, panel.dims.categories):
        n, J = len(block), layout.n_brands
        occasion = np.repeat(np.arange(n), J)
        brand = np.tile(np.arange(J), n)

        columns = {
            "individual_id": [panel.individual_ids[index] for index in block.individual[occasion]],
            "category_id": layout.name,
            "occasion_id": block.occasion[occasion].astype(str),
            "time_bucket": block.time[occasion],
            "brand_id": [layout.brands[index] for index in brand],
            "price": block.features[occasion, brand, layout.price_position],
            "chosen": (block.chosen[occasion] == brand).astype(np.int64),
        }
        for position, name in enumerate(layout.extra_features, start=layout.price_position + 1):
            columns[name] = block.features[occasion, brand, position]

        frames.append(pd.DataFrame(columns))

    extras = list(dict.fromkeys(name for layout in panel.dims.categories for name in layout.extra_features))
    return Frame(pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=list(COLUMNS)), columns=[*COLUMNS, *extras])


def export_panel(panel: Panel, path: PathLike) -> pathlib.Path:
    """Write the panel file and its sidecar so that ingest reproduces the same Panel."""
    target = panel_to_frame(panel).write_csv(path)
    write_json(sidecar_path(target), PanelSidecar.from_panel(panel).to_dict())

    logger.info(f"Wrote {panel.n_observations} occasion(s) to '{target}'.")
    return pathlib.Path(target)
