from __future__ import annotations

import logging
import os
import pathlib
from dataclasses import dataclass, field, asdict
from typing import Any, Optional, Union

import numpy as np
import pandas as pd

from mcdh.config import IngestConfig
from mcdh.errors import ConsistencyError, InvalidArgumentError, SchemaError
from mcdh.gp import TimeGrid
from mcdh.model.choice import CategoryBlock, Panel
from mcdh.model.dims import CategoryLayout, ModelDims
from .panelfile import COLUMNS, PanelSidecar, read_sidecar

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]
ID_COLUMNS = ("individual_id", "category_id", "occasion_id", "brand_id")


@dataclass(frozen=True)
class IngestMetadata:
    """What ingest decided: id orders, baselines, standardization constants, and what the filters dropped."""
    source: str
    individual_ids: tuple[str, ...]
    categories: tuple[str, ...]
    brands: tuple[tuple[str, ...], ...]
    baselines: tuple[str, ...]
    price_location: tuple[float, ...]
    price_scale: tuple[float, ...]
    coefficient_names: tuple[str, ...]
    training_buckets: int
    n_rows: int
    n_occasions: int
    from_sidecar: bool = False
    zero_variance_categories: tuple[str, ...] = ()
    dropped_individuals: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class IngestResult:
    panel: Panel
    metadata: IngestMetadata


def _rows(frame: pd.DataFrame, mask: Any) -> list[int]:
    """1-based data row numbers (header excluded) of the masked rows."""
    return (frame.index[np.asarray(mask, dtype=bool)] + 1).tolist()


def _read(path: pathlib.Path) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, dtype={name: str for name in ID_COLUMNS}, keep_default_na=False, na_values=[""], float_precision="round_trip", encoding="utf-8")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as ex:
        raise SchemaError(f"Cannot parse panel file '{path}': {ex}")

    if missing := [name for name in COLUMNS if name not in frame.columns]:
        raise SchemaError(f"Panel file '{path}' lacks column(s) {missing}. Expected the columns {list(COLUMNS)} followed by any extra features.")
    if list(frame.columns[:len(COLUMNS)]) != list(COLUMNS):
        raise SchemaError(f"Panel file '{path}' must start with the columns {list(COLUMNS)} in that order, got {list(frame.columns[:len(COLUMNS)])}.")

    return frame


def _validate_values(frame: pd.DataFrame, extras: list[str]) -> pd.DataFrame:
    if (bad := frame[list(ID_COLUMNS)].isna().any(axis=1)).any():
        raise SchemaError("Empty identifier(s).", rows=_rows(frame, bad))

    time = pd.to_numeric(frame["time_bucket"], errors="coerce")
    if (bad := time.isna() | (time != np.floor(time)) | ~np.isfinite(time)).any():
        raise SchemaError("time_bucket must be an integer.", rows=_rows(frame, bad))

    price = pd.to_numeric(frame["price"], errors="coerce")
    if (bad := price.isna() | ~np.isfinite(price)).any():
        raise SchemaError("price must be a finite number.", rows=_rows(frame, bad))

    chosen = pd.to_numeric(frame["chosen"], errors="coerce")
    if (bad := ~chosen.isin([0, 1])).any():
        raise SchemaError("chosen must be 0 or 1.", rows=_rows(frame, bad))

    frame = frame.assign(time_bucket=time.astype(np.int64), price=price.astype(np.float64), chosen=chosen.astype(np.int64))
    for name in extras:
        values = pd.to_numeric(frame[name], errors="coerce")
        frame[name] = values.astype(np.float64)

    return frame


def _resolve_ids(frame: pd.DataFrame, sidecar: Optional[PanelSidecar]) -> tuple[list[str], list[str], dict[str, list[str]], np.ndarray]:
    """Id orders of individuals, categories and brands plus the grid points. Without a sidecar orders are sorted and the grid spans the observed buckets."""
    if sidecar is None:
        categories = sorted(frame["category_id"].unique())
        brands = {category: sorted(frame.loc[frame["category_id"] == category, "brand_id"].unique()) for category in categories}
        low, high = int(frame["time_bucket"].min()), int(frame["time_bucket"].max())
        return sorted(frame["individual_id"].unique()), categories, brands, np.arange(low, high + 1, dtype=np.float64)

    individuals, categories = list(sidecar.individual_ids), [category.name for category in sidecar.categories]
    brands = {category.name: list(category.brands) for category in sidecar.categories}

    if (bad := ~frame["individual_id"].isin(individuals)).any():
        raise SchemaError("Unknown individual_id(s) not declared in the sidecar.", rows=_rows(frame, bad))
    if (bad := ~frame["category_id"].isin(categories)).any():
        raise SchemaError("Unknown category_id(s) not declared in the sidecar.", rows=_rows(frame, bad))

    known = np.array([brand in brands[category] for category, brand in zip(frame["category_id"], frame["brand_id"])], dtype=bool)
    if (~known).any():
        raise SchemaError("Unknown brand_id(s) for their category.", rows=_rows(frame, ~known))
    if (bad := (frame["time_bucket"] < 0) | (frame["time_bucket"] >= len(sidecar.grid))).any():
        raise SchemaError(f"time_bucket must index the {len(sidecar.grid)}-point grid declared in the sidecar.", rows=_rows(frame, bad))

    return individuals, categories, brands, np.asarray(sidecar.grid, dtype=np.float64)


def _validate_occasions(frame: pd.DataFrame, brands: dict[str, list[str]]) -> pd.DataFrame:
    frame = frame.assign(_occasion=frame.groupby(["individual_id", "category_id", "occasion_id"], sort=False).ngroup())
    groups = frame.groupby("_occasion", sort=False)

    if (bad := groups["chosen"].transform("sum") != 1).any():
        raise SchemaError("Every occasion needs exactly one chosen alternative.", rows=_rows(frame, bad))
    if (bad := frame.duplicated(["_occasion", "brand_id"], keep=False)).any():
        raise SchemaError("Duplicate brand rows within an occasion.", rows=_rows(frame, bad))

    expected = frame["category_id"].map({category: len(members) for category, members in brands.items()})
    if (bad := groups["brand_id"].transform("size") != expected).any():
        raise SchemaError("Occasions must list every brand of their category.", rows=_rows(frame, bad))
    if (bad := groups["time_bucket"].transform("nunique") > 1).any():
        raise SchemaError("All rows of an occasion must share one time_bucket.", rows=_rows(frame, bad))

    return frame


def _activity_filter(frame: pd.DataFrame, individuals: list[str], n_categories: int, T: int, config: IngestConfig) -> tuple[list[str], list[str]]:
    """Keep individuals active in the first head_buckets and last tail_buckets buckets and, in every category, in at least min_active_buckets buckets."""
    occasions = frame.drop_duplicates("_occasion")
    keep = pd.Series(True, index=individuals)

    if config.head_buckets is not None:
        keep &= pd.Series(individuals, index=individuals).isin(occasions.loc[occasions["_time"] < config.head_buckets, "individual_id"])
    if config.tail_buckets is not None:
        keep &= pd.Series(individuals, index=individuals).isin(occasions.loc[occasions["_time"] >= T - config.tail_buckets, "individual_id"])
    if config.min_active_buckets is not None:
        active = occasions.groupby(["individual_id", "_category"])["_time"].nunique()
        enough = (active >= config.min_active_buckets).groupby(level="individual_id").sum() == n_categories
        keep &= enough.reindex(individuals, fill_value=False)

    kept = [individual for individual in individuals if keep[individual]]
    return kept, [individual for individual in individuals if not keep[individual]]


def ingest(path: PathLike, config: Optional[IngestConfig] = None, holdout_buckets: int = 0) -> IngestResult:
    """
    Read a long-format panel file into a Panel. Prices are standardized per category with the mean and SD of the training
    window (all but the last 'holdout_buckets' buckets), and each category's baseline is its brand with the highest training
    share, unless a sidecar declares both. Schema violations raise SchemaError naming the offending data rows.
    """
    config = config if config is not None else IngestConfig()
    if not (source := pathlib.Path(path)).is_file():
        raise InvalidArgumentError(f"No panel file at '{source}'.")

    sidecar = read_sidecar(source)
    frame = _read(source)
    extras_all = list(frame.columns[len(COLUMNS):])
    frame = _validate_values(frame, extras_all)
    n_rows = len(frame)
    if not n_rows:
        raise SchemaError(f"Panel file '{source}' has no rows.")

    individuals, categories, brands, grid_points = _resolve_ids(frame, sidecar)
    extras = {category.name: list(category.extra_features) for category in sidecar.categories} if sidecar is not None else {category: extras_all for category in categories}
    for category in categories:
        if not extras[category]:
            continue
        if missing := [name for name in extras[category] if name not in frame.columns]:
            raise SchemaError(f"Extra feature column(s) {missing} of category '{category}' are missing from '{source}'.")
        if (bad := (frame["category_id"] == category) & ~np.isfinite(frame[extras[category]]).all(axis=1)).any():
            raise SchemaError(f"Extra features of category '{category}' must be finite numbers.", rows=_rows(frame, bad))

    frame = _validate_occasions(frame, brands)
    T = len(grid_points)
    training_buckets = T - holdout_buckets
    if not 0 < training_buckets <= T:
        raise InvalidArgumentError(f"holdout_buckets must lie in [0, {T}), got {holdout_buckets}.")

    frame = frame.assign(
        _time=frame["time_bucket"] - (0 if sidecar is not None else int(grid_points[0])),
        _category=frame["category_id"].map({category: index for index, category in enumerate(categories)}),
    )

    individuals, dropped = _activity_filter(frame, individuals, len(categories), T, config)
    if dropped:
        logger.info(f"Activity filters dropped {len(dropped)} individual(s).")
        frame = frame[frame["individual_id"].isin(individuals)]
    if not individuals:
        raise ConsistencyError(f"No individual of '{source}' passes the activity filters.")

    frame = frame.assign(
        _individual=frame["individual_id"].map({individual: index for index, individual in enumerate(individuals)}),
        _brand=[brands[category].index(brand) for category, brand in zip(frame["category_id"], frame["brand_id"])],
    )

    standardized_in_file = sidecar is not None and sidecar.prices_standardized
    if not standardized_in_file and (bad := frame["price"] <= 0).any():
        raise SchemaError("price must be positive.", rows=_rows(frame, bad))

    training = frame["_time"] < training_buckets
    locations, scales, zero_variance, baselines, layouts, prices = [], [], [], [], [], frame["price"].to_numpy(dtype=np.float64).copy()
    for index, category in enumerate(categories):
        members = (frame["_category"] == index).to_numpy()
        trained = members & training.to_numpy()

        if standardized_in_file:
            location = sidecar.price_location[index] if sidecar.price_location else 0.0
            scale = sidecar.price_scale[index] if sidecar.price_scale else 1.0
        elif config.standardize_prices:
            values = prices[trained]
            location, scale = (float(values.mean()), float(values.std())) if values.size else (0.0, 0.0)
            if not scale > 0:
                logger.warning(f"Prices of category '{category}' have zero variance in the training window; the column is zero-filled.")
                zero_variance.append(category)
                prices[members], scale = 0.0, 1.0
            else:
                prices[members] = (prices[members] - location) / scale
        else:
            location, scale = 0.0, 1.0

        locations.append(location)
        scales.append(scale)

        if sidecar is not None:
            baseline = brands[category].index(sidecar.categories[index].baseline)
        else:
            shares = np.bincount(frame.loc[trained & (frame["chosen"] == 1).to_numpy(), "_brand"].to_numpy(dtype=np.int64), minlength=len(brands[category]))
            baseline = int(np.argmax(shares))

        baselines.append(brands[category][baseline])
        layouts.append(CategoryLayout(name=category, brands=tuple(brands[category]), baseline=baseline, extra_features=tuple(extras[category])))

    dims = ModelDims(individuals=len(individuals), categories=tuple(layouts), time_buckets=T, factors=sidecar.factors if sidecar is not None else 0)
    frame = frame.assign(_price=prices)
    blocks = tuple(_build_block(frame[frame["_category"] == index], index, layout) for index, layout in enumerate(layouts))

    panel = Panel(blocks=blocks, dims=dims, grid=TimeGrid(grid_points), individual_ids=tuple(individuals), price_location=tuple(locations), price_scale=tuple(scales))
    metadata = IngestMetadata(
        source=os.fspath(source), individual_ids=tuple(individuals), categories=tuple(categories), brands=tuple(tuple(brands[category]) for category in categories),
        baselines=tuple(baselines), price_location=tuple(locations), price_scale=tuple(scales), coefficient_names=tuple(dims.coefficient_names),
        training_buckets=training_buckets, n_rows=n_rows, n_occasions=panel.n_observations, from_sidecar=sidecar is not None,
        zero_variance_categories=tuple(zero_variance), dropped_individuals=tuple(dropped),
    )

    logger.info(f"Ingested {panel.n_observations} occasion(s) of {dims.I} individual(s) in {dims.C} category(ies) from '{source}'.")
    return IngestResult(panel=panel, metadata=metadata)


def _build_block(rows: pd.DataFrame, category: int, layout: CategoryLayout) -> CategoryBlock:
    local, first = pd.factorize(rows["_occasion"], sort=False)
    n, brand = len(first), rows["_brand"].to_numpy(dtype=np.int64)
    position = layout.price_position

    features = np.zeros((n, layout.n_brands, layout.n_coefficients))
    for dummy, dummy_brand in enumerate(layout.dummy_brands):
        features[:, dummy_brand, dummy] = 1.0
    features[local, brand, position] = rows["_price"].to_numpy(dtype=np.float64)
    for offset, name in enumerate(layout.extra_features, start=position + 1):
        features[local, brand, offset] = rows[name].to_numpy(dtype=np.float64)

    individual, time, chosen = np.zeros(n, dtype=np.int64), np.zeros(n, dtype=np.int64), np.zeros(n, dtype=np.int64)
    occasion = np.empty(n, dtype=object)
    individual[local] = rows["_individual"].to_numpy(dtype=np.int64)
    time[local] = rows["_time"].to_numpy(dtype=np.int64)
    occasion[local] = rows["occasion_id"].to_numpy(dtype=object)
    picked = (rows["chosen"] == 1).to_numpy()
    chosen[local[picked]] = brand[picked]

    return CategoryBlock(category=category, individual=individual, time=time, features=features, chosen=chosen, occasion=occasion)
