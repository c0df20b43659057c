from __future__ import annotations

import logging
import os
import pathlib
import tempfile
from typing import Any, Union

import numpy as np
import sqlalchemy
import sqlalchemy.exc
from sqlalchemy import insert, select

from mcdh.errors import DrawsVersionError, InvalidArgumentError
from mcdh.frame import Frame
from mcdh.inference.draws import PosteriorDraws
from mcdh.model.layout import ParameterLayout

from .models import Model, StoreInfo, Parameter, Chain, Draw, to_blob, from_blob
from .session import Session

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]


class DrawStore:
    """
    A SQLite file holding one PosteriorDraws: a 'store_info' header (format version, model kind, layout, config hash),
    one 'parameter' row per scalar parameter carrying all of its draws as a chain-major blob, per-'chain' provenance
    and one 'draw' row of sampler statistics per chain and iteration.
    """

    class Settings:
        format_version = 2
        insert_batch = 1000

    def __init__(self, path: PathLike) -> None:
        self.path = pathlib.Path(path)
        self.engine = sqlalchemy.create_engine(f"sqlite:///{self.path.as_posix()}", future=True)
        self.session = Session(bind=self.engine, future=True)
        self.transaction = Transaction(self)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(path={os.fspath(self.path)!r})"

    def __enter__(self) -> DrawStore:
        return self

    def __exit__(self, ex_type: Any, ex_value: Any, ex_traceback: Any) -> None:
        self.close()

    def close(self) -> None:
        self.session.close()
        self.engine.dispose()

    def write(self, draws: PosteriorDraws) -> None:
        """Create the tables and insert every draw in one transaction."""
        Model.metadata.create_all(self.engine)
        chains, samples, dimension = draws.values.shape

        with self.transaction:
            self.session.run(insert(StoreInfo), [dict(
                id=1, format_version=self.Settings.format_version, model_kind=draws.model_kind, layout=draws.layout.to_json(),
                config_hash=draws.config_hash, seed=int(draws.seed), n_chains=chains, n_samples=samples, dimension=dimension,
            )])

            block_of_column = [block.name for block in draws.layout.blocks for _ in range(block.size)]
            self.session.run(insert(Parameter), [
                dict(column_index=index, name=name, block=block_of_column[index], values=to_blob(draws.values[:, :, index]))
                for index, name in enumerate(draws.layout.column_names)
            ])

            self.session.run(insert(Chain), [
                dict(chain=chain, seed=int(draws.seed), step_size=float(draws.step_sizes[chain]), inv_mass=to_blob(draws.inv_mass[chain])) for chain in range(chains)
            ])

            rows = [
                dict(
                    chain=chain, iteration=iteration,
                    accept_stat=float(draws.stats["accept_stat"][chain, iteration]), tree_depth=int(draws.stats["tree_depth"][chain, iteration]),
                    n_leapfrog=int(draws.stats["n_leapfrog"][chain, iteration]), divergent=bool(draws.stats["divergent"][chain, iteration]),
                    energy=float(draws.stats["energy"][chain, iteration]), log_density=float(draws.stats["log_density"][chain, iteration]),
                )
                for chain in range(chains) for iteration in range(samples)
            ]
            for start in range(0, len(rows), self.Settings.insert_batch):
                self.session.run(insert(Draw), rows[start:start + self.Settings.insert_batch])

    def read(self) -> PosteriorDraws:
        """Check the format version, then rebuild the PosteriorDraws exactly as written."""
        info = self.info()

        layout = ParameterLayout.from_json(info["layout"])
        chains, samples, dimension = info["n_chains"], info["n_samples"], info["dimension"]
        if layout.size != dimension:
            raise DrawsVersionError(f"Store '{self.path}' declares {dimension} parameters but its layout describes {layout.size}.")

        parameter_rows = self.session.run(select(Parameter.__table__).order_by(Parameter.column_index)).mappings
        chain_rows = self.session.run(select(Chain.__table__).order_by(Chain.chain)).mappings
        draw_rows = self.session.run(select(Draw.__table__).order_by(Draw.chain, Draw.iteration)).mappings
        if len(parameter_rows) != dimension:
            raise DrawsVersionError(f"Store '{self.path}' is incomplete: expected {dimension} parameter(s), found {len(parameter_rows)}.")
        if len(chain_rows) != chains or len(draw_rows) != chains * samples:
            raise DrawsVersionError(f"Store '{self.path}' is incomplete: expected {chains} chain(s) x {samples} draw(s), found {len(chain_rows)} chain(s) and {len(draw_rows)} draw(s).")

        values = np.empty((chains, samples, dimension))
        for row in parameter_rows:
            values[:, :, row["column_index"]] = from_blob(row["values"]).reshape(chains, samples)
        stats = {
            name: np.array([row[name] for row in draw_rows], dtype=dtype).reshape(chains, samples)
            for name, dtype in [("accept_stat", np.float64), ("tree_depth", np.int64), ("n_leapfrog", np.int64), ("divergent", bool), ("energy", np.float64), ("log_density", np.float64)]
        }

        return PosteriorDraws(
            values=values, layout=layout, stats=stats, seed=info["seed"],
            step_sizes=np.array([row["step_size"] for row in chain_rows], dtype=np.float64),
            inv_mass=np.stack([from_blob(row["inv_mass"]) for row in chain_rows]) if chain_rows else np.empty((0, dimension)),
            model_kind=info["model_kind"], config_hash=info["config_hash"],
        )

    def info(self) -> dict[str, Any]:
        """The 'store_info' header. Raises DrawsVersionError when the file is not a draw store or has another format version."""
        try:
            has_header = sqlalchemy.inspect(self.engine).has_table(StoreInfo.__tablename__)
        except sqlalchemy.exc.DatabaseError as ex:
            raise DrawsVersionError(f"File '{self.path}' is not a draw store: {ex.orig}") from ex

        if not has_header:
            raise DrawsVersionError(f"File '{self.path}' is not a draw store: it has no '{StoreInfo.__tablename__}' table.")

        if (row := self.session.run(select(StoreInfo.__table__)).mappings) and len(row) == 1:
            info = dict(row[0])
        else:
            raise DrawsVersionError(f"File '{self.path}' should hold exactly one '{StoreInfo.__tablename__}' row.")

        if info["format_version"] != self.Settings.format_version:
            raise DrawsVersionError(f"Draw store '{self.path}' has format version {info['format_version']}, this version of mcdh reads version {self.Settings.format_version}.")

        return info

    def parameters(self) -> Frame:
        """The column index, name and block of every scalar parameter."""
        return self.session.run(select(Parameter.column_index, Parameter.name, Parameter.block).order_by(Parameter.column_index)).frame

    def column(self, name: str) -> np.ndarray:
        """Every draw of the parameter called 'name' as an (n_chains, n_samples) array, read without touching the other parameters."""
        info = self.info()
        if not (rows := self.session.run(select(Parameter.values).where(Parameter.name == name)).all):
            raise InvalidArgumentError(f"Store '{self.path}' has no parameter named '{name}'.")

        return from_blob(rows[0][0]).reshape(info["n_chains"], info["n_samples"])


class Transaction:
    def __init__(self, store: DrawStore) -> None:
        self.store = store

    def __repr__(self) -> str:
        return f"{type(self).__name__}(store={self.store!r})"

    def __enter__(self) -> Transaction:
        self.store.session.rollback()
        self.store.session.begin()
        return self

    def __exit__(self, ex_type: Any, ex_value: Any, ex_traceback: Any) -> None:
        self.store.session.commit() if ex_type is None else self.store.session.rollback()


def persist_draws(draws: PosteriorDraws, path: PathLike) -> pathlib.Path:
    """Write 'draws' to a temporary sibling of 'path' and move it into place. An existing file at 'path' is replaced."""
    target = pathlib.Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)

    handle, temporary = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
    os.close(handle)
    os.remove(temporary)

    try:
        with DrawStore(temporary) as store:
            store.write(draws)
        os.replace(temporary, target)
    except BaseException:
        if os.path.exists(temporary):
            os.remove(temporary)
        raise

    logger.info(f"Wrote {draws.n_chains} chain(s) x {draws.n_samples} draw(s) of {draws.layout.size} parameter(s) to '{target}'.")
    return target


def load_draws(path: PathLike) -> PosteriorDraws:
    if not (source := pathlib.Path(path)).is_file():
        raise InvalidArgumentError(f"No draw store at '{source}'.")

    with DrawStore(source) as store:
        draws = store.read()

    logger.info(f"Loaded {draws.n_chains} chain(s) x {draws.n_samples} draw(s) from '{source}'.")
    return draws
