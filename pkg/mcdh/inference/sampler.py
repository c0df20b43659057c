"""
Multinomial No-U-Turn sampling with a diagonal metric.

Trajectories grow by doubling in a random direction. Within a subtree the proposal is drawn uniformly in proportion to
exp(-H); at the top level the new subtree is preferred (biased progressive sampling). Doubling stops at a divergence,
at max_tree_depth, or when the generalized U-turn criterion fails, which is checked across the merged trajectory and
across the junction of the two subtrees.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from mcdh.config import SamplerConfig
from mcdh.errors import InitializationError, InvalidArgumentError
from .adaptation import DualAveraging, WindowedAdaptation
from .draws import PosteriorDraws

logger = logging.getLogger(__name__)

Density = Callable[[np.ndarray], tuple[float, np.ndarray]]


class Settings:
    max_step_size = 1e7
    step_size_search_limit = 100


@dataclass(frozen=True)
class Point:
    position: np.ndarray = field(repr=False)
    log_density: float
    gradient: np.ndarray = field(repr=False)

    @classmethod
    def evaluate(cls, position: np.ndarray, density: Density) -> Point:
        value, gradient = density(position)
        if not (np.isfinite(value) and np.all(np.isfinite(gradient))):
            value = -np.inf

        return cls(position=position, log_density=float(value), gradient=gradient)


@dataclass(frozen=True)
class NutsStats:
    accept_stat: float
    tree_depth: int
    n_leapfrog: int
    divergent: bool
    energy: float


@dataclass
class _Tree:
    """A contiguous piece of trajectory. 'minus' and 'plus' are its earliest and latest points in integration time."""
    minus: Point
    plus: Point
    momentum_minus: np.ndarray = field(repr=False)
    momentum_plus: np.ndarray = field(repr=False)
    rho: np.ndarray = field(repr=False)
    log_weight: float
    proposal: Point
    valid: bool = True
    divergent: bool = False
    accept_sum: float = 0.0
    n_leapfrog: int = 0


def kinetic_energy(momentum: np.ndarray, inv_mass: np.ndarray) -> float:
    return 0.5 * float(np.dot(momentum, inv_mass * momentum))


def leapfrog(position: np.ndarray, momentum: np.ndarray, step_size: float, grad_fn: Callable[[np.ndarray], np.ndarray], inv_mass: Optional[np.ndarray] = None) -> tuple[np.ndarray, np.ndarray]:
    """One symplectic leapfrog step for the Hamiltonian -log p(x) + 0.5 p' M^-1 p. 'grad_fn' returns the gradient of log p."""
    inv_mass = np.ones_like(position) if inv_mass is None else inv_mass
    point = Point(position=np.asarray(position, dtype=np.float64), log_density=0.0, gradient=np.asarray(grad_fn(position), dtype=np.float64))
    new_point, new_momentum = _leapfrog(point, np.asarray(momentum, dtype=np.float64), step_size, inv_mass, lambda x: (0.0, grad_fn(x)))
    return new_point.position, new_momentum


def _leapfrog(point: Point, momentum: np.ndarray, step_size: float, inv_mass: np.ndarray, density: Density) -> tuple[Point, np.ndarray]:
    momentum = momentum + 0.5 * step_size * point.gradient
    position = point.position + step_size * inv_mass * momentum
    new_point = Point.evaluate(position, density)
    if np.isfinite(new_point.log_density):
        momentum = momentum + 0.5 * step_size * new_point.gradient

    return new_point, momentum


def _no_u_turn(p_sharp_minus: np.ndarray, p_sharp_plus: np.ndarray, rho: np.ndarray) -> bool:
    return float(np.dot(p_sharp_plus, rho)) > 0 and float(np.dot(p_sharp_minus, rho)) > 0


class NutsKernel:
    """A single-chain NUTS transition kernel with a fixed step size and diagonal inverse mass."""

    def __init__(self, density: Density, step_size: float, inv_mass: np.ndarray, max_tree_depth: int = 10, divergence_threshold: float = 1000.0) -> None:
        self.density = density
        self.step_size = step_size
        self.inv_mass = inv_mass
        self.max_tree_depth = max_tree_depth
        self.divergence_threshold = divergence_threshold

    def __repr__(self) -> str:
        return f"{type(self).__name__}(step_size={self.step_size:g}, max_tree_depth={self.max_tree_depth})"

    def transition(self, current: Point, rng: np.random.Generator) -> tuple[Point, NutsStats]:
        if not np.isfinite(current.log_density):
            raise InitializationError("The log density is not finite at the current point; NUTS cannot start from it.")

        momentum = rng.standard_normal(len(current.position)) / np.sqrt(self.inv_mass)
        joint0 = current.log_density - kinetic_energy(momentum, self.inv_mass)

        tree = _Tree(minus=current, plus=current, momentum_minus=momentum, momentum_plus=momentum, rho=momentum.copy(), log_weight=0.0, proposal=current)
        accept_sum, n_leapfrog, depth, divergent = 0.0, 0, 0, False

        while depth < self.max_tree_depth:
            direction = 1 if rng.uniform() < 0.5 else -1
            if direction > 0:
                subtree = self._build(tree.plus, tree.momentum_plus, direction, depth, joint0, rng)
            else:
                subtree = self._build(tree.minus, tree.momentum_minus, direction, depth, joint0, rng)

            accept_sum += subtree.accept_sum
            n_leapfrog += subtree.n_leapfrog

            if not subtree.valid:
                divergent = subtree.divergent
                break

            depth += 1
            if rng.uniform() < math.exp(min(0.0, subtree.log_weight - tree.log_weight)):
                tree.proposal = subtree.proposal

            left, right = (tree, subtree) if direction > 0 else (subtree, tree)
            merged = self._merge(left, right, log_weight=np.logaddexp(tree.log_weight, subtree.log_weight), proposal=tree.proposal)
            tree = merged
            if not merged.valid:
                break

        proposal = tree.proposal
        accept_stat = accept_sum / n_leapfrog if n_leapfrog else 0.0
        return proposal, NutsStats(accept_stat=accept_stat, tree_depth=depth, n_leapfrog=n_leapfrog, divergent=divergent, energy=-joint0)

    def _build(self, start: Point, momentum: np.ndarray, direction: int, depth: int, joint0: float, rng: np.random.Generator) -> _Tree:
        if depth == 0:
            point, momentum = _leapfrog(start, momentum, direction * self.step_size, self.inv_mass, self.density)
            joint = point.log_density - kinetic_energy(momentum, self.inv_mass) if np.isfinite(point.log_density) else -np.inf
            if np.isnan(joint):
                joint = -np.inf

            divergent = (joint0 - joint) > self.divergence_threshold
            return _Tree(minus=point, plus=point, momentum_minus=momentum, momentum_plus=momentum, rho=momentum.copy(), log_weight=joint - joint0,
                         proposal=point, valid=not divergent, divergent=divergent, accept_sum=min(1.0, math.exp(min(0.0, joint - joint0))), n_leapfrog=1)

        inner = self._build(start, momentum, direction, depth - 1, joint0, rng)
        if not inner.valid:
            return inner

        edge, edge_momentum = (inner.plus, inner.momentum_plus) if direction > 0 else (inner.minus, inner.momentum_minus)
        outer = self._build(edge, edge_momentum, direction, depth - 1, joint0, rng)
        if not outer.valid:
            outer.accept_sum += inner.accept_sum
            outer.n_leapfrog += inner.n_leapfrog
            return outer

        log_weight = np.logaddexp(inner.log_weight, outer.log_weight)
        proposal = outer.proposal if rng.uniform() < math.exp(min(0.0, outer.log_weight - log_weight)) else inner.proposal

        left, right = (inner, outer) if direction > 0 else (outer, inner)
        merged = self._merge(left, right, log_weight=log_weight, proposal=proposal)
        merged.accept_sum = inner.accept_sum + outer.accept_sum
        merged.n_leapfrog = inner.n_leapfrog + outer.n_leapfrog
        return merged

    def _merge(self, left: _Tree, right: _Tree, log_weight: float, proposal: Point) -> _Tree:
        inv_mass = self.inv_mass
        rho = left.rho + right.rho

        valid = (
            _no_u_turn(inv_mass * left.momentum_minus, inv_mass * right.momentum_plus, rho)
            and _no_u_turn(inv_mass * left.momentum_minus, inv_mass * right.momentum_minus, left.rho + right.momentum_minus)
            and _no_u_turn(inv_mass * left.momentum_plus, inv_mass * right.momentum_plus, right.rho + left.momentum_plus)
        )

        return _Tree(minus=left.minus, plus=right.plus, momentum_minus=left.momentum_minus, momentum_plus=right.momentum_plus, rho=rho,
                     log_weight=float(log_weight), proposal=proposal, valid=valid)


def nuts_draw(current: Point, density: Density, config: SamplerConfig, rng: np.random.Generator, step_size: float = 0.1, inv_mass: Optional[np.ndarray] = None) -> tuple[Point, NutsStats]:
    """One NUTS transition from 'current' with the given step size and diagonal inverse mass (unit by default)."""
    if not isinstance(current, Point):
        current = Point.evaluate(np.asarray(current, dtype=np.float64), density)

    inv_mass = np.ones(len(current.position)) if inv_mass is None else inv_mass
    return NutsKernel(density, step_size=step_size, inv_mass=inv_mass, max_tree_depth=config.max_tree_depth, divergence_threshold=config.divergence_threshold).transition(current, rng)


def find_reasonable_step_size(current: Point, density: Density, step_size: float, inv_mass: np.ndarray, rng: np.random.Generator) -> float:
    """Double or halve the step size until a single leapfrog step crosses an acceptance probability of 0.8."""
    def energy_change(step: float) -> float:
        momentum = rng.standard_normal(len(current.position)) / np.sqrt(inv_mass)
        joint0 = current.log_density - kinetic_energy(momentum, inv_mass)
        point, momentum = _leapfrog(current, momentum, step, inv_mass, density)
        joint = point.log_density - kinetic_energy(momentum, inv_mass)
        return joint - joint0 if np.isfinite(joint) else -np.inf

    direction = 1 if energy_change(step_size) > math.log(0.8) else -1
    for _ in range(Settings.step_size_search_limit):
        change = energy_change(step_size)
        if (direction == 1 and not change > math.log(0.8)) or (direction == -1 and not change < math.log(0.8)):
            break

        step_size = step_size * 2.0 if direction == 1 else step_size * 0.5
        if step_size > Settings.max_step_size:
            logger.warning(f"Step size search exceeded {Settings.max_step_size:g}; the target looks improper in some direction.")
            return Settings.max_step_size
        if step_size == 0:
            raise InitializationError("Step size search collapsed to zero; the log density gradient is not usable at the initial point.")

    return step_size


@dataclass
class ChainResult:
    positions: np.ndarray = field(repr=False)
    accept_stat: np.ndarray = field(repr=False)
    tree_depth: np.ndarray = field(repr=False)
    n_leapfrog: np.ndarray = field(repr=False)
    divergent: np.ndarray = field(repr=False)
    energy: np.ndarray = field(repr=False)
    log_density: np.ndarray = field(repr=False)
    step_size: float
    inv_mass: np.ndarray = field(repr=False)
    warmup_divergences: int = 0


def run_chain(density: Density, initial: np.ndarray, config: SamplerConfig, rng: np.random.Generator, chain: int = 0) -> ChainResult:
    """Warm up (step size by dual averaging, diagonal metric in windows), then draw config.samples with adaptation frozen."""
    dimension = len(initial)
    current = Point.evaluate(np.asarray(initial, dtype=np.float64), density)
    if not np.isfinite(current.log_density):
        raise InitializationError(f"Chain {chain}: the log density is not finite at the initial point.")

    inv_mass = np.ones(dimension)
    step_size = find_reasonable_step_size(current, density, 1.0, inv_mass, rng)
    averaging = DualAveraging(config.target_accept, step_size)
    windows = WindowedAdaptation(config.warmup, dimension)
    warmup_divergences = 0

    logger.info(f"Chain {chain}: warmup of {config.warmup} iterations starting with step size {step_size:g}.")
    for iteration in range(config.warmup):
        kernel = NutsKernel(density, step_size, inv_mass, config.max_tree_depth, config.divergence_threshold)
        current, stats = kernel.transition(current, rng)
        warmup_divergences += stats.divergent
        step_size = averaging.learn(stats.accept_stat)

        window_closed, new_inv_mass = windows.learn(current.position)
        if window_closed:
            inv_mass = new_inv_mass
            step_size = find_reasonable_step_size(current, density, step_size, inv_mass, rng)
            averaging.restart(step_size)

        logger.debug(f"Chain {chain} warmup {iteration}: depth {stats.tree_depth}, step size {step_size:g}, accept {stats.accept_stat:.3f}.")

    step_size = averaging.final_step_size
    logger.info(f"Chain {chain}: warmup finished with step size {step_size:g} and {warmup_divergences} divergent transitions.")

    kernel = NutsKernel(density, step_size, inv_mass, config.max_tree_depth, config.divergence_threshold)
    records = {name: np.empty(config.samples, dtype=dtype) for name, dtype in [("accept_stat", float), ("tree_depth", np.int64), ("n_leapfrog", np.int64), ("divergent", bool), ("energy", float), ("log_density", float)]}
    positions = np.empty((config.samples, dimension))

    for iteration in range(config.samples):
        current, stats = kernel.transition(current, rng)
        positions[iteration] = current.position
        for name in ("accept_stat", "tree_depth", "n_leapfrog", "divergent", "energy"):
            records[name][iteration] = getattr(stats, name)
        records["log_density"][iteration] = current.log_density

        logger.debug(f"Chain {chain} draw {iteration}: depth {stats.tree_depth}, accept {stats.accept_stat:.3f}.")

    if divergences := int(records["divergent"].sum()):
        logger.warning(f"Chain {chain}: {divergences} divergent transitions after warmup.")

    return ChainResult(positions=positions, step_size=step_size, inv_mass=inv_mass, warmup_divergences=warmup_divergences, **records)


def chain_generators(seed: int, chains: int) -> list[np.random.Generator]:
    """Independent per-chain generators spawned from one seed; chain c always gets the same stream."""
    return [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(chains)]


def run_chains(density: Density, config: SamplerConfig, dimension: Optional[int] = None, initial_positions: Optional[Sequence[np.ndarray]] = None,
               layout=None, model_kind: str = "", config_hash: str = "") -> PosteriorDraws:
    """
    Run config.chains independent chains and collect their post-warmup draws. Chains start from uniform(-r, r) draws unless
    'initial_positions' are given. With workers > 1 (or MCDH_WORKERS set) chains run in a thread pool; results do not
    depend on the worker count.
    """
    config = config.with_workers_from_env()
    layout = layout if layout is not None else getattr(getattr(density, "model", None), "layout", None)
    dimension = dimension if dimension is not None else (layout.size if layout is not None else getattr(density, "dimension", None))
    if dimension is None:
        raise InvalidArgumentError("run_chains needs the parameter dimension, either directly or through a density exposing 'dimension'.")
    if initial_positions is not None and len(initial_positions) != config.chains:
        raise InvalidArgumentError(f"Expected {config.chains} initial positions, got {len(initial_positions)}.")

    generators = chain_generators(config.seed, config.chains)
    starts = [
        np.asarray(initial_positions[chain], dtype=np.float64) if initial_positions is not None else generators[chain].uniform(-config.init_radius, config.init_radius, size=dimension)
        for chain in range(config.chains)
    ]

    def work(chain: int) -> ChainResult:
        return run_chain(density, starts[chain], config, generators[chain], chain=chain)

    if config.workers > 1 and config.chains > 1:
        with ThreadPoolExecutor(max_workers=min(config.workers, config.chains)) as pool:
            results = list(pool.map(work, range(config.chains)))
    else:
        results = [work(chain) for chain in range(config.chains)]

    return PosteriorDraws.from_chains(results, layout=layout, dimension=dimension, seed=config.seed, model_kind=model_kind, config_hash=config_hash)
