"""Genetic-algorithm identification of the five Pivot model parameters.

The fitness is the deviation score: the plain sum of squared differences
between the simulated and the experimental load response on the shared
resampled displacement grid. The GA is real-coded and generational:
uniform initialization within bounds, tournament selection, blend
crossover, per-gene Gaussian mutation clamped to bounds, elitism, and an
early stop after a configurable number of stalled generations.

All random draws of a generation are made from the master generator
before any fitness evaluation is dispatched, so results are bit-identical
no matter how many worker processes evaluate the population.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from pivotfit.ingest import SignalPair
from pivotfit.pivot import (
    PARAM_NAMES,
    BackboneGeometry,
    PivotParams,
    build_geometry,
    simulate,
)


class FitError(RuntimeError):
    """Raised when the optimization cannot proceed."""


@dataclass(frozen=True)
class ParamBounds:
    """Per-parameter (lower, upper) search bounds.

    Defaults bracket all fitted values reported for the model with
    margin.
    """

    alpha1: tuple = (1.0, 100.0)
    alpha2: tuple = (1.0, 100.0)
    beta1: tuple = (0.0, 1.0)
    beta2: tuple = (0.0, 1.0)
    eta: tuple = (0.0, 1000.0)

    def lower(self) -> np.ndarray:
        return np.array([getattr(self, n)[0] for n in PARAM_NAMES])

    def upper(self) -> np.ndarray:
        return np.array([getattr(self, n)[1] for n in PARAM_NAMES])

    def validate(self):
        lo, hi = self.lower(), self.upper()
        if not (np.isfinite(lo).all() and np.isfinite(hi).all()):
            raise ValueError("parameter bounds must be finite")
        if np.any(lo > hi):
            bad = PARAM_NAMES[int(np.argmax(lo > hi))]
            raise ValueError(f"lower bound exceeds upper bound for {bad}")
        hard_lo = np.array([1.0, 1.0, 0.0, 0.0, 0.0])
        hard_hi = np.array([np.inf, np.inf, 1.0, 1.0, np.inf])
        if np.any(lo < hard_lo) or np.any(hi > hard_hi):
            raise ValueError("bounds exceed the admissible parameter ranges")

    def replace(self, name: str, lo: float, hi: float) -> "ParamBounds":
        if name not in PARAM_NAMES:
            raise ValueError(f"unknown parameter {name!r}")
        kwargs = {n: getattr(self, n) for n in PARAM_NAMES}
        kwargs[name] = (lo, hi)
        return ParamBounds(**kwargs)


@dataclass(frozen=True)
class GAConfig:
    """Genetic algorithm settings; all values exposed, sane defaults."""

    population_size: int = 50
    max_generations: int = 300
    crossover_probability: float = 0.9
    crossover_blend_alpha: float = 0.5
    mutation_probability: float = 0.1
    mutation_scale: float = 0.1  # std as a fraction of each parameter range
    tournament_size: int = 3
    elite_count: int = 2
    stall_generations: int = 50
    bounds: ParamBounds = field(default_factory=ParamBounds)
    rng_seed: int = 0
    workers: int = 1

    def validate(self):
        if self.population_size < 1 or self.max_generations < 1:
            raise ValueError("population_size and max_generations must be positive")
        if not (0.0 <= self.crossover_probability <= 1.0):
            raise ValueError("crossover_probability must be within [0, 1]")
        if not (0.0 <= self.mutation_probability <= 1.0):
            raise ValueError("mutation_probability must be within [0, 1]")
        if self.mutation_scale <= 0:
            raise ValueError("mutation_scale must be positive")
        if self.tournament_size < 1:
            raise ValueError("tournament_size must be positive")
        if not (0 <= self.elite_count < self.population_size):
            raise ValueError("elite_count must be non-negative and below population_size")
        if self.stall_generations < 1:
            raise ValueError("stall_generations must be positive")
        if self.workers < 1:
            raise ValueError("workers must be positive")
        self.bounds.validate()


@dataclass
class ConvergenceHistory:
    """Per-generation best score, mean score and best parameter vector."""

    best_score: list = field(default_factory=list)
    mean_score: list = field(default_factory=list)
    best_params: list = field(default_factory=list)

    def append(self, best, mean, params):
        self.best_score.append(float(best))
        self.mean_score.append(float(mean))
        self.best_params.append(np.asarray(params, dtype=float).copy())

    def __len__(self):
        return len(self.best_score)

    def rows(self):
        """(generation, best, mean, alpha1, alpha2, beta1, beta2, eta) rows."""
        for g in range(len(self.best_score)):
            yield (
                g + 1,
                self.best_score[g],
                self.mean_score[g],
                *self.best_params[g],
            )


def deviation_score(load_resp, load_exp) -> float:
    """Sum of squared differences between two equal-length load arrays.

    Accumulates term by term in index order, matching an elementwise
    reference loop exactly. Zero iff the arrays are identical.
    """
    load_resp = np.asarray(load_resp, dtype=float)
    load_exp = np.asarray(load_exp, dtype=float)
    if load_resp.shape != load_exp.shape or load_resp.ndim != 1:
        raise ValueError(
            f"load arrays must be 1-d and equal-length, got shapes "
            f"{load_resp.shape} and {load_exp.shape}"
        )
    total = 0.0
    for r, e in zip(load_resp.tolist(), load_exp.tolist()):
        diff = r - e
        total += diff * diff
    return total


def evaluate(params: PivotParams, backbone, resampled: SignalPair) -> float:
    """Deviation score of a candidate on the resampled record."""
    response = simulate(backbone, params, resampled.displacement)
    return deviation_score(response, resampled.load)


# -- worker-side state for parallel evaluation ----------------------------

_WORKER = {}


def _init_worker(knots_d, knots_f, displacement, load):
    _WORKER["geometry"] = BackboneGeometry(knots_d, knots_f)
    _WORKER["displacement"] = displacement
    _WORKER["load"] = load


def _eval_worker(genes):
    try:
        response = simulate(
            _WORKER["geometry"], PivotParams.from_array(genes), _WORKER["displacement"]
        )
        return deviation_score(response, _WORKER["load"])
    except (ValueError, ZeroDivisionError):
        return float("inf")


def _evaluate_population(genes, geometry, resampled, pool):
    scores = np.empty(genes.shape[0])
    if pool is None:
        for i in range(genes.shape[0]):
            try:
                params = PivotParams.from_array(genes[i])
                response = simulate(geometry, params, resampled.displacement)
                scores[i] = deviation_score(response, resampled.load)
            except (ValueError, ZeroDivisionError):
                scores[i] = np.inf
    else:
        for i, score in enumerate(pool.map(_eval_worker, genes, chunksize=8)):
            scores[i] = score
    if not np.isfinite(scores).any():
        raise FitError("every individual of a generation failed to evaluate")
    return scores


def fit(
    resampled: SignalPair,
    backbone,
    config: GAConfig = None,
    on_generation=None,
):
    """Search PivotParams space for the minimum deviation score.

    Returns ``(best_params, history)`` where ``best_params`` is the
    best-ever individual and ``history`` the full per-generation record.
    Fully reproducible from ``config.rng_seed``, independent of
    ``config.workers``. ``on_generation(generation, history)`` is called
    after each generation is recorded.
    """
    if config is None:
        config = GAConfig()
    config.validate()
    geometry = (
        backbone if isinstance(backbone, BackboneGeometry) else build_geometry(backbone)
    )

    lo = config.bounds.lower()
    hi = config.bounds.upper()
    span = hi - lo
    pop_n = config.population_size
    n_genes = len(PARAM_NAMES)
    rng = np.random.default_rng(config.rng_seed)

    genes = lo + rng.random((pop_n, n_genes)) * span

    history = ConvergenceHistory()
    best_genes = None
    best_score = np.inf
    stall = 0

    pool = None
    try:
        if config.workers > 1:
            pool = ProcessPoolExecutor(
                max_workers=config.workers,
                initializer=_init_worker,
                initargs=(
                    list(geometry.knots_d),
                    list(geometry.knots_f),
                    resampled.displacement,
                    resampled.load,
                ),
            )
        for generation in range(1, config.max_generations + 1):
            scores = _evaluate_population(genes, geometry, resampled, pool)

            gen_best = int(np.argmin(scores))
            if scores[gen_best] < best_score:
                best_score = float(scores[gen_best])
                best_genes = genes[gen_best].copy()
                stall = 0
            else:
                stall += 1
            finite = scores[np.isfinite(scores)]
            history.append(best_score, finite.mean(), best_genes)
            if on_generation is not None:
                on_generation(generation, history)

            if generation == config.max_generations or stall >= config.stall_generations:
                break

            # Draw every random decision for the next generation up front
            # so evaluation order cannot affect the stream.
            n_children = pop_n - config.elite_count
            tourney = rng.integers(0, pop_n, size=(n_children, 2, config.tournament_size))
            do_cx = rng.random(n_children) < config.crossover_probability
            blend_u = rng.random((n_children, n_genes))
            do_mut = rng.random((n_children, n_genes)) < config.mutation_probability
            mut_step = rng.standard_normal((n_children, n_genes)) * (
                config.mutation_scale * span
            )

            elite_idx = np.argsort(scores, kind="stable")[: config.elite_count]
            next_genes = np.empty_like(genes)
            next_genes[: config.elite_count] = genes[elite_idx]

            for c in range(n_children):
                p1 = genes[tourney[c, 0][np.argmin(scores[tourney[c, 0]])]]
                p2 = genes[tourney[c, 1][np.argmin(scores[tourney[c, 1]])]]
                if do_cx[c]:
                    g_lo = np.minimum(p1, p2)
                    g_hi = np.maximum(p1, p2)
                    width = g_hi - g_lo
                    a = config.crossover_blend_alpha
                    child = (g_lo - a * width) + blend_u[c] * (1 + 2 * a) * width
                else:
                    child = p1.copy()
                child = np.where(do_mut[c], child + mut_step[c], child)
                next_genes[config.elite_count + c] = np.clip(child, lo, hi)
            genes = next_genes
    finally:
        if pool is not None:
            pool.shutdown()

    return PivotParams.from_array(best_genes), history
