"""Greedy Monte Carlo Optimization with a cross-validated temperature.

Each step fits a Boltzmann sampling distribution ``q(x) ~ exp(-g(x)/T)``
over the unvisited points, where ``g`` interpolates the data set by the
nearest visited point on the ring, then samples the next point from ``q``.
The temperature is chosen by cross-validation on the data already in hand:
for every fold the distribution is refit on the remaining pairs and scored
by the expected objective value it assigns to the held-out pairs.  Tuning
never evaluates the objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .algorithms import SearchAlgorithm, SearchContractError, make_rng, surrogate_indices
from .core import FiniteSpace, ObjectiveTable, SearchTrace


@dataclass(frozen=True, eq=False)
class Surrogate:
    """Estimates of f at every x, exact at visited points."""

    values: np.ndarray

    @classmethod
    def fit(cls, d: SearchTrace, space: FiniteSpace) -> "Surrogate":
        if not d.pairs:
            raise ValueError("cannot build a surrogate from an empty data set")
        idx = surrogate_indices(d, space.x_size)
        ys = np.asarray(space.y_values)
        return cls(ys[np.asarray(idx)])


@dataclass(frozen=True, eq=False)
class SamplingDistribution:
    """Probability vector over X, zero on visited points."""

    weights: np.ndarray

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights > 0)

    def entropy(self) -> float:
        p = self.weights[self.weights > 0]
        return float(-np.sum(p * np.log(p)))

    def sample(self, rng: np.random.Generator) -> int:
        """Inverse-CDF draw."""
        cdf = np.cumsum(self.weights)
        u = rng.random() * cdf[-1]
        x = int(np.searchsorted(cdf, u, side="right"))
        return min(x, int(self.support[-1]))


@dataclass(frozen=True)
class TemperatureSchedule:
    candidates: tuple

    def __post_init__(self):
        cands = tuple(float(t) for t in self.candidates)
        if not cands:
            raise ValueError("at least one candidate temperature is required")
        if any(not (t > 0 and math.isfinite(t)) for t in cands):
            raise ValueError(f"temperatures must be positive and finite, got {cands}")
        if len(set(cands)) != len(cands):
            raise ValueError(f"candidate temperatures must be distinct, got {cands}")
        object.__setattr__(self, "candidates", cands)


def fit_q(d: SearchTrace, space: FiniteSpace, T: float) -> SamplingDistribution:
    if not T > 0:
        raise ValueError(f"temperature must be positive, got {T}")
    if not d.pairs:
        raise ValueError("fit_q needs a non-empty data set")
    open_mask = np.ones(space.x_size, dtype=bool)
    open_mask[list(d.xs)] = False
    if not open_mask.any():
        raise ValueError("every point has been visited")
    g = Surrogate.fit(d, space).values
    shifted = g[open_mask] - g[open_mask].min()
    w = np.zeros(space.x_size)
    w[open_mask] = np.exp(-shifted / T)
    return SamplingDistribution(w / w.sum())


class EvaluationCounter:
    """Objective oracle that counts calls."""

    def __init__(self, f: ObjectiveTable):
        self.f = f
        self.count = 0

    def __call__(self, x: int) -> int:
        self.count += 1
        return self.f.y_index[x]


def _y_index(f, x: int) -> int:
    return f(x) if isinstance(f, EvaluationCounter) else f.y_index[x]


def mco_step(d: SearchTrace, space: FiniteSpace, f, T: float, seed: int):
    """Sample one point from ``fit_q(d, T)`` and append its evaluation."""
    q = fit_q(d, space, T)
    x = q.sample(make_rng(seed))
    return x, d.extend(x, _y_index(f, x))


def fold_slices(m: int, folds: int) -> list:
    """Contiguous positional blocks; earlier blocks take the remainder."""
    if not 2 <= folds <= m:
        raise ValueError(f"need 2 <= folds <= m, got folds={folds}, m={m}")
    return [range(b[0], b[-1] + 1) for b in np.array_split(np.arange(m), folds)]


def cv_temperature_scores(d: SearchTrace, space: FiniteSpace, candidates, folds: int) -> dict:
    """Mean held-out expected objective per temperature (None if every fold degenerates)."""
    schedule = candidates if isinstance(candidates, TemperatureSchedule) else TemperatureSchedule(tuple(candidates))
    blocks = fold_slices(d.m, folds)
    ys = np.asarray(space.y_values)
    scores = {}
    for T in schedule.candidates:
        fold_scores = []
        for block in blocks:
            train = SearchTrace(tuple(p for i, p in enumerate(d.pairs) if i not in block))
            held = [d.pairs[i] for i in block]
            q = fit_q(train, space, T).weights
            hx = np.array([x for x, _ in held])
            hy = ys[[y for _, y in held]]
            mass = q[hx].sum()
            if mass > 0:
                fold_scores.append(float(np.dot(q[hx], hy) / mass))
        scores[T] = float(np.mean(fold_scores)) if fold_scores else None
    return scores


def cv_temperature(d: SearchTrace, space: FiniteSpace, candidates, folds: int) -> float:
    """Pick the candidate temperature with the lowest cross-validated score.

    Ties go to the smaller temperature.  When every fold of every candidate
    gives zero mass to its held-out points, the largest candidate is used.
    """
    scores = cv_temperature_scores(d, space, candidates, folds)
    scored = [(s, T) for T, s in scores.items() if s is not None]
    if not scored:
        return max(scores)
    return min(scored)[1]


@dataclass(frozen=True)
class StepRecord:
    step: int
    T: float | None
    q_entropy: float
    best_so_far: float
    x: int
    q_support_ok: bool
    tuning_evaluations: int = 0


@dataclass
class MCORun:
    trace: SearchTrace
    records: list = field(default_factory=list)

    def schedule_rows(self) -> list:
        return [
            {"step": r.step, "chosen_T": r.T, "q_entropy": r.q_entropy, "best_so_far": r.best_so_far}
            for r in self.records
        ]


def _step_seed(seed: int, step: int) -> int:
    return int(np.random.SeedSequence([seed, step]).generate_state(1, np.uint64)[0] >> np.uint64(1))


def _refit_length(i: int, refit_every: int) -> int | None:
    """Largest trace length <= i at which the temperature was last retuned."""
    if refit_every <= 0 or i < 2:
        return None
    return 2 + ((i - 2) // refit_every) * refit_every


def _initial_point(space: FiniteSpace, seed: int) -> int:
    return int(make_rng(_step_seed(seed, 0)).integers(space.x_size))


def run_mco(
    space: FiniteSpace,
    f: ObjectiveTable,
    m_total: int,
    candidates,
    folds: int = 2,
    refit_every: int = 1,
    seed: int = 0,
    initial_T: float | None = None,
) -> MCORun:
    """Greedy MCO from one uniform-random point.

    The temperature starts at ``initial_T`` (default: the largest candidate)
    and is retuned by :func:`cv_temperature` at trace lengths 2,
    2+refit_every, ...; ``refit_every=0`` never retunes (fixed-T MCO).
    Fold count is clipped to the current trace length.
    """
    schedule = TemperatureSchedule(tuple(candidates))
    if not 1 <= m_total <= space.x_size:
        raise ValueError(f"m_total must lie in [1, {space.x_size}], got {m_total}")
    oracle = EvaluationCounter(f)
    T = max(schedule.candidates) if initial_T is None else float(initial_T)
    x0 = _initial_point(space, seed)
    d = SearchTrace(((x0, oracle(x0)),))
    run = MCORun(d)
    run.records.append(StepRecord(1, None, math.log(space.x_size), space.y_values[d.y_indices[0]], x0, True))
    for i in range(1, m_total):
        tuning = 0
        if _refit_length(i, refit_every) == i:
            before = oracle.count
            T = cv_temperature(d, space, schedule, min(folds, i))
            tuning = oracle.count - before
        q = fit_q(d, space, T)
        support_ok = not np.any(q.weights[list(d.xs)] > 0)
        x, d = mco_step(d, space, oracle, T, _step_seed(seed, i))
        best = min(space.y_values[y] for y in d.y_indices)
        run.records.append(StepRecord(i + 1, T, q.entropy(), best, x, support_ok, tuning))
    run.trace = d
    return run


@dataclass(frozen=True)
class CVScheduledMCOSearch(SearchAlgorithm):
    """:func:`run_mco` as a stateless trace -> point rule (for NFL sweeps)."""

    candidates: tuple
    folds: int = 2
    refit_every: int = 1
    seed: int = 0
    initial_T: float | None = None

    @property
    def name(self) -> str:
        cands = ",".join(repr(c) for c in self.candidates)
        return f"mco(candidates=[{cands}], folds={self.folds}, refit_every={self.refit_every}, seed={self.seed})"

    def temperature_at(self, trace: SearchTrace, space: FiniteSpace) -> float:
        r = _refit_length(trace.m, self.refit_every)
        if r is None:
            return max(self.candidates) if self.initial_T is None else self.initial_T
        return cv_temperature(trace.prefix(r), space, self.candidates, min(self.folds, r))

    def next_point(self, trace, space):
        if not trace.pairs:
            return _initial_point(space, self.seed)
        if trace.m >= space.x_size:
            raise SearchContractError("no unvisited point left")
        q = fit_q(trace, space, self.temperature_at(trace, space))
        return q.sample(make_rng(_step_seed(self.seed, trace.m)))


@dataclass(frozen=True)
class GreedySurrogateSearch(SearchAlgorithm):
    """Fixed-temperature MCO."""

    T: float
    seed: int = 0

    @property
    def name(self) -> str:
        return f"greedy_surrogate(T={self.T!r}, seed={self.seed})"

    def next_point(self, trace, space):
        return CVScheduledMCOSearch((self.T,), refit_every=0, seed=self.seed).next_point(trace, space)


def smooth_objective(space: FiniteSpace, seed: int, harmonics: int = 2) -> ObjectiveTable:
    """Seeded low-frequency periodic function quantized onto Y.

    A sum of the first ``harmonics`` Fourier modes on the ring with
    amplitudes decaying as 1/k, binned into |Y| equal-width levels.
    """
    rng = make_rng(seed, 7919)
    t = 2 * np.pi * np.arange(space.x_size) / space.x_size
    g = np.zeros(space.x_size)
    for k in range(1, harmonics + 1):
        g += rng.normal() / k * np.cos(k * t + rng.uniform(0, 2 * np.pi))
    lo, hi = g.min(), g.max()
    levels = np.floor((g - lo) / (hi - lo + 1e-12) * space.y_size).astype(int)
    return ObjectiveTable(space, tuple(np.clip(levels, 0, space.y_size - 1)))


def benchmark_schemes(
    space: FiniteSpace,
    seeds,
    m: int,
    candidates,
    folds: int = 2,
    refit_every: int = 1,
    harmonics: int = 2,
) -> dict:
    """Best-so-far curves per scheme and seed on smooth objectives.

    Schemes are ``"cv"`` plus one ``"T=<t>"`` entry per fixed candidate; all
    schemes share the objective and the sampling seed of each replicate.
    Returns ``{"curves": {scheme: [per-seed list over steps]}, "cv_runs": [...]}``.
    """
    curves = {"cv": []}
    curves.update({f"T={t!r}": [] for t in candidates})
    cv_runs = []
    for s in seeds:
        f = smooth_objective(space, s, harmonics)
        run = run_mco(space, f, m, candidates, folds, refit_every, s)
        cv_runs.append((s, run))
        curves["cv"].append([r.best_so_far for r in run.records])
        for t in candidates:
            fixed = run_mco(space, f, m, candidates, folds, refit_every=0, seed=s, initial_T=t)
            curves[f"T={t!r}"].append([r.best_so_far for r in fixed.records])
    return {"curves": curves, "cv_runs": cv_runs}
