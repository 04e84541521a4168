"""Enumeration engine for the search-side NFL identities.

All sums over ``f`` run over canonical ranks.  With ``exact=True`` the
performance values are Fractions and every identity is checked with ``==``;
with ``exact=False`` floats are accumulated with ``math.fsum`` and compared
against a 1e-12 tolerance.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .algorithms import GENERATOR_ID, SearchAlgorithm, make_algorithm, make_rng, run_search, reseed
from .core import FiniteSpace, ObjectiveTable, PerformanceMeasure, enumerate_functions, rank_to_function

FLOAT_TOL = 1e-12


def _sum(values, exact: bool):
    return sum(values, Fraction(0)) if exact else math.fsum(values)


def _close(a, b, exact: bool) -> bool:
    return a == b if exact else abs(float(a) - float(b)) <= FLOAT_TOL


def _jsonable(v):
    return str(v) if isinstance(v, Fraction) else v


@dataclass(frozen=True)
class PerformanceDistribution:
    support: tuple
    mass: tuple

    def __post_init__(self):
        if len(self.support) != len(self.mass):
            raise ValueError("support and mass differ in length")
        if any(b <= a for a, b in zip(self.support, self.support[1:])):
            raise ValueError("support must be sorted and distinct")
        if any(p < 0 for p in self.mass):
            raise ValueError("masses must be nonnegative")

    @classmethod
    def from_mapping(cls, masses: dict) -> "PerformanceDistribution":
        keys = sorted(masses)
        return cls(tuple(keys), tuple(masses[k] for k in keys))

    def mass_at(self, phi):
        try:
            return self.mass[self.support.index(phi)]
        except ValueError:
            return 0

    @property
    def total(self):
        exact = all(isinstance(p, Fraction) for p in self.mass)
        return _sum(self.mass, exact)

    def mean(self):
        exact = all(isinstance(p, Fraction) for p in self.mass + self.support)
        return _sum([p * v for v, p in zip(self.support, self.mass)], exact)

    def to_json(self) -> dict:
        return {"support": [_jsonable(s) for s in self.support], "mass": [_jsonable(p) for p in self.mass]}


@dataclass(frozen=True, eq=False)
class PriorVector:
    """A point on the simplex over ``Y^X``, indexed by function rank."""

    weights: tuple
    exact: bool = False

    def __post_init__(self):
        w = tuple(self.weights)
        object.__setattr__(self, "weights", w)
        if any(p < 0 for p in w):
            raise ValueError("prior weights must be nonnegative")
        total = _sum(w, self.exact)
        if not _close(total, 1, self.exact):
            raise ValueError(f"prior weights sum to {total}, not 1")

    def __len__(self) -> int:
        return len(self.weights)

    @classmethod
    def uniform(cls, space: FiniteSpace, exact: bool = True) -> "PriorVector":
        n = space.n_functions
        return cls((Fraction(1, n),) * n if exact else (1.0 / n,) * n, exact)

    @classmethod
    def point_mass(cls, space: FiniteSpace, rank: int) -> "PriorVector":
        w = [Fraction(0)] * space.n_functions
        w[rank] = Fraction(1)
        return cls(tuple(w), True)

    @classmethod
    def dirichlet(cls, space: FiniteSpace, rng: np.random.Generator) -> "PriorVector":
        """Flat-Dirichlet draw: normalized unit-rate exponentials."""
        e = rng.standard_exponential(space.n_functions)
        w = e / math.fsum(e)
        return cls(tuple(float(p) for p in w), False)


@dataclass(frozen=True, eq=False)
class FunctionSubset:
    """Membership bitset over function ranks."""

    members: np.ndarray

    @classmethod
    def from_predicate(cls, space: FiniteSpace, predicate) -> "FunctionSubset":
        return cls(np.array([bool(predicate(f)) for f in enumerate_functions(space)]))

    @classmethod
    def empty(cls, space: FiniteSpace) -> "FunctionSubset":
        return cls(np.zeros(space.n_functions, dtype=bool))

    @classmethod
    def full(cls, space: FiniteSpace) -> "FunctionSubset":
        return cls(np.ones(space.n_functions, dtype=bool))

    def complement(self) -> "FunctionSubset":
        return FunctionSubset(~self.members)

    def __contains__(self, rank: int) -> bool:
        return bool(self.members[rank])

    def __len__(self) -> int:
        return int(self.members.sum())


@dataclass(frozen=True)
class DVector:
    phi: object
    algorithm: str
    m: int
    entries: tuple


def dy_distribution(algorithm: SearchAlgorithm, f: ObjectiveTable, m: int) -> dict:
    """P(d^m_Y | f, A, m) as a mapping from y-index sequences to Fractions."""
    out = defaultdict(Fraction)
    for w, alg in algorithm.branches():
        out[run_search(alg, f, m).y_indices] += w
    return dict(out)


def _phi(measure: PerformanceMeasure, dy: tuple, space: FiniteSpace, exact: bool):
    ys = space.exact_y_values if exact else space.y_values
    return measure([ys[i] for i in dy])


def expected_performance(
    algorithm: SearchAlgorithm,
    f: ObjectiveTable,
    m: int,
    measure: PerformanceMeasure,
    seed: int | None = None,
    exact: bool = True,
):
    """E(Phi | f, m, A); a seed mixture averages over its seeds."""
    if seed is not None:
        algorithm = reseed(algorithm, seed)
    terms = [
        (p if exact else float(p)) * _phi(measure, dy, f.space, exact)
        for dy, p in dy_distribution(algorithm, f, m).items()
    ]
    return _sum(terms, exact)


def _table_chunk(args):
    algorithm, space, m, measure, exact, start, stop = args
    return [expected_performance(algorithm, rank_to_function(space, r), m, measure, exact=exact) for r in range(start, stop)]


def expected_performance_table(
    algorithm: SearchAlgorithm,
    space: FiniteSpace,
    m: int,
    measure: PerformanceMeasure,
    exact: bool = True,
    workers: int = 1,
) -> list:
    """E(Phi | f, m, A) for every f, in rank order.

    With ``workers > 1`` the rank range is split across processes; chunks
    are reassembled in rank order so the result is identical to serial.
    """
    space.check_enumerable()
    n = space.n_functions
    if workers <= 1 or n < 2 * workers:
        return _table_chunk((algorithm, space, m, measure, exact, 0, n))
    bounds = np.linspace(0, n, workers + 1).astype(int)
    jobs = [(algorithm, space, m, measure, exact, int(a), int(b)) for a, b in zip(bounds, bounds[1:])]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(itertools.chain.from_iterable(pool.map(_table_chunk, jobs)))


def performance_distribution_direct(
    algorithm: SearchAlgorithm,
    m: int,
    measure: PerformanceMeasure,
    prior: PriorVector,
    space: FiniteSpace,
) -> PerformanceDistribution:
    """P(phi | A, m) by first forming P(d^m_Y | A, m) = sum_f P(d^m_Y | f) P(f)."""
    space.check_enumerable()
    if len(prior) != space.n_functions:
        raise ValueError("prior length does not match |Y|^|X|")
    exact = prior.exact
    p_dy = defaultdict(list)
    for f, pf in zip(enumerate_functions(space), prior.weights):
        if pf == 0:
            continue
        for dy, p in dy_distribution(algorithm, f, m).items():
            p_dy[dy].append(pf * (p if exact else float(p)))
    masses = defaultdict(list)
    for dy, parts in p_dy.items():
        masses[_phi(measure, dy, space, exact)].append(_sum(parts, exact))
    return PerformanceDistribution.from_mapping({k: _sum(v, exact) for k, v in masses.items()})


def d_vector(
    algorithm: SearchAlgorithm,
    m: int,
    measure: PerformanceMeasure,
    phi,
    space: FiniteSpace,
    exact: bool = True,
) -> DVector:
    """D(f; phi, A, m) for every f: the probability that A scores phi on f."""
    space.check_enumerable()
    entries = []
    for f in enumerate_functions(space):
        hits = [p for dy, p in dy_distribution(algorithm, f, m).items() if _phi(measure, dy, space, exact) == phi]
        entries.append(sum(hits, Fraction(0)))
    return DVector(phi, algorithm.name, m, tuple(entries))


def achievable_values(algorithm: SearchAlgorithm, m: int, measure: PerformanceMeasure, space: FiniteSpace, exact: bool = True) -> list:
    vals = set()
    for f in enumerate_functions(space):
        for dy in dy_distribution(algorithm, f, m):
            vals.add(_phi(measure, dy, space, exact))
    return sorted(vals)


def inner_product_check(
    algorithm: SearchAlgorithm,
    m: int,
    measure: PerformanceMeasure,
    prior: PriorVector,
    space: FiniteSpace,
) -> dict:
    """Compare sum_f P(f) D(f; phi) with the direct distribution at every phi."""
    exact = prior.exact
    direct = performance_distribution_direct(algorithm, m, measure, prior, space)
    phis = sorted(set(achievable_values(algorithm, m, measure, space, exact)) | set(direct.support))
    rows, max_dev = [], 0
    for phi in phis:
        d = d_vector(algorithm, m, measure, phi, space, exact)
        ip = _sum([pf * (e if exact else float(e)) for pf, e in zip(prior.weights, d.entries)], exact)
        lhs = direct.mass_at(phi)
        dev = abs(ip - lhs)
        max_dev = max(max_dev, dev)
        rows.append({"phi": (phi), "direct": (lhs), "inner_product": (ip), "deviation": float(dev)})
    passed = max_dev == 0 if exact else max_dev <= FLOAT_TOL
    return {
        "check": "inner_product",
        "parameters": {"algorithm": algorithm.name, "m": m, "measure": str(measure), "exact": exact},
        "rows": rows,
        "total_mass": (direct.total),
        "max_deviation": float(max_dev),
        "pass": bool(passed and _close(direct.total, 1, exact)),
    }


def nfl_sum(algorithm: SearchAlgorithm, m: int, measure: PerformanceMeasure, space: FiniteSpace, exact: bool = True, workers: int = 1):
    """sum_f E(Phi | f, m, A) over all of ``Y^X``."""
    return _sum(expected_performance_table(algorithm, space, m, measure, exact, workers), exact)


def nfl_subset_identity(
    algorithm: SearchAlgorithm,
    m: int,
    measure: PerformanceMeasure,
    subset: FunctionSubset,
    space: FiniteSpace,
    sweep_algorithms=(),
    sweep_subsets=(),
    exact: bool = True,
) -> dict:
    """Partial sums inside and outside ``subset`` and the constant they add to.

    The constant is recomputed for every (algorithm, subset) in the sweeps
    and must not change.
    """
    if len(subset.members) != space.n_functions:
        raise ValueError("subset length does not match |Y|^|X|")
    algs = [algorithm, *sweep_algorithms]
    subsets = [subset, *sweep_subsets]
    tables = {a.name: expected_performance_table(a, space, m, measure, exact) for a in algs}
    entries = []
    for a in algs:
        table = tables[a.name]
        for j, b in enumerate(subsets):
            inside = _sum([e for e, keep in zip(table, b.members) if keep], exact)
            outside = _sum([e for e, keep in zip(table, b.members) if not keep], exact)
            entries.append({"algorithm": a.name, "subset": j, "size": len(b), "inside": inside, "outside": outside, "constant": inside + outside})
    constant = entries[0]["constant"]
    full = _sum(tables[algorithm.name], exact)
    passed = _close(constant, full, exact) and all(_close(e["constant"], constant, exact) for e in entries)
    return {
        "check": "nfl_subset_identity",
        "parameters": {"algorithm": algorithm.name, "m": m, "measure": str(measure), "exact": exact},
        "left": (entries[0]["inside"]),
        "right": (entries[0]["outside"]),
        "constant": (constant),
        "sweep": [{k: (v) for k, v in e.items()} for e in entries],
        "max_deviation": float(max(abs(e["constant"] - constant) for e in entries)),
        "pass": bool(passed),
    }


def win_loss_balance(a: SearchAlgorithm, b: SearchAlgorithm, m: int, measure: PerformanceMeasure, space: FiniteSpace, exact: bool = True) -> dict:
    """Performance-weighted wins of ``a`` over ``b`` against its losses.

    Lower performance values are better, so ``a`` wins on f when
    E(Phi|f,a) < E(Phi|f,b).  The NFL identity forces the net to zero.
    """
    ta = expected_performance_table(a, space, m, measure, exact)
    tb = expected_performance_table(b, space, m, measure, exact)
    diffs = [x - y for x, y in zip(ta, tb)]
    gains = [-d for d in diffs if d < 0]
    losses = [d for d in diffs if d > 0]
    net = _sum(diffs, exact)
    return {
        "check": "win_loss_balance",
        "parameters": {"a": a.name, "b": b.name, "m": m, "measure": str(measure), "exact": exact},
        "wins": len(gains),
        "losses": len(losses),
        "ties": len(diffs) - len(gains) - len(losses),
        "win_amount": (_sum(gains, exact)),
        "loss_amount": (_sum(losses, exact)),
        "net": (net),
        "max_deviation": float(abs(net)),
        "pass": bool(_close(net, 0, exact)),
    }


def prior_expected_performance(algorithm: SearchAlgorithm, m: int, measure: PerformanceMeasure, prior: PriorVector, space: FiniteSpace):
    """E_pi(Phi | m, A) = sum_f pi(f) E(Phi | f, m, A)."""
    table = expected_performance_table(algorithm, space, m, measure, prior.exact)
    return _sum([p * e for p, e in zip(prior.weights, table)], prior.exact)


def sample_flat_dirichlet(n_samples: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    e = rng.standard_exponential((n_samples, dim))
    return e / e.sum(axis=1, keepdims=True)


def prior_averaged_nfl_check(
    algorithms,
    m: int,
    measure: PerformanceMeasure,
    n_samples: int,
    seed: int,
    space: FiniteSpace,
    z: float = 3.0,
) -> dict:
    """Monte Carlo average of E_pi(Phi | m, A) over flat-Dirichlet priors.

    Every algorithm's mean must sit within ``z`` standard errors of the
    analytic value nfl_sum / |Y^X|, and every paired difference within ``z``
    standard errors of zero.  The Pi-table splits the samples by whether the
    first algorithm beats the second and shows that the inside and outside
    integrals of each algorithm add up to the same constant.
    """
    if n_samples < 100:
        raise ValueError(f"n_samples must be >= 100, got {n_samples}")
    algorithms = [make_algorithm(a) if isinstance(a, str) else a for a in algorithms]
    if not algorithms:
        raise ValueError("need at least one algorithm")
    n_f = space.n_functions
    exact_tables = {a.name: expected_performance_table(a, space, m, measure, exact=True) for a in algorithms}
    sums = {name: sum(t, Fraction(0)) for name, t in exact_tables.items()}
    analytic = sums[algorithms[0].name] / n_f
    priors = sample_flat_dirichlet(n_samples, n_f, make_rng(seed))
    e_pi = {name: priors @ np.array([float(v) for v in t]) for name, t in exact_tables.items()}

    per_algorithm, ok = {}, True
    for name, vals in e_pi.items():
        mean, se = float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n_samples))
        within = abs(mean - float(analytic)) <= z * se
        ok &= within
        per_algorithm[name] = {
            "nfl_sum": str(sums[name]),
            "uniform_prior_value": str(sums[name] / n_f),
            "mc_mean": mean,
            "standard_error": se,
            "z_vs_analytic": (mean - float(analytic)) / se if se > 0 else 0.0,
            "pass": bool(within),
        }

    pairs = []
    for a, b in itertools.combinations([x.name for x in algorithms], 2):
        diff = e_pi[a] - e_pi[b]
        mean, se = float(diff.mean()), float(diff.std(ddof=1) / math.sqrt(n_samples))
        within = abs(mean) <= z * se
        ok &= within
        pairs.append({"a": a, "b": b, "mean_difference": mean, "standard_error": se, "pass": bool(within)})

    # sampling symmetry: E[pi(f)] = 1/|F| for every f
    col_means = priors.mean(axis=0)
    col_se = priors.std(axis=0, ddof=1) / math.sqrt(n_samples)
    symmetry = {
        "analytic_mean_weight": str(Fraction(1, n_f)),
        "max_abs_z": float(np.max(np.abs(col_means - 1.0 / n_f) / col_se)),
    }
    exact_uniform_equal = len({s for s in sums.values()}) == 1
    ok &= exact_uniform_equal

    subset_table = []
    if len(algorithms) >= 2:
        ref_a, ref_b = algorithms[0].name, algorithms[1].name
        in_pi = e_pi[ref_a] < e_pi[ref_b]
        for name, vals in e_pi.items():
            inside = float(vals[in_pi].sum() / n_samples)
            outside = float(vals[~in_pi].sum() / n_samples)
            subset_table.append({"algorithm": name, "inside_pi": inside, "outside_pi": outside, "constant": inside + outside})

    return {
        "check": "prior_averaged_nfl",
        "parameters": {
            "m": m,
            "measure": str(measure),
            "n_samples": n_samples,
            "seed": seed,
            "generator": GENERATOR_ID,
            "z": z,
        },
        "analytic_value": str(analytic),
        "analytic_value_float": float(analytic),
        "per_algorithm": per_algorithm,
        "paired_differences": pairs,
        "sampling_symmetry": symmetry,
        "pi_subset": {"definition": "E_pi(first) < E_pi(second)", "fraction_in_pi": float(np.mean(in_pi)) if subset_table else None, "table": subset_table},
        "samples": {name: vals.tolist() for name, vals in e_pi.items()},
        "max_deviation": max(abs(v["mc_mean"] - float(analytic)) for v in per_algorithm.values()),
        "pass": bool(ok),
    }
