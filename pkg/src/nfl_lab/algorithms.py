"""Deterministic off-data-set search algorithms.

A search algorithm maps a trace ``d^m`` to an unvisited point.  Every
algorithm here draws directly from the unvisited set, so the "try again"
rule for revisits is satisfied by construction.  Randomised algorithms are
deterministic functions of (trace, seed); a seed *mixture* is the only
stochastic algorithm and is handled through :func:`search_traces`.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .core import FiniteSpace, ObjectiveTable, SearchTrace
from .specs import Call, SpecError, parse_call

GENERATOR_ID = f"numpy.random.PCG64 via SeedSequence (numpy {np.__version__})"


class SearchContractError(RuntimeError):
    """An algorithm proposed a visited or out-of-range point."""


def make_rng(*entropy: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(entropy))))


def derive_seeds(base_seed: int, n: int) -> tuple:
    """``n`` independent 63-bit child seeds of ``base_seed``."""
    children = np.random.SeedSequence(base_seed).spawn(n)
    return tuple(int(c.generate_state(1, np.uint64)[0] >> np.uint64(1)) for c in children)


@dataclass(frozen=True)
class NeighborhoodTopology:
    """Ring adjacency on ``{0..n-1}``."""

    n: int

    def neighbors(self, x: int) -> tuple:
        if self.n == 1:
            return ()
        return tuple(sorted({(x - 1) % self.n, (x + 1) % self.n}))

    def distance(self, a: int, b: int) -> int:
        d = abs(a - b) % self.n
        return min(d, self.n - d)


def nearest_visited(trace: SearchTrace, n: int) -> list:
    """For each x, the visited point nearest on the ring (ties -> lower index).

    Returns ``None`` entries only when the trace is empty.
    """
    visited = np.array(sorted(trace.xs), dtype=int)
    if visited.size == 0:
        return [None] * n
    diff = np.abs(np.arange(n)[:, None] - visited[None, :])
    dist = np.minimum(diff, n - diff)
    # argmin returns the first minimum, and visited is sorted ascending
    return visited[np.argmin(dist, axis=1)].tolist()


def surrogate_indices(trace: SearchTrace, n: int) -> list:
    """Nearest-visited-value interpolation of the Y index at every x."""
    y_of = dict(trace.pairs)
    return [None if v is None else y_of[v] for v in nearest_visited(trace, n)]


class SearchAlgorithm:
    """Base class: subclasses implement :meth:`next_point`."""

    @property
    def name(self) -> str:
        raise NotImplementedError

    @property
    def is_deterministic(self) -> bool:
        return True

    def next_point(self, trace: SearchTrace, space: FiniteSpace) -> int:
        raise NotImplementedError

    def branches(self) -> list:
        """(weight, deterministic algorithm) pairs whose mixture is ``self``."""
        return [(Fraction(1), self)]

    def __str__(self) -> str:
        return self.name


def _unvisited(trace: SearchTrace, space: FiniteSpace) -> list:
    seen = trace.visited()
    return [x for x in range(space.x_size) if x not in seen]


@dataclass(frozen=True)
class EnumerateSearch(SearchAlgorithm):
    """Sample in ascending x order."""

    @property
    def name(self) -> str:
        return "enumerate"

    def next_point(self, trace, space):
        return _unvisited(trace, space)[0]


@lru_cache(maxsize=4096)
def _permutation(seed: int, n: int) -> tuple:
    return tuple(int(v) for v in make_rng(seed).permutation(n))


@dataclass(frozen=True)
class RandomSearch(SearchAlgorithm):
    """Pseudorandom search: visit points in a seed-determined permutation order."""

    seed: int

    @property
    def name(self) -> str:
        return f"random(seed={self.seed})"

    def next_point(self, trace, space):
        seen = trace.visited()
        for x in _permutation(self.seed, space.x_size):
            if x not in seen:
                return x
        raise SearchContractError("no unvisited point left")


@dataclass(frozen=True)
class RandomSearchMixture(SearchAlgorithm):
    """Uniform mixture of seeded random searches; its expectation is exact."""

    seeds: tuple

    @property
    def name(self) -> str:
        return f"random_mixture(n={len(self.seeds)})"

    @property
    def is_deterministic(self) -> bool:
        return False

    def next_point(self, trace, space):
        raise SearchContractError("a seed mixture has no single next point; use search_traces")

    def branches(self):
        w = Fraction(1, len(self.seeds))
        return [(w, RandomSearch(s)) for s in self.seeds]


@dataclass(frozen=True)
class HillClimb(SearchAlgorithm):
    """Greedy ring walker from ``start``.

    From the most recent point, step to the unvisited neighbor whose
    surrogate value (nearest visited point's y) is smallest (``descend``) or
    largest (``ascend``); ties go to the higher index.  With no unvisited
    neighbor, jump to the lowest-index unvisited point.
    """

    start: int
    ascend: bool = False

    @property
    def name(self) -> str:
        return f"hill_{'ascend' if self.ascend else 'descend'}(start={self.start})"

    def next_point(self, trace, space):
        if not 0 <= self.start < space.x_size:
            raise SpecError(f"start {self.start} out of range for |X| = {space.x_size}")
        if not trace.pairs:
            return self.start
        seen = trace.visited()
        current = trace.xs[-1]
        ring = NeighborhoodTopology(space.x_size)
        candidates = [x for x in ring.neighbors(current) if x not in seen]
        if not candidates:
            return _unvisited(trace, space)[0]
        estimate = surrogate_indices(trace, space.x_size)
        sign = -1 if self.ascend else 1
        return min(candidates, key=lambda x: (sign * estimate[x], -x))


def search_traces(algorithm: SearchAlgorithm, f: ObjectiveTable, m: int) -> list:
    """All (probability, trace) outcomes of running ``algorithm`` for m steps."""
    return [(w, run_search(alg, f, m)) for w, alg in algorithm.branches()]


def run_search(algorithm: SearchAlgorithm, f: ObjectiveTable, m: int, seed: int | None = None) -> SearchTrace:
    """Grow a trace of length ``m`` by repeatedly querying ``algorithm``.

    ``seed`` overrides the seed of seeded algorithms.
    """
    space = f.space
    if not 1 <= m <= space.x_size:
        raise ValueError(f"m must lie in [1, |X|={space.x_size}], got {m}")
    if seed is not None:
        algorithm = reseed(algorithm, seed)
    if not algorithm.is_deterministic:
        raise SearchContractError(f"{algorithm.name} is stochastic; use search_traces")
    trace = SearchTrace()
    for _ in range(m):
        x = algorithm.next_point(trace, space)
        if not isinstance(x, (int, np.integer)) or not 0 <= x < space.x_size:
            raise SearchContractError(f"{algorithm.name} proposed out-of-range point {x!r}")
        if x in trace.visited():
            raise SearchContractError(f"{algorithm.name} revisited x={x}")
        trace = trace.extend(int(x), f.y_index[x])
    return trace


def reseed(algorithm: SearchAlgorithm, seed: int) -> SearchAlgorithm:
    if hasattr(algorithm, "seed"):
        return replace(algorithm, seed=seed)
    return algorithm


@dataclass(frozen=True)
class AlgorithmSpec:
    """Parsed form of strings like ``hill_descend(start=3)``."""

    call: Call

    @classmethod
    def parse(cls, text) -> "AlgorithmSpec":
        if isinstance(text, AlgorithmSpec):
            return text
        return cls(parse_call(text))

    @property
    def tag(self) -> str:
        return self.call.name

    def __str__(self) -> str:
        return str(self.call)


ALGORITHM_TAGS = ("enumerate", "random", "random_mixture", "hill_descend", "hill_ascend", "greedy_surrogate", "mco")


def make_algorithm(spec, space: FiniteSpace | None = None) -> SearchAlgorithm:
    """Build an algorithm from an :class:`AlgorithmSpec` or spec string.

    If ``space`` is given, index parameters are range-checked eagerly.
    """
    spec = AlgorithmSpec.parse(spec)
    call = spec.call
    tag = call.name
    if tag == "enumerate":
        call.bind([])
        return EnumerateSearch()
    if tag == "random":
        p = call.bind(["seed"])
        return RandomSearch(_int(p, "seed", call))
    if tag == "random_mixture":
        p = call.bind(["seeds", "base_seed"], {"seeds": 64, "base_seed": 0})
        n = _int(p, "seeds", call)
        if n < 1:
            raise SpecError("random_mixture() parameter 'seeds' must be >= 1")
        return RandomSearchMixture(derive_seeds(_int(p, "base_seed", call), n))
    if tag in ("hill_descend", "hill_ascend"):
        p = call.bind(["start"])
        start = _int(p, "start", call)
        if start < 0 or (space is not None and start >= space.x_size):
            raise SpecError(f"{tag}() parameter 'start' out of range: {start}")
        return HillClimb(start, ascend=(tag == "hill_ascend"))
    if tag == "greedy_surrogate":
        from .mco import GreedySurrogateSearch

        p = call.bind(["T", "seed"], {"seed": 0})
        return GreedySurrogateSearch(_positive(p, "T", call), _int(p, "seed", call))
    if tag == "mco":
        from .mco import CVScheduledMCOSearch

        p = call.bind(
            ["candidates", "folds", "refit_every", "seed"],
            {"folds": 2, "refit_every": 1, "seed": 0},
        )
        cands = p["candidates"]
        if not isinstance(cands, (list, tuple)) or not cands:
            raise SpecError("mco() parameter 'candidates' must be a non-empty list")
        return CVScheduledMCOSearch(
            tuple(float(c) for c in cands),
            folds=_int(p, "folds", call),
            refit_every=_int(p, "refit_every", call),
            seed=_int(p, "seed", call),
        )
    raise SpecError(f"unknown algorithm {tag!r}; expected one of {', '.join(ALGORITHM_TAGS)}")


def _int(params: dict, key: str, call: Call) -> int:
    value = params[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise SpecError(f"{call.name}() parameter {key!r} must be an integer, got {value!r}")
    return value


def _positive(params: dict, key: str, call: Call) -> float:
    value = params[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or value <= 0:
        raise SpecError(f"{call.name}() parameter {key!r} must be a positive number, got {value!r}")
    return float(value)
