"""Finite spaces, objective tables, search traces and performance measures.

Everything downstream sums over the full function set ``Y^X``.  To keep
those sums exact, an objective function is stored as a vector of *indices*
into ``Y`` and the real ``Y`` values are only looked up when a performance
measure is evaluated.  In exact mode those values are ``Fraction`` objects
(every float converts to a Fraction without loss).
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence, Union

Number = Union[float, Fraction]

DEFAULT_ENUMERATION_CAP = 2**24


class EnumerationTooLarge(ValueError):
    """Raised when |Y|^|X| exceeds the enumeration cap."""

    def __init__(self, n_functions: int, cap: int):
        self.n_functions = n_functions
        self.cap = cap
        super().__init__(
            f"|Y|^|X| = {n_functions} exceeds the enumeration cap of {cap}"
        )


@dataclass(frozen=True)
class FiniteSpace:
    """A finite search space ``X = {0..x_size-1}`` with value set ``Y``.

    ``cap`` bounds |Y|^|X|.  Pass ``cap=None`` for spaces that are searched
    but never enumerated (e.g. the 64-point MCO benchmark); enumeration of
    such a space is still checked against the default cap.
    """

    x_size: int
    y_values: tuple
    cap: int | None = DEFAULT_ENUMERATION_CAP

    def __post_init__(self):
        if not isinstance(self.x_size, int) or self.x_size < 1:
            raise ValueError(f"x_size must be a positive integer, got {self.x_size!r}")
        ys = tuple(float(y) for y in self.y_values)
        if not ys:
            raise ValueError("y_values must be non-empty")
        if any(not math.isfinite(y) for y in ys):
            raise ValueError("y_values must be finite")
        if any(b <= a for a, b in zip(ys, ys[1:])):
            raise ValueError("y_values must be strictly increasing and duplicate-free")
        object.__setattr__(self, "y_values", ys)
        if self.cap is not None and self.n_functions > self.cap:
            raise EnumerationTooLarge(self.n_functions, self.cap)

    @classmethod
    def integers(cls, x_size: int, y_size: int, cap: int | None = DEFAULT_ENUMERATION_CAP):
        """Space with ``Y = {0, 1, ..., y_size-1}``."""
        return cls(x_size, tuple(range(y_size)), cap)

    @property
    def y_size(self) -> int:
        return len(self.y_values)

    @property
    def n_functions(self) -> int:
        return self.y_size**self.x_size

    @cached_property
    def exact_y_values(self) -> tuple:
        return tuple(Fraction(y) for y in self.y_values)

    def y(self, index: int, exact: bool = False) -> Number:
        return self.exact_y_values[index] if exact else self.y_values[index]

    def y_index(self, value: float) -> int:
        try:
            return self.y_values.index(float(value))
        except ValueError:
            raise ValueError(f"{value!r} is not an element of Y = {self.y_values}") from None

    def check_enumerable(self) -> None:
        cap = DEFAULT_ENUMERATION_CAP if self.cap is None else self.cap
        if self.n_functions > cap:
            raise EnumerationTooLarge(self.n_functions, cap)

    def to_json(self) -> dict:
        return {"x_size": self.x_size, "y_values": list(self.y_values)}


@dataclass(frozen=True)
class ObjectiveTable:
    """A total function ``f : X -> Y`` stored as a Y-index vector."""

    space: FiniteSpace
    y_index: tuple

    def __post_init__(self):
        idx = tuple(int(i) for i in self.y_index)
        if len(idx) != self.space.x_size:
            raise ValueError(
                f"y_index has length {len(idx)}, expected x_size={self.space.x_size}"
            )
        if any(i < 0 or i >= self.space.y_size for i in idx):
            raise ValueError(f"y_index entries must lie in [0, {self.space.y_size})")
        object.__setattr__(self, "y_index", idx)

    @classmethod
    def from_values(cls, space: FiniteSpace, values: Sequence[float]) -> "ObjectiveTable":
        return cls(space, tuple(space.y_index(v) for v in values))

    def __call__(self, x: int) -> float:
        return self.space.y_values[self.y_index[x]]

    def values(self, exact: bool = False) -> tuple:
        ys = self.space.exact_y_values if exact else self.space.y_values
        return tuple(ys[i] for i in self.y_index)

    @property
    def rank(self) -> int:
        return function_to_rank(self)

    def to_json(self) -> dict:
        return {
            "x_size": self.space.x_size,
            "y_values": list(self.space.y_values),
            "y_index": list(self.y_index),
        }

    @classmethod
    def from_json(cls, data: dict) -> "ObjectiveTable":
        space = FiniteSpace(int(data["x_size"]), tuple(data["y_values"]))
        return cls(space, tuple(data["y_index"]))


def rank_to_function(space: FiniteSpace, rank: int) -> ObjectiveTable:
    """Decode a canonical rank (base-|Y| numeral, x=0 least significant)."""
    if not 0 <= rank < space.n_functions:
        raise ValueError(f"rank {rank} out of range [0, {space.n_functions})")
    digits = []
    for _ in range(space.x_size):
        rank, d = divmod(rank, space.y_size)
        digits.append(d)
    return ObjectiveTable(space, tuple(digits))


def function_to_rank(table: ObjectiveTable) -> int:
    base = table.space.y_size
    rank = 0
    for d in reversed(table.y_index):
        rank = rank * base + d
    return rank


def enumerate_functions(space: FiniteSpace) -> Iterator[ObjectiveTable]:
    """Yield every ``f in Y^X`` in ascending canonical rank."""
    space.check_enumerable()
    for digits in itertools.product(range(space.y_size), repeat=space.x_size):
        # product varies the last position fastest; x=0 must be least significant
        yield ObjectiveTable(space, digits[::-1])


def enumerate_rank_range(space: FiniteSpace, start: int, stop: int) -> Iterator[ObjectiveTable]:
    """Functions with ranks in ``[start, stop)``, for splitting sweeps."""
    space.check_enumerable()
    for r in range(max(start, 0), min(stop, space.n_functions)):
        yield rank_to_function(space, r)


@dataclass(frozen=True)
class SearchTrace:
    """Ordered data set ``d^m`` of (x index, y index) pairs, x's distinct."""

    pairs: tuple = ()

    def __post_init__(self):
        pairs = tuple((int(x), int(y)) for x, y in self.pairs)
        xs = [x for x, _ in pairs]
        if len(set(xs)) != len(xs):
            raise ValueError(f"trace revisits a point: x-sequence {xs}")
        object.__setattr__(self, "pairs", pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def m(self) -> int:
        return len(self.pairs)

    @property
    def xs(self) -> tuple:
        return tuple(x for x, _ in self.pairs)

    @property
    def y_indices(self) -> tuple:
        return tuple(y for _, y in self.pairs)

    def visited(self) -> frozenset:
        return frozenset(self.xs)

    def y_values(self, space: FiniteSpace, exact: bool = False) -> tuple:
        ys = space.exact_y_values if exact else space.y_values
        return tuple(ys[i] for i in self.y_indices)

    def extend(self, x: int, y_index: int) -> "SearchTrace":
        return SearchTrace(self.pairs + ((x, y_index),))

    def prefix(self, k: int) -> "SearchTrace":
        return SearchTrace(self.pairs[:k])

    def validate(self, space: FiniteSpace) -> None:
        if self.m > space.x_size:
            raise ValueError(f"trace length {self.m} exceeds |X| = {space.x_size}")
        for x, y in self.pairs:
            if not (0 <= x < space.x_size and 0 <= y < space.y_size):
                raise ValueError(f"pair ({x}, {y}) is outside the space")

    def to_json(self, space: FiniteSpace) -> list:
        return [[x, space.y_values[y]] for x, y in self.pairs]

    @classmethod
    def from_json(cls, data: list, space: FiniteSpace) -> "SearchTrace":
        trace = cls(tuple((int(x), space.y_index(y)) for x, y in data))
        trace.validate(space)
        return trace


_MEASURE_RE = re.compile(r"^\s*(min|mean|final|best_at_step)\s*(?:\(\s*(?:k\s*=\s*)?(\d+)\s*\))?\s*$")


@dataclass(frozen=True)
class PerformanceMeasure:
    """A map from the sampled y-values ``d^m_Y`` to a real number.

    Lower is better for every built-in measure.
    """

    kind: str
    k: int | None = None

    KINDS = ("min", "mean", "best_at_step", "final")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown performance measure {self.kind!r}")
        if self.kind == "best_at_step":
            if self.k is None or self.k < 1:
                raise ValueError("best_at_step requires k >= 1")
        elif self.k is not None:
            raise ValueError(f"{self.kind} takes no step argument")

    @classmethod
    def parse(cls, text: str) -> "PerformanceMeasure":
        match = _MEASURE_RE.match(text.lower())
        if not match:
            raise ValueError(f"cannot parse performance measure {text!r}")
        kind, k = match.groups()
        return cls(kind, int(k) if k is not None else None)

    def __str__(self) -> str:
        return f"best_at_step({self.k})" if self.kind == "best_at_step" else self.kind

    def __call__(self, ys: Sequence[Number]) -> Number:
        if not ys:
            raise ValueError("performance of an empty trace is undefined")
        if self.kind == "min":
            return min(ys)
        if self.kind == "mean":
            if isinstance(ys[0], Fraction):
                return sum(ys, Fraction(0)) / len(ys)
            return math.fsum(ys) / len(ys)
        if self.kind == "final":
            return ys[-1]
        if self.k > len(ys):
            raise ValueError(f"best_at_step({self.k}) on a trace of length {len(ys)}")
        return min(ys[: self.k])


MIN = PerformanceMeasure("min")
MEAN = PerformanceMeasure("mean")
FINAL = PerformanceMeasure("final")


def best_at_step(k: int) -> PerformanceMeasure:
    return PerformanceMeasure("best_at_step", k)


def evaluate_performance(
    measure: PerformanceMeasure, trace: SearchTrace, space: FiniteSpace, exact: bool = False
) -> Number:
    return measure(trace.y_values(space, exact))
