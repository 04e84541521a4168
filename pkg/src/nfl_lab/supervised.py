"""Supervised learning on finite spaces: off-training-set cost and NFL checks.

Targets and hypotheses are row-stochastic tables ``p(y | x)`` with Fraction
entries, so every expectation below is exact.  A training set is drawn by
picking ``m`` inputs uniformly with replacement and reading their labels
off a deterministic target (noise-free likelihood).  Labels are Y indices
throughout; the loss matrix carries the real Y values.
"""

from __future__ import annotations

import itertools
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .core import FiniteSpace, ObjectiveTable, enumerate_functions
from .nfl import FunctionSubset, PriorVector
from .specs import Call, SpecError, as_name, parse_call


@lru_cache(maxsize=None)
def _one_hot_rows(y_size: int) -> tuple:
    return tuple(tuple(Fraction(int(i == y)) for i in range(y_size)) for y in range(y_size))


class ConditionalTable:
    """Row-stochastic table ``p(y | x)``; base of targets and hypotheses."""

    __slots__ = ("rows",)

    def __init__(self, rows):
        rows = tuple(tuple(Fraction(p) for p in row) for row in rows)
        if not rows:
            raise ValueError("table needs at least one row")
        width = len(rows[0])
        for x, row in enumerate(rows):
            if len(row) != width:
                raise ValueError("rows differ in length")
            if any(p < 0 for p in row) or sum(row) != 1:
                raise ValueError(f"row {x} is not a probability vector: {row}")
        self.rows = rows

    @classmethod
    def one_hot(cls, labels, y_size: int):
        rows = _one_hot_rows(y_size)
        table = cls.__new__(cls)
        table.rows = tuple(rows[y] for y in labels)
        if not table.rows:
            raise ValueError("table needs at least one row")
        return table

    @classmethod
    def from_objective(cls, f: ObjectiveTable):
        return cls.one_hot(f.y_index, f.space.y_size)

    @property
    def x_size(self) -> int:
        return len(self.rows)

    @property
    def y_size(self) -> int:
        return len(self.rows[0])

    @property
    def is_deterministic(self) -> bool:
        return all(max(row) == 1 for row in self.rows)

    def labels(self) -> tuple:
        if not self.is_deterministic:
            raise ValueError("table is not deterministic")
        return tuple(row.index(1) for row in self.rows)

    def realizations(self):
        """(probability, label tuple) for every deterministic table in the mixture."""
        supports = [[(p, y) for y, p in enumerate(row) if p > 0] for row in self.rows]
        for combo in itertools.product(*supports):
            prob = Fraction(1)
            for p, _ in combo:
                prob *= p
            yield prob, tuple(y for _, y in combo)

    def __eq__(self, other):
        return type(self) is type(other) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return f"{type(self).__name__}({[list(map(str, r)) for r in self.rows]})"


class TargetDistribution(ConditionalTable):
    """f(y_f | x)."""

    __slots__ = ()


class HypothesisDistribution(ConditionalTable):
    """h(y_h | x)."""

    __slots__ = ()


@dataclass(frozen=True)
class TrainingSet:
    """Ordered (x, y index) pairs; repeated inputs are allowed."""

    pairs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((int(x), int(y)) for x, y in self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def m(self) -> int:
        return len(self.pairs)

    @property
    def xs(self) -> tuple:
        return tuple(x for x, _ in self.pairs)

    @property
    def ys(self) -> tuple:
        return tuple(y for _, y in self.pairs)

    def input_set(self) -> frozenset:
        return frozenset(self.xs)

    def without(self, positions) -> "TrainingSet":
        drop = set(positions)
        return TrainingSet(tuple(p for i, p in enumerate(self.pairs) if i not in drop))

    def validate(self, space: FiniteSpace) -> None:
        for x, y in self.pairs:
            if not (0 <= x < space.x_size and 0 <= y < space.y_size):
                raise ValueError(f"pair ({x}, {y}) is outside the space")

    def consistent_with(self, labels) -> bool:
        return all(labels[x] == y for x, y in self.pairs)

    def to_json(self) -> list:
        return [list(p) for p in self.pairs]


@dataclass(frozen=True)
class LossFunction:
    """Matrix ``L[y_h][y_f]`` over Y indices."""

    name: str
    matrix: tuple

    def __post_init__(self):
        object.__setattr__(self, "matrix", tuple(tuple(Fraction(v) for v in row) for row in self.matrix))

    def __call__(self, y_h: int, y_f: int) -> Fraction:
        return self.matrix[y_h][y_f]

    @property
    def is_symmetric(self) -> bool:
        n = len(self.matrix)
        return all(self.matrix[a][b] == self.matrix[b][a] for a in range(n) for b in range(n))

    @classmethod
    def zero_one(cls, space: FiniteSpace) -> "LossFunction":
        n = space.y_size
        return cls("zero_one", tuple(tuple(int(a != b) for b in range(n)) for a in range(n)))

    @classmethod
    def absolute(cls, space: FiniteSpace) -> "LossFunction":
        ys = space.exact_y_values
        return cls("absolute", tuple(tuple(abs(a - b) for b in ys) for a in ys))

    @classmethod
    def squared(cls, space: FiniteSpace) -> "LossFunction":
        ys = space.exact_y_values
        return cls("squared", tuple(tuple((a - b) ** 2 for b in ys) for a in ys))

    @classmethod
    def named(cls, name: str, space: FiniteSpace) -> "LossFunction":
        builders = {"zero_one": cls.zero_one, "absolute": cls.absolute, "squared": cls.squared}
        if name not in builders:
            raise ValueError(f"unknown loss {name!r}; expected one of {sorted(builders)}")
        return builders[name](space)


class OffTrainingSampler:
    """P(q) over X, supported on the inputs missing from the training set."""

    def __init__(self, weights):
        self.weights = tuple(Fraction(w) for w in weights)
        if any(w < 0 for w in self.weights) or sum(self.weights) != 1:
            raise ValueError("sampler weights must form a probability vector")

    @classmethod
    def uniform(cls, x_size: int, d: TrainingSet) -> "OffTrainingSampler":
        return cls.reweighted([1] * x_size, d)

    @classmethod
    def reweighted(cls, base, d: TrainingSet) -> "OffTrainingSampler":
        """Zero the trained inputs of ``base`` and renormalize."""
        seen = d.input_set()
        w = [Fraction(0) if x in seen else Fraction(b) for x, b in enumerate(base)]
        total = sum(w)
        if total == 0:
            raise ValueError("training set covers X; off-training-set cost is undefined")
        return cls(tuple(v / total for v in w))


def _cost(f_rows, h_rows, loss: LossFunction, weights) -> Fraction:
    total = Fraction(0)
    for q, pq in enumerate(weights):
        if pq == 0:
            continue
        f_row, h_row = f_rows[q], h_rows[q]
        for yf, pf in enumerate(f_row):
            if pf == 0:
                continue
            for yh, ph in enumerate(h_row):
                if ph:
                    total += pq * pf * ph * loss(yh, yf)
    return total


def ots_cost(f, h, d: TrainingSet, loss: LossFunction, sampler: OffTrainingSampler | None = None) -> Fraction:
    """Expected loss of ``h`` against ``f`` on inputs outside the training set."""
    sampler = sampler or OffTrainingSampler.uniform(f.x_size, d)
    if any(sampler.weights[x] for x in d.input_set()):
        raise ValueError("sampler puts mass on a training input")
    return _cost(f.rows, h.rows, loss, sampler.weights)


def full_space_cost(f, h, loss: LossFunction) -> Fraction:
    """Expected loss of ``h`` against ``f`` under a uniform draw from all of X."""
    n = f.x_size
    return _cost(f.rows, h.rows, loss, (Fraction(1, n),) * n)


class LearningAlgorithm:
    """Maps a training set to a hypothesis distribution (a point mass on h)."""

    name = "learner"

    def fit(self, d: TrainingSet, space: FiniteSpace) -> HypothesisDistribution:
        raise NotImplementedError

    def __str__(self):
        return self.name

    def __repr__(self):
        return f"<{type(self).__name__} {self.name}>"


def _plurality(labels, y_size: int) -> int:
    counts = Counter(labels)
    return max(range(y_size), key=lambda y: (counts[y], -y))


class Constant(LearningAlgorithm):
    def __init__(self, y: int):
        self.y = y
        self.name = f"constant({y})"

    def fit(self, d, space):
        _check_label(self.y, space)
        return HypothesisDistribution.one_hot([self.y] * space.x_size, space.y_size)


class Majority(LearningAlgorithm):
    """Predict the most frequent training label everywhere (ties -> lower index)."""

    name = "majority"

    def label(self, d: TrainingSet, space: FiniteSpace) -> int:
        return _plurality(d.ys, space.y_size)

    def fit(self, d, space):
        return HypothesisDistribution.one_hot([self.label(d, space)] * space.x_size, space.y_size)


class AntiMajority(Majority):
    """Predict the label after the majority one, cyclically; for binary Y its complement."""

    name = "anti_majority"

    def label(self, d, space):
        return (super().label(d, space) + 1) % space.y_size


class MemorizePlusDefault(LearningAlgorithm):
    """Reproduce the training labels; predict ``default`` elsewhere."""

    def __init__(self, default: int):
        self.default = default
        self.name = f"memorize_plus_default({default})"

    def fit(self, d, space):
        _check_label(self.default, space)
        seen = defaultdict(list)
        for x, y in d.pairs:
            seen[x].append(y)
        labels = [_plurality(seen[x], space.y_size) if x in seen else self.default for x in range(space.x_size)]
        return HypothesisDistribution.one_hot(labels, space.y_size)


class UniformRows(LearningAlgorithm):
    """Ignore the data; every row uniform over Y."""

    name = "uniform"

    def fit(self, d, space):
        row = (Fraction(1, space.y_size),) * space.y_size
        return HypothesisDistribution((row,) * space.x_size)


class NearestNeighbor(LearningAlgorithm):
    """1-NN under ring distance.

    Equidistant training inputs are resolved toward the one reached by
    stepping down the ring (x - r before x + r).  Repeated inputs vote by
    plurality; an empty training set predicts label 0.
    """

    name = "nearest_neighbor"

    def fit(self, d, space):
        n = space.x_size
        votes = defaultdict(list)
        for x, y in d.pairs:
            votes[x].append(y)
        if not votes:
            return HypothesisDistribution.one_hot([0] * n, space.y_size)
        vote = {x: _plurality(v, space.y_size) for x, v in votes.items()}
        labels = []
        for x in range(n):
            for r in range(n):
                lo, hi = (x - r) % n, (x + r) % n
                if lo in vote:
                    labels.append(vote[lo])
                    break
                if hi in vote:
                    labels.append(vote[hi])
                    break
        return HypothesisDistribution.one_hot(labels, space.y_size)


class CVSelect(LearningAlgorithm):
    """Pick the candidate with the lowest (or, for ``anti``, greatest) CV error.

    The winner is retrained on the whole training set.  Ties keep the
    earlier candidate.  When the training set is too small for the requested
    folds the first candidate is used, so the rule stays total.
    """

    def __init__(self, candidates, folds="loo", anti: bool = False, loss: str = "zero_one"):
        if not candidates:
            raise SpecError("cv_select needs a non-empty candidate set")
        if folds != "loo" and (not isinstance(folds, int) or folds < 2):
            raise SpecError(f"folds must be 'loo' or an integer >= 2, got {folds!r}")
        self.candidates = tuple(candidates)
        self.folds = folds
        self.anti = anti
        self.loss = loss
        inner = ",".join(c.name for c in self.candidates)
        self.name = f"{'anti_' if anti else ''}cv_select(candidates=[{inner}], folds={folds})"

    def select(self, d: TrainingSet, space: FiniteSpace):
        k = d.m if self.folds == "loo" else self.folds
        if d.m < 2 or k > d.m:
            return self.candidates[0], None
        loss = LossFunction.named(self.loss, space)
        errors = [cv_error(c, d, k, loss, space) for c in self.candidates]
        target = max(errors) if self.anti else min(errors)
        return self.candidates[errors.index(target)], errors

    def fit(self, d, space):
        return self.select(d, space)[0].fit(d, space)


def _check_label(y: int, space: FiniteSpace):
    if not 0 <= y < space.y_size:
        raise ValueError(f"label index {y} out of range for |Y| = {space.y_size}")


def cv_error(learner: LearningAlgorithm, d: TrainingSet, folds, loss: LossFunction, space: FiniteSpace) -> Fraction:
    """Mean over contiguous folds of the held-out expected loss."""
    k = d.m if folds == "loo" else folds
    if not isinstance(k, int) or not 2 <= k <= d.m:
        raise ValueError(f"need 2 <= folds <= m, got folds={folds}, m={d.m}")
    base, extra = divmod(d.m, k)
    start, fold_losses = 0, []
    for i in range(k):
        size = base + (1 if i < extra else 0)
        held = range(start, start + size)
        start += size
        h = learner.fit(d.without(held), space)
        per_point = [sum((h.rows[x][yh] * loss(yh, y) for yh in range(space.y_size)), Fraction(0)) for x, y in (d.pairs[j] for j in held)]
        fold_losses.append(sum(per_point, Fraction(0)) / size)
    return sum(fold_losses, Fraction(0)) / k


LEARNER_TAGS = (
    "majority", "anti_majority", "constant", "memorize_plus_default", "uniform",
    "nearest_neighbor", "cv_select", "anti_cv_select",
)


def make_learner(spec) -> LearningAlgorithm:
    """Build a learner from a spec string such as ``cv_select(candidates=[constant(0),majority], folds=loo)``.

    Label parameters are Y indices.
    """
    if isinstance(spec, LearningAlgorithm):
        return spec
    call = parse_call(spec)
    tag = call.name
    if tag in ("majority", "anti_majority", "uniform", "nearest_neighbor"):
        call.bind([])
        return {"majority": Majority, "anti_majority": AntiMajority, "uniform": UniformRows, "nearest_neighbor": NearestNeighbor}[tag]()
    if tag == "constant":
        return Constant(_label(call.bind(["y"]), "y", call))
    if tag in ("memorize_plus_default", "memorize"):
        return MemorizePlusDefault(_label(call.bind(["y"], {"y": 0}), "y", call))
    if tag in ("cv_select", "anti_cv_select"):
        p = call.bind(["candidates", "folds", "loss"], {"folds": "loo", "loss": "zero_one"})
        cands = p["candidates"]
        if not isinstance(cands, (list, tuple)) or not cands:
            raise SpecError(f"{tag}() parameter 'candidates' must be a non-empty list")
        folds = p["folds"]
        if not isinstance(folds, int):
            folds = as_name(folds)
            if folds != "loo":
                raise SpecError(f"{tag}() parameter 'folds' must be an integer or loo")
        return CVSelect([make_learner(c) for c in cands], folds, anti=(tag == "anti_cv_select"), loss=as_name(p["loss"]))
    raise SpecError(f"unknown learner {tag!r}; expected one of {', '.join(LEARNER_TAGS)}")


def _label(params: dict, key: str, call: Call) -> int:
    value = params[key]
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise SpecError(f"{call.name}() parameter {key!r} must be a non-negative integer label index")
    return value


def enumerate_training_sets(space: FiniteSpace, m: int):
    """Every (d, P(d)) with d noise-free under some target and the uniform prior.

    P(d) = |X|^-m * |Y|^-k where k is the number of distinct inputs.
    """
    n, ny = space.x_size, space.y_size
    for xs in itertools.product(range(n), repeat=m):
        distinct = sorted(set(xs))
        for labels in itertools.product(range(ny), repeat=len(distinct)):
            lab = dict(zip(distinct, labels))
            d = TrainingSet(tuple((x, lab[x]) for x in xs))
            yield d, Fraction(1, n**m * ny ** len(distinct))


def consistent_labelings(space: FiniteSpace, d: TrainingSet):
    """Label vectors of the deterministic targets that reproduce ``d``."""
    fixed = dict(d.pairs)
    free = [x for x in range(space.x_size) if x not in fixed]
    for vals in itertools.product(range(space.y_size), repeat=len(free)):
        labels = dict(fixed)
        labels.update(zip(free, vals))
        yield tuple(labels[x] for x in range(space.x_size))


def consistent_targets(space: FiniteSpace, d: TrainingSet):
    """Deterministic targets that reproduce ``d``."""
    for labels in consistent_labelings(space, d):
        yield TargetDistribution.one_hot(labels, space.y_size)


def nfl_supervised_check(learners, space: FiniteSpace, m: int, loss: LossFunction | None = None) -> dict:
    """E(Phi | d, learner) for every training set of size m under the uniform prior.

    Training sets whose inputs cover X have no off-training inputs and are
    skipped; E(Phi | m) renormalizes over the rest.
    """
    space.check_enumerable()
    learners = [make_learner(l) for l in learners]
    loss = loss or LossFunction.zero_one(space)
    names = [l.name for l in learners]
    rows, skipped = [], 0
    by_m = {n: Fraction(0) for n in names}
    total_weight = Fraction(0)
    for d, pd in enumerate_training_sets(space, m):
        if len(d.input_set()) == space.x_size:
            skipped += 1
            continue
        off = [x for x in range(space.x_size) if x not in d.input_set()]
        targets = list(consistent_labelings(space, d))
        values = []
        for learner in learners:
            h = learner.fit(d, space)
            # expected loss at each off-training input for each possible target label
            point_loss = {
                (q, yf): sum((h.rows[q][yh] * loss(yh, yf) for yh in range(space.y_size)), Fraction(0))
                for q in off
                for yf in range(space.y_size)
            }
            total = sum((point_loss[q, labels[q]] for labels in targets for q in off), Fraction(0))
            values.append(total / (len(off) * len(targets)))
        for n, v in zip(names, values):
            by_m[n] += pd * v
        total_weight += pd
        rows.append({"d": d.to_json(), "values": dict(zip(names, values)), "spread": max(values) - min(values)})
    by_m = {n: v / total_weight for n, v in by_m.items()}
    max_dev = max(r["spread"] for r in rows) if rows else Fraction(0)
    common = {v for r in rows for v in r["values"].values()}
    return {
        "check": "supervised_nfl",
        "parameters": {"x_size": space.x_size, "y_values": list(space.y_values), "m": m, "loss": loss.name, "learners": names},
        "n_training_sets": len(rows),
        "skipped_covering_sets": skipped,
        "per_d": rows,
        "per_learner": {n: {"e_phi_given_m": v} for n, v in by_m.items()},
        "common_value": next(iter(common)) if len(common) == 1 else None,
        "max_deviation": max_dev,
        "pass": max_dev == 0 and len(set(by_m.values())) == 1,
    }


def expected_cost_given_f(learner: LearningAlgorithm, f: TargetDistribution, space: FiniteSpace, m: int, loss: LossFunction, whole_space: bool = False) -> Fraction:
    """E(Phi | f, m, learner), or E(Phi' | f, m, learner) with ``whole_space``.

    Averages over input tuples drawn uniformly with replacement; for the
    off-training version, tuples covering X are excluded.
    """
    labels = f.labels()
    total, count = Fraction(0), 0
    for xs in itertools.product(range(space.x_size), repeat=m):
        if not whole_space and len(set(xs)) == space.x_size:
            continue
        d = TrainingSet(tuple((x, labels[x]) for x in xs))
        h = learner.fit(d, space)
        total += full_space_cost(f, h, loss) if whole_space else ots_cost(f, h, d, loss)
        count += 1
    return total / count


def supervised_win_loss(a, b, space: FiniteSpace, m: int, loss: LossFunction | None = None) -> dict:
    """sum_f [E(Phi|f,m,a) - E(Phi|f,m,b)] over deterministic targets."""
    a, b = make_learner(a), make_learner(b)
    loss = loss or LossFunction.zero_one(space)
    diffs = []
    for obj in enumerate_functions(space):
        f = TargetDistribution.from_objective(obj)
        diffs.append(expected_cost_given_f(a, f, space, m, loss) - expected_cost_given_f(b, f, space, m, loss))
    net = sum(diffs, Fraction(0))
    return {
        "check": "supervised_win_loss",
        "parameters": {"a": a.name, "b": b.name, "m": m, "loss": loss.name},
        "a_better": sum(1 for v in diffs if v < 0),
        "b_better": sum(1 for v in diffs if v > 0),
        "net": net,
        "pass": net == 0,
    }


def supervised_inner_product_check(
    learner,
    d: TrainingSet,
    loss: LossFunction,
    space: FiniteSpace,
    prior: PriorVector | None = None,
) -> dict:
    """P(c | d) through the M-matrix double sum against direct enumeration.

    Path (a) builds the full cost grid over deterministic (f, h), forms
    M_c(f, h) = [cost = c] and sums P(h|d) P(f|d) M_c.  Path (b) walks the
    posterior support and the learner's own realizations.  The learner's
    hypothesis is treated as a product mixture over deterministic tables.
    """
    learner = make_learner(learner)
    space.check_enumerable()
    prior = prior or PriorVector.uniform(space, exact=True)
    if not prior.exact:
        raise ValueError("the supervised inner-product check needs an exact prior")
    d.validate(space)
    funcs = list(enumerate_functions(space))
    tables = [TargetDistribution.from_objective(f) for f in funcs]

    # posterior: uniform-with-replacement input draws make P(d|f) constant on consistent f
    unnorm = [w if d.consistent_with(f.y_index) else Fraction(0) for f, w in zip(funcs, prior.weights)]
    z = sum(unnorm, Fraction(0))
    if z == 0:
        raise ValueError("prior gives zero mass to every target consistent with d")
    posterior = [w / z for w in unnorm]

    h = learner.fit(d, space)
    p_h = [Fraction(0)] * len(funcs)
    for prob, labels in h.realizations():
        p_h[ObjectiveTable(space, labels).rank] += prob

    sampler = OffTrainingSampler.uniform(space.x_size, d)
    grid = [[ots_cost(tf, th, d, loss, sampler) for th in tables] for tf in tables]
    costs = sorted({c for row in grid for c in row})
    via_m = {}
    for c in costs:
        total = Fraction(0)
        for i, pf in enumerate(posterior):
            if pf:
                total += pf * sum((p_h[j] for j, v in enumerate(grid[i]) if v == c), Fraction(0))
        if total:
            via_m[c] = total

    direct = defaultdict(Fraction)
    for f, pf in zip(funcs, posterior):
        if not pf:
            continue
        for prob, labels in h.realizations():
            direct[_direct_cost(f.y_index, labels, d, loss, space)] += pf * prob
    direct = {c: p for c, p in direct.items() if p}

    symmetric = all(grid[i][j] == grid[j][i] for i in range(len(funcs)) for j in range(i))
    agree = via_m == direct
    return {
        "check": "supervised_inner_product",
        "parameters": {"learner": learner.name, "d": d.to_json(), "loss": loss.name},
        "p_c_given_d_matrix": {str(c): p for c, p in sorted(via_m.items())},
        "p_c_given_d_direct": {str(c): p for c, p in sorted(direct.items())},
        "loss_symmetric": loss.is_symmetric,
        "m_symmetric": symmetric,
        "pass": agree and (symmetric or not loss.is_symmetric),
    }


def _direct_cost(f_labels, h_labels, d: TrainingSet, loss: LossFunction, space: FiniteSpace) -> Fraction:
    off = [x for x in range(space.x_size) if x not in d.input_set()]
    return sum((loss(h_labels[x], f_labels[x]) for x in off), Fraction(0)) / len(off)


def m_matrix_symmetric(loss: LossFunction, space: FiniteSpace, d: TrainingSet) -> bool:
    """Whether cost(f, h, d) == cost(h, f, d) over all deterministic pairs."""
    tables = [TargetDistribution.from_objective(f) for f in enumerate_functions(space)]
    return all(
        ots_cost(a, b, d, loss) == ots_cost(b, a, d, loss)
        for i, a in enumerate(tables)
        for b in tables[: i + 1]
    )


def conditioning_contrast_experiment(
    learner_a,
    learner_b,
    space: FiniteSpace,
    m: int,
    loss: LossFunction | None = None,
    family: FunctionSubset | None = None,
) -> dict:
    """Compare E(Phi' | m, A, f) per target with E(Phi | m, A) under the uniform prior.

    ``demonstrated`` is true when A has strictly lower whole-space cost than
    B for every target in ``family`` (default: all targets) while the two
    off-training-set expectations are exactly equal.
    """
    a, b = make_learner(learner_a), make_learner(learner_b)
    loss = loss or LossFunction.zero_one(space)
    if m < 0:
        raise ValueError(f"m must be non-negative, got {m}")
    rows = []
    for obj in enumerate_functions(space):
        f = TargetDistribution.from_objective(obj)
        rows.append({
            "rank": obj.rank,
            "labels": list(obj.y_index),
            "phi_prime_a": expected_cost_given_f(a, f, space, m, loss, whole_space=True),
            "phi_prime_b": expected_cost_given_f(b, f, space, m, loss, whole_space=True),
            "phi_a": expected_cost_given_f(a, f, space, m, loss),
            "phi_b": expected_cost_given_f(b, f, space, m, loss),
        })
    n = len(rows)
    e_phi_a = sum((r["phi_a"] for r in rows), Fraction(0)) / n
    e_phi_b = sum((r["phi_b"] for r in rows), Fraction(0)) / n
    members = family.members if family is not None else [True] * n
    chosen = [r for r, keep in zip(rows, members) if keep]
    a_wins_everywhere = bool(chosen) and all(r["phi_prime_a"] < r["phi_prime_b"] for r in chosen)
    return {
        "check": "conditioning_contrast",
        "parameters": {"a": a.name, "b": b.name, "x_size": space.x_size, "y_values": list(space.y_values), "m": m, "loss": loss.name},
        "per_f": rows,
        "family_size": len(chosen),
        "a_better_on_phi_prime_for_every_f": a_wins_everywhere,
        "e_phi_given_m": {"a": e_phi_a, "b": e_phi_b},
        "e_phi_prime_given_m": {
            "a": sum((r["phi_prime_a"] for r in rows), Fraction(0)) / n,
            "b": sum((r["phi_prime_b"] for r in rows), Fraction(0)) / n,
        },
        "ots_equal": e_phi_a == e_phi_b,
        "pass": a_wins_everywhere and e_phi_a == e_phi_b,
    }
