from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from nfl_lab.core import FiniteSpace
from nfl_lab.nfl import PriorVector
from nfl_lab.specs import SpecError
from nfl_lab.supervised import (
    ConditionalTable,
    LossFunction,
    OffTrainingSampler,
    TargetDistribution,
    TrainingSet,
    conditioning_contrast_experiment,
    cv_error,
    enumerate_training_sets,
    full_space_cost,
    m_matrix_symmetric,
    make_learner,
    nfl_supervised_check,
    ots_cost,
    supervised_inner_product_check,
    supervised_win_loss,
)
from oracles import loo_nearest_neighbor_ring


def one_hot(labels, ny=2):
    return TargetDistribution.one_hot(list(labels), ny)


def test_conditional_table_validation():
    with pytest.raises(ValueError):
        ConditionalTable(((Fraction(1, 2), Fraction(1, 3)),))
    with pytest.raises(ValueError):
        ConditionalTable(((Fraction(3, 2), Fraction(-1, 2)),))
    t = ConditionalTable(((Fraction(1, 2), Fraction(1, 2)), (0, 1)))
    assert not t.is_deterministic
    assert sorted(p for p, _ in t.realizations()) == [Fraction(1, 2)] * 2


def test_ots_cost_examples():
    space = FiniteSpace.integers(3, 2)
    zo = LossFunction.zero_one(space)
    d = TrainingSet(((0, 1),))
    f = one_hot((1, 1, 1))
    assert ots_cost(f, one_hot((1, 1, 1)), d, zo) == 0
    assert ots_cost(f, one_hot((0, 1, 0)), d, zo) == Fraction(1, 2)
    uniform = make_learner("uniform").fit(d, space)
    assert ots_cost(one_hot((0, 1, 1)), uniform, d, zo) == Fraction(1, 2)
    with pytest.raises(ValueError):
        ots_cost(f, f, TrainingSet(((0, 1), (1, 1), (2, 1))), zo)


def test_full_space_cost_examples():
    space = FiniteSpace.integers(4, 2)
    zo = LossFunction.zero_one(space)
    f = one_hot((0, 1, 1, 0))
    assert full_space_cost(f, f, zo) == 0
    assert full_space_cost(f, one_hot((0, 1, 1, 1)), zo) == Fraction(1, 4)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=16, max_size=16), st.lists(st.integers(0, 1), min_size=16, max_size=16),
       st.lists(st.integers(0, 15), min_size=2, max_size=2, unique=True))
def test_whole_space_split_when_h_matches_data(f_labels, h_labels, xs):
    for x in xs:
        h_labels[x] = f_labels[x]
    space = FiniteSpace.integers(16, 2)
    zo = LossFunction.zero_one(space)
    d = TrainingSet(tuple((x, f_labels[x]) for x in xs))
    f, h = one_hot(f_labels), one_hot(h_labels)
    assert full_space_cost(f, h, zo) == ots_cost(f, h, d, zo) * Fraction(14, 16)


def test_majority_and_anti_majority():
    space = FiniteSpace.integers(5, 2)
    d = TrainingSet(((0, 1), (1, 1), (2, 0)))
    assert make_learner("majority").fit(d, space).labels() == (1,) * 5
    assert make_learner("anti_majority").fit(d, space).labels() == (0,) * 5
    # ties go to the lower label; empty d is a tie
    assert make_learner("majority").fit(TrainingSet(), space).labels() == (0,) * 5
    tri = FiniteSpace.integers(3, 3)
    assert make_learner("anti_majority").fit(TrainingSet(((0, 2),)), tri).labels() == (0, 0, 0)


def test_cv_select_example():
    space = FiniteSpace.integers(5, 2)
    d = TrainingSet(((0, 1), (1, 1), (2, 0)))
    cv = make_learner("cv_select(candidates=[constant(0), constant(1)], folds=loo)")
    chosen, errors = cv.select(d, space)
    assert chosen.name == "constant(1)" and errors == [Fraction(2, 3), Fraction(1, 3)]
    anti = make_learner("anti_cv_select([constant(0), constant(1)])")
    assert anti.select(d, space)[0].name == "constant(0)"
    # too little data for the folds: first candidate
    assert cv.select(TrainingSet(((0, 1),)), space)[0].name == "constant(0)"


def test_cv_error_examples():
    space = FiniteSpace.integers(3, 2)
    zo = LossFunction.zero_one(space)
    c1 = make_learner("constant(1)")
    assert cv_error(c1, TrainingSet(((0, 1), (1, 1), (2, 1))), 3, zo, space) == 0
    assert cv_error(c1, TrainingSet(((0, 1), (1, 0))), 2, zo, space) == Fraction(1, 2)
    d = TrainingSet(((0, 1), (1, 1), (2, 0)))
    assert cv_error(make_learner("nearest_neighbor"), d, "loo", zo, space) == Fraction(2, 3)
    with pytest.raises(ValueError):
        cv_error(c1, d, 4, zo, space)


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 7), st.data())
def test_nearest_neighbor_loo_matches_oracle(n, data):
    xs = data.draw(st.lists(st.integers(0, n - 1), min_size=2, max_size=n, unique=True))
    ys = data.draw(st.lists(st.integers(0, 1), min_size=len(xs), max_size=len(xs)))
    space = FiniteSpace.integers(n, 2)
    d = TrainingSet(tuple(zip(xs, ys)))
    got = cv_error(make_learner("nearest_neighbor"), d, "loo", LossFunction.zero_one(space), space)
    assert got == loo_nearest_neighbor_ring(list(zip(xs, ys)), n)


def test_learner_spec_errors():
    with pytest.raises(SpecError, match="y"):
        make_learner("constant()")
    with pytest.raises(SpecError):
        make_learner("cv_select(candidates=[])")
    with pytest.raises(SpecError):
        make_learner("cv_select([majority], folds=1)")
    with pytest.raises(SpecError):
        make_learner("perceptron")


def test_training_set_probabilities_sum_to_one():
    space = FiniteSpace.integers(3, 2)
    assert sum(p for _, p in enumerate_training_sets(space, 2)) == 1


def test_sampler():
    d = TrainingSet(((1, 0),))
    s = OffTrainingSampler.reweighted([1, 2, 1], d)
    assert s.weights == (Fraction(1, 2), 0, Fraction(1, 2))
    with pytest.raises(ValueError):
        OffTrainingSampler.uniform(1, TrainingSet(((0, 0),)))


LEARNERS = ["majority", "anti_majority", "constant(0)", "constant(1)", "nearest_neighbor", "memorize_plus_default(1)", "uniform"]


def test_supervised_nfl_binary():
    rep = nfl_supervised_check(LEARNERS, FiniteSpace.integers(4, 2), 2)
    assert rep["pass"] and rep["common_value"] == Fraction(1, 2)


def test_supervised_nfl_ternary():
    rep = nfl_supervised_check(["majority", "anti_majority", "constant(2)", "nearest_neighbor"], FiniteSpace.integers(4, 3), 2)
    assert rep["pass"] and rep["common_value"] == Fraction(2, 3)


def test_supervised_nfl_absolute_loss():
    space = FiniteSpace.integers(3, 3)
    rep = nfl_supervised_check(["majority", "constant(0)", "nearest_neighbor"], space, 2, LossFunction.absolute(space))
    # mean |a - b| for a fixed guess averaged over uniform b is not the same for every guess
    assert rep["max_deviation"] > 0


def test_supervised_win_loss():
    rep = supervised_win_loss("majority", "anti_majority", FiniteSpace.integers(4, 2), 2)
    assert rep["pass"]


def test_inner_product_matrix_path():
    space = FiniteSpace.integers(3, 2)
    d = TrainingSet(((0, 1), (1, 0)))
    for loss in (LossFunction.zero_one(space), LossFunction.absolute(space), LossFunction.squared(space)):
        rep = supervised_inner_product_check("memorize_plus_default(0)", d, loss, space)
        assert rep["pass"] and rep["m_symmetric"]
    planted = LossFunction("planted", ((0, 1), (3, 0)))
    assert not planted.is_symmetric
    rep = supervised_inner_product_check("majority", d, planted, space)
    assert rep["p_c_given_d_matrix"] == rep["p_c_given_d_direct"]
    assert not rep["m_symmetric"] and not m_matrix_symmetric(planted, space, d)


def test_inner_product_point_prior():
    space = FiniteSpace.integers(3, 2)
    d = TrainingSet(((0, 1),))
    target = (1, 0, 0)
    rank = sum(v * 2**i for i, v in enumerate(target))
    rep = supervised_inner_product_check("majority", d, LossFunction.zero_one(space), space, PriorVector.point_mass(space, rank))
    h = make_learner("majority").fit(d, space)
    expected = ots_cost(one_hot(target), h, d, LossFunction.zero_one(space))
    assert rep["p_c_given_d_direct"] == {str(expected): 1}


def test_conditioning_contrast():
    space = FiniteSpace.integers(4, 2)
    rep = conditioning_contrast_experiment("memorize_plus_default(0)", "uniform", space, 3)
    assert rep["pass"]
    assert rep["e_phi_given_m"] == {"a": Fraction(1, 2), "b": Fraction(1, 2)}
    zero = conditioning_contrast_experiment("majority", "uniform", space, 0)
    assert all(r["phi_a"] == r["phi_prime_a"] for r in zero["per_f"])
