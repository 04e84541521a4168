from fractions import Fraction

import numpy as np
import pytest

from nfl_lab.algorithms import EnumerateSearch, HillClimb, RandomSearch, make_algorithm, make_rng
from nfl_lab.core import MEAN, MIN, FiniteSpace, ObjectiveTable, rank_to_function
from nfl_lab.nfl import (
    FunctionSubset,
    PriorVector,
    d_vector,
    achievable_values,
    expected_performance,
    expected_performance_table,
    inner_product_check,
    nfl_subset_identity,
    nfl_sum,
    performance_distribution_direct,
    prior_averaged_nfl_check,
    prior_expected_performance,
    win_loss_balance,
)
from oracles import closed_form_nfl_sum, phi_mean, phi_min

ALGS = [EnumerateSearch(), RandomSearch(3), RandomSearch(11), HillClimb(0), HillClimb(2, ascend=True)]


def test_expected_performance_examples():
    space = FiniteSpace.integers(2, 2)
    assert expected_performance(EnumerateSearch(), ObjectiveTable(space, (1, 0)), 2, MIN) == 0
    const = ObjectiveTable(FiniteSpace(3, (0.0, 1.0)), (1, 1, 1))
    assert expected_performance(RandomSearch(4), const, 2, MEAN) == 1
    ramp = ObjectiveTable(FiniteSpace.integers(4, 4), (0, 1, 2, 3))
    assert expected_performance(HillClimb(3), ramp, 2, MIN) == 2


@pytest.mark.parametrize("x_size, y_size", [(3, 2), (4, 2), (3, 3)])
@pytest.mark.parametrize("measure, oracle", [(MIN, phi_min), (MEAN, phi_mean)])
def test_nfl_sum_matches_closed_form(x_size, y_size, measure, oracle):
    space = FiniteSpace.integers(x_size, y_size)
    for m in range(1, x_size + 1):
        expected = closed_form_nfl_sum(x_size, range(y_size), m, oracle)
        for alg in ALGS:
            if alg.name.startswith("hill") and alg.start >= x_size:
                continue
            assert nfl_sum(alg, m, measure, space) == expected


def test_nfl_sum_small_cells():
    assert nfl_sum(EnumerateSearch(), 1, MIN, FiniteSpace.integers(3, 2)) == 4
    assert nfl_sum(HillClimb(1), 2, MIN, FiniteSpace.integers(2, 2)) == 1


def test_float_mode_agrees():
    space = FiniteSpace(4, (0.0, 0.3))
    exact = nfl_sum(HillClimb(1), 2, MEAN, space, exact=True)
    approx = nfl_sum(HillClimb(1), 2, MEAN, space, exact=False)
    assert abs(float(exact) - approx) <= 1e-12


def test_mixture_equals_average_of_members():
    space = FiniteSpace.integers(4, 2)
    mix = make_algorithm("random_mixture(seeds=5, base_seed=9)")
    f = rank_to_function(space, 6)
    members = [expected_performance(alg, f, 2, MIN) for _, alg in mix.branches()]
    assert expected_performance(mix, f, 2, MIN) == sum(members, Fraction(0)) / 5


def test_parallel_table_equals_serial():
    space = FiniteSpace.integers(4, 2)
    serial = expected_performance_table(HillClimb(0), space, 2, MIN)
    assert expected_performance_table(HillClimb(0), space, 2, MIN, workers=2) == serial


def test_direct_distribution_examples():
    space3 = FiniteSpace.integers(3, 2)
    dist = performance_distribution_direct(HillClimb(1), 1, MIN, PriorVector.uniform(space3), space3)
    assert (dist.support, dist.mass) == ((0, 1), (Fraction(1, 2), Fraction(1, 2)))
    space2 = FiniteSpace.integers(2, 2)
    dist = performance_distribution_direct(EnumerateSearch(), 2, MIN, PriorVector.uniform(space2), space2)
    assert dist.mass == (Fraction(3, 4), Fraction(1, 4))
    point = PriorVector.point_mass(space3, 5)
    dist = performance_distribution_direct(EnumerateSearch(), 2, MIN, point, space3)
    assert dist.support == (0,) and dist.mass == (1,)


def test_d_vector_properties():
    space = FiniteSpace.integers(3, 2)
    assert d_vector(EnumerateSearch(), 2, MIN, Fraction(7), space).entries == (0,) * 8
    phis = achievable_values(HillClimb(0), 2, MEAN, space)
    vecs = [d_vector(HillClimb(0), 2, MEAN, phi, space).entries for phi in phis]
    assert all(sum(col) == 1 for col in zip(*vecs))


def test_inner_product_examples():
    space = FiniteSpace.integers(3, 2)
    for alg in ALGS[:4]:
        rep = inner_product_check(alg, 2, MIN, PriorVector.uniform(space), space)
        assert rep["pass"] and rep["max_deviation"] == 0
    rep = inner_product_check(HillClimb(0), 2, MIN, PriorVector.point_mass(space, 3), space)
    assert rep["pass"]
    assert sorted(r["direct"] for r in rep["rows"]) == [0, 1]
    rep = inner_product_check(HillClimb(0), 2, MIN, PriorVector.dirichlet(space, make_rng(5)), space)
    assert rep["pass"] and rep["max_deviation"] <= 1e-12


def test_subset_identity():
    space = FiniteSpace.integers(4, 2)
    alg = HillClimb(0)
    empty = nfl_subset_identity(alg, 2, MIN, FunctionSubset.empty(space), space)
    assert empty["left"] == 0 and empty["right"] == empty["constant"]
    full = nfl_subset_identity(alg, 2, MIN, FunctionSubset.full(space), space)
    assert full["right"] == 0 and full["left"] == full["constant"]
    hill = expected_performance_table(alg, space, 2, MIN)
    rnd = expected_performance_table(RandomSearch(4), space, 2, MIN)
    beats = FunctionSubset(np.array([a < b for a, b in zip(hill, rnd)]))
    rep = nfl_subset_identity(alg, 2, MIN, beats, space, sweep_algorithms=[RandomSearch(4)], sweep_subsets=[beats.complement()])
    assert rep["pass"]
    # hill's gain inside B is exactly random's gain outside B
    inside = {(e["algorithm"], e["subset"]): Fraction(e["inside"]) for e in rep["sweep"]}
    gain_in_b = inside[(alg.name, 0)] - inside[("random(seed=4)", 0)]
    gain_out_b = inside[("random(seed=4)", 1)] - inside[(alg.name, 1)]
    assert gain_in_b == -gain_out_b


def test_win_loss_balance_exact():
    space = FiniteSpace.integers(4, 3)
    rep = win_loss_balance(HillClimb(0), HillClimb(0, ascend=True), 2, MIN, space)
    assert rep["pass"] and rep["net"] == 0
    assert rep["win_amount"] == rep["loss_amount"]


def test_uniform_prior_is_nfl_sum_over_count():
    space = FiniteSpace.integers(3, 2)
    value = prior_expected_performance(HillClimb(0), 1, MIN, PriorVector.uniform(space), space)
    assert value == Fraction(1, 2)


def test_prior_mc_analytic_target():
    space = FiniteSpace.integers(3, 2)
    rep = prior_averaged_nfl_check(["enumerate", "hill_descend(start=1)"], 1, MIN, 2000, 3, space)
    assert rep["analytic_value"] == "1/2"
    assert rep["pass"]
    with pytest.raises(ValueError):
        prior_averaged_nfl_check(["enumerate"], 1, MIN, 50, 3, space)


def test_prior_validation():
    with pytest.raises(ValueError):
        PriorVector((Fraction(1, 2), Fraction(1, 3)), exact=True)
    with pytest.raises(ValueError):
        PriorVector((1.5, -0.5))
