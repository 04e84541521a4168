"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test prints one ``ACCEPTANCE <id> PASS|FAIL`` line.  Run directly
(``python tests/test_acceptance.py``) for just the summary lines.
"""

from __future__ import annotations

import itertools
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nfl_lab.algorithms import EnumerateSearch, HillClimb, RandomSearch, make_algorithm, make_rng
from nfl_lab.core import MEAN, MIN, FiniteSpace, SearchTrace
from nfl_lab.lab.config import resolve_config
from nfl_lab.lab.experiments import run_experiment
from nfl_lab.mco import fit_q, run_mco, smooth_objective
from nfl_lab.nfl import PriorVector, inner_product_check, nfl_sum, prior_averaged_nfl_check, win_loss_balance
from nfl_lab.supervised import (
    LossFunction,
    conditioning_contrast_experiment,
    enumerate_training_sets,
    nfl_supervised_check,
    supervised_inner_product_check,
)
from oracles import closed_form_nfl_sum, phi_mean, phi_min

RANDOM_SEEDS = (3, 17, 2024)


def search_algorithms(n: int) -> list:
    return (
        [EnumerateSearch()]
        + [RandomSearch(s) for s in RANDOM_SEEDS]
        + [HillClimb(s) for s in range(n)]
        + [HillClimb(s, ascend=True) for s in range(n)]
    )


def criterion_1():
    space = FiniteSpace.integers(4, 2)
    details, ok = [], True
    for measure, oracle in ((MIN, phi_min), (MEAN, phi_mean)):
        for m in range(1, 5):
            sums = {nfl_sum(a, m, measure, space) for a in search_algorithms(4)}
            expected = closed_form_nfl_sum(4, (0, 1), m, oracle)
            ok &= sums == {expected}
            details.append(f"{measure} m={m}: {sorted(map(str, sums))}")
    cell = nfl_sum(EnumerateSearch(), 1, MIN, FiniteSpace.integers(3, 2))
    ok &= cell == 4
    return ok, f"{len(details)} cells constant; |X|=3 cell = {cell}"


def criterion_2():
    space = FiniteSpace.integers(4, 2)
    rng = make_rng(20240601)
    priors = [PriorVector.dirichlet(space, rng) for _ in range(20)]
    worst, uniform_worst, ok = 0.0, 0.0, True
    for alg in search_algorithms(4):
        rep = inner_product_check(alg, 2, MIN, PriorVector.uniform(space, exact=True), space)
        uniform_worst = max(uniform_worst, rep["max_deviation"])
        ok &= rep["pass"] and rep["max_deviation"] == 0
        for prior in priors:
            rep = inner_product_check(alg, 2, MIN, prior, space)
            worst = max(worst, rep["max_deviation"])
    ok &= worst <= 1e-12
    return ok, f"Dirichlet max deviation {worst:.3g}; uniform rational deviation {uniform_worst}"


def criterion_3():
    ok, count = True, 0
    for x_size, y_size in itertools.product((4, 5), (2, 3)):
        space = FiniteSpace.integers(x_size, y_size)
        for m in range(1, x_size + 1):
            pairs = [(HillClimb(0), HillClimb(0, ascend=True))]
            others = [EnumerateSearch(), HillClimb(0), HillClimb(0, ascend=True)]
            pairs += [(a, RandomSearch(s)) for s in RANDOM_SEEDS for a in others]
            for a, b in pairs:
                rep = win_loss_balance(a, b, m, MIN, space)
                ok &= rep["net"] == 0
                count += 1
    return ok, f"{count} exact balances"


def criterion_4():
    space = FiniteSpace.integers(4, 2)
    rep = prior_averaged_nfl_check(search_algorithms(4), 2, MIN, 10_000, 7, space, z=3.0)
    zs = [abs(v["z_vs_analytic"]) for v in rep["per_algorithm"].values()]
    pz = [abs(p["mean_difference"] / p["standard_error"]) for p in rep["paired_differences"] if p["standard_error"] > 0]
    ok = rep["pass"] and all(p["standard_error"] > 0 or p["mean_difference"] == 0 for p in rep["paired_differences"])
    return ok, f"analytic {rep['analytic_value']}; max |z| vs analytic {max(zs):.2f}; max paired |z| {max(pz, default=0):.2f}"


SUPERVISED_LEARNERS = [
    "majority",
    "anti_majority",
    "constant(0)",
    "constant(1)",
    "nearest_neighbor",
    "cv_select(candidates=[constant(0), constant(1), majority])",
    "anti_cv_select(candidates=[constant(0), constant(1), majority])",
]


def criterion_5():
    binary = nfl_supervised_check(SUPERVISED_LEARNERS, FiniteSpace.integers(5, 2), 3)
    ok = binary["pass"] and all(set(r["values"].values()) == {Fraction(1, 2)} for r in binary["per_d"])
    per_m = {v["e_phi_given_m"] for v in binary["per_learner"].values()}
    ok &= per_m == {Fraction(1, 2)}
    ternary = nfl_supervised_check(SUPERVISED_LEARNERS, FiniteSpace.integers(5, 3), 3)
    ok &= ternary["pass"] and ternary["common_value"] == Fraction(2, 3)
    return ok, f"|Y|=2: {binary['n_training_sets']} sets, value {binary['common_value']}; |Y|=3 value {ternary['common_value']}"


def criterion_6():
    space = FiniteSpace.integers(3, 2)
    planted = LossFunction("planted_asymmetric", ((0, 1), (2, 0)))
    losses = [LossFunction.zero_one(space), LossFunction.absolute(space), LossFunction.squared(space)]
    sets = list(dict.fromkeys(d for d, _ in enumerate_training_sets(space, 2)))
    ok, n = True, 0
    for learner in ("majority", "memorize_plus_default(0)", "nearest_neighbor"):
        for d in sets:
            for loss in losses:
                rep = supervised_inner_product_check(learner, d, loss, space)
                ok &= rep["pass"] and rep["m_symmetric"] and rep["p_c_given_d_matrix"] == rep["p_c_given_d_direct"]
                n += 1
            rep = supervised_inner_product_check(learner, d, planted, space)
            ok &= rep["p_c_given_d_matrix"] == rep["p_c_given_d_direct"] and not rep["m_symmetric"]
            n += 1
    return ok, f"{n} (learner, d, loss) cases over {len(sets)} training sets; planted loss asymmetric"


def criterion_7():
    rep = conditioning_contrast_experiment("memorize_plus_default(0)", "uniform", FiniteSpace.integers(4, 2), 3)
    worst_a = max(r["phi_prime_a"] for r in rep["per_f"])
    return rep["pass"], f"max Phi' of A {worst_a} < Phi' of B 1/2 on all {rep['family_size']} f; E(Phi|m) = {rep['e_phi_given_m']['a']} both"


def criterion_8():
    rep = run_experiment(resolve_config({"schema_version": 1, "experiment": "meta_induction"}))
    avg = rep.summary["average_ots_accuracy"]
    ok = rep.summary["n_universes"] == 16 and all(v["all_universes"] == Fraction(1, 2) for v in avg.values())
    return ok and rep.passed, f"16 universes; averages {{majority: {avg['majority']['all_universes']}, anti_majority: {avg['anti_majority']['all_universes']}}}"


def criterion_9():
    space = FiniteSpace.integers(64, 8, cap=None)
    cands = (0.05, 0.5, 5.0, 50.0)
    ok_a = True
    for seed in range(100):
        run = run_mco(space, smooth_objective(space, seed), 16, cands, seed=seed)
        ok_a &= all(r.q_support_ok and r.tuning_evaluations == 0 for r in run.records)

    rng = make_rng(99)
    grid = np.geomspace(1e-2, 1e2, 10)
    ok_b = True
    for _ in range(50):
        n = int(rng.integers(3, 12))
        k = int(rng.integers(1, n))
        xs = rng.choice(n, size=k, replace=False)
        d = SearchTrace(tuple((int(x), int(rng.integers(0, 5))) for x in xs))
        ents = [fit_q(d, FiniteSpace.integers(n, 5, cap=None), T).entropy() for T in grid]
        ok_b &= all(b >= a - 1e-12 for a, b in zip(ents, ents[1:]))

    bench = run_experiment(resolve_config({"schema_version": 1, "experiment": "mco_benchmark", "seed": 0}))
    check = next(c for c in bench.checks if c["name"] == "cv_not_worse_than_worst_fixed")
    ok_c = check["pass"] and bench.passed

    tiny = FiniteSpace.integers(4, 2)
    mco = make_algorithm("mco(candidates=[0.05, 0.5, 5, 50], seed=11)")
    ok_d = all(
        nfl_sum(mco, m, MIN, tiny) == nfl_sum(a, m, MIN, tiny)
        for m in range(1, 5)
        for a in search_algorithms(4)
    )
    detail = (
        f"(a) {ok_a} (b) {ok_b} (c) {ok_c}: cv - {check['worst_fixed']} = {check['mean_difference']:+.3f} "
        f"(SE {check['standard_error']:.3f}) (d) {ok_d}"
    )
    return ok_a and ok_b and ok_c and ok_d, detail


CRITERIA = [
    ("1", "NFL sum constancy", criterion_1, 1.0),
    ("2", "inner-product identity", criterion_2, 5.0),
    ("3", "win/loss balance", criterion_3, 10.0),
    ("4", "prior-averaged NFL (Monte Carlo)", criterion_4, 30.0),
    ("5", "supervised NFL and (anti-)cross-validation", criterion_5, 60.0),
    ("6", "supervised inner-product formula", criterion_6, 5.0),
    ("7", "conditioning contrast", criterion_7, 5.0),
    ("8", "meta-induction tie", criterion_8, 5.0),
    ("9", "MCO properties", criterion_9, 120.0),
]


def evaluate(fn, budget: float):
    start = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - start
    within = elapsed < budget
    return bool(ok and within), f"{detail}; {elapsed:.2f}s (budget {budget:g}s)"


def summary_line(cid, title, passed, detail) -> str:
    return f"ACCEPTANCE {cid} {'PASS' if passed else 'FAIL'}: {title} | {detail}"


@pytest.mark.parametrize("cid, title, fn, budget", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_acceptance(cid, title, fn, budget, capsys):
    passed, detail = evaluate(fn, budget)
    with capsys.disabled():
        print("\n" + summary_line(cid, title, passed, detail))
    assert passed, detail


if __name__ == "__main__":
    results = []
    for cid, title, fn, budget in CRITERIA:
        passed, detail = evaluate(fn, budget)
        results.append(passed)
        print(summary_line(cid, title, passed, detail), flush=True)
    sys.exit(0 if all(results) else 1)
