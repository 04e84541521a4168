"""One runner per experiment kind.

Every runner takes a resolved config (see :mod:`nfl_lab.lab.config`) and
returns an :class:`ExperimentReport` holding checks, a summary and tables.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from ..algorithms import make_algorithm, make_rng
from ..core import FiniteSpace, PerformanceMeasure, enumerate_functions, rank_to_function
from ..mco import benchmark_schemes
from ..nfl import (
    PriorVector,
    _sum,
    expected_performance_table,
    inner_product_check,
    prior_averaged_nfl_check,
)
from ..supervised import (
    LossFunction,
    TargetDistribution,
    TrainingSet,
    conditioning_contrast_experiment,
    make_learner,
    nfl_supervised_check,
    ots_cost,
    supervised_win_loss,
)
from .config import build_space
from .report import PLOT_SCHEMAS, ExperimentReport, Table


def _report(cfg: dict, arithmetic: str) -> ExperimentReport:
    kind = cfg["experiment"]
    rep = ExperimentReport(kind, cfg, arithmetic=arithmetic)
    rep.tables["plot"] = Table(PLOT_SCHEMAS[kind])
    return rep


def _as_list(v) -> list:
    return v if isinstance(v, list) else [v]


def run_nfl_sum_sweep(cfg: dict, workers: int = 1) -> ExperimentReport:
    exact = cfg["arithmetic"] == "rational"
    rep = _report(cfg, cfg["arithmetic"])
    space = build_space(cfg["space"], "space")
    algorithms = [make_algorithm(a, space) for a in cfg["algorithms"]]
    per_f = rep.tables["per_f"] = Table(("algorithm", "m", "phi_measure", "f_rank", "expected_performance"))
    sums = {}
    for m in _as_list(cfg["m"]):
        for ms in cfg["measures"]:
            measure = PerformanceMeasure.parse(ms)
            row = {}
            for spec, alg in zip(cfg["algorithms"], algorithms):
                table = expected_performance_table(alg, space, m, measure, exact, workers)
                row[spec] = _sum(table, exact)
                rep.tables["plot"].add(spec, m, ms, row[spec])
                for rank, v in enumerate(table):
                    per_f.add(spec, m, ms, rank, v)
            values = list(row.values())
            dev = max(abs(v - values[0]) for v in values)
            ok = dev == 0 if exact else dev <= 1e-12 * max(1.0, abs(float(values[0])))
            rep.add_check(f"nfl_sum_constant[m={m},phi={ms}]", ok, sums=row, max_deviation=float(dev))
            sums[f"m={m},phi={ms}"] = values[0]
    rep.summary = {"n_functions": space.n_functions, "common_sums": sums}
    return rep


def run_inner_product(cfg: dict, workers: int = 1) -> ExperimentReport:
    exact = cfg["arithmetic"] == "rational"
    rep = _report(cfg, cfg["arithmetic"])
    space = build_space(cfg["space"], "space")
    measure = PerformanceMeasure.parse(cfg["measure"])
    rng = make_rng(cfg["seed"])
    priors = []
    if cfg["include_uniform"]:
        priors.append(("uniform", PriorVector.uniform(space, exact=exact)))
    priors += [(f"dirichlet[{i}]", PriorVector.dirichlet(space, rng)) for i in range(cfg["dirichlet_priors"])]
    worst = {}
    for spec in cfg["algorithms"]:
        alg = make_algorithm(spec, space)
        for label, prior in priors:
            res = inner_product_check(alg, cfg["m"], measure, prior, space)
            for r in res["rows"]:
                rep.tables["plot"].add(spec, label, r["phi"], r["direct"], r["inner_product"], r["deviation"])
            rep.add_check(f"inner_product[{spec},{label}]", res["pass"], max_deviation=res["max_deviation"], exact=prior.exact)
            worst[spec] = max(worst.get(spec, 0.0), res["max_deviation"])
    rep.summary = {"n_priors": len(priors), "max_deviation_per_algorithm": worst}
    return rep


def run_prior_mc(cfg: dict, workers: int = 1) -> ExperimentReport:
    rep = _report(cfg, "float")
    space = build_space(cfg["space"], "space")
    algorithms = [make_algorithm(a, space) for a in cfg["algorithms"]]
    res = prior_averaged_nfl_check(
        algorithms, cfg["m"], PerformanceMeasure.parse(cfg["measure"]), cfg["n_samples"], cfg["seed"], space, cfg["z"]
    )
    names = {a.name: spec for spec, a in zip(cfg["algorithms"], algorithms)}
    for name, vals in res.pop("samples").items():
        for i, v in enumerate(vals):
            rep.tables["plot"].add(names[name], i, v)
    for name, entry in res["per_algorithm"].items():
        rep.add_check(f"mc_mean_vs_analytic[{names[name]}]", entry["pass"], z=entry["z_vs_analytic"])
    for pair in res["paired_differences"]:
        z = pair["mean_difference"] / pair["standard_error"] if pair["standard_error"] > 0 else 0.0
        rep.add_check(f"paired_difference[{names[pair['a']]} vs {names[pair['b']]}]", pair["pass"], z=z)
    res.pop("pass")
    rep.summary = res
    return rep


def _supervised_report(cfg: dict, learners: list, space: FiniteSpace, rep: ExperimentReport) -> dict:
    loss = LossFunction.named(cfg["loss"], space)
    res = nfl_supervised_check(learners, space, cfg["m"], loss)
    names = res["parameters"]["learners"]
    for row in res["per_d"]:
        for name, spec in zip(names, learners):
            rep.tables["plot"].add(spec, row["d"], row["values"][name])
    rep.add_check("e_phi_given_d_common", res["max_deviation"] == 0, max_deviation=float(res["max_deviation"]))
    per = {spec: res["per_learner"][n]["e_phi_given_m"] for n, spec in zip(names, learners)}
    rep.add_check("e_phi_given_m_equal", len(set(per.values())) == 1, e_phi_given_m=per)
    rep.summary = {
        "n_training_sets": res["n_training_sets"],
        "skipped_covering_sets": res["skipped_covering_sets"],
        "common_value": res["common_value"],
        "e_phi_given_m": per,
        "uniform_guess_value": Fraction(space.y_size - 1, space.y_size) if cfg["loss"] == "zero_one" else None,
    }
    return res


def run_supervised_nfl(cfg: dict, workers: int = 1) -> ExperimentReport:
    rep = _report(cfg, "rational")
    space = build_space(cfg["space"], "space")
    _supervised_report(cfg, list(cfg["learners"]), space, rep)
    return rep


def run_cv_vs_anticv(cfg: dict, workers: int = 1) -> ExperimentReport:
    rep = _report(cfg, "rational")
    space = build_space(cfg["space"], "space")
    cands = ", ".join(cfg["candidates"])
    folds = cfg["folds"]
    cv = f"cv_select(candidates=[{cands}], folds={folds}, loss={cfg['loss']})"
    anti = f"anti_cv_select(candidates=[{cands}], folds={folds}, loss={cfg['loss']})"
    _supervised_report(cfg, [cv, anti], space, rep)
    wl = supervised_win_loss(cv, anti, space, cfg["m"], LossFunction.named(cfg["loss"], space))
    rep.add_check("win_loss_balance[cv vs anti_cv]", wl["pass"], cv_better=wl["a_better"], anti_cv_better=wl["b_better"], net=wl["net"])
    rep.summary["win_loss"] = {"cv_better": wl["a_better"], "anti_cv_better": wl["b_better"]}
    return rep


def run_conditioning_contrast(cfg: dict, workers: int = 1) -> ExperimentReport:
    rep = _report(cfg, "rational")
    space = build_space(cfg["space"], "space")
    res = conditioning_contrast_experiment(
        cfg["learner_a"], cfg["learner_b"], space, cfg["m"], LossFunction.named(cfg["loss"], space)
    )
    for r in res["per_f"]:
        rep.tables["plot"].add(cfg["learner_a"], r["rank"], r["phi_prime_a"], r["phi_a"])
        rep.tables["plot"].add(cfg["learner_b"], r["rank"], r["phi_prime_b"], r["phi_b"])
    worst_gap = min(r["phi_prime_b"] - r["phi_prime_a"] for r in res["per_f"])
    rep.add_check("a_better_on_phi_prime_for_every_f", res["a_better_on_phi_prime_for_every_f"], smallest_gap=worst_gap)
    rep.add_check("e_phi_given_m_equal", res["ots_equal"], e_phi_given_m=res["e_phi_given_m"])
    rep.summary = {
        "family_size": res["family_size"],
        "e_phi_given_m": res["e_phi_given_m"],
        "e_phi_prime_given_m": res["e_phi_prime_given_m"],
        "max_phi_prime_a": max(r["phi_prime_a"] for r in res["per_f"]),
    }
    return rep


def _ots_accuracy(learner, universe: tuple, training_inputs, outer: FiniteSpace) -> Fraction:
    d = TrainingSet(tuple((x, universe[x]) for x in training_inputs))
    f = TargetDistribution.one_hot(universe, outer.y_size)
    h = learner.fit(d, outer)
    return 1 - ots_cost(f, h, d, LossFunction.zero_one(outer))


def run_meta_induction_experiment(cfg: dict, workers: int = 1) -> ExperimentReport:
    """Predict which of two search algorithms wins on unseen objective functions.

    Outer inputs are the ranks of the inner objective functions; the outer
    label is 1 when the challenger algorithm scores strictly better (lower) than
    the baseline.  MAJORITY and ANTI_MAJORITY are trained on the labels at
    ``training_inputs`` and scored off-training-set.
    """
    rep = _report(cfg, "rational")
    inner = build_space(cfg["inner_space"], "inner_space")
    measure = PerformanceMeasure.parse(cfg["measure"])
    challenger = make_algorithm(cfg["challenger"], inner)
    baseline = make_algorithm(cfg["baseline"], inner)
    m = cfg["inner_m"]
    phi_c = expected_performance_table(challenger, inner, m, measure, exact=True)
    phi_b = expected_performance_table(baseline, inner, m, measure, exact=True)
    actual = tuple(int(a < b) for a, b in zip(phi_c, phi_b))
    n_outer = len(actual)
    outer = FiniteSpace(n_outer, (0, 1), cap=None)
    outer.check_enumerable()
    train = list(cfg["training_inputs"])
    chosen = actual if cfg["universe"] == "actual" else tuple(cfg["universe"])
    learners = {"majority": make_learner("majority"), "anti_majority": make_learner("anti_majority")}

    observed = {name: _ots_accuracy(l, chosen, train, outer) for name, l in learners.items()}
    totals = {name: {"all": Fraction(0), "consistent": Fraction(0)} for name in learners}
    n_all = n_cons = 0
    for f in enumerate_functions(outer):
        u = f.y_index
        consistent = all(u[x] == chosen[x] for x in train)
        n_all += 1
        n_cons += consistent
        for name, learner in learners.items():
            acc = _ots_accuracy(learner, u, train, outer)
            rep.tables["plot"].add("".join(map(str, u)), name, acc, consistent)
            totals[name]["all"] += acc
            if consistent:
                totals[name]["consistent"] += acc
    avg = {
        name: {"all_universes": t["all"] / n_all, "consistent_universes": t["consistent"] / n_cons}
        for name, t in totals.items()
    }
    half = Fraction(1, 2)
    rep.add_check("tie_over_all_universes", all(v["all_universes"] == half for v in avg.values()),
                  averages={k: v["all_universes"] for k, v in avg.items()})
    rep.add_check("tie_over_consistent_universes", all(v["consistent_universes"] == half for v in avg.values()),
                  averages={k: v["consistent_universes"] for k, v in avg.items()})
    rep.summary = {
        "inner_performance": [
            {"rank": r, "labels": list(rank_to_function(inner, r).y_index), "challenger": a, "baseline": b}
            for r, (a, b) in enumerate(zip(phi_c, phi_b))
        ],
        "actual_universe": list(actual),
        "chosen_universe": list(chosen),
        "training_set": [[x, chosen[x]] for x in train],
        "observed_ots_accuracy": observed,
        "n_universes": n_all,
        "n_consistent_universes": n_cons,
        "average_ots_accuracy": avg,
    }
    return rep


def _benchmark_chunk(args):
    space, seeds, m, cands, folds, refit, harmonics = args
    return benchmark_schemes(space, seeds, m, cands, folds, refit, harmonics)


def run_mco_benchmark(cfg: dict, workers: int = 1) -> ExperimentReport:
    """CV-scheduled MCO against every fixed candidate temperature.

    The comparison is paired by seed (shared objective and sampling
    stream).  CV passes unless it is worse than the worst fixed scheme at
    the configured one-sided confidence, i.e. unless
    ``mean(cv - worst) - z * SE > 0``.
    """
    rep = _report(cfg, "float")
    space = build_space(cfg["space"], "space", enumerable=False)
    seeds = [cfg["seed"] + i for i in range(cfg["n_seeds"])]
    cands = tuple(float(c) for c in cfg["candidates"])
    args = (space, None, cfg["m"], cands, cfg["folds"], cfg["refit_every"], cfg["harmonics"])
    chunks = [list(c) for c in np.array_split(seeds, max(1, min(workers, len(seeds)))) if len(c)]
    jobs = [(args[0], [int(s) for s in c], *args[2:]) for c in chunks]
    if len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=len(jobs)) as pool:
            parts = list(pool.map(_benchmark_chunk, jobs))
    else:
        parts = [_benchmark_chunk(jobs[0])]
    curves = {k: [c for p in parts for c in p["curves"][k]] for k in parts[0]["curves"]}
    cv_runs = [r for p in parts for r in p["cv_runs"]]

    schedule = rep.tables["schedule"] = Table(("seed", "step", "chosen_T", "q_entropy", "best_so_far"))
    support_ok, tuning = True, 0
    for seed, run in cv_runs:
        for row in run.schedule_rows():
            schedule.add(seed, row["step"], "" if row["chosen_T"] is None else row["chosen_T"], row["q_entropy"], row["best_so_far"])
        support_ok &= all(r.q_support_ok for r in run.records)
        tuning += sum(r.tuning_evaluations for r in run.records)
    for scheme, per_seed in curves.items():
        for seed, curve in zip(seeds, per_seed):
            for step, best in enumerate(curve, start=1):
                rep.tables["plot"].add(scheme, seed, step, best)

    final = {k: np.array([c[-1] for c in v]) for k, v in curves.items()}
    n = len(seeds)
    stats = {k: {"mean_best_found": float(v.mean()), "standard_error": float(v.std(ddof=1) / math.sqrt(n))} for k, v in final.items()}
    fixed = [k for k in final if k != "cv"]
    worst = max(fixed, key=lambda k: (final[k].mean(), k))
    diff = final["cv"] - final[worst]
    mean, se = float(diff.mean()), float(diff.std(ddof=1) / math.sqrt(n))
    z = cfg["confidence_z"]
    rep.add_check("q_support_unvisited", support_ok)
    rep.add_check("tuning_uses_no_evaluations", tuning == 0, tuning_evaluations=tuning)
    rep.add_check(
        "cv_not_worse_than_worst_fixed",
        mean - z * se <= 0,
        worst_fixed=worst,
        mean_difference=mean,
        standard_error=se,
        lower_bound=mean - z * se,
        upper_bound=mean + z * se,
    )
    chosen = Counter(r.T for _, run in cv_runs for r in run.records if r.T is not None)
    rep.summary = {
        "schemes": stats,
        "worst_fixed": worst,
        "best_fixed": min(fixed, key=lambda k: (final[k].mean(), k)),
        "paired_cv_minus_worst": {"mean": mean, "standard_error": se, "upper_bound": mean + z * se},
        "cv_significantly_better_than_worst": mean + z * se < 0,
        "chosen_T_counts": {repr(t): chosen[t] for t in sorted(chosen)},
    }
    return rep


RUNNERS = {
    "nfl_sum_sweep": run_nfl_sum_sweep,
    "inner_product": run_inner_product,
    "prior_mc": run_prior_mc,
    "supervised_nfl": run_supervised_nfl,
    "cv_vs_anticv": run_cv_vs_anticv,
    "conditioning_contrast": run_conditioning_contrast,
    "meta_induction": run_meta_induction_experiment,
    "mco_benchmark": run_mco_benchmark,
}


def run_experiment(cfg: dict, workers: int = 1) -> ExperimentReport:
    """Dispatch a resolved config to its runner."""
    return RUNNERS[cfg["experiment"]](cfg, workers)
