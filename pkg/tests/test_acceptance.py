"""Acceptance criteria; each test prints one pass/fail line."""

import time

import numpy as np
import pytest

from test_al_strategies import expected_oracle_case, uncertainty_oracle_case
from test_model import gradient_check

from budgetlearn import cli
from budgetlearn.core import Dataset, RngStream, standardize
from budgetlearn.datagen import generate, profile
from budgetlearn.diagnostics import kmeans_diagnose
from budgetlearn.harness import run_cv_experiment
from budgetlearn.model import CostCounters, Hyper
from budgetlearn.orchestrator import (ApproachConfig, run_active, run_approach, run_hybrid,
                                      run_passive, warm_start)
from budgetlearn.ssl_methods import AffinityGraph, MethodConfig, build_graph, normalized_affinity, spread_matrix

REPEATS = 10
WELL = profile("pathogen-like", peak_shift=4.0, noise_std=0.3)
POOR = profile("pathogen-like")
SPREAD = MethodConfig("spread_rbf", sigma=4.0)


def _scripted(t=50, c=4, d=5, seed=0):
    rng = np.random.default_rng(seed)
    y = np.arange(t) % c
    return standardize(Dataset(rng.standard_normal((t, d)) + 1.5 * np.eye(c, d)[y], y, c), range(t))


def _counted(ds, approach, strategy=None, budget=20):
    cfg = ApproachConfig(approach, strategy, warm_start_count=10, final_count=30, eval_grid_step=1,
                         retrain_budget=budget)
    state = warm_start(np.arange(ds.num_samples), ds, 10, RngStream(0, ("warm",)))
    counters = CostCounters()
    start = time.perf_counter()
    run_approach(state, ds, cfg, np.random.default_rng(0), counters=counters)
    return counters, time.perf_counter() - start


def test_c1_counter_exactness(report):
    ds = _scripted()
    passive, tp = _counted(ds, "passive")
    unc, tu = _counted(ds, "active", "entropy")
    exp, te = _counted(ds, "active", "expected_error", budget=5)
    ok = ((passive.train_count, passive.infer_count) == (20, 0) and tp < 60
          and unc.infer_count == 610 and unc.train_count == 20 and tu < 60
          and exp.lookahead_train_count == 2440 and te < 600)
    report(1, ok, f"passive train={passive.train_count} infer={passive.infer_count} {tp:.1f}s; "
                  f"uncertainty infer={unc.infer_count} {tu:.1f}s; "
                  f"expected-error retrains={exp.lookahead_train_count} {te:.1f}s")
    assert ok


def test_c2_strategy_oracles(report):
    unc = sum(uncertainty_oracle_case(s) for s in range(200))
    exp = sum(expected_oracle_case(s) for s in range(200))
    ok = unc == 200 and exp == 200
    report(2, ok, f"uncertainty {unc}/200, expected-error {exp}/200")
    assert ok


def test_c3_gradient_check(report):
    worst = max(gradient_check(s) for s in range(50))
    ok = worst < 1e-4
    report(3, ok, f"max relative error {worst:.2e} over 50 instances")
    assert ok


def _random_graph(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    ds = Dataset(rng.standard_normal((n, 3)), None, 3)
    if seed % 2 and n > 2:
        graph = build_graph(range(n), ds, "knn", k=int(rng.integers(1, n)))
    else:
        graph = build_graph(range(n), ds, "rbf_full", sigma=float(rng.uniform(0.5, 2.0)))
    seeds = np.zeros((n, 3))
    for v in rng.choice(n, int(rng.integers(1, n + 1)), replace=False):
        seeds[v, rng.integers(0, 3)] = 1.0
    return graph, seeds


def _spread_error(tol):
    worst = 0.0
    for seed in range(20):
        graph, seeds = _random_graph(seed)
        f, converged, _ = spread_matrix(graph, seeds, alpha=0.2, tol=tol)
        assert converged
        exact = 0.8 * np.linalg.solve(np.eye(len(seeds)) - 0.2 * normalized_affinity(graph.weights), seeds)
        live = exact.sum(axis=1) > 0
        a = f[live] / f[live].sum(axis=1, keepdims=True)
        b = exact[live] / exact[live].sum(axis=1, keepdims=True)
        worst = max(worst, float(np.max(np.abs(a - b))))
    return worst


def test_c4_spreading_closed_form(report):
    # the default stopping tol bounds the raw iterate, not the normalized rows
    worst = _spread_error(1e-10)
    ok = worst <= 1e-6
    report(4, ok, f"max abs difference {worst:.2e} over 20 graphs at tol 1e-10 "
                  f"; default tol gives {_spread_error(1e-6):.2e}")
    assert ok


def test_c5_reductions(report):
    ds = generate(profile("blobs", counts=(12, 12, 12, 12)))
    ds = standardize(ds, range(ds.num_samples))
    hyper = Hyper(epochs=50)
    same = 0
    for seed in range(3):
        state = warm_start(np.arange(ds.num_samples), ds, 6, RngStream(seed, ("warm",)))
        kw = dict(warm_start_count=6, final_count=20, eval_grid_step=2)
        passive = run_passive(state, ds, ApproachConfig("passive", **kw), np.random.default_rng(seed), hyper=hyper)
        random = run_active(state, ds, ApproachConfig("active", "random", **kw), np.random.default_rng(seed),
                            hyper=hyper)
        active = run_active(state, ds, ApproachConfig("active", "entropy", **kw), np.random.default_rng(seed),
                            hyper=hyper)
        zero = MethodConfig("spread_rbf", sigma=2.0, pseudo_weight=0.0)
        hybrid = run_hybrid(state, ds, ApproachConfig("hybrid", "entropy", zero, **kw),
                            np.random.default_rng(seed), hyper=hyper)
        same += passive.to_json() == random.to_json()
        same += active.to_json() == hybrid.to_json()
    ok = same == 6
    report(5, ok, f"{same}/6 byte-identical trace pairs")
    assert ok


def _gap_noise(a, b, j):
    return np.hypot(a.std[j], b.std[j]) / np.sqrt(REPEATS)


def test_c6_active_beats_passive(report):
    ds = generate(profile("plasma-like", seed=1))
    kw = dict(warm_start_count=40, final_count=90, eval_grid_step=5)
    start = time.perf_counter()
    passive = run_cv_experiment(ds, ApproachConfig("passive", **kw), REPEATS, seed=1)
    active = run_cv_experiment(ds, ApproachConfig("active", "entropy", **kw), REPEATS, seed=1)
    elapsed = time.perf_counter() - start
    final = passive.mean[-1]
    target = 0.95 * final
    lp, la = passive.labels_to_reach(target), active.labels_to_reach(target)
    dominance = float(np.mean(active.mean >= passive.mean))
    saving = (lp - la) / lp if la is not None else -1.0
    ok = 0.8 <= final <= 0.95 and dominance >= 0.7 and saving >= 0.2 and elapsed < 600
    report(6, ok, f"passive final {final:.3f}; AL >= passive at {dominance:.0%} of grid points; "
                  f"labels to {target:.3f}: passive {lp}, AL {la} ({saving:.0%} fewer); {elapsed:.0f}s")
    assert ok


def test_c7_ssl_depends_on_clusters(report):
    kw = dict(warm_start_count=8, final_count=12, eval_grid_step=4)
    rows = []
    for spec in (WELL, POOR):
        ds = generate(spec)
        agree = kmeans_diagnose(ds, 4, RngStream(0, ("kmeans",))).agreement
        passive = run_cv_experiment(ds, ApproachConfig("passive", **kw), REPEATS, seed=2)
        ssl = run_cv_experiment(ds, ApproachConfig("ssl", ssl_method=SPREAD, **kw), REPEATS, seed=2)
        rows.append((agree, ssl.mean[0] - passive.mean[0], _gap_noise(ssl, passive, 0)))
    (wa, wg, _), (pa, pg, pn) = rows
    ok = wa >= 0.9 and wg > 0 and pa <= 0.6 and pg <= pn
    report(7, ok, f"well-clustered agreement {wa:.2f} gap {wg:+.3f}; "
                  f"poorly-clustered agreement {pa:.2f} gap {pg:+.3f} (noise {pn:.3f})")
    assert ok


def test_c8_hybrid_label_savings(report):
    ds = generate(WELL)
    kw = dict(warm_start_count=8, final_count=60, eval_grid_step=4)
    passive = run_cv_experiment(ds, ApproachConfig("passive", **kw), REPEATS, seed=3)
    hybrid = run_cv_experiment(ds, ApproachConfig("hybrid", "entropy", SPREAD, **kw), REPEATS, seed=3)
    target = 0.95 * passive.mean[-1]
    lp, lh = passive.labels_to_reach(target), hybrid.labels_to_reach(target)
    saving = (lp - lh) / lp if lh is not None else -1.0
    ok = saving >= 0.3
    report(8, ok, f"labels to {target:.3f}: passive {lp}, hybrid {lh} ({saving:.0%} fewer)")
    assert ok


def _check_trace(trace, train_ids, val_ids, b):
    labeled = list(trace.warm_start_ids) + list(trace.selected_ids)
    ok = len(labeled) == len(set(labeled))
    ok &= set(labeled) <= set(train_ids) and not set(labeled) & set(val_ids)
    for p in trace.points:
        ok &= p.num_human_labels == b + len(trace.selected_ids[: p.num_human_labels - b])
    return ok


def test_c9_protocol_invariants(report, tmp_path):
    from budgetlearn.core import make_folds
    ds = generate(profile("blobs", counts=(10, 10, 10, 10)))
    failures = []
    for r in range(3):
        folds = make_folds(ds, RngStream(4, ("folds", r)))
        if sorted(np.concatenate(folds.folds).tolist()) != list(range(40)):
            failures.append(f"coverage r{r}")
        for v in range(5):
            tr, va = folds.round(v)
            if set(tr.tolist()) & set(va.tolist()) or len(tr) + len(va) != 40:
                failures.append(f"disjoint r{r} v{v}")
    hyper = Hyper(epochs=20)
    for approach, strat, method in (("passive", None, None), ("active", "entropy", None),
                                    ("ssl", None, MethodConfig("spread_knn", k=3)),
                                    ("hybrid", "least_confident", MethodConfig("spread_knn", k=3))):
        cfg = ApproachConfig(approach, strat, method, warm_start_count=4, final_count=14, eval_grid_step=2)
        curve = run_cv_experiment(ds, cfg, repeats=2, seed=4, hyper=hyper, keep_traces=True)
        for (r, v), trace in curve.traces.items():
            tr, va = make_folds(ds, RngStream(4, ("folds", r))).round(v)
            if not _check_trace(trace, tr.tolist(), va.tolist(), 4):
                failures.append(f"{approach} r{r} v{v}")
            # labeled plus pool conserves the training fold at every step
            state = warm_start(tr, ds, 4, RngStream(4, ("run", r, v)).child("warm"))
            for sid in trace.selected_ids:
                if sid not in state.pool:
                    failures.append(f"{approach} annotate-twice {sid}")
                    break
                state.annotate(sid, ds)
                if len(state.labeled) + len(state.pool) != len(tr):
                    failures.append(f"{approach} conservation")
                    break
    data = tmp_path / "d.csv"
    cli.main(["generate", "--profile", "blobs", "--out", str(data)])
    outs = []
    for jobs in ("1", "3"):
        out = tmp_path / f"j{jobs}"
        cli.main(["run", "--data", str(data), "--approach", "active,hybrid", "--ssl-method", "spread_knn",
                  "--warm-start", "4", "--final", "12", "--grid-step", "4", "--epochs", "20",
                  "--repeats", "2", "--jobs", jobs, "--out-dir", str(out)])
        outs.append({p.name: p.read_bytes() for p in out.iterdir()})
    if not outs[0] or outs[0] != outs[1]:
        failures.append("jobs determinism")
    ok = not failures
    report(9, ok, "all invariants hold" if ok else ", ".join(failures[:5]))
    assert ok
