"""Learning curves of every AL strategy against passive learning on a synthetic profile."""

import argparse
import time

from budgetlearn.core import RngStream
from budgetlearn.datagen import generate, profile
from budgetlearn.diagnostics import kmeans_diagnose, pca_project
from budgetlearn.harness import emit_results, run_cv_experiment
from budgetlearn.orchestrator import ApproachConfig


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--profile", default="plasma-like")
    p.add_argument("--gen-seed", type=int, default=1)
    p.add_argument("--strategies", default="least_confident,entropy")
    p.add_argument("--warm-start", type=int, default=40)
    p.add_argument("--final", type=int, default=90)
    p.add_argument("--grid-step", type=int, default=5)
    p.add_argument("--retrain-budget", type=int, default=20)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-dir", default="results/active_vs_passive")
    args = p.parse_args()

    ds = generate(profile(args.profile, seed=args.gen_seed))
    kw = dict(warm_start_count=args.warm_start, final_count=args.final, eval_grid_step=args.grid_step,
              retrain_budget=args.retrain_budget)
    configs = [ApproachConfig("passive", **kw)]
    configs += [ApproachConfig("active", s, **kw) for s in args.strategies.split(",")]
    curves = []
    for cfg in configs:
        start = time.perf_counter()
        curves.append(run_cv_experiment(ds, cfg, args.repeats, args.seed, jobs=args.jobs, keep_traces=True))
        print(f"{cfg.name:18s} done in {time.perf_counter() - start:.0f}s")

    target = 0.95 * curves[0].mean[-1]
    print(f"\n{'labels':>6s} " + " ".join(f"{c.name:>16s}" for c in curves))
    for j, n in enumerate(curves[0].labels):
        print(f"{n:6d} " + " ".join(f"{c.mean[j]:9.3f}+-{c.std[j]:.3f}" for c in curves))
    print(f"\nlabels to reach {target:.3f}: " +
          ", ".join(f"{c.name}={c.labels_to_reach(target)}" for c in curves))

    pca = pca_project(ds)
    km = kmeans_diagnose(ds, ds.num_classes, RngStream(args.seed, ("kmeans",)))
    traces = {f"{c.name}_r0_f0": c.traces[(0, 0)] for c in curves}
    emit_results(curves, (km, pca), traces, args.out_dir, ds)


if __name__ == "__main__":
    main()
