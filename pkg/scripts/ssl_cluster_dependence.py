"""Passive vs label-spreading SSL on a well-clustered and a poorly-clustered profile."""

import argparse

from budgetlearn.core import RngStream
from budgetlearn.datagen import generate, profile
from budgetlearn.diagnostics import kmeans_diagnose
from budgetlearn.harness import emit_results, run_cv_experiment
from budgetlearn.orchestrator import ApproachConfig
from budgetlearn.ssl_methods import METHODS, MethodConfig

SETTINGS = {
    "well": dict(peak_shift=4.0, noise_std=0.3),
    "poor": dict(),
}


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--methods", default="spread_rbf,spread_knn")
    p.add_argument("--sigma", type=float, default=4.0, help="RBF width in standardized feature units")
    p.add_argument("--k", type=int, default=7)
    p.add_argument("--warm-start", type=int, default=8)
    p.add_argument("--final", type=int, default=60)
    p.add_argument("--grid-step", type=int, default=4)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--seed", type=int, default=2)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-dir", default="results/ssl_cluster_dependence")
    args = p.parse_args()

    kw = dict(warm_start_count=args.warm_start, final_count=args.final, eval_grid_step=args.grid_step)
    for tag, overrides in SETTINGS.items():
        ds = generate(profile("pathogen-like", **overrides))
        agree = kmeans_diagnose(ds, ds.num_classes, RngStream(args.seed, ("kmeans",))).agreement
        configs = [ApproachConfig("passive", **kw)]
        for name in args.methods.split(","):
            if name not in METHODS:
                raise SystemExit(f"unknown method {name}")
            configs.append(ApproachConfig("ssl", ssl_method=MethodConfig(name, sigma=args.sigma, k=args.k), **kw))
        curves = [run_cv_experiment(ds, c, args.repeats, args.seed, jobs=args.jobs) for c in configs]
        print(f"\n{tag}-clustered: kmeans agreement {agree:.3f}")
        print(f"{'labels':>6s} " + " ".join(f"{c.name:>16s}" for c in curves))
        for j, n in enumerate(curves[0].labels):
            print(f"{n:6d} " + " ".join(f"{c.mean[j]:9.3f}+-{c.std[j]:.3f}" for c in curves))
        emit_results(curves, None, {}, f"{args.out_dir}/{tag}")


if __name__ == "__main__":
    main()
