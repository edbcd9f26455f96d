"""Passive, entropy AL, spreading SSL and the hybrid on the well-clustered profile."""

import argparse

from budgetlearn.datagen import generate, profile
from budgetlearn.harness import emit_results, run_cv_experiment
from budgetlearn.orchestrator import ApproachConfig
from budgetlearn.ssl_methods import MethodConfig


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--strategy", default="entropy")
    p.add_argument("--method", default="spread_rbf")
    p.add_argument("--sigma", type=float, default=4.0)
    p.add_argument("--warm-start", type=int, default=8)
    p.add_argument("--final", type=int, default=60)
    p.add_argument("--grid-step", type=int, default=4)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--seed", type=int, default=3)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-dir", default="results/hybrid_savings")
    args = p.parse_args()

    ds = generate(profile("pathogen-like", peak_shift=4.0, noise_std=0.3))
    method = MethodConfig(args.method, sigma=args.sigma)
    kw = dict(warm_start_count=args.warm_start, final_count=args.final, eval_grid_step=args.grid_step)
    configs = [ApproachConfig("passive", **kw), ApproachConfig("active", args.strategy, **kw),
               ApproachConfig("ssl", ssl_method=method, **kw),
               ApproachConfig("hybrid", args.strategy, method, **kw)]
    curves = [run_cv_experiment(ds, c, args.repeats, args.seed, jobs=args.jobs) for c in configs]
    target = 0.95 * curves[0].mean[-1]
    print(f"{'labels':>6s} " + " ".join(f"{c.name:>20s}" for c in curves))
    for j, n in enumerate(curves[0].labels):
        print(f"{n:6d} " + " ".join(f"{c.mean[j]:13.3f}+-{c.std[j]:.3f}" for c in curves))
    lp = curves[0].labels_to_reach(target)
    for c in curves[1:]:
        got = c.labels_to_reach(target)
        saving = f"{(lp - got) / lp:.0%} fewer" if got is not None else "never"
        print(f"{c.name}: {got} labels to reach {target:.3f} vs passive {lp} ({saving})")
    emit_results(curves, None, {}, args.out_dir)


if __name__ == "__main__":
    main()
