"""Command-line entry point: ``generate``, ``run`` and ``diagnose``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

import tomli

from .core import ConfigurationError, ContractError, ParseError, RngStream, load_csv, save_csv
from .datagen import PROFILES, generate, profile
from .diagnostics import kmeans_diagnose, pca_project
from .harness import emit_results, fold_training_sizes, run_cv_experiment, write_pca_coords
from .model import Hyper
from .orchestrator import APPROACHES, ApproachConfig
from .ssl_methods import MethodConfig

SEED_ENV = "BUDGETLEARN_SEED"


@dataclass
class CliConfig:
    """Every setting of a ``run``; TOML keys use these field names."""

    data: Optional[str] = None
    profile: Optional[str] = None
    gen_seed: int = 0
    approaches: str = "passive"
    strategy: str = "entropy"
    ssl_method: str = "spread_rbf"
    warm_start_count: int = 40
    final_count: int = 90
    eval_grid_step: int = 5
    retrain_budget: int = 20
    include_candidate: bool = False
    learning_rate: float = 0.1
    l2: float = 1e-3
    epochs: int = 200
    sigma: float = 0.1
    k: int = 7
    alpha: float = 0.2
    tol: float = 1e-6
    max_iter: int = 1000
    pseudo_weight: float = 1.0
    repeats: int = 10
    seed: Optional[int] = None
    out_dir: str = "results"
    jobs: int = 1

    @classmethod
    def from_mapping(cls, doc: dict) -> "CliConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigurationError(f"unknown config keys: {', '.join(unknown)}")
        cfg = cls()
        for key, value in doc.items():
            setattr(cfg, key, _coerce(cls, key, value))
        return cfg

    def approach_list(self) -> list[str]:
        names = [a.strip() for a in self.approaches.split(",") if a.strip()]
        bad = [a for a in names if a not in APPROACHES]
        if bad or not names:
            raise ConfigurationError(f"unknown approaches {bad}; expected some of {APPROACHES}")
        return names

    def hyper(self) -> Hyper:
        return Hyper(self.learning_rate, self.l2, self.epochs)

    def method(self) -> MethodConfig:
        return MethodConfig(self.ssl_method, self.sigma, self.k, self.alpha, self.tol, self.max_iter,
                            self.pseudo_weight)

    def approach_config(self, approach: str) -> ApproachConfig:
        return ApproachConfig(
            approach=approach,
            al_strategy=self.strategy if approach in ("active", "hybrid") else None,
            ssl_method=self.method() if approach in ("ssl", "hybrid") else None,
            warm_start_count=self.warm_start_count, final_count=self.final_count,
            eval_grid_step=self.eval_grid_step, retrain_budget=self.retrain_budget,
            include_candidate=self.include_candidate)


def _coerce(cls, key, value):
    default = next(f for f in fields(cls) if f.name == key).default
    if value is None or default is None:
        return value
    kind = type(default)
    try:
        if kind is bool:
            if isinstance(value, str):
                return value.lower() in ("1", "true", "yes")
            return bool(value)
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"config key {key!r}: cannot interpret {value!r} as {kind.__name__}") from None


def resolve_seed(explicit: Optional[int]) -> int:
    if explicit is not None:
        return int(explicit)
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigurationError(f"{SEED_ENV}={env!r} is not an integer") from None
    return 0


def _load_dataset(data: Optional[str], profile_name: Optional[str], gen_seed: int):
    if data:
        return load_csv(data)
    if profile_name:
        return generate(profile(profile_name, seed=gen_seed))
    raise ConfigurationError("set either a dataset path (data) or a generator profile (profile)")


def cmd_generate(args) -> int:
    spec = profile(args.profile, seed=args.seed, **{k: v for k, v in (
        ("peak_shift", args.peak_shift), ("noise_std", args.noise_std)) if v is not None})
    ds = generate(spec)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_csv(ds, out)
    print(f"{out}: {ds.num_samples} rows, {ds.dim} feature columns, {ds.num_classes} classes")
    return 0


_RUN_FLAGS = ("data", "profile", "gen_seed", "approaches", "strategy", "ssl_method",
              "warm_start_count", "final_count", "eval_grid_step", "retrain_budget", "learning_rate",
              "l2", "epochs", "sigma", "k", "alpha", "tol", "max_iter", "pseudo_weight", "repeats",
              "seed", "out_dir", "jobs")


def build_run_config(args) -> CliConfig:
    doc = {}
    if args.config:
        with open(args.config, "rb") as fh:
            doc = tomli.load(fh)
    cfg = CliConfig.from_mapping(doc)
    for key in _RUN_FLAGS:
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, _coerce(CliConfig, key, value))
    cfg.seed = resolve_seed(cfg.seed)
    return cfg


def cmd_run(args) -> int:
    cfg = build_run_config(args)
    approaches = cfg.approach_list()
    configs = [cfg.approach_config(a) for a in approaches]
    hyper = cfg.hyper()
    if args.dry_run:
        print(json.dumps(dataclasses.asdict(cfg), indent=2, sort_keys=True))
        return 0
    ds = _load_dataset(cfg.data, cfg.profile, cfg.gen_seed)
    for c in configs:
        for r in range(cfg.repeats):
            c.validate(ds.num_classes, min(fold_training_sizes(ds, cfg.seed, r)))
    curves = []
    for c in configs:
        curve = run_cv_experiment(ds, c, cfg.repeats, cfg.seed, hyper, jobs=cfg.jobs, keep_traces=True)
        curves.append(curve)
        last = curve.points[-1]
        print(f"{c.approach:8s} {c.name:28s} final_acc={last.mean_acc:.4f}+-{last.std_acc:.4f} "
              f"labels={last.num_labels} train={last.train_count:.1f} infer={last.infer_count:.1f}")
    pca = pca_project(ds)
    km = kmeans_diagnose(ds, ds.num_classes, RngStream(cfg.seed, ("kmeans",)))
    traces = {f"{c.approach}_{c.name}_r0_f0": curve.traces[(0, 0)] for c, curve in zip(configs, curves)}
    emit_results(curves, (km, pca), traces, cfg.out_dir, ds)
    print(f"results written to {cfg.out_dir}")
    return 0


def cmd_diagnose(args) -> int:
    ds = _load_dataset(args.data, args.profile, args.gen_seed)
    k = args.k if args.k is not None else ds.num_classes
    seed = resolve_seed(args.seed)
    km = kmeans_diagnose(ds, k, RngStream(seed, ("kmeans",)))
    pca = pca_project(ds)
    written = emit_results([], (km, pca), {}, args.out_dir)
    written.append(write_pca_coords(pca, ds, Path(args.out_dir) / "pca_coords.csv"))
    print(f"kmeans k={k} agreement={km.agreement:.4f} "
          f"pca explained={pca.explained_variance[0]:.4f},{pca.explained_variance[1]:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="budgetlearn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic dataset CSV")
    g.add_argument("--profile", choices=sorted(PROFILES), required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--peak-shift", type=float)
    g.add_argument("--noise-std", type=float)
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("run", help="run cross-validated learning-curve experiments")
    r.add_argument("--config", help="TOML file with CliConfig keys")
    r.add_argument("--data")
    r.add_argument("--profile", choices=sorted(PROFILES))
    r.add_argument("--gen-seed", dest="gen_seed", type=int)
    r.add_argument("--approach", dest="approaches", help="comma-separated: " + ",".join(APPROACHES))
    r.add_argument("--strategy")
    r.add_argument("--ssl-method", dest="ssl_method")
    r.add_argument("--warm-start", dest="warm_start_count", type=int)
    r.add_argument("--final", dest="final_count", type=int)
    r.add_argument("--grid-step", dest="eval_grid_step", type=int)
    r.add_argument("--retrain-budget", dest="retrain_budget", type=int)
    r.add_argument("--learning-rate", dest="learning_rate", type=float)
    r.add_argument("--l2", type=float)
    r.add_argument("--epochs", type=int)
    r.add_argument("--sigma", type=float)
    r.add_argument("--k", type=int)
    r.add_argument("--alpha", type=float)
    r.add_argument("--tol", type=float)
    r.add_argument("--max-iter", dest="max_iter", type=int)
    r.add_argument("--pseudo-weight", dest="pseudo_weight", type=float)
    r.add_argument("--repeats", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--out-dir", dest="out_dir")
    r.add_argument("--jobs", type=int)
    r.add_argument("--dry-run", action="store_true", help="print the resolved config and exit")
    r.set_defaults(func=cmd_run)

    d = sub.add_parser("diagnose", help="k-means agreement and PCA projection")
    d.add_argument("--data")
    d.add_argument("--profile", choices=sorted(PROFILES))
    d.add_argument("--gen-seed", dest="gen_seed", type=int, default=0)
    d.add_argument("--k", type=int)
    d.add_argument("--seed", type=int)
    d.add_argument("--out-dir", dest="out_dir", default="diagnostics")
    d.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, ContractError, ParseError, OSError, tomli.TOMLDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
