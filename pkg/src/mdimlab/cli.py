"""Experiment orchestration CLI.

Subcommands: estimate, scale-entropy, stable-set, dispersion, cp, check,
repro, oracle. Each run writes a CSV of records and a JSON report into the
output directory (plus figures unless --no-plot), every row stamped with
the resolved config hash and seed. Exit codes: 0 ok, 2 validation error,
3 computational error (budget / horizon / instance size), 4 hard-invariant
violation. Partial results are flushed before a nonzero exit.

``MDIMLAB_THREADS`` caps worker parallelism (0 = auto). The current
kernels run sequentially (deterministic reduction is part of their
contract), so any cap is honored trivially; the variable is validated and
recorded in the report.
"""
from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import repro as repro_mod
from .config import ResolvedConfig, parse_ladder, parse_point, parse_potential, resolve_config
from .covering import greedy_maximal_separated
from .cp import critical_exponent
from .errors import (
    ComputationError,
    InvariantViolation,
    MdimlabError,
    ValidationError,
)
from .estimators import (
    check_theorem,
    cp_mdim,
    mdim_estimate,
    preimage_mdim,
    sample_base_points,
    tail_mdim,
)
from .oracles import (
    oracle_max_weighted_separated,
    oracle_min_weighted_spanning,
    oracle_separated_number,
    oracle_spanning_number,
)
from .pressure import pressure_at_scale
from .reporting import Record, discrepancy_report_dict, mdim_report_dict, mdim_report_records, write_csv, write_json
from .stable_sets import (
    block_stable_sample,
    dispersion_series,
    preimage_neighborhood_sample,
    preimage_stable_sample,
    truncated_stable_sample,
)
from .systems import FiniteSystem, SymbolicShift, sample_cloud
from .util import parse_rational


class OutputSink:
    """Accumulates records/reports and flushes them even on failure."""

    def __init__(self, outdir: Path, fmt: str, plot: bool, name: str):
        self.outdir = outdir
        self.fmt = fmt
        self.plot = plot
        self.name = name
        self.records = []
        self.payload = {}
        self.figures = []

    def flush(self) -> None:
        self.outdir.mkdir(parents=True, exist_ok=True)
        if self.fmt in ("csv", "both"):
            write_csv(self.records, self.outdir / f"{self.name}.csv")
        if self.fmt in ("json", "both"):
            write_json(self.payload, self.outdir / f"{self.name}.json")
        if self.plot and self.figures:
            figdir = self.outdir / "figures"
            figdir.mkdir(parents=True, exist_ok=True)
            from . import plots

            for kind, obj, filename, extra in self.figures:
                target = figdir / filename
                if kind == "mdim":
                    plots.plot_mdim_report(obj, target, scale_name=extra or "scale")
                elif kind == "discrepancy":
                    plots.plot_discrepancy(obj, target)
                elif kind == "series":
                    plots.plot_series(obj, target, title=extra or self.name)


def _threads_cap() -> int:
    raw = os.environ.get("MDIMLAB_THREADS", "0")
    try:
        cap = int(raw)
    except ValueError:
        raise ValidationError(f"MDIMLAB_THREADS must be an integer, got {raw!r}")
    if cap < 0:
        raise ValidationError("MDIMLAB_THREADS must be >= 0")
    return cap


def _cloud_from_config(cfg: ResolvedConfig, required: bool = True):
    spec = cfg.get("cloud")
    if spec is None:
        if isinstance(cfg.system, FiniteSystem):
            size = cfg.system.point_count
            return sample_cloud(cfg.system, "grid", size, cfg.seed)
        if required:
            raise ValidationError("config needs a 'cloud' entry for this system")
        return None
    return sample_cloud(
        cfg.system,
        spec.get("scheme", "uniform_random"),
        int(spec.get("size", 64)),
        int(spec.get("seed", cfg.seed)),
        label=spec.get("label", "Z"),
        word_length=spec.get("word_length"),
    )


def _base_points(cfg: ResolvedConfig):
    spec = cfg.get("base_points", {})
    if isinstance(spec, list):
        return tuple(parse_point(cfg.system, p) for p in spec)
    return sample_base_points(
        cfg.system,
        int(spec.get("count", 8)),
        int(spec.get("seed", cfg.seed)),
        word_length=spec.get("word_length"),
    )


def _common(cfg: ResolvedConfig):
    return cfg.system.describe(), cfg.seed, cfg.hash


# -- subcommand handlers ------------------------------------------------------

def run_estimate(cfg: ResolvedConfig, sink: OutputSink) -> None:
    system = cfg.system
    f = parse_potential(system, cfg.get("potential"))
    ladder = parse_ladder(cfg.require("epsilon_ladder"))
    cloud = _cloud_from_config(cfg, required=not isinstance(system, SymbolicShift))
    report = mdim_estimate(system, cloud, f, ladder,
                           window=tuple(cfg.get("window")),
                           mode=cfg.get("mode", "auto"),
                           exact_limit=cfg.get("exact_limit"))
    desc, seed, digest = _common(cfg)
    subset = cloud.label if cloud is not None else "X"
    sink.records.extend(mdim_report_records(report, desc, subset, seed, digest))
    sink.payload = mdim_report_dict(report, seed, digest)
    sink.figures.append(("mdim", report, "estimate.png", "epsilon"))


def run_scale_entropy(cfg: ResolvedConfig, sink: OutputSink) -> None:
    system = cfg.system
    eps = parse_rational(cfg.require("epsilon"))
    window = tuple(cfg.get("window"))
    desc, seed, digest = _common(cfg)
    mode = cfg.get("mode", "auto")
    if mode == "auto":
        mode = "construction" if isinstance(system, SymbolicShift) else "exact"
    if mode == "construction":
        cells = dispersion_series(system, (), eps, eps, window, "whole_space",
                                  mode="construction")
        series = [("separated lower", [(c.n, c.separated.value) for c in cells]),
                  ("spanning upper", [(c.n, c.spanning.value) for c in cells])]
        from .pressure import growth_rate

        lo = growth_rate([(c.n, c.separated) for c in cells])
        hi = growth_rate([(c.n, c.spanning) for c in cells])
        rates = {"lower": lo.value, "upper": hi.value,
                 "bound_types": [lo.bound_type, hi.bound_type]}
        for c in cells:
            sink.records.append(Record(system=desc, quantity="scale_entropy.separated",
                                       subset="X", n=c.n, epsilon=eps,
                                       bound_type=c.separated.bound_type,
                                       method=c.separated.method,
                                       value=c.separated.value, seed=seed,
                                       config_hash=digest))
            sink.records.append(Record(system=desc, quantity="scale_entropy.spanning",
                                       subset="X", n=c.n, epsilon=eps,
                                       bound_type=c.spanning.bound_type,
                                       method=c.spanning.method,
                                       value=c.spanning.value, seed=seed,
                                       config_hash=digest))
        sink.figures.append(("series", series, "scale_entropy.png", "scale entropy counts"))
    else:
        cloud = _cloud_from_config(cfg)
        pair = pressure_at_scale(cloud, parse_potential(system, cfg.get("potential")),
                                 eps, window=window, mode=mode,
                                 exact_limit=cfg.get("exact_limit"))
        rates = {"lower": pair.lower.value, "upper": pair.upper.value,
                 "bound_types": [pair.lower.bound_type, pair.upper.bound_type]}
        for n, cb in pair.spanning_series:
            sink.records.append(Record(system=desc, quantity="scale_entropy.spanning",
                                       subset=cloud.label, n=n, epsilon=eps,
                                       bound_type=cb.bound_type, method=cb.method,
                                       value=cb.value, seed=seed, config_hash=digest))
        for n, cb in pair.separated_series:
            sink.records.append(Record(system=desc, quantity="scale_entropy.separated",
                                       subset=cloud.label, n=n, epsilon=eps,
                                       bound_type=cb.bound_type, method=cb.method,
                                       value=cb.value, seed=seed, config_hash=digest))
    sink.payload = {"quantity": "scale_entropy", "epsilon": str(eps),
                    "window": list(window), "rates": rates,
                    "seed": seed, "config_hash": digest}


def run_stable_set(cfg: ResolvedConfig, sink: OutputSink) -> None:
    system = cfg.system
    eps = parse_rational(cfg.require("epsilon"))
    x = parse_point(system, cfg.require("base_point"))
    variant = cfg.get("variant", "block")
    cloud = _cloud_from_config(cfg)
    desc, seed, digest = _common(cfg)
    if variant == "block":
        m, n_w = tuple(cfg.get("block_window"))
        family = block_stable_sample(system, cloud, x, eps, m, n_w)
    elif variant == "truncated":
        family = truncated_stable_sample(system, cloud, x, eps, int(cfg.get("n_trunc")))
    elif variant == "preimage_of_stable":
        family = preimage_stable_sample(system, x, eps, int(cfg.require("n")),
                                        int(cfg.get("n_trunc")), cloud=cloud,
                                        budget=int(cfg.get("budget")))
    elif variant == "preimage_of_ball":
        family = preimage_neighborhood_sample(system, x, eps, int(cfg.require("n")),
                                              cloud=cloud, budget=int(cfg.get("budget")))
    else:
        raise ValidationError(f"unknown stable-set variant {variant!r}")
    size = family.size()
    sink.records.append(Record(system=desc, quantity=f"stable_family.{variant}.size",
                               subset=family.realization.label, epsilon=eps,
                               n=cfg.get("n"), bound_type="exact", method="brute_force",
                               value=size, seed=seed, config_hash=digest))
    payload = {"variant": list(family.variant), "size": size,
               "epsilon": str(eps), "caveats": list(family.caveats),
               "seed": seed, "config_hash": digest}
    if family.description is not None:
        payload["window"] = list(family.description.window)
        payload["coordinate_bands"] = [
            [j, str(b) if b is not None else "free"]
            for j, b in family.description.coordinate_bands(8)
        ]
    sink.payload = payload


def run_dispersion(cfg: ResolvedConfig, sink: OutputSink) -> None:
    system = cfg.system
    eps = parse_rational(cfg.require("epsilon"))
    dlt = parse_rational(cfg.require("delta"))
    variant = cfg.get("variant", "tail_ball")
    window = tuple(cfg.get("window"))
    x = parse_point(system, cfg.require("base_point"))
    cloud = _cloud_from_config(cfg, required=not isinstance(system, SymbolicShift))
    cells = dispersion_series(system, x, eps, dlt, window, variant,
                              mode=cfg.get("mode", "auto"), cloud=cloud,
                              f=parse_potential(system, cfg.get("potential")),
                              n_trunc=int(cfg.get("n_trunc")),
                              block_window=tuple(cfg.get("block_window")),
                              budget=int(cfg.get("budget")),
                              exact_limit=cfg.get("exact_limit"))
    desc, seed, digest = _common(cfg)
    for c in cells:
        sink.records.append(Record(system=desc, quantity=f"dispersion.{variant}.spanning",
                                   subset=str(x), n=c.n, epsilon=eps, delta=dlt,
                                   bound_type=c.spanning.bound_type,
                                   method=c.spanning.method, value=c.spanning.value,
                                   seed=seed, config_hash=digest))
        sink.records.append(Record(system=desc, quantity=f"dispersion.{variant}.separated",
                                   subset=str(x), n=c.n, epsilon=eps, delta=dlt,
                                   bound_type=c.separated.bound_type,
                                   method=c.separated.method, value=c.separated.value,
                                   seed=seed, config_hash=digest))
    from .pressure import growth_rate

    lo = growth_rate([(c.n, c.separated) for c in cells])
    hi = growth_rate([(c.n, c.spanning) for c in cells])
    sink.payload = {"variant": variant, "epsilon": str(eps), "delta": str(dlt),
                    "window": list(window),
                    "growth_rate_lower": lo.value, "growth_rate_upper": hi.value,
                    "family_sizes": [c.family_size for c in cells],
                    "seed": seed, "config_hash": digest}
    series = [("separated", [(c.n, c.separated.value) for c in cells]),
              ("spanning", [(c.n, c.spanning.value) for c in cells])]
    sink.figures.append(("series", series, "dispersion.png",
                         f"{variant} counts at delta={dlt}"))


def run_cp(cfg: ResolvedConfig, sink: OutputSink) -> None:
    system = cfg.system
    cloud = _cloud_from_config(cfg)
    f = parse_potential(system, cfg.get("potential"))
    which = cfg.get("which", "bowen")
    desc, seed, digest = _common(cfg)
    s_bracket = tuple(float(parse_rational(v)) for v in cfg.get("s_bracket"))
    n_grid = tuple(int(v) for v in cfg.get("n_grid"))
    if cfg.get("epsilon_ladder") is not None:
        ladder = parse_ladder(cfg.get("epsilon_ladder"))
        report = cp_mdim(system, cloud, f, ladder, which, s_bracket=s_bracket,
                         n_grid=n_grid, mode=cfg.get("mode", "exact")
                         if cfg.get("mode") != "auto" else "exact",
                         exact_limit=cfg.get("exact_limit"))
        sink.records.extend(mdim_report_records(report, desc, cloud.label, seed, digest))
        sink.payload = mdim_report_dict(report, seed, digest)
        sink.figures.append(("mdim", report, "cp.png", "epsilon"))
        return
    eps = parse_rational(cfg.require("epsilon"))
    ce = critical_exponent(cloud, which, eps, f, s_bracket, n_grid,
                           mode="exact" if cfg.get("mode") in ("auto", "exact") else "greedy",
                           exact_limit=cfg.get("exact_limit"))
    sink.records.append(Record(system=desc, quantity=f"cp_{which}.critical_exponent",
                               subset=cloud.label, epsilon=eps, s=ce.value,
                               N=min(n_grid), bound_type="exact", method="brute_force",
                               value=ce.value, seed=seed, config_hash=digest))
    sink.payload = {"which": which, "epsilon": str(eps), "value": ce.value,
                    "bracket": list(ce.bracket), "n_grid": list(ce.n_grid),
                    "classifications": [[s, label] for s, label in ce.classifications],
                    "seed": seed, "config_hash": digest}


def run_check(cfg: ResolvedConfig, sink: OutputSink) -> None:
    system = cfg.system
    theorem = str(cfg.require("theorem"))
    if not theorem.startswith(("T", "C")):
        theorem = "T" + theorem
    cloud = _cloud_from_config(cfg, required=not isinstance(system, SymbolicShift))
    params = {
        "epsilon": cfg.require("epsilon"),
        "delta_ladder": parse_ladder(cfg.require("delta_ladder")),
        "window": tuple(cfg.get("window")),
        "block_window": tuple(cfg.get("block_window")),
        "n_trunc": int(cfg.get("n_trunc")),
        "tolerance": float(cfg.get("tolerance")),
        "mode": cfg.get("mode", "auto"),
        "f": parse_potential(system, cfg.get("potential")),
        "cloud": cloud,
        "exact_limit": cfg.get("exact_limit"),
        "base_points": _base_points(cfg),
        "hard": bool(cfg.get("hard", True)),
        "hard_n_max": int(cfg.get("hard_n_max", 3)),
        "n_grid": tuple(cfg.get("n_grid")),
        "s_bracket": tuple(float(parse_rational(v)) for v in cfg.get("s_bracket")),
    }
    if cfg.get("hard_delta_grid") is not None:
        params["hard_delta_grid"] = [parse_rational(v) for v in cfg.get("hard_delta_grid")]
    report = check_theorem(system, theorem, params)
    desc, seed, digest = _common(cfg)
    sink.records.extend(mdim_report_records(
        report.left, desc, "X", seed, digest, scale_column="delta",
        fixed_epsilon=parse_rational(cfg.require("epsilon"))))
    for rep in report.right:
        sink.records.extend(mdim_report_records(
            rep, desc, rep.quantity, seed, digest, scale_column="delta",
            fixed_epsilon=parse_rational(cfg.require("epsilon"))))
    sink.payload = discrepancy_report_dict(report, seed, digest)
    sink.figures.append(("discrepancy", report, "check.png", None))


def run_repro(args, sink: OutputSink, seed: int) -> None:
    family_name = args.family.lower()
    n = args.n
    eps = parse_rational(args.epsilon) if args.epsilon else None
    dlt = parse_rational(args.delta) if args.delta else None
    digest_source = {"subcommand": "repro", "family": family_name, "n": n,
                     "epsilon": str(eps), "delta": str(dlt), "seed": seed,
                     "cloud_size": args.cloud_size}
    from .config import config_hash

    digest = config_hash(digest_source)
    desc = "rational_shift"
    payload = {"family": family_name.upper(), "n": n, "seed": seed,
               "config_hash": digest, "checks": []}
    if family_name == "e1":
        if eps is None:
            raise ValidationError("repro e1 needs --epsilon")
        fam = repro_mod.construct_E1(n, eps)
        import random as _random

        rng = _random.Random(seed)
        cloud = tuple(repro_mod.random_word(rng, repro_mod.e1_prefix_length(n, eps) + 2)
                      for _ in range(args.cloud_size))
        rep = repro_mod.verify_family(fam, "spanning", cloud=cloud)
        payload["cardinality"] = fam.cardinality_formula_value
        payload["checks"].append({"property": "spanning", "passed": rep.passed,
                                  "checked": rep.checked})
        sink.records.append(Record(system=desc, quantity="repro.e1.cardinality",
                                   n=n, epsilon=eps, bound_type="exact",
                                   method="construction",
                                   value=fam.cardinality_formula_value,
                                   seed=seed, config_hash=digest))
        sink.records.append(Record(system=desc, quantity="repro.e1.spanning_pass",
                                   n=n, epsilon=eps, bound_type="exact",
                                   method="brute_force", value=1.0 if rep.passed else 0.0,
                                   seed=seed, config_hash=digest))
        ok = rep.passed
    elif family_name in ("e2", "e3"):
        if dlt is None:
            raise ValidationError(f"repro {family_name} needs --delta")
        base = repro_mod.tail_word([parse_rational(v) for v in (args.base or "1/4").split(",")])
        if family_name == "e2":
            if eps is None:
                raise ValidationError("repro e2 needs --epsilon")
            fam = repro_mod.construct_E2(base, n, eps, dlt)
        else:
            fam = repro_mod.construct_E3(base, n, dlt)
        sep = repro_mod.verify_family(fam, "separated", seed=seed)
        mem = repro_mod.verify_family(fam, "membership", seed=seed)
        payload["cardinality"] = fam.cardinality_formula_value
        payload["checks"].append({"property": "separated", "passed": sep.passed,
                                  "checked": sep.checked,
                                  "coverage": sep.coverage_fraction})
        payload["checks"].append({"property": "membership", "passed": mem.passed,
                                  "checked": mem.checked})
        sink.records.append(Record(system=desc, quantity=f"repro.{family_name}.cardinality",
                                   n=n, epsilon=eps, delta=dlt, bound_type="exact",
                                   method="construction",
                                   value=fam.cardinality_formula_value,
                                   seed=seed, config_hash=digest))
        sink.records.append(Record(system=desc, quantity=f"repro.{family_name}.separated_pass",
                                   n=n, epsilon=eps, delta=dlt, bound_type="exact",
                                   method="brute_force", value=1.0 if sep.passed else 0.0,
                                   seed=seed, config_hash=digest))
        ok = sep.passed and mem.passed
    else:
        raise ValidationError(f"unknown repro family {args.family!r}")
    payload["passed"] = ok
    sink.payload = payload
    if not ok:
        raise InvariantViolation(f"repro verification failed for {family_name}")


def run_oracle(cfg: ResolvedConfig, sink: OutputSink) -> None:
    system = cfg.system
    cloud = _cloud_from_config(cfg)
    eps = parse_rational(cfg.require("epsilon"))
    n = int(cfg.require("n"))
    f = parse_potential(system, cfg.get("potential"))
    desc, seed, digest = _common(cfg)
    limit = cfg.get("exact_limit")
    results = {
        "spanning_number": oracle_spanning_number(cloud, n, eps, limit=limit),
        "separated_number": oracle_separated_number(cloud, n, eps, limit=limit),
        "min_weighted_spanning": oracle_min_weighted_spanning(cloud, n, eps, f, limit=limit),
        "max_weighted_separated": oracle_max_weighted_separated(cloud, n, eps, f, limit=limit),
    }
    for name, value in results.items():
        sink.records.append(Record(system=desc, quantity=f"oracle.{name}",
                                   subset=cloud.label, n=n, epsilon=eps,
                                   bound_type="exact", method="brute_force",
                                   value=float(value), seed=seed, config_hash=digest))
    greedy_sep, greedy_span = greedy_maximal_separated(cloud, n, eps)
    results["greedy_maximal_separated"] = greedy_sep.value
    sink.payload = {"oracle": {k: float(v) for k, v in results.items()},
                    "n": n, "epsilon": str(eps), "seed": seed, "config_hash": digest}


_HANDLERS = {
    "estimate": run_estimate,
    "scale-entropy": run_scale_entropy,
    "stable-set": run_stable_set,
    "dispersion": run_dispersion,
    "cp": run_cp,
    "check": run_check,
    "oracle": run_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mdim-lab",
        description="Finite-scale laboratory for metric mean dimension quantities.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config path")
        p.add_argument("--seed", type=int, default=None, help="override config seed")
        p.add_argument("--exact-limit", type=int, default=None,
                       help="override the exact-kernel instance cap")
        p.add_argument("--budget", type=int, default=None,
                       help="override the preimage enumeration budget")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--format", choices=("csv", "json", "both"), default="both")
        p.add_argument("--no-plot", dest="plot", action="store_false",
                       help="skip figure rendering")

    for name in ("estimate", "scale-entropy", "stable-set", "dispersion", "cp", "oracle"):
        p = sub.add_parser(name)
        common(p)
    p = sub.add_parser("check")
    common(p)
    p.add_argument("--theorem", default=None,
                   help="theorem id (T1.1, T1.2, T1.3, T4.1, C4.3-fixed-metric)")
    p = sub.add_parser("repro")
    common(p)
    p.add_argument("family", choices=("e1", "e2", "e3"))
    p.add_argument("--epsilon", default=None)
    p.add_argument("--delta", default=None)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--base", default=None,
                   help="comma-separated rational coordinates of the base point")
    p.add_argument("--cloud-size", type=int, default=1000,
                   help="random cloud size for spanning verification")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    name = args.subcommand
    sink = OutputSink(Path(args.out), args.format, args.plot, name.replace("-", "_"))
    try:
        _threads_cap()
        if name == "repro":
            run_repro(args, sink, args.seed if args.seed is not None else 0)
        else:
            if args.config is None:
                raise ValidationError(f"subcommand {name!r} requires --config")
            overrides = {"seed": args.seed, "exact_limit": args.exact_limit,
                         "budget": args.budget}
            if name == "check" and args.theorem is not None:
                overrides["theorem"] = args.theorem
            cfg = resolve_config(args.config, overrides)
            _HANDLERS[name](cfg, sink)
    except ValidationError as exc:
        sink.flush()
        print(f"error (validation): {exc}", file=sys.stderr)
        return 2
    except ComputationError as exc:
        sink.flush()
        print(f"error (computation): {exc}", file=sys.stderr)
        return 3
    except InvariantViolation as exc:
        sink.flush()
        print(f"error (invariant violation): {exc}", file=sys.stderr)
        return 4
    except MdimlabError as exc:
        sink.flush()
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sink.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
