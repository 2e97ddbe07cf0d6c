"""Command-line front end: ``dalis run|sweep|trace``.

All output is CSV with fixed headers. Floats are written with ``repr`` so
they parse back to the identical value; missing values are empty fields.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from dataclasses import replace
from typing import List, Optional, Sequence

from .config import SweepSpec, apply_axis, build_scenario, load_config
from .errors import DalisError
from .sim import PERCENTILES, ScenarioConfig, ScenarioStats, run_scenario, run_trial

RUN_HEADER = ["row", "trial", "seed", "mle", "p50", "p90", "p95", "n_samples"]
SWEEP_HEADER = ["axis", "value", "mle", "p50", "p90", "p95", "n_samples", "improvement_pct", "incremental_pct"]
TRACE_HEADER = ["t", "true_x", "true_y", "est_x", "est_y", "error"]


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return ""
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, tuple):
        return ":".join(fmt(float(x)) for x in v)
    return str(v)


def improvement_pct(base: float, value: float) -> float:
    """Percent reduction of ``value`` relative to ``base``."""
    if not base > 0 or math.isnan(value):
        return math.nan
    return (base - value) / base * 100.0


def run_rows(stats: ScenarioStats) -> List[List[str]]:
    rows = []
    per = zip(stats.seeds, stats.per_trial_mle, stats.per_trial_percentiles, stats.per_trial_samples)
    for k, (seed, mle, pct, n) in enumerate(per):
        rows.append(["trial", fmt(k), fmt(seed), fmt(mle)] + [fmt(pct[p]) for p in PERCENTILES] + [fmt(n)])
    total = stats.error_percentiles
    rows.append(["summary", "", "", fmt(stats.mle)] + [fmt(total[p]) for p in PERCENTILES] + [fmt(stats.n_samples)])
    return rows


def sweep_rows(axis: str, results) -> List[List[str]]:
    """``results`` is a list of (value, ScenarioStats) in sweep order."""
    rows = []
    base = results[0][1].mle if results else math.nan
    prev = None
    for value, st in results:
        pct = st.error_percentiles
        inc = improvement_pct(prev, st.mle) if prev is not None else math.nan
        rows.append([axis, fmt(value), fmt(st.mle)] + [fmt(pct[p]) for p in PERCENTILES]
                    + [fmt(st.n_samples), fmt(improvement_pct(base, st.mle)), fmt(inc)])
        prev = st.mle
    return rows


def trace_rows(trace) -> List[List[str]]:
    rows = []
    for k in range(len(trace.times)):
        est = trace.estimates[k]
        rows.append([fmt(float(trace.times[k])), fmt(float(trace.true_positions[k, 0])),
                     fmt(float(trace.true_positions[k, 1])), fmt(float(est[0])), fmt(float(est[1])),
                     fmt(float(trace.errors[k]))] + [fmt(float(p)) for p in trace.ples[k]])
    return rows


def _write(out_dir: Optional[str], name: str, header, rows) -> None:
    if out_dir is None:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, name), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _scenario(args) -> ScenarioConfig:
    cfg = load_config(args.config)
    if isinstance(cfg, SweepSpec):
        raise DalisError(f"{args.config} is a sweep file; use 'dalis sweep'")
    changes = {}
    if args.seed is not None:
        changes["base_seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        changes["trials"] = args.trials
    cfg = replace(cfg, **changes)
    cfg.validate()
    return cfg


def cmd_run(args) -> None:
    cfg = _scenario(args)
    stats = run_scenario(cfg, workers=args.workers)
    _write(args.out, "run.csv", RUN_HEADER, run_rows(stats))


def cmd_sweep(args) -> None:
    spec = load_config(args.config)
    if not isinstance(spec, SweepSpec):
        raise DalisError(f"{args.config} has no [sweep] section")
    base = dict(spec.base)
    if args.seed is not None:
        base["base_seed"] = args.seed
    if args.trials is not None:
        base["trials"] = args.trials
    results = []
    for value in spec.values:
        cfg = build_scenario(apply_axis(base, spec.axis, value))
        results.append((value, run_scenario(cfg, workers=args.workers)))
    _write(args.out, "sweep.csv", SWEEP_HEADER, sweep_rows(spec.axis, results))


def cmd_trace(args) -> None:
    cfg = _scenario(args)
    seed = cfg.base_seed
    trace = run_trial(cfg, seed)
    header = TRACE_HEADER + [f"ple_{i}" for i in trace.reference_ids]
    _write(args.out, "trace.csv", header, trace_rows(trace))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dalis", description="DALIS localization simulator")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn, helptext in (
        ("run", cmd_run, "run a scenario; one CSV row per trial plus a summary row"),
        ("sweep", cmd_sweep, "run a one-axis parameter sweep"),
        ("trace", cmd_trace, "per-tick trace of a single trial"),
    ):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--config", required=True, help="scenario or sweep file")
        sp.add_argument("--seed", type=int, help="override base_seed")
        sp.add_argument("--out", help="output directory (default: CSV on stdout)")
        sp.add_argument("--format", choices=["csv"], default="csv")
        if name != "trace":
            sp.add_argument("--trials", type=int, help="override the trial count")
            sp.add_argument("--workers", type=int, default=1, help="parallel trial processes")
        sp.set_defaults(func=fn)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (DalisError, OSError) as e:
        print(f"dalis: error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
