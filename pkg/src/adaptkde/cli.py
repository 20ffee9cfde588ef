"""Command-line interface: ``adaptkde <simulate|sweep|estimate|constants|rates> ...``.

Exit status is 0 on success, 2 on invalid input or an empty candidate set.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, replace
from fractions import Fraction
from pathlib import Path

from .config import EstimatorConfig, ExperimentConfig, load_kv, parse_floats
from .constants import build_table
from .estimators import SampleMatrix
from .kernels import make_kernel, moment
from .partitions import Partition
from .rates import rate_report
from .selection import EmptyCandidateSetError, select


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False, allow_nan=True)


def _experiment(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_kv(load_kv(args.config))
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def cmd_simulate(args) -> int:
    from .harness.risk import mc_risk

    cfg = _experiment(args)
    report = mc_risk(cfg, threads=args.threads)
    print(_json(report.to_dict()))
    return 0


def cmd_sweep(args) -> int:
    from .harness.risk import rate_sweep, report_csv

    cfg = _experiment(args)
    report = rate_sweep(cfg, threads=args.threads)
    text = report_csv(report)
    if args.csv:
        Path(args.csv).write_text(text)
    else:
        sys.stdout.write(text)
    summary = _json(report.to_dict())
    if args.json:
        Path(args.json).write_text(summary + "\n")
    elif args.csv:
        print(summary)
    return 0


def cmd_estimate(args) -> int:
    est = EstimatorConfig.from_kv(load_kv(args.config)) if args.config else EstimatorConfig()
    data = SampleMatrix.from_csv(args.data)
    x0 = parse_floats(args.x0)
    if len(x0) != data.d:
        raise ValueError(f"--x0 has {len(x0)} entries, data has d={data.d} columns")
    kernel = est.kernel()
    thr = est.thresholds(data.d, kernel)
    cands = est.candidate_set(data.n, data.d, kernel, thr)
    res = select(data, x0, cands, kernel, thr.lam)
    print(_json(res.to_dict(with_trace=not args.no_trace)))
    return 0


def cmd_constants(args) -> int:
    if args.kernel:
        key, _, val = args.kernel.partition("=")
        if key.strip() != "l":
            raise ValueError("--kernel expects l=<order>")
        K = make_kernel(int(val))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["quantity", "value"])
        w.writerow(["l", K.l])
        w.writerow(["sup_norm", repr(K.sup_norm)])
        w.writerow(["l1_norm", repr(K.l1_norm)])
        w.writerow(["lipschitz", repr(K.lipschitz)])
        for k in range(0, K.l + 1):
            w.writerow([f"moment_{k}", repr(moment(K, k))])
        sys.stdout.write(buf.getvalue())
        return 0
    if args.q is None or args.d is None:
        raise ValueError("constants needs either --kernel l=<l> or --q, --d (and optionally --l)")
    tab = build_table(args.q, args.d, make_kernel(args.l), args.z, args.tau_floor)
    print(_json(tab.to_dict()))
    return 0


def _num(text: str):
    text = text.strip()
    if text.lower() in ("inf", "infinity"):
        return math.inf
    try:
        return Fraction(text)
    except ValueError:
        return float(text)


def cmd_rates(args) -> int:
    beta = [_num(t) for t in args.beta.split(",")]
    p = [_num(t) for t in args.p.split(",")]
    if len(beta) != len(p):
        raise ValueError("--beta and --p must have the same length")
    P = Partition.parse(args.partition, len(beta))
    bmax = _num(args.beta_max) if args.beta_max else None
    rep = rate_report(beta, p, P, args.n, bmax, args.d_bar)
    print(_json(asdict(rep)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="adaptkde", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def exp_args(sp):
        sp.add_argument("--config", required=True, help="key = value experiment file")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--threads", type=int, default=1, help="worker processes for replications")

    sp = sub.add_parser("simulate", help="Monte Carlo risk at one n (JSON)")
    exp_args(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", help="risk over n_values, CSV plus JSON summary")
    exp_args(sp)
    sp.add_argument("--csv", help="write the CSV here instead of stdout")
    sp.add_argument("--json", help="write the JSON summary here")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("estimate", help="select and estimate at x0 from a CSV sample (JSON)")
    sp.add_argument("--data", required=True, help="CSV with a header row and d numeric columns")
    sp.add_argument("--x0", required=True, help="query point, comma separated")
    sp.add_argument("--config", help="key = value estimator file")
    sp.add_argument("--no-trace", action="store_true", help="omit the per-candidate trace")
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("constants", help="kernel constants (CSV) or the threshold table (JSON)")
    sp.add_argument("--kernel", help="l=<order>: kernel norms and moment table")
    sp.add_argument("--q", type=float)
    sp.add_argument("--d", type=int)
    sp.add_argument("--l", type=int, default=2)
    sp.add_argument("--z", type=float, default=1.0)
    sp.add_argument("--tau-floor", type=float, default=1.0)
    sp.set_defaults(func=cmd_constants)

    sp = sub.add_parser("rates", help="rate exponents and bandwidths (JSON)")
    sp.add_argument("--beta", required=True, help="comma separated smoothness per coordinate")
    sp.add_argument("--p", required=True, help="comma separated integrability per coordinate (inf allowed)")
    sp.add_argument("--partition", required=True, help='e.g. "1,2|3"')
    sp.add_argument("--n", type=float, required=True)
    sp.add_argument("--beta-max", help="top of the adaptive scale")
    sp.add_argument("--d-bar", type=int, help="largest block size used for r_max")
    sp.set_defaults(func=cmd_rates)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EmptyCandidateSetError as err:
        print(f"error: {err}", file=sys.stderr)
        for dg in err.diagnostics:
            print(f"  binding constraint: {json.dumps(dg)}", file=sys.stderr)
        return 2
    except (ValueError, OSError, KeyError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
