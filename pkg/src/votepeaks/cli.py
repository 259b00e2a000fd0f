"""Command-line interface: batch, reproducible runs with manifest sidecars.

Exit codes are a stable contract: 0 success, 1 domain or validation
failure, 2 I/O or environment failure.  Every command that writes files also
writes `<out>.manifest.json` echoing the resolved configuration, input
digests, and output list, which is sufficient to reproduce the run.
"""

from __future__ import annotations

import argparse
import secrets
import sys
from pathlib import Path

from . import __version__, jsonio
from .anomaly import AnomalyConfig, run_anomaly, run_series, series_table
from .dataset import FilterSpec, ingest
from .errors import ForensicsError
from .histogram import HistogramSpec, build_histogram, emit_histogram
from .metrics import IntegerBand, JitterSpec, MetricKind
from .regional import attribute_bin, round_product_scan
from .synth import FraudSpec, SynthSpec, generate_honest, inject_fraud
from .dataset import emit as emit_dataset

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_IO = 2


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    seed = secrets.randbits(63)
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def _write_manifest(command: str, config: dict, inputs, outputs) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "config": config,
        "inputs": [{"path": str(p), "sha256": d} for p, d in inputs],
        "outputs": [str(o) for o in outputs],
    }
    jsonio.write(manifest, f"{outputs[0]}.manifest.json")


def _election_id(path) -> str:
    return Path(path).stem


def cmd_validate(args) -> int:
    ds = ingest(args.input, _election_id(args.input))
    print(f"OK: {len(ds)} stations, sha256 {ds.source_digest}")
    return EXIT_OK


def cmd_histogram(args) -> int:
    seed = _resolve_seed(args)
    ds = ingest(args.input, _election_id(args.input))
    spec = HistogramSpec(
        metric=MetricKind(args.metric),
        bin_width=args.bin_width,
        jitter=JitterSpec(enabled=not args.no_jitter, draws=args.jitter_draws),
        filter=FilterSpec(min_registered=args.min_registered,
                          exclude_full_turnout=not args.include_full_turnout),
        seed=seed,
    )
    hist = build_histogram(ds, spec)
    emit_histogram(hist, args.format, args.out)
    config = {
        "metric": args.metric, "bin_width": args.bin_width,
        "jitter_draws": args.jitter_draws, "no_jitter": args.no_jitter,
        "include_full_turnout": args.include_full_turnout,
        "min_registered": args.min_registered,
        "seed": seed, "format": args.format,
    }
    _write_manifest("histogram", config,
                    [(args.input, ds.source_digest)], [args.out])
    return EXIT_OK


def cmd_anomaly(args) -> int:
    seed = _resolve_seed(args)
    datasets = [ingest(p, _election_id(p)) for p in args.inputs]
    config = AnomalyConfig(
        iterations=args.iterations,
        seed=seed,
        band=IntegerBand(halfwidth=args.halfwidth,
                         lo=args.integer_lo, hi=args.integer_hi),
        jitter=JitterSpec(enabled=not args.no_jitter, draws=args.jitter_draws),
        filter=FilterSpec(min_registered=args.min_registered,
                          exclude_full_turnout=args.exclude_full_turnout),
        percentile=args.percentile,
    )
    if len(datasets) == 1:
        report = run_anomaly(datasets[0], config, threads=args.threads)
        jsonio.write(report.to_dict(), args.out)
    else:
        reports, table = run_series(datasets, config, threads=args.threads)
        jsonio.write({"reports": [r.to_dict() for r in reports],
                      "table": table}, args.out)
    _write_manifest("anomaly", config.echo(),
                    [(p, d.source_digest) for p, d in zip(args.inputs, datasets)],
                    [args.out])
    return EXIT_OK


def cmd_region(args) -> int:
    ds = ingest(args.input, _election_id(args.input))
    attribution = attribute_bin(ds, MetricKind(args.metric), args.bin_center,
                                args.halfwidth, group_by=args.group_by)
    jsonio.write(attribution.to_dict(), args.out)
    config = {
        "metric": args.metric, "bin_center": args.bin_center,
        "halfwidth": args.halfwidth, "group_by": args.group_by,
    }
    _write_manifest("region", config,
                    [(args.input, ds.source_digest)], [args.out])
    return EXIT_OK


def cmd_product_scan(args) -> int:
    ds = ingest(args.input, _election_id(args.input))
    hits = round_product_scan(ds, group_by=args.group_by,
                              round_step=args.round_step,
                              tolerance=args.tolerance,
                              min_cluster=args.min_cluster)
    jsonio.write({"hits": [h.to_dict() for h in hits]}, args.out)
    config = {
        "group_by": args.group_by, "round_step": args.round_step,
        "tolerance": args.tolerance, "min_cluster": args.min_cluster,
    }
    _write_manifest("product-scan", config,
                    [(args.input, ds.source_digest)], [args.out])
    return EXIT_OK


def cmd_synth(args) -> int:
    seed = _resolve_seed(args)
    spec = SynthSpec(
        station_count=args.stations,
        median_registered=args.median_registered,
        min_registered=args.min_registered,
        max_registered=args.max_registered,
        region_count=args.region_count,
        seed=seed,
    )
    ds = generate_honest(spec, election_id=_election_id(args.out))
    fraud = FraudSpec(fraction=args.fraud_fraction,
                      target_metric=args.target_metric, seed=seed)
    ds, truth = inject_fraud(ds, fraud)
    emit_dataset(ds, args.out)
    truth.write_csv(args.truth)
    config = {
        "stations": args.stations,
        "median_registered": args.median_registered,
        "min_registered": args.min_registered,
        "max_registered": args.max_registered,
        "region_count": args.region_count,
        "fraud_fraction": args.fraud_fraction,
        "target_metric": args.target_metric,
        "seed": seed,
    }
    _write_manifest("synth", config, [], [args.out, args.truth])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="votepeaks",
        description="Statistical fingerprints of election fraud in "
                    "polling-station results.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="strict-validate a dataset CSV")
    p.add_argument("input")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("histogram", help="jittered percentage histogram")
    p.add_argument("input")
    p.add_argument("--metric", default="turnout",
                   choices=[m.value for m in MetricKind])
    p.add_argument("--bin-width", type=float, default=0.1)
    p.add_argument("--jitter-draws", type=int, default=100)
    p.add_argument("--no-jitter", action="store_true")
    p.add_argument("--include-full-turnout", action="store_true")
    p.add_argument("--min-registered", type=int, default=0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--format", default="csv", choices=["csv", "svg"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_histogram)

    p = sub.add_parser("anomaly", help="integer-anomaly report(s)")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--iterations", type=int, default=10000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--integer-lo", type=int, default=1)
    p.add_argument("--integer-hi", type=int, default=99)
    p.add_argument("--halfwidth", type=float, default=0.05)
    p.add_argument("--jitter-draws", type=int, default=100)
    p.add_argument("--no-jitter", action="store_true")
    p.add_argument("--percentile", type=float, default=99.9)
    p.add_argument("--min-registered", type=int, default=0)
    p.add_argument("--exclude-full-turnout", action="store_true")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_anomaly)

    p = sub.add_parser("region", help="attribute a histogram bin to regions")
    p.add_argument("input")
    p.add_argument("--metric", default="turnout",
                   choices=[m.value for m in MetricKind])
    p.add_argument("--bin-center", type=float, required=True)
    p.add_argument("--halfwidth", type=float, default=0.05)
    p.add_argument("--group-by", default="region",
                   choices=["region", "territory"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("product-scan",
                       help="round leader-share cluster scan")
    p.add_argument("input")
    p.add_argument("--group-by", default="region",
                   choices=["region", "territory"])
    p.add_argument("--round-step", type=float, default=0.5)
    p.add_argument("--tolerance", type=float, default=0.05)
    p.add_argument("--min-cluster", type=int, default=20)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_product_scan)

    p = sub.add_parser("synth", help="generate a synthetic election")
    p.add_argument("--stations", type=int, required=True)
    p.add_argument("--median-registered", type=float, default=1000.0)
    p.add_argument("--min-registered", type=int, default=10)
    p.add_argument("--max-registered", type=int, default=5000)
    p.add_argument("--region-count", type=int, default=10)
    p.add_argument("--fraud-fraction", type=float, default=0.0)
    p.add_argument("--target-metric", default="turnout",
                   choices=["turnout", "leader_result", "both"])
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--truth", required=True)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ForensicsError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
