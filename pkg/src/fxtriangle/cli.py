"""Command-line experiment runner.

Subcommands: ``simulate`` (config file to an artifacts directory),
``analyze`` (mid-price CSV to correlation curves), ``ingest`` (tick records
to a gridded mid-price CSV), ``sweep`` (one config across many seeds), and
``synth`` (generate a synthetic tick-record fixture).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import analytics
from .engine import run, run_ensemble
from .io import (
    DEFAULT_OMEGA_GRID,
    GRID_MS,
    align_mid_series,
    export_artifacts,
    ingest_records,
    load_mid_series,
    parse_config,
    synth_records,
)
from .lob import MarketId, Variant


def _parse_grid(text: Optional[str]) -> Optional[tuple]:
    if text is None:
        return None
    try:
        values = tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise SystemExit(f"bad omega grid: {text!r}")
    if not values or any(v <= 0 for v in values):
        raise SystemExit(f"bad omega grid: {text!r}")
    return values


def _load_config(args: argparse.Namespace):
    text = Path(args.config).read_text()
    variant = Variant(args.variant) if args.variant else None
    return parse_config(
        text,
        seed=args.seed,
        arbitrager=False if args.no_arbitrager else None,
        extended=True if args.extended else None,
        variant=variant,
    )


def _add_config_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="experiment config file")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--omega-grid", default=None, help='time scales in seconds, e.g. "0.1,1,10,60"')
    parser.add_argument("--no-arbitrager", action="store_true", help="disable the arbitrager")
    parser.add_argument("--extended", action="store_true", help="enable the extended model behaviors")
    parser.add_argument("--variant", choices=[v.value for v in Variant], default=None)


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = _load_config(args)
    artifacts = run(config)
    files = export_artifacts(artifacts, args.out, _parse_grid(args.omega_grid))
    print(
        f"simulated {config.steps} steps (seed {config.seed}): "
        f"{len(artifacts.transaction_log)} transactions, "
        f"{len(artifacts.opportunity_log)} opportunities"
    )
    for path in files:
        print(f"wrote {path}")
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = _load_config(args)
    try:
        seeds = [int(part) for part in args.seeds.split(",") if part.strip()]
    except ValueError:
        raise SystemExit(f"bad seed list: {args.seeds!r}")
    if not seeds:
        raise SystemExit("no seeds given")
    results = run_ensemble(config, seeds, max_workers=args.workers)
    grid = _parse_grid(args.omega_grid)
    for seed, artifacts in zip(seeds, results):
        out_dir = Path(args.out) / f"seed_{seed}"
        export_artifacts(artifacts, out_dir, grid)
        print(f"seed {seed}: {len(artifacts.transaction_log)} transactions -> {out_dir}")
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    dt, series = load_mid_series(args.mids)
    grid = _parse_grid(args.omega_grid) or DEFAULT_OMEGA_GRID
    steps = next(iter(series.values())).size
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    corr_path = out / "correlations.csv"
    with corr_path.open("w", newline="") as handle:
        handle.write("pair,omega_seconds,rho,sample_count\n")
        for pair in analytics.PAIR_ORDER:
            for omega in sorted(set(grid)):
                stride = omega / dt
                k = int(round(stride))
                if k < 1 or abs(stride - k) > 1e-9 * max(1.0, stride) or steps < 3 * k:
                    continue
                rho = analytics.cross_correlation(series[pair[0]], series[pair[1]], omega, dt)
                count = np.diff(series[pair[0]][::k]).size
                handle.write(
                    f"{pair[0].name}-{pair[1].name},{omega!r},"
                    f"{format(rho, '.6g')},{count}\n"
                )
    print(f"wrote {corr_path}")
    return 0


def _cmd_ingest(args: argparse.Namespace) -> int:
    result = ingest_records(Path(args.input).read_text())
    start_ms, aligned = align_mid_series(result)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    mid_path = out / "mid_series.csv"
    dt = GRID_MS / 1000.0
    with mid_path.open("w", newline="") as handle:
        handle.write("step,seconds,market,mid\n")
        for market in MarketId:
            mids = aligned[market]
            label = market.label
            handle.writelines(
                f"{step},{step * dt!r},{label},{format(mids[step], '.17g')}\n"
                for step in range(mids.size)
            )
    print(
        f"ingested {result.records} records ({result.deal_rows} deal rows ignored), "
        f"grid starts at {start_ms} ms"
    )
    print(f"wrote {mid_path}")
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    text = synth_records(seconds=args.seconds, seed=args.seed)
    Path(args.out).write_text(text)
    print(f"wrote {args.out}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="fxtriangle",
        description="Simulate and analyze the three-market FX ecology with a triangular arbitrager.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    sim = subparsers.add_parser("simulate", help="run one experiment and export artifacts")
    _add_config_options(sim)
    sim.add_argument("--out", required=True, help="output directory")
    sim.set_defaults(handler=_cmd_simulate)

    sweep = subparsers.add_parser("sweep", help="run one config across many seeds")
    _add_config_options(sweep)
    sweep.add_argument("--seeds", required=True, help='comma-separated seeds, e.g. "1,2,3"')
    sweep.add_argument("--out", required=True, help="output directory (one subdir per seed)")
    sweep.add_argument("--workers", type=int, default=None, help="parallel workers")
    sweep.set_defaults(handler=_cmd_sweep)

    analyze = subparsers.add_parser("analyze", help="correlation curves from a mid-price CSV")
    analyze.add_argument("--mids", required=True, help="mid_series.csv from simulate or ingest")
    analyze.add_argument("--out", required=True, help="output directory")
    analyze.add_argument("--omega-grid", default=None)
    analyze.set_defaults(handler=_cmd_analyze)

    ingest = subparsers.add_parser("ingest", help="tick records to gridded mid prices")
    ingest.add_argument("--in", dest="input", required=True, help="tick-record CSV")
    ingest.add_argument("--out", required=True, help="output directory")
    ingest.set_defaults(handler=_cmd_ingest)

    synth = subparsers.add_parser("synth", help="generate a synthetic tick-record fixture")
    synth.add_argument("--out", required=True, help="output CSV path")
    synth.add_argument("--seconds", type=float, default=5.0)
    synth.add_argument("--seed", type=int, default=0)
    synth.set_defaults(handler=_cmd_synth)

    args = parser.parse_args(argv)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
