"""Command-line surface: `simulate`, `sweep`, and `analyze`.

Exit codes: 0 success, 1 validation failure, 2 I/O failure, 3 internal
error.  Every failure prints a single diagnostic line to stderr with a
machine-parsable `error: <category>:` prefix.
"""

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import config_from_mapping, config_to_mapping, parse_config
from .dynamics import ConfigError, SimConfig, run_simulation, symmetric_gamma
from .observables import summarize
from .series_io import (AUTOCORR_NAME, MANIFEST_NAME, SERIES_NAME, SUMMARY_NAME,
                        RunManifest, SeriesFormatError, SeriesWriter,
                        gamma_scalar_repr, read_manifest, read_series_csv,
                        write_autocorr_csv, write_manifest, write_summary_csv)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_INTERNAL = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat()


def _load_config(args) -> SimConfig:
    if args.config is not None:
        config = parse_config(Path(args.config).read_text())
    else:
        config = SimConfig()
    if getattr(args, "gamma", None) is not None:
        config.gamma = symmetric_gamma(args.gamma, config.K)
    return config


def _print_summary(stats, out=sys.stdout):
    k = stats.n_stocks
    print(f"records: {stats.n_records}  stocks: {k}", file=out)
    for a in range(k):
        for b in range(a + 1, k):
            print(f"volatility cross-correlation {a + 1},{b + 1}: "
                  f"{stats.cross_correlation[a, b]:.6g}", file=out)
    for i in range(k):
        print(f"stock {i + 1}: excess_kurtosis={stats.excess_kurtosis[i]:.6g} "
              f"vol_mean={stats.volatility_mean[i]:.6g} "
              f"vol_std={stats.volatility_std[i]:.6g}", file=out)


def _cmd_simulate(args) -> int:
    config = _load_config(args)
    config.seed = args.seed
    config.validate()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = _timestamp()

    series_path = out_dir / SERIES_NAME
    with SeriesWriter(series_path, config.K) as writer:
        stats = run_simulation(config, sink=writer, max_lag=args.max_lag)

    summary_path = write_summary_csv(out_dir / SUMMARY_NAME,
                                     [(stats, gamma_scalar_repr(config.gamma), config.seed)],
                                     config.K)
    autocorr_path = write_autocorr_csv(out_dir / AUTOCORR_NAME, stats)
    manifest = RunManifest(
        config=config,
        seed=config.seed,
        started_at=started,
        finished_at=_timestamp(),
        outputs={"series": series_path.name, "summary": summary_path.name,
                 "autocorr": autocorr_path.name},
        version=__version__,
    )
    write_manifest(manifest, out_dir / MANIFEST_NAME)
    _print_summary(stats)
    return EXIT_OK


def _run_cell(config_mapping: dict, gamma: float, seed: int, max_lag: int):
    config = config_from_mapping(config_mapping)
    config.gamma = symmetric_gamma(gamma, config.K)
    config.seed = seed
    stats = run_simulation(config.validate(), max_lag=max_lag)
    return gamma, seed, stats


def _cmd_sweep(args) -> int:
    gammas = []
    for g in args.gamma_list.split(","):
        g = g.strip()
        if not g:
            continue
        gammas.append(float(g))
    if not gammas:
        raise _UsageError("empty --gamma-list")
    deduped = list(dict.fromkeys(gammas))
    if len(deduped) != len(gammas):
        print("warning: duplicate gamma values removed from --gamma-list",
              file=sys.stderr)
    gammas = deduped
    if args.seeds < 1:
        raise _UsageError("--seeds must be >= 1")

    config = _load_config(args)
    config.seed = args.base_seed
    config.validate()
    base_mapping = config_to_mapping(config)
    seeds = [args.base_seed + i for i in range(args.seeds)]
    cells = [(g, s) for g in gammas for s in seeds]

    jobs = args.jobs if args.jobs else (os.cpu_count() or 1)
    results = {}
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_cell, base_mapping, g, s, args.max_lag)
                       for g, s in cells]
            for fut in futures:
                g, s, stats = fut.result()
                results[(g, s)] = stats
    else:
        for g, s in cells:
            _, _, stats = _run_cell(base_mapping, g, s, args.max_lag)
            results[(g, s)] = stats

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_summary_csv(out_dir / "cells.csv",
                      [(results[(g, s)], g, s) for g, s in cells], config.K)

    with open(out_dir / "aggregate.csv", "w", newline="") as fh:
        fh.write("gamma,n_seeds,mean_cc_12,stderr_cc_12\n")
        for g in gammas:
            ccs = np.array([results[(g, s)].cross_correlation[0, 1] for s in seeds]) \
                if config.K > 1 else np.zeros(len(seeds))
            mean = ccs.mean()
            stderr = f"{ccs.std(ddof=1) / math.sqrt(len(ccs)):.17g}" if len(ccs) > 1 else ""
            fh.write(f"{g:.17g},{len(ccs)},{mean:.17g},{stderr}\n")
    print(f"wrote {out_dir / 'cells.csv'} and {out_dir / 'aggregate.csv'}")
    return EXIT_OK


def _cmd_analyze(args) -> int:
    input_path = Path(args.input)
    records = read_series_csv(input_path)
    try:
        stats = summarize(records, max_lag=args.max_lag)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    gamma_repr, seed = 0.0, 0
    manifest_path = input_path.parent / MANIFEST_NAME
    if manifest_path.exists():
        manifest = read_manifest(manifest_path)
        gamma_repr = gamma_scalar_repr(manifest.config.gamma)
        seed = manifest.seed

    if args.out is not None:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_summary_csv(out_dir / SUMMARY_NAME, [(stats, gamma_repr, seed)],
                          stats.n_stocks)
        write_autocorr_csv(out_dir / AUTOCORR_NAME, stats)
    _print_summary(stats)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="isingmarket",
                     description="Coupled multi-stock Ising market simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one simulation and store its outputs")
    sim.add_argument("--config", help="configuration file (key = value lines)")
    sim.add_argument("--seed", type=int, required=True, help="RNG seed (u64)")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--gamma", type=float, default=None,
                     help="scalar coupling, expanded to the symmetric matrix "
                          "(overrides the config value)")
    sim.add_argument("--max-lag", type=int, default=100)
    sim.set_defaults(func=_cmd_simulate)

    swp = sub.add_parser("sweep", help="run a gamma x seed grid and aggregate")
    swp.add_argument("--gamma-list", required=True,
                     help="comma-separated coupling values")
    swp.add_argument("--seeds", type=int, required=True,
                     help="number of seeds per gamma")
    swp.add_argument("--base-seed", type=int, default=0)
    swp.add_argument("--config", help="configuration file")
    swp.add_argument("--out", required=True, help="output directory")
    swp.add_argument("--jobs", type=int, default=0,
                     help="parallel workers (default: machine parallelism)")
    swp.add_argument("--max-lag", type=int, default=100)
    swp.set_defaults(func=_cmd_sweep)

    ana = sub.add_parser("analyze", help="recompute statistics from a stored series")
    ana.add_argument("--input", required=True, help="series.csv path")
    ana.add_argument("--max-lag", type=int, default=100)
    ana.add_argument("--out", help="directory for recomputed summary files")
    ana.set_defaults(func=_cmd_analyze)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"error: validation: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConfigError, SeriesFormatError) as exc:
        print(f"error: validation: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:  # pragma: no cover - defensive
        print(f"error: internal: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
