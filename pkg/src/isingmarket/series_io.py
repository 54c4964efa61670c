"""Deterministic CSV persistence for time series and statistics, plus the
JSON run manifest.

Reals are printed with 17 significant digits, which round-trips doubles
exactly, so statistics recomputed from a stored series match the ones
computed online bit for bit.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .config import config_from_mapping, config_to_mapping
from .dynamics import SimConfig
from .observables import SeriesRecord, SummaryStats

SERIES_NAME = "series.csv"
SUMMARY_NAME = "summary.csv"
AUTOCORR_NAME = "autocorr.csv"
MANIFEST_NAME = "manifest.json"


class SeriesFormatError(ValueError):
    """A stored series file is malformed."""


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def series_header(n_stocks: int) -> str:
    ms = ",".join(f"M_{k + 1}" for k in range(n_stocks))
    rs = ",".join(f"r_{k + 1}" for k in range(n_stocks))
    return f"t,{ms},{rs}"


class SeriesWriter:
    """Streaming record sink writing one CSV row per sweep."""

    def __init__(self, path, n_stocks: int):
        self.path = Path(path)
        self.n_stocks = n_stocks
        self._fh = open(self.path, "w", newline="")
        self._fh.write(series_header(n_stocks) + "\n")
        self.n_rows = 0

    def __call__(self, record: SeriesRecord) -> None:
        if len(record.magnetizations) != self.n_stocks:
            raise ValueError(f"record has {len(record.magnetizations)} stocks, "
                             f"writer expects {self.n_stocks}")
        ms = ",".join(_fmt(m) for m in record.magnetizations)
        if record.returns is None:
            rs = "," * (self.n_stocks - 1)
        else:
            rs = ",".join(_fmt(r) for r in record.returns)
        self._fh.write(f"{record.t},{ms},{rs}\n")
        self.n_rows += 1

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_series_csv(records: Iterable[SeriesRecord], dest) -> Path:
    """Write a record stream to `dest`; returns the path written."""
    records = iter(records)
    try:
        first = next(records)
    except StopIteration:
        raise ValueError("cannot write an empty record stream") from None
    with SeriesWriter(dest, len(first.magnetizations)) as writer:
        writer(first)
        for record in records:
            writer(record)
    return writer.path


def read_series_csv(path) -> Iterator[SeriesRecord]:
    """Yield SeriesRecords from a stored series file.

    Raises SeriesFormatError naming the offending row (1-based, counting
    the header as row 1) on any malformed content.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        header = fh.readline().rstrip("\n")
        cols = header.split(",")
        if len(cols) < 3 or cols[0] != "t" or (len(cols) - 1) % 2 != 0:
            raise SeriesFormatError(f"row 1: unrecognized series header {header!r}")
        n_stocks = (len(cols) - 1) // 2
        expected = ["t"] + [f"M_{k + 1}" for k in range(n_stocks)] \
            + [f"r_{k + 1}" for k in range(n_stocks)]
        if cols != expected:
            raise SeriesFormatError(f"row 1: unrecognized series header {header!r}")
        for rowno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split(",")
            if len(parts) != 1 + 2 * n_stocks:
                raise SeriesFormatError(
                    f"row {rowno}: expected {1 + 2 * n_stocks} fields, got {len(parts)}")
            try:
                t = int(parts[0])
                ms = tuple(float(x) for x in parts[1:1 + n_stocks])
                rfields = parts[1 + n_stocks:]
                if all(x == "" for x in rfields):
                    rs = None
                else:
                    rs = tuple(float(x) for x in rfields)
            except ValueError as exc:
                raise SeriesFormatError(f"row {rowno}: {exc}") from None
            yield SeriesRecord(t=t, magnetizations=ms, returns=rs)


def _cc_pairs(n_stocks: int):
    return [(a, b) for a in range(n_stocks) for b in range(a + 1, n_stocks)]


def summary_header(n_stocks: int) -> str:
    cols = ["gamma", "seed"]
    cols += [f"cc_{a + 1}{b + 1}" for a, b in _cc_pairs(n_stocks)]
    cols += [f"kurtosis_{k + 1}" for k in range(n_stocks)]
    cols += [f"vol_mean_{k + 1}" for k in range(n_stocks)]
    cols += [f"vol_std_{k + 1}" for k in range(n_stocks)]
    return ",".join(cols)


def summary_row(stats: SummaryStats, gamma_repr: float, seed: int) -> str:
    k = stats.n_stocks
    fields = [_fmt(gamma_repr), str(seed)]
    fields += [_fmt(stats.cross_correlation[a, b]) for a, b in _cc_pairs(k)]
    fields += [_fmt(x) for x in stats.excess_kurtosis]
    fields += [_fmt(x) for x in stats.volatility_mean]
    fields += [_fmt(x) for x in stats.volatility_std]
    return ",".join(fields)


def write_summary_csv(path, rows, n_stocks: int) -> Path:
    """rows: iterable of (stats, gamma_repr, seed)."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        fh.write(summary_header(n_stocks) + "\n")
        for stats, gamma_repr, seed in rows:
            fh.write(summary_row(stats, gamma_repr, seed) + "\n")
    return path


def write_autocorr_csv(path, stats: SummaryStats) -> Path:
    path = Path(path)
    k = stats.n_stocks
    with open(path, "w", newline="") as fh:
        cols = ["lag"] + [f"vol_ac_{i + 1}" for i in range(k)] + [f"ret_ac_{i + 1}" for i in range(k)]
        fh.write(",".join(cols) + "\n")
        for lag in range(1, stats.max_lag + 1):
            vals = [str(lag)]
            vals += [_fmt(stats.volatility_autocorrelation[i, lag - 1]) for i in range(k)]
            vals += [_fmt(stats.return_autocorrelation[i, lag - 1]) for i in range(k)]
            fh.write(",".join(vals) + "\n")
    return path


@dataclass
class RunManifest:
    """Everything needed to reproduce and locate a stored run."""

    config: SimConfig
    seed: int
    started_at: str
    finished_at: str
    outputs: dict
    version: str

    def to_mapping(self) -> dict:
        return {
            "config": config_to_mapping(self.config),
            "seed": self.seed,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "outputs": dict(self.outputs),
            "version": self.version,
        }

    @classmethod
    def from_mapping(cls, mapping: dict) -> "RunManifest":
        return cls(
            config=config_from_mapping(mapping["config"]),
            seed=int(mapping["seed"]),
            started_at=mapping["started_at"],
            finished_at=mapping["finished_at"],
            outputs=dict(mapping["outputs"]),
            version=mapping["version"],
        )


def write_manifest(manifest: RunManifest, path) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        json.dump(manifest.to_mapping(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def read_manifest(path) -> RunManifest:
    with open(path) as fh:
        return RunManifest.from_mapping(json.load(fh))


def gamma_scalar_repr(gamma: np.ndarray) -> float:
    """Representative scalar for the summary CSV's gamma column: the (1, 2)
    coupling, or 0 for a single stock."""
    gamma = np.asarray(gamma)
    return float(gamma[0, 1]) if gamma.shape[0] > 1 else 0.0
