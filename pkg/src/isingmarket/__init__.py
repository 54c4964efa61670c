"""Coupled multi-stock Ising market simulator and analysis tools."""

__version__ = "0.1.0"

from .lattice import PER_SITE, TOTAL, SpinGrid, neighbor_indices, neighbor_table
from .dynamics import (ConfigError, MarketState, SimConfig, local_field,
                       run_simulation, simulate_series, sweep, symmetric_gamma,
                       update_probability, update_site)
from .observables import (SeriesRecord, SummaryStats, autocorrelation,
                          cross_correlation, excess_kurtosis,
                          returns_from_magnetization, summarize,
                          summarize_magnetizations, volatility)
from .config import config_from_mapping, config_to_mapping, parse_config
from .series_io import (RunManifest, SeriesFormatError, SeriesWriter,
                        read_manifest, read_series_csv, write_manifest,
                        write_series_csv)

__all__ = [
    "PER_SITE", "TOTAL", "SpinGrid", "neighbor_indices", "neighbor_table",
    "ConfigError", "MarketState", "SimConfig", "local_field", "run_simulation",
    "simulate_series", "sweep", "symmetric_gamma", "update_probability",
    "update_site", "SeriesRecord", "SummaryStats", "autocorrelation",
    "cross_correlation", "excess_kurtosis", "returns_from_magnetization",
    "summarize", "summarize_magnetizations", "volatility",
    "config_from_mapping", "config_to_mapping", "parse_config",
    "RunManifest", "SeriesFormatError", "SeriesWriter", "read_manifest",
    "read_series_csv", "write_manifest", "write_series_csv",
]
