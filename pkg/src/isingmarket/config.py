"""Flat key=value configuration documents and their round-trip mapping form.

The file format is one `key = value` per line, `#` starts a comment, blank
lines are ignored.  Keys mirror SimConfig field names.  `gamma` accepts a
scalar (expanded to the all-pairs symmetric matrix) or a full matrix with
rows separated by `;` and entries by `,`.  Seeds are given on the command
line, never in the file, so every run records an explicit choice.
"""

import numpy as np

from .dynamics import ConfigError, SimConfig, symmetric_gamma

_INT_KEYS = ("L", "K", "thermalization_sweeps", "measurement_sweeps")
_FLOAT_KEYS = ("beta", "alpha", "J")
_ALL_KEYS = _INT_KEYS + _FLOAT_KEYS + ("gamma", "normalization")


def _parse_int(key, raw, lineno):
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"line {lineno}: {key}: invalid integer {raw!r}") from None


def _parse_float(key, raw, lineno):
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"line {lineno}: {key}: invalid number {raw!r}") from None


def _parse_gamma(raw, lineno):
    try:
        if ";" in raw:
            rows = [[float(x) for x in row.split(",")] for row in raw.split(";")]
            return np.array(rows, dtype=np.float64)
        if "," in raw:
            raise ValueError("matrix rows must be separated by ';'")
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: gamma: {exc}") from None


def parse_config(text: str) -> SimConfig:
    """Parse a configuration document into a validated SimConfig.

    Unset keys take the standard-protocol defaults (L=120, K=2, beta=2.0,
    alpha=30, J=1, 1e4 thermalization + 5e5 measurement sweeps, per-site
    normalization, gamma all zero).
    """
    values = {}
    lines = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key == "seed":
            raise ConfigError(f"line {lineno}: seed is set with --seed on the "
                              "command line, not in the config file")
        if key not in _ALL_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} "
                              f"(first set on line {lines[key]})")
        if not raw:
            raise ConfigError(f"line {lineno}: {key}: empty value")
        values[key] = raw
        lines[key] = lineno

    kwargs = {}
    for key in _INT_KEYS:
        if key in values:
            kwargs[key] = _parse_int(key, values[key], lines[key])
    for key in _FLOAT_KEYS:
        if key in values:
            kwargs[key] = _parse_float(key, values[key], lines[key])
    if "normalization" in values:
        kwargs["normalization"] = values["normalization"]

    config = SimConfig(**kwargs)
    if "gamma" in values:
        gamma = _parse_gamma(values["gamma"], lines["gamma"])
        config.gamma = symmetric_gamma(gamma, config.K) if np.isscalar(gamma) else gamma
    return config.validate()


def config_to_mapping(config: SimConfig) -> dict:
    """JSON-ready dict of every SimConfig field."""
    return {
        "L": config.L,
        "K": config.K,
        "beta": config.beta,
        "alpha": config.alpha,
        "J": config.J,
        "gamma": np.asarray(config.gamma, dtype=np.float64).tolist(),
        "thermalization_sweeps": config.thermalization_sweeps,
        "measurement_sweeps": config.measurement_sweeps,
        "seed": config.seed,
        "normalization": config.normalization,
    }


def config_from_mapping(mapping: dict) -> SimConfig:
    """Inverse of config_to_mapping; exact round trip."""
    fields = dict(mapping)
    gamma = np.asarray(fields.pop("gamma"), dtype=np.float64)
    return SimConfig(gamma=gamma, **fields).validate()
