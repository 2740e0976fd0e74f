"""Scenario configuration and the flat ``key = value`` config file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

from .channel import resolve_pdp
from .detectors import (
    DETECTORS,
    ITERATIVE,
    MAX_DENSE_KV,
    MAX_ML_CANDIDATES,
    DetectorParams,
    default_params,
)
from .errors import ConfigError, OracleScopeError, ParseError
from .frontend import MODES
from .numerics import SUPPORTED_ORDERS, make_constellation


@dataclass(frozen=True)
class SystemConfig:
    """One simulation scenario.

    ``step`` and ``damping_snr_db`` default per detector when left as
    ``None``; ``damping_snr_db = "off"`` in a config file disables damping.
    ``steps`` holds per-detector step sizes as ``(name, value)`` pairs and
    takes precedence over ``step``.
    ``cp_length`` is recorded only: the link model is circular.
    """

    N: int = 128
    K: int = 10
    V: int = 256
    M: int = 16
    snr_db: tuple = (10.0,)
    pdp: str = "sds"
    quant: str = "ztq"
    detector: str = "pqnd"
    detectors: tuple = ("nm", "pqnd_zf", "pqnd", "obox")
    step: float | None = None
    steps: tuple = ()
    iterations: int = 6
    damping_snr_db: float | str | None = None
    norm_projection: bool = True
    frames: int = 100
    seed: int = 0
    cp_length: int | None = None
    sigma_tau_sq: float | None = None
    freeze_thresholds: bool = False

    @cached_property
    def profile(self):
        return resolve_pdp(self.pdp)

    @cached_property
    def constellation(self):
        return make_constellation(self.M)

    def params_for(self, detector):
        base = default_params(detector, self.N, self.K)
        damping = base.damping_snr_db
        if self.damping_snr_db == "off":
            damping = None
        elif self.damping_snr_db is not None:
            damping = float(self.damping_snr_db)
        step = base.step if self.step is None else float(self.step)
        step = float(dict(self.steps).get(detector, step))
        return DetectorParams(step, self.iterations, damping, self.norm_projection)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def validate(self, detectors=None):
        """Raise on an inconsistent scenario; returns self for chaining."""
        for name in ("N", "K", "V", "frames", "iterations"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.M not in SUPPORTED_ORDERS:
            raise ConfigError(f"M must be one of {SUPPORTED_ORDERS}")
        if not self.snr_db:
            raise ConfigError("snr_db grid is empty")
        if self.quant not in MODES:
            raise ConfigError(f"quant must be one of {MODES}")
        if self.step is not None and self.step < 0:
            raise ConfigError("step must be >= 0")
        for name, value in self.steps:
            if name not in DETECTORS or value < 0:
                raise ConfigError(f"bad per-detector step {name}:{value}")
        if self.sigma_tau_sq is not None and self.sigma_tau_sq < 0:
            raise ConfigError("sigma_tau_sq must be >= 0")
        L = self.profile.L
        if self.V < L:
            raise ConfigError(f"V={self.V} is shorter than the channel (L={L})")
        if self.cp_length is not None and self.cp_length < L - 1:
            raise ConfigError(f"cp_length must be >= L-1 = {L - 1}")
        for det in detectors or (self.detector,):
            if det not in DETECTORS:
                raise ConfigError(f"unknown detector {det!r}")
            if det == "ml" and self.M ** (self.K * self.V) > MAX_ML_CANDIDATES:
                raise OracleScopeError(
                    f"exhaustive ML over {self.M}^{self.K * self.V} candidates exceeds "
                    f"{MAX_ML_CANDIDATES}")
            if det == "nm" and self.K * self.V > MAX_DENSE_KV:
                raise OracleScopeError(f"dense Newton needs KV <= {MAX_DENSE_KV}")
        return self


def validate_convergence(config):
    for det in config.detectors:
        if det not in ITERATIVE:
            if det in DETECTORS:
                config.validate((det,))
            raise ConfigError(f"convergence runs need iterative detectors {ITERATIVE}, got {det!r}")
    return config.validate(config.detectors)


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------

_FIELDS = {f.name: f for f in dataclasses.fields(SystemConfig)}


def _to_bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_float(text):
    t = text.strip().lower()
    if t in ("", "none", "default"):
        return None
    return float(t)


def _damping(text):
    t = text.strip().lower()
    if t == "off":
        return "off"
    return _optional_float(t)


def _list(conv):
    def parse(text):
        items = [s for s in text.replace(";", ",").split(",") if s.strip()]
        return tuple(conv(s.strip()) for s in items)
    return parse


def _step_pair(text):
    name, sep, value = text.partition(":")
    if not sep:
        raise ValueError(f"expected 'detector:step', got {text!r}")
    return name.strip().lower(), float(value)


def _optional_int(text):
    t = text.strip().lower()
    return None if t in ("", "none") else int(t)


_PARSERS = {
    "N": int, "K": int, "V": int, "M": int,
    "snr_db": _list(float),
    "pdp": str.strip, "quant": lambda s: s.strip().lower(),
    "detector": lambda s: s.strip().lower(),
    "detectors": _list(lambda s: s.lower()),
    "step": _optional_float, "steps": _list(_step_pair), "iterations": int,
    "damping_snr_db": _damping,
    "norm_projection": _to_bool,
    "frames": int, "seed": int,
    "cp_length": _optional_int,
    "sigma_tau_sq": _optional_float,
    "freeze_thresholds": _to_bool,
}

assert set(_PARSERS) == set(_FIELDS)


def coerce(key, text):
    key = key.strip().replace("-", "_")
    if key not in _PARSERS:
        raise ConfigError(f"unknown config key {key!r}")
    try:
        return key, _PARSERS[key](str(text))
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {exc}") from None


def parse_config_text(text):
    """Parse ``key = value`` lines (``#`` comments) into a dict of typed values."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, val = line.split("=", 1)
        try:
            k, v = coerce(key, val)
        except ConfigError as exc:
            raise ParseError(str(exc), lineno) from None
        values[k] = v
    return values


def load_config(path, **overrides):
    values = parse_config_text(Path(path).read_text(encoding="utf-8")) if path else {}
    values.update({k: v for k, v in overrides.items() if v is not None})
    return SystemConfig(**values)


def dump_config(config):
    """Inverse of :func:`parse_config_text` (round-trips every field)."""
    lines = []
    for name in _FIELDS:
        val = getattr(config, name)
        if name == "steps":
            val = ",".join(f"{k}:{v!r}" for k, v in val)
        elif isinstance(val, tuple):
            val = ",".join(str(v) for v in val)
        elif isinstance(val, bool):
            val = str(val).lower()
        elif val is None:
            val = "none"
        lines.append(f"{name} = {val}")
    return "\n".join(lines) + "\n"
