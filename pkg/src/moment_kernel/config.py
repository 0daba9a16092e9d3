"""Run configuration: a TOML file describing model, bath, Pade orders and grids.

Example::

    beta = 5.0
    coupling = [0.0, 1.0]

    [model]
    preset = "spin_boson(20)"

    [spectral]
    kind = "ohmic"
    lam = 0.5
    omega_d = 1.0

    [pade]
    n = 1
    M1 = 7
    M2 = 15

    [grid]
    t_max = 4.0
    dt = 1e-3
    omega_min = 0.0
    omega_max = 40.0
    d_omega = 0.01

``fourier_sign = -1`` (the default) transforms with ``exp(-i w t)`` so that
``C(t) ~ exp(i w0 t)`` peaks at ``+w0``; use ``+1`` for observables that
rotate the other way, such as ``sigma_x`` of a chromophore starting in its
ground state.

Matrices may be given instead of a preset as flat row-major lists with a
declared ``dim``; entries are numbers or strings such as ``"0.5-1j"``.
"""
from __future__ import annotations

import hashlib
import json
import math
import re
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .model import SystemModel, displaced_tls, spin_boson
from .spectral import Discrete, DrudeLorentz, FrequencyScale, Gaussian, OhmicExp, SpectralDensity

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["RunConfig", "Grid", "OracleSpec", "load_config", "parse_config", "OUTPUT_NAMES"]

OUTPUT_NAMES = {
    "moments": "moments.json",
    "kernel": "kernel.json",
    "time": "time.csv",
    "frequency": "frequency.csv",
    "manifest": "manifest.json",
    "oracle": "oracle.json",
    "verify": "verify.json",
}

_PRESETS = {"spin_boson": spin_boson, "displaced_tls": displaced_tls}
_PRESET_RE = re.compile(r"^\s*(\w+)\s*\(\s*([-+0-9.eE]+)\s*\)\s*$")


@dataclass(frozen=True)
class Grid:
    t_max: float = 4.0
    dt: float = 1e-3
    omega_min: float = 0.0
    omega_max: float = 50.0
    d_omega: float = 0.01
    apodization: float | None = None
    fourier_sign: int = -1

    def omega(self):
        n = int(math.floor((self.omega_max - self.omega_min) / self.d_omega + 1e-9))
        return self.omega_min + self.d_omega * np.arange(n + 1)


@dataclass(frozen=True)
class OracleSpec:
    """Discrete bath and tolerances for the ``oracle`` and ``verify`` commands."""

    modes: tuple
    n_max: object = None
    moment_order: int = 8
    moment_rtol: float = 1e-6
    t_max: float = 5.0
    dt: float = 1e-3
    samples: int = 501
    correlation_tol: float | None = None
    max_dim: int = 4096

    def spectral(self, beta):
        return SpectralDensity(Discrete.from_modes(self.modes), beta)


@dataclass(frozen=True)
class RunConfig:
    model: SystemModel
    spectral: SpectralDensity
    pade: tuple
    grid: Grid
    outputs: dict
    oracle: OracleSpec | None = None
    omega_c: float | None = None
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def beta(self):
        return self.spectral.beta

    def digest(self):
        """Hash of the parsed configuration; comments and layout do not matter."""
        blob = json.dumps(self.raw, sort_keys=True, default=str).encode()
        return hashlib.sha256(blob).hexdigest()

    def scale(self):
        if self.omega_c is None:
            return FrequencyScale.default_for(self.model, self.spectral)
        return FrequencyScale(self.omega_c)


def load_config(path):
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(raw)


def _table(raw, key, required=True):
    val = raw.get(key)
    if val is None:
        if required:
            raise ConfigError(f"missing [{key}] table")
        return {}
    if not isinstance(val, dict):
        raise ConfigError(f"{key} must be a table")
    return val


def _number(d, key, default=None, kind=float):
    if key not in d:
        if default is None:
            raise ConfigError(f"missing key {key!r}")
        return default
    try:
        return kind(d[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key!r} must be a number") from exc


def _complex_matrix(vals, dim, name):
    try:
        flat = [complex(v.replace(" ", "")) if isinstance(v, str) else complex(v) for v in vals]
    except (TypeError, ValueError, AttributeError) as exc:
        raise ConfigError(f"{name}: entries must be numbers or complex strings") from exc
    if len(flat) != dim * dim:
        raise ConfigError(f"{name}: expected {dim * dim} entries for dim = {dim}, got {len(flat)}")
    return np.array(flat).reshape(dim, dim)


def _model(raw, alpha):
    m = _table(raw, "model")
    preset = m.get("preset")
    try:
        if preset is not None:
            hit = _PRESET_RE.match(str(preset))
            if not hit or hit.group(1) not in _PRESETS:
                raise ConfigError(
                    f"unknown preset {preset!r}; use spin_boson(delta) or displaced_tls(omega_eg)"
                )
            return _PRESETS[hit.group(1)](float(hit.group(2)), alpha)
        dim = _number(m, "dim", kind=int)
        mats = {k: _complex_matrix(m.get(k, ()), dim, k) for k in ("H_S", "V", "A", "sigma0")}
        return SystemModel(mats["H_S"], mats["V"], mats["A"], mats["sigma0"], alpha)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"[model]: {exc}") from exc


def _spectral(raw, beta):
    s = _table(raw, "spectral")
    kind = str(s.get("kind", "")).lower()
    try:
        if kind == "ohmic":
            k = OhmicExp(_number(s, "lam"), _number(s, "omega_d"))
        elif kind == "gaussian":
            k = Gaussian(_number(s, "lam"), _number(s, "omega_d"))
        elif kind == "discrete":
            k = Discrete.from_modes(_modes(s.get("modes")))
        elif kind in ("drude_lorentz", "drude"):
            k = DrudeLorentz(_number(s, "lam"), _number(s, "omega_d"))
        else:
            raise ConfigError(f"unknown spectral kind {kind!r}")
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[spectral]: {exc}") from exc
    # DivergentMoment from an unsupported density propagates as a numerical failure
    return SpectralDensity(k, beta)


def _modes(vals):
    try:
        modes = tuple((float(c), float(w)) for c, w in vals)
    except (TypeError, ValueError) as exc:
        raise ConfigError("modes must be a list of [c, omega] pairs") from exc
    if not modes:
        raise ConfigError("modes must not be empty")
    return modes


def parse_config(raw):
    """Validate a TOML-shaped dict and build a :class:`RunConfig`."""
    beta = _number(raw, "beta")
    if not beta > 0:
        raise ConfigError("beta must be positive")
    coupling = raw.get("coupling", [0.0, 1.0])
    try:
        alpha = tuple(float(a) for a in coupling)
    except (TypeError, ValueError) as exc:
        raise ConfigError("coupling must be a list of numbers") from exc
    if not alpha:
        raise ConfigError("coupling must not be empty")
    model = _model(raw, alpha)
    sd = _spectral(raw, beta)

    p = _table(raw, "pade", required=False)
    pade = tuple(_number(p, k, d, int) for k, d in (("n", 1), ("M1", 7), ("M2", 15)))
    if pade[0] != 1:
        raise ConfigError("only the n = 1 kernel is supported")
    if pade[1] < 0 or pade[2] < 0:
        raise ConfigError("Pade orders must be non-negative")

    g = _table(raw, "grid", required=False)
    base = Grid()
    grid = Grid(
        *(
            _number(g, k, getattr(base, k))
            for k in ("t_max", "dt", "omega_min", "omega_max", "d_omega")
        ),
        apodization=_number(g, "apodization") if "apodization" in g else None,
        fourier_sign=_number(g, "fourier_sign", -1, int),
    )
    if grid.fourier_sign not in (-1, 1):
        raise ConfigError("fourier_sign must be -1 or 1")
    if not (grid.t_max > 0 and grid.dt > 0 and grid.dt <= grid.t_max):
        raise ConfigError("grid needs 0 < dt <= t_max")
    if not (grid.d_omega > 0 and grid.omega_max >= grid.omega_min):
        raise ConfigError("grid needs d_omega > 0 and omega_max >= omega_min")

    outputs = dict(OUTPUT_NAMES)
    for k, v in _table(raw, "outputs", required=False).items():
        if k not in OUTPUT_NAMES:
            raise ConfigError(f"unknown output {k!r}")
        outputs[k] = str(v)

    oracle = None
    o = _table(raw, "oracle", required=False)
    if o:
        n_max = o.get("n_max")
        if n_max is not None and not isinstance(n_max, (int, list)):
            raise ConfigError("oracle.n_max must be an integer or a list")
        base = OracleSpec(())
        oracle = OracleSpec(
            _modes(o.get("modes")),
            tuple(n_max) if isinstance(n_max, list) else n_max,
            _number(o, "moment_order", base.moment_order, int),
            _number(o, "moment_rtol", base.moment_rtol),
            _number(o, "t_max", base.t_max),
            _number(o, "dt", base.dt),
            _number(o, "samples", base.samples, int),
            _number(o, "correlation_tol") if "correlation_tol" in o else None,
            _number(o, "max_dim", base.max_dim, int),
        )

    omega_c = _number(raw, "omega_c") if "omega_c" in raw else None
    if omega_c is not None and not omega_c > 0:
        raise ConfigError("omega_c must be positive")
    return RunConfig(model, sd, pade, grid, outputs, oracle, omega_c, raw)
