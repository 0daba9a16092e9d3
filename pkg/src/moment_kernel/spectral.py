"""Spectral densities and the moment integrals that parameterize the bath.

All bath statistics needed downstream reduce to two families of numbers,

    theta_n = (2/pi) int_0^inf J(w) w^n dw
    eta_n   = (2/pi) int_0^inf J(w) w^n coth(beta w / 2) dw

with hbar = 1.  For a discrete bath, J(w) = (pi/2) sum_j c_j^2 delta(w - w_j),
so both integrals collapse to finite sums.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Union

import numpy as np
from scipy import integrate, special

from .errors import DivergentMoment

__all__ = [
    "OhmicExp",
    "Gaussian",
    "Discrete",
    "DrudeLorentz",
    "SpectralDensity",
    "FrequencyScale",
    "theta",
    "eta",
    "theta_quadrature",
    "moment_table",
    "coth",
]

# relative size of the discarded tail when truncating quadrature ranges
_TAIL = 1e-16
_QUAD_EPSREL = 1e-13


def coth(x):
    """Hyperbolic cotangent with a series branch near zero."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = np.abs(x) < 1e-4
    xs = x[small]
    out[small] = 1.0 / xs + xs / 3.0
    out[~small] = 1.0 / np.tanh(x[~small])
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class OhmicExp:
    """J(w) = 2 lam w exp(-w / omega_d)."""

    lam: float
    omega_d: float

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be non-negative")
        if not self.omega_d > 0:
            raise ValueError("omega_d must be positive")

    def profile(self, w):
        return np.exp(-np.asarray(w, dtype=float) / self.omega_d)

    def theta_closed(self, n):
        return 4.0 * self.lam / math.pi * math.gamma(n + 2) * self.omega_d ** (n + 2)

    def cutoff(self, n):
        # w beyond which the w^(n+1) exp(-w/wd) tail is below _TAIL of the total
        return self.omega_d * float(special.gammainccinv(n + 2, _TAIL))

    def peak(self, n):
        return (n + 1) * self.omega_d

    def scaled(self, s):
        return OhmicExp(self.lam * s * s, self.omega_d / s)


@dataclass(frozen=True)
class Gaussian:
    """J(w) = 2 lam w exp(-(w / omega_d)^2)."""

    lam: float
    omega_d: float

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lam must be non-negative")
        if not self.omega_d > 0:
            raise ValueError("omega_d must be positive")

    def profile(self, w):
        w = np.asarray(w, dtype=float)
        return np.exp(-((w / self.omega_d) ** 2))

    def theta_closed(self, n):
        return 2.0 * self.lam / math.pi * math.gamma(n / 2 + 1) * self.omega_d ** (n + 2)

    def cutoff(self, n):
        return self.omega_d * math.sqrt(float(special.gammainccinv(n / 2 + 1, _TAIL)))

    def peak(self, n):
        return self.omega_d * math.sqrt((n + 1) / 2)

    def scaled(self, s):
        return Gaussian(self.lam * s * s, self.omega_d / s)


@dataclass(frozen=True)
class Discrete:
    """Explicit list of bath modes with couplings ``c`` and frequencies ``w``."""

    couplings: tuple
    frequencies: tuple

    def __post_init__(self):
        c = tuple(float(x) for x in self.couplings)
        w = tuple(float(x) for x in self.frequencies)
        if len(c) != len(w) or not c:
            raise ValueError("discrete bath needs a non-empty, matched mode list")
        if any(not x > 0 for x in w):
            raise ValueError("mode frequencies must be strictly positive")
        object.__setattr__(self, "couplings", c)
        object.__setattr__(self, "frequencies", w)

    @classmethod
    def from_modes(cls, modes):
        """Build from an iterable of ``(c_j, w_j)`` pairs."""
        modes = [tuple(m) for m in modes]
        return cls(tuple(m[0] for m in modes), tuple(m[1] for m in modes))

    @property
    def modes(self):
        return list(zip(self.couplings, self.frequencies))

    def scaled(self, s):
        return Discrete(self.couplings, tuple(w / s for w in self.frequencies))


@dataclass(frozen=True)
class DrudeLorentz:
    """Placeholder kind; its polynomial moments diverge so it is always rejected."""

    lam: float
    omega_d: float


Kind = Union[OhmicExp, Gaussian, Discrete]


@dataclass(frozen=True)
class SpectralDensity:
    """A bath spectral density at inverse temperature ``beta``.

    Parameters
    ----------
    kind : OhmicExp, Gaussian or Discrete
        Functional form of J(w).
    beta : float
        Inverse temperature (hbar = 1, so in units of inverse frequency).
    """

    kind: Kind
    beta: float

    def __post_init__(self):
        if isinstance(self.kind, DrudeLorentz):
            raise DivergentMoment(
                "Drude-Lorentz densities have divergent polynomial moments"
            )
        if not isinstance(self.kind, (OhmicExp, Gaussian, Discrete)):
            raise TypeError(f"unsupported spectral density kind {self.kind!r}")
        if not self.beta > 0:
            raise ValueError("beta must be positive")

    @property
    def is_discrete(self):
        return isinstance(self.kind, Discrete)

    @property
    def characteristic_frequency(self):
        if self.is_discrete:
            return max(self.kind.frequencies)
        return self.kind.omega_d

    def J(self, w):
        """Evaluate J(w) for a continuous density."""
        if self.is_discrete:
            raise TypeError("a discrete density has no pointwise J(w)")
        w = np.asarray(w, dtype=float)
        return 2.0 * self.kind.lam * w * self.kind.profile(w)

    def scaled(self, scale):
        """Express the density in units where ``scale.omega_c`` is 1."""
        s = scale.omega_c if isinstance(scale, FrequencyScale) else float(scale)
        return replace(self, kind=self.kind.scaled(s), beta=self.beta * s)

    def check(self, n_max):
        """Raise DivergentMoment unless theta/eta are finite through ``n_max``."""
        moment_table(self, n_max)
        return self


@dataclass(frozen=True)
class FrequencyScale:
    """Unit of frequency used for all internal computation."""

    omega_c: float = field(default=1.0)

    def __post_init__(self):
        if not self.omega_c > 0 or not math.isfinite(self.omega_c):
            raise ValueError("omega_c must be a positive finite number")

    @classmethod
    def default_for(cls, model, sd):
        """Larger of the bath frequency and the spread of the system spectrum."""
        ev = np.linalg.eigvalsh(np.asarray(model.H_S))
        spread = float(ev[-1] - ev[0]) if ev.size else 0.0
        return cls(max(sd.characteristic_frequency, spread))


def _quad_pieces(f, n, kind):
    """Integrate f over [0, cutoff] split around the integrand peak."""
    top = kind.cutoff(n)
    peak = min(kind.peak(n), top)
    edges = sorted({0.0, 0.25 * peak, 0.5 * peak, peak, 1.5 * peak, 2.0 * peak, top})
    edges = [e for e in edges if e <= top]
    # extra subdivisions keep the adaptive rule's interval budget small
    edges = np.unique(np.concatenate([edges, np.linspace(2.0 * peak, top, 9)]))
    edges = edges[edges <= top]
    vals, errs = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        v, e = integrate.quad(f, a, b, epsabs=0.0, epsrel=_QUAD_EPSREL, limit=400)
        vals.append(v)
        errs.append(e)
    total = math.fsum(vals)
    err = math.fsum(errs)
    if not math.isfinite(total) or err > 1e-10 * abs(total) + 1e-300:
        raise DivergentMoment(
            f"quadrature for order {n} did not converge (value {total}, error {err})"
        )
    return total


def _check_finite(value, name, n):
    if not math.isfinite(value):
        raise DivergentMoment(f"{name}_{n} is not finite")
    return value


@lru_cache(maxsize=4096)
def _theta(sd, n):
    kind = sd.kind
    if isinstance(kind, Discrete):
        val = math.fsum(c * c * w**n for c, w in kind.modes)
    else:
        try:
            val = kind.theta_closed(n)
        except OverflowError as exc:
            raise DivergentMoment(f"theta_{n} overflows") from exc
    return _check_finite(val, "theta", n)


@lru_cache(maxsize=4096)
def _eta(sd, n):
    kind = sd.kind
    beta = sd.beta
    if isinstance(kind, Discrete):
        val = math.fsum(
            c * c * w**n * coth(0.5 * beta * w) for c, w in kind.modes
        )
        return _check_finite(val, "eta", n)

    lam = kind.lam
    if lam == 0.0:
        return 0.0

    def integrand(w):
        # J(w) coth(beta w / 2) = 2 lam profile(w) * [w coth(beta w / 2)]
        x = 0.5 * beta * w
        wcoth = 2.0 / beta + beta * w * w / 6.0 if x < 1e-4 else w / math.tanh(x)
        return (4.0 / math.pi) * lam * float(kind.profile(w)) * wcoth * w**n

    return _check_finite(_quad_pieces(integrand, n, kind), "eta", n)


def theta(sd, n):
    """Return theta_n for a spectral density.

    Continuous kinds use the Gamma-function closed form; discrete kinds the
    exact sum ``sum_j c_j^2 w_j^n``.
    """
    n = int(n)
    if n < 0:
        raise ValueError("n must be non-negative")
    return _theta(sd, n)


def eta(sd, n):
    """Return eta_n, the thermally weighted counterpart of :func:`theta`.

    Continuous kinds are integrated with adaptive Gauss-Kronrod quadrature
    on a range truncated where the tail falls below 1e-16 of the total.
    """
    n = int(n)
    if n < 0:
        raise ValueError("n must be non-negative")
    return _eta(sd, n)


def theta_quadrature(sd, n):
    """theta_n by direct quadrature, as an independent check of the closed form."""
    kind = sd.kind
    if isinstance(kind, Discrete):
        return theta(sd, n)
    lam = kind.lam

    def integrand(w):
        return (4.0 / math.pi) * lam * w ** (n + 1) * float(kind.profile(w))

    return _quad_pieces(integrand, n, kind)


def moment_table(sd, n_max):
    """Arrays ``theta[0..n_max]`` and ``eta[0..n_max]``."""
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    th = np.array([theta(sd, n) for n in range(n_max + 1)])
    et = np.array([eta(sd, n) for n in range(n_max + 1)])
    return th, et
