"""Moments of the correlation function from the symbolic hierarchy.

A hierarchy term ``O (x) prod Q prod P`` contributes to the Mori product
``(X, A) = Tr(X A^dagger sigma0 (x) rho_eq)`` through the product of a system
trace and a thermal bath expectation.  The bath is Gaussian, so expectations
of ordered monomials are sums over perfect pairings with two-point values

    <Q_m Q_m'> = eta_{m+m'} / 2
    <P_n P_n'> = eta_{n+n'} / 2
    <Q_m P_n>  = i theta_{m+n} / 2      (Q to the left of P)
"""
from __future__ import annotations

import hashlib
import json
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .algebra import BathSignature, Liouvillian
from .errors import InsufficientOrder, OverflowRisk
from .spectral import FrequencyScale, eta, theta

__all__ = [
    "WickEvaluator",
    "bath_expectation",
    "count_pairings",
    "mori_product",
    "MomentTable",
    "compute_moments",
    "auxiliary_moments",
    "kernel_derivatives",
    "kernel_derivatives_stepwise",
]

OVERFLOW_LIMIT = 1e12


class WickEvaluator:
    """Thermal expectation values of canonical bath monomials.

    Pairing is done by always contracting the first remaining factor, and
    the result for every intermediate ``(q, p)`` multiset pair is memoized;
    signatures recur heavily between moments so the cache does most of the work.
    """

    def __init__(self, sd):
        self.sd = sd
        self._cache = {((), ()): 1.0 + 0j}
        self._theta = {}
        self._eta = {}

    def theta(self, n):
        v = self._theta.get(n)
        if v is None:
            v = self._theta[n] = theta(self.sd, n)
        return v

    def eta(self, n):
        v = self._eta.get(n)
        if v is None:
            v = self._eta[n] = eta(self.sd, n)
        return v

    def pair_qq(self, a, b):
        return 0.5 * self.eta(a + b)

    def pair_pp(self, a, b):
        return 0.5 * self.eta(a + b)

    def pair_qp(self, a, b):
        return 0.5j * self.theta(a + b)

    def __call__(self, sig):
        if (len(sig[0]) + len(sig[1])) % 2:
            return 0j
        return self._expect(tuple(sig[0]), tuple(sig[1]))

    def _expect(self, q, p):
        key = (q, p)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        total = 0j
        if q:
            head, rest = q[0], list(q[1:])
            for m, k in Counter(rest).items():
                sub = list(rest)
                sub.remove(m)
                total += k * self.pair_qq(head, m) * self._expect(tuple(sub), p)
            for n, k in Counter(p).items():
                sub = list(p)
                sub.remove(n)
                total += k * self.pair_qp(head, n) * self._expect(tuple(rest), tuple(sub))
        else:
            head, rest = p[0], list(p[1:])
            for n, k in Counter(rest).items():
                sub = list(rest)
                sub.remove(n)
                total += k * self.pair_pp(head, n) * self._expect((), tuple(sub))
        self._cache[key] = total
        return total


def count_pairings(sig):
    """Number of perfect pairings enumerated for ``sig``; ``(2k-1)!!`` for degree 2k."""

    class _Counter(WickEvaluator):
        def __init__(self):
            self._cache = {((), ()): 1}

        def pair_qq(self, a, b):
            return 1

        pair_pp = pair_qp = pair_qq

    c = _Counter()
    if (len(sig[0]) + len(sig[1])) % 2:
        return 0
    return int(c._expect(tuple(sig[0]), tuple(sig[1])).real)


def bath_expectation(sig, sd):
    """``Tr(prod Q prod P rho_eq)`` for a canonical signature."""
    return WickEvaluator(sd)(BathSignature.make(*sig))


def _fsum_complex(values):
    values = list(values)
    return complex(math.fsum(v.real for v in values), math.fsum(v.imag for v in values))


def mori_product(state, model, sd=None, wick=None):
    """``sum_sig Tr(O_sig A^dagger sigma0) <sig>`` with compensated summation."""
    wick = wick if wick is not None else WickEvaluator(sd)
    B = model.A.conj().T @ model.sigma0
    contrib = []
    for sig, O in state.terms.items():
        if sig.degree % 2:
            continue
        s = np.einsum("ij,ji->", O, B)
        if s != 0:
            contrib.append(s * wick(sig))
    return _fsum_complex(contrib)


def auxiliary_moments(omega):
    """``Om~_m = Om_{m+1} - sum_{k<m} Om~_k Om_{m-k}`` for ``m = 0..N-1``."""
    omega = np.asarray(omega, dtype=complex)
    N = len(omega) - 1
    aux = np.zeros(N, dtype=complex)
    for m in range(N):
        aux[m] = omega[m + 1] - sum(aux[k] * omega[m - k] for k in range(m))
    return aux


def kernel_derivatives(omega, aux=None):
    """Table ``K[n, m] = K_n^(m)`` for ``n + m <= N - 1`` (NaN elsewhere).

    Uses the closed expansion ``K_n^(m) = Om_{m+n+1} - sum_{j=0}^m Om_{n+j} Om~_{m-j}``.
    """
    omega = np.asarray(omega, dtype=complex)
    aux = auxiliary_moments(omega) if aux is None else aux
    N = len(omega) - 1
    K = np.full((N, N), np.nan + 0j)
    for n in range(N):
        for m in range(N - n):
            K[n, m] = omega[m + n + 1] - sum(omega[n + j] * aux[m - j] for j in range(m + 1))
    return K


def kernel_derivatives_stepwise(omega, aux=None):
    """Same table from ``K_n^(m) = K_{n+1}^(m-1) - Om_n Om~_m`` and ``K_n^(0)``."""
    omega = np.asarray(omega, dtype=complex)
    aux = auxiliary_moments(omega) if aux is None else aux
    N = len(omega) - 1
    K = np.full((N, N), np.nan + 0j)
    for n in range(N):
        K[n, 0] = omega[n + 1] - omega[n] * omega[1]
    for m in range(1, N):
        for n in range(N - m):
            K[n, m] = K[n + 1, m - 1] - omega[n] * aux[m]
    return K


@dataclass
class MomentTable:
    """Moments, auxiliary moments and kernel derivatives in scaled units.

    ``omega[n]`` carries units of ``scale.omega_c ** n``; use :meth:`unscaled`
    for values in the units of the model.
    """

    omega: np.ndarray
    omega_tilde: np.ndarray
    K0: np.ndarray
    norm: complex
    scale: FrequencyScale = field(default_factory=FrequencyScale)
    model_hash: str = ""

    @property
    def N(self):
        return len(self.omega) - 1

    @classmethod
    def from_moments(cls, omega, norm=1.0, scale=None, model_hash=""):
        omega = np.asarray(omega, dtype=complex)
        aux = auxiliary_moments(omega)
        return cls(
            omega,
            aux,
            kernel_derivatives(omega, aux),
            complex(norm),
            scale or FrequencyScale(),
            model_hash,
        )

    def unscaled(self):
        """Moments, auxiliary moments and ``K_n^(m)`` in model units."""
        s = self.scale.omega_c
        n = np.arange(self.N + 1)
        om = self.omega * s**n
        aux = self.omega_tilde * s ** (n[:-1] + 1)
        nn, mm = np.meshgrid(n[:-1], n[:-1], indexing="ij")
        K = self.K0 * s ** (nn + mm + 1.0)
        return om, aux, K

    def kernel_taylor(self, n=1, M1=None, M2=None):
        """``K_n^(j) / j!`` for ``j = 0..N-n-1`` (scaled units)."""
        if n < 1:
            raise ValueError("kernel order n must be >= 1")
        if M1 is not None and M2 is not None and self.N < n + M1 + M2 + 1:
            raise InsufficientOrder(
                f"[{M1}/{M2}] Pade of K_{n} needs N >= {n + M1 + M2 + 1}, have {self.N}"
            )
        if self.N - n < 1:
            raise InsufficientOrder(f"no Taylor data for K_{n} with N = {self.N}")
        j = np.arange(self.N - n)
        fact = np.array([math.factorial(int(k)) for k in j], dtype=float)
        return self.K0[n, : self.N - n] / fact

    def to_json(self, **meta):
        def pairs(a):
            return [[float(z.real), float(z.imag)] for z in np.asarray(a).ravel()]

        payload = {
            "N": self.N,
            "scale": self.scale.omega_c,
            "model_hash": self.model_hash,
            "units": "scaled: entry of order n carries omega_c**n",
            "norm": [self.norm.real, self.norm.imag],
            "omega": pairs(self.omega),
            "omega_tilde": pairs(self.omega_tilde),
        }
        payload.update(meta)
        return json.dumps(payload, indent=1)

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        om = np.array([complex(a, b) for a, b in d["omega"]])
        return cls.from_moments(
            om, complex(*d["norm"]), FrequencyScale(d["scale"]), d.get("model_hash", "")
        )

    def digest(self):
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


def compute_moments(model, sd, N, scale=None):
    """Moments ``Om_0..Om_N`` plus derived tables for ``model`` coupled to ``sd``.

    Everything is evaluated in units where ``scale.omega_c = 1``; when
    ``scale`` is None the default from :meth:`FrequencyScale.default_for` is used.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    scale = scale or FrequencyScale.default_for(model, sd)
    m_s = model.scaled(scale.omega_c)
    sd_s = sd.scaled(scale)
    L = Liouvillian(m_s, sd_s)
    wick = WickEvaluator(sd_s)

    raw = []
    for state in L.iterate(m_s.A, N):
        raw.append(mori_product(state, m_s, wick=wick))
    norm = raw[0]
    if norm == 0:
        raise ZeroDivisionError("(A, A) vanishes for this observable and initial state")
    omega = np.array(raw) / norm
    omega[0] = 1.0
    big = np.abs(omega).max()
    if big > OVERFLOW_LIMIT:
        warnings.warn(
            f"max |Omega_n| = {big:.3e} in scaled units; consider a larger frequency scale",
            OverflowRisk,
            stacklevel=2,
        )
    return MomentTable.from_moments(omega, norm, scale, model.digest())
