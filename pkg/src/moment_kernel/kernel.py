"""Pade memory kernel, the scalar GQME solver, and half-line Fourier transforms."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import PadeFallbackWarning, PoleInWindow, SingularPade, TruncationWarning, Unstable
from .spectral import FrequencyScale

__all__ = [
    "PadeKernel",
    "CorrelationSeries",
    "pade_fit",
    "kernel_taylor",
    "solve_gqme",
    "halfline_fourier",
    "lineshape",
    "decay_time",
    "REEXPANSION_RTOL",
]

REEXPANSION_RTOL = 1e-10
COND_LIMIT = 1e12
DOUBLET_TOL = 1e-6
UNSTABLE_LIMIT = 1e3


@dataclass
class PadeKernel:
    """Rational function ``(a_0 + ... + a_M1 t^M1) / (1 + b_1 t + ... + b_M2 t^M2)``."""

    a: np.ndarray
    b: np.ndarray
    scale: FrequencyScale = field(default_factory=FrequencyScale)

    @property
    def M1(self):
        return len(self.a) - 1

    @property
    def M2(self):
        return len(self.b)

    @property
    def denominator(self):
        return np.concatenate([[1.0 + 0j], self.b])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        # np.polyval wants the highest power first
        num = np.polyval(self.a[::-1], t)
        den = np.polyval(self.denominator[::-1], t)
        return num / den

    def taylor(self, order):
        """Power-series coefficients of the rational function through ``order``."""
        q = self.denominator
        out = np.zeros(order + 1, dtype=complex)
        for k in range(order + 1):
            acc = self.a[k] if k < len(self.a) else 0.0
            for j in range(1, min(k, self.M2) + 1):
                acc -= q[j] * out[k - j]
            out[k] = acc
        return out

    def poles(self):
        if self.M2 == 0:
            return np.array([], dtype=complex)
        return np.roots(self.denominator[::-1])

    def check_window(self, t_max, tol=1e-6):
        """Raise PoleInWindow if the denominator has a (near-)real root in [0, t_max]."""
        for r in self.poles():
            if abs(r.imag) <= tol * max(1.0, abs(r)) and -tol <= r.real <= t_max:
                raise PoleInWindow(f"Pade denominator has a root at t = {r:.6g}")
        return self


def pade_fit(taylor, M1, M2, scale=None, t_window=None):
    """``[M1/M2]`` Pade approximant matching ``taylor[0..M1+M2]``.

    The denominator solves the Toeplitz system ``sum_j b_j c_{k-j} = 0`` for
    ``k = M1+1..M1+M2``; the numerator is then ``a_k = sum_j b_j c_{k-j}``.
    A system with condition number above 1e12 is solved by least squares
    with a :class:`PadeFallbackWarning`.  If the result still fails to
    reproduce the input coefficients to 1e-10 :class:`SingularPade` is
    raised; the error is relative to the largest input coefficient.  For
    conditioning the system is solved for the series in ``t / rho``, with
    ``rho`` the fitted geometric decay rate of the coefficients.  When the
    check fails because of a pole-zero pair that cancels to within 1e-6,
    the pair is removed (with a :class:`PadeFallbackWarning`) and the
    reduced approximant is checked instead.
    """
    c = np.asarray(taylor, dtype=complex)
    M1, M2 = int(M1), int(M2)
    if M1 < 0 or M2 < 0:
        raise ValueError("Pade orders must be non-negative")
    if M1 + M2 > len(c) - 1:
        raise ValueError(f"[{M1}/{M2}] needs {M1 + M2 + 1} coefficients, got {len(c)}")
    c = c[: M1 + M2 + 1]
    # fit in t' = t / rho so that |c_k rho^k| has no overall trend
    rho = _series_radius(c)
    cs = c * rho ** np.arange(c.size)

    def coef(k):
        return cs[k] if k >= 0 else 0.0

    if M2:
        T = np.array([[coef(k - j) for j in range(1, M2 + 1)] for k in range(M1 + 1, M1 + M2 + 1)])
        rhs = -cs[M1 + 1 : M1 + M2 + 1]
        cond = np.linalg.cond(T) if np.all(np.isfinite(T)) else np.inf
        if not np.isfinite(cond):
            raise SingularPade(f"[{M1}/{M2}] Toeplitz system is singular")
        if cond > COND_LIMIT:
            warnings.warn(
                f"[{M1}/{M2}] Toeplitz condition number {cond:.2e}; using least squares",
                PadeFallbackWarning,
                stacklevel=2,
            )
            b = np.linalg.lstsq(T, rhs, rcond=None)[0]
        else:
            b = np.linalg.solve(T, rhs)
    else:
        b = np.zeros(0, dtype=complex)

    q = np.concatenate([[1.0], b])
    a = np.array([sum(q[j] * coef(k - j) for j in range(min(k, M2) + 1)) for k in range(M1 + 1)])
    a, b = a.astype(complex), b.astype(complex)
    kern = _unscaled_kernel(a, b, rho, scale)
    err = _reexpansion_error(kern, c)
    if not err <= REEXPANSION_RTOL:
        # a spurious pole-zero pair makes the re-expansion unstable; retry without it
        a, b, dropped = _cancel_doublets(a, b)
        if dropped:
            kern = _unscaled_kernel(a, b, rho, scale)
            err = _reexpansion_error(kern, c)
            if err <= REEXPANSION_RTOL:
                warnings.warn(
                    f"[{M1}/{M2}] fit had {dropped} cancelling pole-zero pair(s); "
                    f"reduced to [{kern.M1}/{kern.M2}]",
                    PadeFallbackWarning,
                    stacklevel=2,
                )
    if not err <= REEXPANSION_RTOL:
        raise SingularPade(f"[{M1}/{M2}] fit misses its input by {err:.2e} (relative)")
    if t_window is not None:
        kern.check_window(t_window)
    return kern


def _unscaled_kernel(a, b, rho, scale):
    return PadeKernel(
        a / rho ** np.arange(len(a)),
        b / rho ** np.arange(1, len(b) + 1),
        scale or FrequencyScale(),
    )


def _reexpansion_error(kern, c):
    ref = np.abs(c).max()
    err = np.abs(kern.taylor(len(c) - 1) - c).max()
    if not np.isfinite(err):
        return np.inf
    return err / ref if ref > 0 else err


def _cancel_doublets(a, b, tol=DOUBLET_TOL):
    """Remove numerator/denominator root pairs closer than ``tol`` (relative).

    Such pairs (Froissart doublets) appear when the requested order exceeds
    what the data supports; they leave the function unchanged to rounding
    error but make its power series and its values near the pair unstable.
    """
    if len(b) == 0 or len(a) < 2:
        return a, b, 0
    zeros = list(np.roots(a[::-1]))
    poles = list(np.roots(np.concatenate([[1.0], b])[::-1]))
    dropped = 0
    for p in list(poles):
        if not zeros:
            break
        d = [abs(z - p) for z in zeros]
        i = int(np.argmin(d))
        if d[i] <= tol * max(1.0, abs(p)):
            zeros.pop(i)
            poles.remove(p)
            dropped += 1
    if not dropped:
        return a, b, 0
    # rebuild from roots; the ratio of leading coefficients is unchanged
    top_a = np.trim_zeros(a, "b")
    top_b = np.trim_zeros(np.concatenate([[1.0], b]), "b")
    lead = top_a[-1] / top_b[-1]
    num = lead * np.poly(zeros)[::-1] if zeros else np.array([lead])
    den = np.poly(poles)[::-1] if poles else np.array([1.0 + 0j])
    num, den = num / den[0], den / den[0]
    return num.astype(complex), den[1:].astype(complex), dropped


def _series_radius(c):
    """Geometric decay rate of ``|c_k|`` from a log-linear least-squares fit."""
    k = np.flatnonzero(np.abs(c) > 0)
    if k.size < 2:
        return 1.0
    slope = np.polyfit(k, np.log(np.abs(c[k])), 1)[0]
    return float(np.exp(-slope))


def kernel_taylor(moments, n=1, M1=None, M2=None):
    """Taylor coefficients ``K_n^(j)/j!`` of the order-``n`` kernel (scaled units)."""
    return moments.kernel_taylor(n, M1, M2)


@dataclass
class CorrelationSeries:
    """Uniformly sampled ``C(t)`` and ``K_1(t)`` in scaled units."""

    t: np.ndarray
    C: np.ndarray
    K1: np.ndarray
    dt: float
    scale: FrequencyScale = field(default_factory=FrequencyScale)

    def unscaled(self):
        """``(t, C, K1)`` in model units."""
        s = self.scale.omega_c
        return self.t / s, self.C, self.K1 * s * s


def _phi(z):
    """``phi1(z) = (e^z - 1)/z`` and ``phi2(z) = (e^z - 1 - z)/z^2``."""
    if abs(z) < 1e-3:
        # Taylor series; the omitted terms are below 1e-18
        p1 = 1 + z / 2 + z * z / 6 + z**3 / 24 + z**4 / 120 + z**5 / 720
        p2 = 0.5 + z / 6 + z * z / 24 + z**3 / 120 + z**4 / 720 + z**5 / 5040
        return p1, p2
    ez = complex(np.exp(z))
    return (ez - 1) / z, (ez - 1 - z) / (z * z)


def solve_gqme(omega1, kernel, t_max, dt, scale=None, unstable_limit=UNSTABLE_LIMIT):
    """Integrate ``C'(t) = omega1 C(t) + int_0^t K(t - s) C(s) ds`` with ``C(0) = 1``.

    The ``omega1 C`` term is propagated exactly by its exponential; the
    memory integral uses the trapezoidal rule and is interpolated linearly
    across each step.  The implicit dependence on the new value through the
    end-point weight ``dt/2 K(0)`` is linear and solved directly, so the
    scheme is second order in ``dt`` and exact when ``K = 0``.

    Parameters
    ----------
    omega1 : complex
        Frequency term (``Omega_1``).
    kernel : PadeKernel, callable or array
        Memory kernel; an array is taken as samples on the output grid.
    t_max, dt : float
        Final time and step.
    """
    if not dt > 0 or not t_max > 0:
        raise ValueError("dt and t_max must be positive")
    n = int(round(t_max / dt))
    t = dt * np.arange(n + 1)
    if isinstance(kernel, PadeKernel):
        kernel.check_window(t[-1])
        scale = scale or kernel.scale
    if callable(kernel):
        K = np.asarray(kernel(t), dtype=complex)
    else:
        K = np.asarray(kernel, dtype=complex)
        if K.shape != t.shape:
            raise ValueError(f"kernel samples must have shape {t.shape}")
    if not np.all(np.isfinite(K)):
        raise Unstable("kernel is not finite on the time grid")

    z = complex(omega1) * dt
    ez = complex(np.exp(z))
    p1, p2 = _phi(z)
    w_old = dt * (p1 - p2)
    w_new = dt * p2
    denom = 1.0 - w_new * 0.5 * dt * K[0]

    C = np.zeros(n + 1, dtype=complex)
    C[0] = 1.0
    I_prev = 0j
    Krev = K[::-1].copy()  # Krev[n - k] = K[k]
    for k in range(n):
        # memory integral at t_{k+1} without the implicit C_{k+1} end point
        s = 0.5 * K[k + 1] * C[0]
        if k:
            s += np.dot(Krev[n - k : n], C[1 : k + 1])
        S = dt * s
        C[k + 1] = (ez * C[k] + w_old * I_prev + w_new * S) / denom
        I_prev = S + 0.5 * dt * K[0] * C[k + 1]
        if not abs(C[k + 1]) < unstable_limit:
            raise Unstable(f"|C| exceeded {unstable_limit} at t = {t[k + 1]:.6g}")
    return CorrelationSeries(t, C, K, dt, scale or FrequencyScale())


def halfline_fourier(values, dt, omega, apodization=None, sign=-1, tail_tol=1e-3):
    """``int_0^T f(t) exp(sign * i w t) dt`` by the trapezoidal rule.

    ``sign = -1`` puts the peak of ``exp(i w0 t - g t)`` at ``w = +w0``.  An
    optional ``apodization`` rate multiplies the signal by ``exp(-rate t)``.
    A :class:`TruncationWarning` is issued when no apodization is given and
    the tail of ``|f|`` is still above ``tail_tol`` of ``|f(0)|``.
    """
    f = np.asarray(values, dtype=complex)
    t = dt * np.arange(f.size)
    if apodization:
        f = f * np.exp(-apodization * t)
    else:
        tail = np.abs(f[-max(1, f.size // 20) :]).max()
        if tail > tail_tol * abs(f[0]):
            warnings.warn(
                f"signal tail is {tail / abs(f[0]):.2e} of its initial value; "
                "transform is truncated",
                TruncationWarning,
                stacklevel=2,
            )
    w = np.full(f.size, dt)
    w[0] = w[-1] = 0.5 * dt
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    out = np.empty(omega.size, dtype=complex)
    fw = f * w
    for lo in range(0, omega.size, 128):
        ph = np.exp(sign * 1j * np.outer(omega[lo : lo + 128], t))
        out[lo : lo + 128] = ph @ fw
    return out


def lineshape(C, dt, omega, **kw):
    """``Re`` of the half-line transform of ``C``; unnormalized."""
    return halfline_fourier(C, dt, omega, **kw).real


def decay_time(t, x):
    """First time after which ``|x|`` stays below ``|x(0)| / e`` for the rest of the record."""
    a = np.abs(np.asarray(x))
    thr = a[0] / math.e
    # running maximum taken from the end of the record
    env = np.maximum.accumulate(a[::-1])[::-1]
    idx = np.flatnonzero(env < thr)
    if idx.size == 0:
        return math.inf
    return float(np.asarray(t)[idx[0]])
