"""End-to-end route from a model and a bath to ``C(t)``, ``K_1(t)`` and spectra."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel import CorrelationSeries, PadeKernel, halfline_fourier, pade_fit, solve_gqme
from .moments import MomentTable, compute_moments
from .spectral import FrequencyScale

__all__ = ["MKCTResult", "required_order", "run_mkct", "spectra"]


def required_order(n, M1, M2):
    """Highest moment order needed for an ``[M1/M2]`` fit of ``K_n``."""
    return n + M1 + M2 + 1


@dataclass
class MKCTResult:
    moments: MomentTable
    kernel: PadeKernel
    series: CorrelationSeries

    @property
    def scale(self):
        return self.moments.scale

    def time_domain(self):
        """``(t, K1, C)`` in model units."""
        t, C, K1 = self.series.unscaled()
        return t, K1, C


def run_mkct(model, sd, M1, M2, t_max, dt, n=1, scale=None, moments=None):
    """Moments, Pade kernel and GQME solution for one model.

    ``t_max`` and ``dt`` are in model units; the work is done in scaled
    units and :class:`MKCTResult` converts back on request.  A precomputed
    :class:`MomentTable` may be passed to skip the moment stage.
    """
    if n != 1:
        raise NotImplementedError("only the n = 1 kernel is propagated")
    if moments is None:
        scale = scale or FrequencyScale.default_for(model, sd)
        moments = compute_moments(model, sd, required_order(n, M1, M2), scale)
    s = moments.scale.omega_c
    taylor = moments.kernel_taylor(n, M1, M2)
    kernel = pade_fit(taylor, M1, M2, moments.scale, t_window=t_max * s)
    series = solve_gqme(moments.omega[1], kernel, t_max * s, dt * s, moments.scale)
    return MKCTResult(moments, kernel, series)


def spectra(t, K1, C, omega, apodization=None, sign=-1):
    """``K_1(w)`` (complex) and ``I(w)`` from uniformly sampled model-unit data.

    ``sign`` is the sign of the exponent in ``exp(sign * i w t)``; see
    :func:`~moment_kernel.kernel.halfline_fourier`.
    """
    t = np.asarray(t, dtype=float)
    dt = float(t[1] - t[0])
    Kw = halfline_fourier(K1, dt, omega, apodization=apodization, sign=sign)
    I = halfline_fourier(C, dt, omega, apodization=apodization, sign=sign).real
    return Kw, I
