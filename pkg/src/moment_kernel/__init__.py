"""Correlation functions and memory kernels of open quantum systems from static moments.

The pipeline is spectral density -> symbolic Liouvillian hierarchy -> moments
-> Pade memory kernel -> generalized quantum master equation.  A brute-force
exact-diagonalization oracle on small discrete baths is included for checks.
"""
from .algebra import BathSignature, HierarchyState, Liouvillian, canonicalize
from .errors import (
    ConfigError,
    DimensionCap,
    DivergentMoment,
    InsufficientOrder,
    MomentKernelError,
    OverflowRisk,
    PadeFallbackWarning,
    PoleInWindow,
    SingularPade,
    TruncationLeak,
    TruncationWarning,
    Unstable,
)
from .kernel import (
    CorrelationSeries,
    PadeKernel,
    decay_time,
    halfline_fourier,
    kernel_taylor,
    lineshape,
    pade_fit,
    solve_gqme,
)
from .model import PAULI, SystemModel, displaced_tls, spin_boson
from .moments import MomentTable, bath_expectation, compute_moments, mori_product
from .pipeline import MKCTResult, run_mkct, spectra
from .spectral import (
    Discrete,
    DrudeLorentz,
    FrequencyScale,
    Gaussian,
    OhmicExp,
    SpectralDensity,
    eta,
    moment_table,
    theta,
)

__version__ = "0.1.0"
