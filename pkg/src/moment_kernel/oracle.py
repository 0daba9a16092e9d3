"""Brute-force references on a discrete bath with truncated Fock spaces.

Everything here is computed the slow, literal way: bath operators are built
from ladder matrices, the full Hamiltonian is assembled as a sparse matrix,
and moments come from repeated dense commutators.  These routines exist to
check the symbolic pipeline and are deliberately independent of it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, reduce

import numpy as np
from scipy import integrate, sparse

from .errors import DimensionCap, TruncationLeak

__all__ = [
    "FockBath",
    "DenseModel",
    "oracle_correlation",
    "oracle_moment",
    "oracle_moments",
    "oracle_bath_expectation",
    "oracle_projected_kernel",
    "materialize",
    "pure_dephasing_correlation",
    "matched_discrete",
    "kernel_from_correlation",
    "ACCEPTANCE_MODES",
]

# default two-mode acceptance bath: (c_j, w_j)
ACCEPTANCE_MODES = ((0.6, 0.8), (0.5, 1.6))


def _ladder(n):
    return sparse.diags(np.sqrt(np.arange(1, n, dtype=float)), 1, format="csr")


@dataclass(frozen=True)
class FockBath:
    """Harmonic modes ``(c_j, w_j)`` truncated at ``n_max`` levels each.

    ``n_max`` may be a single integer or one cutoff per mode.
    """

    modes: tuple
    beta: float
    n_max: object = 12

    def __post_init__(self):
        modes = tuple((float(c), float(w)) for c, w in self.modes)
        if not modes:
            raise ValueError("need at least one mode")
        if any(w <= 0 for _, w in modes):
            raise ValueError("mode frequencies must be positive")
        cut = self.n_max
        cut = (int(cut),) * len(modes) if np.isscalar(cut) else tuple(int(x) for x in cut)
        if len(cut) != len(modes) or min(cut) < 2:
            raise ValueError("need one cutoff >= 2 per mode")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "n_max", cut)

    @classmethod
    def converged(cls, modes, beta, reach, tol=1e-12):
        """Cutoffs leaving thermal weight below ``tol`` plus ``reach`` spare levels."""
        cut = tuple(
            int(math.ceil(-math.log(tol) / (beta * w))) + int(reach) + 1 for _, w in modes
        )
        return cls(tuple(modes), beta, cut)

    @classmethod
    def for_moments(cls, modes, beta, order, degree=1, tol=1e-12):
        """Cutoffs for moments up to ``order`` of a degree-``degree`` coupling.

        Each application of the coupling moves at most ``degree`` quanta, and
        only half of the ``order`` steps can climb before they must return.
        """
        return cls.converged(modes, beta, order * max(1, degree) // 2 + 2, tol)

    def enlarged(self, k):
        return FockBath(self.modes, self.beta, tuple(n + k for n in self.n_max))

    @property
    def dim(self):
        return int(np.prod(self.n_max))

    def _embed(self, op, j):
        mats = [sparse.identity(n, format="csr") for n in self.n_max]
        mats[j] = op
        return reduce(lambda a, b: sparse.kron(a, b, format="csr"), mats)

    @cached_property
    def q(self):
        """Per-mode position operators on the full bath space."""
        out = []
        for j, n in enumerate(self.n_max):
            b = _ladder(n)
            out.append(self._embed((b + b.T) / math.sqrt(2), j))
        return out

    @cached_property
    def p(self):
        out = []
        for j, n in enumerate(self.n_max):
            b = _ladder(n)
            out.append(self._embed((b - b.T) / (1j * math.sqrt(2)), j))
        return out

    @cached_property
    def H_B(self):
        return sum(
            (0.5 * w) * (pj @ pj + qj @ qj) for (c, w), qj, pj in zip(self.modes, self.q, self.p)
        ).tocsr()

    @cached_property
    def rho_diag(self):
        """Diagonal of the product thermal state, from closed-form Boltzmann weights."""
        vecs = []
        for (_, w), n in zip(self.modes, self.n_max):
            x = np.exp(-self.beta * w * np.arange(n))
            vecs.append(x / x.sum())
        return reduce(np.kron, vecs)

    def Q(self, m):
        return sum(c * w**m * qj for (c, w), qj in zip(self.modes, self.q)).tocsr()

    def P(self, n):
        return sum(c * w**n * pj for (c, w), pj in zip(self.modes, self.p)).tocsr()

    def collective_q(self):
        return self.Q(0)

    def commutator_defect(self):
        """Largest deviation of ``[q_j, p_j]`` from ``i`` on the interior levels."""
        worst = 0.0
        for (n, qj, pj) in zip(self.n_max, self.q, self.p):
            del qj, pj
            b = _ladder(n).toarray()
            q = (b + b.T) / math.sqrt(2)
            p = (b - b.T) / (1j * math.sqrt(2))
            c = q @ p - p @ q - 1j * np.eye(n)
            worst = max(worst, float(np.abs(c[: n - 1, : n - 1]).max()))
        return worst


class DenseModel:
    """Full system-plus-bath operators for a :class:`~moment_kernel.model.SystemModel`."""

    def __init__(self, model, bath, max_dim=4096):
        dim = model.dim * bath.dim
        if dim > max_dim:
            raise DimensionCap(f"dimension {dim} exceeds cap {max_dim}")
        self.model = model
        self.bath = bath
        self.dim = dim
        Ib = sparse.identity(bath.dim, format="csr")
        q = bath.collective_q()
        U = sparse.csr_matrix((bath.dim, bath.dim), dtype=complex)
        qpow = sparse.identity(bath.dim, format="csr", dtype=complex)
        for a in model.alpha:
            U = U + a * qpow
            qpow = qpow @ q
        H = (
            sparse.kron(model.H_S, Ib)
            + sparse.kron(sparse.identity(model.dim), bath.H_B)
            + sparse.kron(model.V, U)
        )
        self.H = sparse.csr_matrix(H, dtype=complex)
        self.A = sparse.kron(model.A, Ib, format="csr")
        self.rho0 = sparse.kron(model.sigma0, sparse.diags(bath.rho_diag), format="csr")

    def hermiticity_defect(self):
        return float(abs(self.H - self.H.conj().T).max()) if self.H.nnz else 0.0

    def mori(self, X, Y):
        """``(X, Y) = Tr(X Y^dagger rho0)`` for dense or sparse X."""
        B = (Y.conj().T @ self.rho0)
        B = B.toarray() if sparse.issparse(B) else B
        Xd = X.toarray() if sparse.issparse(X) else X
        return complex(np.einsum("ij,ji->", Xd, B))

    def commutator(self, X):
        """``i [H, X]`` for a dense X."""
        HX = self.H @ X
        XH = (self.H.T @ X.T).T
        return 1j * (HX - XH)


def _moments_raw(dm, n):
    X = dm.A.toarray()
    B = (dm.A.conj().T @ dm.rho0).toarray()
    out = [complex(np.einsum("ij,ji->", X, B))]
    for _ in range(n):
        X = dm.commutator(X)
        out.append(complex(np.einsum("ij,ji->", X, B)))
    return np.array(out)


def oracle_moments(model, bath, n, leak_tol=1e-6, leak_step=4, max_dim=4096):
    """Raw moments ``Tr((iL)^k A . A^dagger . sigma0 (x) rho_eq)`` for ``k = 0..n``.

    The calculation is repeated with every cutoff enlarged by ``leak_step``;
    if any moment moves by more than ``leak_tol`` (relative) a
    :class:`TruncationLeak` is raised.  Pass ``leak_tol=None`` to skip.
    """
    vals = _moments_raw(DenseModel(model, bath, max_dim), n)
    if leak_tol is not None:
        ref = _moments_raw(DenseModel(model, bath.enlarged(leak_step), 4 * max_dim), n)
        rel = np.abs(vals - ref) / np.maximum(np.abs(ref), 1e-300)
        if rel.max() > leak_tol:
            k = int(rel.argmax())
            raise TruncationLeak(
                f"moment {k} changes by {rel[k]:.2e} when cutoffs grow by {leak_step}"
            )
    return vals


def oracle_moment(model, bath, n, **kw):
    """Single raw moment of order ``n``; see :func:`oracle_moments`."""
    return oracle_moments(model, bath, n, **kw)[n]


def oracle_correlation(model, bath, t, max_dim=4096):
    """``C(t) = Tr(e^{iHt} A e^{-iHt} A sigma0 (x) rho_eq)`` by exact diagonalization.

    One eigendecomposition is reused for every time point.
    """
    dm = DenseModel(model, bath, max_dim)
    E, U = np.linalg.eigh(dm.H.toarray())
    A = dm.A.toarray()
    At = U.conj().T @ A @ U
    Bt = U.conj().T @ (A @ dm.rho0.toarray()) @ U
    W = At * Bt.T  # W[a, b] = At[a, b] Bt[b, a]
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty(t.size, dtype=complex)
    for lo in range(0, t.size, 256):
        tt = t[lo : lo + 256]
        plus = np.exp(1j * np.outer(tt, E))
        minus = np.exp(-1j * np.outer(E, tt))
        out[lo : lo + 256] = np.einsum("ta,at->t", plus, W @ minus)
    return out


def _word_operator(bath, sig):
    ops = [bath.Q(m) for m in sig.q] + [bath.P(n) for n in sig.p]
    return ops


def oracle_bath_expectation(sig, bath):
    """``Tr(prod Q prod P rho_eq)`` from dense Fock-space products."""
    M = sparse.diags(bath.rho_diag.astype(complex), format="csr")
    for op in reversed(_word_operator(bath, sig)):
        M = op @ M
    return complex(M.diagonal().sum())


def materialize(state, bath):
    """Dense matrix of a hierarchy state on ``system (x) truncated bath``."""
    d = state.dim
    out = np.zeros((d * bath.dim, d * bath.dim), dtype=complex)
    eye = sparse.identity(bath.dim, format="csr", dtype=complex)
    for sig, mat in state.terms.items():
        mono = reduce(lambda a, b: a @ b, _word_operator(bath, sig), eye)
        out += np.kron(mat, mono.toarray())
    return out


def oracle_projected_kernel(model, bath, n, m, max_dim=4096):
    """``K_n^(m)`` straight from its definition with an explicit Mori projector.

    ``((iL)^n (Q iL)^{m+1} A, A) / (A, A)`` with ``Q = 1 - P`` and
    ``P X = (X, A) A / (A, A)``.
    """
    dm = DenseModel(model, bath, max_dim)
    A = dm.A.toarray()
    norm = dm.mori(A, A)
    X = A
    for _ in range(m + 1):
        X = dm.commutator(X)
        X = X - dm.mori(X, A) / norm * A
    for _ in range(n):
        X = dm.commutator(X)
    return dm.mori(X, A) / norm


def matched_discrete(sd, n_modes, w_max=None):
    """Midpoint discretization of a continuous density, ``c_j^2 = (2/pi) J(w_j) dw``.

    The result reproduces the continuum up to times of order ``2 pi / dw``,
    after which the finite mode set recurs.
    """
    from .spectral import Discrete, SpectralDensity

    if sd.is_discrete:
        return sd
    top = w_max or sd.kind.cutoff(2)
    dw = top / n_modes
    w = dw * (np.arange(n_modes) + 0.5)
    c = np.sqrt(2 / math.pi * sd.J(w) * dw)
    return SpectralDensity(Discrete(tuple(c), tuple(w)), sd.beta)


def pure_dephasing_correlation(delta, alpha1, sd, t, derivatives=False):
    """Exact ``C(t)`` for ``H_S = (delta/2) sz``, ``V = sz``, linear coupling ``alpha1 q``.

    With ``[H_S, V] = 0`` the bath enters only through the Gaussian phase
    ``exp(-2 alpha1^2 sum_j c_j^2 coth(beta w_j/2) (1 - cos w_j t) / w_j^2)``,
    which for a continuous density becomes an integral over ``(2/pi) J(w)``.
    Initial state ``|0><0|`` (``sz = +1``), ``A = sx``.

    With ``derivatives=True`` (discrete baths only) returns ``(C, C', C'')``.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    beta = sd.beta
    if sd.is_discrete:
        c = np.array(sd.kind.couplings)
        w = np.array(sd.kind.frequencies)
        g = 2 * alpha1**2 * c**2 / np.tanh(0.5 * beta * w)
        wt = np.outer(t, w)
        phi = (g / w**2 * (1 - np.cos(wt))).sum(axis=1)
        C = np.exp(1j * delta * t - phi)
        if not derivatives:
            return C
        d1 = (g / w * np.sin(wt)).sum(axis=1)
        d2 = (g * np.cos(wt)).sum(axis=1)
        r = 1j * delta - d1
        return C, r * C, (r * r - d2) * C
    if derivatives:
        raise ValueError("derivatives are only available for a discrete bath")
    kind = sd.kind
    top = kind.cutoff(2)

    def f(x, tt):
        # J(w) coth(beta w/2) (1 - cos w t) / w^2, finite as w -> 0
        wt = x * tt
        omc = 2 * math.sin(0.5 * wt) ** 2
        xc = 0.5 * beta * x
        wcoth = 2.0 / beta if xc < 1e-8 else x / math.tanh(xc)
        return 2 * kind.lam * float(kind.profile(x)) * wcoth * omc / (x * x)

    expo = np.empty(t.size)
    for k, tt in enumerate(t):
        pts = np.linspace(0, top, 41)
        parts = [
            integrate.quad(f, a, b, args=(tt,), epsabs=1e-14, epsrel=1e-12, limit=400)[0]
            for a, b in zip(pts[:-1], pts[1:])
        ]
        expo[k] = (2 / math.pi) * math.fsum(parts)
    return np.exp(1j * delta * t) * np.exp(-2 * alpha1**2 * expo)


def kernel_from_correlation(C, dC, ddC, dt):
    """Invert the GQME for ``K_1`` given ``C`` and its first two derivatives.

    Differentiating ``C' = Om_1 C + int_0^t K(t - s) C(s) ds`` gives the
    second-kind equation ``K(t) = g(t) - int_0^t K(s) C'(t - s) ds`` with
    ``g = C'' - Om_1 C'`` and ``Om_1 = C'(0)``, solved here by the trapezoidal
    rule on a uniform grid with ``C(0) = 1``.
    """
    C, dC, ddC = (np.asarray(x, dtype=complex) for x in (C, dC, ddC))
    om1 = dC[0]
    g = ddC - om1 * dC
    n = g.size
    K = np.zeros(n, dtype=complex)
    K[0] = g[0] / C[0]
    diag = C[0] + 0.5 * dt * dC[0]
    for k in range(1, n):
        acc = 0.5 * K[0] * dC[k]
        if k > 1:
            acc += np.dot(K[1:k], dC[k - 1 : 0 : -1])
        K[k] = (g[k] - dt * acc) / diag
    return K
