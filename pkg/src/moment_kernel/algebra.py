"""Symbolic hierarchy for repeated Liouvillian application.

Every operator reachable from ``A`` by repeated application of
``iL = iL_S + iL_B + iL_SB`` is a finite sum

    sum_sig  O_sig  (x)  Q_{m_1} Q_{m_2} ... P_{n_1} P_{n_2} ...

of system matrices times bath monomials in the generalized modes
``Q_m = sum_j c_j w_j^m q_j`` and ``P_n = sum_j c_j w_j^n p_j``.  Position
factors always stand to the left of momentum factors; within each block the
factors commute, so a monomial is labelled by two sorted tuples.

The only non-trivial commutator is ``[Q_m, P_n] = i theta_{m+n}``, used by
:func:`canonical_word` to bring any product of factors into that order.
"""
from __future__ import annotations

import bisect
from collections import Counter, defaultdict
from typing import NamedTuple

import numpy as np
from scipy import sparse

from .spectral import theta as _theta_of

__all__ = [
    "BathSignature",
    "EMPTY",
    "HierarchyState",
    "Liouvillian",
    "canonical_word",
    "canonicalize",
    "apply_iL_S",
    "apply_iL_B",
    "apply_iL_SB",
    "apply_iL",
    "dump",
    "load_dump",
    "DROP_TOL",
]

DROP_TOL = 1e-14


class BathSignature(NamedTuple):
    """Sorted position orders ``q`` and momentum orders ``p`` of a bath monomial."""

    q: tuple = ()
    p: tuple = ()

    @classmethod
    def make(cls, q=(), p=()):
        return cls(tuple(sorted(q)), tuple(sorted(p)))

    @property
    def degree(self):
        return len(self.q) + len(self.p)

    def add_q(self, m):
        q = list(self.q)
        bisect.insort(q, m)
        return BathSignature(tuple(q), self.p)

    def add_p(self, n):
        p = list(self.p)
        bisect.insort(p, n)
        return BathSignature(self.q, tuple(p))

    def drop_q(self, m):
        q = list(self.q)
        q.remove(m)
        return BathSignature(tuple(q), self.p)

    def drop_p(self, n):
        p = list(self.p)
        p.remove(n)
        return BathSignature(self.q, tuple(p))

    def factors(self):
        """The monomial as an explicit factor sequence."""
        return tuple(("Q", m) for m in self.q) + tuple(("P", n) for n in self.p)

    def __str__(self):
        q = " ".join(f"Q{m}" for m in self.q)
        p = " ".join(f"P{n}" for n in self.p)
        return (q + " " + p).strip() or "1"


EMPTY = BathSignature()


def _times_factor(expansion, factor, theta):
    """Right-multiply a canonical expansion by one factor and re-canonicalize."""
    kind, order = factor
    out = defaultdict(complex)
    if kind == "P":
        for sig, c in expansion.items():
            out[sig.add_p(order)] += c
        return out
    if kind != "Q":
        raise ValueError(f"unknown factor {factor!r}")
    # (prod Q)(prod P) Q_m = (prod Q) Q_m (prod P) + sum_b [P_b, Q_m] (prod Q)(prod P without b)
    for sig, c in expansion.items():
        out[sig.add_q(order)] += c
        for n, count in Counter(sig.p).items():
            out[sig.drop_p(n)] += c * count * (-1j) * theta(order + n)
    return out


def canonical_word(factors, theta):
    """Expand an arbitrary product of ``Q``/``P`` factors into canonical monomials.

    Parameters
    ----------
    factors : sequence of (str, int)
        Factor sequence, e.g. ``[("P", 1), ("Q", 0), ("Q", 2)]``.
    theta : callable
        ``theta(n)`` giving the spectral moment of order ``n``.

    Returns
    -------
    dict
        Mapping ``BathSignature -> complex`` with zero entries removed.
    """
    expansion = {EMPTY: 1.0 + 0j}
    for f in factors:
        expansion = _times_factor(expansion, f, theta)
    return {s: c for s, c in expansion.items() if c != 0}


class HierarchyState:
    """Operator ``sum_sig O_sig (x) monomial(sig)`` keyed by bath signature."""

    __slots__ = ("terms", "dim")

    def __init__(self, terms=None, dim=None, drop_tol=DROP_TOL):
        kept = {}
        for sig, mat in (terms or {}).items():
            mat = np.asarray(mat, dtype=complex)
            if dim is None:
                dim = mat.shape[0]
            if np.linalg.norm(mat) > drop_tol:
                kept[sig if isinstance(sig, BathSignature) else BathSignature.make(*sig)] = mat
        self.terms = kept
        self.dim = dim

    @classmethod
    def initial(cls, A):
        A = np.asarray(A, dtype=complex)
        return cls({EMPTY: A}, dim=A.shape[0])

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms.items())

    def __getitem__(self, sig):
        return self.terms[sig]

    def get(self, sig, default=None):
        return self.terms.get(sig, default)

    @property
    def max_degree(self):
        return max((s.degree for s in self.terms), default=0)

    def __add__(self, other):
        out = dict(self.terms)
        for sig, mat in other.terms.items():
            out[sig] = out[sig] + mat if sig in out else mat
        return HierarchyState(out, self.dim or other.dim)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, scalar):
        return HierarchyState({s: scalar * m for s, m in self.terms.items()}, self.dim)

    __rmul__ = __mul__

    def allclose(self, other, rtol=1e-12, atol=1e-14):
        keys = set(self.terms) | set(other.terms)
        zero = np.zeros((self.dim or other.dim,) * 2, dtype=complex)
        return all(
            np.allclose(self.terms.get(k, zero), other.terms.get(k, zero), rtol=rtol, atol=atol)
            for k in keys
        )

    def __repr__(self):
        return f"HierarchyState({len(self.terms)} terms, dim={self.dim})"


class Liouvillian:
    """``iL`` acting on hierarchy states for one model and one bath.

    Per-signature expansions of ``iL_B`` and ``iL_SB`` depend only on the
    signature, the coupling polynomial and theta, so they are cached; one
    application then reduces to a sparse matrix product over signatures.
    """

    def __init__(self, model, sd, drop_tol=DROP_TOL):
        self.model = model
        self.sd = sd
        self.drop_tol = drop_tol
        self.H = np.asarray(model.H_S)
        self.V = np.asarray(model.V)
        self.alpha = model.alpha
        self._bath = {}
        self._right = {}
        self._theta = {}

    def theta(self, n):
        try:
            return self._theta[n]
        except KeyError:
            v = self._theta[n] = _theta_of(self.sd, n)
            return v

    def bath_expansion(self, sig):
        """Canonical expansion of ``iL_B`` applied to the monomial ``sig``."""
        hit = self._bath.get(sig)
        if hit is not None:
            return hit
        words = sig.factors()
        out = defaultdict(complex)
        for pos, (kind, order) in enumerate(words):
            if kind == "Q":
                new, sign = ("P", order + 1), 1.0
            else:
                new, sign = ("Q", order + 1), -1.0
            word = words[:pos] + (new,) + words[pos + 1 :]
            for s, c in canonical_word(word, self.theta).items():
                out[s] += sign * c
        hit = self._bath[sig] = tuple((s, c) for s, c in out.items() if c != 0)
        return hit

    def coupling_left(self, sig):
        """Monomials of ``U(q) * sig``; Q_0 powers join the Q block directly."""
        out = []
        for i, a in enumerate(self.alpha):
            if a == 0.0:
                continue
            out.append((BathSignature(tuple(sorted(sig.q + (0,) * i)), sig.p), a))
        return out

    def coupling_right(self, sig):
        """Canonical expansion of ``sig * U(q)``."""
        hit = self._right.get(sig)
        if hit is not None:
            return hit
        out = defaultdict(complex)
        words = sig.factors()
        for i, a in enumerate(self.alpha):
            if a == 0.0:
                continue
            for s, c in canonical_word(words + (("Q", 0),) * i, self.theta).items():
                out[s] += a * c
        hit = self._right[sig] = tuple((s, c) for s, c in out.items() if c != 0)
        return hit

    def _apply(self, state, parts):
        sigs = list(state.terms)
        if not sigs:
            return HierarchyState({}, state.dim, self.drop_tol)
        M = np.stack([state.terms[s] for s in sigs])
        n = len(sigs)
        d = M.shape[1]
        index = {}
        rows, cols, vals = [], [], []
        blocks = []

        def target(sig):
            k = index.get(sig)
            if k is None:
                k = index[sig] = len(index)
            return k

        def emit(block, pairs_of):
            base = len(blocks) * n
            blocks.append(block)
            for j, sig in enumerate(sigs):
                for tsig, c in pairs_of(sig):
                    rows.append(target(tsig))
                    cols.append(base + j)
                    vals.append(c)

        if "S" in parts:
            emit(1j * (self.H @ M - M @ self.H), lambda s: ((s, 1.0),))
        if "B" in parts:
            emit(M, self.bath_expansion)
        if "SB" in parts and any(a != 0.0 for a in self.alpha):
            emit(1j * (self.V @ M), self.coupling_left)
            emit(-1j * (M @ self.V), self.coupling_right)

        if not blocks:
            return HierarchyState({}, state.dim, self.drop_tol)
        src = np.concatenate(blocks).reshape(len(blocks) * n, d * d)
        T = sparse.csr_matrix(
            (np.asarray(vals, dtype=complex), (rows, cols)), shape=(len(index), src.shape[0])
        )
        out = (T @ src).reshape(len(index), d, d)
        keep = np.linalg.norm(out.reshape(len(index), -1), axis=1) > self.drop_tol
        terms = {sig: out[k] for sig, k in index.items() if keep[k]}
        new = HierarchyState.__new__(HierarchyState)
        new.terms = terms
        new.dim = state.dim
        return new

    def apply_S(self, state):
        return self._apply(state, ("S",))

    def apply_B(self, state):
        return self._apply(state, ("B",))

    def apply_SB(self, state):
        return self._apply(state, ("SB",))

    def __call__(self, state):
        return self._apply(state, ("S", "B", "SB"))

    def iterate(self, A, n):
        """Yield ``(iL)^k A`` for ``k = 0..n``."""
        state = HierarchyState.initial(A) if not isinstance(A, HierarchyState) else A
        yield state
        for _ in range(n):
            state = self(state)
            yield state


def apply_iL_S(state, model):
    return Liouvillian(model, None).apply_S(state)


def apply_iL_B(state, sd):
    # iL_B needs neither the system Hamiltonian nor the coupling
    return Liouvillian(_NullModel(state.dim), sd).apply_B(state)


def apply_iL_SB(state, model, sd):
    return Liouvillian(model, sd).apply_SB(state)


def apply_iL(state, model, sd):
    return Liouvillian(model, sd)(state)


class _NullModel:
    def __init__(self, d):
        d = d or 1
        self.H_S = np.zeros((d, d), dtype=complex)
        self.V = np.zeros((d, d), dtype=complex)
        self.alpha = (0.0,)


def canonicalize(raw_terms, sd=None, theta=None):
    """Canonicalize a list of ``(coefficient, factors)`` pairs.

    ``coefficient`` may be a system matrix or a scalar (treated as 1x1).
    Returns a :class:`HierarchyState`.
    """
    th = theta if theta is not None else (lambda n: _theta_of(sd, n))
    acc = {}
    for coeff, factors in raw_terms:
        mat = np.atleast_2d(np.asarray(coeff, dtype=complex))
        for sig, c in canonical_word(tuple(factors), th).items():
            acc[sig] = acc[sig] + c * mat if sig in acc else c * mat
    return HierarchyState(acc)


def _fmt(z):
    # adding 0.0 turns -0.0 into 0.0 so dumps compare textually
    return f"{z.real + 0.0:.17g},{z.imag + 0.0:.17g}"


def dump(state):
    """Text form: ``coeff_re coeff_im | Q: ... | P: ... | rows``.

    The coefficient is the first non-zero matrix entry (row-major) and the
    matrix is divided by it; rows are ``;``-separated lists of ``re,im``.
    """
    lines = []
    for sig in sorted(state.terms, key=lambda s: (s.degree, s.q, s.p)):
        mat = state.terms[sig]
        flat = mat.ravel()
        lead = flat[np.flatnonzero(flat)[0]]
        body = " ; ".join(" ".join(_fmt(z) for z in row) for row in mat / lead)
        q = " ".join(str(m) for m in sig.q)
        p = " ".join(str(m) for m in sig.p)
        lines.append(f"{lead.real + 0.0:.17g} {lead.imag + 0.0:.17g} | Q: {q} | P: {p} | {body}")
    return "\n".join(lines) + ("\n" if lines else "")


def load_dump(text):
    """Inverse of :func:`dump`."""
    terms = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        head, qs, ps, body = (x.strip() for x in line.split("|"))
        re, im = (float(x) for x in head.split())
        q = tuple(int(x) for x in qs[2:].split())
        p = tuple(int(x) for x in ps[2:].split())
        rows = [
            [complex(*map(float, z.split(","))) for z in row.split()]
            for row in body.split(";")
        ]
        terms[BathSignature(q, p)] = complex(re, im) * np.array(rows, dtype=complex)
    return HierarchyState(terms)
