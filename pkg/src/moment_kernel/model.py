"""System description: Hamiltonian, coupling operator, observable, initial state."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

__all__ = ["SystemModel", "spin_boson", "displaced_tls", "PAULI"]

PAULI = {
    "I": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_HERM_TOL = 1e-12


def _as_matrix(x, name, d=None):
    m = np.array(x, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be a square matrix")
    if d is not None and m.shape[0] != d:
        raise ValueError(f"{name} has dimension {m.shape[0]}, expected {d}")
    m.setflags(write=False)
    return m


@dataclass(frozen=True, eq=False)
class SystemModel:
    """Open-system model ``H = H_S + H_B + V U(q)`` with ``U(q) = sum_i alpha_i q^i``.

    ``H_S``, ``V``, ``A`` and ``sigma0`` are small dense matrices on the
    system space; ``alpha`` are the polynomial coupling coefficients (energies).
    """

    H_S: np.ndarray
    V: np.ndarray
    A: np.ndarray
    sigma0: np.ndarray
    alpha: tuple

    def __post_init__(self):
        H = _as_matrix(self.H_S, "H_S")
        d = H.shape[0]
        V = _as_matrix(self.V, "V", d)
        A = _as_matrix(self.A, "A", d)
        s0 = _as_matrix(self.sigma0, "sigma0", d)
        for name, m in (("H_S", H), ("V", V)):
            if not np.allclose(m, m.conj().T, atol=_HERM_TOL):
                raise ValueError(f"{name} must be Hermitian")
        if not np.allclose(s0, s0.conj().T, atol=_HERM_TOL):
            raise ValueError("sigma0 must be Hermitian")
        if abs(np.trace(s0) - 1) > 1e-10:
            raise ValueError("sigma0 must have unit trace")
        if np.linalg.eigvalsh(s0).min() < -1e-10:
            raise ValueError("sigma0 must be positive semidefinite")
        alpha = tuple(float(a) for a in self.alpha)
        if not alpha:
            raise ValueError("alpha needs at least one coefficient")
        object.__setattr__(self, "H_S", H)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "sigma0", s0)
        object.__setattr__(self, "alpha", alpha)

    @property
    def dim(self):
        return self.H_S.shape[0]

    @property
    def degree(self):
        """Polynomial degree D of U(q), ignoring trailing zero coefficients."""
        nz = [i for i, a in enumerate(self.alpha) if a != 0.0]
        return nz[-1] if nz else 0

    def scaled(self, s):
        """The same model with energies measured in units of ``s``."""
        return SystemModel(
            self.H_S / s, self.V, self.A, self.sigma0, tuple(a / s for a in self.alpha)
        )

    def digest(self):
        """Short stable hash of the model contents."""
        payload = {
            k: np.round(np.stack([m.real, m.imag]), 15).tolist()
            for k, m in (("H", self.H_S), ("V", self.V), ("A", self.A), ("s", self.sigma0))
        }
        payload["alpha"] = list(self.alpha)
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def spin_boson(delta, alpha=(0.0, 1.0)):
    """Biased spin-boson model: ``H_S = (delta/2) sz``, ``V = sz``, ``A = sx``.

    The initial state is ``|0><0|``, the ``sz = +1`` eigenstate.
    """
    s0 = np.diag([1.0, 0.0]).astype(complex)
    return SystemModel(0.5 * delta * PAULI["z"], PAULI["z"], PAULI["x"], s0, alpha)


def displaced_tls(omega_eg, alpha=(0.0, 0.0, 1.0)):
    """Two-level chromophore: ``H_S = omega_eg |1><1|``, ``V = |1><1|``, ``A = sx``."""
    e = np.diag([0.0, 1.0]).astype(complex)
    s0 = np.diag([1.0, 0.0]).astype(complex)
    return SystemModel(omega_eg * e, e, PAULI["x"], s0, alpha)
