"""
Checking the symbolic moments against brute force
=================================================

On a bath with only two harmonic modes everything can be diagonalized
exactly.  We compare the symbolic moments with dense commutators, then the
MKCT correlation function with the exact one for a few Pade orders.

    python3 demos/oracle_check.py
"""
import numpy as np

from moment_kernel import Discrete, SpectralDensity, compute_moments, run_mkct, spin_boson
from moment_kernel.oracle import ACCEPTANCE_MODES, FockBath, oracle_correlation, oracle_moments

model = spin_boson(2.0, (0.0, 1.0))
sd = SpectralDensity(Discrete.from_modes(ACCEPTANCE_MODES), 1.0)

# dense side: truncated Fock spaces, cutoffs sized for order-8 moments
fock = FockBath.for_moments(ACCEPTANCE_MODES, 1.0, 8)
print("Fock cutoffs:", fock.n_max, " full dimension:", 2 * fock.dim)
raw = oracle_moments(model, fock, 8)
dense = raw / raw[0]
symbolic = compute_moments(model, sd, 8).unscaled()[0]
print("\n n   |Omega_n|        rel. diff")
for n, (a, b) in enumerate(zip(symbolic, dense)):
    print(f" {n}   {abs(a):13.6e}   {abs(a - b) / abs(b):.1e}")

# correlation functions; the undamped two-mode kernel needs long Taylor input
t_fock = FockBath.converged(ACCEPTANCE_MODES, 1.0, reach=6, tol=1e-10)
print("\n[M1/M2]   max |C - C_exact| for t <= 5")
for M1, M2 in [(4, 6), (2, 10), (4, 12)]:
    t, _, C = run_mkct(model, sd, M1, M2, 5.0, 1e-3).time_domain()
    ref = oracle_correlation(model, t_fock, t)
    print(f"[{M1}/{M2}]    {np.abs(C - ref).max():.4f}")
