"""
Memory kernel of a biased spin-boson model
==========================================

A two-level system with splitting Delta = 20 couples linearly to an Ohmic
bath (lam = 0.5, omega_D = 1, beta = 5).  Because H_S commutes with the
coupling operator, C(t) is known in closed form, so we can check the
moment route against it and watch the kernel die out long before C(t).

    python3 demos/linear_spin_boson.py
"""
import numpy as np

from moment_kernel import OhmicExp, SpectralDensity, decay_time, run_mkct, spin_boson
from moment_kernel.oracle import pure_dephasing_correlation

model = spin_boson(20.0, (0.0, 1.0))
bath = SpectralDensity(OhmicExp(0.5, 1.0), 5.0)

# moments -> [7/15] Pade kernel -> GQME, all in one call
res = run_mkct(model, bath, 7, 15, t_max=4.0, dt=1e-3)
print("omega_c =", res.scale.omega_c)
print("first moments (model units):")
for n, w in enumerate(res.moments.unscaled()[0][:5]):
    print(f"  Omega_{n} = {w.real:+.6f} {w.imag:+.6f}i")

t, K1, C = res.time_domain()

# closed-form reference on a subset of the grid
sub = slice(None, None, 200)
exact = pure_dephasing_correlation(20.0, 1.0, bath, t[sub])
print("\n   t      |C_mkct|   |C_exact|   |diff|")
for tt, a, b in zip(t[sub], C[sub], exact):
    print(f"  {tt:4.1f}   {abs(a):.5f}    {abs(b):.5f}    {abs(a - b):.1e}")

print(f"\ntau_C  = {decay_time(t, C):.3f}")
print(f"tau_K1 = {decay_time(t, K1):.3f}   (kernel forgets first)")
print("kernel poles (scaled t):", np.round(np.sort_complex(res.kernel.poles())[:3], 3), "...")
