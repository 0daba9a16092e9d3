"""Regenerate the golden files in this directory.

    python3 tests/fixtures/generate.py

Every reference value comes from the brute-force side (dense Fock-space
oracle or the closed-form pure-dephasing solution), never from the symbolic
pipeline, except ``hierarchy_linear.txt`` which pins the algebra output
after it was checked against dense commutators.
"""
import json
from pathlib import Path

import numpy as np

from moment_kernel import Discrete, OhmicExp, SpectralDensity, decay_time, spin_boson
from moment_kernel.algebra import Liouvillian, dump
from moment_kernel.oracle import (
    ACCEPTANCE_MODES,
    FockBath,
    kernel_from_correlation,
    matched_discrete,
    oracle_moments,
    pure_dephasing_correlation,
)

HERE = Path(__file__).parent
COMMAND = "python3 tests/fixtures/generate.py"

# acceptance models on the two-mode bath at beta = 1
MOMENT_CASES = {
    "linear": ((0.0, 1.0), 8),
    "quadratic": ((0.0, 0.0, 0.384), 6),
    "mixed": ((0.442, -1.251, 0.384), 6),
}


def pairs(a):
    return [[float(z.real), float(z.imag)] for z in np.asarray(a, dtype=complex)]


def oracle_moment_golden():
    out = {"command": COMMAND, "bath": {"modes": ACCEPTANCE_MODES, "beta": 1.0}, "cases": {}}
    out["leak_check"] = "cutoffs +4 change every moment by < 1e-6 relative"
    for name, (alpha, order) in MOMENT_CASES.items():
        model = spin_boson(2.0, alpha)
        bath = FockBath.for_moments(ACCEPTANCE_MODES, 1.0, order, model.degree)
        raw = oracle_moments(model, bath, order, leak_tol=1e-6)
        out["cases"][name] = {
            "model_hash": model.digest(),
            "n_max": list(bath.n_max),
            "delta": 2.0,
            "alpha": list(alpha),
            "omega": pairs(raw / raw[0]),
        }
    (HERE / "oracle_moments.json").write_text(json.dumps(out, indent=1) + "\n")


def dephasing_reference():
    # linear spin-boson recipe against a finely discretized Ohmic bath
    sd = SpectralDensity(OhmicExp(0.5, 1.0), 5.0)
    disc = matched_discrete(sd, 1600)
    dt, t_max = 1e-3, 4.0
    t = dt * np.arange(int(round(t_max / dt)) + 1)
    C, dC, ddC = pure_dephasing_correlation(20.0, 1.0, disc, t, derivatives=True)
    K = kernel_from_correlation(C, dC, ddC, dt)
    step = 50
    out = {
        "command": COMMAND,
        "model": "spin_boson(20), alpha = (0, 1)",
        "bath": {"kind": "ohmic", "lam": 0.5, "omega_d": 1.0, "beta": 5.0, "modes": 1600},
        "dt": dt,
        "t_max": t_max,
        "tau_C": decay_time(t, C),
        "tau_K1": decay_time(t, K),
        "t": t[::step].tolist(),
        "C": pairs(C[::step]),
        "K1": pairs(K[::step]),
    }
    (HERE / "dephasing_reference.json").write_text(json.dumps(out, indent=1) + "\n")


def hierarchy_dump():
    sd = SpectralDensity(Discrete.from_modes(ACCEPTANCE_MODES), 1.0)
    model = spin_boson(2.0, (0.0, 1.0))
    *_, state = Liouvillian(model, sd).iterate(model.A, 3)
    (HERE / "hierarchy_linear.txt").write_text(dump(state))


if __name__ == "__main__":
    oracle_moment_golden()
    dephasing_reference()
    hierarchy_dump()
