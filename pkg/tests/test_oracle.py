import numpy as np
import pytest

from moment_kernel import Discrete, OhmicExp, SpectralDensity, solve_gqme, spin_boson, theta
from moment_kernel.errors import DimensionCap, TruncationLeak
from moment_kernel.oracle import (
    ACCEPTANCE_MODES,
    DenseModel,
    FockBath,
    kernel_from_correlation,
    matched_discrete,
    oracle_correlation,
    oracle_moment,
    oracle_moments,
    pure_dephasing_correlation,
)

T = np.linspace(0, 5, 51)


@pytest.fixture(scope="module")
def pd_bath():
    return FockBath.converged(ACCEPTANCE_MODES, 1.0, reach=6, tol=1e-10)


def test_decoupled_two_level_is_free():
    bath = FockBath(ACCEPTANCE_MODES, 1.0, 6)
    C = oracle_correlation(spin_boson(2.0, (0.0, 0.0)), bath, T)
    assert np.abs(C - np.exp(2j * T)).max() < 1e-12


def test_correlation_starts_at_one():
    bath = FockBath(ACCEPTANCE_MODES, 1.0, 8)
    for alpha in [(0.0, 1.0), (0.3, -0.7, 0.2)]:
        assert oracle_correlation(spin_boson(2.0, alpha), bath, [0.0])[0] == pytest.approx(1, abs=1e-12)


def test_fock_bath_invariants():
    bath = FockBath(ACCEPTANCE_MODES, 1.0, (10, 7))
    assert bath.commutator_defect() < 1e-14
    assert bath.rho_diag.sum() == pytest.approx(1, abs=1e-12)
    assert bath.dim == 70
    dm = DenseModel(spin_boson(2.0, (0.4, 1.0, 0.3)), bath)
    assert dm.hermiticity_defect() < 1e-12


def test_for_moments_cutoffs_grow_with_order():
    lo = FockBath.for_moments(ACCEPTANCE_MODES, 1.0, 4)
    hi = FockBath.for_moments(ACCEPTANCE_MODES, 1.0, 4, degree=2)
    assert all(b > a for a, b in zip(lo.n_max, hi.n_max))


def test_dimension_cap():
    bath = FockBath(ACCEPTANCE_MODES, 1.0, 40)
    with pytest.raises(DimensionCap):
        DenseModel(spin_boson(2.0), bath, max_dim=1000)


def test_truncation_leak_detected():
    bath = FockBath(ACCEPTANCE_MODES, 1.0, 4)
    with pytest.raises(TruncationLeak):
        oracle_moments(spin_boson(2.0), bath, 6)


def test_first_moments():
    bath = FockBath(ACCEPTANCE_MODES, 1.0, 6)
    raw = oracle_moments(spin_boson(20.0), bath, 1, leak_tol=None)
    assert raw[0] == pytest.approx(1, abs=1e-12)
    assert raw[1] / raw[0] == pytest.approx(20j, abs=1e-10)
    assert oracle_moment(spin_boson(20.0), bath, 1, leak_tol=None) == raw[1]


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_integration_by_parts(n):
    # Tr((iL)^n A . Y) = (-1)^n Tr(A . (iL)^n Y), Y = A sigma0 (x) rho_eq
    dm = DenseModel(spin_boson(2.0, (0.3, 1.0, 0.2)), FockBath(ACCEPTANCE_MODES, 1.0, (8, 6)))
    A = dm.A.toarray()
    Y = A @ dm.rho0.toarray()
    X, Z = A, Y
    for _ in range(n):
        X, Z = dm.commutator(X), dm.commutator(Z)
    lhs = np.trace(X @ Y)
    rhs = (-1) ** n * np.trace(A @ Z)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


def test_pure_dephasing_matches_diagonalization(pd_bath):
    disc = SpectralDensity(Discrete.from_modes(ACCEPTANCE_MODES), 1.0)
    exact = pure_dephasing_correlation(2.0, 1.0, disc, T)
    ed = oracle_correlation(spin_boson(2.0, (0.0, 1.0)), pd_bath, T)
    assert np.abs(exact - ed).max() < 1e-8


def test_continuum_matches_fine_discretization():
    sd = SpectralDensity(OhmicExp(0.5, 1.0), 5.0)
    disc = matched_discrete(sd, 2000)
    t = np.linspace(0, 4, 9)
    a = pure_dephasing_correlation(20.0, 1.0, sd, t)
    b = pure_dephasing_correlation(20.0, 1.0, disc, t)
    assert np.abs(a - b).max() < 1e-3


def test_matched_discrete_reproduces_theta():
    sd = SpectralDensity(OhmicExp(0.5, 1.0), 5.0)
    disc = matched_discrete(sd, 4000)
    for n in (1, 3):
        assert theta(disc, n) == pytest.approx(theta(sd, n), rel=1e-4)
    assert matched_discrete(disc, 10) is disc


def test_kernel_inversion_round_trip():
    disc = SpectralDensity(Discrete.from_modes(ACCEPTANCE_MODES), 1.0)
    dt = 1e-3
    t = dt * np.arange(3001)
    C, dC, ddC = pure_dephasing_correlation(2.0, 1.0, disc, t, derivatives=True)
    # derivatives agree with finite differences
    fd = np.gradient(C, dt)
    assert np.abs(fd[1:-1] - dC[1:-1]).max() < 1e-5
    K = kernel_from_correlation(C, dC, ddC, dt)
    s = solve_gqme(dC[0], K, t[-1], dt)
    assert np.abs(s.C - C).max() < 1e-5


def test_inversion_needs_continuous_density_for_derivatives():
    with pytest.raises(ValueError):
        pure_dephasing_correlation(1.0, 1.0, SpectralDensity(OhmicExp(0.5, 1.0), 1.0), T, derivatives=True)
