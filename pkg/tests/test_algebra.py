import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from moment_kernel import PAULI, Discrete, SpectralDensity, spin_boson, theta
from moment_kernel.algebra import (
    EMPTY,
    BathSignature,
    HierarchyState,
    Liouvillian,
    apply_iL,
    apply_iL_B,
    apply_iL_S,
    apply_iL_SB,
    canonical_word,
    canonicalize,
    dump,
    load_dump,
)
from moment_kernel.oracle import ACCEPTANCE_MODES, DenseModel, FockBath, materialize

SX, SY, SZ = PAULI["x"], PAULI["y"], PAULI["z"]
SD = SpectralDensity(Discrete.from_modes(ACCEPTANCE_MODES), 1.0)
TH = lambda n: theta(SD, n)  # noqa: E731
COUPLINGS = [(0.0, 1.0), (0.0, 0.0, 0.384), (0.442, -1.251, 0.384)]

factor = st.tuples(st.sampled_from("QP"), st.integers(0, 3))
words = st.lists(factor, max_size=6)


def sig(q=(), p=()):
    return BathSignature.make(q, p)


def close(a, b, tol=1e-13):
    keys = set(a) | set(b)
    return all(abs(a.get(k, 0) - b.get(k, 0)) <= tol for k in keys)


def scaled(expansion, c):
    return {k: c * v for k, v in expansion.items()}


def added(a, b):
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) + v
    return out


def test_bath_liouvillian_on_single_modes():
    one = np.eye(1)
    q0 = HierarchyState({sig(q=(0,)): one})
    assert apply_iL_B(q0, SD).allclose(HierarchyState({sig(p=(1,)): one}))
    p0 = HierarchyState({sig(p=(0,)): one})
    assert apply_iL_B(p0, SD).allclose(HierarchyState({sig(q=(1,)): -one}))


def test_bath_liouvillian_on_mixed_monomial():
    one = np.eye(1)
    qp = HierarchyState({sig((0,), (0,)): one})
    want = HierarchyState({sig(q=(0, 1)): -one, sig(p=(0, 1)): one})
    assert apply_iL_B(qp, SD).allclose(want)


def test_coupling_example():
    model = spin_boson(2.0, (0.0, 1.0))
    out = apply_iL_SB(HierarchyState.initial(SX), model, SD)
    assert out.allclose(HierarchyState({sig(q=(0,)): -2 * SY}))


def test_full_liouvillian_example():
    model = spin_boson(20.0, (0.0, 1.0))
    out = apply_iL(HierarchyState.initial(SX), model, SD)
    want = HierarchyState({EMPTY: -20 * SY, sig(q=(0,)): -2 * SY})
    assert out.allclose(want)
    assert apply_iL_S(HierarchyState.initial(SX), model).allclose(HierarchyState({EMPTY: -20 * SY}))


def test_canonical_word_examples():
    assert close(canonical_word([("P", 0), ("Q", 0)], TH), {sig((0,), (0,)): 1, EMPTY: -1j * TH(0)})
    assert close(canonical_word([("Q", 0), ("P", 0)], TH), {sig((0,), (0,)): 1})
    got = canonical_word([("P", 1), ("Q", 0), ("Q", 2)], TH)
    want = {sig((0, 2), (1,)): 1, sig(q=(2,)): -1j * TH(1), sig(q=(0,)): -1j * TH(3)}
    assert close(got, want)


def test_canonicalize_accepts_matrices():
    state = canonicalize([(SX, [("P", 0), ("Q", 0)]), (SZ, [])], theta=TH)
    assert np.allclose(state[sig((0,), (0,))], SX)
    assert np.allclose(state[EMPTY], SZ - 1j * TH(0) * SX)


@given(a=words, b=words, m=st.integers(0, 3), n=st.integers(0, 3))
def test_swap_rule(a, b, m, n):
    # w P_n Q_m w' = w Q_m P_n w' - i theta_{m+n} w w'
    lhs = canonical_word(a + [("P", n), ("Q", m)] + b, TH)
    rhs = added(
        canonical_word(a + [("Q", m), ("P", n)] + b, TH),
        scaled(canonical_word(a + b, TH), -1j * TH(m + n)),
    )
    assert close(lhs, rhs, tol=1e-11)


@given(a=words, b=words, kind=st.sampled_from("QP"), m=st.integers(0, 3), n=st.integers(0, 3))
def test_same_block_factors_commute(a, b, kind, m, n):
    lhs = canonical_word(a + [(kind, m), (kind, n)] + b, TH)
    rhs = canonical_word(a + [(kind, n), (kind, m)] + b, TH)
    assert close(lhs, rhs, tol=1e-11)


@given(w=words)
def test_canonicalization_is_idempotent(w):
    first = canonical_word(w, TH)
    for s, c in first.items():
        again = canonical_word(s.factors(), TH)
        assert again == {s: 1.0 + 0j}
    assert all(s.degree <= len(w) and s.degree % 2 == len(w) % 2 for s in first)


@given(
    x=st.lists(st.floats(-2, 2), min_size=8, max_size=8),
    y=st.lists(st.floats(-2, 2), min_size=8, max_size=8),
    a=st.floats(-3, 3),
    b=st.floats(-3, 3),
)
def test_liouvillian_is_linear(x, y, a, b):
    X = np.array(x[:4]).reshape(2, 2) + 1j * np.array(x[4:]).reshape(2, 2)
    Y = np.array(y[:4]).reshape(2, 2) + 1j * np.array(y[4:]).reshape(2, 2)
    L = Liouvillian(spin_boson(2.0, COUPLINGS[2]), SD)
    sx = L(L(HierarchyState.initial(X)))
    sy = L(L(HierarchyState.initial(Y)))
    both = L(L(HierarchyState.initial(a * X + b * Y)))
    assert both.allclose(sx * a + sy * b, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("alpha", COUPLINGS)
def test_degree_bound(alpha):
    model = spin_boson(2.0, alpha)
    D = model.degree
    for k, state in enumerate(Liouvillian(model, SD).iterate(model.A, 6)):
        assert state.max_degree <= k * D


def _safe_block(bath, d, k, D):
    safe = bath.n_max[0] - k * max(D, 1) - 1
    if safe <= 0:
        return None
    n1 = bath.n_max[1]
    idx = [
        a * bath.dim + i * n1 + j
        for a in range(d)
        for i in range(safe)
        for j in range(min(safe, n1))
    ]
    return np.ix_(idx, idx)


@pytest.mark.parametrize("alpha", COUPLINGS)
def test_hierarchy_matches_dense_commutators(alpha):
    model = spin_boson(2.0, alpha)
    bath = FockBath(ACCEPTANCE_MODES, 1.0, 12)
    dm = DenseModel(model, bath)
    X = dm.A.toarray()
    for k, state in enumerate(Liouvillian(model, SD).iterate(model.A, 4)):
        if k:
            X = dm.commutator(X)
        block = _safe_block(bath, model.dim, k, model.degree)
        if block is None:
            break
        M = materialize(state, bath)
        assert np.abs(M[block] - X[block]).max() <= 1e-12 * np.abs(X[block]).max()


@pytest.mark.parametrize("alpha", COUPLINGS)
def test_powers_of_liouvillian_stay_hermitian(alpha):
    model = spin_boson(2.0, alpha)
    bath = FockBath(ACCEPTANCE_MODES, 1.0, 12)
    for k, state in enumerate(Liouvillian(model, SD).iterate(model.A, 4)):
        block = _safe_block(bath, model.dim, k, model.degree)
        if block is None:
            break
        M = materialize(state, bath)[block]
        assert np.abs(M - M.conj().T).max() <= 1e-12 * max(1.0, np.abs(M).max())


def test_golden_hierarchy(fixtures):
    model = spin_boson(2.0, (0.0, 1.0))
    *_, state = Liouvillian(model, SD).iterate(model.A, 3)
    golden = load_dump((fixtures / "hierarchy_linear.txt").read_text())
    assert state.allclose(golden, rtol=1e-13, atol=1e-13)
    assert set(state.terms) == set(golden.terms)


def test_dump_round_trip():
    model = spin_boson(2.0, COUPLINGS[2])
    *_, state = Liouvillian(model, SD).iterate(model.A, 3)
    again = load_dump(dump(state))
    assert again.allclose(state, rtol=1e-15, atol=0)
    assert "-0," not in dump(state) and " -0 " not in dump(state)


def test_signature_helpers():
    s = BathSignature.make((2, 0), (1,))
    assert s == BathSignature((0, 2), (1,))
    assert s.degree == 3
    assert s.drop_q(0) == BathSignature((2,), (1,))
    assert str(EMPTY)
    assert list(itertools.islice(s.factors(), 3)) == [("Q", 0), ("Q", 2), ("P", 1)]
