import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from superatom.errors import ConfigurationError, DimensionError, NumericalError
from superatom.hilbert import (
    BasisSpec,
    SparseOperator,
    StateVector,
    annihilation,
    apply,
    excitation_number,
    expectation,
    flat_index,
    hermiticity_error,
    ladder_raising,
    number_operator,
    unflatten,
)

bases = st.builds(BasisSpec, st.integers(2, 5), st.integers(1, 6))


def states(basis):
    n = basis.dimension
    comp = st.tuples(st.floats(-1, 1), st.floats(-1, 1))
    return st.lists(comp, min_size=n, max_size=n).filter(
        lambda xs: sum(a * a + b * b for a, b in xs) > 1e-3
    ).map(lambda xs: StateVector(basis, np.array([a + 1j * b for a, b in xs])).normalized())


def test_basis_validation():
    with pytest.raises(ConfigurationError):
        BasisSpec(1, 3)
    with pytest.raises(ConfigurationError):
        BasisSpec(2, 0)
    assert BasisSpec(3, 4).dimension == 15


def test_flat_index_layout():
    b = BasisSpec(2, 4)
    assert flat_index(0, 0, b) == 0
    assert flat_index(1, 0, b) == 5
    with pytest.raises(IndexError):
        flat_index(2, 0, b)
    with pytest.raises(IndexError):
        flat_index(0, 5, b)


def test_flat_index_bijection():
    b = BasisSpec(3, 3)
    seen = {flat_index(k, n, b) for k in range(3) for n in range(4)}
    assert seen == set(range(b.dimension))
    for k in range(3):
        for n in range(4):
            assert unflatten(flat_index(k, n, b), b) == (k, n)


def test_annihilation_on_fock_states():
    b = BasisSpec(2, 4)
    a = annihilation(b)
    out = apply(a, StateVector.basis_state(b, 0, 2))
    expected = np.zeros(b.dimension)
    expected[flat_index(0, 1, b)] = np.sqrt(2)
    np.testing.assert_allclose(out.amplitudes, expected, atol=1e-15)
    assert apply(a, StateVector.basis_state(b, 0, 0)).norm() == 0.0
    psi = StateVector.superposition(b, [(1, 0, 1), (1, 0, 3)])
    assert expectation(number_operator(b), psi) == pytest.approx(2.0, abs=1e-14)


def test_ladder_raising():
    b = BasisSpec(2, 2)
    op = ladder_raising([0.7], b)
    m = op.toarray()
    for n in range(3):
        assert m[flat_index(1, n, b), flat_index(0, n, b)] == pytest.approx(0.7)
    assert op.nnz == 3
    down = apply(op.dag(), StateVector.basis_state(b, 1, 0))
    assert down.amplitudes[flat_index(0, 0, b)] == pytest.approx(0.7)

    b3 = BasisSpec(3, 1)
    m3 = ladder_raising([1.0, 2.0], b3).toarray()
    blocks = {(unflatten(r, b3)[0], unflatten(c, b3)[0]) for r, c in zip(*np.nonzero(m3))}
    assert blocks == {(1, 0), (2, 1)}
    with pytest.raises(ConfigurationError):
        ladder_raising([1.0], b3)


def test_sparse_operator_canonical_and_frozen():
    op = SparseOperator.from_entries(3, [(2, 1, 1.0), (0, 0, 2.0), (2, 1, 0.5)])
    assert op.entries() == [(0, 0, 2.0), (2, 1, 1.5)]
    with pytest.raises(ValueError):
        op.matrix.data[0] = 5.0
    same = SparseOperator.from_entries(3, [(0, 0, 2.0), (2, 1, 1.5)])
    assert op == same
    with pytest.raises(NumericalError):
        SparseOperator.from_entries(2, [(0, 1, 1.0)], hermitian=True)


def test_dimension_mismatch():
    b = BasisSpec(2, 2)
    psi = StateVector.basis_state(BasisSpec(2, 3), 0, 0)
    with pytest.raises(DimensionError):
        apply(annihilation(b), psi)
    with pytest.raises(DimensionError):
        expectation(annihilation(b), psi)


def test_identity_apply(rng):
    from conftest import random_state

    b = BasisSpec(3, 2)
    psi = random_state(b, rng)
    out = apply(SparseOperator.identity(b.dimension), psi)
    np.testing.assert_array_equal(out.amplitudes, psi.amplitudes)


@given(bases.flatmap(states))
def test_annihilation_norm_matches_number(psi):
    b = psi.basis
    lhs = apply(annihilation(b), psi).norm() ** 2
    rhs = expectation(number_operator(b), psi).real
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-14)


@given(bases.flatmap(states))
def test_normalization_invariant(psi):
    assert abs(psi.norm() ** 2 - 1) <= 1e-12
    assert np.all(np.isfinite(psi.amplitudes))


@given(bases.flatmap(states))
def test_hermitian_expectation_is_real(psi):
    b = psi.basis
    n = excitation_number(b)
    assert hermiticity_error(n) == 0.0
    assert abs(expectation(n, psi).imag) <= 1e-12
