"""Pauli-string algebra against dense matrix arithmetic."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from shadowlab.oracle import pauli_matrix
from shadowlab.pauli import PauliString

_N = 3


def _dense(p: PauliString) -> np.ndarray:
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    z = np.array([[1, 0], [0, -1]], dtype=complex)
    out = np.eye(1, dtype=complex)
    for j in range(p.n):
        m = np.eye(2, dtype=complex)
        if (p.x_bits >> j) & 1:
            m = m @ x
        if (p.z_bits >> j) & 1:
            m = m @ z
        out = np.kron(m, out)  # qubit 0 is the least significant factor
    return p.phase * out


paulis = st.builds(
    PauliString,
    n=st.just(_N),
    x_bits=st.integers(0, 2 ** _N - 1),
    z_bits=st.integers(0, 2 ** _N - 1),
    phase_power=st.integers(0, 3),
)


@given(paulis, paulis)
@settings(max_examples=60, deadline=None)
def test_multiplication_matches_dense(a, b):
    np.testing.assert_allclose(_dense(a * b), _dense(a) @ _dense(b),
                               atol=1e-12)


@given(paulis)
@settings(max_examples=60, deadline=None)
def test_adjoint_matches_dense(p):
    np.testing.assert_allclose(_dense(p.adjoint()), _dense(p).conj().T,
                               atol=1e-12)


@given(paulis, paulis)
@settings(max_examples=60, deadline=None)
def test_commutation_matches_dense(a, b):
    da, db = _dense(a), _dense(b)
    assert a.commutes_with(b) == bool(np.allclose(da @ db, db @ da))


def test_from_label_roundtrip():
    for label in ("XIZY", "IIII", "YYYY", "ZXZX"):
        p = PauliString.from_label(label)
        assert p.label() == label
        assert p.is_hermitian()


def test_y_is_hermitian_with_phase():
    y = PauliString.from_label("Y")
    np.testing.assert_allclose(_dense(y), [[0, -1j], [1j, 0]])


def test_pauli_matrix_oracle_agrees():
    # oracle.pauli_matrix indexes Paulis as 2-bit (x, z) pairs per qubit
    for v in range(16):
        m = pauli_matrix(v, 2)
        assert m.shape == (4, 4)
        np.testing.assert_allclose(m @ m, np.eye(4), atol=1e-12)
