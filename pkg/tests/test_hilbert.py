"""Pauli construction, operator wrapper, and capacity-cap behaviour."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qsklab.hilbert import (
    AXES,
    CapacityError,
    Operator,
    check_site_count,
    max_sites,
    op_product,
    pauli_op,
    spin_table,
    total_axis_sum,
)

SMALL_N = st.integers(min_value=1, max_value=5)


def test_pauli_squares_to_identity():
    for n in range(1, 5):
        eye = np.eye(2**n)
        for axis in AXES:
            for site in range(n):
                p = pauli_op(axis, site, n)
                np.testing.assert_allclose(p.matrix @ p.matrix, eye, atol=1e-14)


def test_pauli_is_hermitian_and_traceless():
    p = pauli_op("y", 1, 3)
    assert p.hermitian
    assert abs(np.trace(p.matrix)) < 1e-14
    np.testing.assert_array_equal(p.matrix, p.matrix.conj().T)


@given(n=SMALL_N, data=st.data())
def test_onsite_anticommutators(n, data):
    site = data.draw(st.integers(min_value=0, max_value=n - 1))
    a = data.draw(st.sampled_from(AXES))
    b = data.draw(st.sampled_from(AXES))
    pa = pauli_op(a, site, n).matrix
    pb = pauli_op(b, site, n).matrix
    anti = pa @ pb + pb @ pa
    expected = 2.0 * np.eye(2**n) if a == b else np.zeros((2**n, 2**n))
    np.testing.assert_allclose(anti, expected, atol=1e-13)


@given(n=st.integers(min_value=2, max_value=5), data=st.data())
def test_distinct_sites_commute(n, data):
    i = data.draw(st.integers(min_value=0, max_value=n - 1))
    j = data.draw(st.integers(min_value=0, max_value=n - 1).filter(lambda s: s != i))
    a = data.draw(st.sampled_from(AXES))
    b = data.draw(st.sampled_from(AXES))
    pa = pauli_op(a, i, n).matrix
    pb = pauli_op(b, j, n).matrix
    np.testing.assert_allclose(pa @ pb, pb @ pa, atol=1e-13)


def test_site_zero_is_least_significant_bit():
    # <b| sigma^z_0 |b> flips sign with bit 0 of b
    z0 = pauli_op("z", 0, 2).matrix
    np.testing.assert_array_equal(np.diag(z0).real, [1, -1, 1, -1])
    z1 = pauli_op("z", 1, 2).matrix
    np.testing.assert_array_equal(np.diag(z1).real, [1, 1, -1, -1])


def test_sigma_x_permutes_basis_by_bit_flip():
    n = 3
    for site in range(n):
        x = pauli_op("x", site, n).matrix
        for b in range(2**n):
            col = x[:, b]
            assert col[b ^ (1 << site)] == 1.0
            assert np.count_nonzero(col) == 1


def test_total_axis_sum_matches_explicit_loop():
    n = 4
    acc = np.zeros((2**n, 2**n), dtype=np.complex128)
    for site in range(n):
        acc += pauli_op("x", site, n).matrix
    np.testing.assert_array_equal(total_axis_sum("x", n).matrix, acc)


def test_spin_table_agrees_with_z_diagonals():
    n = 4
    table = spin_table(n)
    assert table.shape == (2**n, n)
    for site in range(n):
        np.testing.assert_array_equal(
            table[:, site].astype(float), np.diag(pauli_op("z", site, n).matrix).real
        )


def test_operator_rejects_nonsquare():
    with pytest.raises(ValueError):
        Operator(np.zeros((2, 3)))


def test_operator_hermitian_flag_is_verified():
    m = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=np.complex128)
    with pytest.raises(ValueError):
        Operator(m, hermitian=True)


def test_operator_matrix_is_read_only():
    p = pauli_op("z", 0, 1)
    with pytest.raises(ValueError):
        p.matrix[0, 0] = 5.0


def test_op_product_checks_dims():
    with pytest.raises(ValueError):
        op_product(pauli_op("x", 0, 1), pauli_op("x", 0, 2))


def test_op_product_tracks_hermiticity():
    x = pauli_op("x", 0, 1)
    y = pauli_op("y", 0, 1)
    assert not op_product(x, y).hermitian  # xy = iz
    assert op_product(x, x).hermitian


def test_site_cap_env_override(monkeypatch):
    monkeypatch.setenv("QSKLAB_MAX_N", "3")
    assert max_sites() == 3
    with pytest.raises(CapacityError):
        check_site_count(4)
    check_site_count(3)
    monkeypatch.setenv("QSKLAB_MAX_N", "junk")
    with pytest.raises(ValueError):
        max_sites()


def test_bad_axis_and_site_rejected():
    with pytest.raises(ValueError):
        pauli_op("w", 0, 2)
    with pytest.raises(ValueError):
        pauli_op("x", 2, 2)
    with pytest.raises(ValueError):
        pauli_op("x", -1, 2)
