"""Tests for GF(2) bit-vector and bit-matrix arithmetic."""

import numpy as np
import pytest

from src.config import DEFAULT_PRIMITIVE_POLYNOMIALS
from src.exceptions import DimensionMismatchError, InvalidInputError, SingularMatrixError
from src.gf2 import (
    as_bits,
    bits_to_int,
    companion_coeffs,
    companion_matrix,
    companion_step,
    exponents_to_coeffs,
    find_primitive_polynomial,
    from_bitstring,
    int_to_bits,
    mat_mul,
    mat_pow,
    mat_vec,
    primitive_companion,
    rank,
    solve_linear,
    to_bitstring,
    validate_primitive,
)


def test_companion_matrix_layout():
    """Ones on the superdiagonal, coefficients on the last row."""
    m = companion_matrix([1, 1, 0])
    expected = np.array([[0, 1, 0], [0, 0, 1], [1, 1, 0]], dtype=np.uint8)
    assert np.array_equal(m, expected)
    assert np.array_equal(companion_coeffs(m), [1, 1, 0])


def test_companion_matrix_degree_zero():
    """A constant polynomial has no companion matrix."""
    with pytest.raises(InvalidInputError):
        companion_matrix([])


def test_companion_coeffs_rejects_other_matrices():
    """Only companion-shaped matrices report coefficients."""
    assert companion_coeffs(np.eye(3, dtype=np.uint8)) is None


def test_bit_conversions():
    """Qubit 1 is the most significant bit."""
    assert bits_to_int([1, 0, 1]) == 5
    assert np.array_equal(int_to_bits(6, 3), [1, 1, 0])
    assert to_bitstring(from_bitstring("0110")) == "0110"
    with pytest.raises(InvalidInputError):
        int_to_bits(8, 3)
    with pytest.raises(InvalidInputError):
        from_bitstring("012")
    with pytest.raises(InvalidInputError):
        as_bits([0, 2])


def test_mat_vec_small_cases():
    """Row vector times matrix mod 2."""
    m = companion_matrix([1, 1, 0])
    assert np.array_equal(mat_vec([1, 0, 0], m), [0, 1, 0])
    assert np.array_equal(mat_vec([1, 1, 1], m), [1, 0, 1])
    assert np.array_equal(mat_vec([0, 0, 0], m), [0, 0, 0])


def test_mat_vec_dimension_mismatch():
    """Vector length must equal the row count."""
    with pytest.raises(DimensionMismatchError):
        mat_vec([1, 0], companion_matrix([1, 1, 0]))


def test_companion_step_matches_dense_product():
    """The O(n) step equals v·M and v·Mᵀ for every vector."""
    coeffs = exponents_to_coeffs((5, 2, 0), 5)
    m = companion_matrix(coeffs)
    for value in range(32):
        v = int_to_bits(value, 5)
        assert np.array_equal(companion_step(v, coeffs), mat_vec(v, m))
        assert np.array_equal(companion_step(v, coeffs, transpose=True), mat_vec(v, m.T))


def test_mat_pow_and_mul():
    """Repeated squaring agrees with repeated multiplication."""
    m = companion_matrix([1, 1, 0])
    product = np.eye(3, dtype=np.uint8)
    for _ in range(5):
        product = mat_mul(product, m)
    assert np.array_equal(mat_pow(m, 5), product)


def test_validate_primitive_known_polynomials():
    """x³+x+1 is primitive, x²+1 = (x+1)² is not, and neither is the identity."""
    assert validate_primitive(companion_matrix([1, 1, 0]))
    assert not validate_primitive(companion_matrix([1, 0]))
    assert not validate_primitive(np.eye(3, dtype=np.uint8))


def test_validate_primitive_matches_definition():
    """M^D = M and M^k != M for 1 < k < D, checked directly for invertible M, n <= 4."""
    for n in range(1, 5):
        for value in range(1 << n):
            m = companion_matrix(int_to_bits(value, n)[::-1])
            d = 1 << n
            by_definition = bool(m[n - 1, 0]) and np.array_equal(mat_pow(m, d), m) and all(
                not np.array_equal(mat_pow(m, k), m) for k in range(2, d)
            )
            assert validate_primitive(m) == by_definition


@pytest.mark.parametrize("n", sorted(DEFAULT_PRIMITIVE_POLYNOMIALS))
def test_table_polynomials_are_primitive(n):
    """Every built-in polynomial passes the order test."""
    exponents = DEFAULT_PRIMITIVE_POLYNOMIALS[n]
    assert validate_primitive(companion_matrix(exponents_to_coeffs(exponents, n)))


def test_primitive_companion_range():
    """Only 1 <= n <= 32 is supported."""
    assert primitive_companion(1).shape == (1, 1)
    with pytest.raises(InvalidInputError):
        primitive_companion(0)
    with pytest.raises(InvalidInputError):
        primitive_companion(33)


def test_find_primitive_polynomial():
    """The search returns a primitive polynomial of the requested degree."""
    for n in (2, 3, 5, 8):
        exponents = find_primitive_polynomial(n)
        assert exponents[0] == n
        assert validate_primitive(companion_matrix(exponents_to_coeffs(exponents, n)))


def test_solve_linear_small_systems():
    """Gaussian elimination over GF(2)."""
    assert np.array_equal(solve_linear(np.eye(3, dtype=np.uint8), [1, 0, 1]), [1, 0, 1])
    a = np.array([[1, 1], [0, 1]], dtype=np.uint8)
    assert np.array_equal(solve_linear(a, [0, 1]), [1, 1])
    with pytest.raises(SingularMatrixError):
        solve_linear(np.array([[1, 1], [1, 1]], dtype=np.uint8), [1, 0])


def test_solve_linear_random_systems():
    """Solutions satisfy a·x = y for random invertible systems."""
    rng = np.random.default_rng(7)
    solved = 0
    while solved < 20:
        a = rng.integers(0, 2, size=(6, 6)).astype(np.uint8)
        if rank(a) < 6:
            continue
        x = rng.integers(0, 2, size=6).astype(np.uint8)
        y = (a.astype(np.int64) @ x) & 1
        assert np.array_equal(solve_linear(a, y), x)
        solved += 1


def test_rank():
    """Rank over GF(2) differs from the real rank."""
    a = np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]], dtype=np.uint8)
    assert rank(a) == 2
    assert rank(np.eye(4, dtype=np.uint8)) == 4
