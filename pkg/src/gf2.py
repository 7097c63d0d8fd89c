"""Bit-vector and bit-matrix arithmetic over GF(2).

Vectors and matrices are numpy ``uint8`` arrays holding 0/1 entries. Bit ``i``
of a vector belongs to qubit ``i`` (qubit 1 is the leftmost character of a
bitstring and the most significant bit of an integer index).
"""

import logging
from functools import lru_cache
from itertools import combinations
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt

from .config import MAX_TABLE_QUBITS, PRIMITIVE_POLYNOMIALS
from .exceptions import DimensionMismatchError, InvalidInputError, SingularMatrixError

logger = logging.getLogger("seqpt")

BitVector = npt.NDArray[np.uint8]
BitMatrix = npt.NDArray[np.uint8]
BitsLike = Union[Sequence[int], npt.NDArray[np.integer]]


def as_bits(bits: BitsLike) -> BitVector:
    """Copy ``bits`` into a fresh uint8 vector, rejecting anything but 0/1."""
    array = np.array(bits, dtype=np.int64).reshape(-1)
    if np.any((array != 0) & (array != 1)):
        raise InvalidInputError(f"bit vector entries must be 0 or 1, got {array.tolist()}")
    return array.astype(np.uint8)


def as_bit_matrix(rows: Union[Sequence[Sequence[int]], npt.NDArray[np.integer]]) -> BitMatrix:
    """Copy ``rows`` into a square uint8 matrix of 0/1 entries."""
    matrix = np.array(rows, dtype=np.int64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatchError(f"bit matrix must be square, got shape {matrix.shape}")
    if np.any((matrix != 0) & (matrix != 1)):
        raise InvalidInputError("bit matrix entries must be 0 or 1")
    return matrix.astype(np.uint8)


def from_bitstring(text: str) -> BitVector:
    """Parse ``"101"`` into a bit vector."""
    if not text or any(c not in "01" for c in text):
        raise InvalidInputError(f"invalid bitstring {text!r}")
    return np.array([int(c) for c in text], dtype=np.uint8)


def to_bitstring(bits: BitsLike) -> str:
    return "".join(str(int(b)) for b in np.asarray(bits).reshape(-1))


def bits_to_int(bits: BitsLike) -> int:
    """Integer whose binary expansion (most significant first) is ``bits``."""
    value = 0
    for b in np.asarray(bits).reshape(-1):
        value = (value << 1) | int(b)
    return value


def int_to_bits(value: int, length: int) -> BitVector:
    if value < 0 or value >= 1 << length:
        raise InvalidInputError(f"{value} does not fit in {length} bits")
    return np.array([(value >> (length - 1 - i)) & 1 for i in range(length)], dtype=np.uint8)


def exponents_to_coeffs(exponents: Iterable[int], degree: int) -> BitVector:
    """Low coefficients r_0..r_{n-1} of the monic polynomial with the given exponents."""
    coeffs = np.zeros(degree, dtype=np.uint8)
    for e in exponents:
        if 0 <= e < degree:
            coeffs[e] = 1
    return coeffs


def companion_matrix(poly_coeffs: BitsLike) -> BitMatrix:
    """Companion matrix of p(x) = r_0 + r_1 x + ... + r_{n-1} x^{n-1} + x^n.

    Ones on the superdiagonal and the coefficients (r_0, ..., r_{n-1}) on the
    last row.

    Raises:
        InvalidInputError: if the polynomial has degree 0.
    """
    coeffs = as_bits(poly_coeffs)
    n = coeffs.size
    if n == 0:
        raise InvalidInputError("companion matrix needs a polynomial of degree >= 1")

    matrix = np.zeros((n, n), dtype=np.uint8)
    for i in range(n - 1):
        matrix[i, i + 1] = 1
    matrix[n - 1, :] = coeffs
    return matrix


def companion_coeffs(matrix: BitMatrix) -> Union[BitVector, None]:
    """Return (r_0..r_{n-1}) if ``matrix`` has companion structure, else None."""
    n = matrix.shape[0]
    expected = companion_matrix(matrix[n - 1, :])
    if np.array_equal(expected, matrix):
        return matrix[n - 1, :].copy()
    return None


def companion_step(v: BitVector, coeffs: BitVector, transpose: bool = False) -> BitVector:
    """Compute v·M (or v·Mᵀ with ``transpose``) in O(n) for a companion matrix M."""
    n = v.size
    out = np.zeros(n, dtype=np.uint8)
    if transpose:
        # (v·Mᵀ)_j = row j of M dotted with v
        out[: n - 1] = v[1:]
        out[n - 1] = int(np.dot(coeffs.astype(np.int64), v.astype(np.int64)) & 1)
    else:
        out[1:] = v[: n - 1]
        if v[n - 1]:
            out ^= coeffs
    return out


def mat_vec(v: BitsLike, a: BitMatrix) -> BitVector:
    """Row vector times matrix, mod 2.

    Raises:
        DimensionMismatchError: if ``len(v)`` differs from the row count of ``a``.
    """
    vec = as_bits(v)
    if a.ndim != 2 or vec.size != a.shape[0]:
        raise DimensionMismatchError(f"cannot multiply length-{vec.size} vector by {a.shape} matrix")
    return ((vec.astype(np.int64) @ a.astype(np.int64)) & 1).astype(np.uint8)


def mat_mul(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatchError(f"cannot multiply {a.shape} by {b.shape}")
    return ((a.astype(np.int64) @ b.astype(np.int64)) & 1).astype(np.uint8)


def mat_pow(a: BitMatrix, exponent: int) -> BitMatrix:
    """a**exponent over GF(2) by repeated squaring."""
    if exponent < 0:
        raise InvalidInputError("negative exponents are not supported")
    result = np.eye(a.shape[0], dtype=np.uint8)
    base = a.copy()
    while exponent:
        if exponent & 1:
            result = mat_mul(result, base)
        base = mat_mul(base, base)
        exponent >>= 1
    return result


def _prime_factors(value: int) -> List[int]:
    factors = []
    p = 2
    while p * p <= value:
        if value % p == 0:
            factors.append(p)
            while value % p == 0:
                value //= p
        p += 1 if p == 2 else 2
    if value > 1:
        factors.append(value)
    return factors


def validate_primitive(matrix: BitMatrix) -> bool:
    """True iff M^D = M and M^k != M for 1 < k < D, with D = 2^n.

    For an invertible M this is the statement that M has multiplicative order
    D - 1, checked as M^(D-1) = I and M^((D-1)/q) != I for every prime q
    dividing D - 1.
    """
    m = np.asarray(matrix, dtype=np.uint8)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        return False

    n = m.shape[0]
    order = (1 << n) - 1
    identity = np.eye(n, dtype=np.uint8)
    if not np.array_equal(mat_pow(m, order), identity):
        return False
    return all(not np.array_equal(mat_pow(m, order // q), identity) for q in _prime_factors(order))


def rank(a: BitMatrix) -> int:
    work = np.array(a, dtype=np.uint8)
    rows, cols = work.shape
    r = 0
    for c in range(cols):
        pivots = np.nonzero(work[r:, c])[0]
        if pivots.size == 0:
            continue
        p = r + pivots[0]
        work[[r, p]] = work[[p, r]]
        ones = np.nonzero(work[:, c])[0]
        ones = ones[ones != r]
        work[ones, :] ^= work[r, :]
        r += 1
        if r == rows:
            break
    return r


def solve_linear(a: BitMatrix, y: BitsLike) -> BitVector:
    """Solve a·x = y over GF(2) by Gaussian elimination.

    Raises:
        DimensionMismatchError: on incompatible shapes.
        SingularMatrixError: if ``a`` is singular.
    """
    rhs = as_bits(y)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] != rhs.size:
        raise DimensionMismatchError(f"cannot solve {a.shape} system with length-{rhs.size} rhs")

    n = rhs.size
    augmented = np.concatenate([np.array(a, dtype=np.uint8), rhs.reshape(n, 1)], axis=1)
    for c in range(n):
        pivots = np.nonzero(augmented[c:, c])[0]
        if pivots.size == 0:
            raise SingularMatrixError(f"matrix is singular over GF(2) (no pivot in column {c + 1})")
        p = c + pivots[0]
        if p != c:
            augmented[[c, p]] = augmented[[p, c]]
        ones = np.nonzero(augmented[:, c])[0]
        ones = ones[ones != c]
        augmented[ones, :] ^= augmented[c, :]
    return augmented[:, n].copy()


def find_primitive_polynomial(n: int) -> Tuple[int, ...]:
    """Search trinomials, then pentanomials, for a primitive polynomial of degree n."""
    if n < 1:
        raise InvalidInputError("degree must be >= 1")
    if n == 1:
        return (1, 0)

    for weight in (1, 3):
        for middle in combinations(range(1, n), weight):
            exponents = (n,) + tuple(sorted(middle, reverse=True)) + (0,)
            if validate_primitive(companion_matrix(exponents_to_coeffs(exponents, n))):
                return exponents
    raise InvalidInputError(f"no primitive trinomial or pentanomial of degree {n}")


@lru_cache(maxsize=None)
def _table_companion(n: int) -> Tuple[Tuple[int, ...], ...]:
    exponents = PRIMITIVE_POLYNOMIALS.get(n)
    if exponents is not None:
        matrix = companion_matrix(exponents_to_coeffs(exponents, n))
        if validate_primitive(matrix):
            return tuple(tuple(int(b) for b in row) for row in matrix)
        logger.warning(f"Table polynomial {exponents} is not primitive for n={n}; searching")

    exponents = find_primitive_polynomial(n)
    logger.debug(f"Using primitive polynomial with exponents {exponents} for n={n}")
    return tuple(tuple(int(b) for b in row) for row in companion_matrix(exponents_to_coeffs(exponents, n)))


def primitive_companion(n: int) -> BitMatrix:
    """Validated companion matrix of the built-in primitive polynomial of degree n."""
    if not 1 <= n <= MAX_TABLE_QUBITS:
        raise InvalidInputError(f"n must be between 1 and {MAX_TABLE_QUBITS}, got {n}")
    return np.array(_table_companion(n), dtype=np.uint8)
