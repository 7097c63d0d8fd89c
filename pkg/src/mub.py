"""Mutually unbiased bases from the stabilizer partition of the Pauli group.

For n qubits there are D + 1 = 2^n + 1 bases: the computational basis,
stabilized by the single-qubit Z's, and one basis per bit vector b whose
generators are the Paulis with x-part e1·M^j and z-part b·(Mᵀ)^j,
j = 0..n-1, for the companion matrix M of a primitive polynomial.
"""

import logging
from dataclasses import dataclass
from itertools import product
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .exceptions import DimensionMismatchError, InvalidInputError
from .gf2 import BitMatrix, BitsLike, BitVector, as_bits, companion_coeffs, companion_step, mat_vec
from .gf2 import bits_to_int, int_to_bits, to_bitstring, validate_primitive
from .pauli import PauliOperator, multiply

logger = logging.getLogger("seqpt")

COMPUTATIONAL_LABEL = "Z"


@dataclass(frozen=True)
class BasisId:
    """One of the D + 1 bases: ``b is None`` for the computational basis."""

    n: int
    b: Optional[Tuple[int, ...]] = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidInputError(f"a basis needs at least one qubit, got n={self.n}")
        if self.b is not None:
            bits = tuple(int(v) for v in as_bits(self.b))
            if len(bits) != self.n:
                raise DimensionMismatchError(f"b has {len(bits)} bits but n={self.n}")
            object.__setattr__(self, "b", bits)

    @classmethod
    def computational(cls, n: int) -> "BasisId":
        return cls(n)

    @classmethod
    def mub(cls, b: BitsLike) -> "BasisId":
        bits = as_bits(b)
        return cls(int(bits.size), tuple(int(v) for v in bits))

    @classmethod
    def from_label(cls, label: str, n: Optional[int] = None) -> "BasisId":
        """Parse ``"Z"`` or a bitstring such as ``"101"``."""
        if label == COMPUTATIONAL_LABEL:
            if n is None:
                raise InvalidInputError("the qubit count is needed to parse the computational basis label")
            return cls(n)
        if not label or any(c not in "01" for c in label):
            raise InvalidInputError(f"invalid basis label {label!r}")
        if n is not None and len(label) != n:
            raise DimensionMismatchError(f"basis label {label!r} does not have {n} bits")
        return cls(len(label), tuple(int(c) for c in label))

    @classmethod
    def from_index(cls, index: int, n: int) -> "BasisId":
        """Index 0 is the computational basis, index 1 + int(b) is the basis of b."""
        if not 0 <= index <= 1 << n:
            raise InvalidInputError(f"basis index {index} out of range for n={n}")
        if index == 0:
            return cls(n)
        return cls(n, tuple(int(v) for v in int_to_bits(index - 1, n)))

    @property
    def is_computational(self) -> bool:
        return self.b is None

    @property
    def index(self) -> int:
        return 0 if self.b is None else 1 + bits_to_int(self.b)

    @property
    def label(self) -> str:
        return COMPUTATIONAL_LABEL if self.b is None else to_bitstring(self.b)

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class StabilizerBasis:
    """A basis together with its n canonical generators, in order."""

    basis: BasisId
    generators: Tuple[PauliOperator, ...]

    @property
    def x_matrix(self) -> np.ndarray:
        """Row j holds the x-part of generator j."""
        return np.array([g.x_bits for g in self.generators], dtype=np.uint8)

    @property
    def z_matrix(self) -> np.ndarray:
        return np.array([g.z_bits for g in self.generators], dtype=np.uint8)


@dataclass(frozen=True)
class StateIndex:
    """State k of basis J: the projector Π_{J,k}."""

    basis: BasisId
    k: Tuple[int, ...]

    def __post_init__(self) -> None:
        bits = tuple(int(v) for v in as_bits(self.k))
        if len(bits) != self.basis.n:
            raise DimensionMismatchError(f"k has {len(bits)} bits but the basis has n={self.basis.n}")
        object.__setattr__(self, "k", bits)

    @property
    def n(self) -> int:
        return self.basis.n

    @property
    def label(self) -> str:
        return f"{self.basis.label}:{to_bitstring(self.k)}"


def all_bases(n: int) -> List[BasisId]:
    """The D + 1 bases in index order."""
    return [BasisId.from_index(i, n) for i in range((1 << n) + 1)]


def all_states(n: int) -> List[StateIndex]:
    """All D(D+1) design states, basis-major."""
    return [
        StateIndex(basis, bits)
        for basis in all_bases(n)
        for bits in product((0, 1), repeat=n)
    ]


def mub_generators(b: BitsLike, companion: BitMatrix) -> Tuple[PauliOperator, ...]:
    """Generators of basis b without re-validating ``companion``."""
    b_bits = as_bits(b)
    n = b_bits.size
    if companion.shape != (n, n):
        raise DimensionMismatchError(f"companion matrix is {companion.shape}, expected {(n, n)}")

    coeffs = companion_coeffs(companion)
    x = np.zeros(n, dtype=np.uint8)
    x[0] = 1
    z = b_bits
    generators = []
    for j in range(n):
        if j:
            if coeffs is not None:
                x = companion_step(x, coeffs)
                z = companion_step(z, coeffs, transpose=True)
            else:
                x = mat_vec(x, companion)
                z = mat_vec(z, companion.T)
        generators.append(PauliOperator(x, z))
    return tuple(generators)


def computational_generators(n: int) -> Tuple[PauliOperator, ...]:
    eye = np.eye(n, dtype=np.uint8)
    zero = np.zeros(n, dtype=np.uint8)
    return tuple(PauliOperator(zero, eye[j]) for j in range(n))


def canonical_generators(basis: BasisId, n: int, companion: Optional[BitMatrix] = None) -> Tuple[PauliOperator, ...]:
    """The n canonical generators of ``basis``, ordered j = 0..n-1.

    Raises:
        DimensionMismatchError: if ``basis`` is not an n-qubit basis.
        InvalidInputError: if a MUB basis is requested with a missing or non-primitive M.
    """
    if basis.n != n:
        raise DimensionMismatchError(f"basis {basis} is for {basis.n} qubits, not {n}")
    if basis.is_computational:
        return computational_generators(n)
    if companion is None or not validate_primitive(companion):
        raise InvalidInputError("a primitive companion matrix is required for MUB generators")
    return mub_generators(basis.b or (), companion)


def commutation_vector(error: PauliOperator, stabilizer: StabilizerBasis) -> BitVector:
    """v_i = symplectic product of generator i with ``error``."""
    if error.num_qubits != stabilizer.basis.n:
        raise DimensionMismatchError(
            f"operator acts on {error.num_qubits} qubits, basis on {stabilizer.basis.n}"
        )
    xs = stabilizer.x_matrix.astype(np.int64)
    zs = stabilizer.z_matrix.astype(np.int64)
    v = xs @ error.z_bits.astype(np.int64) + zs @ error.x_bits.astype(np.int64)
    return (v & 1).astype(np.uint8)


def transition_target(state: StateIndex, error: PauliOperator, stabilizer: StabilizerBasis) -> StateIndex:
    """The state E maps Π_{J,k} onto: same basis, k' = k xor v(E, J)."""
    if stabilizer.basis != state.basis:
        raise InvalidInputError(f"stabilizer is for basis {stabilizer.basis}, state is in {state.basis}")
    v = commutation_vector(error, stabilizer)
    return StateIndex(state.basis, tuple(int(a) ^ int(b) for a, b in zip(state.k, v)))


def generated_group(generators: Sequence[PauliOperator]) -> List[PauliOperator]:
    """All 2^n products of the generators, phases dropped."""
    group = []
    for mask in product((0, 1), repeat=len(generators)):
        element = PauliOperator.identity(generators[0].num_qubits)
        for bit, g in zip(mask, generators):
            if bit:
                element = multiply(element, g)
        group.append(element.canonical())
    return group
