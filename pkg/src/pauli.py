"""Generalized Pauli operators with exact phase tracking.

An operator is stored as ``i**phase * ⊗_q σ(x_q, z_q)`` where σ(0,0)=I,
σ(1,0)=X, σ(1,1)=Y, σ(0,1)=Z are the Hermitian single-qubit Paulis. Canonical
basis elements have ``phase == 0``; a sign flip adds 2 to the phase.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from itertools import combinations, product
from typing import Iterator, List, Tuple

import numpy as np
import numpy.typing as npt

from .exceptions import DenseLimitError, DimensionMismatchError, InvalidInputError
from .gf2 import BitsLike, BitVector, as_bits

logger = logging.getLogger("seqpt")

DENSE_QUBIT_LIMIT = 10

ComplexMatrix = npt.NDArray[np.complex128]

_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_LETTER = {bits: letter for letter, bits in _LETTER_BITS.items()}
_LETTER_INDEX = {"I": 0, "X": 1, "Y": 2, "Z": 3}
_PHASE_PREFIX = {"": 0, "+": 0, "+i": 1, "i": 1, "-": 2, "-i": 3}
_PREFIX_OF_PHASE = {0: "", 1: "+i", 2: "-", 3: "-i"}

_SINGLE_QUBIT = {
    (0, 0): np.eye(2, dtype=complex),
    (1, 0): np.array([[0, 1], [1, 0]], dtype=complex),
    (1, 1): np.array([[0, -1j], [1j, 0]], dtype=complex),
    (0, 1): np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True, eq=False)
class PauliOperator:
    """A Pauli operator ``i**phase * σ(x_bits, z_bits)``."""

    x_bits: BitVector
    z_bits: BitVector
    phase: int = 0

    def __post_init__(self) -> None:
        x = as_bits(self.x_bits)
        z = as_bits(self.z_bits)
        if x.size != z.size:
            raise DimensionMismatchError(f"x part has {x.size} bits but z part has {z.size}")
        if x.size == 0:
            raise InvalidInputError("a Pauli operator needs at least one qubit")
        x.setflags(write=False)
        z.setflags(write=False)
        object.__setattr__(self, "x_bits", x)
        object.__setattr__(self, "z_bits", z)
        object.__setattr__(self, "phase", int(self.phase) % 4)

    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(np.zeros(n, dtype=np.uint8), np.zeros(n, dtype=np.uint8))

    @classmethod
    def from_label(cls, label: str) -> "PauliOperator":
        """Parse a label such as ``"YIZ"`` (optionally prefixed by +, -, i, +i, -i).

        Raises:
            InvalidInputError: on an empty label or a character outside I, X, Y, Z.
        """
        text = label.strip()
        body = text.lstrip("+-i")
        prefix = text[: len(text) - len(body)]
        if prefix not in _PHASE_PREFIX:
            raise InvalidInputError(f"invalid phase prefix {prefix!r} in Pauli label {label!r}")
        if not body:
            raise InvalidInputError("Pauli label must not be empty")

        bad = sorted({c for c in body if c not in _LETTER_BITS})
        if bad:
            raise InvalidInputError(f"invalid character(s) {''.join(bad)!r} in Pauli label {label!r}")

        x = [_LETTER_BITS[c][0] for c in body]
        z = [_LETTER_BITS[c][1] for c in body]
        return cls(x, z, _PHASE_PREFIX[prefix])

    def to_label(self) -> str:
        """Label over I, X, Y, Z; non-canonical phases get a prefix (``-``, ``+i``, ``-i``)."""
        letters = "".join(_BITS_LETTER[(int(x), int(z))] for x, z in zip(self.x_bits, self.z_bits))
        return _PREFIX_OF_PHASE[self.phase] + letters

    @property
    def num_qubits(self) -> int:
        return int(self.x_bits.size)

    @property
    def key(self) -> Tuple[bytes, bytes]:
        """Phase-free identity of the operator, used for deduplication."""
        return (self.x_bits.tobytes(), self.z_bits.tobytes())

    @property
    def weight(self) -> int:
        return int(np.count_nonzero(self.x_bits | self.z_bits))

    def is_identity(self) -> bool:
        return self.phase == 0 and not self.x_bits.any() and not self.z_bits.any()

    def canonical(self) -> "PauliOperator":
        """Same operator with the phase discarded."""
        if self.phase == 0:
            return self
        return PauliOperator(self.x_bits, self.z_bits, 0)

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        return multiply(self, other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PauliOperator):
            return NotImplemented
        return (
            self.phase == other.phase
            and np.array_equal(self.x_bits, other.x_bits)
            and np.array_equal(self.z_bits, other.z_bits)
        )

    def __hash__(self) -> int:
        return hash(self.key + (self.phase,))

    def __repr__(self) -> str:
        return f"PauliOperator({self.to_label()!r})"


def _require_same_size(p: PauliOperator, q: PauliOperator) -> None:
    if p.num_qubits != q.num_qubits:
        raise DimensionMismatchError(f"operators act on {p.num_qubits} and {q.num_qubits} qubits")


def _product_phase(x1: np.ndarray, z1: np.ndarray, x2: np.ndarray, z2: np.ndarray) -> int:
    """Exponent g with σ(x1,z1)·σ(x2,z2) = i**g σ(x1^x2, z1^z2), summed over qubits."""
    x1, z1, x2, z2 = (a.astype(np.int64) for a in (x1, z1, x2, z2))
    is_y = x1 * z1
    is_x = x1 * (1 - z1)
    is_z = (1 - x1) * z1
    g = is_y * (z2 - x2) + is_x * z2 * (2 * x2 - 1) + is_z * x2 * (1 - 2 * z2)
    return int(g.sum())


def multiply(p: PauliOperator, q: PauliOperator) -> PauliOperator:
    """Exact product p·q including the accumulated power of i.

    Raises:
        DimensionMismatchError: if the qubit counts differ.
    """
    _require_same_size(p, q)
    phase = p.phase + q.phase + _product_phase(p.x_bits, p.z_bits, q.x_bits, q.z_bits)
    return PauliOperator(p.x_bits ^ q.x_bits, p.z_bits ^ q.z_bits, phase)


def symplectic_product(p: PauliOperator, q: PauliOperator) -> int:
    """(x_p·z_q + z_p·x_q) mod 2; zero iff p and q commute."""
    _require_same_size(p, q)
    total = np.count_nonzero(p.x_bits & q.z_bits) + np.count_nonzero(p.z_bits & q.x_bits)
    return int(total & 1)


def commutes(p: PauliOperator, q: PauliOperator) -> bool:
    return symplectic_product(p, q) == 0


class GateKind(str, Enum):
    """Clifford gates used by the change-of-basis circuits."""

    H = "H"
    S = "S"
    SDG = "SDG"
    CNOT = "CNOT"
    X = "X"


_INVERSE_KIND = {GateKind.S: GateKind.SDG, GateKind.SDG: GateKind.S}


@dataclass(frozen=True)
class GateAction:
    """A gate and the (0-based) qubits it acts on; CNOT qubits are (control, target)."""

    kind: GateKind
    qubits: Tuple[int, ...]

    def __post_init__(self) -> None:
        kind = GateKind(self.kind)
        qubits = tuple(int(q) for q in self.qubits)
        arity = 2 if kind is GateKind.CNOT else 1
        if len(qubits) != arity:
            raise InvalidInputError(f"{kind.value} acts on {arity} qubit(s), got {qubits}")
        if any(q < 0 for q in qubits):
            raise InvalidInputError(f"negative qubit index in {qubits}")
        if kind is GateKind.CNOT and qubits[0] == qubits[1]:
            raise InvalidInputError("CNOT control and target must differ")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", qubits)

    @classmethod
    def h(cls, qubit: int) -> "GateAction":
        return cls(GateKind.H, (qubit,))

    @classmethod
    def phase(cls, qubit: int) -> "GateAction":
        return cls(GateKind.S, (qubit,))

    @classmethod
    def phase_dagger(cls, qubit: int) -> "GateAction":
        return cls(GateKind.SDG, (qubit,))

    @classmethod
    def cnot(cls, control: int, target: int) -> "GateAction":
        return cls(GateKind.CNOT, (control, target))

    @classmethod
    def x(cls, qubit: int) -> "GateAction":
        return cls(GateKind.X, (qubit,))

    def inverse(self) -> "GateAction":
        return GateAction(_INVERSE_KIND.get(self.kind, self.kind), self.qubits)

    def check_register(self, n: int) -> None:
        """Raise InvalidInputError if the gate reaches outside an n-qubit register."""
        if max(self.qubits) >= n:
            raise InvalidInputError(f"{self} acts outside a {n}-qubit register")

    def __str__(self) -> str:
        return " ".join([self.kind.value] + [str(q + 1) for q in self.qubits])


def apply_gate_to_rows(xs: np.ndarray, zs: np.ndarray, phases: np.ndarray, gate: GateAction) -> None:
    """Propagate every row (x, z, phase) of a Pauli tableau forward through ``gate``, in place.

    Each row P becomes g·P·g†.
    """
    if gate.kind is GateKind.CNOT:
        c, t = gate.qubits
        flip = xs[:, c] & zs[:, t] & (xs[:, t] ^ zs[:, c] ^ 1)
        phases += 2 * flip.astype(phases.dtype)
        xs[:, t] ^= xs[:, c]
        zs[:, c] ^= zs[:, t]
        phases %= 4
        return

    q = gate.qubits[0]
    xq = xs[:, q].copy()
    zq = zs[:, q].copy()
    if gate.kind is GateKind.H:
        phases += 2 * (xq & zq).astype(phases.dtype)
        xs[:, q], zs[:, q] = zq, xq
    elif gate.kind is GateKind.S:
        phases += 2 * (xq & zq).astype(phases.dtype)
        zs[:, q] = zq ^ xq
    elif gate.kind is GateKind.SDG:
        phases += 2 * (xq & (zq ^ 1)).astype(phases.dtype)
        zs[:, q] = zq ^ xq
    elif gate.kind is GateKind.X:
        phases += 2 * zq.astype(phases.dtype)
    phases %= 4


def conjugate_by_gate(p: PauliOperator, gate: GateAction) -> PauliOperator:
    """Propagate ``p`` forward through ``gate``: returns g·p·g† exactly.

    Raises:
        InvalidInputError: if the gate reaches outside the operator's register.
    """
    gate.check_register(p.num_qubits)
    xs = p.x_bits.reshape(1, -1).copy()
    zs = p.z_bits.reshape(1, -1).copy()
    phases = np.array([p.phase], dtype=np.int64)
    apply_gate_to_rows(xs, zs, phases, gate)
    return PauliOperator(xs[0], zs[0], int(phases[0]))


def _check_dense(n: int) -> None:
    if n > DENSE_QUBIT_LIMIT:
        raise DenseLimitError(f"dense matrices are limited to {DENSE_QUBIT_LIMIT} qubits, got {n}")


def dense_matrix(p: PauliOperator) -> ComplexMatrix:
    """Exact 2^n x 2^n matrix of ``p`` (qubit 1 is the leftmost tensor factor)."""
    _check_dense(p.num_qubits)
    matrix = np.ones((1, 1), dtype=complex)
    for x, z in zip(p.x_bits, p.z_bits):
        matrix = np.kron(matrix, _SINGLE_QUBIT[(int(x), int(z))])
    return matrix * (1j**p.phase)


_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_GATE_MATRICES = {
    GateKind.H: _HADAMARD,
    GateKind.S: np.diag([1, 1j]).astype(complex),
    GateKind.SDG: np.diag([1, -1j]).astype(complex),
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
}


def apply_gate(gate: GateAction, amplitudes: np.ndarray, n: int) -> np.ndarray:
    """Apply ``gate`` to the leading 2^n axis of ``amplitudes`` (a state or a stack of columns)."""
    _check_dense(n)
    gate.check_register(n)
    shaped = np.asarray(amplitudes, dtype=complex).reshape((2,) * n + (-1,))

    if gate.kind is GateKind.CNOT:
        c, t = gate.qubits
        out = shaped.copy()
        index: List[object] = [slice(None)] * (n + 1)
        index[c] = 1
        target_axis = t if t < c else t - 1
        out[tuple(index)] = np.flip(shaped[tuple(index)], axis=target_axis)
    else:
        q = gate.qubits[0]
        out = np.moveaxis(np.tensordot(_GATE_MATRICES[gate.kind], shaped, axes=([1], [q])), 0, q)

    return out.reshape(np.shape(amplitudes))


def apply_pauli(p: PauliOperator, amplitudes: np.ndarray) -> np.ndarray:
    """p·v for a state or a stack of columns, one qubit at a time."""
    n = p.num_qubits
    _check_dense(n)
    shaped = np.asarray(amplitudes, dtype=complex).reshape((2,) * n + (-1,))
    for q, (x, z) in enumerate(zip(p.x_bits, p.z_bits)):
        if x or z:
            factor = _SINGLE_QUBIT[(int(x), int(z))]
            shaped = np.moveaxis(np.tensordot(factor, shaped, axes=([1], [q])), 0, q)
    return (shaped * (1j**p.phase)).reshape(np.shape(amplitudes))


def gate_unitary(gate: GateAction, n: int) -> ComplexMatrix:
    """Dense 2^n x 2^n unitary of a single gate."""
    return apply_gate(gate, np.eye(1 << n, dtype=complex), n)


def pauli_index(p: PauliOperator) -> int:
    """Position of ``p`` in the ordered basis (base-4 digits I=0, X=1, Y=2, Z=3)."""
    index = 0
    for letter in p.canonical().to_label():
        index = 4 * index + _LETTER_INDEX[letter]
    return index


def pauli_from_index(index: int, n: int) -> PauliOperator:
    if not 0 <= index < 4**n:
        raise InvalidInputError(f"Pauli index {index} out of range for {n} qubits")
    letters = []
    for _ in range(n):
        letters.append("IXYZ"[index % 4])
        index //= 4
    return PauliOperator.from_label("".join(reversed(letters)))


def pauli_basis(n: int) -> Iterator[PauliOperator]:
    """All 4^n canonical Paulis in basis order (identity first)."""
    for letters in product("IXYZ", repeat=n):
        yield PauliOperator.from_label("".join(letters))


def paulis_of_weight(n: int, weight: int) -> List[PauliOperator]:
    """All canonical Paulis acting non-trivially on exactly ``weight`` qubits, in basis order."""
    if not 0 <= weight <= n:
        raise InvalidInputError(f"weight must be between 0 and {n}, got {weight}")
    found = []
    for support in combinations(range(n), weight):
        for letters in product("XYZ", repeat=weight):
            label = ["I"] * n
            for q, letter in zip(support, letters):
                label[q] = letter
            found.append(PauliOperator.from_label("".join(label)))
    return sorted(found, key=pauli_index)


@lru_cache(maxsize=4)
def basis_matrices(n: int) -> ComplexMatrix:
    """Stack of the dense basis operators E_m, shape (4^n, 2^n, 2^n)."""
    if n > 3:
        raise DenseLimitError(f"the full Pauli basis stack is limited to 3 qubits, got {n}")
    stack = np.array([dense_matrix(p) for p in pauli_basis(n)])
    stack.setflags(write=False)
    return stack
