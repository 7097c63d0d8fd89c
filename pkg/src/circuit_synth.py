"""Change-of-basis circuit synthesis for the MUB stabilizer bases.

The synthesized circuit U maps basis-J states to computational states:
U·G_j·U† = (-1)^{s_j} Z_j for every canonical generator G_j. State k of basis
J is defined as U†|k⟩, so preparation is "X on the set bits of k, then U⁻¹"
and measurement is "U, then computational readout".
"""

import logging
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

import numpy as np

from .exceptions import InvalidInputError, SynthesisError
from .gf2 import BitMatrix, BitsLike, as_bits, validate_primitive
from .mub import BasisId, StateIndex, computational_generators, mub_generators
from .pauli import (
    ComplexMatrix,
    GateAction,
    GateKind,
    PauliOperator,
    apply_gate,
    apply_gate_to_rows,
    conjugate_by_gate,
)

logger = logging.getLogger("seqpt")

CIRCUIT_FORMATS = ("plain", "qasm")
QASM_HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\nqreg q[{n}];'
_QASM_NAMES = {
    GateKind.H: "h",
    GateKind.S: "s",
    GateKind.SDG: "sdg",
    GateKind.X: "x",
    GateKind.CNOT: "cx",
}
_QASM_KINDS = {name: kind for kind, name in _QASM_NAMES.items()}


def gate_bound(n: int) -> int:
    """Upper bound on the gate count of a synthesized n-qubit circuit."""
    return 4 * n * n


@dataclass(frozen=True)
class Circuit:
    """Ordered gate sequence; the leftmost gate is applied first."""

    qubit_count: int
    gates: Tuple[GateAction, ...] = ()

    def __post_init__(self) -> None:
        if self.qubit_count < 1:
            raise InvalidInputError(f"a circuit needs at least one qubit, got {self.qubit_count}")
        gates = tuple(self.gates)
        for gate in gates:
            gate.check_register(self.qubit_count)
        object.__setattr__(self, "gates", gates)

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self) -> Iterator[GateAction]:
        return iter(self.gates)

    def inverse(self) -> "Circuit":
        """Gates reversed, each one inverted."""
        return Circuit(self.qubit_count, tuple(g.inverse() for g in reversed(self.gates)))

    def then(self, other: "Circuit") -> "Circuit":
        """This circuit followed by ``other``."""
        if other.qubit_count != self.qubit_count:
            raise InvalidInputError("cannot compose circuits on different registers")
        return Circuit(self.qubit_count, self.gates + other.gates)

    def conjugate(self, p: PauliOperator) -> PauliOperator:
        """U·p·U† for the circuit unitary U, without dense matrices."""
        for gate in self.gates:
            p = conjugate_by_gate(p, gate)
        return p

    def apply(self, state: np.ndarray) -> np.ndarray:
        """Dense action on a state vector (or a stack of columns)."""
        out = np.asarray(state, dtype=complex)
        for gate in self.gates:
            out = apply_gate(gate, out, self.qubit_count)
        return out

    def unitary(self) -> ComplexMatrix:
        return self.apply(np.eye(1 << self.qubit_count, dtype=complex))


@dataclass(frozen=True)
class SynthesisResult:
    """A change-of-basis circuit with the generator signs it produces.

    ``stages[i]`` holds the transformed generators after iteration i.
    """

    basis: BasisId
    circuit: Circuit
    generator_signs: Tuple[int, ...]
    stages: Tuple[Tuple[PauliOperator, ...], ...] = ()


class _Tableau:
    """Generators as rows of x/z bit arrays, updated in place as gates are emitted."""

    def __init__(self, generators: Tuple[PauliOperator, ...]) -> None:
        self.n = generators[0].num_qubits
        self.xs = np.array([g.x_bits for g in generators], dtype=np.uint8)
        self.zs = np.array([g.z_bits for g in generators], dtype=np.uint8)
        self.phases = np.array([g.phase for g in generators], dtype=np.int64)
        self.gates: List[GateAction] = []

    def emit(self, gate: GateAction) -> None:
        apply_gate_to_rows(self.xs, self.zs, self.phases, gate)
        self.gates.append(gate)

    def operators(self) -> Tuple[PauliOperator, ...]:
        return tuple(
            PauliOperator(self.xs[j], self.zs[j], int(self.phases[j])) for j in range(len(self.xs))
        )


def _synthesize(basis: BasisId, generators: Tuple[PauliOperator, ...]) -> SynthesisResult:
    tableau = _Tableau(generators)
    n = tableau.n
    stages = []

    for pivot in range(n):
        # Rotations: every active qubit of the pivot generator becomes I or Z.
        for q in range(pivot, n):
            x, z = tableau.xs[pivot, q], tableau.zs[pivot, q]
            if x and z:
                tableau.emit(GateAction.phase_dagger(q))
                tableau.emit(GateAction.h(q))
            elif x:
                tableau.emit(GateAction.h(q))

        if not tableau.zs[pivot, pivot]:
            holders = [q for q in range(pivot + 1, n) if tableau.zs[pivot, q]]
            if not holders:
                raise SynthesisError(f"generator {pivot + 1} of basis {basis} has no support on active qubits")
            logger.debug(f"Moving Z onto pivot qubit {pivot + 1} from qubit {holders[0] + 1}")
            tableau.emit(GateAction.cnot(pivot, holders[0]))

        # CNOTs collapse the remaining Z's onto the pivot, ascending control.
        for control in range(n):
            if control != pivot and tableau.zs[pivot, control]:
                tableau.emit(GateAction.cnot(control, pivot))

        stages.append(tableau.operators())

    expected = np.eye(n, dtype=np.uint8)
    if tableau.xs.any() or not np.array_equal(tableau.zs, expected) or np.any(tableau.phases % 2):
        raise SynthesisError(f"synthesis for basis {basis} did not reach single-qubit Z generators")
    if len(tableau.gates) > gate_bound(n):
        raise SynthesisError(f"synthesis for basis {basis} used {len(tableau.gates)} > {gate_bound(n)} gates")

    signs = tuple(int(p) // 2 for p in tableau.phases)
    return SynthesisResult(basis, Circuit(n, tuple(tableau.gates)), signs, tuple(stages))


def synthesize_change_of_basis(b: BitsLike, companion: BitMatrix) -> SynthesisResult:
    """Synthesize the circuit that maps the MUB of ``b`` onto the computational basis.

    Each of the n iterations (i) rotates every active qubit of the current
    generator to I or Z (X -> H, Y -> Phase† then H), (ii) applies CNOTs with
    control on each qubit holding Z and target on the pivot qubit, and
    (iii) propagates the remaining generators through the new gates.

    Raises:
        InvalidInputError: if ``companion`` is not a primitive n x n matrix.
        SynthesisError: if the result is not a set of ±Z generators within the gate bound.
    """
    bits = as_bits(b)
    if bits.size == 0:
        raise InvalidInputError("b must have at least one bit")
    if companion.shape != (bits.size, bits.size) or not validate_primitive(companion):
        raise InvalidInputError("companion matrix is not primitive for this register size")
    return _synthesize(BasisId.mub(bits), mub_generators(bits, companion))


def synthesize_for_basis(basis: BasisId, companion: Optional[BitMatrix] = None) -> SynthesisResult:
    """Synthesis result for any basis, with ``companion`` already validated.

    The computational basis needs no gates.
    """
    if basis.is_computational:
        return SynthesisResult(
            basis,
            Circuit(basis.n),
            (0,) * basis.n,
            (computational_generators(basis.n),) * basis.n,
        )
    if companion is None:
        raise InvalidInputError("a companion matrix is required for MUB synthesis")
    return _synthesize(basis, mub_generators(basis.b or (), companion))


def preparation_circuit(state: StateIndex, synthesis: SynthesisResult) -> Circuit:
    """X gates on the set bits of k, then the inverse change-of-basis circuit."""
    if synthesis.basis != state.basis:
        raise InvalidInputError(f"synthesis is for basis {synthesis.basis}, state is in {state.basis}")
    flips = tuple(GateAction.x(q) for q, bit in enumerate(state.k) if bit)
    return Circuit(state.n, flips).then(synthesis.circuit.inverse())


def measurement_circuit(synthesis: SynthesisResult) -> Circuit:
    """The change-of-basis circuit; read out computationally afterwards."""
    return synthesis.circuit


def basis_change_circuit(source: SynthesisResult, target: SynthesisResult) -> Circuit:
    """V mapping state k of the source basis to state k of the target basis."""
    return source.circuit.then(target.circuit.inverse())


def export_circuit(circuit: Circuit, fmt: str = "plain") -> str:
    """One gate per line; qubits are 1-based in plain text and 0-based in qasm.

    Raises:
        InvalidInputError: on an unknown format.
    """
    if fmt == "plain":
        lines = [str(g) for g in circuit.gates]
    elif fmt == "qasm":
        lines = [QASM_HEADER.format(n=circuit.qubit_count)]
        for g in circuit.gates:
            operands = ",".join(f"q[{q}]" for q in g.qubits)
            lines.append(f"{_QASM_NAMES[g.kind]} {operands};")
    else:
        raise InvalidInputError(f"unknown circuit format {fmt!r}; use one of {CIRCUIT_FORMATS}")
    return "\n".join(lines) + ("\n" if lines else "")


def _parse_plain(text: str, qubit_count: Optional[int]) -> Circuit:
    gates = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, *operands = line.split()
        try:
            gates.append(GateAction(GateKind(name.upper()), tuple(int(q) - 1 for q in operands)))
        except ValueError as e:
            raise InvalidInputError(f"line {number}: cannot parse {raw!r}: {e}")
    return _with_register(gates, qubit_count)


def _parse_qasm(text: str, qubit_count: Optional[int]) -> Circuit:
    gates = []
    declared = qubit_count
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("//", 1)[0].strip().rstrip(";")
        if not line or line.startswith(("OPENQASM", "include")):
            continue
        if line.startswith("qreg"):
            declared = int(line[line.index("[") + 1 : line.index("]")])
            continue
        name, _, rest = line.partition(" ")
        try:
            qubits = tuple(int(op.strip()[2:-1]) for op in rest.split(","))
            gates.append(GateAction(_QASM_KINDS[name], qubits))
        except (KeyError, ValueError) as e:
            raise InvalidInputError(f"line {number}: cannot parse {raw!r}: {e}")
    return _with_register(gates, declared)


def _with_register(gates: List[GateAction], qubit_count: Optional[int]) -> Circuit:
    if qubit_count is None:
        if not gates:
            raise InvalidInputError("qubit count is required for an empty circuit")
        qubit_count = 1 + max(max(g.qubits) for g in gates)
    return Circuit(qubit_count, tuple(gates))


def parse_circuit(text: str, fmt: str = "plain", qubit_count: Optional[int] = None) -> Circuit:
    """Inverse of :func:`export_circuit`."""
    if fmt == "plain":
        return _parse_plain(text, qubit_count)
    if fmt == "qasm":
        return _parse_qasm(text, qubit_count)
    raise InvalidInputError(f"unknown circuit format {fmt!r}; use one of {CIRCUIT_FORMATS}")
