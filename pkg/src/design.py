"""The MUB state 2-design: shared bases, synthesized circuits and dense states."""

import logging
import threading
from functools import lru_cache
from typing import Dict, List, Optional

import numpy as np

from .circuit_synth import (
    Circuit,
    SynthesisResult,
    basis_change_circuit,
    measurement_circuit,
    preparation_circuit,
    synthesize_for_basis,
)
from .exceptions import DenseLimitError, DimensionMismatchError, InvalidInputError
from .gf2 import BitMatrix, BitVector, as_bit_matrix, primitive_companion, validate_primitive
from .mub import (
    BasisId,
    StabilizerBasis,
    StateIndex,
    all_bases,
    all_states,
    commutation_vector,
    computational_generators,
    mub_generators,
    transition_target,
)
from .pauli import DENSE_QUBIT_LIMIT, PauliOperator

logger = logging.getLogger("seqpt")

DESIGN_AVERAGE_QUBIT_LIMIT = 3
# Above this size state vectors are rebuilt per shot instead of cached.
STATE_CACHE_QUBIT_LIMIT = 6


class MubDesign:
    """All D + 1 bases for n qubits, built once and shared between workers.

    Generators and synthesis results are computed lazily and cached; cached
    values are never mutated after insertion. Dense state vectors are cached
    only up to STATE_CACHE_QUBIT_LIMIT qubits, and measurement is always run
    gate by gate, so memory stays bounded by the circuits rather than by D².
    """

    def __init__(self, n: int, companion: Optional[BitMatrix] = None) -> None:
        if n < 1:
            raise InvalidInputError(f"n must be >= 1, got {n}")
        if companion is None:
            companion = primitive_companion(n)
        else:
            companion = as_bit_matrix(companion)
            if companion.shape != (n, n) or not validate_primitive(companion):
                raise InvalidInputError("companion matrix is not primitive for this register size")
        companion.setflags(write=False)

        self.n = n
        self.dimension = 1 << n
        self.companion = companion
        self._lock = threading.Lock()
        self._stabilizers: Dict[BasisId, StabilizerBasis] = {}
        self._syntheses: Dict[BasisId, SynthesisResult] = {}
        self._states: Dict[StateIndex, np.ndarray] = {}

    def _check_basis(self, basis: BasisId) -> None:
        if basis.n != self.n:
            raise DimensionMismatchError(f"basis {basis} is for {basis.n} qubits, design for {self.n}")

    def _check_dense(self) -> None:
        if self.n > DENSE_QUBIT_LIMIT:
            raise DenseLimitError(f"dense states are limited to {DENSE_QUBIT_LIMIT} qubits, got {self.n}")

    def bases(self) -> List[BasisId]:
        return all_bases(self.n)

    def states(self) -> List[StateIndex]:
        return all_states(self.n)

    def stabilizer(self, basis: BasisId) -> StabilizerBasis:
        self._check_basis(basis)
        cached = self._stabilizers.get(basis)
        if cached is None:
            if basis.is_computational:
                generators = computational_generators(self.n)
            else:
                generators = mub_generators(basis.b or (), self.companion)
            cached = StabilizerBasis(basis, generators)
            with self._lock:
                cached = self._stabilizers.setdefault(basis, cached)
        return cached

    def generators(self, basis: BasisId) -> List[PauliOperator]:
        return list(self.stabilizer(basis).generators)

    def commutation_vector(self, error: PauliOperator, basis: BasisId) -> BitVector:
        return commutation_vector(error, self.stabilizer(basis))

    def transition_target(self, state: StateIndex, error: PauliOperator) -> StateIndex:
        return transition_target(state, error, self.stabilizer(state.basis))

    def synthesis(self, basis: BasisId) -> SynthesisResult:
        self._check_basis(basis)
        cached = self._syntheses.get(basis)
        if cached is None:
            cached = synthesize_for_basis(basis, self.companion)
            with self._lock:
                cached = self._syntheses.setdefault(basis, cached)
        return cached

    def preparation_circuit(self, state: StateIndex) -> Circuit:
        return preparation_circuit(state, self.synthesis(state.basis))

    def measurement_circuit(self, basis: BasisId) -> Circuit:
        return measurement_circuit(self.synthesis(basis))

    def basis_change_circuit(self, source: BasisId, target: BasisId) -> Circuit:
        return basis_change_circuit(self.synthesis(source), self.synthesis(target))

    def state_vector(self, state: StateIndex) -> np.ndarray:
        """U†|k⟩, obtained by running the preparation circuit on |0...0⟩."""
        self._check_dense()
        self._check_basis(state.basis)
        cached = self._states.get(state)
        if cached is None:
            zero = np.zeros(self.dimension, dtype=complex)
            zero[0] = 1.0
            cached = self.preparation_circuit(state).apply(zero)
            cached.setflags(write=False)
            if self.n <= STATE_CACHE_QUBIT_LIMIT:
                with self._lock:
                    cached = self._states.setdefault(state, cached)
        return cached

    def cache_info(self) -> Dict[str, int]:
        """Number of cached stabilizers, syntheses and dense states."""
        with self._lock:
            return {
                "stabilizers": len(self._stabilizers),
                "syntheses": len(self._syntheses),
                "states": len(self._states),
            }


@lru_cache(maxsize=None)
def get_design(n: int) -> MubDesign:
    """Shared design for the built-in primitive polynomial of degree n."""
    return MubDesign(n)


def state_vector(state: StateIndex, design: Optional[MubDesign] = None) -> np.ndarray:
    design = design or get_design(state.n)
    return design.state_vector(state)


def _check_operator(op: np.ndarray, dimension: int) -> np.ndarray:
    matrix = np.asarray(op, dtype=complex)
    if matrix.shape != (dimension, dimension):
        raise DimensionMismatchError(f"operator has shape {matrix.shape}, expected {(dimension, dimension)}")
    return matrix


def exact_design_average(o1: np.ndarray, o2: np.ndarray, design: Optional[MubDesign] = None) -> complex:
    """Mean of ⟨ψ|O1|ψ⟩⟨ψ|O2|ψ⟩ over all D(D+1) design states."""
    if design is None:
        size = np.asarray(o1).shape[0]
        n = int(size).bit_length() - 1
        if n < 1 or 1 << n != size:
            raise DimensionMismatchError(f"operator dimension {size} is not a power of two")
        design = get_design(n)
    if design.n > DESIGN_AVERAGE_QUBIT_LIMIT:
        raise DenseLimitError(f"design averages are limited to {DESIGN_AVERAGE_QUBIT_LIMIT} qubits")

    a = _check_operator(o1, design.dimension)
    b = _check_operator(o2, design.dimension)
    total = 0j
    states = design.states()
    for state in states:
        psi = design.state_vector(state)
        total += np.vdot(psi, a @ psi) * np.vdot(psi, b @ psi)
    return complex(total / len(states))


def haar_second_moment(o1: np.ndarray, o2: np.ndarray) -> complex:
    """[Tr O1 Tr O2 + Tr(O1 O2)] / [D(D+1)], the Haar average of ⟨ψ|O1|ψ⟩⟨ψ|O2|ψ⟩."""
    a = np.asarray(o1, dtype=complex)
    b = _check_operator(o2, a.shape[0])
    d = a.shape[0]
    return complex((np.trace(a) * np.trace(b) + np.trace(a @ b)) / (d * (d + 1)))
