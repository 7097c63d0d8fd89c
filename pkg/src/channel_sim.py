"""Dense simulation of quantum channels acting as the experimental device.

Channels come in three representations (Pauli probabilities, Kraus
operators, χ-matrix). Shots prepare a design state, apply the channel
exactly and sample the readout from the exact outcome distribution.
"""

import logging
from abc import ABC, abstractmethod
from itertools import product
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .design import MubDesign, get_design
from .exceptions import ChannelSpecError, DenseLimitError, DimensionMismatchError, InvalidInputError
from .gf2 import bits_to_int, int_to_bits
from .models.channel_spec import ChannelSpec, KrausChannelSpec, PauliChannelSpec, load_channel_spec
from .models.channel_spec import rows_to_matrix
from .models.records import ExperimentRecord, ShotOutcome
from .mub import BasisId, StateIndex
from .pauli import (
    DENSE_QUBIT_LIMIT,
    ComplexMatrix,
    GateAction,
    PauliOperator,
    apply_pauli,
    basis_matrices,
    dense_matrix,
    gate_unitary,
    pauli_index,
)

logger = logging.getLogger("seqpt")

CHI_QUBIT_LIMIT = 3
EXACT_TRANSITION_QUBIT_LIMIT = 8
SIMULATION_MODES = ("dense", "trajectory", "auto")
ANCILLA_AXES = ("x", "y")

PROBABILITY_TOLERANCE = 1e-12
KRAUS_TOLERANCE = 1e-10
CHI_TOLERANCE = 1e-9

# Ancilla rotations taking the σx / σy eigenbasis onto the computational one.
_ANCILLA_ROTATIONS = {
    "x": gate_unitary(GateAction.h(0), 1),
    "y": gate_unitary(GateAction.h(0), 1) @ gate_unitary(GateAction.phase_dagger(0), 1),
}
_ANCILLA_SIGNS = np.array([1.0, -1.0])


def _qubits_for_dimension(dimension: int) -> int:
    n = int(dimension).bit_length() - 1
    if n < 1 or 1 << n != dimension:
        raise DimensionMismatchError(f"dimension {dimension} is not a power of two >= 2")
    return n


class QuantumChannel(ABC):
    """A completely positive trace-preserving map on n qubits."""

    kind = "channel"

    def __init__(self, n: int) -> None:
        if n < 1:
            raise ChannelSpecError(f"a channel needs at least one qubit, got n={n}", "n")
        self.n = n
        self.dimension = 1 << n
        self._kraus: Optional[np.ndarray] = None

    @abstractmethod
    def apply(self, rho: np.ndarray) -> ComplexMatrix:
        """ℰ(ρ) for a (not necessarily Hermitian) 2^n x 2^n operator ρ."""

    @abstractmethod
    def _build_kraus(self) -> np.ndarray:
        """Dense Kraus operators stacked as (K, D, D)."""

    def kraus_operators(self) -> np.ndarray:
        if self._kraus is None:
            if self.n > DENSE_QUBIT_LIMIT:
                raise DenseLimitError(f"dense channels are limited to {DENSE_QUBIT_LIMIT} qubits, got {self.n}")
            stack = np.asarray(self._build_kraus(), dtype=complex)
            stack.setflags(write=False)
            self._kraus = stack
        return self._kraus

    def chi_matrix(self) -> ComplexMatrix:
        return chi_from_kraus(self)

    def _check_operator(self, rho: np.ndarray) -> np.ndarray:
        matrix = np.asarray(rho, dtype=complex)
        if matrix.shape != (self.dimension, self.dimension):
            raise DimensionMismatchError(
                f"operator has shape {matrix.shape}, channel acts on {self.dimension}x{self.dimension}"
            )
        return matrix

    def kraus_images(self, vectors: np.ndarray) -> np.ndarray:
        """A_k·v for every Kraus operator A_k and column v of ``vectors``; shape (K, V, D)."""
        return np.einsum("kij,jv->kvi", self.kraus_operators(), vectors)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n})"


class PauliChannel(QuantumChannel):
    """ρ → Σ p_E · E ρ E for canonical Paulis E."""

    kind = "pauli"

    def __init__(self, probs: Mapping[Union[str, PauliOperator], float]) -> None:
        if not probs:
            raise ChannelSpecError("at least one Pauli probability is required", "probs")

        merged: Dict[Tuple[bytes, bytes], Tuple[PauliOperator, float]] = {}
        for key, p in probs.items():
            op = key if isinstance(key, PauliOperator) else PauliOperator.from_label(key)
            op = op.canonical()
            if p < 0:
                raise ChannelSpecError(f"probability of {op.to_label()} is negative ({p})", "probs")
            previous = merged.get(op.key)
            merged[op.key] = (op, p + (previous[1] if previous else 0.0))

        operators = [op for op, _ in merged.values()]
        sizes = {op.num_qubits for op in operators}
        if len(sizes) != 1:
            raise ChannelSpecError(f"Pauli labels act on different qubit counts {sorted(sizes)}", "probs")
        super().__init__(sizes.pop())

        weights = np.array([p for _, p in merged.values()], dtype=float)
        total = float(weights.sum())
        if abs(total - 1.0) > PROBABILITY_TOLERANCE:
            raise ChannelSpecError(f"probabilities sum to {total!r}, not 1", "probs")

        order = sorted(range(len(operators)), key=lambda i: pauli_index(operators[i]))
        self.operators: List[PauliOperator] = [operators[i] for i in order]
        self.probabilities = weights[order] / total
        self.probabilities.setflags(write=False)

    @property
    def probs(self) -> Dict[str, float]:
        return {op.to_label(): float(p) for op, p in zip(self.operators, self.probabilities)}

    def sample_error(self, rng: np.random.Generator) -> PauliOperator:
        return self.operators[int(rng.choice(len(self.operators), p=self.probabilities))]

    def apply(self, rho: np.ndarray) -> ComplexMatrix:
        matrix = self._check_operator(rho)
        out = np.zeros_like(matrix)
        for op, p in zip(self.operators, self.probabilities):
            e = dense_matrix(op)
            out += p * (e @ matrix @ e)
        return out

    def _build_kraus(self) -> np.ndarray:
        return np.array(
            [np.sqrt(p) * dense_matrix(op) for op, p in zip(self.operators, self.probabilities) if p > 0]
        )

    def kraus_images(self, vectors: np.ndarray) -> np.ndarray:
        if self.n > DENSE_QUBIT_LIMIT:
            raise DenseLimitError(f"dense channels are limited to {DENSE_QUBIT_LIMIT} qubits, got {self.n}")
        columns = np.asarray(vectors, dtype=complex)
        return np.stack(
            [np.sqrt(p) * apply_pauli(op, columns).T for op, p in zip(self.operators, self.probabilities) if p > 0]
        )

    def chi_matrix(self) -> ComplexMatrix:
        if self.n > CHI_QUBIT_LIMIT:
            raise DenseLimitError(f"χ-matrices are limited to {CHI_QUBIT_LIMIT} qubits, got {self.n}")
        chi = np.zeros((4**self.n, 4**self.n), dtype=complex)
        for op, p in zip(self.operators, self.probabilities):
            m = pauli_index(op)
            chi[m, m] = p
        return chi


class KrausChannel(QuantumChannel):
    """ρ → Σ_k A_k ρ A_k†."""

    kind = "kraus"

    def __init__(self, matrices: Sequence[np.ndarray]) -> None:
        stack = np.array([np.asarray(a, dtype=complex) for a in matrices])
        if stack.ndim != 3 or stack.shape[0] == 0 or stack.shape[1] != stack.shape[2]:
            raise ChannelSpecError(f"Kraus operators must be square matrices, got shape {stack.shape}", "matrices")
        try:
            n = _qubits_for_dimension(stack.shape[1])
        except DimensionMismatchError as e:
            raise ChannelSpecError(str(e), "matrices")
        super().__init__(n)

        completeness = np.einsum("kji,kjl->il", stack.conj(), stack)
        deviation = float(np.max(np.abs(completeness - np.eye(self.dimension))))
        if deviation > KRAUS_TOLERANCE:
            raise ChannelSpecError(f"Kraus operators are not trace preserving (deviation {deviation:.2e})", "matrices")
        self.matrices = stack

    def apply(self, rho: np.ndarray) -> ComplexMatrix:
        matrix = self._check_operator(rho)
        return np.einsum("kij,jl,kml->im", self.matrices, matrix, self.matrices.conj())

    def _build_kraus(self) -> np.ndarray:
        return self.matrices


class ChiChannel(QuantumChannel):
    """ρ → Σ_{mm'} χ_{mm'} E_m ρ E_{m'}† in the ordered Pauli basis."""

    kind = "chi"

    def __init__(self, chi: np.ndarray) -> None:
        matrix = np.asarray(chi, dtype=complex)
        size = matrix.shape[0] if matrix.ndim == 2 else 0
        n = max(size.bit_length() - 1, 0) // 2
        if matrix.ndim != 2 or matrix.shape[1] != size or n < 1 or 4**n != size:
            raise ChannelSpecError(f"χ must be a 4^n x 4^n matrix, got shape {matrix.shape}", "chi")
        if n > CHI_QUBIT_LIMIT:
            raise DenseLimitError(f"χ-matrices are limited to {CHI_QUBIT_LIMIT} qubits, got {n}")
        super().__init__(n)

        if np.max(np.abs(matrix - matrix.conj().T)) > KRAUS_TOLERANCE:
            raise ChannelSpecError("χ is not Hermitian", "chi")
        eigenvalues = np.linalg.eigvalsh(matrix)
        if eigenvalues[0] < -CHI_TOLERANCE:
            raise ChannelSpecError(f"χ is not positive semidefinite (min eigenvalue {eigenvalues[0]:.2e})", "chi")
        trace = float(np.real(np.trace(matrix)))
        if abs(trace - 1.0) > CHI_TOLERANCE:
            raise ChannelSpecError(f"χ has trace {trace!r}, not 1", "chi")

        basis = basis_matrices(n)
        completeness = np.einsum("ab,bji,ajl->il", matrix, basis.conj(), basis)
        if np.max(np.abs(completeness - np.eye(self.dimension))) > CHI_TOLERANCE:
            raise ChannelSpecError("χ does not describe a trace-preserving map", "chi")
        self.chi = matrix

    def apply(self, rho: np.ndarray) -> ComplexMatrix:
        matrix = self._check_operator(rho)
        basis = basis_matrices(self.n)
        left = np.einsum("mij,jk->mik", basis, matrix)
        return np.einsum("mn,mik,nlk->il", self.chi, left, basis.conj())

    def _build_kraus(self) -> np.ndarray:
        eigenvalues, vectors = np.linalg.eigh(self.chi)
        basis = basis_matrices(self.n)
        keep = eigenvalues > PROBABILITY_TOLERANCE
        weights = vectors[:, keep] * np.sqrt(eigenvalues[keep])
        return np.einsum("mk,mij->kij", weights, basis)

    def chi_matrix(self) -> ComplexMatrix:
        return self.chi.copy()


def identity_channel(n: int) -> PauliChannel:
    return PauliChannel({"I" * n: 1.0})


def unitary_channel(unitary: np.ndarray) -> KrausChannel:
    """ρ → UρU†."""
    matrix = np.asarray(unitary, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ChannelSpecError(f"unitary must be square, got shape {matrix.shape}", "matrix")
    if not np.allclose(matrix.conj().T @ matrix, np.eye(matrix.shape[0]), atol=KRAUS_TOLERANCE):
        raise ChannelSpecError("matrix is not unitary", "matrix")
    return KrausChannel([matrix])


def depolarizing_channel(n: int, p: float = 1.0) -> PauliChannel:
    """With probability p replace the state by I/D; p = 1 gives χ_mm = 1/D² for every m."""
    if not 0.0 <= p <= 1.0:
        raise ChannelSpecError(f"depolarizing probability must be in [0, 1], got {p}", "p")
    if n > CHI_QUBIT_LIMIT + 2:
        raise DenseLimitError(f"the full depolarizing table is limited to {CHI_QUBIT_LIMIT + 2} qubits")
    share = p / 4**n
    probs = {"".join(letters): share for letters in product("IXYZ", repeat=n)}
    probs["I" * n] += 1.0 - p
    return PauliChannel(probs)


def chi_from_kraus(channel: QuantumChannel) -> ComplexMatrix:
    """Exact χ with a_km = Tr(E_m† A_k)/D and χ_{mm'} = Σ_k a_km·conj(a_km').

    Raises:
        DenseLimitError: for more than three qubits.
    """
    if channel.n > CHI_QUBIT_LIMIT:
        raise DenseLimitError(f"χ-matrices are limited to {CHI_QUBIT_LIMIT} qubits, got {channel.n}")
    if isinstance(channel, (PauliChannel, ChiChannel)):
        return channel.chi_matrix()
    basis = basis_matrices(channel.n)
    a = np.einsum("mij,kij->km", basis.conj(), channel.kraus_operators()) / channel.dimension
    return a.T @ a.conj()


def apply_channel(rho: np.ndarray, channel: QuantumChannel) -> ComplexMatrix:
    return channel.apply(rho)


def _resolve_mode(channel: QuantumChannel, mode: str) -> str:
    if mode not in SIMULATION_MODES:
        raise InvalidInputError(f"unknown simulation mode {mode!r}; use one of {SIMULATION_MODES}")
    if mode == "trajectory" and not isinstance(channel, PauliChannel):
        raise InvalidInputError("trajectory simulation needs a Pauli channel")
    if mode == "auto":
        return "trajectory" if isinstance(channel, PauliChannel) and channel.n > DENSE_QUBIT_LIMIT else "dense"
    return mode


def _check_design(channel: QuantumChannel, design: Optional[MubDesign]) -> MubDesign:
    design = design or get_design(channel.n)
    if design.n != channel.n:
        raise DimensionMismatchError(f"design is for {design.n} qubits, channel acts on {channel.n}")
    return design


def _measured_images(channel: QuantumChannel, vectors: np.ndarray, basis: BasisId, design: MubDesign) -> np.ndarray:
    """U·A_k·v with U the measurement circuit of ``basis``, run gate by gate; shape (K, V, D)."""
    images = channel.kraus_images(vectors)
    count, columns, dimension = images.shape
    rotated = design.measurement_circuit(basis).apply(images.reshape(count * columns, dimension).T)
    return rotated.T.reshape(count, columns, dimension)


def _outcome_distribution(channel: QuantumChannel, state: StateIndex, design: MubDesign) -> np.ndarray:
    psi = design.state_vector(state)
    images = _measured_images(channel, psi.reshape(-1, 1), state.basis, design)
    probs = np.sum(np.abs(images[:, 0, :]) ** 2, axis=0)
    return probs / probs.sum()


def run_transition_experiment(
    channel: QuantumChannel,
    state: StateIndex,
    rng: np.random.Generator,
    design: Optional[MubDesign] = None,
    mode: str = "auto",
) -> ShotOutcome:
    """Prepare ``state``, apply the channel, read out in the same basis."""
    design = _check_design(channel, design)
    if _resolve_mode(channel, mode) == "trajectory":
        assert isinstance(channel, PauliChannel)
        target = design.transition_target(state, channel.sample_error(rng))
        return ShotOutcome(ExperimentRecord(state.basis, state.k, target.k))

    probs = _outcome_distribution(channel, state, design)
    outcome = int(rng.choice(design.dimension, p=probs))
    return ShotOutcome(ExperimentRecord(state.basis, state.k, tuple(int_to_bits(outcome, channel.n))))


def exact_transition_probs(
    channel: QuantumChannel,
    basis: BasisId,
    k: Sequence[int],
    design: Optional[MubDesign] = None,
) -> Dict[Tuple[int, ...], float]:
    """Tr(ℰ(Π_{J,k})·Π_{J,k'}) for every k'.

    Pauli channels are handled combinatorially and list only reachable outcomes
    above the dense cap; other channels return all D outcomes.
    """
    design = _check_design(channel, design)
    state = StateIndex(basis, tuple(k))

    if isinstance(channel, PauliChannel):
        probs: Dict[Tuple[int, ...], float] = {}
        if channel.n <= EXACT_TRANSITION_QUBIT_LIMIT:
            probs = {tuple(int(b) for b in bits): 0.0 for bits in product((0, 1), repeat=channel.n)}
        for op, p in zip(channel.operators, channel.probabilities):
            target = design.transition_target(state, op).k
            probs[target] = probs.get(target, 0.0) + float(p)
        return probs

    if channel.n > EXACT_TRANSITION_QUBIT_LIMIT:
        raise DenseLimitError(f"exact transitions are limited to {EXACT_TRANSITION_QUBIT_LIMIT} qubits")
    distribution = _outcome_distribution(channel, state, design)
    return {tuple(int(b) for b in int_to_bits(i, channel.n)): float(p) for i, p in enumerate(distribution)}


def _ancilla_distribution(
    channel: QuantumChannel,
    state: StateIndex,
    m: PauliOperator,
    m_prime: PauliOperator,
    axis: str,
    design: MubDesign,
) -> np.ndarray:
    """Joint (ancilla, readout) distribution, shape (2, D).

    The ancilla branch 1 carries E_m†|ψ⟩ and branch 0 carries E_{m'}†|ψ⟩.
    """
    if axis not in ANCILLA_AXES:
        raise InvalidInputError(f"ancilla axis must be one of {ANCILLA_AXES}, got {axis!r}")
    for op in (m, m_prime):
        if op.num_qubits != channel.n:
            raise DimensionMismatchError(f"operator acts on {op.num_qubits} qubits, channel on {channel.n}")

    psi = design.state_vector(state)
    # (i^φ·σ)† = (-1)^φ · i^φ·σ
    branches = np.stack([(-1) ** op.phase * apply_pauli(op, psi) for op in (m_prime, m)], axis=1)
    images = _measured_images(channel, branches, state.basis, design)
    # blocks[a, b, j] = ⟨j|U ℰ(|φ_a⟩⟨φ_b|) U†|j⟩ / 2
    blocks = 0.5 * np.einsum("kaj,kbj->abj", images, images.conj())
    rotation = _ANCILLA_ROTATIONS[axis]
    joint = np.real(np.einsum("ca,cb,abj->cj", rotation, rotation.conj(), blocks))
    joint = np.clip(joint, 0.0, None)
    return joint / joint.sum()


def run_offdiag_experiment(
    channel: QuantumChannel,
    state: StateIndex,
    m: PauliOperator,
    m_prime: PauliOperator,
    axis: str,
    rng: np.random.Generator,
    design: Optional[MubDesign] = None,
) -> ShotOutcome:
    """One shot of the ancilla-assisted experiment for the pair (m, m').

    The ancilla starts in |+⟩, controls E_m† (on 1) and E_{m'}† (on 0), and is
    read out in the σx or σy eigenbasis together with the basis-J readout of
    the main register.
    """
    design = _check_design(channel, design)
    joint = _ancilla_distribution(channel, state, m, m_prime, axis, design)
    outcome = int(rng.choice(joint.size, p=joint.reshape(-1)))
    ancilla_bit, k_out = divmod(outcome, design.dimension)
    record = ExperimentRecord(state.basis, state.k, tuple(int_to_bits(k_out, channel.n)))
    return ShotOutcome(record, ancilla=1 if ancilla_bit == 0 else -1)


def exact_offdiag_expectation(
    channel: QuantumChannel,
    state: StateIndex,
    m: PauliOperator,
    m_prime: PauliOperator,
    axis: str,
    design: Optional[MubDesign] = None,
) -> float:
    """Exact mean of (ancilla reading × survival indicator) for one input state."""
    design = _check_design(channel, design)
    joint = _ancilla_distribution(channel, state, m, m_prime, axis, design)
    survived = bits_to_int(state.k)
    return float(_ANCILLA_SIGNS @ joint[:, survived])


def exact_offdiag_average(
    channel: QuantumChannel,
    m: PauliOperator,
    m_prime: PauliOperator,
    axis: str,
    design: Optional[MubDesign] = None,
) -> float:
    """Design average of :func:`exact_offdiag_expectation`.

    Equals (D·Re χ_{mm'} + δ_{mm'})/(D+1) for axis x and D·Im χ_{mm'}/(D+1) for axis y.
    """
    design = _check_design(channel, design)
    if channel.n > CHI_QUBIT_LIMIT:
        raise DenseLimitError(f"design averages are limited to {CHI_QUBIT_LIMIT} qubits")
    states = design.states()
    total = sum(exact_offdiag_expectation(channel, s, m, m_prime, axis, design) for s in states)
    return total / len(states)


def exact_survival_fidelity(
    channel: QuantumChannel,
    m: PauliOperator,
    design: Optional[MubDesign] = None,
) -> float:
    """Average over all design states of Tr(E_m†·ℰ(Π)·E_m·Π), i.e. (D·χ_mm + 1)/(D + 1)."""
    design = _check_design(channel, design)
    if channel.n > CHI_QUBIT_LIMIT:
        raise DenseLimitError(f"design averages are limited to {CHI_QUBIT_LIMIT} qubits")
    e = dense_matrix(m)
    kraus = channel.kraus_operators()
    total = 0.0
    states = design.states()
    for state in states:
        psi = design.state_vector(state)
        overlaps = np.einsum("i,kij,j->k", (e @ psi).conj(), kraus, psi)
        total += float(np.sum(np.abs(overlaps) ** 2))
    return total / len(states)


def channel_from_spec(spec: ChannelSpec) -> QuantumChannel:
    """Build the channel a validated spec describes.

    Raises:
        ChannelSpecError: if the described map is not a valid channel.
    """
    body = spec.channel
    try:
        if isinstance(body, PauliChannelSpec):
            channel: QuantumChannel = PauliChannel(body.probs)
        elif isinstance(body, KrausChannelSpec):
            channel = KrausChannel(spec.kraus_matrices())
        else:
            channel = unitary_channel(rows_to_matrix(body.matrix))
    except ChannelSpecError as e:
        raise ChannelSpecError(e.message, f"channel.{e.field or body.type}")
    if channel.n != spec.n:
        raise ChannelSpecError(f"channel acts on {channel.n} qubits, not {spec.n}", "n")
    return channel


def load_channel(path: Union[str, Path]) -> Tuple[QuantumChannel, str]:
    """Load a channel file; returns the channel and the digest of its document."""
    spec, digest = load_channel_spec(path)
    channel = channel_from_spec(spec)
    logger.info(f"Loaded {channel!r} (digest {digest[:12]})")
    return channel, digest
