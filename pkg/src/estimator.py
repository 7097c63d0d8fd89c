"""Monte Carlo estimators of χ-matrix coefficients from design experiments.

Every shot draws its own generator from (master seed, shot index), so
results do not depend on execution order or on the number of workers, and a
stored scan replays exactly what the targeted estimator saw.
"""

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .channel_sim import QuantumChannel, run_offdiag_experiment, run_transition_experiment
from .design import MubDesign, get_design
from .exceptions import (
    DimensionMismatchError,
    EstimationError,
    InvalidInputError,
    InvariantViolation,
    SingularMatrixError,
)
from .gf2 import solve_linear
from .models.batch_processor import ShotBatchProcessor
from .models.records import Estimate, ExperimentRecord, OffDiagonalEstimate, ShotOutcome
from .mub import BasisId, StateIndex
from .pauli import PauliOperator, pauli_index
from .utils import fresh_seed, shot_rng, track_performance

logger = logging.getLogger("seqpt")

RecordClass = Tuple[BasisId, Tuple[int, ...]]

UNRELIABLE_SIGMAS = 4.0


def _ceil(value: float) -> int:
    # Absorb float noise such as 5000.000000000001 before rounding up.
    return int(math.ceil(round(value, 9)))


def chernoff_samples(eps: float, p: float) -> int:
    """Smallest M with M ≥ ln[2/(1-p)] / (2ε²).

    Raises:
        InvalidInputError: unless 0 < eps < 1 and 0 < p < 1.
    """
    if not 0 < eps < 1:
        raise InvalidInputError(f"eps must be in (0, 1), got {eps}")
    if not 0 < p < 1:
        raise InvalidInputError(f"p must be in (0, 1), got {p}")
    return _ceil(math.log(2 / (1 - p)) / (2 * eps**2))


def _check_full_diag_args(delta: float, big_p: float) -> None:
    if not 0 < delta <= 1:
        raise InvalidInputError(f"delta must be in (0, 1], got {delta}")
    if not 0 <= big_p < 1:
        raise InvalidInputError(f"P must be in [0, 1), got {big_p}")


def samples_for_full_diag(eps: float, delta: float, big_p: float, dimension: int) -> int:
    """Samples for every coefficient above ε to be estimated within δ with probability P.

    M = 2(D + 1/ε)(D + 1) / (D² δ² (1 - P)); for ε ≫ 1/D this reduces to
    :func:`simplified_samples_for_full_diag`.
    """
    _check_full_diag_args(delta, big_p)
    if not 0 < eps <= 1:
        raise InvalidInputError(f"eps must be in (0, 1], got {eps}")
    if dimension < 2 or dimension & (dimension - 1):
        raise InvalidInputError(f"D must be a power of two >= 2, got {dimension}")
    d = dimension
    return _ceil(2 * (d + 1 / eps) * (d + 1) / (d**2 * delta**2 * (1 - big_p)))


def simplified_samples_for_full_diag(delta: float, big_p: float) -> int:
    """Large-D limit 2 / (δ² (1 - P))."""
    _check_full_diag_args(delta, big_p)
    return _ceil(2 / (delta**2 * (1 - big_p)))


def sample_state_index(n: int, rng: np.random.Generator) -> StateIndex:
    """Uniform draw over the D(D+1) design states: basis first, then k."""
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    basis = BasisId.from_index(int(rng.integers(0, (1 << n) + 1)), n)
    k = tuple(int(b) for b in rng.integers(0, 2, size=n))
    return StateIndex(basis, k)


def _resolve_seed(seed: Optional[int]) -> int:
    if seed is None:
        seed = fresh_seed()
        logger.info(f"No seed given; using fresh master seed {seed}")
    if seed < 0:
        raise InvalidInputError(f"seed must be non-negative, got {seed}")
    return seed


def _check_samples(samples: int, minimum: int = 1) -> None:
    if samples < minimum:
        raise EstimationError(f"at least {minimum} samples are required, got {samples}")


@track_performance("Scan")
def collect_scan(
    channel: QuantumChannel,
    samples: int,
    seed: Optional[int] = None,
    design: Optional[MubDesign] = None,
    mode: str = "auto",
    jobs: int = 1,
    progress: bool = False,
) -> List[ExperimentRecord]:
    """Run ``samples`` transition experiments on independently drawn design states."""
    _check_samples(samples)
    seed = _resolve_seed(seed)
    design = design or get_design(channel.n)

    def shot(index: int) -> ExperimentRecord:
        rng = shot_rng(seed, index)
        state = sample_state_index(channel.n, rng)
        return run_transition_experiment(channel, state, rng, design, mode).record

    processor = ShotBatchProcessor(max_workers=jobs, progress=progress)
    return processor.run(shot, samples, description="scan")


def _check_records(records: Sequence[ExperimentRecord], minimum: int = 1) -> int:
    if len(records) < minimum:
        raise EstimationError(f"at least {minimum} records are required, got {len(records)}")
    n = records[0].n
    if any(r.n != n for r in records):
        raise DimensionMismatchError("records mix different qubit counts")
    return n


def _class_counts(records: Iterable[ExperimentRecord]) -> Counter:
    """Multiplicity of each (basis, syndrome) class."""
    return Counter((r.basis, r.syndrome) for r in records)


def _survival_count(counts: Counter, op: PauliOperator, design: MubDesign) -> int:
    """Shots whose syndrome equals the commutation vector of ``op`` in their basis."""
    total = 0
    vectors: Dict[BasisId, Tuple[int, ...]] = {}
    for (basis, syndrome), count in counts.items():
        if basis not in vectors:
            vectors[basis] = tuple(int(b) for b in design.commutation_vector(op, basis))
        if vectors[basis] == syndrome:
            total += count
    return total


def _diag_estimate(count: int, samples: int, dimension: int) -> Estimate:
    fidelity = count / samples
    scale = (dimension + 1) / dimension
    value = ((dimension + 1) * fidelity - 1) / dimension
    stderr = math.sqrt(fidelity * (1 - fidelity) / samples) * scale
    return Estimate(value, stderr, samples, count)


def estimate_diag_from_records(
    records: Sequence[ExperimentRecord],
    m: PauliOperator,
    design: Optional[MubDesign] = None,
) -> Estimate:
    """χ̂_mm from stored records: a shot counts iff k_in xor k_out = v(E_m, J).

    Raises:
        EstimationError: on an empty record list.
    """
    n = _check_records(records)
    if m.num_qubits != n:
        raise DimensionMismatchError(f"target acts on {m.num_qubits} qubits, records on {n}")
    design = design or get_design(n)
    count = _survival_count(_class_counts(records), m, design)
    return _diag_estimate(count, len(records), design.dimension)


def estimate_many_from_records(
    records: Sequence[ExperimentRecord],
    targets: Sequence[PauliOperator],
    design: Optional[MubDesign] = None,
) -> List[Estimate]:
    """:func:`estimate_diag_from_records` for several targets over one pass of the records."""
    n = _check_records(records)
    design = design or get_design(n)
    counts = _class_counts(records)
    estimates = []
    for target in targets:
        if target.num_qubits != n:
            raise DimensionMismatchError(f"target {target.to_label()} does not act on {n} qubits")
        estimates.append(_diag_estimate(_survival_count(counts, target, design), len(records), design.dimension))
    return estimates


def estimate_diag(
    channel: QuantumChannel,
    m: PauliOperator,
    samples: int,
    seed: Optional[int] = None,
    design: Optional[MubDesign] = None,
    mode: str = "auto",
    jobs: int = 1,
    progress: bool = False,
) -> Estimate:
    """Estimate χ_mm = ((D+1)·F̂ - 1)/D from ``samples`` transition experiments."""
    design = design or get_design(channel.n)
    records = collect_scan(channel, samples, seed, design, mode, jobs, progress)
    return estimate_diag_from_records(records, m, design)


def average_fidelity_from_records(records: Sequence[ExperimentRecord]) -> Estimate:
    """Survival frequency over the design, i.e. the channel's average fidelity."""
    _check_records(records)
    survived = sum(1 for r in records if r.survived)
    fidelity = survived / len(records)
    return Estimate(fidelity, math.sqrt(fidelity * (1 - fidelity) / len(records)), len(records), survived)


def estimate_average_fidelity(
    channel: QuantumChannel,
    samples: int,
    seed: Optional[int] = None,
    design: Optional[MubDesign] = None,
    mode: str = "auto",
    jobs: int = 1,
    progress: bool = False,
) -> Estimate:
    return average_fidelity_from_records(collect_scan(channel, samples, seed, design, mode, jobs, progress))


def _axis_estimate(outcomes: Sequence[ShotOutcome], dimension: int, offset: int) -> Estimate:
    values = np.array([o.ancilla * int(o.survived) for o in outcomes], dtype=float)
    mean = float(values.mean())
    variance = max(float(np.mean(values**2)) - mean**2, 0.0)
    scale = (dimension + 1) / dimension
    value = ((dimension + 1) * mean - offset) / dimension
    return Estimate(value, math.sqrt(variance / len(values)) * scale, len(values), int(values.sum()))


@track_performance("Off-diagonal estimation")
def estimate_offdiag(
    channel: QuantumChannel,
    m: PauliOperator,
    m_prime: PauliOperator,
    samples: int,
    seed: Optional[int] = None,
    design: Optional[MubDesign] = None,
    jobs: int = 1,
    progress: bool = False,
) -> OffDiagonalEstimate:
    """Estimate χ_{mm'} with the ancilla experiment, half the budget per ancilla axis.

    Shot indices [0, M/2) measure σx and [M/2, M) measure σy. An odd budget is
    rounded up.
    """
    _check_samples(samples, minimum=2)
    if samples % 2:
        logger.warning(f"Odd off-diagonal budget {samples} rounded up to {samples + 1}")
        samples += 1
    for op in (m, m_prime):
        if op.num_qubits != channel.n:
            raise DimensionMismatchError(f"target {op.to_label()} does not act on {channel.n} qubits")
    seed = _resolve_seed(seed)
    design = design or get_design(channel.n)
    half = samples // 2

    def shot(index: int) -> ShotOutcome:
        rng = shot_rng(seed, index)
        state = sample_state_index(channel.n, rng)
        axis = "x" if index < half else "y"
        return run_offdiag_experiment(channel, state, m, m_prime, axis, rng, design)

    processor = ShotBatchProcessor(max_workers=jobs, progress=progress)
    outcomes = processor.run(shot, samples, description="off-diagonal")
    offset = 1 if m.key == m_prime.key else 0
    return OffDiagonalEstimate(
        real=_axis_estimate(outcomes[:half], design.dimension, offset),
        imag=_axis_estimate(outcomes[half:], design.dimension, 0),
    )


def solve_pair(
    first: ExperimentRecord,
    second: ExperimentRecord,
    design: Optional[MubDesign] = None,
) -> Optional[PauliOperator]:
    """The single Pauli (up to phase) consistent with two records from different bases.

    Writing E = ∏ J_i^{q_i} · ∏ J'_j^{q'_j} over the generators of the two
    bases, the first syndrome is C·q' and the second is Cᵀ·q with
    C_ij = ⟨J_i, J'_j⟩. Records from the same basis give None.

    Raises:
        InvariantViolation: if C is singular, which distinct bases never allow.
    """
    if first.n != second.n:
        raise DimensionMismatchError(f"records act on {first.n} and {second.n} qubits")
    if first.basis == second.basis:
        return None
    design = design or get_design(first.n)

    g = design.stabilizer(first.basis)
    h = design.stabilizer(second.basis)
    gx, gz = g.x_matrix.astype(np.int64), g.z_matrix.astype(np.int64)
    hx, hz = h.x_matrix.astype(np.int64), h.z_matrix.astype(np.int64)
    c = ((gx @ hz.T + gz @ hx.T) & 1).astype(np.uint8)

    try:
        q_prime = solve_linear(c, first.syndrome)
        q = solve_linear(np.ascontiguousarray(c.T), second.syndrome)
    except SingularMatrixError as e:
        raise InvariantViolation(f"bases {first.basis} and {second.basis} give a singular C: {e}")

    x = (q.astype(np.int64) @ gx + q_prime.astype(np.int64) @ hx) & 1
    z = (q.astype(np.int64) @ gz + q_prime.astype(np.int64) @ hz) & 1
    return PauliOperator(x.astype(np.uint8), z.astype(np.uint8))


@dataclass(frozen=True)
class DetectionResult:
    """Candidates with F̂ ≥ 2/M, largest χ̂ first."""

    candidates: List[Tuple[PauliOperator, Estimate]] = field(default_factory=list)
    unreliable: bool = False
    pairs_processed: int = 0
    candidate_count: int = 0


@track_performance("Detection")
def detect_large_coefficients(
    records: Sequence[ExperimentRecord],
    design: Optional[MubDesign] = None,
) -> DetectionResult:
    """Find the Paulis with large χ_mm from one set of transition records.

    Every pair of records from different bases names one candidate through
    :func:`solve_pair`. Records sharing basis and syndrome name the same
    candidates, so one representative per class is paired. Each distinct
    candidate, plus the identity, is re-estimated from the full record set.
    """
    n = _check_records(records, minimum=2)
    design = design or get_design(n)
    samples = len(records)
    counts = _class_counts(records)

    representatives: Dict[RecordClass, ExperimentRecord] = {}
    for record in records:
        representatives.setdefault((record.basis, record.syndrome), record)

    candidates: Dict[Tuple[bytes, bytes], PauliOperator] = {}
    identity = PauliOperator.identity(n)
    candidates[identity.key] = identity
    pairs = 0
    for first, second in combinations(representatives.values(), 2):
        if first.basis == second.basis:
            continue
        candidate = solve_pair(first, second, design)
        pairs += 1
        if candidate is not None:
            candidates.setdefault(candidate.key, candidate)
    logger.debug(f"{pairs} class pairs gave {len(candidates)} distinct candidates")

    threshold = 2 / samples
    kept: List[Tuple[PauliOperator, Estimate]] = []
    for candidate in candidates.values():
        count = _survival_count(counts, candidate, design)
        if count / samples >= threshold:
            kept.append((candidate, _diag_estimate(count, samples, design.dimension)))
    kept.sort(key=lambda item: (-item[1].value, pauli_index(item[0])))

    unreliable = len(candidates) > samples / 2
    if kept:
        best = max(e.raw_count for _, e in kept) / samples
        stderr = math.sqrt(best * (1 - best) / samples)
        if best <= 1 / design.dimension + UNRELIABLE_SIGMAS * stderr:
            unreliable = True
    else:
        unreliable = True
    if unreliable:
        logger.warning(
            f"Detection flagged unreliable: {len(candidates)} candidates from {samples} records, "
            "or no fidelity clearly above 1/D"
        )

    return DetectionResult(kept, unreliable, pairs, len(candidates))