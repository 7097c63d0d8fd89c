"""Tests for sample budgets, the χ estimators and large-coefficient detection."""

import logging
from collections import Counter
from itertools import combinations, product

import numpy as np
import pytest
from scipy.stats import binomtest, chisquare

from src.channel_sim import PauliChannel, chi_from_kraus, depolarizing_channel, identity_channel
from src.estimator import (
    average_fidelity_from_records,
    chernoff_samples,
    collect_scan,
    detect_large_coefficients,
    estimate_average_fidelity,
    estimate_diag,
    estimate_diag_from_records,
    estimate_many_from_records,
    estimate_offdiag,
    sample_state_index,
    samples_for_full_diag,
    simplified_samples_for_full_diag,
    solve_pair,
)
from src.exceptions import DimensionMismatchError, EstimationError, InvalidInputError
from src.models.records import ExperimentRecord
from src.mub import BasisId
from src.pauli import PauliOperator, pauli_basis
from src.utils import shot_rng


def within(estimate, expected, sigmas=4.0, floor=1e-9):
    return abs(estimate.value - expected) <= sigmas * estimate.stderr + floor


@pytest.mark.parametrize(
    "eps,p,expected",
    [(0.05, 0.9, 600), (0.05, 0.95, 738), (0.1, 0.99, 265), (0.5, 0.5, 3)],
)
def test_chernoff_samples(eps, p, expected):
    """M = ⌈ln[2/(1-p)]/(2ε²)⌉."""
    assert chernoff_samples(eps, p) == expected


def test_full_diagonal_budgets():
    """Both the exact and the large-D budgets round up cleanly."""
    assert samples_for_full_diag(0.25, 0.1, 0.9, 4) == 5000
    assert simplified_samples_for_full_diag(0.1, 0.9) == 2000
    assert samples_for_full_diag(0.25, 0.1, 0.9, 1 << 20) < 5000


@pytest.mark.parametrize(
    "call",
    [
        lambda: chernoff_samples(0, 0.9),
        lambda: chernoff_samples(0.1, 1.0),
        lambda: samples_for_full_diag(0.25, 0.0, 0.9, 4),
        lambda: samples_for_full_diag(0.25, 0.1, 1.0, 4),
        lambda: samples_for_full_diag(0.25, 0.1, 0.9, 6),
        lambda: simplified_samples_for_full_diag(0.1, -0.1),
    ],
)
def test_budget_input_errors(call):
    """Out-of-range budget parameters are rejected."""
    with pytest.raises(InvalidInputError):
        call()


def test_state_draws_are_uniform_and_reproducible():
    """Each of the D(D+1) states is drawn equally often; shot streams are fixed by (seed, index)."""
    rng = np.random.default_rng(99)
    counts = Counter(sample_state_index(1, rng) for _ in range(12000))
    assert len(counts) == 6
    assert chisquare(list(counts.values())).pvalue > 1e-3

    assert sample_state_index(3, shot_rng(5, 17)) == sample_state_index(3, shot_rng(5, 17))
    with pytest.raises(InvalidInputError):
        sample_state_index(0, rng)


def test_identity_channel_diagonal():
    """The noiseless channel gives χ̂_II = 1 exactly and χ̂_m ≈ 0 elsewhere."""
    channel = identity_channel(2)
    estimate = estimate_diag(channel, PauliOperator.identity(2), 200, seed=1)
    assert estimate.value == 1.0
    assert estimate.stderr == 0.0
    assert estimate.raw_count == 200

    other = estimate_diag(channel, PauliOperator.from_label("XI"), 2000, seed=1)
    assert within(other, 0.0)


def test_bit_flip_diagonal(bit_flip):
    """χ̂_XX of a p = 0.25 bit flip lies within four standard errors of 0.25."""
    estimate = estimate_diag(bit_flip, PauliOperator.from_label("X"), 4000, seed=7)
    assert estimate.n_samples == 4000
    assert within(estimate, 0.25)
    assert 0 < estimate.stderr < 0.05


def test_diagonal_estimator_is_unbiased(x_rotation):
    """200 independent M = 500 estimates of χ_XX for exp(-iπX/8) average to sin²(π/8)."""
    target = PauliOperator.from_label("X")
    values = np.array([estimate_diag(x_rotation, target, 500, seed=seed).value for seed in range(200)])
    sem = values.std(ddof=1) / np.sqrt(len(values))
    assert abs(values.mean() - np.sin(np.pi / 8) ** 2) < 4 * sem


def test_single_shot_survival_variance_is_bounded(sparse_channel, design2):
    """Each survival indicator has variance at most 1/4, which bounds every reported stderr."""
    samples = 2000
    records = collect_scan(sparse_channel, samples, seed=12)
    for target in pauli_basis(2):
        hits = np.array(
            [tuple(int(b) for b in design2.commutation_vector(target, r.basis)) == r.syndrome for r in records],
            dtype=float,
        )
        assert hits.var() <= 0.25
        estimate = estimate_diag_from_records(records, target, design2)
        assert estimate.raw_count == int(hits.sum())
        assert estimate.stderr <= (5 / 4) * 0.5 / np.sqrt(samples) + 1e-12


def test_estimate_replays_from_stored_records(sparse_channel):
    """Estimating from a scan equals running the targeted estimator with the same seed."""
    target = PauliOperator.from_label("XI")
    records = collect_scan(sparse_channel, 500, seed=123)
    assert estimate_diag_from_records(records, target) == estimate_diag(sparse_channel, target, 500, seed=123)
    assert collect_scan(sparse_channel, 500, seed=124) != records


def test_worker_count_does_not_change_results(sparse_channel):
    """Threaded scans return the same records in the same order."""
    serial = collect_scan(sparse_channel, 4500, seed=31, jobs=1)
    threaded = collect_scan(sparse_channel, 4500, seed=31, jobs=3)
    assert serial == threaded


def test_scan_estimates_every_coefficient(sparse_channel):
    """One 10⁴-shot scan estimates all sixteen diagonal coefficients of the sparse channel."""
    records = collect_scan(sparse_channel, 10000, seed=2)
    targets = list(pauli_basis(2))
    estimates = estimate_many_from_records(records, targets)
    for target, estimate in zip(targets, estimates):
        assert within(estimate, sparse_channel.probs.get(target.to_label(), 0.0)), target.to_label()

    fidelity = average_fidelity_from_records(records)
    assert abs(fidelity.value - (4 * 0.85 + 1) / 5) <= 4 * fidelity.stderr
    assert estimate_average_fidelity(sparse_channel, 10000, seed=2) == fidelity


def test_trajectory_and_dense_agree_statistically(sparse_channel):
    """Both simulation modes estimate χ_XI,XI consistently."""
    target = PauliOperator.from_label("XI")
    dense = estimate_diag(sparse_channel, target, 3000, seed=5, mode="dense")
    trajectory = estimate_diag(sparse_channel, target, 3000, seed=6, mode="trajectory")
    assert abs(dense.value - trajectory.value) <= 4 * np.hypot(dense.stderr, trajectory.stderr)


def test_record_estimator_errors(sparse_channel):
    """Empty inputs and mismatched targets are reported."""
    with pytest.raises(EstimationError):
        estimate_diag_from_records([], PauliOperator.identity(2))
    records = collect_scan(sparse_channel, 10, seed=0)
    with pytest.raises(DimensionMismatchError):
        estimate_diag_from_records(records, PauliOperator.identity(3))
    with pytest.raises(EstimationError):
        estimate_diag(sparse_channel, PauliOperator.identity(2), 0, seed=0)
    with pytest.raises(InvalidInputError):
        collect_scan(sparse_channel, 10, seed=-1)


def test_offdiag_x_rotation(x_rotation):
    """exp(-iπX/8) has Im χ_IX = sin(π/8)cos(π/8) and Re χ_IX = 0."""
    estimate = estimate_offdiag(
        x_rotation, PauliOperator.from_label("I"), PauliOperator.from_label("X"), 40000, seed=3
    )
    assert estimate.n_samples == 40000
    assert estimate.real.n_samples == estimate.imag.n_samples == 20000
    assert within(estimate.imag, np.sin(np.pi / 8) * np.cos(np.pi / 8))
    assert within(estimate.real, 0.0)


def test_offdiag_identity_pair():
    """m = m' = I on the noiseless channel reproduces χ_II = 1."""
    channel = identity_channel(2)
    identity = PauliOperator.identity(2)
    estimate = estimate_offdiag(channel, identity, identity, 400, seed=8)
    assert estimate.real.value == 1.0
    assert within(estimate.imag, 0.0)


def test_offdiag_diagonal_pair_agrees_with_diag_estimate(kraus_factory):
    """For m = m' on a noisy channel Re χ̂_mm matches estimate_diag within the combined 4σ."""
    channel = kraus_factory(1, 2, seed=11)
    m = PauliOperator.from_label("X")
    truth = chi_from_kraus(channel)[1, 1].real
    offdiag = estimate_offdiag(channel, m, m, 8000, seed=21)
    diag = estimate_diag(channel, m, 4000, seed=22)
    assert abs(offdiag.real.value - diag.value) <= 4 * np.hypot(offdiag.real.stderr, diag.stderr)
    assert within(offdiag.real, truth)
    assert within(diag, truth)
    assert within(offdiag.imag, 0.0)


def test_offdiag_odd_budget_rounds_up(bit_flip, caplog):
    """An odd M is rounded up to the next even number with a warning."""
    with caplog.at_level(logging.WARNING, logger="seqpt"):
        estimate = estimate_offdiag(
            bit_flip, PauliOperator.from_label("I"), PauliOperator.from_label("X"), 11, seed=0
        )
    assert estimate.n_samples == 12
    assert "rounded up" in caplog.text
    with pytest.raises(DimensionMismatchError):
        estimate_offdiag(bit_flip, PauliOperator.identity(2), PauliOperator.identity(2), 10, seed=0)
    with pytest.raises(EstimationError):
        estimate_offdiag(bit_flip, PauliOperator.identity(1), PauliOperator.identity(1), 1, seed=0)


def test_solve_pair_matches_brute_force(design2):
    """For distinct bases the two syndromes single out exactly one Pauli."""
    paulis = list(pauli_basis(2))
    syndromes = list(product((0, 1), repeat=2))
    for first_basis, second_basis in combinations(design2.bases(), 2):
        for s1, s2 in product(syndromes, syndromes):
            first = ExperimentRecord(first_basis, (0, 0), s1)
            second = ExperimentRecord(second_basis, (0, 0), s2)
            matches = [
                p for p in paulis
                if tuple(design2.commutation_vector(p, first_basis)) == s1
                and tuple(design2.commutation_vector(p, second_basis)) == s2
            ]
            assert len(matches) == 1
            assert solve_pair(first, second, design2) == matches[0]


def test_solve_pair_degenerate_cases(design3):
    """Same-basis pairs give None; two survivals give the identity."""
    basis, other = design3.bases()[2], design3.bases()[5]
    survived = ExperimentRecord(basis, (1, 0, 1), (1, 0, 1))
    assert solve_pair(survived, ExperimentRecord(basis, (0, 0, 0), (1, 0, 0)), design3) is None
    assert solve_pair(survived, ExperimentRecord(other, (0, 1, 1), (0, 1, 1)), design3).is_identity()
    with pytest.raises(DimensionMismatchError):
        solve_pair(survived, ExperimentRecord(BasisId.computational(2), (0, 0), (0, 0)))


def test_detection_finds_sparse_support(sparse_channel):
    """XI and ZZ are detected from 2000 records in nearly every seed."""
    hits = 0
    for seed in range(20):
        records = collect_scan(sparse_channel, 2000, seed=seed, mode="trajectory")
        result = detect_large_coefficients(records)
        labels = {op.to_label() for op, _ in result.candidates}
        assert "II" in labels
        assert result.candidates[0][0].is_identity()
        assert not result.unreliable
        hits += {"XI", "ZZ"} <= labels
    assert hits >= 19


def test_detection_orders_and_thresholds(sparse_channel):
    """Candidates are sorted by χ̂ and all pass F̂ ≥ 2/M."""
    records = collect_scan(sparse_channel, 300, seed=77)
    result = detect_large_coefficients(records)
    values = [e.value for _, e in result.candidates]
    assert values == sorted(values, reverse=True)
    assert all(e.raw_count >= 2 for _, e in result.candidates)
    assert result.candidate_count >= len(result.candidates)
    assert result.pairs_processed > 0


def test_detection_on_noiseless_channel():
    """Only the identity survives detection when nothing happens."""
    records = collect_scan(identity_channel(2), 100, seed=4)
    result = detect_large_coefficients(records)
    assert [op.to_label() for op, _ in result.candidates] == ["II"]
    assert result.candidates[0][1].value == 1.0
    assert not result.unreliable


def test_detection_flags_depolarizing_noise(caplog):
    """A fully depolarizing channel has no coefficient clearly above 1/D."""
    records = collect_scan(depolarizing_channel(2), 400, seed=12, mode="trajectory")
    with caplog.at_level(logging.WARNING, logger="seqpt"):
        result = detect_large_coefficients(records)
    assert result.unreliable
    assert "unreliable" in caplog.text
    with pytest.raises(EstimationError):
        detect_large_coefficients(records[:1])


def test_chernoff_budget_coverage(sparse_channel):
    """With M from the Chernoff bound, |F̂ - F| ≤ ε holds in at least a fraction p of runs."""
    eps, p = 0.05, 0.9
    samples = chernoff_samples(eps, p)
    assert samples == 600
    target = PauliOperator.from_label("XI")
    fidelity = (4 * 0.10 + 1) / 5
    covered = 0
    trials = 200
    for seed in range(trials):
        estimate = estimate_diag(sparse_channel, target, samples, seed=1000 + seed, mode="trajectory")
        covered += abs(estimate.raw_count / samples - fidelity) <= eps
    assert binomtest(covered, trials, p, alternative="less").pvalue > 1e-3


def test_detection_on_three_qubits():
    """Every term of a sparse three-qubit Pauli channel is detected."""
    channel = PauliChannel({"III": 0.7, "XYZ": 0.2, "IZI": 0.1})
    records = collect_scan(channel, 400, seed=21, mode="trajectory")
    labels = {op.to_label() for op, _ in detect_large_coefficients(records).candidates}
    assert {"III", "XYZ", "IZI"} <= labels
