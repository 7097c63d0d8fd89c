"""Tests for records, channel documents and the shot batch processor."""

from unittest.mock import Mock

import numpy as np
import pytest

from src.exceptions import ChannelSpecError, DimensionMismatchError, InvalidInputError
from src.models import (
    ChannelSpec,
    Estimate,
    ExperimentRecord,
    OffDiagonalEstimate,
    ShotBatchProcessor,
    load_channel_spec,
    matrix_to_rows,
    parse_channel_spec,
    rows_to_matrix,
    run_shots,
)
from src.mub import BasisId
from src.reports import read_record_seed, read_records, render_records, write_records


@pytest.fixture
def records():
    """Three records on two qubits, one of them a survival."""
    return [
        ExperimentRecord(BasisId.from_label("01"), (1, 0), (1, 0)),
        ExperimentRecord(BasisId.computational(2), (0, 0), (0, 1)),
        ExperimentRecord(BasisId.from_label("11"), (1, 1), (0, 1)),
    ]


def test_record_properties(records):
    """Syndrome is k_in xor k_out and survival means an empty syndrome."""
    assert records[0].survived
    assert records[0].syndrome == (0, 0)
    assert records[2].syndrome == (1, 0)
    assert not records[2].survived
    assert records[1].state.label == "Z:00"
    assert records[2].to_line() == "11 11 01"


def test_record_lines(records):
    """Lines parse back to the same records; malformed lines are rejected."""
    assert [ExperimentRecord.from_line(r.to_line()) for r in records] == records
    assert ExperimentRecord.from_line("Z 00 01", 2) == records[1]
    for line in ("Z 00", "Z 0a 01", "102 000 000", "Z 000 01"):
        with pytest.raises(InvalidInputError):
            ExperimentRecord.from_line(line)
    with pytest.raises(DimensionMismatchError):
        ExperimentRecord.from_line("01 00 00", 3)


def test_record_file(records, tmp_path):
    """Record files skip comments and blank lines."""
    path = tmp_path / "records.txt"
    write_records(records, path)
    assert path.read_text(encoding="utf-8") == render_records(records)
    with open(path, "a", encoding="utf-8") as f:
        f.write("\n# trailing comment\n")
    assert read_records(path) == records
    with pytest.raises(FileNotFoundError):
        read_records(tmp_path / "missing.txt")


def test_record_file_seed_line(records, tmp_path):
    """A known master seed is written as a leading comment and read back."""
    path = tmp_path / "seeded.txt"
    write_records(records, path, seed=42)
    assert path.read_text(encoding="utf-8").splitlines()[0] == "# seed=42"
    assert read_records(path) == records
    assert read_record_seed(path) == 42

    write_records(records, path)
    assert read_record_seed(path) is None
    path.write_text("# seed=-4\n", encoding="utf-8")
    with pytest.raises(InvalidInputError):
        read_record_seed(path)


def test_estimate_dicts():
    """Estimates serialize with their raw counts."""
    real = Estimate(0.5, 0.01, 100, 60)
    imag = Estimate(-0.25, 0.02, 100, -10)
    assert real.to_dict() == {"value": 0.5, "stderr": 0.01, "n_samples": 100, "raw_count": 60}
    combined = OffDiagonalEstimate(real, imag)
    assert combined.value == complex(0.5, -0.25)
    assert combined.n_samples == 200
    assert combined.to_dict()["raw_count_im"] == -10


def test_matrix_rows():
    """Entries are [re, im] pairs or bare real numbers."""
    matrix = np.array([[1, 1j], [-1j, 2]])
    assert np.allclose(rows_to_matrix(matrix_to_rows(matrix)), matrix)
    assert np.allclose(rows_to_matrix([[1, [0, 1]], [0.5, 0]]), [[1, 1j], [0.5, 0]])
    with pytest.raises(ValueError):
        rows_to_matrix([[1, 0]])
    with pytest.raises(ValueError):
        rows_to_matrix([[[1, 2, 3]]])


def test_channel_spec_variants():
    """All three channel types validate against n."""
    pauli = parse_channel_spec({"n": 1, "channel": {"type": "pauli", "probs": {"I": 0.9, "Z": 0.1}}})
    assert isinstance(pauli, ChannelSpec)
    with pytest.raises(ChannelSpecError):
        pauli.kraus_matrices()

    kraus = parse_channel_spec(
        {"n": 1, "channel": {"type": "kraus", "matrices": [[[1, 0], [0, 0]], [[0, 1], [0, 0]]]}}
    )
    assert len(kraus.kraus_matrices()) == 2

    unitary = parse_channel_spec({"n": 1, "channel": {"type": "unitary", "matrix": [[0, 1], [1, 0]]}})
    assert np.allclose(unitary.kraus_matrices()[0], [[0, 1], [1, 0]])


@pytest.mark.parametrize(
    "document",
    [
        {"n": 1, "channel": {"type": "pauli", "probs": {}}},
        {"n": 1, "channel": {"type": "pauli", "probs": {"Q": 1.0}}},
        {"n": 1, "channel": {"type": "pauli", "probs": {"I": -1.0}}},
        {"n": 2, "channel": {"type": "unitary", "matrix": [[0, 1], [1, 0]]}},
        {"n": 1, "channel": {"type": "kraus", "matrices": []}},
        {"n": 1, "channel": {"type": "superoperator", "matrix": []}},
        {"n": 33, "channel": {"type": "pauli", "probs": {"I": 1.0}}},
        {"channel": {"type": "pauli", "probs": {"I": 1.0}}},
    ],
)
def test_channel_spec_rejections(document):
    """Malformed documents raise ChannelSpecError with a field path."""
    with pytest.raises(ChannelSpecError) as e:
        parse_channel_spec(document)
    assert e.value.field


def test_load_channel_spec(sparse_channel_file, tmp_path):
    """Files load with a stable digest; missing files raise FileNotFoundError."""
    spec, digest = load_channel_spec(sparse_channel_file)
    assert spec.n == 2
    assert load_channel_spec(sparse_channel_file)[1] == digest
    with pytest.raises(FileNotFoundError):
        load_channel_spec(tmp_path / "missing.json")


def test_batch_processor_keeps_index_order():
    """Threaded batches return results in index order."""
    processor = ShotBatchProcessor(max_workers=4, max_batch_size=7)
    def shot(index):
        return index * index

    assert processor.run(shot, 50, start=3) == [i * i for i in range(3, 53)]
    metrics = processor.get_metrics()
    assert metrics["total_processed"] == 50
    assert metrics["batches"] == 8
    assert metrics["last_batch_size"] == 50

    processor.reset_metrics()
    assert processor.get_metrics()["total_processed"] == 0
    assert processor.run(shot, 0) == []


def test_batch_processor_validation():
    """Worker and batch sizes must be positive; shots run once each."""
    with pytest.raises(InvalidInputError):
        ShotBatchProcessor(max_workers=0)
    with pytest.raises(InvalidInputError):
        ShotBatchProcessor(max_batch_size=0)
    with pytest.raises(InvalidInputError):
        ShotBatchProcessor().run(lambda i: i, -1)

    shot = Mock(side_effect=lambda i: i + 1)
    assert run_shots(shot, 5, jobs=2) == [1, 2, 3, 4, 5]
    assert shot.call_count == 5
