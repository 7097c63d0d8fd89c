"""JSON reports and line-oriented record files."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from . import __version__
from .estimator import DetectionResult
from .exceptions import InvalidInputError
from .models.channel_spec import matrix_to_rows
from .models.records import Estimate, ExperimentRecord, OffDiagonalEstimate
from .models.types import CandidateEntry, DetectionEntry, DiagonalEntry, OffDiagonalEntry, ReportHeader
from .pauli import PauliOperator, pauli_basis

logger = logging.getLogger("seqpt")

TOOL_NAME = "seqpt"
SEED_HEADER = "# seed="


def report_header(command: str, seed: Optional[int], channel_digest: Optional[str], n: int) -> ReportHeader:
    return {
        "tool": TOOL_NAME,
        "version": __version__,
        "command": command,
        "seed": seed,
        "channel_digest": channel_digest,
        "n": n,
    }


def diagonal_entry(target: PauliOperator, estimate: Estimate, seed: int) -> DiagonalEntry:
    return {
        "pauli_label": target.to_label(),
        "value": estimate.value,
        "stderr": estimate.stderr,
        "n_samples": estimate.n_samples,
        "raw_count": estimate.raw_count,
        "seed": seed,
    }


def offdiagonal_entry(
    m: PauliOperator, m_prime: PauliOperator, estimate: OffDiagonalEstimate, seed: int
) -> OffDiagonalEntry:
    return {
        "pauli_label": m.to_label(),
        "pauli_label_prime": m_prime.to_label(),
        "re": estimate.real.value,
        "im": estimate.imag.value,
        "stderr_re": estimate.real.stderr,
        "stderr_im": estimate.imag.stderr,
        "n_samples": estimate.n_samples,
        "raw_count_re": estimate.real.raw_count,
        "raw_count_im": estimate.imag.raw_count,
        "seed": seed,
    }


def detection_entry(result: DetectionResult) -> DetectionEntry:
    candidates: List[CandidateEntry] = []
    for op, estimate in result.candidates:
        candidates.append(
            {
                "pauli_label": op.to_label(),
                "value": estimate.value,
                "stderr": estimate.stderr,
                "fidelity": estimate.raw_count / estimate.n_samples,
                "raw_count": estimate.raw_count,
            }
        )
    return {
        "candidates": candidates,
        "unreliable": result.unreliable,
        "pairs_processed": result.pairs_processed,
        "candidate_count": result.candidate_count,
    }


def chi_entry(chi: np.ndarray, n: int) -> Dict[str, Any]:
    """Labels plus the χ-matrix as rows of [re, im] pairs."""
    return {
        "labels": [p.to_label() for p in pauli_basis(n)],
        "chi": matrix_to_rows(chi),
    }


def render_report(report: Dict[str, Any]) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def write_report(report: Dict[str, Any], path: Optional[Union[str, Path]] = None) -> str:
    """Write the rendered report to ``path`` (if given) and return the text."""
    text = render_report(report)
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
        logger.info(f"Report written to {path}")
    return text


def render_records(records: Iterable[ExperimentRecord], seed: Optional[int] = None) -> str:
    header = f"{SEED_HEADER}{seed}\n" if seed is not None else ""
    return header + "".join(record.to_line() + "\n" for record in records)


def write_records(records: Sequence[ExperimentRecord], path: Union[str, Path], seed: Optional[int] = None) -> None:
    """Write record lines, preceded by a ``# seed=N`` comment when the master seed is known."""
    Path(path).write_text(render_records(records, seed), encoding="utf-8")
    logger.info(f"{len(records)} records written to {path}")


def read_record_seed(path: Union[str, Path]) -> Optional[int]:
    """Master seed from a ``# seed=N`` comment line, or None if the file carries none."""
    with open(path, encoding="utf-8") as f:
        for number, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line.startswith(SEED_HEADER):
                continue
            value = line[len(SEED_HEADER):].strip()
            if not value.isdigit():
                raise InvalidInputError(f"{path}:{number}: seed must be a non-negative integer, got {value!r}")
            return int(value)
    return None


def read_records(path: Union[str, Path], n: Optional[int] = None) -> List[ExperimentRecord]:
    """Parse a record file; blank lines and ``#`` comments are skipped.

    Raises:
        FileNotFoundError: if the file does not exist.
        InvalidInputError: naming the first malformed line.
    """
    records = []
    with open(path, encoding="utf-8") as f:
        for number, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                records.append(ExperimentRecord.from_line(line, n))
            except InvalidInputError as e:
                raise InvalidInputError(f"{path}:{number}: {e}")
    return records
