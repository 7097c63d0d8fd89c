from typing import List, Optional, TypedDict


class DiagonalEntry(TypedDict):
    """Report entry of one diagonal coefficient."""
    pauli_label: str
    value: float
    stderr: float
    n_samples: int
    raw_count: int
    seed: int


class OffDiagonalEntry(TypedDict):
    """Report entry of one off-diagonal coefficient; stderr is per component."""
    pauli_label: str
    pauli_label_prime: str
    re: float
    im: float
    stderr_re: float
    stderr_im: float
    n_samples: int
    raw_count_re: int
    raw_count_im: int
    seed: int


class CandidateEntry(TypedDict):
    """A detected large coefficient."""
    pauli_label: str
    value: float
    stderr: float
    fidelity: float
    raw_count: int


class DetectionEntry(TypedDict):
    candidates: List[CandidateEntry]
    unreliable: bool
    pairs_processed: int
    candidate_count: int


class ReportHeader(TypedDict):
    tool: str
    version: str
    command: str
    seed: Optional[int]
    channel_digest: Optional[str]
    n: int
