"""Test configuration and shared fixtures."""

import json
import os
import sys
from pathlib import Path
from typing import Callable, Dict

import numpy as np
import pytest
from scipy.linalg import expm
from scipy.stats import unitary_group

# Add project root to Python path for imports
project_root = str(Path(__file__).parent.parent)
if project_root not in sys.path:
    sys.path.insert(0, project_root)

# Keep the developer's environment out of seeded runs
for name in ("SEQPT_SEED", "SEQPT_JOBS", "SEQPT_LOG_LEVEL", "SEQPT_PROGRESS"):
    os.environ.pop(name, None)

from src.channel_sim import KrausChannel, PauliChannel, unitary_channel  # noqa: E402
from src.design import MubDesign, get_design  # noqa: E402
from src.models.channel_spec import matrix_to_rows  # noqa: E402

SPARSE_PROBS = {"II": 0.85, "XI": 0.10, "ZZ": 0.05}


def random_kraus_channel(n: int, rank: int, seed: int) -> KrausChannel:
    """Kraus operators cut from a Haar-random isometry, so Σ A†A = I exactly."""
    dimension = 1 << n
    unitary = unitary_group.rvs(dimension * rank, random_state=seed)
    isometry = unitary[:, :dimension]
    return KrausChannel([isometry[k * dimension:(k + 1) * dimension] for k in range(rank)])


@pytest.fixture
def kraus_factory() -> Callable[..., KrausChannel]:
    """Build seeded random Kraus channels."""
    return random_kraus_channel


@pytest.fixture
def design1() -> MubDesign:
    """Shared one-qubit design."""
    return get_design(1)


@pytest.fixture
def design2() -> MubDesign:
    """Shared two-qubit design."""
    return get_design(2)


@pytest.fixture
def design3() -> MubDesign:
    """Shared three-qubit design."""
    return get_design(3)


@pytest.fixture
def sparse_channel() -> PauliChannel:
    """Two-qubit Pauli channel with three nonzero coefficients."""
    return PauliChannel(SPARSE_PROBS)


@pytest.fixture
def bit_flip() -> PauliChannel:
    """One-qubit bit flip with p = 0.25."""
    return PauliChannel({"I": 0.75, "X": 0.25})


@pytest.fixture
def x_rotation() -> KrausChannel:
    """exp(-iπX/8) on one qubit."""
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    return unitary_channel(expm(-1j * np.pi / 8 * x))


@pytest.fixture
def write_channel(tmp_path: Path) -> Callable[[Dict], Path]:
    """Write a channel document to a temporary JSON file."""

    def write(document: Dict, name: str = "channel.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(document), encoding="utf-8")
        return path

    return write


@pytest.fixture
def sparse_channel_file(write_channel: Callable[[Dict], Path]) -> Path:
    """Channel file of the sparse two-qubit Pauli channel."""
    return write_channel({"n": 2, "channel": {"type": "pauli", "probs": SPARSE_PROBS}})


@pytest.fixture
def identity_channel_file(write_channel: Callable[[Dict], Path]) -> Path:
    """Channel file of the two-qubit identity."""
    return write_channel({"n": 2, "channel": {"type": "pauli", "probs": {"II": 1.0}}}, "identity.json")


@pytest.fixture
def rotation_channel_file(write_channel: Callable[[Dict], Path]) -> Path:
    """Channel file of exp(-iπX/8) as a unitary document."""
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    matrix = expm(-1j * np.pi / 8 * x)
    return write_channel({"n": 1, "channel": {"type": "unitary", "matrix": matrix_to_rows(matrix)}}, "rotation.json")
