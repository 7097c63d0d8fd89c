"""Utility functions shared across the toolkit."""

import hashlib
import json
import logging
import os
import re
import time
from functools import wraps
from typing import Any, Callable, Dict, Optional, TypeVar, cast

import numpy as np
import psutil

T = TypeVar("T")

logger = logging.getLogger("seqpt")

# Constants
MAX_QUBITS = 32
PAULI_LABEL_PATTERN = re.compile(r"^[IXYZ]+$")
BITSTRING_PATTERN = re.compile(r"^[01]+$")


def validate_bitstring(text: str, length: Optional[int] = None) -> Dict[str, Any]:
    """Validate a bitstring such as ``"101"``.

    Returns:
        Dict with validation result and error message if any.
    """
    if not text:
        return {"valid": False, "error": "No bitstring provided"}

    if not BITSTRING_PATTERN.match(text):
        return {"valid": False, "error": f"Invalid bitstring {text!r}: only 0 and 1 allowed"}

    if length is not None and len(text) != length:
        return {
            "valid": False,
            "error": f"Bitstring {text!r} has length {len(text)}, expected {length}",
        }

    return {"valid": True, "error": None}


def validate_pauli_label(label: str, length: Optional[int] = None) -> Dict[str, Any]:
    """Validate a Pauli label over I, X, Y, Z.

    Returns:
        Dict with validation result and error message if any.
    """
    if not label:
        return {"valid": False, "error": "No Pauli label provided"}

    if not PAULI_LABEL_PATTERN.match(label):
        return {"valid": False, "error": f"Invalid Pauli label {label!r}: use I, X, Y, Z"}

    if length is not None and len(label) != length:
        return {
            "valid": False,
            "error": f"Pauli label {label!r} acts on {len(label)} qubits, expected {length}",
        }

    return {"valid": True, "error": None}


def shot_rng(master_seed: int, index: int) -> np.random.Generator:
    """Return the generator for shot ``index`` of a run seeded with ``master_seed``.

    Streams depend only on (master_seed, index), never on execution order.
    """
    sequence = np.random.SeedSequence(entropy=master_seed, spawn_key=(index,))
    return np.random.default_rng(sequence)


def fresh_seed() -> int:
    """Draw a new master seed from OS entropy."""
    return int(np.random.SeedSequence().entropy % (2**63))


def digest_payload(payload: Any) -> str:
    """SHA-256 of the canonical JSON encoding of ``payload``."""
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def get_memory_usage() -> float:
    """Get current memory usage in MB."""
    process = psutil.Process(os.getpid())
    return process.memory_info().rss / 1024 / 1024


def track_performance(operation: str) -> Callable[[Callable[..., T]], Callable[..., T]]:
    """Decorator to track function performance."""

    def decorator(func: Callable[..., T]) -> Callable[..., T]:
        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> T:
            start_time = time.time()
            start_memory = get_memory_usage()

            try:
                result = func(*args, **kwargs)

                duration = time.time() - start_time
                memory_used = get_memory_usage() - start_memory

                logger.info(
                    "%s completed in %.2fs using %.2fMB memory", operation, duration, memory_used
                )

                return result

            except Exception as e:
                logger.error("%s failed: %s", operation, str(e))
                raise

        return cast(Callable[..., T], wrapper)

    return decorator
