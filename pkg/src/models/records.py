"""Experiment records and estimate containers."""

from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

from ..exceptions import DimensionMismatchError, InvalidInputError
from ..gf2 import as_bits, to_bitstring
from ..mub import BasisId, StateIndex


@dataclass(frozen=True)
class ExperimentRecord:
    """One shot of the transition experiment: the triple (J, k_in, k_out)."""

    basis: BasisId
    k_in: Tuple[int, ...]
    k_out: Tuple[int, ...]

    def __post_init__(self) -> None:
        k_in = tuple(int(v) for v in as_bits(self.k_in))
        k_out = tuple(int(v) for v in as_bits(self.k_out))
        if len(k_in) != self.basis.n or len(k_out) != self.basis.n:
            raise DimensionMismatchError(
                f"record bitstrings must have {self.basis.n} bits, got {len(k_in)} and {len(k_out)}"
            )
        object.__setattr__(self, "k_in", k_in)
        object.__setattr__(self, "k_out", k_out)

    @property
    def n(self) -> int:
        return self.basis.n

    @property
    def syndrome(self) -> Tuple[int, ...]:
        """k_in xor k_out."""
        return tuple(a ^ b for a, b in zip(self.k_in, self.k_out))

    @property
    def survived(self) -> bool:
        return self.k_in == self.k_out

    @property
    def state(self) -> StateIndex:
        return StateIndex(self.basis, self.k_in)

    def to_line(self) -> str:
        return f"{self.basis.label} {to_bitstring(self.k_in)} {to_bitstring(self.k_out)}"

    @classmethod
    def from_line(cls, line: str, n: Optional[int] = None) -> "ExperimentRecord":
        """Parse ``"J k_in k_out"``, e.g. ``"101 010 011"`` or ``"Z 00 01"``.

        Raises:
            InvalidInputError: if the line does not have three fields or a field is malformed.
        """
        fields = line.split()
        if len(fields) != 3:
            raise InvalidInputError(f"record line must have 3 fields, got {line!r}")
        label, k_in, k_out = fields
        if n is None:
            n = len(k_in)
        basis = BasisId.from_label(label, n)
        for text in (k_in, k_out):
            if not text or any(c not in "01" for c in text):
                raise InvalidInputError(f"invalid bitstring {text!r} in record line {line!r}")
        return cls(basis, tuple(int(c) for c in k_in), tuple(int(c) for c in k_out))


@dataclass(frozen=True)
class ShotOutcome:
    """A record plus the ancilla reading (+1/-1) of an off-diagonal shot."""

    record: ExperimentRecord
    ancilla: Optional[int] = None

    @property
    def survived(self) -> bool:
        return self.record.survived


@dataclass(frozen=True)
class Estimate:
    """A real-valued estimate with its standard error.

    ``raw_count`` is the number of successful shots (or the signed sum of
    ancilla readings on surviving shots for off-diagonal components).
    """

    value: float
    stderr: float
    n_samples: int
    raw_count: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "value": self.value,
            "stderr": self.stderr,
            "n_samples": self.n_samples,
            "raw_count": self.raw_count,
        }


@dataclass(frozen=True)
class OffDiagonalEstimate:
    """Real and imaginary parts of an off-diagonal coefficient, each with its own stderr."""

    real: Estimate
    imag: Estimate

    @property
    def value(self) -> complex:
        return complex(self.real.value, self.imag.value)

    @property
    def n_samples(self) -> int:
        return self.real.n_samples + self.imag.n_samples

    def to_dict(self) -> Dict[str, Any]:
        return {
            "re": self.real.value,
            "im": self.imag.value,
            "stderr_re": self.real.stderr,
            "stderr_im": self.imag.stderr,
            "n_samples": self.n_samples,
            "raw_count_re": self.real.raw_count,
            "raw_count_im": self.imag.raw_count,
        }
