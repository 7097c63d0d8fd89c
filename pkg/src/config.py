"""Configuration management for SEQPT runs."""

import json
import logging
import os
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from dotenv import load_dotenv
from pydantic import BaseModel, StrictBool, StrictInt, StrictStr, ValidationError

from .exceptions import InvalidInputError

logger = logging.getLogger("seqpt")

# Exponents of the nonzero terms of a primitive polynomial over GF(2), highest first.
DEFAULT_PRIMITIVE_POLYNOMIALS: Dict[int, Tuple[int, ...]] = {
    1: (1, 0),
    2: (2, 1, 0),
    3: (3, 1, 0),
    4: (4, 1, 0),
    5: (5, 2, 0),
    6: (6, 1, 0),
    7: (7, 1, 0),
    8: (8, 4, 3, 2, 0),
    9: (9, 4, 0),
    10: (10, 3, 0),
    11: (11, 2, 0),
    12: (12, 6, 4, 1, 0),
    13: (13, 4, 3, 1, 0),
    14: (14, 10, 6, 1, 0),
    15: (15, 1, 0),
    16: (16, 12, 3, 1, 0),
    17: (17, 3, 0),
    18: (18, 7, 0),
    19: (19, 5, 2, 1, 0),
    20: (20, 3, 0),
    21: (21, 2, 0),
    22: (22, 1, 0),
    23: (23, 5, 0),
    24: (24, 7, 2, 1, 0),
    25: (25, 3, 0),
    26: (26, 6, 2, 1, 0),
    27: (27, 5, 2, 1, 0),
    28: (28, 3, 0),
    29: (29, 2, 0),
    30: (30, 23, 2, 1, 0),
    31: (31, 3, 0),
    32: (32, 22, 2, 1, 0),
}

MAX_TABLE_QUBITS = 32


def load_primitive_polynomials() -> Dict[int, Tuple[int, ...]]:
    """Load the primitive polynomial table, honouring SEQPT_PRIMITIVE_POLYNOMIALS.

    The environment variable holds a JSON object mapping the degree (as a
    string) to the exponent list, e.g. ``{"3": [3, 2, 0]}``. Entries override
    the defaults one by one.
    """
    table = dict(DEFAULT_PRIMITIVE_POLYNOMIALS)
    override = os.getenv("SEQPT_PRIMITIVE_POLYNOMIALS")
    if not override:
        return table

    try:
        for degree, exponents in json.loads(override).items():
            table[int(degree)] = tuple(sorted((int(e) for e in exponents), reverse=True))
    except (ValueError, TypeError, AttributeError) as e:
        logger.error(f"Ignoring malformed SEQPT_PRIMITIVE_POLYNOMIALS: {str(e)}")
        return dict(DEFAULT_PRIMITIVE_POLYNOMIALS)
    return table


PRIMITIVE_POLYNOMIALS = load_primitive_polynomials()


def _env_int(name: str) -> Optional[int]:
    value = os.getenv(name)
    if value is None or value.strip() == "":
        return None
    try:
        return int(value)
    except ValueError:
        raise InvalidInputError(f"{name} must be an integer, got {value!r}")


LOG_LEVELS = ("CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG")


class SettingsOverrides(BaseModel):
    """Typed view of a config file or of command-line overrides; unknown keys are ignored."""

    seed: Optional[StrictInt] = None
    jobs: Optional[StrictInt] = None
    log_level: Optional[StrictStr] = None
    progress: Optional[StrictBool] = None


@dataclass(frozen=True)
class SeqptConfig:
    """Run settings shared by the CLI and library entry points."""

    seed: Optional[int] = None
    jobs: int = 1
    log_level: str = "WARNING"
    progress: bool = False

    def __post_init__(self) -> None:
        if self.seed is not None and self.seed < 0:
            raise InvalidInputError(f"seed must be a non-negative integer, got {self.seed}")
        if self.jobs < 1:
            raise InvalidInputError(f"jobs must be >= 1, got {self.jobs}")
        if self.log_level.upper() not in LOG_LEVELS:
            raise InvalidInputError(f"log_level must be one of {LOG_LEVELS}, got {self.log_level!r}")
        object.__setattr__(self, "log_level", self.log_level.upper())

    @classmethod
    def from_env(cls, env_file: Optional[Union[str, Path]] = None) -> "SeqptConfig":
        """Build a configuration from the environment (and an optional .env file)."""
        load_dotenv(dotenv_path=env_file)
        jobs = _env_int("SEQPT_JOBS")
        return cls(
            seed=_env_int("SEQPT_SEED"),
            jobs=jobs if jobs is not None else 1,
            log_level=os.getenv("SEQPT_LOG_LEVEL", "WARNING").upper(),
            progress=os.getenv("SEQPT_PROGRESS", "").lower() in ("1", "true", "yes"),
        )

    def merged(self, overrides: Dict[str, Any]) -> "SeqptConfig":
        """Return a copy with every non-None override applied.

        Raises:
            InvalidInputError: naming the first key with a wrong type or value.
        """
        try:
            checked = SettingsOverrides.parse_obj(overrides)
        except ValidationError as e:
            first = e.errors()[0]
            key = ".".join(str(part) for part in first.get("loc", ()))
            raise InvalidInputError(f"config {key}: {first.get('msg', str(e))}")
        updates = {k: v for k, v in checked.dict().items() if v is not None}
        return replace(self, **updates)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def load_config(config_path: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """Load configuration from file."""
    if not config_path:
        config_path = Path.cwd() / "seqpt.json"

    path = Path(config_path)
    if not path.exists():
        return {}

    try:
        with open(path, encoding="utf-8") as f:
            return dict(json.load(f))
    except Exception as e:
        logger.error(f"Error loading config: {str(e)}")
        return {}


def save_config(config: Dict[str, Any], config_path: Optional[Union[str, Path]] = None) -> None:
    """Save configuration to file."""
    if not config_path:
        config_path = Path.cwd() / "seqpt.json"

    path = Path(config_path)
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(config, f, indent=2, sort_keys=True)
        logger.info(f"Configuration saved to {path}")
    except Exception as e:
        logger.error(f"Error saving config: {str(e)}")
        raise
