from .batch_processor import ShotBatchProcessor, run_shots
from .channel_spec import (
    ChannelSpec,
    KrausChannelSpec,
    PauliChannelSpec,
    UnitaryChannelSpec,
    load_channel_spec,
    matrix_to_rows,
    parse_channel_spec,
    rows_to_matrix,
)
from .records import Estimate, ExperimentRecord, OffDiagonalEstimate, ShotOutcome
from .types import (
    CandidateEntry,
    DetectionEntry,
    DiagonalEntry,
    OffDiagonalEntry,
    ReportHeader,
)

__all__ = [
    'ShotBatchProcessor',
    'run_shots',
    'ChannelSpec',
    'KrausChannelSpec',
    'PauliChannelSpec',
    'UnitaryChannelSpec',
    'load_channel_spec',
    'matrix_to_rows',
    'parse_channel_spec',
    'rows_to_matrix',
    'Estimate',
    'ExperimentRecord',
    'OffDiagonalEstimate',
    'ShotOutcome',
    'CandidateEntry',
    'DetectionEntry',
    'DiagonalEntry',
    'OffDiagonalEntry',
    'ReportHeader',
]
