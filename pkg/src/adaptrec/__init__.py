"""Adaptive recovery of vectors from few 1-Lipschitz measurements.

Any x in R^m can be pinned down to max-norm precision eps with at most
ceil(log2(m+1)) + 1 adaptively chosen measurements, each a 1-Lipschitz
functional of x.  The trick is a coloring of space by lattice cells of
diameter at most eps whose same-colored cells stay a fixed distance
apart: a bisection over colors finds the color of x's cell, one more
query identifies the cell itself, and any point of that cell answers.

The package keeps two arithmetic modes side by side.  Exact mode works
in rational arithmetic end to end and meets the error bound exactly;
float64 mode trades that for speed, with every tolerance it relies on
documented on the spec object.  A compiled kernel accelerates bulk
work when available; the pure Python fallback is always present and
``backend.BACKEND`` names the one in use.
"""

from .backend import BACKEND
from .errors import (
    AdaptrecError,
    BudgetExhaustedError,
    ContractViolation,
    DomainError,
    NotACellError,
    OutsideCoveringError,
    PrecisionExceededError,
    TruncationLimitError,
)
from .measurement import (
    MeasurementDescriptor,
    MeasurementOracle,
    ReplayOracle,
    Transcript,
    color_distance,
    evaluate,
    make_oracle,
    separating,
)
from .partition import (
    CellId,
    ColorSet,
    PartitionSpec,
    cell_of,
    decode_cell,
    default_delta_schedule,
    dist_to_cell,
    dist_to_colors,
    encode_cell,
    level_of,
    representative,
    separation_lower_bound,
)
from .recovery import (
    BatchResult,
    RecoveryResult,
    n_of,
    recover,
    recover_many,
    recover_point,
)
from .widths import (
    Covering,
    DiagonalOperator,
    SketchProblem,
    hilbert_speedup_demo,
    pou_reconstruct,
    pou_weights,
    s_numbers,
    wrap_sketch,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptrecError",
    "BACKEND",
    "BatchResult",
    "BudgetExhaustedError",
    "CellId",
    "ColorSet",
    "ContractViolation",
    "Covering",
    "DiagonalOperator",
    "DomainError",
    "MeasurementDescriptor",
    "MeasurementOracle",
    "NotACellError",
    "OutsideCoveringError",
    "PartitionSpec",
    "PrecisionExceededError",
    "RecoveryResult",
    "ReplayOracle",
    "SketchProblem",
    "Transcript",
    "TruncationLimitError",
    "cell_of",
    "color_distance",
    "decode_cell",
    "default_delta_schedule",
    "dist_to_cell",
    "dist_to_colors",
    "encode_cell",
    "evaluate",
    "hilbert_speedup_demo",
    "level_of",
    "make_oracle",
    "n_of",
    "pou_reconstruct",
    "pou_weights",
    "recover",
    "recover_many",
    "recover_point",
    "representative",
    "s_numbers",
    "separating",
    "separation_lower_bound",
    "wrap_sketch",
]
