"""siegelkit: exact and multiprecision reduction theory for GL_n."""

from .boundlab import (
    ExperimentConfig,
    ExperimentRecord,
    LemmaReport,
    WitnessedElement,
    generate_witnessed,
    run_experiment,
    sample_rational_map,
    sample_siegel_point,
    verify_lemmas,
)
from .decomp import IwasawaDecomposition, iwasawa, udu_factor
from .errors import (
    DomainError,
    InconsistentOmega,
    NearSingular,
    NotPositiveDefinite,
    NotSameSegment,
    PrecisionExhausted,
    RetriesExhausted,
    ShapeError,
    SiegelkitError,
    SingularMatrix,
)
from .exactmat import IntegerMatrix, RationalMatrix, denominator, det, height, hnf
from .gensiegel import SiegelTripleGLn, StandardizationResult, standardize, verify_containment
from .gl2 import UpperHalfPoint, hp_experiment, isogeny_matrices, mobius, reduce_point
from .segments import (
    LeadingEntry,
    SegmentPartition,
    leading_entries,
    segment_partition,
    witnessing_sequence,
)
from .siegel import SiegelParams, in_siegel, reduce_to_siegel

__version__ = "0.1.0"
