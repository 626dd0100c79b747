"""Two-detector vacuum response matrices and covert-communication rate bounds."""

from .params import (
    C_LIGHT,
    DetectorParams,
    DimensionlessParams,
    ValidationError,
    derive_dimensionless,
    params_from_dimensionless,
)
from .series import (
    MatrixElements,
    NonConvergence,
    SeriesControl,
    matrix_elements_series,
    ratio_I3_over_I2,
    series_I1,
    series_I2,
    series_I3,
    series_I4,
)
from .quadrature import (
    QuadratureControl,
    QuadResult,
    SingularDenominator,
    ToleranceNotMet,
    integral_I23_L,
    matrix_elements_quadrature,
    oracle_I_L0,
    propagator_FP_distance,
)
from .state import (
    PerturbationBreakdown,
    XState,
    assemble_fourth_order,
    assemble_second_order,
    eigenvalues_xstate,
    marginal_A,
    marginal_B,
    to_dense,
)
from .measures import (
    BoundsReport,
    OptimizerControl,
    OptimizerDiverged,
    bmax,
    bounds_report,
    coherent_information,
    concurrence_wootters,
    concurrence_xstate,
    eof,
    ppt_and_negativity,
    squashed_identity,
    squashed_optimized,
    von_neumann_entropy,
)
from .sweep import (
    NoBracket,
    SweepRow,
    SweepSpec,
    emit_csv,
    find_threshold,
    run_sweep,
)

__version__ = "0.1.0"
