"""singlab: a numerical laboratory for stable and singular solutions of
the semilinear problem  div(grad u) = m / u  (and its power-law relatives
div(grad u) = u^(-alpha)).

Capabilities: radial shooting and bifurcation scans, monotone
supersolution iteration toward maximal solutions, spectral stability of
the linearized operator, boundary-data continuation toward singular
limits, and quantitative estimate verification (volume lower bounds,
negative-power integrability, difference-quotient regularity, box-counting
dimension of near-singular sets).
"""

__version__ = "0.1.0"

from .grids import (
    Box,
    Disk,
    Field,
    Grid,
    Interval,
    RadialAnnulus,
    RadialBall,
    SparseOperator,
    assemble_laplacian,
    build_grid,
    cone_field,
    dirichlet_energy,
    domain_measure,
    integrate,
    unit_ball_volume,
)
from .radial import (
    BifurcationScan,
    DirichletRadialResult,
    RadialProfile,
    bifurcation_constants,
    conical_deviation,
    integrate_radial,
    series_start,
    shooting_map,
    solve_dirichlet_radial,
    weighted_deviation,
)
from .solver import (
    SolveReport,
    harmonic_extension,
    maximal_solution,
    newton_solve,
    picard_T,
    rescale_solution,
    restrict_and_resolve,
)
from .stability import (
    SpectralReport,
    energy,
    hardy_witness,
    is_stable,
    rayleigh_quotient,
    smallest_eigenvalue,
    stability_operator,
)
from .continuation import (
    ContinuationStep,
    ContinuationTrace,
    SingularStep,
    fold_detect,
    homotopy_run,
    singular_sequence,
)
from .analysis import (
    EstimateReport,
    box_dimension,
    calibrate_reference_constant,
    holder_quotient,
    log_trick_functional,
    log_trick_gradient,
    p_integral_check,
    p_threshold,
    positivity_check,
    w12_p2_check,
)
from .oracles import (
    OracleResult,
    oracle_dense_eig,
    oracle_integrate_radial,
    oracle_quadrature,
    run_oracle,
)
from .acceptance import ALL_CRITERIA, CriterionResult, run_criteria

__all__ = [
    "Box",
    "Disk",
    "Field",
    "Grid",
    "Interval",
    "RadialAnnulus",
    "RadialBall",
    "SparseOperator",
    "assemble_laplacian",
    "build_grid",
    "cone_field",
    "dirichlet_energy",
    "domain_measure",
    "integrate",
    "unit_ball_volume",
    "BifurcationScan",
    "DirichletRadialResult",
    "RadialProfile",
    "bifurcation_constants",
    "conical_deviation",
    "integrate_radial",
    "series_start",
    "shooting_map",
    "solve_dirichlet_radial",
    "weighted_deviation",
    "SolveReport",
    "harmonic_extension",
    "maximal_solution",
    "newton_solve",
    "picard_T",
    "rescale_solution",
    "restrict_and_resolve",
    "SpectralReport",
    "energy",
    "hardy_witness",
    "is_stable",
    "rayleigh_quotient",
    "smallest_eigenvalue",
    "stability_operator",
    "ContinuationStep",
    "ContinuationTrace",
    "SingularStep",
    "fold_detect",
    "homotopy_run",
    "singular_sequence",
    "EstimateReport",
    "box_dimension",
    "calibrate_reference_constant",
    "holder_quotient",
    "log_trick_functional",
    "log_trick_gradient",
    "p_integral_check",
    "p_threshold",
    "positivity_check",
    "w12_p2_check",
    "OracleResult",
    "oracle_dense_eig",
    "oracle_integrate_radial",
    "oracle_quadrature",
    "run_oracle",
    "ALL_CRITERIA",
    "CriterionResult",
    "run_criteria",
    "__version__",
]
