"""Computable Hardy-space theory of ordinary Dirichlet series.

Dirichlet polynomials and their lifts to the polytorus, the full H^p
norm family (exact for even p, flow/Monte-Carlo otherwise), vertical
integral means with rigorous finite-T error bounds, the critical-line
embedding laboratory, and finite-truncation builds of the bidisc
boundary counterexamples.
"""

from .arith import (
    MAX_INDEX,
    MultiIndex,
    PrimeTable,
    default_table,
    dirichlet_convolve,
    factorize,
    multiindex_to_integer,
    nth_prime,
)
from .bidisc import (
    BidiscAnalytic,
    DyadicSquareSet,
    FourierDatum2,
    RingMeasure,
    curve_trace,
    dyadic_square_bounds,
    exp_series,
    h2_norm_bidisc,
    lambda_extend,
    pluriharmonic_complete,
    poisson_extend,
    poisson_kernel2,
    rectangle_coefficients,
    rudin_datum,
)
from .embedding import (
    DualityReport,
    EmbeddingResult,
    SearchTrace,
    adjoint_A,
    duality_probe,
    embedding_ratio,
    embedding_search,
    montgomery_ratio,
)
from .errors import CapacityError, ConstructionError, DomainError
from .means import (
    FatouReport,
    KroneckerOrbit,
    MeanReport,
    b_theta,
    carlson_check,
    carlson_cross_term_bound,
    coefficient_target,
    fatou_orbit_check,
    integral_mean,
    kronecker_flow,
    pmeans_check,
    weyl_discrepancy,
)
from .poly import (
    DirichletPolynomial,
    NormEstimate,
    PolytorusPolynomial,
    bohr_lift,
    bohr_push,
    evaluate,
    evaluate_torus,
    hinf_norm_estimate,
    hp_norm_even,
    hp_norm_flow,
    hp_norm_mc,
    l2_norm,
    point_eval_bound,
)
from .rudin import (
    DecompositionResult,
    Demo1Report,
    Demo2Report,
    decompose_lsc,
    strip_cover,
    theorem1_i_demo,
    theorem1_ii_demo,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
