"""Edgeworth expansions for lattice profiles and one-split branching random walks.

The package has three layers: exact expansion algebra (`algebra`,
`expansion`), the model catalog and growth engine (`models`, `simulator`,
`estimators`), and theorem harnesses with reporting (`verify`, `fixtures`,
`report`, `cli`).
"""

from .algebra import DiffOperator, Polynomial, bell_eval, bell_partition_sum, hermite_poly
from .expansion import (
    ComplexSeriesTerm,
    CumulantSet,
    InsufficientCumulantsError,
    build_operators,
    char_fn_psi,
    edgeworth_term,
    expansion_value,
    f_term,
    fourier_invert_check,
    saddle_expansion_value,
    v_partial_sum,
)
from .models import (
    ClusterLaw,
    ModelSpec,
    bst,
    check_assumptions,
    custom,
    d_ary,
    exact_mean_W,
    get_model,
    jabbour_normalizer,
    limit_mean_W,
    mean_cumulant,
    p_oriented,
    port,
    rrt,
    saddle_beta,
    vertical_bst,
)
from .simulator import (
    ModeWidthStats,
    ProfileSnapshot,
    RunTrace,
    grow,
    grow_ensemble,
    laplace_W,
    mode_width,
    occupation,
    occupation_centered,
    tilted_cumulants,
)
from .estimators import (
    LimitEstimate,
    cumulants_to_moments,
    estimate_chi,
    moments_to_cumulants,
    replicate_moments,
    trend,
)
from .verify import (
    TheoremReport,
    classical_edgeworth_check,
    clt_sup_error,
    mean_expansion_value,
    mode_check,
    occupation_check,
    saddle_sup_error,
    width_check,
)

__version__ = "0.1.0"
