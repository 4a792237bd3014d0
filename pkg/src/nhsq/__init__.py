"""Non-homogeneous square functions.

Constructive objects from one family of counterexamples in non-doubling
harmonic analysis: a Cantor-type measure whose conical square function is
L2-bounded at aperture 1 but divergent at any wider aperture, a log-product
function whose vertical square function escapes every L^p for p > 2, random
shifted dyadic grids with stopping-time machinery, and a reproducible
experiment harness over all of it.
"""

from .dyadic import (
    Cube,
    GoodnessParams,
    ShiftedGrid,
    StoppingForest,
    build_stopping,
    carleson_packing,
    classify_good,
    estimate_pi_good,
    make_grid,
    martingale_decompose,
)
from .errors import NhsqError
from .kernels import (
    CantorKernel,
    LogProductKernel,
    StepKernel,
    TildeKernel,
    cantor_kernel,
    check_holder_condition,
    check_size_condition,
    eval_theta,
    logproduct_kernel,
    tilde_transform,
)
from .logproduct import (
    LogProductFn,
    SpacedSetFamily,
    build_logproduct,
    carleson_log_bound,
    demo_carleson_quadrature,
    eval_f,
    log_moment,
    lp_divergence_witness,
    overlap,
)
from .measures import (
    CantorMeasure,
    CantorParams,
    LebesgueInterval,
    NodeGeometry,
    PointMasses,
    build_cantor,
    growth_constant,
    node_geometry,
    template_measure,
)
from .sqfn import (
    CantorSquareContext,
    ConeSpec,
    LeafFunction,
    NormSeries,
    QuadratureConfig,
    ci_profile,
    conical_norm_series,
    conical_value,
    direct_norm_series,
    l2_operator_ratio,
    testing_functional,
    validate_collapse,
    vertical_norm_series,
    vertical_value,
    weak11_functional,
)

__version__ = "0.1.0"
