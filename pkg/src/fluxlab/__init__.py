"""Flux and action fluctuations of invariant planar point processes."""

__version__ = "0.1.0"

from .errors import FluxlabError, NumericalError, ValidationError
from .curves import (
    Curve,
    circle_curve,
    make_polyline,
    map_curve,
    nested_circles_curve,
    spiral_curve,
)
from .curve_analysis import AhlforsReport, nu_disk, signed_length, weak_ahlfors_estimate
from .models import (
    TwoPointModel,
    c_lambda,
    d_lambda,
    hk_identity_check,
    kernel_K,
    make_model,
    radial_moment,
    spectral_density,
)
from .sampler import (
    PointConfig,
    ginibre_disk_moments_exact,
    sample_ginibre,
    sample_poisson,
)
from .variance_predict import (
    QuadratureSpec,
    pv_action_cov_quadrature,
    predict_action_cov,
    predict_count_variance,
    predict_work_variance,
    work_variance_2d,
    work_variance_radial,
)
from .monte_carlo import (
    Estimate,
    SamplerSpec,
    action_along,
    count_in_region,
    estimate_statistic,
    shoelace_area,
)
from .counterexample import GrowthFit, growth_exponent, nested_variance_exact, nested_variance_report
