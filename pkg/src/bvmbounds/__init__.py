"""Non-asymptotic normal approximation bounds for exponential-family posteriors."""

from .bounds import (BoundConfig, BoundReport, Bounds, PolySpec, UpsilonKernel, Variant, bound_mle,
                     bound_mode_smooth, bound_mode_tv_corollary, bound_mode_tv_local, bound_mode_tv_wass,
                     bound_mode_univariate, delta_tilde, stein_residual, upsilon, wass_lower_bound)
from .distances import DistanceEstimate, kolmogorov_1d, posterior_oracles, tv_quadrature, wass_1d, wass_empirical
from .examples import PRESETS, ExampleSpec, preset
from .expfam import builtin_models, summarize
from .solvers import PosteriorContext, check_assumptions, find_mle, find_mode

__version__ = "0.1.0"

__all__ = [
    "BoundConfig", "BoundReport", "Bounds", "PolySpec", "UpsilonKernel", "Variant", "bound_mle",
    "bound_mode_smooth", "bound_mode_tv_corollary", "bound_mode_tv_local", "bound_mode_tv_wass",
    "bound_mode_univariate", "delta_tilde", "stein_residual", "upsilon", "wass_lower_bound",
    "DistanceEstimate", "kolmogorov_1d", "posterior_oracles", "tv_quadrature", "wass_1d", "wass_empirical",
    "PRESETS", "ExampleSpec", "preset", "builtin_models", "summarize",
    "PosteriorContext", "check_assumptions", "find_mle", "find_mode",
]
