"""First-passage time densities for Lévy-subordinated Brownian motion."""

from .config import (
    GridConfig,
    IterConfig,
    RunConfig,
    config_from_json,
    config_to_json,
    dump_config,
    load_config,
    set_config,
)
from .errors import (
    AccuracyError,
    FptError,
    NumericalError,
    ResolutionError,
    UnsupportedModelError,
)
from .kernel import (
    QuadratureConfig,
    crossing_density,
    p1,
    p1_generic,
    p1_generic_real,
    p1_vg,
    p1_vg_plancherel,
    p1_vg_s0,
    survival_density,
    transition_density,
)
from .iteration import (
    DensitySeries,
    KernelTable,
    SpaceTimeGrid,
    build_kernel_table,
    contraction_estimate,
    iterate,
    l1_distance,
    write_marginals_csv,
)
from .models import (
    Exponential,
    LsbmSpec,
    NormalInverseGaussian,
    VarianceGamma,
    laplace_exponent,
    levy_density_x,
    lsbm_from_json,
    lsbm_to_json,
    x_char_exponent,
)
from .oracles import (
    FdConfig,
    FdResult,
    McConfig,
    McResult,
    fd_first_passage,
    mc_first_passage,
    transition_row,
)
from .specfun import Accuracy, bessel_k, expint_ei, gamma_fn

__version__ = "0.1.0"

__all__ = [
    "Accuracy",
    "AccuracyError",
    "DensitySeries",
    "Exponential",
    "FdConfig",
    "FdResult",
    "FptError",
    "GridConfig",
    "IterConfig",
    "KernelTable",
    "LsbmSpec",
    "McConfig",
    "McResult",
    "NormalInverseGaussian",
    "NumericalError",
    "QuadratureConfig",
    "ResolutionError",
    "RunConfig",
    "SpaceTimeGrid",
    "UnsupportedModelError",
    "VarianceGamma",
    "bessel_k",
    "build_kernel_table",
    "config_from_json",
    "config_to_json",
    "contraction_estimate",
    "crossing_density",
    "dump_config",
    "expint_ei",
    "fd_first_passage",
    "gamma_fn",
    "iterate",
    "l1_distance",
    "laplace_exponent",
    "levy_density_x",
    "load_config",
    "lsbm_from_json",
    "lsbm_to_json",
    "mc_first_passage",
    "p1",
    "p1_generic",
    "p1_generic_real",
    "p1_vg",
    "p1_vg_plancherel",
    "p1_vg_s0",
    "set_config",
    "survival_density",
    "transition_density",
    "transition_row",
    "write_marginals_csv",
    "x_char_exponent",
]
