"""Surface log-signatures valued in the free nilpotent crossed module of Lie algebras."""

from .crossed_module import (
    CrossedModuleContext,
    HElement,
    act,
    bch_h,
    build_context,
    derived_bracket,
    exp_action,
    feedback,
    kernel_basis,
)
from .free_lie import first_kind_coordinates, generate_lyndon, shape_counts
from .path_dev import PathContext, PLPath, magnus_ode_logsig, path_logsig, segment_logsig, signed_area
from .surface_dev import (
    LinearSurface,
    OmegaValue,
    Rect,
    SurfaceGrid,
    chen_assemble,
    omega_quadrature,
    stokes_check,
    young_lift,
)
from .tensor_algebra import TensorSeries, bch_t, exp_t, log_t

__version__ = "0.1.0"

__all__ = [
    "CrossedModuleContext",
    "HElement",
    "act",
    "bch_h",
    "build_context",
    "derived_bracket",
    "exp_action",
    "feedback",
    "kernel_basis",
    "first_kind_coordinates",
    "generate_lyndon",
    "shape_counts",
    "PathContext",
    "PLPath",
    "magnus_ode_logsig",
    "path_logsig",
    "segment_logsig",
    "signed_area",
    "LinearSurface",
    "OmegaValue",
    "Rect",
    "SurfaceGrid",
    "chen_assemble",
    "omega_quadrature",
    "stokes_check",
    "young_lift",
    "TensorSeries",
    "bch_t",
    "exp_t",
    "log_t",
]
