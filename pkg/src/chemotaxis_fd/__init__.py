"""Finite-difference lab for the Cole-Hopf transformed chemotaxis system
with logistic growth on the unit interval."""

from .dynamics import (
    InstabilityError,
    ModelParams,
    State,
    StepControl,
    apply_bc,
    default_mesh,
    integrate,
    rhs,
    stable_dt,
    step_euler,
)
from .grid import Grid1D, d1, d2, h1_sq, l2_sq, linf, make_grid

__all__ = [
    "Grid1D", "InstabilityError", "ModelParams", "State", "StepControl",
    "apply_bc", "d1", "d2", "default_mesh", "h1_sq", "integrate", "l2_sq",
    "linf", "make_grid", "rhs", "stable_dt", "step_euler",
]
__version__ = "0.1.0"
