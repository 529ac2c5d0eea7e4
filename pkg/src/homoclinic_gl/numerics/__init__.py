from .linalg import (
    SVDResult,
    SingularMatrixError,
    lu_factor,
    lu_solve,
    orthonormalize,
    principal_angle_sines,
    solve_small,
    svd_small,
)
from .newton import NewtonResult, SingularJacobianError, newton_solve
from .ode import DenseTrajectory, IntegratorConfig, StepSizeUnderflow, integrate_ode
from .quadrature import QuadratureError, QuadratureResult, integrate_interval, integrate_line

__all__ = [
    "DenseTrajectory",
    "IntegratorConfig",
    "NewtonResult",
    "QuadratureError",
    "QuadratureResult",
    "SVDResult",
    "SingularJacobianError",
    "SingularMatrixError",
    "StepSizeUnderflow",
    "integrate_interval",
    "integrate_line",
    "integrate_ode",
    "lu_factor",
    "lu_solve",
    "newton_solve",
    "orthonormalize",
    "principal_angle_sines",
    "solve_small",
    "svd_small",
]
