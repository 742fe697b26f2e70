"""Periodic-grid laboratory for the potential equation
``u_t = sum_i arctan(lambda_i(D^2 u))``: stencils, stepper, heat-kernel
mollifier, Lagrangian rotations and invariant monitors."""

from .flow import FlowAbort, FlowState, StepperConfig, evolve, gmcf_evolve
from .grid import Grid, ScalarField, VectorField, hessian, read_snapshot, write_snapshot
from .mollify import make_kernel, mollify
from .rotate import RotationError, rotate_field

__version__ = "0.1.0"

__all__ = [
    "FlowAbort",
    "FlowState",
    "Grid",
    "RotationError",
    "ScalarField",
    "StepperConfig",
    "VectorField",
    "evolve",
    "gmcf_evolve",
    "hessian",
    "make_kernel",
    "mollify",
    "read_snapshot",
    "rotate_field",
    "write_snapshot",
]
