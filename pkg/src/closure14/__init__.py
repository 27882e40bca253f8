"""Series construction and verification for Galilean-invariant 14-field closures."""

from .closure import (Beta0Ansatz, ClosureTensors, antisym_profile, check_beta0, delta_flux,
                      flux_tensors)
from .galilean import build_X, galilean_residual, transform_multipliers, transform_state
from .kernels import BACKEND
from .recurrence import ThetaTable, close_table, reduce_p, verify_table
from .ring import ExpFamily, LambdaScalar, PolynomialFamily
from .series import MomentSeries, Multipliers, make_delta_term
from .solutions import (InvariantFunction, SolutionParams, build_DeltaH, build_H, build_H1,
                        build_Hstar0, build_ttHk)
from .symtensor import SymTensor, contract, outer, sym_delta, symmetrize
from .thermo import ThermoTable, verify_integration_constant
from .verify import verify_potential

__all__ = [
    "BACKEND", "Beta0Ansatz", "ClosureTensors", "ExpFamily", "InvariantFunction", "LambdaScalar",
    "MomentSeries", "Multipliers", "PolynomialFamily", "SolutionParams", "SymTensor", "ThermoTable",
    "ThetaTable", "antisym_profile", "build_DeltaH", "build_H", "build_H1", "build_Hstar0",
    "build_X", "build_ttHk", "check_beta0", "close_table", "contract", "delta_flux",
    "flux_tensors", "galilean_residual", "make_delta_term", "outer", "reduce_p", "sym_delta",
    "symmetrize", "transform_multipliers", "transform_state", "verify_integration_constant",
    "verify_potential", "verify_table",
]
__version__ = "0.1.0"
