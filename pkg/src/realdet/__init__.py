"""Real determinant lines of cylinders and the central-extension cocycle."""
from ._kernels import backend
from .anomaly_field import ConformalFactor, CylinderGrid, liouville_action, pairing
from .deformation_cocycle import CocycleResult, gamma_lie, gelfand_fuks, log_gamma
from .deformations import CircleMap, VectorField, compose, flow, identity, inverse, translation
from .detline_cylinder import Charge, DetVector, gamma_cyl, mu_c, sew
from .errors import NumericalError, PreconditionError, RealdetError
from .uniformize import DeformedCylinder, uniformize
from .zeta_pa import detz_flat_cylinder, pa_anomaly

__version__ = "0.1.0"

__all__ = [
    "backend", "ConformalFactor", "CylinderGrid", "liouville_action", "pairing",
    "CocycleResult", "gamma_lie", "gelfand_fuks", "log_gamma",
    "CircleMap", "VectorField", "compose", "flow", "identity", "inverse", "translation",
    "Charge", "DetVector", "gamma_cyl", "mu_c", "sew",
    "NumericalError", "PreconditionError", "RealdetError",
    "DeformedCylinder", "uniformize", "detz_flat_cylinder", "pa_anomaly",
]
