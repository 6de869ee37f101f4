"""Numerical verification of sharp remainder identities for Steklov- and
Friedrichs-type inequalities of sum-of-squares vector field operators."""

__version__ = "0.1.0"

from .grid import (
    GridDomain,
    GridFunction,
    build_box_domain,
    build_masked_domain,
    integrate,
)
from .fields import (
    VectorFieldFamily,
    VectorGridFunction,
    apply_field,
    apply_gradient,
    apply_sublaplacian,
    apply_L_power,
    divergence,
    euclidean,
    heisenberg,
    FDOperators,
)
from .spectral import SpectralOperators, make_operators
from .eigensolve import (
    EigenPair,
    analytic_box_ground_state,
    assemble_operator,
    eigenpair_from_values,
    ground_state,
    rayleigh_quotient,
)
from .steklov import (
    IdentityReport,
    RemainderReport,
    base_identity,
    even_identity,
    odd_identity,
    integrated_remainder,
    steklov_constant_check,
)
from .friedrichs import (
    FriedrichsParams,
    friedrichs_identity,
    friedrichs_remainder,
    sigma,
    sigma_asymptotics,
)
