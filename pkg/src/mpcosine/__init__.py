"""Moments-preserving cosine families and heat semigroups on [0,1].

The library constructs the unique extension of a continuous function on
[0,1] that makes the D'Alembert evolution preserve the total mass and the
first moment, evolves functions by the resulting cosine family and the
associated heat semigroup (Weierstrass formula), and provides the spectral
machinery (finite-difference generator, resolvent, matrix-exponential
oracle) used to verify conservation, parity structure, and exponential
convergence to the rank-2 equilibrium projection.
"""

from .errors import (
    ConvergenceError,
    EvaluationDomainError,
    GridFormatError,
    InvariantError,
    MpcosineError,
    NearSingularError,
    NonFiniteValueError,
    ParseError,
    RangeError,
)
from .grid import (
    GridFunction,
    MomentReport,
    moment,
    moment_about,
    read_csv,
    sample,
    split_even_odd,
    write_csv,
)
from .volterra import (
    FixedPointInfo,
    bielecki_norm,
    cumulative_exp_integral,
    solve_closed_form,
    solve_fixed_point,
)
from .extension import (
    ExtendedFunction,
    RobinExtension,
    SmoothnessReport,
    eval_extension,
    integral_extension,
    robin_extension,
    smoothness_check,
)
from .evolution import (
    EvolutionMethod,
    EvolutionResult,
    BoundaryCheckResult,
    bc_checker,
    cosine_apply,
    cosine_equation_check,
    odd_isomorphism,
    odd_isomorphism_inverse,
    projection_P,
    semigroup_apply,
)
from .spectral import (
    ResolventSolution,
    SpectralModel,
    boundary_mode_equation,
    build_model,
    expm_oracle,
    reference_eigenvalues,
    resolve,
    spectral_gap,
)
from .expressions import FunctionExpr, parse_expr
from .verify import VerifyConfig, VerifyReport, run_verify

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
