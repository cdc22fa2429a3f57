"""Bernstein functions, Bernstein generators and their Loewner-Kufarev flows.

The hot kernels (measure quadrature sums and the atomic-measure flow
integrator) come from a compiled extension when it is available;
``bernloewner.BACKEND`` reports which implementation was loaded.
"""
from ._backend import BACKEND
from .bernstein import (
    BernsteinRepr,
    BoundaryData,
    boundary_data,
    compose_eval,
    deriv,
    evaluate,
    is_bernstein_numeric,
    julia_check,
    rigidity_gap,
)
from .branching import (
    MechanismSpec,
    conditional_mean,
    conditional_variance,
    field_from_mechanisms,
    laplace_exponent,
    transition_laplace,
)
from .errors import (
    BernLoewnerError,
    DomainError,
    IntegrabilityError,
    NoBRFPError,
    NonConvergenceError,
    ParseError,
    QuadratureError,
    SingularPathError,
)
from .evolution import (
    HerglotzField,
    brfp0_derivative,
    brfp0_second_derivative,
    chain_rule_check,
    ef2_residual,
    evolve,
    finite_difference_brfp0,
    inverse_evolve,
    ref2_residual,
    reverse_evolve,
)
from .flow import FlowResult, abel_residual, euler_flow, flow, koenigs, semigroup_residual, trotter_flow
from .generator import (
    DWPoint,
    GeneratorClassification,
    GeneratorRepr,
    LeGallRepr,
    SubordinatorGenRepr,
    berkson_porta_P,
    check_generator_numeric,
    classify,
    cone_add,
    cone_scale,
    eval_gen,
    from_bernstein,
    to_legall,
    to_subordinator_form,
)
from .measure import (
    DensityPanel,
    Divergent,
    IntegrabilityClass,
    JumpMeasure,
    Kernel,
    check_class,
    exponential,
    integrate_kernel,
    moment,
    power_law,
    tabulated,
)
from .numerics import (
    DomainExit,
    ODEConfig,
    QuadratureConfig,
    adaptive_ode_step,
    alternating_differences,
    cayley,
    cayley_inv,
    hyperbolic_distance,
)

__version__ = "0.1.0"
