"""exarray: exchangeable random arrays from subset-indexed latent hierarchies.

A library and CLI for generating exchangeable random arrays from
latent-variable representations, estimating event-hypergraph probabilities by
Monte Carlo, and empirically verifying the structural properties those
representations promise: exchangeability, dissociation factorization,
finite-sampling convergence, and compact-class inner approximation of
measurable sets.
"""

from .errors import (
    ArityError,
    CanonicalizationError,
    DomainError,
    ExarrayError,
    IncompleteAssignmentError,
    InjectivityError,
    SpaceMismatchError,
    SpecValidationError,
    UnsupportedError,
)
from .latent import LatentAssignment, SubsetKey, child_seed, latent, latent_family
from .measure import (
    EMPTY,
    FULL,
    REAL_LINE,
    UNIT_INTERVAL,
    ClosedInterval,
    Complement,
    Discrete,
    DiscretePmf,
    DiscreteSubset,
    EmpiricalSample,
    Intersection,
    OpenInterval,
    PiecewiseLinearCdf,
    RealLine,
    SetExpr,
    UniformOnUnitInterval,
    Union,
    UnitInterval,
    ValueSpace,
    compactness_check,
    contains,
    indicator,
    inner_approx,
    measure_of,
)
from .events import EventHypergraph, evaluate_event, relabel
from .representation import (
    RealizedArray,
    RhoSpec,
    ValidationReport,
    coin_mixture,
    constant_graphon,
    eval_rho,
    expression_rho,
    identity_latent,
    product_graphon,
    realize_array,
    step_graphon,
    validate_spec,
)
from .montecarlo import (
    ArraySource,
    ConvergenceReport,
    EstimateReport,
    RepresentationSource,
    SecondMomentReport,
    TestReport,
    conditional_on_injective,
    convergence_harness,
    dissociation_test,
    estimate_direct,
    estimate_empirical,
    estimate_on_array,
    exchangeability_test,
    injectivity_probability,
    injectivity_probability_exact,
    second_moment_diag,
)
from .definetti import (
    FrequencyHistogram,
    MixtureSpec,
    discretized_uniform,
    frequency_limit_histogram,
    mixture_moment,
    uniform_mixture_moment,
)
from .distill import BlockEstimate, estimate_block_rho, resample_and_compare

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
