"""Quantum-clock time observable on a discretized momentum grid.

The library realizes the measured-time observable of a free particle
(H = p^2/2, T = (2p)^-1 q + q (2p)^-1) as a positive-operator-valued
measure and verifies its identities numerically: covariance under free
evolution, strict positivity on intervals, non-projectivity, moment
equalities between the operator and the distribution, and the
time-energy uncertainty relation.
"""

from .clock import (
    AmplitudeTransform,
    Interval,
    OperatorMatrix,
    TimeAmplitudes,
    TimeDistribution,
    TimeGrid,
    amplitudes,
    eigenfunction,
    interval_probability,
    make_time_grid,
    mean_and_variance,
    povm_element,
    time_distribution,
)
from .errors import (
    ChronosError,
    DomainError,
    GridMismatchError,
    NumericalConsistencyError,
    ParameterError,
    TruncationError,
    UnboundedIntervalError,
)
from .hilbert import (
    GaussianStateSpec,
    MomentumGrid,
    WaveFunction,
    evolve,
    gaussian_state,
    inner,
    make_grid,
)
from .operators import (
    ClockOperators,
    build_operators,
    commutator_residual,
    energy_moments,
    expectation,
    sigma,
    time_moments,
    uncertainty_product,
)
from .verify import (
    CheckResult,
    VerificationReport,
    check_covariance,
    check_gram_kernel,
    check_moments,
    check_non_projectivity,
    check_positivity,
    check_resolution_of_identity,
    covariance_scan,
    random_admissible_specs,
    run_verification,
)

__version__ = "0.1.0"
