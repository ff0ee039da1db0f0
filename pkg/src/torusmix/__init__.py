"""Exact numerics for IID random compositions of affine toral maps."""

__version__ = "0.1.0"

from .correlations import (
    CorrelationSeries,
    StepLaw,
    annealed_correlation_exact,
    annealed_correlation_mc,
    annealed_two_point,
    basis_correlation_scan,
    commuting_annealed_correlation,
    quenched_correlation,
    walk_distribution,
)
from .dynamics import (
    CAT_MAP,
    AffineToralMap,
    RandomSystem,
    Word,
    apply_map,
    compose,
    diagonal_lift,
    sample_word,
    shift_word,
    word_composition,
)
from .errors import BudgetExceeded, InvariantViolation, NoDecayError, TruncationError
from .limits import (
    asymptotic_variance,
    birkhoff_polynomial,
    characteristic_function,
    local_time_profile,
    quenched_variance,
    variance_split,
)
from .observables import (
    NetBoundQuery,
    TrigPolynomial,
    difference_lift,
    epsilon_net_log_bound,
    pairing,
    pullback,
    smooth_split,
    sobolev_norm,
    spectral_partial_sum,
    tensor,
    weyl_count,
)
from .rates import classify_decay, fit_decay, tail_exponent
