"""Sharp bounds on the expected product of random variables with fixed marginals."""

from .bounds import (
    BoundResult,
    FeasibilityReport,
    SharpBounds,
    feasibility,
    sharp_bounds,
    universal_bound,
)
from .coupling import (
    CouplingSpec,
    InfeasibleSpec,
    SampleBatch,
    SupportCurve,
    analytic_mixing_fixtures,
    mixing_function,
    recursive_coupling,
    sample,
    sign_selector,
    support_curves,
    trivariate_copula,
)
from .marginal import (
    LinearDensity,
    Marginal,
    MarginalError,
    Negated,
    Normal,
    ShiftedExponential,
    Tabulated,
    Uniform,
    marginal_from_json,
)
from .parity import (
    InfeasibleError,
    MembershipResult,
    SignPattern,
    WeightProfile,
    d3_weights,
    diagonal_feasible,
    enumerate_patterns,
    membership,
    recursive_split,
    weights_lp,
)
from .verify import (
    DiscreteProblem,
    McEstimate,
    discrete_oracle,
    ks_statistic,
    mc_expected_product,
)

__version__ = "0.1.0"
