"""Monte-Carlo pricing of first-to-default basket swaps under a Gaussian copula."""
from .copula import gaussian_copula_2d, latent_to_default_times, sample_latent
from .creditmetrics import (
    FactorModel,
    implied_asset_correlation,
    joint_default_prob,
    threshold_from_prob,
    verify_copula_equivalence,
)
from .engine import SimulationConfig, convergence_report, run_simulation, simulate_paths, substream_normals
from .numerics import (
    CholeskyFactor,
    CorrelationMatrix,
    DomainError,
    NotPSDError,
    bivariate_normal_cdf,
    cholesky,
    std_normal_cdf,
    std_normal_inv,
)
from .pricing import (
    BasketSpec,
    DiscountCurve,
    PathOutcome,
    PathTable,
    PaymentSchedule,
    PricingReport,
    analytic_independent_spread,
    default_schedule,
    premium_leg_pv,
    protection_leg_pv,
    spread_estimator_paper,
    spread_estimator_standard,
)
from .survival import CreditName, default_cdf, invert_default_time, survival_prob

__version__ = "0.1.0"
