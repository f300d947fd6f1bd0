"""Split-step Fourier fibre channel simulator and capacity-bound toolkit."""

from .bounds import (
    BoundConstants,
    a_coeff,
    alpha_coefficient,
    asymptote_L2,
    asymptote_L3,
    awgn_upper,
    c1,
    c2,
    g_const,
    low_power_approx,
    lower_bound_L2,
    lower_bound_L3,
    m_k,
    zeta,
)
from .channel import (
    NoiseSource,
    add_noise,
    dispersion_profile,
    linear_step,
    nonlinear_step,
    propagate,
)
from .estimator import (
    Estimate,
    MonteCarloConfig,
    estimate_E,
    kappa_from_E,
    lower_bound_L1,
    sweep_L1,
)
from .results import SweepRow
from .units import (
    ChannelParams,
    PhysicalParams,
    build_channel,
    dbm_to_watts,
    k_validity_threshold,
    noise_power,
    reference_link,
    watts_to_dbm,
)

__version__ = "0.1.0"
