"""Differentially private release of aggregate count time-series.

Sensitivity is reduced by Poisson subsampling of time steps, optionally
after a circular low-pass filter; Gaussian noise is calibrated to the
reduced sensitivity and the noisy samples are interpolated back to full
length.
"""

from ._backend import BACKEND
from .accounting import (
    PrivacyGuarantee,
    budget_solve,
    compose_filtered,
    compose_unfiltered,
    degrade,
)
from .core import CountSeries, ParticipationLimit, Signal, decimate, validate_series
from .dataio import SynthConfig, generate_synth, ingest_checkins, ingest_series
from .filters import FilterKernel, FilterStats, apply_filter, filter_stats, gaussian_kernel, identity_kernel
from .harness import mae, run_experiment, sweep_alpha, sweep_frequency
from .mechanisms import MechanismConfig, release, release_with_redraw
from .sensitivity import (
    SensitivityBound,
    binomial_tail_delta,
    chernoff_delta,
    hoeffding_I_prime,
    solve_alpha,
    solve_I_prime,
)

__version__ = "0.1.0"
