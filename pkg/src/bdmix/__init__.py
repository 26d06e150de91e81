"""Spectral gaps, hitting-time bounds and exact mixing times for birth-and-death chains."""
from .core import (BDChain, StationaryDist, from_rates, lazy, median, quantile_state,
                   stationary, two_state, validate)
from .cutoff import FamilyScan, cutoff_criterion, family_scan, product_criterion
from .distance import (TVProfile, mix_lower_bound, mix_upper_bound, mixing_time, mixing_times,
                       passage_survival, passage_survival_direct, tv_profile_continuous,
                       tv_profile_discrete, tv_profile_lazy)
from .errors import *  # noqa: F401,F403
from .families import FamilySpec, build
from .hitting import (BoundsReport, bounds_report, ell_constant, hardy_B, hardy_C, sym_C,
                      t_constant, t_constant_at)
from .spectral import SpectrumReport, eigenvalues, s_constant, spectral_gap

__version__ = "0.1.0"
