"""Local Whittle estimation of the memory parameter of fractionally
integrated time series."""

from .bandwidth import BandwidthRule, BootstrapMseCurve, bootstrap_select, resolve, scan
from .diagnostics import BreakModel, QuResult, detect_mean_breaks, qu_test, subsample_estimates
from .errors import DataError, DegenerateSeriesError, NonFiniteObjectiveError, SpecError
from .estimators import (EstimateResult, EstimatorSpec, ObjectiveProfile, elw_objective, estimate,
                         lw_objective, profile, standard_error, two_step_elw)
from .fracdiff import fracdiff, fracdiff_fast, fracdiff_naive, fracint
from .mc import MCConfig, MCSummary, run as run_mc, table as mc_table
from .series import TimeSeries, load_csv, transform
from .simulate import SimSpec, arfima
from .spectrum import periodogram, taper_weights

__version__ = "0.1.0"
