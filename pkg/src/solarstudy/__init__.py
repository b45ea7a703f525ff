"""Per-month ARIMA forecasting, correlation and regression of global solar
irradiance against terrestrial parameters, plus the PV efficiency formula."""

from ._backend import BACKEND
from .arma import (ArmaModel, ForecastSeries, OrderSelectionReport, aicc, forecast,
                   gaussian_loglik, hannan_rissanen, refine_mle, select_order, simulate)
from .errors import StudyError
from .pipeline import StudyReport, emit_report, replay_from_tables, run_study
from .pv import efficiency, efficiency_series
from .stats import CorrelationResult, RegressionFit, ols, pearson, t_two_sided_p
from .timeseries import (DailySeries, DifferencedSeries, MonthlyMeans, MonthSlice,
                         ParameterKind, Station, difference, monthly_mean,
                         partition_by_month, split_train_test, undifference)

__version__ = "0.1.0"
