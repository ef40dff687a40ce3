"""Significance testing along the lasso path with the covariance statistic."""

__version__ = "0.1.0"

from .covariance_test import (ChiSq1, CovTestResult, ExpScale, FTwo, estimate_sigma_full,
                              p_value, scaling_factor, sign_condition_holds,
                              statistic_definition, statistic_knot_form, test_sequence)
from .design import (ActiveSet, DesignMatrix, UpdatableQR, center, project_residual,
                     pinv_transpose_apply, rank_guard, read_csv, standardize)
from .elastic_net import ElasticNetProblem, augment, enet_test_sequence
from .exceptions import (CovTestError, DegeneracyError, InputError, NumericalError,
                         OutOfRangeError, SignConditionError, SingularityError)
from .lasso_path import (KKTReport, LassoPath, PathEvent, compute_path, kkt_report,
                         reduced_solution, solution_at)
from .simulation import (NullSummary, SimulationConfig, forward_stepwise, gen_design,
                         gen_response, null_table, order_statistic_gaps, power_curve,
                         qq_data, step_statistics, strong_signal)
