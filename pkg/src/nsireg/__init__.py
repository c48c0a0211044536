"""Joint estimation of sparse and non-sparse coefficient blocks in linear models."""

__version__ = "0.1.0"

from .core import (CoefficientEstimate, Dataset, InputError, MetricsReport,  # noqa: E402
                   NotPositiveDefiniteError, NumericalError, TrueModel, UndefinedMetricError,
                   evaluate, fpr, l1_error, l2_error, mse, nz, tpr)
from .nsi import FitResult, NsiConfig, nsi_fit, nsi_init, oracle_fit, plugin_fit  # noqa: E402
from .precision import (PrecisionEstimate, estimate_precision, glasso_lambda_rule,  # noqa: E402
                        graphical_lasso, identity_precision, known_precision,
                        ridge_inverse_precision)
from .simulate import (SimulationConfig, gen_instance, make_tridiagonal_precision,  # noqa: E402
                       sparsity_split)
from .sparse_solver import LassoConfig, kkt_violation, lasso_cd, soft_threshold  # noqa: E402
from .tuning import CvResult, cv_lambda, default_grid, kfold_split  # noqa: E402
