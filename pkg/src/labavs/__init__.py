"""Local polynomial regression with pointwise variable selection and
adaptive asymmetric bandwidths.

The estimator classifies each region of predictor space by which variables
matter there, widens the smoothing window along the ones that do not (all
the way to infinity when nothing blocks the way), tightens it along the
ones that do, and refits locally with the adjusted geometry.
"""

from .data import (
    SimSpec,
    huberised,
    load_csv,
    quadrant_truth,
    save_csv,
    scale_unit_variance,
    simulate,
    true_relevant_set,
)
from .errors import (
    ConfigurationError,
    ConvergenceError,
    DegenerateGridError,
    DegenerateNeighborhoodError,
    DimensionMismatchError,
    EvaluationError,
    LabavsError,
    NumericalError,
    ParseError,
)
from .kernel import Bandwidth, kernel_constants, kernel_weight, kernel_weights, tricube
from .localreg import (
    Dataset,
    LocalFit,
    StandardizedNeighborhood,
    fit_local_constant,
    fit_local_linear,
    local_linear_predict,
    nn_bandwidth,
    standardize,
)
from .pipeline import (
    DEFAULT_LAMBDA,
    DEFAULT_NN_FRAC,
    FULL,
    GLOBAL,
    LOCAL,
    REDUCED,
    BandwidthSpec,
    Grid,
    LabavsModel,
    SignificanceGrid,
    build_grid,
    dataset_digest,
    expand_rectangle,
    fit,
    load_model,
    predict,
    relevant_set_label,
    save_model,
    shrink_halfwidth,
    variance_factor,
)
from .selection import (
    HARD_THRESHOLD,
    LOCAL_LASSO,
    METHODS,
    STEPWISE,
    SelectionConfig,
    SelectionResult,
    select_at,
    select_hard_threshold,
    select_local_lasso,
    select_stepwise,
)
from .tuning import CvProtocol, CvReport, loocv_error, loocv_predictions, select_lambda, test_error

__version__ = "0.1.0"
