"""Sequential Gaussian position measurements on a free particle and the
Hausdorff dimension of the resulting quantum paths."""

__version__ = "0.1.0"

from .gaussian_state import (  # noqa: E402
    Constants,
    GaussianState,
    MeterConfig,
    NumericRangeError,
    collapse_update,
    expectation_abs_x,
    free_evolve,
    outcome_pdf,
    sample_outcome,
)
from .nonselective import (  # noqa: E402
    NO_MEASUREMENT,
    ContinuousLimit,
    abs_x_of_t,
    analytic_path_length,
    delta_of_t,
    mean_position,
)
from .selective import (  # noqa: E402
    ConfigurationError,
    FeedbackConfig,
    TrajectoryRecord,
    damped_oscillator_reference,
    simulate_ensemble,
    step,
)
from .dimension import (  # noqa: E402
    DimensionFit,
    ResolutionSchedule,
    fit_dimension,
    hausdorff_length,
    path_length_sampled,
)
