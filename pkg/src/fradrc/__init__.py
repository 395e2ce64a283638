"""fradrc: fractional-order active disturbance rejection control toolkit.

Design, simulate, and analyze disturbance-rejection loops built on
integer- and fractional-order extended state observers, with the
frequency-domain and commensurate-order stability machinery to go with
them.  See the ``fradrc`` command line for the scenario runner.
"""

from .adrc import (
    AdrcOrders,
    EsoConfig,
    LoopDesign,
    ObserverRealization,
    OrderConstraintError,
    PdConfig,
    SimResult,
    TrackingConfig,
    build_observer,
    closed_loop_simulate,
    control_law,
    derive_orders,
    eso_gains,
    eso_transfer,
    io_control_law,
    loop_blocks,
    observer_step,
    open_loop_tf,
    tracking_gains,
    wbitf_approx,
)
from .analysis import (
    FreqGrid,
    Margins,
    StepMetrics,
    bode_data,
    margins,
    mse_delta,
    overshoot_fluctuation,
    step_metrics,
)
from .discretize import DigitalFilter, FilterStateError, FitError, gl_fir, iir_fit
from .fracnum import (
    FracPoly,
    FracRational,
    GlCoeffs,
    commensurate,
    fp_add,
    fp_mul,
    fr_feedback,
    fr_mul,
    freq_response,
    gl_coefficients,
    rationalize,
)
from .plant import DisturbanceProfile, PlantModel, plant_discretize, simulate_plant
from .stability import (
    CommensuratePoly,
    StabilityReport,
    char_poly_closed,
    char_poly_eso,
    find_omega0,
    kharitonov_boundaries,
    routh_table,
    sector_check,
)

__version__ = "0.1.0"
