"""Crosspoint resistive-memory circuit simulator for one-step least-squares
learning, with an analytical pseudoinverse oracle for verification."""

from .circuit import (
    AmplifierModel,
    CrosspointCircuit,
    TransientResult,
    expand_with_wires,
    open_loop_mvm,
    predict,
    stability_spectrum,
    steady_state,
    transient,
)
from .device import (
    ConductanceLevelSet,
    DeviceInstance,
    perturb,
    program_verify_pair,
    quantize,
)
from .learn import (
    CircuitBackend,
    ClassLabels,
    RegressionProblem,
    TwoLayerConfig,
    TwoLayerModel,
    binarize_labels,
    classify_point,
    evaluate_prediction,
    fit_linear,
    fit_logistic,
    infer_two_layer,
    train_two_layer,
)
from .mapping import (
    MappedProblem,
    ScalingPolicy,
    build_design_matrix,
    make_policy,
    map_to_conductance,
    translate_nonnegative,
    unscale_weights,
    weights_in_original_coords,
)
from .numerics import (
    Spectrum,
    eigenvalues,
    integrate_linear_ode,
    pseudoinverse_solve,
    residual_and_lse,
)

__version__ = "0.1.0"
