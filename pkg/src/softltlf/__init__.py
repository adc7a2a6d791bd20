"""Differentiable finite-trace temporal logic (LTLf) over batched trace tensors.

The package is organized as a plain library wrapped by an HTTP service:

- ``tensor``: flat row-major tensors and their index arithmetic.
- ``smoothing``: smooth max/min/Gaussian kernels and their derivatives.
- ``formula``: the constraint AST and the negation-elimination transform.
- ``surface``: formula grammar, parser/printer, and constant/measurement lowering.
- ``semantics``: boolean tensor semantics, memoized and call-counting variants.
- ``loss``: smooth loss and its analytic gradient.
- ``reference``: independent list-based semantics used as a test oracle.
- ``trajectory``: feature derivation, dynamical loss, gradient-descent lab.
- ``service``/``cli``: FastAPI wrapper and the thin command-line client.
"""

__version__ = "0.1.0"

from .errors import (
    BoundsError,
    DataError,
    DivergenceError,
    ParseError,
    ShapeError,
    SoftLtlfError,
)
from .formula import (
    And,
    Atom,
    Always,
    Constraint,
    Eventually,
    FeatureRef,
    Or,
    StrongNext,
    StrongRelease,
    WeakNext,
    WeakUntil,
    negate,
)
from .loss import LossConfig, LossResult, dloss, loss, loss_and_grad, loss_counted
from .semantics import EvalCounter, TraceBatch, evaluate, evaluate_counted
from .smoothing import Gamma, as_gamma, gaussian_gamma, max_gamma, min_gamma
from .surface import (
    TraceMeta,
    TrajectoryMeta,
    lower,
    narrow_gradient,
    parse,
    print_formula,
    widen_trace,
)
from .tensor import Tensor, backsubt, binop, capacity, flatten, lookup, replicate, subt, unflatten, unop
from .trajectory import (
    COUNT_LAW_LENGTHS,
    PRESETS,
    DynamicalSystem,
    ExperimentPreset,
    ExperimentResult,
    MixedLossSpec,
    OptimizeResult,
    Trajectory,
    TrajectoryGradient,
    count_law_calls,
    derive_features,
    dynamical_loss,
    optimize,
    random_trace,
    run_experiment,
    straight_line,
    write_artifacts,
)

__all__ = [
    "Always",
    "And",
    "Atom",
    "BoundsError",
    "COUNT_LAW_LENGTHS",
    "Constraint",
    "DataError",
    "DivergenceError",
    "DynamicalSystem",
    "EvalCounter",
    "Eventually",
    "ExperimentPreset",
    "ExperimentResult",
    "FeatureRef",
    "Gamma",
    "LossConfig",
    "LossResult",
    "MixedLossSpec",
    "OptimizeResult",
    "Or",
    "PRESETS",
    "ParseError",
    "ShapeError",
    "SoftLtlfError",
    "StrongNext",
    "StrongRelease",
    "Tensor",
    "TraceBatch",
    "TraceMeta",
    "Trajectory",
    "TrajectoryGradient",
    "TrajectoryMeta",
    "WeakNext",
    "WeakUntil",
    "as_gamma",
    "backsubt",
    "binop",
    "capacity",
    "count_law_calls",
    "derive_features",
    "dloss",
    "dynamical_loss",
    "evaluate",
    "evaluate_counted",
    "flatten",
    "gaussian_gamma",
    "lookup",
    "loss",
    "loss_and_grad",
    "loss_counted",
    "lower",
    "max_gamma",
    "min_gamma",
    "narrow_gradient",
    "negate",
    "optimize",
    "parse",
    "print_formula",
    "random_trace",
    "replicate",
    "run_experiment",
    "straight_line",
    "subt",
    "unflatten",
    "unop",
    "widen_trace",
    "write_artifacts",
]
