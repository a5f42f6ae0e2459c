"""Partial-fraction approximations of matrix functions for parallel evaluation."""

__version__ = "0.1.0"

from .exceptions import (
    DuplicateShift,
    InvalidFunction,
    InvalidShift,
    LengthMismatch,
    NonUnitConstant,
    NumericalError,
    OutOfConvergenceRadius,
    ParfracError,
    SingularShift,
    SumRuleViolation,
    UnderDetermined,
    UnknownMethod,
    ValidationError,
    ZeroPivot,
)
from .series import COS, EXP, LOG_ONE_MINUS, SIN, CoeffSeries, Function, coefficient, phi, taylor_coeffs
from .methods import (
    CATALOG_NAMES,
    FRAC4_TEMPLATE,
    FRAC8_TEMPLATE,
    FractionMethod,
    MethodTemplate,
    build_hybrid,
    build_plain,
    catalog,
    from_card,
    optimize_alpha,
    solve_weights,
    taylor_expansion_of_method,
    to_card,
    to_residual_form,
)
from .baselines import RationalBaseline, pade4, pade4_phi1, pade10, resolve, taylor
from .errors import (
    BackwardSeries,
    Threshold,
    backward_series_exp,
    bound_table,
    forward_bound,
    theta,
    theta_info,
    theta_taylor,
)
from .dense import EvalOptions, eval_dense, evaluate_dense, solve_shifted
from .oracle import action_oracle, error_2norm, expm_oracle, phi1_oracle
from .action import (
    BandedMatrix,
    CostModel,
    FractionAction,
    PENTADIAGONAL,
    TRIDIAGONAL,
    SelectionPlan,
    TridiagMatrix,
    action_eval,
    banded_solve,
    cost_curve,
    expm_action,
    method_cost,
    select_method,
    substep_action,
    taylor_action,
    thomas_solve,
)
from .bench import BenchRecord, MatrixSpec, bench_action, bench_dense, make_matrix, random_unit_vector
