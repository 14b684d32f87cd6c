"""Solvers and convergence audits for variational inclusions 0 in A(u) + M(u)."""

from ._core import (
    CannotCompare,
    ConstantsError,
    HmviError,
    InputError,
    OperatorConstants,
    Problem,
    ResolventDivergence,
    Trace,
    UnsupportedOperator,
    audit_pair,
    boundary_sharpness,
    cli,
    contraction_factor,
    envelope_fh,
    envelope_new,
    feasible_lambda,
    gen_scalar_affine,
    gen_soft_threshold,
    gen_soft_threshold_from,
    gen_spd_linear,
    rate_compare,
    resolvent_lipschitz_bound,
    run,
)

__all__ = [
    "CannotCompare",
    "ConstantsError",
    "HmviError",
    "InputError",
    "OperatorConstants",
    "Problem",
    "ResolventDivergence",
    "Trace",
    "UnsupportedOperator",
    "audit_pair",
    "boundary_sharpness",
    "cli",
    "contraction_factor",
    "envelope_fh",
    "envelope_new",
    "feasible_lambda",
    "gen_scalar_affine",
    "gen_soft_threshold",
    "gen_soft_threshold_from",
    "gen_spd_linear",
    "rate_compare",
    "resolvent_lipschitz_bound",
    "run",
]
