"""Sparse index-1 DAE and stiff ODE solver."""

from ._core import (
    Error,
    ErrorDenominator,
    Expr,
    InvalidOptions,
    InvalidSystem,
    Method,
    NormReduction,
    OrderStudy,
    ParseError,
    Problem,
    SolverOptions,
    Status,
    Trajectory,
    UnknownObservable,
    extrapolated_order,
    integrate,
    load_problem,
    make_problem,
    method_order,
    order_study,
    parse_expression,
    parse_method,
    parse_problem,
    sparsity,
)

__version__ = "0.1.0"


def solve(problem, **options):
    """Integrate a Problem (or built-in id) with SolverOptions fields given as keywords."""
    if isinstance(problem, str):
        problem = make_problem(problem)
    opt = SolverOptions()
    for key, value in options.items():
        if key == "method" and isinstance(value, str):
            value = parse_method(value)
        if not hasattr(opt, key):
            raise TypeError(f"unknown solver option {key!r}")
        setattr(opt, key, value)
    return integrate(problem, opt)
