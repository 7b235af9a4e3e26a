"""Generalized Yosida approximation toolkit."""

from ._yosida import (
    Graph,
    InvalidArgument,
    Operator,
    SolverError,
    c_star,
    duality,
    extinction,
    extinction_floor,
    range_solve,
    resolvent,
    simulate,
    sweep,
    verify,
    yosida,
)

__all__ = [
    "Graph",
    "InvalidArgument",
    "Operator",
    "SolverError",
    "c_star",
    "duality",
    "extinction",
    "extinction_floor",
    "range_solve",
    "resolvent",
    "simulate",
    "sweep",
    "verify",
    "yosida",
]
