"""Discretization of linear time-invariant stochastic systems.

Matrices are NumPy arrays; ``discretize(A, S, t)`` returns a ``Report``
with ``F``, ``Q``, ``method`` and a ``diagnostics`` dict.
"""

from ._core import (
    BenchRecord,
    Report,
    StochdiscError,
    SummaryRow,
    constant_velocity,
    default_t_grid,
    discretize,
    gen_random_system,
    is_exact,
    lemma2_residual,
    mat_exp,
    methods,
    q_oracle,
    records_csv,
    run_benchmark,
    semigroup_residual,
    summarize,
    summary_csv,
)

__all__ = [
    "BenchRecord",
    "Report",
    "StochdiscError",
    "SummaryRow",
    "constant_velocity",
    "default_t_grid",
    "discretize",
    "gen_random_system",
    "is_exact",
    "lemma2_residual",
    "mat_exp",
    "methods",
    "q_oracle",
    "records_csv",
    "run_benchmark",
    "semigroup_residual",
    "summarize",
    "summary_csv",
]
