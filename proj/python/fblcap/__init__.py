"""Effective capacity of finite-blocklength transmission over parallel
Rayleigh sub-channels with pilot-based (MMSE) channel estimation."""

from ._core import (
    ConvergenceError,
    DomainError,
    EcValue,
    McEstimate,
    NumericalError,
    OptimResult,
    SystemParams,
    __version__,
    alternate_optimize,
    avg_received_snr,
    db_to_linear,
    delay_violation,
    ec_cap,
    ec_expint,
    ec_lower_bound,
    ec_monte_carlo,
    expint_v,
    gamma_dalpha,
    gamma_surrogate,
    inner_t,
    optimal_alpha,
    optimal_eps,
    q_func,
    q_inv,
    sweep_csv,
)

__all__ = [
    "ConvergenceError",
    "DomainError",
    "EcValue",
    "McEstimate",
    "NumericalError",
    "OptimResult",
    "SystemParams",
    "__version__",
    "alternate_optimize",
    "avg_received_snr",
    "db_to_linear",
    "delay_violation",
    "ec_cap",
    "ec_expint",
    "ec_lower_bound",
    "ec_monte_carlo",
    "expint_v",
    "gamma_dalpha",
    "gamma_surrogate",
    "inner_t",
    "optimal_alpha",
    "optimal_eps",
    "q_func",
    "q_inv",
    "sweep_csv",
]
