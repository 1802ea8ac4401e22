"""Careless coupon collector: one uniform coupon gained per round, every held
coupon lost independently with probability ``p``.

Exact expected completion times (O(n^2) banded solve), marginal dynamics,
log-space bounds and seeded Monte Carlo.
"""
__version__ = "0.1.0"

from ._backend import BACKEND
from .bounds import (LogValue, escape_rate, hitting_regime, mean_field_interval,
                     metastability_deviation_bound, unconditional_lower_bound,
                     unconditional_upper_bound)
from .chain import (FullState, Params, build_reduced_system, build_transition_row,
                    step_full, step_reduced)
from .errors import DomainError, NonAbsorbingError
from .hitting import (HittingSolution, dense_oracle_solve, expected_hitting_time,
                      solve_hitting_times)
from .marginal import (classify_qstar_regime, marginal_coeffs, marginal_mixing_time, q_at,
                       q_star)
from .simulate import (batch_hitting_stats, estimate_marginal, simulate_coupled,
                       simulate_hitting_time, simulate_trajectory)

__all__ = [
    "BACKEND", "DomainError", "FullState", "HittingSolution", "LogValue",
    "NonAbsorbingError", "Params", "batch_hitting_stats", "build_reduced_system",
    "build_transition_row", "classify_qstar_regime", "dense_oracle_solve", "escape_rate",
    "estimate_marginal", "expected_hitting_time", "hitting_regime", "marginal_coeffs",
    "marginal_mixing_time", "mean_field_interval", "metastability_deviation_bound", "q_at",
    "q_star", "simulate_coupled", "simulate_hitting_time", "simulate_trajectory",
    "solve_hitting_times", "step_full", "step_reduced", "unconditional_lower_bound",
    "unconditional_upper_bound",
]
