"""Optimal population schedules for a finite-horizon OLG economy.

A library and CLI that transcribes the free-horizon planning problem of an
overlapping-generations economy with depletable stock energy into smooth
NLPs, solves them for utilitarian and maximin welfare objectives with an
augmented-Lagrangian method, sweeps the planning horizon for the grand
optimum, and post-processes schedules into equity and frontier analytics.
"""

from ._kernels import BACKEND
from .model import (GenerationState, KGridSpec, ScenarioParams, Trajectory,
                    capital_residual, find_min_utility_fertility,
                    forward_simulate, lifetime_utility, productivity_growth,
                    rate_of_return, savings_rule, solve_k_next, state_update,
                    steady_state_n, steady_state_utility, terminal_savings,
                    trajectory_from_schedule, wage)
from .transcription import (InitialGuess, NlpProblem, Objective,
                            build_problem, initial_guess)
from .solver import (Multipliers, SolveOptions, SolveReport, SolveStatus,
                     kkt_residuals, multistart, solve, solve_from)

__version__ = "0.1.0"
