"""Sequential search over planning horizons for the grand optimum.

Solves the fixed-horizon NLP for ascending T, warm-starting each horizon
from the previous optimal schedule (decision vector and multipliers), and
records every report.  The grand-optimal horizon T* maximizes the SWF over
the horizons that solved to optimality.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .solver import Multipliers, SolveOptions, SolveStatus, multistart, solve_from
from .transcription import Objective, build_problem, initial_guess


class SweepError(RuntimeError):
    """No horizon in the sweep solved to optimality."""

    def __init__(self, message, entries):
        super().__init__(message)
        self.entries = entries


@dataclass
class SweepResult:
    """Per-horizon reports plus the grand optimum over optimal entries."""

    objective: Objective
    entries: list  # ordered (T, SolveReport), strictly ascending in T
    T_star: int
    objective_at_star: float
    schedule: list = field(default_factory=list)  # (t_min, t_max, step) legs

    def report_at(self, T):
        for t, report in self.entries:
            if t == T:
                return report
        raise KeyError(f"no sweep entry at T={T}")

    @property
    def optimal_entries(self):
        return [(t, r) for t, r in self.entries if r.optimal]


def _pad_multipliers(prior: Multipliers, T_prior, T_new, maximin):
    """Stretch or trim per-horizon multiplier blocks onto a new horizon."""

    def pad_block(block, n_new):
        block = np.asarray(block, dtype=float)
        if len(block) >= n_new:
            return block[:n_new].copy()
        return np.concatenate([block, np.full(n_new - len(block), block[-1])])

    eq = np.concatenate([pad_block(prior.eq[:T_prior - 1], T_new - 1),
                         [prior.eq[-1]]])
    ineq_parts = [pad_block(prior.ineq[:T_prior], T_new),
                  pad_block(prior.ineq[T_prior:2 * T_prior - 1], T_new - 1)]
    if maximin:
        ineq_parts.append(pad_block(prior.ineq[2 * T_prior - 1:], T_new))
    return Multipliers(eq=eq, ineq=np.concatenate(ineq_parts))


def _grand_optimum(entries):
    best = None
    for t, report in entries:
        if not report.optimal:
            continue
        if best is None or report.objective > best[1].objective:
            best = (t, report)
    return best


def _solve_horizon(params, objective, T, options, prior_entry, derivatives):
    """Warm-started solve with a Flat retry, per the sweep policy."""
    problem = build_problem(params, T, objective, derivatives=derivatives)
    attempts = []
    if prior_entry is not None and prior_entry[1].trajectory is not None:
        T_prior, prior_report = prior_entry
        guess = initial_guess(problem, prior=prior_report.trajectory)
        mult0 = None
        if not guess.flat_fallback and prior_report.multipliers is not None:
            mult0 = _pad_multipliers(prior_report.multipliers, T_prior, T,
                                     problem.maximin)
        attempts.append(solve_from(problem, options, guess.x,
                                   multipliers0=mult0))
        if not attempts[-1].optimal:
            attempts.append(solve_from(problem, options, problem.flat_start()))
    else:
        attempts.append(multistart(problem, options))
    winners = [r for r in attempts if r.optimal]
    if winners:
        return max(winners, key=lambda r: r.objective)
    return min(attempts, key=lambda r: max(r.eq_residual_norm,
                                           r.ineq_violation_norm))


def sweep(params, objective: Objective, t_min, t_max, step=1,
          options: Optional[SolveOptions] = None, pool=None,
          derivatives="analytic") -> SweepResult:
    """Ascending horizon sweep on T in [t_min, t_max].

    Sequential by default so each horizon warm-starts from the previous
    optimum; with a pool, horizons are solved independently from Flat
    starts and merged in horizon order.
    """
    if not (2 <= t_min <= t_max):
        raise ValueError(f"need 2 <= t_min <= t_max, got [{t_min}, {t_max}]")
    if step < 1:
        raise ValueError(f"step must be at least 1, got {step}")
    options = options or SolveOptions()
    horizons = list(range(t_min, t_max + 1, step))

    entries = []
    if pool is not None:
        items = [(build_problem(params, T, objective, derivatives=derivatives),
                  options) for T in horizons]
        reports = list(pool.map(_multistart_item, items))
        entries = list(zip(horizons, reports))
    else:
        prior = None
        for T in horizons:
            report = _solve_horizon(params, objective, T, options, prior,
                                    derivatives)
            entries.append((T, report))
            if report.optimal:
                prior = (T, report)
    best = _grand_optimum(entries)
    if best is None:
        raise SweepError(
            f"no horizon in [{t_min}, {t_max}] solved to optimality; statuses: "
            + ", ".join(f"T={t}:{r.status.value}" for t, r in entries),
            entries)
    return SweepResult(objective=objective, entries=entries, T_star=best[0],
                       objective_at_star=best[1].objective,
                       schedule=[(t_min, t_max, step)])


def _multistart_item(item):
    problem, options = item
    return multistart(problem, options)


def refine(params, objective: Objective, coarse: SweepResult, radius,
           options: Optional[SolveOptions] = None,
           derivatives="analytic") -> SweepResult:
    """Step-1 sweep around the coarse T*, merged with the coarse entries."""
    if radius < 0:
        raise ValueError(f"radius must be non-negative, got {radius}")
    options = options or SolveOptions()
    t_lo = max(2, coarse.T_star - radius)
    t_hi = coarse.T_star + radius

    entries = []
    prior = (coarse.T_star, coarse.report_at(coarse.T_star))
    for T in range(t_lo, t_hi + 1):
        report = _solve_horizon(params, objective, T, options, prior,
                                derivatives)
        entries.append((T, report))
        if report.optimal:
            prior = (T, report)

    merged = {t: r for t, r in coarse.entries}
    for t, report in entries:
        held = merged.get(t)
        if held is None or not held.optimal or (
                report.optimal and report.objective > held.objective):
            merged[t] = report
    all_entries = sorted(merged.items())
    best = _grand_optimum(all_entries)
    if best is None:
        raise SweepError("refine produced no optimal horizon", all_entries)
    return SweepResult(objective=objective, entries=all_entries,
                       T_star=best[0], objective_at_star=best[1].objective,
                       schedule=coarse.schedule + [(t_lo, t_hi, 1)])
