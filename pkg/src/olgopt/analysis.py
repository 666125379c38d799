"""Post-solve analytics: inequality index, welfare pairs, frontier assembly."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DomainError
from .model import Trajectory


def gini(trajectory_or_series, utilities=None):
    """Population-weighted Gini index of lifetime utilities.

    Accepts a Trajectory or explicit (N, u) arrays.  Generations are sorted
    by utility (stable, so exact ties keep input order, which provably does
    not change the value); with weights nu_j = N_j / sum(N) and partial sums
    S_j = sum_{i<=j} nu_i u_i the index is 1 - sum_j nu_j (S_{j-1} + S_j) / S_T.
    """
    if utilities is None:
        N = trajectory_or_series.series("N")
        u = trajectory_or_series.series("u")
    else:
        N = np.asarray(trajectory_or_series, dtype=float)
        u = np.asarray(utilities, dtype=float)
    if np.any(u <= 0.0):
        raise DomainError("gini needs positive utilities")
    if np.any(N <= 0.0):
        raise DomainError("gini needs positive populations")
    order = np.argsort(u, kind="stable")
    u = u[order]
    nu = N[order] / N.sum()
    S = np.cumsum(nu * u)
    S_prev = np.concatenate([[0.0], S[:-1]])
    return 1.0 - float(np.dot(nu, S_prev + S)) / S[-1]


@dataclass(frozen=True)
class WelfarePoint:
    """A schedule's value under both criteria, with its provenance."""

    utilitarian_value: float
    min_utility: float
    objective: str = ""
    T: int = 0
    scenario: str = ""
    dominated: Optional[bool] = None

    def coords(self):
        return (self.utilitarian_value, self.min_utility)


def welfare_pair(trajectory: Trajectory, objective="", T=None, scenario=""):
    """Evaluate one schedule under both welfare criteria."""
    N = trajectory.series("N")
    u = trajectory.series("u")
    return WelfarePoint(utilitarian_value=float(u @ N),
                        min_utility=float(u.min()),
                        objective=objective,
                        T=T if T is not None else trajectory.horizon,
                        scenario=scenario)


@dataclass(frozen=True)
class FrontierSet:
    """Welfare points with dominance flags; the frontier is the
    non-dominated subset sorted by utilitarian value."""

    points: tuple

    @property
    def frontier(self):
        return tuple(sorted((p for p in self.points if not p.dominated),
                            key=lambda p: p.utilitarian_value))

    @property
    def dominated(self):
        return tuple(p for p in self.points if p.dominated)


def build_frontier(points) -> FrontierSet:
    """Flag weak Pareto dominance (>= in both coordinates, > in one)."""
    points = list(points)
    if not points:
        raise DomainError("build_frontier needs at least one point")
    flagged = []
    for p in points:
        dominated = any(
            q.utilitarian_value >= p.utilitarian_value
            and q.min_utility >= p.min_utility
            and (q.utilitarian_value > p.utilitarian_value
                 or q.min_utility > p.min_utility)
            for q in points)
        flagged.append(WelfarePoint(p.utilitarian_value, p.min_utility,
                                    p.objective, p.T, p.scenario,
                                    dominated=dominated))
    return FrontierSet(points=tuple(flagged))


def cumulative_population(trajectory: Trajectory):
    """Total population over the whole horizon."""
    return float(trajectory.series("N").sum())
