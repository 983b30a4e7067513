"""Server selection for a fixed placement.

With the placement fixed, the remaining decision is the fraction of each
(service, user) demand sent to each hosting server. The objective
sum(w[i,u] * m[k,u] * rho[k,i,u]) with w = a + gamma*D is linear, so the
capacitated case is an LP; without binding link capacities every demand
simply goes to its cheapest host.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from sdncc.costs import Placement, Selection
from sdncc.errors import Infeasible
from sdncc.graph import DistanceTable, RoutingMatrix

log = logging.getLogger(__name__)

MODES = ("uncapacitated", "lp", "auto")
C1_TOL = 1e-9
C4_REL_TOL = 1e-6


@dataclass(frozen=True)
class SelectionProblem:
    """Inputs of one selection solve.

    Attributes:
        weights: (N+1, N) per-bit cost a + gamma*D; inf where unreachable.
        demand: (K, N) volumes.
        placement: which servers host which service.
        routing: single-path routing matrix.
        capacities: (L+1,) link capacities, origin uplink last.
    """

    weights: np.ndarray
    demand: np.ndarray
    placement: Placement
    routing: RoutingMatrix
    capacities: np.ndarray

    @classmethod
    def build(cls, placement, demand, dist: DistanceTable, routing, capacities, gamma: float) -> SelectionProblem:
        volume = getattr(demand, "volume", demand)
        return cls(dist.weights(gamma), np.asarray(volume, dtype=float), placement, routing, np.asarray(capacities, dtype=float))

    def eligible(self) -> np.ndarray:
        """(K, N+1, N) mask of usable (service, server, user) triples."""
        return self.placement.h.T[:, :, None] & np.isfinite(self.weights)[None]

    @property
    def capacitated(self) -> bool:
        return bool(np.isfinite(self.capacities).any())


@dataclass(frozen=True)
class SelectionSolution:
    rho: np.ndarray
    objective: float
    loads: np.ndarray
    status: str
    mode: str

    def selection(self, problem: SelectionProblem) -> Selection:
        return Selection.build(self.rho, problem.placement, problem.demand)


def _objective(problem: SelectionProblem, rho: np.ndarray) -> float:
    x = problem.demand[:, None, :] * rho
    return float(np.sum(np.where(x > 0, problem.weights[None] * x, 0.0)))


def _loads(problem: SelectionProblem, rho: np.ndarray) -> np.ndarray:
    traffic = (problem.demand[:, None, :] * rho).sum(axis=0)
    return problem.routing.incidence() @ traffic.ravel()


def _within_capacity(problem: SelectionProblem, loads: np.ndarray) -> bool:
    caps = problem.capacities
    return bool(np.all(loads <= caps + C4_REL_TOL * np.where(np.isfinite(caps), caps, 0.0)))


def _nearest(problem: SelectionProblem) -> np.ndarray:
    k_count, n = problem.demand.shape
    rho = np.zeros((k_count, n + 1, n))
    cost = np.where(problem.eligible(), problem.weights[None], np.inf)
    best = np.argmin(cost, axis=1)  # lowest server id wins ties
    kk, uu = np.nonzero(problem.demand > 0)
    if np.isinf(cost[kk, best[kk, uu], uu]).any():
        raise Infeasible("some demand has no reachable hosting server")
    rho[kk, best[kk, uu], uu] = 1.0
    return rho


def _solve_lp(problem: SelectionProblem) -> np.ndarray:
    k_count, n = problem.demand.shape
    elig = problem.eligible() & (problem.demand[:, None, :] > 0)
    var_k, var_i, var_u = np.nonzero(elig)
    nvar = len(var_k)
    if nvar == 0:
        return np.zeros((k_count, n + 1, n))
    vol = problem.demand[var_k, var_u]
    cost = problem.weights[var_i, var_u] * vol
    scale = cost.max() if cost.max() > 0 else 1.0

    pair_ids, pair_of_var = np.unique(var_k * n + var_u, return_inverse=True)
    a_eq = sparse.csr_matrix((np.ones(nvar), (pair_of_var, np.arange(nvar))), shape=(len(pair_ids), nvar))
    b_eq = np.ones(len(pair_ids))

    finite = np.nonzero(np.isfinite(problem.capacities))[0]
    a_ub = b_ub = None
    if len(finite):
        inc = problem.routing.incidence()[finite][:, var_i * n + var_u]
        caps = problem.capacities[finite]
        a_ub = sparse.diags(1.0 / caps) @ inc @ sparse.diags(vol)
        b_ub = np.ones(len(finite))

    res = linprog(
        cost / scale,
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=(0.0, 1.0),
        method="highs-ds",
        options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10},
    )
    if res.status == 2:
        raise Infeasible("link capacities cannot carry the demand for this placement")
    if res.status != 0:
        raise RuntimeError(f"LP solver failed: {res.message}")
    log.debug("lp: %d vars, %d eq, %d ub, %d iterations", nvar, len(pair_ids), len(finite), res.nit)

    x = np.clip(res.x, 0.0, 1.0)
    sums = np.bincount(pair_of_var, weights=x, minlength=len(pair_ids))
    x = x / sums[pair_of_var]
    rho = np.zeros((k_count, n + 1, n))
    rho[var_k, var_i, var_u] = x
    return rho


def solve_selection(problem: SelectionProblem, mode: str = "auto") -> SelectionSolution:
    """Cost-minimizing server selection for a fixed placement.

    Modes:
        uncapacitated: every (k, u) goes wholly to its cheapest host (lowest
            server id on ties); link capacities are ignored and only reported.
        lp: exact LP with coverage, link-capacity and box constraints.
        auto: the uncapacitated assignment when it respects every link
            capacity (then it is also the LP optimum), the LP otherwise.

    Raises:
        Infeasible: in lp/auto mode when link capacities cannot carry the demand.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if mode in ("uncapacitated", "auto"):
        rho = _nearest(problem)
        loads = _loads(problem, rho)
        fits = _within_capacity(problem, loads)
        if mode == "uncapacitated" or fits:
            status = "optimal" if fits else "capacity_violated"
            return SelectionSolution(rho, _objective(problem, rho), loads, status, "uncapacitated")
    rho = _solve_lp(problem)
    return SelectionSolution(rho, _objective(problem, rho), _loads(problem, rho), "optimal", "lp")


@dataclass(frozen=True)
class VerificationReport:
    coverage_violation: float
    capacity_violation: float
    box_violation: float
    stray_traffic: float
    objective: float
    objective_error: float

    @property
    def ok(self) -> bool:
        return (
            self.coverage_violation <= C1_TOL
            and self.capacity_violation <= C4_REL_TOL
            and self.box_violation == 0.0
            and self.stray_traffic == 0.0
            and self.objective_error <= 1e-9
        )


def verify_solution(problem: SelectionProblem, solution: SelectionSolution) -> VerificationReport:
    """Recheck coverage, link capacity and bounds, and recompute the objective.

    Capacity violation is relative to each link's capacity. The objective is
    recomputed with explicit loops over (service, user) so it does not share
    code with the solver.
    """
    rho = solution.rho
    h = problem.placement.h
    k_count, n = problem.demand.shape
    coverage = stray = 0.0
    objective = 0.0
    for k in range(k_count):
        for u in range(n):
            m = problem.demand[k, u]
            if m <= 0:
                continue
            col = rho[k, :, u]
            coverage = max(coverage, abs(float(col @ h[:, k]) - 1.0))
            stray = max(stray, float(col[~h[:, k]].sum()))
            for i in np.nonzero(col * h[:, k])[0]:
                objective += problem.weights[i, u] * m * col[i]
    box = float(max(0.0, -rho.min(), rho.max() - 1.0))

    traffic = (problem.demand[:, None, :] * rho * h.T[:, :, None]).sum(axis=0)
    loads = np.zeros(problem.routing.n_links)
    for (i, u), path in problem.routing.paths.items():
        if traffic[i, u] > 0:
            for lid in path:
                loads[lid] += traffic[i, u]
    caps = problem.capacities
    finite = np.isfinite(caps)
    capacity = float(max(0.0, ((loads[finite] - caps[finite]) / caps[finite]).max(initial=0.0)))

    err = abs(objective - solution.objective) / max(abs(objective), 1e-300) if objective else abs(solution.objective)
    return VerificationReport(coverage, capacity, box, stray, objective, err)
