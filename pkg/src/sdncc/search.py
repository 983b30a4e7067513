"""Search over placements: exhaustive enumeration, greedy, and origin-only baseline."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from sdncc.catalog import DemandMatrix, ServiceCatalog
from sdncc.costs import CostBreakdown, Placement, placement_violations, total_cost
from sdncc.errors import AllInfeasible, BudgetExceeded, Infeasible, InvalidSpec
from sdncc.graph import DistanceTable, RoutingMatrix, Topology, all_pairs_hops, build_routing
from sdncc.params import EnergyParams
from sdncc.selection import SelectionProblem, SelectionSolution, solve_selection

DEFAULT_BUDGET = 10**6


@dataclass(frozen=True)
class Instance:
    """Everything a placement search needs, precomputed once."""

    topology: Topology
    catalog: ServiceCatalog
    demand: DemandMatrix
    params: EnergyParams
    dist: DistanceTable
    routing: RoutingMatrix

    @classmethod
    def create(
        cls, topology: Topology, catalog: ServiceCatalog, demand: DemandMatrix, params: EnergyParams
    ) -> Instance:
        dist = all_pairs_hops(topology, params)
        return cls(topology, catalog, demand, params, dist, build_routing(topology, dist))

    def candidates(self, k: int) -> list[int]:
        """Nodes allowed to host service k."""
        if self.catalog.is_content(k):
            return self.topology.caching_nodes
        return self.topology.computing_nodes

    def problem(self, placement: Placement) -> SelectionProblem:
        return SelectionProblem.build(
            placement, self.demand, self.dist, self.routing, self.topology.capacities, self.params.gamma
        )

    def evaluate(self, placement: Placement, mode: str = "auto") -> tuple[CostBreakdown, SelectionSolution]:
        """Solve the selection for ``placement`` and cost the result.

        Raises:
            Infeasible: link capacities cannot carry the demand.
        """
        problem = self.problem(placement)
        solution = solve_selection(problem, mode)
        cost = total_cost(placement, solution.selection(problem), self.catalog, self.dist, self.params)
        return cost, solution


@dataclass(frozen=True)
class SearchResult:
    placement: Placement
    solution: SelectionSolution
    cost: CostBreakdown
    evaluated: int
    infeasible: int
    q: int = 1


@dataclass(frozen=True)
class SearchSpace:
    """Cartesian product over services of the n_k-subsets of their candidate nodes.

    Enumeration is lexicographic: services in catalog order, each one's
    subsets in ``itertools.combinations`` order over sorted node ids, the
    last service varying fastest.
    """

    candidates: tuple[tuple[int, ...], ...]
    counts: tuple[int, ...]
    n_nodes: int
    q: int

    def __len__(self) -> int:
        return self.q

    def __iter__(self) -> Iterator[Placement]:
        per_service = [itertools.combinations(c, n) for c, n in zip(self.candidates, self.counts)]
        for combo in itertools.product(*per_service):
            yield Placement.from_hosts(self.n_nodes, len(self.counts), dict(enumerate(combo)))


def enumerate_space(counts: Sequence[int], instance: Instance, budget: int | None = DEFAULT_BUDGET) -> SearchSpace:
    """Build the candidate space for fixed per-service copy counts.

    A service without any candidate node must have count 0 and stays on
    the origin; every other service needs 1 <= count <= #candidates.

    Raises:
        InvalidSpec: a count is out of range.
        BudgetExceeded: the number of candidates Q exceeds ``budget``.
    """
    counts = tuple(int(c) for c in counts)
    if len(counts) != len(instance.catalog):
        raise InvalidSpec(f"{len(counts)} copy counts for {len(instance.catalog)} services")
    cands = []
    q = 1
    for k, n in enumerate(counts):
        cand = tuple(sorted(instance.candidates(k)))
        if cand and not 1 <= n <= len(cand):
            raise InvalidSpec(f"service {k}: copy count {n} outside [1, {len(cand)}]")
        if not cand and n != 0:
            raise InvalidSpec(f"service {k}: no candidate nodes, copy count must be 0")
        cands.append(cand)
        q *= math.comb(len(cand), n)
    if budget is not None and q > budget:
        raise BudgetExceeded(q, budget)
    return SearchSpace(tuple(cands), counts, instance.topology.n, q)


def fit_counts(counts: Sequence[int], instance: Instance) -> list[int]:
    """Clamp copy counts to each service's candidate-set size (0 when it has none)."""
    return [min(int(c), len(instance.candidates(k))) for k, c in enumerate(counts)]


def _scan(instance: Instance, space: SearchSpace, start: int, stop: int, mode: str):
    """Best (cost, index, placement) over enumeration indices [start, stop)."""
    best = None
    evaluated = infeasible = 0
    for idx, placement in enumerate(itertools.islice(iter(space), start, stop), start):
        evaluated += 1
        if placement_violations(placement, instance.topology, instance.catalog):
            infeasible += 1
            continue
        try:
            cost, solution = instance.evaluate(placement, mode)
        except Infeasible:
            infeasible += 1
            continue
        if best is None or cost.total < best[0]:
            best = (cost.total, idx, placement, cost, solution)
    return best, evaluated, infeasible


def exhaustive_search(
    space: SearchSpace, instance: Instance, mode: str = "auto", workers: int = 1
) -> SearchResult:
    """Evaluate every feasible placement in ``space`` plus the origin-only one.

    Placements breaking cache/compute capacities or whose selection LP is
    infeasible are skipped and counted. Ties keep the earliest candidate in
    enumeration order; the origin-only placement comes last.

    Raises:
        AllInfeasible: no candidate is feasible.
    """
    if workers > 1 and space.q > workers:
        bounds = np.linspace(0, space.q, workers + 1).astype(int)
        with ProcessPoolExecutor(workers) as pool:
            parts = list(
                pool.map(
                    _scan,
                    itertools.repeat(instance),
                    itertools.repeat(space),
                    bounds[:-1].tolist(),
                    bounds[1:].tolist(),
                    itertools.repeat(mode),
                )
            )
    else:
        parts = [_scan(instance, space, 0, space.q, mode)]

    evaluated = sum(p[1] for p in parts)
    infeasible = sum(p[2] for p in parts)
    found = [p[0] for p in parts if p[0] is not None]
    best = min(found, key=lambda b: (b[0], b[1])) if found else None

    origin = Placement.origin_only(instance.topology.n, len(instance.catalog))
    evaluated += 1
    try:
        cost, solution = instance.evaluate(origin, mode)
        if best is None or cost.total < best[0]:
            best = (cost.total, space.q, origin, cost, solution)
    except Infeasible:
        infeasible += 1
    if best is None:
        raise AllInfeasible(f"all {evaluated} candidates are infeasible")
    _, _, placement, cost, solution = best
    return SearchResult(placement, solution, cost, evaluated, infeasible, space.q)


def greedy_placement(counts: Sequence[int], instance: Instance, mode: str = "auto") -> SearchResult:
    """Add copies one at a time, each at the node that lowers total cost most.

    Services are handled in catalog order, each up to its copy count, with
    marginal cost measured under nearest-server selection. Nodes whose
    remaining cache/compute capacity cannot take the service are skipped; a
    service may end with fewer copies if none fit. The final placement gets
    one selection solve in ``mode``.

    Raises:
        Infeasible: the final placement cannot be served within link capacities.
    """
    topo, catalog, params = instance.topology, instance.catalog, instance.params
    n = topo.n
    weights = instance.dist.weights(params.gamma)
    cache_left = np.array([node.cache_capacity for node in topo.nodes], dtype=float)
    compute_left = np.array([node.compute_capacity for node in topo.nodes], dtype=float)
    hosts: dict[int, list[int]] = {}

    for k, item in enumerate(catalog.items):
        is_content = catalog.is_content(k)
        need = item.size if is_content else item.workload
        left = cache_left if is_content else compute_left
        copy_cost = (item.size * params.p_ca if is_content else params.p_static) * params.t
        cols = np.nonzero(instance.demand.volume[k] > 0)[0]
        demand = instance.demand.volume[k, cols]
        w = weights[:, cols]
        current = w[n].copy()
        chosen: list[int] = []
        pool = np.array(sorted(instance.candidates(k)), dtype=int)
        for _ in range(int(counts[k])):
            ok = np.array([v not in chosen and left[v] >= need for v in pool], dtype=bool)
            if not ok.any():
                break
            options = pool[ok]
            gain = (np.minimum(current[None, :], w[options]) - current[None, :]) @ demand
            best = int(options[int(np.argmin(copy_cost + gain))])
            chosen.append(best)
            left[best] -= need
            current = np.minimum(current, w[best])
        hosts[k] = sorted(chosen)

    placement = Placement.from_hosts(n, len(catalog), hosts)
    cost, solution = instance.evaluate(placement, mode)
    return SearchResult(placement, solution, cost, evaluated=1, infeasible=0)


def baseline_origin(instance: Instance, mode: str = "auto") -> SearchResult:
    """Every request served by the origin; no in-network copies."""
    placement = Placement.origin_only(instance.topology.n, len(instance.catalog))
    cost, solution = instance.evaluate(placement, mode)
    return SearchResult(placement, solution, cost, evaluated=1, infeasible=0)
