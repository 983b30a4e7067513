"""Energy and network-usage accounting.

Arrays follow one layout everywhere:

- placement ``h``: (N+1, K) bool, rows are nodes with the origin last;
- selection ``rho`` and traffic ``x``: (K, N+1, N), service x server x user;
- demand: (K, N), service x user node.

Only in-network copies (rows 0..N-1) are billed for storage and idle VMs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Mapping

import numpy as np

from sdncc.catalog import ComputationItem, ContentItem, DemandMatrix, ServiceCatalog
from sdncc.errors import InconsistentDecision
from sdncc.graph import DistanceTable, Topology
from sdncc.params import EnergyParams

if TYPE_CHECKING:
    from sdncc.hoplaw import HopLawFit


@dataclass(frozen=True)
class Placement:
    h: np.ndarray

    @classmethod
    def origin_only(cls, n_nodes: int, n_services: int) -> Placement:
        h = np.zeros((n_nodes + 1, n_services), dtype=bool)
        h[n_nodes] = True
        return cls(h)

    @classmethod
    def from_hosts(cls, n_nodes: int, n_services: int, hosts: Mapping[int, Iterable[int]]) -> Placement:
        """``hosts[k]`` lists the in-network nodes holding service k; the origin is added."""
        h = np.zeros((n_nodes + 1, n_services), dtype=bool)
        h[n_nodes] = True
        for k, nodes in hosts.items():
            h[list(nodes), k] = True
        return cls(h)

    @property
    def n_nodes(self) -> int:
        return self.h.shape[0] - 1

    def copies(self, k: int) -> int:
        """In-network copies of service k."""
        return int(self.h[:-1, k].sum())

    def hosts(self, k: int) -> list[int]:
        return [int(i) for i in np.nonzero(self.h[:-1, k])[0]]

    def key(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(self.hosts(k)) for k in range(self.h.shape[1]))


def placement_violations(placement: Placement, topology: Topology, catalog: ServiceCatalog) -> list[str]:
    """Everything that makes ``placement`` infeasible; empty when it is feasible."""
    h = placement.h
    n, f1 = topology.n, catalog.f1
    problems = []
    if h.shape != (n + 1, len(catalog)):
        return [f"placement shape {h.shape}, expected {(n + 1, len(catalog))}"]
    if not h[n].all():
        problems.append("origin must host every service")
    caching = set(topology.caching_nodes)
    computing = set(topology.computing_nodes)
    sizes = np.array([c.size for c in catalog.contents])
    workloads = np.array([c.workload for c in catalog.computations])
    for node in topology.nodes:
        i = node.id
        if h[i, :f1].any():
            if i not in caching:
                problems.append(f"content placed on non-caching node {i}")
            elif h[i, :f1] @ sizes > node.cache_capacity:
                problems.append(f"cache capacity exceeded on node {i}")
        if h[i, f1:].any():
            if i not in computing:
                problems.append(f"computation placed on non-computing node {i}")
            elif h[i, f1:] @ workloads > node.compute_capacity:
                problems.append(f"compute capacity exceeded on node {i}")
    return problems


@dataclass(frozen=True)
class Selection:
    """Server-selection fractions and the traffic they induce."""

    rho: np.ndarray
    traffic: np.ndarray

    @classmethod
    def build(cls, rho: np.ndarray, placement: Placement, demand: DemandMatrix | np.ndarray) -> Selection:
        volume = demand.volume if isinstance(demand, DemandMatrix) else np.asarray(demand)
        hk = placement.h.T[:, :, None]
        traffic = volume[:, None, :] * rho * hk
        return cls(rho, traffic)

    def coverage(self, placement: Placement) -> np.ndarray:
        """Sum over servers of rho*h, shape (K, N)."""
        return (self.rho * placement.h.T[:, :, None]).sum(axis=1)

    def server_traffic(self) -> np.ndarray:
        """Traffic per (server, user), summed over services."""
        return self.traffic.sum(axis=0)


@dataclass(frozen=True)
class CostBreakdown:
    f_e_ca: float
    f_e_com: float
    f_e_tr: float
    f_tr: float
    gamma: float

    @property
    def total(self) -> float:
        return self.f_e_ca + self.f_e_com + self.f_e_tr + self.gamma * self.f_tr

    @property
    def energy(self) -> float:
        return self.f_e_ca + self.f_e_com + self.f_e_tr


def caching_energy(placement: Placement, catalog: ServiceCatalog, params: EnergyParams) -> float:
    """Storage energy of in-network content copies over the period, J."""
    if catalog.f1 == 0:
        return 0.0
    sizes = np.array([c.size for c in catalog.contents])
    copies = placement.h[:-1, : catalog.f1].sum(axis=0)
    return float(np.sum(copies * sizes) * params.p_ca * params.t)


def computing_energy(placement: Placement, catalog: ServiceCatalog, params: EnergyParams) -> float:
    """Idle VM energy per in-network copy plus the placement-independent workload energy, J."""
    if catalog.f2 == 0:
        return 0.0
    vms = int(placement.h[:-1, catalog.f1 :].sum())
    active = sum(c.popularity * c.workload for c in catalog.computations)
    return float(vms * params.p_static * params.t + active * params.p_active)


def transmission_energy(selection: Selection, dist: DistanceTable) -> float:
    x = selection.traffic
    return float(np.sum(np.where(x > 0, dist.per_bit_energy[None] * x, 0.0)))


def network_usage(selection: Selection, dist: DistanceTable) -> float:
    """Latency-weighted delivered volume."""
    x = selection.traffic
    return float(np.sum(np.where(x > 0, dist.latency[None] * x, 0.0)))


def total_cost(
    placement: Placement,
    selection: Selection,
    catalog: ServiceCatalog,
    dist: DistanceTable,
    params: EnergyParams,
) -> CostBreakdown:
    """Combined objective split into its four components.

    Raises:
        InconsistentDecision: some rho > 0 on a server that does not host the service.
    """
    stray = (selection.rho > 0) & ~placement.h.T[:, :, None]
    if stray.any():
        k, i, u = (int(v) for v in np.argwhere(stray)[0])
        raise InconsistentDecision(f"rho[{k},{i},{u}] > 0 but server {i} does not host service {k}")
    return CostBreakdown(
        caching_energy(placement, catalog, params),
        computing_energy(placement, catalog, params),
        transmission_energy(selection, dist),
        network_usage(selection, dist),
        params.gamma,
    )


# --- aggregate (hop-law) form -------------------------------------------------


def _transport(volume: float, d: float, params: EnergyParams) -> float:
    return volume * (params.p_tr_link * d + params.p_tr_node * (d + 1))


def content_item_cost(n: float | np.ndarray, item: ContentItem, fit: HopLawFit, params: EnergyParams):
    """Energy and network usage of one content served from ``n`` copies at hop-law distance."""
    d = fit.predict(n)
    energy = n * item.size * params.p_ca * params.t + _transport(item.volume, d, params)
    return energy, params.eta * item.volume * d


def vm_item_cost(m: float | np.ndarray, item: ComputationItem, fit: HopLawFit, params: EnergyParams):
    """Energy and network usage of one computation served from ``m`` VM copies."""
    d = fit.predict(m)
    energy = (
        m * params.p_static * params.t
        + item.popularity * item.workload * params.p_active
        + _transport(item.volume, d, params)
    )
    return energy, params.eta * item.volume * d


def aggregate_cost(copy_counts, catalog: ServiceCatalog, fit: HopLawFit, params: EnergyParams) -> tuple[float, float]:
    """Total energy and network usage when every request travels the hop-law distance.

    ``copy_counts`` provides ``n`` (per content) and ``m`` (per computation)
    sequences, e.g. a :class:`sdncc.alloc.CopyAllocation`.
    """
    energy = usage = 0.0
    for n, item in zip(copy_counts.n, catalog.contents):
        e, t = content_item_cost(n, item, fit, params)
        energy += e
        usage += t
    for m, item in zip(copy_counts.m, catalog.computations):
        e, t = vm_item_cost(m, item, fit, params)
        energy += e
        usage += t
    return float(energy), float(usage)
