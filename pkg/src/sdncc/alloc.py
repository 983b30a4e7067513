"""Optimal number of copies per service, in closed form and by integer grid search."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from sdncc.catalog import ComputationItem, ContentItem, ServiceCatalog
from sdncc.costs import content_item_cost, vm_item_cost
from sdncc.errors import DegenerateParamsWarning
from sdncc.hoplaw import HopLawFit
from sdncc.params import EnergyParams

ORACLE_MAX_N = 10**6


def _closed_form(load: float, fit: HopLawFit, params: EnergyParams, copy_power: float, n_nodes: int) -> float:
    scale = fit.a * load * fit.alpha * params.per_hop_weight / (copy_power * params.t)
    return scale ** (1.0 / (fit.alpha + 1.0)) * n_nodes ** (fit.alpha / (fit.alpha + 1.0))


def clamp(x: float, n_nodes: int) -> float:
    return max(1.0, min(x, float(n_nodes)))


def round_copies(x: float, n_nodes: int) -> int:
    """Nearest integer (halves up), then back into [1, N]."""
    return int(max(1, min(math.floor(x + 0.5), n_nodes)))


def unclamped_content_copies(item: ContentItem, fit: HopLawFit, params: EnergyParams, n_nodes: int) -> float:
    """Stationary point of the per-content cost; inf when storage is free."""
    if params.p_ca == 0:
        return math.inf
    return _closed_form(item.popularity, fit, params, params.p_ca, n_nodes)


def unclamped_vm_copies(item: ComputationItem, fit: HopLawFit, params: EnergyParams, n_nodes: int) -> float:
    if params.p_static == 0:
        return math.inf
    return _closed_form(item.volume, fit, params, params.p_static, n_nodes)


def optimal_content_copies(item: ContentItem, fit: HopLawFit, params: EnergyParams, n_nodes: int) -> float:
    """Real-valued copy count clamped to [1, N].

    Zero storage power makes more copies always better; that case warns
    with :class:`DegenerateParamsWarning` and returns N.
    """
    n_o = unclamped_content_copies(item, fit, params, n_nodes)
    if math.isinf(n_o):
        warnings.warn(f"{item.id}: p_ca*t = 0, every copy is free", DegenerateParamsWarning, stacklevel=2)
    return clamp(n_o, n_nodes)


def optimal_vm_copies(item: ComputationItem, fit: HopLawFit, params: EnergyParams, n_nodes: int) -> float:
    m_o = unclamped_vm_copies(item, fit, params, n_nodes)
    if math.isinf(m_o):
        warnings.warn(f"{item.id}: p_static*t = 0, every VM is free", DegenerateParamsWarning, stacklevel=2)
    return clamp(m_o, n_nodes)


def oracle_copies(item: ContentItem | ComputationItem, fit: HopLawFit, params: EnergyParams, n_nodes: int) -> int:
    """Integer copy count in [1, N] minimizing energy + gamma * usage; smallest on ties."""
    if n_nodes > ORACLE_MAX_N:
        raise ValueError(f"oracle grid limited to N <= {ORACLE_MAX_N}")
    grid = np.arange(1, n_nodes + 1, dtype=float)
    cost_fn = content_item_cost if isinstance(item, ContentItem) else vm_item_cost
    energy, usage = cost_fn(grid, item, fit, params)
    return int(np.argmin(energy + params.gamma * usage)) + 1


@dataclass(frozen=True)
class CopyCount:
    service: str
    popularity: float
    unclamped: float
    optimal: float
    rounded: int
    oracle: int | None = None


@dataclass(frozen=True)
class CopyAllocation:
    contents: tuple[CopyCount, ...]
    computations: tuple[CopyCount, ...]

    @property
    def n(self) -> list[float]:
        return [c.optimal for c in self.contents]

    @property
    def m(self) -> list[float]:
        return [c.optimal for c in self.computations]

    @property
    def counts(self) -> list[int]:
        """Rounded copies in catalog service order."""
        return [c.rounded for c in (*self.contents, *self.computations)]

    def __iter__(self):
        yield from self.contents
        yield from self.computations


def allocate(
    catalog: ServiceCatalog,
    fit: HopLawFit,
    params: EnergyParams,
    n_nodes: int,
    with_oracle: bool = False,
) -> CopyAllocation:
    """Closed-form copy counts for every service, optionally with the grid-search oracle."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateParamsWarning)
        contents = tuple(
            _count(item, unclamped_content_copies(item, fit, params, n_nodes), fit, params, n_nodes, with_oracle)
            for item in catalog.contents
        )
        computations = tuple(
            _count(item, unclamped_vm_copies(item, fit, params, n_nodes), fit, params, n_nodes, with_oracle)
            for item in catalog.computations
        )
    if any(math.isinf(c.unclamped) for c in (*contents, *computations)):
        warnings.warn("zero storage or VM power: copy counts pinned to N", DegenerateParamsWarning, stacklevel=2)
    return CopyAllocation(contents, computations)


def _count(item, unclamped, fit, params, n_nodes, with_oracle) -> CopyCount:
    optimal = clamp(unclamped, n_nodes)
    return CopyCount(
        item.id,
        item.popularity,
        unclamped,
        optimal,
        round_copies(optimal, n_nodes),
        oracle_copies(item, fit, params, n_nodes) if with_oracle else None,
    )
