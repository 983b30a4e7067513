"""Joint caching/computing placement and server selection with energy-aware costs."""

from sdncc.alloc import CopyAllocation, allocate, optimal_content_copies, optimal_vm_copies, oracle_copies
from sdncc.catalog import ComputationItem, ContentItem, DemandMatrix, ServiceCatalog, spread_demand, zipf_catalog
from sdncc.costs import CostBreakdown, Placement, Selection, aggregate_cost, total_cost
from sdncc.graph import Topology, TopologyGenSpec, all_pairs_hops, build_routing, generate_topology, link_loads
from sdncc.hoplaw import HopLawFit, fit_power_law, measure_avg_distance
from sdncc.params import EnergyParams
from sdncc.search import Instance, baseline_origin, enumerate_space, exhaustive_search, greedy_placement
from sdncc.selection import SelectionProblem, solve_selection, verify_solution

__version__ = "0.1.0"

__all__ = [
    "ComputationItem",
    "ContentItem",
    "CopyAllocation",
    "CostBreakdown",
    "DemandMatrix",
    "EnergyParams",
    "HopLawFit",
    "Instance",
    "Placement",
    "Selection",
    "SelectionProblem",
    "ServiceCatalog",
    "Topology",
    "TopologyGenSpec",
    "aggregate_cost",
    "all_pairs_hops",
    "allocate",
    "baseline_origin",
    "build_routing",
    "enumerate_space",
    "exhaustive_search",
    "fit_power_law",
    "generate_topology",
    "greedy_placement",
    "link_loads",
    "measure_avg_distance",
    "optimal_content_copies",
    "optimal_vm_copies",
    "oracle_copies",
    "solve_selection",
    "spread_demand",
    "total_cost",
    "verify_solution",
    "zipf_catalog",
]
