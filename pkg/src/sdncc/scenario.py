"""Scenario files, experiment drivers and CSV output.

A scenario is a JSON object with ``"schema": 1``. Unknown keys are errors.
Relative file paths inside it resolve against the scenario's directory.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from sdncc.alloc import allocate, oracle_copies, unclamped_content_copies, unclamped_vm_copies, clamp, round_copies
from sdncc.catalog import ComputationItem, ContentItem, ServiceCatalog, spread_demand, zipf_catalog
from sdncc.errors import ConfigError, InvalidSpec
from sdncc.graph import Topology, TopologyGenSpec, generate_topology, server_ranking
from sdncc.hoplaw import HopLawFit, default_sample_points, fit_topology
from sdncc.params import EnergyParams
from sdncc.search import (
    DEFAULT_BUDGET,
    Instance,
    SearchResult,
    baseline_origin,
    enumerate_space,
    exhaustive_search,
    fit_counts,
    greedy_placement,
)

log = logging.getLogger(__name__)

SCHEMA = 1
METHODS = ("exhaustive", "greedy", "baseline")
SWEEPABLE = ("server_count", "gamma", "eta", "zipf_exponent", "penalty_hops")

_TOP_KEYS = {"schema", "name", "seed", "topology", "catalog", "demand", "energy", "hop_law", "solver", "sweep", "fig2", "fig3"}


def _check_keys(block: Any, allowed: set[str], where: str) -> dict[str, Any]:
    if not isinstance(block, dict):
        raise ConfigError("expected an object", where)
    unknown = sorted(set(block) - allowed)
    if unknown:
        raise ConfigError(f"unknown keys {unknown}", where)
    return block


@dataclass(frozen=True)
class SolverOptions:
    method: str = "greedy"
    budget: int = DEFAULT_BUDGET
    selection: str = "auto"
    workers: int = 1
    copies: tuple[int, ...] | None = None


@dataclass(frozen=True)
class Scenario:
    """Parsed scenario file; nothing is generated until :meth:`build_instance`."""

    name: str
    seed: int
    topology: dict[str, Any]
    catalog: dict[str, Any]
    demand: dict[str, Any]
    energy: EnergyParams
    hop_law: dict[str, Any] = field(default_factory=dict)
    solver: SolverOptions = SolverOptions()
    sweep: dict[str, Any] | None = None
    fig2: dict[str, Any] = field(default_factory=dict)
    fig3: dict[str, Any] = field(default_factory=dict)
    base_dir: Path = Path(".")

    # --- loading --------------------------------------------------------

    @classmethod
    def load(cls, path: str | Path) -> Scenario:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read scenario: {exc}") from exc
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
        return cls.from_dict(data, path.parent)

    @classmethod
    def from_dict(cls, data: dict[str, Any], base_dir: Path = Path(".")) -> Scenario:
        _check_keys(data, _TOP_KEYS, "<root>")
        if data.get("schema") != SCHEMA:
            raise ConfigError(f"expected schema {SCHEMA}, got {data.get('schema')!r}", "schema")
        if "seed" not in data or not isinstance(data["seed"], int):
            raise ConfigError("an integer seed is required", "seed")
        for key in ("topology", "catalog"):
            if key not in data:
                raise ConfigError("missing", key)

        topo = _check_keys(data["topology"], {"file", "generator"}, "topology")
        if len(topo) != 1:
            raise ConfigError("give exactly one of file/generator", "topology")
        cat = _check_keys(data["catalog"], {"file", "generator", "contents", "computations"}, "catalog")
        if "generator" in cat:
            _check_keys(
                cat["generator"],
                {"contents", "computations", "total_requests", "zipf_exponent", "size", "seed"},
                "catalog.generator",
            )
        demand = _check_keys(data.get("demand", {}), {"users", "weights"}, "demand")
        hop_law = _check_keys(data.get("hop_law", {}), {"points", "samples", "max_fraction", "a", "alpha"}, "hop_law")

        solver_block = _check_keys(data.get("solver", {}), {f.name for f in fields(SolverOptions)}, "solver")
        solver = SolverOptions(**{**solver_block, "copies": tuple(solver_block["copies"]) if solver_block.get("copies") else None})
        if solver.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}", "solver.method")
        if solver.selection not in ("auto", "lp", "uncapacitated"):
            raise ConfigError("selection must be auto, lp or uncapacitated", "solver.selection")

        sweep = data.get("sweep")
        if sweep is not None:
            _check_keys(sweep, {"parameter", "values", "cache_capacity_bits", "compute_capacity_units"}, "sweep")
            if sweep.get("parameter") not in SWEEPABLE:
                raise ConfigError(f"parameter must be one of {SWEEPABLE}", "sweep.parameter")
            if not isinstance(sweep.get("values"), list) or not sweep["values"]:
                raise ConfigError("needs a non-empty list", "sweep.values")

        fig2 = _check_keys(data.get("fig2", {}), {"server_counts", "cache_capacity_bits", "compute_capacity_units"}, "fig2")
        fig3 = _check_keys(data.get("fig3", {}), {"popularity", "demand_bps", "workload_units"}, "fig3")

        return cls(
            name=str(data.get("name", "scenario")),
            seed=data["seed"],
            topology=topo,
            catalog=cat,
            demand=demand,
            energy=EnergyParams.from_config(data.get("energy", {})),
            hop_law=hop_law,
            solver=solver,
            sweep=sweep,
            fig2=fig2,
            fig3=fig3,
            base_dir=base_dir,
        )

    def with_overrides(self, seed: int | None = None, method: str | None = None, budget: int | None = None) -> Scenario:
        solver = self.solver
        if method is not None:
            if method not in METHODS:
                raise ConfigError(f"method must be one of {METHODS}", "--method")
            solver = replace(solver, method=method)
        if budget is not None:
            solver = replace(solver, budget=budget)
        return replace(self, seed=self.seed if seed is None else seed, solver=solver)

    # --- materialization --------------------------------------------------

    def gen_spec(self) -> TopologyGenSpec | None:
        block = self.topology.get("generator")
        if block is None:
            return None
        try:
            return TopologyGenSpec.from_config({"seed": self.seed, **block})
        except (InvalidSpec, TypeError) as exc:
            raise ConfigError(str(exc), "topology.generator") from exc

    def build_topology(self) -> Topology:
        try:
            if "file" in self.topology:
                return Topology.load(self.base_dir / self.topology["file"])
            return generate_topology(self.gen_spec())
        except OSError as exc:
            raise ConfigError(str(exc), "topology.file") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"topology file: invalid JSON at line {exc.lineno}", "topology.file") from exc
        except InvalidSpec as exc:
            raise ConfigError(str(exc), "topology") from exc

    def build_catalog(self, zipf_exponent: float | None = None) -> ServiceCatalog:
        block = self.catalog
        try:
            if "file" in block:
                return ServiceCatalog.from_dict(json.loads((self.base_dir / block["file"]).read_text()))
            if "generator" in block:
                gen = block["generator"]
                size = dict(gen.get("size", {}))
                size.setdefault("period_s", self.energy.t)
                return zipf_catalog(
                    int(gen.get("contents", 0)),
                    int(gen.get("computations", 0)),
                    float(gen.get("total_requests", 1000.0)),
                    float(gen.get("zipf_exponent", 0.8) if zipf_exponent is None else zipf_exponent),
                    size,
                    int(gen.get("seed", self.seed)),
                )
            return ServiceCatalog.from_dict(block)
        except OSError as exc:
            raise ConfigError(str(exc), "catalog.file") from exc
        except InvalidSpec as exc:
            raise ConfigError(str(exc), "catalog") from exc

    def build_instance(
        self,
        topology: Topology | None = None,
        catalog: ServiceCatalog | None = None,
        energy: EnergyParams | None = None,
    ) -> Instance:
        topology = topology or self.build_topology()
        catalog = catalog or self.build_catalog()
        users = self.demand.get("users", "all")
        users = topology.users if users == "all" else users
        try:
            demand = spread_demand(catalog, users, self.demand.get("weights"), topology.n)
        except InvalidSpec as exc:
            raise ConfigError(str(exc), "demand") from exc
        return Instance.create(topology, catalog, demand, energy or self.energy)

    def hop_law_fit(self, topology: Topology) -> HopLawFit:
        block = self.hop_law
        if "a" in block or "alpha" in block:
            return HopLawFit(float(block["a"]), float(block["alpha"]), topology.n)
        points = block.get("points") or default_sample_points(topology.n, block.get("max_fraction", 0.5))
        return fit_topology(topology, points, int(block.get("samples", 100)), self.seed)

    def parameter_block(self) -> dict[str, Any]:
        """Flat key/value view written into CSV headers."""
        out: dict[str, Any] = {"scenario": self.name, "seed": self.seed}
        out.update(self.energy.to_config())
        out["method"] = self.solver.method
        out["selection"] = self.solver.selection
        out["budget"] = self.solver.budget
        return out


# --- result rows --------------------------------------------------------------

ROW_FIELDS = (
    "scenario",
    "sweep_parameter",
    "sweep_value",
    "method",
    "n_servers",
    "traffic_per_s",
    "f_e_ca",
    "f_e_com",
    "f_e_tr",
    "f_tr",
    "total",
    "q",
    "evaluated",
    "infeasible",
)
UNITS = (
    "traffic_per_s=latency-weighted bits per second (bit*hop/s at eta=1); "
    "f_e_ca,f_e_com,f_e_tr,total=J over the period t_s; f_tr=latency-weighted bits"
)


@dataclass(frozen=True)
class ResultRow:
    scenario: str
    sweep_parameter: str
    sweep_value: float
    method: str
    n_servers: int
    traffic_per_s: float
    f_e_ca: float
    f_e_com: float
    f_e_tr: float
    f_tr: float
    total: float
    q: int
    evaluated: int
    infeasible: int
    runtime_ms: float | None = None

    @classmethod
    def from_result(cls, scenario: str, param: str, value, method: str, instance: Instance, result: SearchResult, runtime_ms: float) -> ResultRow:
        topo = instance.topology
        c = result.cost
        return cls(
            scenario,
            param,
            value,
            method,
            len(set(topo.caching_nodes) | set(topo.computing_nodes)),
            c.f_tr / instance.params.t,
            c.f_e_ca,
            c.f_e_com,
            c.f_e_tr,
            c.f_tr,
            c.total,
            result.q,
            result.evaluated,
            result.infeasible,
            runtime_ms,
        )


def run_method(method: str, instance: Instance, fit: HopLawFit, options: SolverOptions) -> SearchResult:
    """Closed-form copy counts (or the configured ones) fed to the chosen search."""
    if method == "baseline":
        return baseline_origin(instance, options.selection)
    if options.copies is not None:
        counts = list(options.copies)
    else:
        counts = allocate(instance.catalog, fit, instance.params, instance.topology.n).counts
    counts = fit_counts(counts, instance)
    if method == "greedy":
        return greedy_placement(counts, instance, options.selection)
    space = enumerate_space(counts, instance, options.budget)
    return exhaustive_search(space, instance, options.selection, options.workers)


def _timed(fn, *args):
    start = time.perf_counter()
    out = fn(*args)
    return out, (time.perf_counter() - start) * 1e3


def _promote(scenario: Scenario, topology: Topology, count: int, block: dict[str, Any]) -> Topology:
    """Make the ``count`` top-ranked nodes caching and computing servers."""
    spec = scenario.gen_spec()
    order = server_ranking(topology, spec.server_order if spec else "degree")
    if not 0 <= count <= topology.n:
        raise ConfigError(f"server count {count} outside [0, {topology.n}]", "sweep.values")
    cache_cap = block.get("cache_capacity_bits", spec.cache_capacity_bits if spec else None)
    comp_cap = block.get("compute_capacity_units", spec.compute_capacity_units if spec else None)
    chosen = order[:count]
    return topology.with_servers(chosen, chosen, cache_cap, comp_cap)


def run_scenario(scenario: Scenario, timing: bool = False, fit: HopLawFit | None = None) -> list[ResultRow]:
    """Run the configured method and the origin-only baseline at every sweep value.

    Copy counts come from the hop-law fit of the base topology (computed
    here unless ``fit`` is given). Rows are ordered by sweep value, then
    method with the baseline last.
    """
    base_topology = scenario.build_topology()
    fit = fit or scenario.hop_law_fit(base_topology)
    sweep = scenario.sweep or {"parameter": "none", "values": [0]}
    param = sweep["parameter"]
    methods = [scenario.solver.method] + ([] if scenario.solver.method == "baseline" else ["baseline"])
    rows = []
    for value in sweep["values"]:
        topology, energy, catalog = base_topology, scenario.energy, None
        if param == "server_count":
            topology = _promote(scenario, base_topology, int(value), sweep)
        elif param in ("gamma", "eta"):
            energy = energy.replace(**{param: float(value)})
        elif param == "zipf_exponent":
            catalog = scenario.build_catalog(zipf_exponent=float(value))
        elif param == "penalty_hops":
            topology = replace(base_topology, origin=replace(base_topology.origin, penalty_hops=int(value)))
        instance = scenario.build_instance(topology, catalog, energy)
        for method in methods:
            result, ms = _timed(run_method, method, instance, fit, scenario.solver)
            log.info("%s=%s %s total=%.6g (%.1f ms)", param, value, method, result.cost.total, ms)
            rows.append(ResultRow.from_result(scenario.name, param, value, method, instance, result, ms if timing else None))
    return rows


def experiment_fig2(scenario: Scenario, timing: bool = False, fit: HopLawFit | None = None) -> list[ResultRow]:
    """Network traffic of the greedy placement and of the baseline versus server count.

    The first x nodes of the server ranking become caching+computing nodes,
    so the candidate sets are nested as x grows.
    """
    counts = scenario.fig2.get("server_counts", [1, 2, 4, 8, 16, 32, 64])
    sweep = {"parameter": "server_count", "values": counts, **{k: v for k, v in scenario.fig2.items() if k != "server_counts"}}
    options = replace(scenario.solver, method="greedy")
    return run_scenario(replace(scenario, sweep=sweep, solver=options), timing, fit)


FIG3_FIELDS = (
    "popularity",
    "content_unclamped",
    "content_optimal",
    "content_rounded",
    "content_oracle",
    "vm_unclamped",
    "vm_optimal",
    "vm_rounded",
    "vm_oracle",
)


def experiment_fig3(scenario: Scenario, fit: HopLawFit | None = None) -> list[dict[str, float]]:
    """Closed-form and grid-search copy counts over a popularity sweep.

    Every service carries a fixed rate ``demand_bps`` so the per-request size
    is ``demand_bps * t / popularity``.
    """
    if fit is None:
        topology = scenario.build_topology()
        fit = scenario.hop_law_fit(topology)
    n = fit.n_nodes
    params = scenario.energy
    demand = float(scenario.fig3.get("demand_bps", 1e9)) * params.t
    workload = float(scenario.fig3.get("workload_units", 1e6))
    lambdas = scenario.fig3.get("popularity") or np.geomspace(1e2, 1e6, 10).tolist()
    rows = []
    for lam in lambdas:
        lam = float(lam)
        content = ContentItem("c", lam, demand / lam)
        vm = ComputationItem("v", lam, demand / lam, workload)
        n_o = unclamped_content_copies(content, fit, params, n)
        m_o = unclamped_vm_copies(vm, fit, params, n)
        rows.append(
            {
                "popularity": lam,
                "content_unclamped": n_o,
                "content_optimal": clamp(n_o, n),
                "content_rounded": round_copies(clamp(n_o, n), n),
                "content_oracle": oracle_copies(content, fit, params, n),
                "vm_unclamped": m_o,
                "vm_optimal": clamp(m_o, n),
                "vm_rounded": round_copies(clamp(m_o, n), n),
                "vm_oracle": oracle_copies(vm, fit, params, n),
            }
        )
    return rows


def alloc_rows(scenario: Scenario) -> list[dict[str, Any]]:
    """Per-service closed-form and oracle copy counts for the scenario catalog."""
    topology = scenario.build_topology()
    fit = scenario.hop_law_fit(topology)
    catalog = scenario.build_catalog()
    allocation = allocate(catalog, fit, scenario.energy, topology.n, with_oracle=True)
    kinds = ["content"] * catalog.f1 + ["computation"] * catalog.f2
    return [
        {
            "service": c.service,
            "kind": kind,
            "popularity": c.popularity,
            "unclamped": c.unclamped,
            "optimal": c.optimal,
            "rounded": c.rounded,
            "oracle": c.oracle,
        }
        for c, kind in zip(allocation, kinds)
    ]


# --- CSV ------------------------------------------------------------------------


def _fmt(value: Any) -> str:
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return "" if value is None else str(value)


def to_csv(records: Sequence[Any], columns: Sequence[str], header: dict[str, Any] | None = None, comment: str | None = None) -> str:
    """Render records (dataclasses or dicts) with '#'-prefixed header lines."""
    buf = io.StringIO()
    buf.write(f"# sdncc schema {SCHEMA}\n")
    if comment:
        buf.write(f"# units: {comment}\n")
    for key, value in (header or {}).items():
        buf.write(f"# {key}={_fmt(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for rec in records:
        get = rec.get if isinstance(rec, dict) else lambda k, r=rec: getattr(r, k)
        writer.writerow([_fmt(get(col)) for col in columns])
    return buf.getvalue()


def rows_to_csv(rows: Sequence[ResultRow], scenario: Scenario, fit: HopLawFit | None = None) -> str:
    columns = list(ROW_FIELDS)
    if rows and rows[0].runtime_ms is not None:
        columns.append("runtime_ms")
    header = scenario.parameter_block()
    if fit is not None:
        header.update({"hop_law_a": fit.a, "hop_law_alpha": fit.alpha})
    return to_csv(rows, columns, header, UNITS)
