"""Acceptance criteria, one test each, printing a PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` (the lines are printed
even without -s).
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from helpers import brute_force, make_topology, random_instance, vertex_lp_oracle

from sdncc.alloc import optimal_content_copies, oracle_copies, unclamped_content_copies
from sdncc.catalog import ContentItem, ServiceCatalog, spread_demand
from sdncc.cli import main
from sdncc.costs import Placement
from sdncc.errors import AllInfeasible, Infeasible
from sdncc.hoplaw import HopLawFit, fit_power_law, measure_avg_distance
from sdncc.params import EnergyParams
from sdncc.scenario import Scenario, experiment_fig2, experiment_fig3
from sdncc.search import (
    Instance,
    baseline_origin,
    enumerate_space,
    exhaustive_search,
    fit_counts,
    greedy_placement,
)
from sdncc.selection import solve_selection, verify_solution

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[acceptance {number}] {'PASS' if ok else 'FAIL'} {title}: {detail}")
        assert ok, detail

    return emit


def test_1_traffic_trend(report):
    scenario = Scenario.load(SCENARIOS / "fig2_backbone64.json")
    start = time.perf_counter()
    rows = experiment_fig2(scenario)
    elapsed = time.perf_counter() - start
    greedy = [r.traffic_per_s for r in rows if r.method == "greedy"]
    base = [r.traffic_per_s for r in rows if r.method == "baseline"]
    below = all(g <= b for g, b in zip(greedy, base))
    monotone = all(b <= a * (1 + 1e-9) for a, b in zip(greedy, greedy[1:]))
    ok = below and monotone and elapsed < 60 and len(greedy) == len(base) >= 2
    report(1, "greedy traffic <= baseline and non-increasing in server count", ok,
           f"{len(greedy)} points, below={below}, monotone={monotone}, {elapsed:.1f} s")


def test_2_popularity_trend(report):
    scenario = Scenario.load(SCENARIOS / "fig3_popularity.json")
    rows = experiment_fig3(scenario)
    n_star = [r["content_optimal"] for r in rows]
    monotone = all(b >= a for a, b in zip(n_star, n_star[1:]))
    gaps = [abs(r["content_optimal"] - r["content_oracle"]) for r in rows]
    vm_gaps = [abs(r["vm_optimal"] - r["vm_oracle"]) for r in rows]

    fit = scenario.hop_law_fit(scenario.build_topology())
    item = ContentItem("c", 1e3, 1.0)
    big = ContentItem("c", 16e3, 1.0)
    ratio = unclamped_content_copies(big, fit, scenario.energy, 64) / unclamped_content_copies(item, fit, scenario.energy, 64)
    target = 16 ** (1 / (fit.alpha + 1))
    scaling = abs(ratio / target - 1)
    ok = len(rows) == 10 and monotone and max(gaps) <= 1 and max(vm_gaps) <= 1 and scaling <= 1e-6
    report(2, "closed-form copies monotone in popularity, within 1 of oracle, exact scaling", ok,
           f"n*={[round(x, 2) for x in n_star]}, max|n*-oracle|={max(gaps):.3f}, scaling err={scaling:.2e}")


def _brute_force_instance(rng):
    while True:
        inst = random_instance(rng, n=int(rng.integers(2, 6)), f1=int(rng.integers(1, 3)), f2=int(rng.integers(0, 2)))
        cost, hosts = brute_force(inst)
        if all(len(h) > 0 or not inst.candidates(k) for k, h in enumerate(hosts)):
            return inst, cost, [len(h) for h in hosts]


def test_3_exhaustive_matches_brute_force(report):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst = 0.0
    count = 60
    for _ in range(count):
        inst, cost, counts = _brute_force_instance(rng)
        assert inst.topology.n <= 5 and inst.catalog.f1 <= 2 and inst.catalog.f2 <= 1
        result = exhaustive_search(enumerate_space(counts, inst), inst)
        worst = max(worst, abs(result.cost.total - cost) / cost)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 300
    report(3, "exhaustive search equals brute force", ok, f"{count} instances, worst rel err={worst:.2e}, {elapsed:.1f} s")


def test_4_lp_correctness(report):
    rng = np.random.default_rng(99)
    worst = 0.0
    count = 120
    for _ in range(count):
        inst = random_instance(rng)
        hosts = {k: inst.candidates(k)[: int(rng.integers(0, len(inst.candidates(k)) + 1))] for k in range(len(inst.catalog))}
        problem = inst.problem(Placement.from_hosts(inst.topology.n, len(inst.catalog), hosts))
        lp = solve_selection(problem, "lp").objective
        near = solve_selection(problem, "uncapacitated").objective
        worst = max(worst, abs(lp - near) / max(near, 1e-300))

    m = 1e9
    topo = make_topology(4, [(0, 1), (0, 2), (2, 3)], caching=[1], users=[0], gateway=3, penalty=1, caps={(1, 0): m / 2})
    cat = ServiceCatalog((ContentItem("a", 1000, 1e6),))
    params = EnergyParams(gamma=1e-9)
    split = Instance.create(topo, cat, spread_demand(cat, [0], n_nodes=4), params)
    sol = solve_selection(split.problem(Placement.from_hosts(4, 1, {0: [1]})), "lp")
    w = split.dist.weights(params.gamma)
    hand, x = vertex_lp_oracle([w[1, 0] * m, w[4, 0] * m], [[m, 0.0]], [m / 2], [[1.0, 1.0]], [1.0])
    split_err = max(abs(sol.rho[0, 1, 0] - 0.5), abs(sol.rho[0, 4, 0] - 0.5), abs(sol.objective - hand) / hand)
    ok = worst <= 1e-9 and split_err <= 1e-6 and np.allclose(x, [0.5, 0.5])
    report(4, "LP equals nearest-server when uncapacitated; 0.5/0.5 split recovered", ok,
           f"{count} instances worst rel err={worst:.2e}; split err={split_err:.2e}")


def test_5_cost_accounting(report):
    rng = np.random.default_rng(55)
    outputs = 0
    bad_sum = bad_verify = 0
    for i in range(40):
        inst = random_instance(rng, capacitated=bool(i % 2))
        counts = fit_counts([1] * len(inst.catalog), inst)
        results = []
        for run in (
            lambda: baseline_origin(inst, "lp"),
            lambda: exhaustive_search(enumerate_space(counts, inst), inst),
            lambda: greedy_placement(counts, inst),
        ):
            try:
                results.append(run())
            except (Infeasible, AllInfeasible):
                pass
        for res in results:
            c = res.cost
            outputs += 1
            if c.total != c.f_e_ca + c.f_e_com + c.f_e_tr + c.gamma * c.f_tr:
                bad_sum += 1
            if not verify_solution(inst.problem(res.placement), res.solution).ok:
                bad_verify += 1
    ok = bad_sum == 0 and bad_verify == 0 and outputs >= 80
    report(5, "total is the exact component sum and every solution verifies", ok,
           f"{outputs} solver outputs, sum mismatches={bad_sum}, verification failures={bad_verify}")


def test_6_closed_form_spot_value(report):
    params = EnergyParams(p_tr_link=0.5, p_tr_node=0.5, p_ca=1.0, t=1.0, gamma=0.0)
    fit = HopLawFit(a=1.0, alpha=1.0, n_nodes=64)
    item = ContentItem("a", 4.0, 1.0)
    n_o = optimal_content_copies(item, fit, params, 64)
    oracle = oracle_copies(item, fit, params, 64)
    ok = n_o == 16.0 and oracle == 16
    report(6, "alpha = 1 substitution gives 16 copies", ok, f"n^o={n_o!r}, oracle={oracle}")


def test_7_hop_law_sanity(report):
    ring = make_topology(8, [(i, (i + 1) % 8) for i in range(8)])
    d1 = measure_avg_distance(ring, 1)
    a, alpha = 0.8, 0.6
    fit = fit_power_law([(n, a * (100 / n) ** alpha) for n in (1, 2, 5, 10, 25, 50)], 100)
    err = max(abs(fit.a - a), abs(fit.alpha - alpha))
    ok = d1 == 2.0 and err < 1e-9
    report(7, "8-ring d(1) and synthetic fit recovery", ok, f"d(1)={d1!r}, fit err={err:.2e}")


def test_8_determinism(report, tmp_path):
    cfg = str(SCENARIOS / "small_exhaustive.json")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    codes = (main(["solve", "--config", cfg, "--out", str(a)]), main(["solve", "--config", cfg, "--out", str(b)]))
    same = a.read_bytes() == b.read_bytes()
    ok = codes == (0, 0) and same and len(a.read_bytes()) > 0
    report(8, "same scenario and seed give byte-identical CSV", ok, f"exit codes={codes}, identical={same}")
