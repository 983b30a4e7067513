"""Instance builders and independent oracles shared by the test modules.

The oracles here deliberately avoid sdncc's routing, selection and search
code: distances come from networkx and costs from plain loops.
"""

from __future__ import annotations

import itertools
import math

import networkx as nx
import numpy as np

from sdncc.catalog import ComputationItem, ContentItem, ServiceCatalog, spread_demand
from sdncc.graph import Link, Node, OriginSpec, Topology
from sdncc.params import EnergyParams
from sdncc.search import Instance


def make_topology(n, edges, caching=(), computing=(), users=None, cache_cap=1e15, compute_cap=1e15,
                  link_cap=math.inf, gateway=0, penalty=3, caps=None):
    """Bidirectional topology from an undirected edge list."""
    users = range(n) if users is None else users
    nodes = []
    for v in range(n):
        roles = {"router"}
        if v in users:
            roles.add("user")
        if v in caching:
            roles.add("caching")
        if v in computing:
            roles.add("computing")
        nodes.append(Node(v, frozenset(roles), cache_cap if v in caching else 0.0,
                          compute_cap if v in computing else 0.0))
    links = []
    for i, j in edges:
        c = (caps or {}).get((i, j), link_cap)
        links.append(Link(i, j, c))
        links.append(Link(j, i, (caps or {}).get((j, i), link_cap)))
    return Topology(tuple(nodes), tuple(links), OriginSpec(gateway, penalty))


def random_connected_edges(rng, n, extra=0.3):
    edges = set()
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges.add((u, v))
    for i, j in itertools.combinations(range(n), 2):
        if rng.random() < extra:
            edges.add((i, j))
    return sorted(edges)


def random_instance(rng, n=None, f1=None, f2=None, capacitated=False, params=None):
    """Small random instance with slack links unless ``capacitated``."""
    n = int(rng.integers(3, 6)) if n is None else n
    f1 = int(rng.integers(1, 3)) if f1 is None else f1
    f2 = int(rng.integers(0, 2)) if f2 is None else f2
    edges = random_connected_edges(rng, n)
    caching = [v for v in range(n) if rng.random() < 0.7] or [0]
    computing = [v for v in range(n) if rng.random() < 0.6] or [n - 1]
    contents = tuple(
        ContentItem(f"c{k}", float(rng.uniform(500, 5000)), float(rng.uniform(1e6, 1e7))) for k in range(f1)
    )
    computations = tuple(
        ComputationItem(f"v{k}", float(rng.uniform(500, 5000)), float(rng.uniform(1e9, 1e10)),
                        float(rng.uniform(1e3, 1e4)))
        for k in range(f2)
    )
    catalog = ServiceCatalog(contents, computations)
    sizes = [c.size for c in contents]
    cache_cap = float(rng.uniform(min(sizes), sum(sizes) * 1.2)) if sizes else 0.0
    compute_cap = float(rng.uniform(1e4, 3e4))
    link_cap = math.inf
    if capacitated:
        link_cap = float(catalog.volumes.sum() * rng.uniform(0.3, 1.5))
    topo = make_topology(n, edges, caching, computing, cache_cap=cache_cap, compute_cap=compute_cap,
                         link_cap=link_cap, gateway=int(rng.integers(0, n)), penalty=int(rng.integers(1, 4)))
    users = [v for v in range(n) if rng.random() < 0.8] or [0]
    w = rng.random(len(users))
    demand = spread_demand(catalog, users, w / w.sum(), n)
    params = params or EnergyParams(gamma=float(10 ** rng.uniform(-10, -7)))
    return Instance.create(topo, catalog, demand, params)


def oracle_hops(topology: Topology) -> np.ndarray:
    """(N+1, N) hop matrix via networkx, origin row = gateway + penalty."""
    g = nx.DiGraph()
    g.add_nodes_from(range(topology.n))
    g.add_edges_from((l.src, l.dst) for l in topology.links)
    hop = np.full((topology.n + 1, topology.n), np.inf)
    for s, lengths in nx.all_pairs_shortest_path_length(g):
        for u, d in lengths.items():
            hop[s, u] = d
    hop[topology.n] = hop[topology.origin.gateway] + topology.origin.penalty_hops
    return hop


def _service_cost(inst: Instance, k: int, hosts: tuple[int, ...], hop: np.ndarray) -> float:
    """Per-service cost (storage/VM + transport + gamma*usage) under nearest-server selection."""
    p = inst.params
    n = inst.topology.n
    item = inst.catalog.items[k]
    if inst.catalog.is_content(k):
        fixed = len(hosts) * item.size * p.p_ca * p.t
    else:
        fixed = len(hosts) * p.p_static * p.t + item.popularity * item.workload * p.p_active
    total = fixed
    for u in range(n):
        m = inst.demand.volume[k, u]
        if m <= 0:
            continue
        best = math.inf
        for i in (*hosts, n):
            d = hop[i, u]
            w = p.p_tr_link * d + p.p_tr_node * (d + 1) + p.gamma * p.eta * d
            best = min(best, w)
        total += m * best
    return total


def brute_force(inst: Instance):
    """Minimum cost over every capacity-feasible placement (slack links only).

    Returns (cost, hosts per service). Ties keep the first placement found.
    """
    hop = oracle_hops(inst.topology)
    topo, cat = inst.topology, inst.catalog
    options = []
    for k in range(len(cat)):
        cand = topo.caching_nodes if cat.is_content(k) else topo.computing_nodes
        subsets = [s for r in range(len(cand) + 1) for s in itertools.combinations(sorted(cand), r)]
        options.append([(s, _service_cost(inst, k, s, hop)) for s in subsets])
    best = (math.inf, None)
    for combo in itertools.product(*options):
        cache_used = [0.0] * topo.n
        comp_used = [0.0] * topo.n
        for k, (hosts, _) in enumerate(combo):
            item = cat.items[k]
            for v in hosts:
                if cat.is_content(k):
                    cache_used[v] += item.size
                else:
                    comp_used[v] += item.workload
        if any(cache_used[v] > topo.nodes[v].cache_capacity for v in range(topo.n)):
            continue
        if any(comp_used[v] > topo.nodes[v].compute_capacity for v in range(topo.n)):
            continue
        cost = sum(c for _, c in combo)
        if cost < best[0]:
            best = (cost, [hosts for hosts, _ in combo])
    return best


def vertex_lp_oracle(c, a_ub, b_ub, a_eq, b_eq, bounds=(0.0, 1.0)):
    """Minimize c.x by enumerating the vertices of a tiny polytope."""
    c = np.asarray(c, float)
    nvar = len(c)
    rows, rhs = [], []
    for row, b in zip(a_ub, b_ub):
        rows.append(row)
        rhs.append(b)
    lo, hi = bounds
    for j in range(nvar):
        e = np.zeros(nvar)
        e[j] = 1.0
        rows.append(e)
        rhs.append(hi)
        rows.append(-e)
        rhs.append(-lo)
    rows, rhs = np.array(rows, float), np.array(rhs, float)
    a_eq, b_eq = np.atleast_2d(np.asarray(a_eq, float)), np.asarray(b_eq, float)
    best = (math.inf, None)
    free = nvar - a_eq.shape[0]
    for active in itertools.combinations(range(len(rows)), free):
        system = np.vstack([a_eq, rows[list(active)]])
        target = np.concatenate([b_eq, rhs[list(active)]])
        if abs(np.linalg.det(system)) < 1e-12:
            continue
        x = np.linalg.solve(system, target)
        if np.all(rows @ x <= rhs + 1e-12) and np.allclose(a_eq @ x, b_eq):
            val = float(c @ x)
            if val < best[0]:
                best = (val, x)
    return best
