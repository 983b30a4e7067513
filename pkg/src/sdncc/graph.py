"""Network graph, hop distances, single-path routing and link loads.

Node ids are dense integers ``0..N-1``. The virtual origin server gets id
``N`` and reaches the physical graph through one uncapacitated uplink to its
gateway node; that uplink is link id ``len(links)`` in every routing matrix.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
from scipy import sparse

from sdncc.errors import DisconnectedGraph, InvalidSpec
from sdncc.params import EnergyParams

ROLES = frozenset({"router", "user", "caching", "computing"})


@dataclass(frozen=True)
class Node:
    id: int
    roles: frozenset[str] = frozenset({"router", "user"})
    cache_capacity: float = 0.0
    compute_capacity: float = 0.0

    def __post_init__(self) -> None:
        unknown = set(self.roles) - ROLES
        if unknown:
            raise InvalidSpec(f"node {self.id}: unknown roles {sorted(unknown)}")
        if self.cache_capacity < 0 or self.compute_capacity < 0:
            raise InvalidSpec(f"node {self.id}: negative capacity")


@dataclass(frozen=True)
class Link:
    """Directed link. ``capacity`` is bits per accounting period; inf = unlimited."""

    src: int
    dst: int
    capacity: float = math.inf

    def __post_init__(self) -> None:
        if not self.capacity > 0:
            raise InvalidSpec(f"link {self.src}->{self.dst}: capacity must be positive")


@dataclass(frozen=True)
class OriginSpec:
    gateway: int = 0
    penalty_hops: int = 3


@dataclass(frozen=True)
class Topology:
    nodes: tuple[Node, ...]
    links: tuple[Link, ...]
    origin: OriginSpec = OriginSpec()

    def __post_init__(self) -> None:
        for idx, node in enumerate(self.nodes):
            if node.id != idx:
                raise InvalidSpec(f"node ids must be dense 0..N-1, got {node.id} at {idx}")
        n = len(self.nodes)
        if n == 0:
            raise InvalidSpec("topology has no nodes")
        for link in self.links:
            if not (0 <= link.src < n and 0 <= link.dst < n):
                raise InvalidSpec(f"link {link.src}->{link.dst} refers to a missing node")
            if link.src == link.dst:
                raise InvalidSpec(f"self-loop on node {link.src}")
        if not 0 <= self.origin.gateway < n:
            raise InvalidSpec(f"origin gateway {self.origin.gateway} is not a node")
        if self.origin.penalty_hops < 0:
            raise InvalidSpec("origin penalty_hops must be non-negative")

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def origin_id(self) -> int:
        return len(self.nodes)

    @property
    def origin_link(self) -> int:
        return len(self.links)

    def with_role(self, role: str) -> list[int]:
        return [node.id for node in self.nodes if role in node.roles]

    @property
    def users(self) -> list[int]:
        return self.with_role("user")

    @property
    def caching_nodes(self) -> list[int]:
        return self.with_role("caching")

    @property
    def computing_nodes(self) -> list[int]:
        return self.with_role("computing")

    @property
    def capacities(self) -> np.ndarray:
        """Link capacities including the origin uplink (last entry, inf)."""
        return np.array([link.capacity for link in self.links] + [math.inf])

    def with_servers(
        self,
        caching: Iterable[int],
        computing: Iterable[int],
        cache_capacity: float | None = None,
        compute_capacity: float | None = None,
    ) -> Topology:
        """Copy with the caching/computing roles reassigned.

        Capacities of newly promoted nodes are set when given; demoted nodes
        keep their capacity numbers but lose the role.
        """
        caching, computing = set(caching), set(computing)
        nodes = []
        for node in self.nodes:
            roles = set(node.roles) - {"caching", "computing"}
            cache_cap, comp_cap = node.cache_capacity, node.compute_capacity
            if node.id in caching:
                roles.add("caching")
                if cache_capacity is not None:
                    cache_cap = cache_capacity
            if node.id in computing:
                roles.add("computing")
                if compute_capacity is not None:
                    comp_cap = compute_capacity
            nodes.append(Node(node.id, frozenset(roles), cache_cap, comp_cap))
        return Topology(tuple(nodes), self.links, self.origin)

    def to_dict(self) -> dict[str, Any]:
        return {
            "nodes": [
                {
                    "id": node.id,
                    "roles": sorted(node.roles),
                    "cache_capacity_bits": node.cache_capacity,
                    "compute_capacity_units": node.compute_capacity,
                }
                for node in self.nodes
            ],
            "links": [
                {
                    "src": link.src,
                    "dst": link.dst,
                    "capacity_bits": None if math.isinf(link.capacity) else link.capacity,
                }
                for link in self.links
            ],
            "origin": {"gateway": self.origin.gateway, "penalty_hops": self.origin.penalty_hops},
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Topology:
        try:
            nodes = tuple(
                Node(
                    int(rec["id"]),
                    frozenset(rec.get("roles", ["router", "user"])),
                    float(rec.get("cache_capacity_bits", 0.0)),
                    float(rec.get("compute_capacity_units", 0.0)),
                )
                for rec in sorted(data["nodes"], key=lambda rec: int(rec["id"]))
            )
            links = tuple(
                Link(
                    int(rec["src"]),
                    int(rec["dst"]),
                    math.inf if rec.get("capacity_bits") is None else float(rec["capacity_bits"]),
                )
                for rec in data["links"]
            )
            origin = OriginSpec(**data.get("origin", {}))
        except (KeyError, TypeError) as exc:
            raise InvalidSpec(f"malformed topology record: {exc}") from exc
        return cls(nodes, links, origin)

    @classmethod
    def load(cls, path: str | Path) -> Topology:
        return cls.from_dict(json.loads(Path(path).read_text()))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def _adjacency(topology: Topology) -> list[list[tuple[int, int]]]:
    """Out-neighbours per node as sorted (dst, link_id); parallel links keep the lowest id."""
    best: dict[tuple[int, int], int] = {}
    for lid, link in enumerate(topology.links):
        key = (link.src, link.dst)
        if key not in best:
            best[key] = lid
    adj: list[list[tuple[int, int]]] = [[] for _ in range(topology.n)]
    for (src, dst), lid in best.items():
        adj[src].append((dst, lid))
    for out in adj:
        out.sort()
    return adj


def _bfs(adj: list[list[tuple[int, int]]], source: int) -> tuple[np.ndarray, np.ndarray]:
    """Hop counts and parent links from ``source``.

    Neighbours are expanded in increasing id order and a node keeps the first
    parent that discovers it, which makes the parent chain the
    lexicographically smallest shortest node sequence.
    """
    n = len(adj)
    hops = np.full(n, -1, dtype=np.int64)
    parent_link = np.full(n, -1, dtype=np.int64)
    hops[source] = 0
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w, lid in adj[v]:
            if hops[w] < 0:
                hops[w] = hops[v] + 1
                parent_link[w] = lid
                queue.append(w)
    return hops, parent_link


@dataclass(frozen=True)
class DistanceTable:
    """Server-to-node distances. Rows are servers (origin last), columns nodes."""

    hop: np.ndarray
    latency: np.ndarray
    per_bit_energy: np.ndarray

    @classmethod
    def from_hops(cls, hop: np.ndarray, params: EnergyParams) -> DistanceTable:
        hop = np.asarray(hop)
        h = np.where(hop < 0, 0, hop).astype(float)
        latency = np.where(hop < 0, np.inf, params.eta * h)
        per_bit = np.where(hop < 0, np.inf, params.p_tr_link * h + params.p_tr_node * (h + 1))
        return cls(hop, latency, per_bit)

    def weights(self, gamma: float) -> np.ndarray:
        """Per-bit objective weight a + gamma*D for every (server, user)."""
        return self.per_bit_energy + gamma * self.latency


def _check_reachable(topology: Topology, hops: np.ndarray) -> None:
    users = topology.users
    sources = {topology.origin.gateway, *topology.caching_nodes, *topology.computing_nodes}
    for s in sorted(sources):
        missing = [u for u in users if hops[s, u] < 0]
        if missing:
            what = "origin" if s == topology.origin.gateway else f"server {s}"
            raise DisconnectedGraph(f"users {missing[:5]} unreachable from {what}")


def all_pairs_hops(topology: Topology, params: EnergyParams | None = None) -> DistanceTable:
    """Minimum hop counts from every node and from the origin to every node.

    The origin row is the gateway row plus ``penalty_hops``. Pairs that are
    not connected (neither end being a user that needs service) hold -1.

    Raises:
        DisconnectedGraph: a user is unreachable from the origin or a server.
    """
    params = params or EnergyParams()
    adj = _adjacency(topology)
    n = topology.n
    hop = np.empty((n + 1, n), dtype=np.int64)
    for s in range(n):
        hop[s], _ = _bfs(adj, s)
    _check_reachable(topology, hop)
    gw = hop[topology.origin.gateway]
    hop[n] = np.where(gw >= 0, gw + topology.origin.penalty_hops, -1)
    return DistanceTable.from_hops(hop, params)


@dataclass(frozen=True)
class RoutingMatrix:
    """Single-path routing. ``paths[(i, u)]`` is the ordered link ids from server i to u."""

    n_nodes: int
    n_links: int
    paths: dict[tuple[int, int], tuple[int, ...]] = field(repr=False)

    def fraction(self, link: int, server: int, user: int) -> float:
        return 1.0 if link in self.paths.get((server, user), ()) else 0.0

    def incidence(self) -> sparse.csr_matrix:
        """Sparse (links, servers*users) 0/1 matrix; column index ``i*N + u``."""
        rows, cols = [], []
        n = self.n_nodes
        for (i, u), path in self.paths.items():
            rows.extend(path)
            cols.extend([i * n + u] * len(path))
        data = np.ones(len(rows))
        return sparse.csr_matrix((data, (rows, cols)), shape=(self.n_links, (n + 1) * n))


def build_routing(topology: Topology, dist: DistanceTable | None = None) -> RoutingMatrix:
    """Pick one shortest path per (server, user) with a lexicographic tie-break.

    Paths are built for every physical source node and for the origin; the
    origin path is its uplink followed by the gateway's path.
    """
    adj = _adjacency(topology)
    n = topology.n
    links = topology.links
    paths: dict[tuple[int, int], tuple[int, ...]] = {}
    trees = []
    for s in range(n):
        hops, parent = _bfs(adj, s)
        trees.append(parent)
        if dist is not None and not np.array_equal(hops, dist.hop[s]):
            raise ValueError("distance table does not belong to this topology")
        for u in range(n):
            if hops[u] < 0:
                continue
            path = []
            v = u
            while v != s:
                lid = int(parent[v])
                path.append(lid)
                v = links[lid].src
            paths[(s, u)] = tuple(reversed(path))
    gw = topology.origin.gateway
    for u in range(n):
        if (gw, u) in paths:
            paths[(n, u)] = (topology.origin_link, *paths[(gw, u)])
    if not paths.keys() >= {(topology.origin_id, u) for u in topology.users}:
        raise DisconnectedGraph("some user is unreachable from the origin")
    return RoutingMatrix(n, len(links) + 1, paths)


def conservation_residual(topology: Topology, routing: RoutingMatrix, server: int, user: int) -> float:
    """Largest per-node violation of flow conservation for one (server, user) path.

    Net outflow must be 1 at the server, -1 at the user and 0 elsewhere
    (all zero when the server is the user's own node).
    """
    n = topology.n
    net = np.zeros(n + 1)
    for lid in routing.paths[(server, user)]:
        if lid == topology.origin_link:
            src, dst = topology.origin_id, topology.origin.gateway
        else:
            src, dst = topology.links[lid].src, topology.links[lid].dst
        net[src] += 1.0
        net[dst] -= 1.0
    expected = np.zeros(n + 1)
    if server != user:
        expected[server] += 1.0
        expected[user] -= 1.0
    return float(np.max(np.abs(net - expected)))


@dataclass(frozen=True)
class LinkLoadReport:
    loads: np.ndarray
    capacities: np.ndarray

    @property
    def overloaded(self) -> list[int]:
        return [int(l) for l in np.nonzero(self.loads > self.capacities)[0]]

    @property
    def max_relative_excess(self) -> float:
        finite = np.isfinite(self.capacities)
        if not finite.any():
            return 0.0
        excess = (self.loads[finite] - self.capacities[finite]) / self.capacities[finite]
        return float(max(0.0, excess.max()))


def link_loads(routing: RoutingMatrix, traffic: np.ndarray, capacities: Sequence[float] | None = None) -> LinkLoadReport:
    """Total traffic per link.

    Args:
        routing: Routing matrix of the topology.
        traffic: Per (server, user) volumes, shape (N+1, N), or with a leading
            service axis (K, N+1, N) that is summed out.
        capacities: Link capacities incl. the origin uplink; defaults to inf.
    """
    traffic = np.asarray(traffic, dtype=float)
    if traffic.ndim == 3:
        traffic = traffic.sum(axis=0)
    loads = routing.incidence() @ traffic.ravel()
    caps = np.full(routing.n_links, math.inf) if capacities is None else np.asarray(capacities, dtype=float)
    return LinkLoadReport(loads, caps)


# --- generators -------------------------------------------------------------


@dataclass(frozen=True)
class TopologyGenSpec:
    """Recipe for a synthetic topology.

    ``kind`` is ring, grid or waxman. Every node is a router and a user.
    Caching/computing roles go to the first ``caching_nodes`` /
    ``computing_nodes`` nodes of ``server_order`` (degree: highest degree
    first, ties by id; id: ascending id).
    """

    kind: str = "waxman"
    n: int = 64
    rows: int = 0
    cols: int = 0
    seed: int = 0
    waxman_alpha: float = 0.15
    waxman_beta: float = 0.4
    link_capacity_bits: float | None = None
    caching_nodes: int = 0
    computing_nodes: int = 0
    server_order: str = "degree"
    cache_capacity_bits: float = 0.0
    compute_capacity_units: float = 0.0
    gateway: int | str = "center"
    penalty_hops: int = 3

    @classmethod
    def from_config(cls, block: dict[str, Any]) -> TopologyGenSpec:
        names = set(cls.__dataclass_fields__)
        unknown = set(block) - names
        if unknown:
            raise InvalidSpec(f"unknown generator keys {sorted(unknown)}")
        return cls(**block)


def _ring_edges(n: int) -> list[tuple[int, int]]:
    if n < 3:
        raise InvalidSpec("ring needs at least 3 nodes")
    return [(i, (i + 1) % n) for i in range(n)]


def _grid_edges(rows: int, cols: int) -> list[tuple[int, int]]:
    if rows < 1 or cols < 1 or rows * cols < 2:
        raise InvalidSpec("grid needs rows, cols >= 1 and at least 2 nodes")
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1))
            if r + 1 < rows:
                edges.append((v, v + cols))
    return edges


def _waxman_edges(n: int, alpha: float, beta: float, seed: int) -> list[tuple[int, int]]:
    """Waxman random graph in the unit square, patched to be connected.

    Components are joined by the shortest Euclidean edge between the
    component holding node 0 and the rest, until one component remains.
    """
    if n < 2:
        raise InvalidSpec("waxman needs at least 2 nodes")
    if not (alpha > 0 and 0 < beta <= 1):
        raise InvalidSpec("waxman needs alpha > 0 and 0 < beta <= 1")
    rng = np.random.default_rng(seed)
    pos = rng.random((n, 2))
    dist = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
    span = dist.max()
    prob = beta * np.exp(-dist / (alpha * span))
    draws = rng.random((n, n))
    iu, ju = np.triu_indices(n, k=1)
    keep = draws[iu, ju] < prob[iu, ju]
    edges = {(int(i), int(j)) for i, j in zip(iu[keep], ju[keep])}

    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in edges:
        parent[find(i)] = find(j)
    while True:
        root0 = find(0)
        inside = np.array([find(v) == root0 for v in range(n)])
        if inside.all():
            break
        sub = np.where(inside[:, None] & ~inside[None, :], dist, np.inf)
        i, j = np.unravel_index(int(np.argmin(sub)), sub.shape)
        edges.add((min(int(i), int(j)), max(int(i), int(j))))
        parent[find(int(i))] = find(int(j))
    return sorted(edges)


def _order_nodes(n: int, edges: list[tuple[int, int]], how: str) -> list[int]:
    if how == "id":
        return list(range(n))
    if how == "degree":
        degree = [0] * n
        for i, j in edges:
            degree[i] += 1
            degree[j] += 1
        return sorted(range(n), key=lambda v: (-degree[v], v))
    raise InvalidSpec(f"unknown server_order {how!r}")


def _center(n: int, edges: list[tuple[int, int]]) -> int:
    """Node with the smallest total hop distance to all others (lowest id on ties)."""
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for i, j in edges:
        adj[i].append((j, -1))
        adj[j].append((i, -1))
    totals = [int(_bfs(adj, s)[0].sum()) for s in range(n)]
    return min(range(n), key=lambda v: (totals[v], v))


def server_ranking(topology: Topology, how: str = "degree") -> list[int]:
    """Nodes ranked for server promotion, same rule the generator uses."""
    edges = sorted({(min(l.src, l.dst), max(l.src, l.dst)) for l in topology.links})
    return _order_nodes(topology.n, edges, how)


def generate_topology(spec: TopologyGenSpec) -> Topology:
    """Build a synthetic bidirectional topology from ``spec``.

    Deterministic: equal generator settings (seed included) always give
    the same topology.

    Raises:
        InvalidSpec: unknown generator, bad size or role counts.
    """
    if spec.kind == "ring":
        n, edges = spec.n, _ring_edges(spec.n)
    elif spec.kind == "grid":
        n, edges = spec.rows * spec.cols, _grid_edges(spec.rows, spec.cols)
    elif spec.kind == "waxman":
        n, edges = spec.n, _waxman_edges(spec.n, spec.waxman_alpha, spec.waxman_beta, spec.seed)
    else:
        raise InvalidSpec(f"unknown generator {spec.kind!r}")
    if not (0 <= spec.caching_nodes <= n and 0 <= spec.computing_nodes <= n):
        raise InvalidSpec("server counts must lie in [0, N]")

    order = _order_nodes(n, edges, spec.server_order)
    caching = set(order[: spec.caching_nodes])
    computing = set(order[: spec.computing_nodes])
    nodes = []
    for v in range(n):
        roles = {"router", "user"}
        if v in caching:
            roles.add("caching")
        if v in computing:
            roles.add("computing")
        nodes.append(
            Node(
                v,
                frozenset(roles),
                spec.cache_capacity_bits if v in caching else 0.0,
                spec.compute_capacity_units if v in computing else 0.0,
            )
        )
    cap = math.inf if spec.link_capacity_bits is None else float(spec.link_capacity_bits)
    links = []
    for i, j in edges:
        links.append(Link(i, j, cap))
        links.append(Link(j, i, cap))
    if spec.gateway == "center":
        gateway = _center(n, edges)
    elif isinstance(spec.gateway, int):
        gateway = spec.gateway
    else:
        raise InvalidSpec(f"gateway must be a node id or 'center', got {spec.gateway!r}")
    return Topology(tuple(nodes), tuple(links), OriginSpec(gateway, spec.penalty_hops))
