"""Service catalog (contents and computations) and per-user demand."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from sdncc.errors import InvalidSpec, NoUsers


@dataclass(frozen=True)
class ContentItem:
    """A cacheable content: ``popularity`` requests per period, ``size`` bits."""

    id: str
    popularity: float
    size: float

    def __post_init__(self) -> None:
        if not self.popularity >= 0:
            raise InvalidSpec(f"content {self.id}: popularity must be >= 0")
        if not self.size > 0:
            raise InvalidSpec(f"content {self.id}: size must be > 0")

    @property
    def volume(self) -> float:
        return self.popularity * self.size


@dataclass(frozen=True)
class ComputationItem:
    """A computation service.

    ``data_volume`` is the bits exchanged per request and is what travels
    over the network; ``workload`` only feeds computing energy and the
    compute-capacity check.
    """

    id: str
    popularity: float
    data_volume: float
    workload: float

    def __post_init__(self) -> None:
        if not self.popularity >= 0:
            raise InvalidSpec(f"computation {self.id}: popularity must be >= 0")
        if not (self.data_volume > 0 and self.workload > 0):
            raise InvalidSpec(f"computation {self.id}: data_volume and workload must be > 0")

    @property
    def volume(self) -> float:
        return self.popularity * self.data_volume


@dataclass(frozen=True)
class ServiceCatalog:
    """Contents followed by computations; service index k follows that order."""

    contents: tuple[ContentItem, ...] = ()
    computations: tuple[ComputationItem, ...] = ()

    def __post_init__(self) -> None:
        ids = [item.id for item in self.items]
        if len(ids) != len(set(ids)):
            raise InvalidSpec("service ids must be unique across contents and computations")

    @property
    def items(self) -> tuple[ContentItem | ComputationItem, ...]:
        return (*self.contents, *self.computations)

    @property
    def f1(self) -> int:
        return len(self.contents)

    @property
    def f2(self) -> int:
        return len(self.computations)

    def __len__(self) -> int:
        return self.f1 + self.f2

    def is_content(self, k: int) -> bool:
        return k < self.f1

    @property
    def volumes(self) -> np.ndarray:
        """Network volume per service over the period, bits."""
        return np.array([item.volume for item in self.items], dtype=float)

    def to_dict(self) -> dict[str, Any]:
        return {
            "contents": [
                {"id": c.id, "popularity": c.popularity, "size_bits": c.size} for c in self.contents
            ],
            "computations": [
                {
                    "id": c.id,
                    "popularity": c.popularity,
                    "data_bits": c.data_volume,
                    "workload_units": c.workload,
                }
                for c in self.computations
            ],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ServiceCatalog:
        try:
            contents = tuple(
                ContentItem(str(r["id"]), float(r["popularity"]), float(r["size_bits"]))
                for r in data.get("contents", [])
            )
            computations = tuple(
                ComputationItem(
                    str(r["id"]),
                    float(r["popularity"]),
                    float(r["data_bits"]),
                    float(r["workload_units"]),
                )
                for r in data.get("computations", [])
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidSpec(f"malformed catalog record: {exc}") from exc
        return cls(contents, computations)


def zipf_weights(count: int, exponent: float) -> np.ndarray:
    """Normalized rank^-exponent weights for ranks 1..count."""
    ranks = np.arange(1, count + 1, dtype=float)
    w = ranks ** -exponent
    return w / w.sum()


def _draw(spec: Any, rng: np.random.Generator, count: int, name: str) -> np.ndarray:
    """A constant, or a ``{"low", "high"}`` uniform range."""
    if isinstance(spec, (int, float)):
        return np.full(count, float(spec))
    if isinstance(spec, dict) and set(spec) == {"low", "high"}:
        low, high = float(spec["low"]), float(spec["high"])
        if not 0 < low <= high:
            raise InvalidSpec(f"{name}: need 0 < low <= high")
        return rng.uniform(low, high, size=count)
    raise InvalidSpec(f"{name}: expected a number or {{low, high}}, got {spec!r}")


def zipf_catalog(
    f1: int,
    f2: int,
    total_requests: float,
    zipf_exponent: float,
    size_spec: dict[str, Any],
    seed: int,
) -> ServiceCatalog:
    """Generate a catalog with Zipf popularity.

    Contents and computations each get ``total_requests`` split by
    rank^-exponent. ``size_spec`` keys:

    - ``demand_bps`` with ``period_s``: every service carries exactly that
      rate, so sizes are ``demand_bps * period_s / popularity``;
    - otherwise ``content_bits`` and ``data_bits`` (number or {low, high});
    - ``workload_units`` per computation request (number or {low, high}).

    Raises:
        InvalidSpec: negative counts/exponent or a malformed size_spec.
    """
    if f1 < 0 or f2 < 0:
        raise InvalidSpec("service counts must be non-negative")
    if not zipf_exponent >= 0:
        raise InvalidSpec("zipf exponent must be non-negative")
    if not total_requests > 0:
        raise InvalidSpec("total_requests must be positive")
    known = {"demand_bps", "period_s", "content_bits", "data_bits", "workload_units"}
    if set(size_spec) - known:
        raise InvalidSpec(f"unknown size_spec keys {sorted(set(size_spec) - known)}")

    rng = np.random.default_rng(seed)
    lam_a = total_requests * zipf_weights(f1, zipf_exponent) if f1 else np.empty(0)
    lam_b = total_requests * zipf_weights(f2, zipf_exponent) if f2 else np.empty(0)

    if "demand_bps" in size_spec:
        per_service = float(size_spec["demand_bps"]) * float(size_spec.get("period_s", 3600.0))
        sizes_a = per_service / lam_a
        sizes_b = per_service / lam_b
    else:
        sizes_a = _draw(size_spec.get("content_bits", 8e6), rng, f1, "content_bits")
        sizes_b = _draw(size_spec.get("data_bits", 8e6), rng, f2, "data_bits")
    workloads = _draw(size_spec.get("workload_units", 1e9), rng, f2, "workload_units")

    contents = tuple(ContentItem(f"c{k}", float(lam_a[k]), float(sizes_a[k])) for k in range(f1))
    computations = tuple(
        ComputationItem(f"v{k}", float(lam_b[k]), float(sizes_b[k]), float(workloads[k]))
        for k in range(f2)
    )
    return ServiceCatalog(contents, computations)


@dataclass(frozen=True)
class DemandMatrix:
    """Demand volume per (service, node) over the period, bits.

    Columns are indexed by node id; nodes that are not users hold zeros.
    """

    volume: np.ndarray
    users: tuple[int, ...]

    @property
    def total(self) -> float:
        return float(self.volume.sum())


def spread_demand(
    catalog: ServiceCatalog,
    users: Sequence[int],
    weights: Sequence[float] | None = None,
    n_nodes: int | None = None,
) -> DemandMatrix:
    """Split each service's volume over ``users`` by ``weights`` (uniform if None).

    Raises:
        NoUsers: ``users`` is empty.
        InvalidSpec: duplicate or out-of-range users, or weights that have the
            wrong length, are negative or do not sum to 1.
    """
    users = tuple(int(u) for u in users)
    if not users:
        raise NoUsers("demand needs at least one user")
    if len(set(users)) != len(users):
        raise InvalidSpec("users must be distinct")
    if min(users) < 0 or (n_nodes is not None and max(users) >= n_nodes):
        raise InvalidSpec(f"user ids must lie in [0, {n_nodes})")
    if weights is None:
        w = np.full(len(users), 1.0 / len(users))
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (len(users),) or (w < 0).any():
            raise InvalidSpec("weights must be one non-negative value per user")
        if abs(w.sum() - 1.0) > 1e-9:
            raise InvalidSpec(f"weights sum to {w.sum()}, expected 1")
    n_nodes = max(users) + 1 if n_nodes is None else n_nodes
    volume = np.zeros((len(catalog), n_nodes))
    volume[:, list(users)] = np.outer(catalog.volumes, w)
    return DemandMatrix(volume, users)
