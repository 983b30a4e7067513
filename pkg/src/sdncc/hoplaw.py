"""Average distance to the nearest of n servers, fitted as d(n) = A * (N/n)**alpha."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from sdncc.errors import DegenerateFit, InsufficientSamples, InvalidN
from sdncc.graph import Topology, all_pairs_hops

EXACT_LIMIT = 1000


@dataclass(frozen=True)
class HopLawFit:
    a: float
    alpha: float
    n_nodes: int
    residual: float = 0.0
    samples: tuple[tuple[int, float], ...] = field(default=(), repr=False)

    def __post_init__(self) -> None:
        if not (self.a > 0 and self.alpha > 0):
            raise DegenerateFit(f"need A > 0 and alpha > 0, got A={self.a}, alpha={self.alpha}")

    def predict(self, n):
        """Average hop distance with ``n`` servers (scalar or array)."""
        d = self.a * (self.n_nodes / np.asarray(n, dtype=float)) ** self.alpha
        return float(d) if d.ndim == 0 else d


def _mean_nearest(hop: np.ndarray, subset: Sequence[int]) -> float:
    return float(hop[list(subset)].min(axis=0).mean())


def measure_avg_distance(
    topology: Topology,
    n: int,
    num_samples: int = 100,
    seed: int = 0,
    candidates: Sequence[int] | None = None,
    hop: np.ndarray | None = None,
) -> float:
    """Mean over all nodes of the hop distance to the nearest of ``n`` random servers.

    Server sets are uniform n-subsets of ``candidates`` (all nodes by
    default). All subsets are enumerated when there are at most 1000 of
    them; otherwise ``num_samples`` are drawn from a generator seeded by
    ``(seed, n)`` so each n is reproducible on its own.

    Raises:
        InvalidN: n outside [1, len(candidates)].
    """
    cand = list(range(topology.n)) if candidates is None else sorted(candidates)
    if not 1 <= n <= len(cand):
        raise InvalidN(f"n={n} outside [1, {len(cand)}]")
    if hop is None:
        hop = all_pairs_hops(topology).hop[: topology.n]
    if (hop[cand] < 0).any():
        raise InvalidN("some candidate server cannot reach every node")
    if math.comb(len(cand), n) <= EXACT_LIMIT:
        values = [_mean_nearest(hop, s) for s in itertools.combinations(cand, n)]
        return float(np.mean(values))
    rng = np.random.default_rng([seed, n])
    values = [_mean_nearest(hop, rng.choice(cand, size=n, replace=False)) for _ in range(num_samples)]
    return float(np.mean(values))


def fit_power_law(samples: Sequence[tuple[float, float]], n_nodes: int) -> HopLawFit:
    """Least-squares fit of log d = log A + alpha * log(N/n).

    Points with d = 0 are dropped before the log transform.

    Raises:
        InsufficientSamples: fewer than two points with d > 0 and distinct n.
        DegenerateFit: the fitted exponent is not positive.
    """
    pts = sorted((float(n), float(d)) for n, d in samples if d > 0)
    if len({n for n, _ in pts}) < 2:
        raise InsufficientSamples("need at least two samples with d > 0 at distinct n")
    x = np.log(n_nodes / np.array([n for n, _ in pts]))
    y = np.log(np.array([d for _, d in pts]))
    design = np.column_stack([np.ones_like(x), x])
    (log_a, alpha), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ np.array([log_a, alpha])
    rms = float(np.sqrt(np.mean(resid**2)))
    if not (np.isfinite(alpha) and alpha > 0):
        raise DegenerateFit(f"fitted exponent {alpha} is not positive")
    return HopLawFit(
        float(math.exp(log_a)),
        float(alpha),
        n_nodes,
        rms,
        tuple(sorted((int(n), float(d)) for n, d in samples)),
    )


def default_sample_points(n_nodes: int, max_fraction: float = 0.5) -> list[int]:
    """Roughly geometric n values in [1, max_fraction*N]."""
    top = max(2, int(n_nodes * max_fraction))
    points = {1, top}
    v = 1
    while v < top:
        points.add(v)
        v *= 2
    return sorted(p for p in points if p <= n_nodes)


def fit_topology(
    topology: Topology,
    points: Sequence[int] | None = None,
    num_samples: int = 100,
    seed: int = 0,
    max_fraction: float = 0.5,
) -> HopLawFit:
    """Measure d(n) at ``points`` (default: geometric up to N/2) and fit the power law."""
    hop = all_pairs_hops(topology).hop[: topology.n]
    points = default_sample_points(topology.n, max_fraction) if points is None else points
    samples = [(n, measure_avg_distance(topology, n, num_samples, seed, hop=hop)) for n in points]
    return fit_power_law(samples, topology.n)
