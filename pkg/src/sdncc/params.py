"""Energy and cost-weight parameters."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from importlib import resources
from typing import Any

from sdncc.errors import ConfigError

# scenario-file key -> EnergyParams field
_KEYS = {
    "p_tr_link_j_per_bit": "p_tr_link",
    "p_tr_node_j_per_bit": "p_tr_node",
    "p_ca_w_per_bit": "p_ca",
    "p_static_w_per_vm": "p_static",
    "p_active_j_per_unit": "p_active",
    "t_s": "t",
    "gamma_j_per_bit_hop": "gamma",
    "eta_per_hop": "eta",
}


@dataclass(frozen=True)
class EnergyParams:
    """Power/energy densities, the accounting period and the cost weights.

    Attributes:
        p_tr_link: Link transport energy, J/bit per hop.
        p_tr_node: Router transport energy, J/bit per traversed node.
        p_ca: Caching power density, W/bit.
        p_static: Idle power of one VM copy, W.
        p_active: Energy per workload unit, J.
        t: Accounting period, s.
        gamma: Weight of network usage against energy.
        eta: Latency units per hop.
    """

    p_tr_link: float = 0.15e-8
    p_tr_node: float = 2e-8
    p_ca: float = 0.25e-8
    p_static: float = 50.0
    p_active: float = 1e-9
    t: float = 3600.0
    gamma: float = 1.0
    eta: float = 1.0

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if not value >= 0:
                raise ValueError(f"{f.name} must be non-negative, got {value}")
        if self.t <= 0:
            raise ValueError("t must be positive")

    @property
    def per_hop_weight(self) -> float:
        """Marginal cost of moving one bit one hop further."""
        return self.p_tr_link + self.p_tr_node + self.gamma * self.eta

    def replace(self, **changes: float) -> EnergyParams:
        return replace(self, **changes)

    def to_config(self) -> dict[str, float]:
        values = asdict(self)
        return {key: values[name] for key, name in _KEYS.items()}

    @classmethod
    def from_config(cls, block: dict[str, Any]) -> EnergyParams:
        """Build from a scenario ``energy`` block.

        ``preset`` loads a shipped pack first; the remaining keys override it.
        """
        block = dict(block)
        base: dict[str, Any] = {}
        preset = block.pop("preset", None)
        if preset is not None:
            base = load_preset(preset)
        base.update(block)
        kwargs = {}
        for key, value in base.items():
            if key not in _KEYS:
                raise ConfigError(f"unknown energy key {key!r}", "energy")
            kwargs[_KEYS[key]] = float(value)
        try:
            return cls(**kwargs)
        except ValueError as exc:
            raise ConfigError(str(exc), "energy") from exc


def load_preset(name: str) -> dict[str, Any]:
    try:
        text = resources.files("sdncc.presets").joinpath(f"{name}.json").read_text()
    except FileNotFoundError:
        raise ConfigError(f"no energy preset named {name!r}", "energy.preset") from None
    data = json.loads(text)
    data.pop("_comment", None)
    return data
