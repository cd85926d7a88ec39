"""EV population sampling, state-of-charge dynamics and availability tracking.

An EV is available while it has not departed and its SOC has not fallen below
the user-specified floor ``soc_min`` (the boundary ``soc == soc_min`` still
counts as available). Once unavailable its discharge rate is forced to zero,
so within a discharging-only run availability is never regained.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional

import numpy as np

if TYPE_CHECKING:  # pragma: no cover - type-only import
    from .topology import AgentId

DEFAULT_KM_PER_KWH = 8.26


@dataclass(frozen=True)
class FleetDistributions:
    """Sampling bounds for a fleet; defaults model commuter EVs on AC level-2."""

    soc: tuple[float, float] = (0.8, 0.9)
    soc_min: tuple[float, float] = (0.1, 0.2)
    capacity_kwh: tuple[float, float] = (15.0, 30.0)
    eta: tuple[float, float] = (0.85, 0.95)
    rate_min_kw: float = 0.0
    rate_max_kw: float = 6.6

    def __post_init__(self) -> None:
        for name in ("soc", "soc_min", "capacity_kwh", "eta"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name}: inverted bounds ({lo}, {hi})")
        if not 0.0 <= self.soc_min[0] <= self.soc_min[1] <= self.soc[0]:
            raise ValueError("soc_min range must sit below the soc range in [0, 1]")
        if self.soc[1] > 1.0:
            raise ValueError("soc upper bound must be <= 1")
        if not 0.0 < self.eta[0] <= self.eta[1] <= 1.0:
            raise ValueError("eta bounds must lie in (0, 1]")
        if not 0.0 <= self.rate_min_kw <= self.rate_max_kw:
            raise ValueError("need 0 <= rate_min_kw <= rate_max_kw")


@dataclass
class EvState:
    """One vehicle's battery and discharge-point state."""

    id: int
    capacity_kwh: float
    soc: float
    soc_min: float
    rate_min_kw: float
    rate_max_kw: float
    eta: float
    neighbor: Optional["AgentId"] = None
    departed: bool = False

    @property
    def available(self) -> bool:
        return not self.departed and self.soc >= self.soc_min

    def energy_kwh(self) -> float:
        return self.soc * self.capacity_kwh


@dataclass
class Fleet:
    """All EVs enrolled in the programme plus the simulation clock."""

    evs: list[EvState]
    time_h: float = 0.0

    def __post_init__(self) -> None:
        ids = [ev.id for ev in self.evs]
        if ids != list(range(len(ids))):
            raise ValueError("EV ids must be dense and ordered from 0")

    def __len__(self) -> int:
        return len(self.evs)


def sample_fleet(n: int, rng, dist: FleetDistributions = FleetDistributions()) -> Fleet:
    """Sample ``n`` EVs; deterministic for a fixed seed."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    rng = np.random.default_rng(rng)
    evs = []
    for i in range(n):
        evs.append(
            EvState(
                id=i,
                capacity_kwh=float(rng.uniform(*dist.capacity_kwh)),
                soc=float(rng.uniform(*dist.soc)),
                soc_min=float(rng.uniform(*dist.soc_min)),
                rate_min_kw=dist.rate_min_kw,
                rate_max_kw=dist.rate_max_kw,
                eta=float(rng.uniform(*dist.eta)),
            )
        )
    return Fleet(evs=evs)


def available_ids(fleet: Fleet) -> list[int]:
    """Ids of EVs currently allowed to discharge, in ascending order."""
    return [ev.id for ev in fleet.evs if ev.available]


def apply_discharge(fleet: Fleet, rate_kw: float, dt_h: float) -> Fleet:
    """Discharge every available EV at the common rate for one time step.

    SOC drops by rate*dt/capacity, floored at zero; EVs whose SOC crosses
    below their floor mid-step keep the step's discharge and become
    unavailable from the next step on. Unavailable EVs are untouched.
    """
    if dt_h <= 0.0:
        raise ValueError(f"dt_h must be > 0, got {dt_h}")
    for ev in fleet.evs:
        if ev.available and not ev.rate_min_kw <= rate_kw <= ev.rate_max_kw:
            raise ValueError(
                f"rate {rate_kw} kW outside [{ev.rate_min_kw}, {ev.rate_max_kw}] for EV {ev.id}"
            )
    for ev in fleet.evs:
        if ev.available:
            ev.soc = max(ev.soc - (rate_kw * dt_h) / ev.capacity_kwh, 0.0)
    fleet.time_h += dt_h
    return fleet


def eta_sum_available(fleet: Fleet) -> float:
    """Sum of conversion efficiencies over available EVs, in ascending id order."""
    return sum(ev.eta for ev in fleet.evs if ev.available)


def grid_power_kw(fleet: Fleet, rate_kw: float) -> float:
    """AC power delivered to the grid: rate times the available efficiency sum."""
    return rate_kw * eta_sum_available(fleet)


def distance_home_km(
    ev: EvState,
    km_per_kwh: float = DEFAULT_KM_PER_KWH,
    basis: str = "reserve",
) -> float:
    """Driving distance covered by the EV's energy floor.

    ``basis="reserve"`` uses the user-specified SOC floor (the energy kept for
    the trip home); ``basis="current"`` uses the present SOC instead.
    """
    if km_per_kwh <= 0.0:
        raise ValueError(f"km_per_kwh must be > 0, got {km_per_kwh}")
    if basis == "reserve":
        soc = ev.soc_min
    elif basis == "current":
        soc = ev.soc
    else:
        raise ValueError(f"unknown basis {basis!r}")
    return soc * ev.capacity_kwh * km_per_kwh


def distance_histogram(
    fleet: Fleet,
    bin_km: float = 10.0,
    km_per_kwh: float = DEFAULT_KM_PER_KWH,
    basis: str = "reserve",
) -> dict[tuple[float, float], int]:
    """Counts of EVs per distance bin [k*bin_km, (k+1)*bin_km)."""
    counts: dict[tuple[float, float], int] = {}
    for ev in fleet.evs:
        d = distance_home_km(ev, km_per_kwh, basis)
        k = int(d // bin_km)
        key = (k * bin_km, (k + 1) * bin_km)
        counts[key] = counts.get(key, 0) + 1
    return dict(sorted(counts.items()))


def export_fleet_snapshot(fleet: Fleet, path) -> None:
    """Write one CSV row per EV: id, soc, availability."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "soc", "available"])
        for ev in fleet.evs:
            writer.writerow([ev.id, repr(ev.soc), int(ev.available)])
