"""Additive-split data shuffling: mask private cost values, preserve totals.

Each agent splits every evaluated cost value into two shares that sum back to
the original, sends one share to a neighbour, keeps the other, and adds in
whatever shares it received. The coordinator then only ever sees locally
aggregated (masked) values, while the per-candidate sum over all agents is
unchanged, so the selected argmin is too.

The wire format is fixed-point: values are quantized to integer multiples of
2**-unit_bits on entry and all splitting/aggregation runs on (numpy) int64,
which makes conservation exact rather than subject to float rounding drift.
Quantized units convert back to float exactly, so totals agree bit-for-bit
with and without shuffling.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .topology import AgentId, Envelope, NeighborMap, deliver_round

DEFAULT_UNIT_BITS = 40


class ProtocolError(RuntimeError):
    """Agents disagree on the candidate keys or a report is incomplete."""


def to_units(value: float, unit_bits: int = DEFAULT_UNIT_BITS) -> int:
    """Quantize a currency value to integer grid units."""
    return int(round(value * (1 << unit_bits)))


def from_units(units: int, unit_bits: int = DEFAULT_UNIT_BITS) -> float:
    """Exact float value of integer grid units (scaling by a power of two)."""
    return float(units) * 2.0 ** -unit_bits


def to_units_array(values: np.ndarray, unit_bits: int = DEFAULT_UNIT_BITS) -> np.ndarray:
    return np.rint(np.asarray(values, dtype=float) * float(1 << unit_bits)).astype(np.int64)


def from_units_array(units: np.ndarray, unit_bits: int = DEFAULT_UNIT_BITS) -> np.ndarray:
    return np.asarray(units, dtype=float) * 2.0 ** -unit_bits


@dataclass(frozen=True)
class CandidateMapping:
    """One (broadcast candidate rate, evaluated-or-masked cost) pair."""

    index: int
    rate_kw: float
    value: float


@dataclass(frozen=True)
class SplitShares:
    """Two additive shares of one cost value; keep + send == the value."""

    keep: float
    send: float


def split_units(units: int, rng, fraction: float | None = None) -> tuple[int, int]:
    """Split integer units into (keep, send); ``fraction`` is the kept share
    of the value, drawn uniformly on [0, 1] unless forced. Fraction 1.0 is the
    identity split (keep everything, send nothing)."""
    if fraction is None:
        fraction = float(rng.random())
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must be in [0, 1], got {fraction}")
    keep = int(round(fraction * units))
    return keep, units - keep


def split_value(
    value: float,
    rng,
    fraction: float | None = None,
    unit_bits: int = DEFAULT_UNIT_BITS,
) -> SplitShares:
    """Split a currency value into two shares summing exactly to its
    quantized representation (exact for values already on the unit grid)."""
    units = to_units(value, unit_bits)
    keep, send = split_units(units, rng, fraction)
    return SplitShares(keep=from_units(keep, unit_bits), send=from_units(send, unit_bits))


def masking_check(original, masked) -> bool:
    """True iff the shuffled value no longer equals the original."""
    return bool(masked != original)


def _validated_matrix(values_by_agent: Mapping[AgentId, np.ndarray]) -> tuple[list[AgentId], int]:
    if not values_by_agent:
        raise ProtocolError("no agent mappings to shuffle")
    agents = sorted(values_by_agent, key=AgentId.sort_key)
    lengths = {len(values_by_agent[a]) for a in agents}
    if len(lengths) != 1:
        raise ProtocolError(f"agents disagree on candidate count: {sorted(lengths)}")
    (m,) = lengths
    if m == 0:
        raise ProtocolError("empty candidate sequence")
    return agents, m


def shuffle_round(
    values_by_agent: Mapping[AgentId, np.ndarray],
    topology: NeighborMap,
    rng,
    fractions: Mapping[AgentId, Sequence[float]] | None = None,
) -> dict[AgentId, np.ndarray]:
    """One split / exchange / aggregate round over every participant.

    ``values_by_agent`` maps each participating agent (available EVs and the
    aggregator) to its int64 unit-values for the common candidate sequence.
    Every agent splits each value, sends one share to one of its out-edge
    neighbours (chosen per candidate when it has several), keeps the other,
    then adds the shares it received. Returns the masked unit-values per
    agent; per-candidate totals over all agents are conserved exactly.

    Split fractions are drawn per agent in ascending agent order (then any
    multi-neighbour target draws), so results do not depend on traversal
    order. ``fractions`` forces the kept fraction per agent and candidate.
    """
    agents, m = _validated_matrix(values_by_agent)
    rng = np.random.default_rng(rng)

    kept: dict[AgentId, np.ndarray] = {}
    envelopes: list[Envelope] = []
    for agent in agents:
        units = np.asarray(values_by_agent[agent], dtype=np.int64)
        if fractions is not None and agent in fractions:
            frac = np.asarray(fractions[agent], dtype=float)
            if frac.shape != (m,):
                raise ProtocolError(f"forced fractions for {agent} must have length {m}")
        else:
            frac = rng.random(m)
        keeps = np.rint(frac * units).astype(np.int64)
        sends = units - keeps
        kept[agent] = keeps

        neighbors = topology.neighbors_of(agent)
        if len(neighbors) == 1:
            envelopes.append(Envelope(agent, neighbors[0], (np.arange(m), sends)))
        else:
            choice = rng.integers(len(neighbors), size=m)
            for t in np.unique(choice):
                idx = np.flatnonzero(choice == t)
                envelopes.append(Envelope(agent, neighbors[t], (idx, sends[idx])))

    inboxes = deliver_round(envelopes, agents=agents)
    masked: dict[AgentId, np.ndarray] = {}
    for agent in agents:
        acc = kept[agent].copy()
        for env in inboxes[agent]:
            idx, units = env.payload
            np.add.at(acc, idx, units)
        masked[agent] = acc
    return masked


def candidate_totals(values_by_agent: Mapping[AgentId, np.ndarray]) -> np.ndarray:
    """Exact per-candidate sum of unit-values over all agents."""
    agents, _ = _validated_matrix(values_by_agent)
    stacked = np.stack([np.asarray(values_by_agent[a], dtype=np.int64) for a in agents])
    return stacked.sum(axis=0)


def audit_rows(
    agent: AgentId,
    rates: Sequence[float],
    units: np.ndarray,
    unit_bits: int = DEFAULT_UNIT_BITS,
) -> list[CandidateMapping]:
    """Materialize one agent's mappings for an audit log."""
    return [
        CandidateMapping(index=h, rate_kw=float(rates[h]), value=from_units(int(units[h]), unit_bits))
        for h in range(len(rates))
    ]
