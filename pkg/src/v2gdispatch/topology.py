"""Simulated communication graph and synchronous message transport.

Agents are EVs, one aggregator and one coordination node (ECN). Edges are
out-edges: ``out_edges[a]`` lists the agents ``a`` may send shares to. Links
are lossless and instantaneous; a round is a barrier (all sends complete
before any receive is observed).
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .fleet import Fleet, available_ids


class TopologyError(ValueError):
    """Invalid graph construction or routing to an unknown agent."""


class AgentKind(enum.Enum):
    EV = "ev"
    AGGREGATOR = "aggregator"
    ECN = "ecn"


@dataclass(frozen=True)
class AgentId:
    kind: AgentKind
    index: int

    def __post_init__(self) -> None:
        # cached: AgentIds key every hot-loop dict
        key = (self.kind.value, self.index)
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash(key))

    def sort_key(self) -> tuple[str, int]:
        return self._key

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        return f"{self.kind.value}{self.index}"


AGGREGATOR_ID = AgentId(AgentKind.AGGREGATOR, 0)
ECN_ID = AgentId(AgentKind.ECN, 0)


@lru_cache(maxsize=None)
def ev_agent(index: int) -> AgentId:
    return AgentId(AgentKind.EV, index)


@dataclass(frozen=True)
class Envelope:
    """One message delivered within the current round."""

    sender: AgentId
    recipient: AgentId
    payload: object


@dataclass
class NeighborMap:
    """Per-agent out-edges; every participating EV keeps at least one."""

    out_edges: dict[AgentId, tuple[AgentId, ...]]

    def neighbors_of(self, agent: AgentId) -> tuple[AgentId, ...]:
        try:
            return self.out_edges[agent]
        except KeyError:
            raise TopologyError(f"agent {agent} has no out-edges") from None

    def agents(self) -> list[AgentId]:
        return sorted(self.out_edges, key=AgentId.sort_key)


POLICIES = ("one-random-neighbor", "ring")


def build_topology(
    fleet: Fleet,
    policy: str = "one-random-neighbor",
    rng=None,
    custom_edges: dict[AgentId, tuple[AgentId, ...]] | None = None,
) -> NeighborMap:
    """Build the communication graph over available EVs plus the aggregator.

    ``one-random-neighbor`` gives each EV exactly one target drawn uniformly
    from the other available EVs and the aggregator; ``ring`` chains the
    available EVs with the last pointing at the aggregator. The aggregator's
    out-edges are always the available EVs. Unavailable EVs get no edges.
    Deterministic for a fixed seed.
    """
    if custom_edges is not None:
        edges = dict(custom_edges)
        _validate_edges(edges)
        return NeighborMap(out_edges=edges)

    avail = available_ids(fleet)
    if not avail:
        raise TopologyError("no available EVs to connect")
    rng = np.random.default_rng(rng)
    ev_ids = [ev_agent(i) for i in avail]
    edges: dict[AgentId, tuple[AgentId, ...]] = {}

    if policy == "one-random-neighbor":
        for i in avail:
            targets = [ev_agent(j) for j in avail if j != i] + [AGGREGATOR_ID]
            edges[ev_agent(i)] = (targets[int(rng.integers(len(targets)))],)
    elif policy == "ring":
        for pos, i in enumerate(avail):
            if pos + 1 < len(avail):
                edges[ev_agent(i)] = (ev_agent(avail[pos + 1]),)
            else:
                edges[ev_agent(i)] = (AGGREGATOR_ID,)
    else:
        raise TopologyError(f"unknown topology policy {policy!r}")

    edges[AGGREGATOR_ID] = tuple(ev_ids)
    for i in avail:
        fleet.evs[i].neighbor = edges[ev_agent(i)][0]
    return NeighborMap(out_edges=edges)


def _validate_edges(edges: dict[AgentId, tuple[AgentId, ...]]) -> None:
    agents = set(edges)
    for agent, targets in edges.items():
        if agent.kind is AgentKind.EV and not targets:
            raise TopologyError(f"EV agent {agent} needs at least one out-edge")
        for t in targets:
            if t not in agents:
                raise TopologyError(f"edge {agent} -> {t} points outside the graph")


def reroute(topology: NeighborMap, fleet: Fleet, rng=None) -> NeighborMap:
    """Reassign edges after a fleet shrink so none dangle.

    EVs whose target departed get a fresh uniform draw over the remaining
    valid targets; the aggregator's out-edges are refreshed to the available
    set. The input map is not modified.
    """
    avail = available_ids(fleet)
    if not avail:
        raise TopologyError("no available EVs to connect")
    rng = np.random.default_rng(rng)
    alive = {ev_agent(i) for i in avail} | {AGGREGATOR_ID}
    edges: dict[AgentId, tuple[AgentId, ...]] = {}
    for i in avail:
        agent = ev_agent(i)
        old = topology.out_edges.get(agent, ())
        kept = tuple(t for t in old if t in alive)
        if not kept:
            targets = [ev_agent(j) for j in avail if j != i] + [AGGREGATOR_ID]
            kept = (targets[int(rng.integers(len(targets)))],)
        edges[agent] = kept
        fleet.evs[i].neighbor = kept[0]
    edges[AGGREGATOR_ID] = tuple(ev_agent(i) for i in avail)
    return NeighborMap(out_edges=edges)


def deliver_round(
    envelopes: Iterable[Envelope],
    agents: Sequence[AgentId] | None = None,
) -> dict[AgentId, list[Envelope]]:
    """Deliver every envelope exactly once, all within one barrier round.

    Inboxes are keyed by recipient and ordered by (sender, send order), so the
    result is independent of the interleaving the caller produced the
    envelopes in. With ``agents`` given, every listed agent gets an inbox
    (possibly empty) and unknown recipients raise.
    """
    known = set(agents) if agents is not None else None
    inboxes: dict[AgentId, list[Envelope]] = (
        {a: [] for a in agents} if agents is not None else {}
    )
    ordered: list[tuple[tuple[str, int], int, Envelope]] = []
    per_sender_seq: dict[AgentId, int] = {}
    for env in envelopes:
        if known is not None and env.recipient not in known:
            raise TopologyError(f"unknown recipient {env.recipient}")
        seq = per_sender_seq.get(env.sender, 0)
        per_sender_seq[env.sender] = seq + 1
        ordered.append((env.sender.sort_key(), seq, env))
    ordered.sort(key=lambda item: (item[2].recipient.sort_key(), item[0], item[1]))
    for _, _, env in ordered:
        inboxes.setdefault(env.recipient, []).append(env)
    return inboxes


def export_topology(topology: NeighborMap, path) -> None:
    """Dump the edge list to CSV for audit."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["from", "to"])
        for agent in topology.agents():
            for target in topology.out_edges[agent]:
                writer.writerow([str(agent), str(target)])
