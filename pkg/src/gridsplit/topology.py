"""Graph utilities over the in-service line graph.

Hop distances, bridge detection (for outage sampling), outage application,
and the proximity filter that selects splitting-eligible substations near
congested lines.
"""

from __future__ import annotations

import math
from dataclasses import replace

from .network import GridModelError, Network


class DisconnectionError(GridModelError):
    """An operation would leave (or found) a disconnected line graph."""


def hop_distance(net: Network, sources: set[int] | frozenset[int]) -> dict[int, float]:
    """Breadth-first hop count from a set of source lines.

    Both endpoints of every source line sit at distance 0; neighbours over
    in-service lines add one hop per line.  Substations unreachable from
    every source map to ``math.inf``.
    """
    if not sources:
        raise ValueError("empty source line set")
    line_map = {l.id: l for l in net.lines}
    for lid in sources:
        if lid not in line_map:
            raise GridModelError(f"unknown line id {lid}")

    dist: dict[int, float] = {s.id: math.inf for s in net.substations}
    frontier = []
    for lid in sources:
        l = line_map[lid]
        for end in (l.from_sub, l.to_sub):
            if dist[end] != 0:
                dist[end] = 0
                frontier.append(end)

    adj: dict[int, list[int]] = {s.id: [] for s in net.substations}
    for l in net.in_service_lines():
        adj[l.from_sub].append(l.to_sub)
        adj[l.to_sub].append(l.from_sub)

    hops = 0
    while frontier:
        hops += 1
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if dist[v] > hops:
                    dist[v] = hops
                    nxt.append(v)
        frontier = nxt
    return dist


def bridges(net: Network) -> set[int]:
    """Ids of in-service lines whose removal disconnects the graph.

    Iterative lowpoint computation on the multigraph; a parallel line
    between the same pair of substations is never a bridge because the
    twin edge keeps the endpoints connected.
    """
    adj: dict[int, list[tuple[int, int]]] = {s.id: [] for s in net.substations}
    for l in net.in_service_lines():
        adj[l.from_sub].append((l.to_sub, l.id))
        adj[l.to_sub].append((l.from_sub, l.id))

    disc: dict[int, int] = {}
    low: dict[int, int] = {}
    out: set[int] = set()
    counter = 0
    for root in adj:
        if root in disc:
            continue
        stack: list[tuple[int, int, int]] = [(root, -1, 0)]  # node, entry edge, child ptr
        disc[root] = low[root] = counter
        counter += 1
        while stack:
            u, entry_edge, ptr = stack.pop()
            if ptr < len(adj[u]):
                stack.append((u, entry_edge, ptr + 1))
                v, edge_id = adj[u][ptr]
                if edge_id == entry_edge:
                    continue
                if v not in disc:
                    disc[v] = low[v] = counter
                    counter += 1
                    stack.append((v, edge_id, 0))
                else:
                    low[u] = min(low[u], disc[v])
            elif entry_edge != -1:
                # u finished: propagate lowpoint to its parent (now on top)
                parent = stack[-1][0]
                low[parent] = min(low[parent], low[u])
                if low[u] > disc[parent]:
                    out.add(entry_edge)
    return out


def non_radial_lines(net: Network) -> set[int]:
    """In-service lines that are not bridges (safe single outages)."""
    ids = {l.id for l in net.in_service_lines()}
    return ids - bridges(net)


def apply_outages(net: Network, out: set[int] | frozenset[int]) -> Network:
    """Copy of the network with the given lines out of service.

    Raises :class:`DisconnectionError` when the result falls apart, so the
    caller can resample the outage set.
    """
    if not out:
        return net
    line_map = {l.id: l for l in net.lines}
    for lid in out:
        if lid not in line_map:
            raise GridModelError(f"unknown line id {lid}")
        if not line_map[lid].in_service:
            raise GridModelError(f"line {lid} is already out of service")
    new_lines = tuple(
        replace(l, in_service=False) if l.id in out else l for l in net.lines
    )
    try:
        return net.with_lines(new_lines)
    except GridModelError as exc:
        raise DisconnectionError(str(exc)) from None


def proximity_filter(net: Network, congested: set[int] | frozenset[int],
                     k: int) -> tuple[int, ...]:
    """Substations within ``k`` hops of a congested line that have at
    least four in-service line connections, in ascending-id order.

    Returns an empty tuple when nothing qualifies (no actions available).
    """
    if not congested:
        raise ValueError("empty congested line set")
    dist = hop_distance(net, congested)
    picked = [s.id for s in net.substations
              if dist[s.id] <= k and net.degree(s.id) >= 4]
    return tuple(sorted(picked))
