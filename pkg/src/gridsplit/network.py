"""Static grid model: substations, lines, generators, loads.

All electrical quantities are stored per-unit on the network MVA base.
Voltage bounds are kept both as magnitudes (as they appear in case files)
and squared (as the flow equations use them); the squared values are always
derived from the magnitudes so that serialization round-trips bit-exactly.

A :class:`Network` is immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace


class GridModelError(Exception):
    """Invalid grid data (dangling references, bad parameters, ...)."""


@dataclass(frozen=True)
class Substation:
    id: int
    v_min: float = 0.94
    v_max: float = 1.06
    shunt_g: float = 0.0
    shunt_b: float = 0.0
    is_ref: bool = False
    v_min_sq: float = field(init=False)
    v_max_sq: float = field(init=False)

    def __post_init__(self):
        if not (0.0 < self.v_min <= self.v_max):
            raise GridModelError(
                f"substation {self.id}: need 0 < v_min <= v_max, "
                f"got [{self.v_min}, {self.v_max}]"
            )
        object.__setattr__(self, "v_min_sq", self.v_min * self.v_min)
        object.__setattr__(self, "v_max_sq", self.v_max * self.v_max)


@dataclass(frozen=True)
class Line:
    id: int
    from_sub: int
    to_sub: int
    r: float
    x: float
    s_max: float
    in_service: bool = True
    # series admittance, derived from r and x
    g: float = field(init=False)
    b: float = field(init=False)

    def __post_init__(self):
        if self.x == 0.0:
            raise GridModelError(f"line {self.id}: zero reactance")
        if not self.s_max > 0.0:
            raise GridModelError(f"line {self.id}: s_max must be positive")
        den = self.r * self.r + self.x * self.x
        g = self.r / den
        b = self.x / den
        if not (math.isfinite(g) and math.isfinite(b)):
            raise GridModelError(f"line {self.id}: non-finite series admittance")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "b", b)


@dataclass(frozen=True)
class Generator:
    id: int
    sub: int
    p_set: float
    q_set: float = 0.0
    p_min: float = 0.0
    p_max: float = math.inf
    cost_linear: float = 0.0

    def __post_init__(self):
        if not (self.p_min <= self.p_set <= self.p_max):
            raise GridModelError(
                f"generator {self.id}: p_set {self.p_set} outside "
                f"[{self.p_min}, {self.p_max}]"
            )


@dataclass(frozen=True)
class Load:
    id: int
    sub: int
    p_nom: float
    q_nom: float = 0.0

    def __post_init__(self):
        if self.p_nom < 0.0:
            raise GridModelError(f"load {self.id}: negative p_nom")
        if self.p_nom == 0.0 and self.q_nom != 0.0:
            raise GridModelError(f"load {self.id}: q_nom without p_nom")

    @property
    def power_factor_tangent(self) -> float:
        """q/p ratio used to tie reactive demand to active demand."""
        if self.p_nom == 0.0:
            return 0.0
        return self.q_nom / self.p_nom


@dataclass(frozen=True)
class Network:
    base_power: float
    substations: tuple[Substation, ...]
    lines: tuple[Line, ...]
    generators: tuple[Generator, ...]
    loads: tuple[Load, ...]
    name: str = ""

    def __post_init__(self):
        if not self.base_power > 0.0:
            raise GridModelError("base_power must be positive")
        sub_ids = [s.id for s in self.substations]
        if len(set(sub_ids)) != len(sub_ids):
            raise GridModelError("duplicate substation ids")
        known = set(sub_ids)
        for ln in self.lines:
            for end in (ln.from_sub, ln.to_sub):
                if end not in known:
                    raise GridModelError(
                        f"line {ln.id} references unknown substation {end}"
                    )
            if ln.from_sub == ln.to_sub:
                raise GridModelError(f"line {ln.id} is a self-loop")
        for g in self.generators:
            if g.sub not in known:
                raise GridModelError(
                    f"generator {g.id} references unknown substation {g.sub}"
                )
        for d in self.loads:
            if d.sub not in known:
                raise GridModelError(
                    f"load {d.id} references unknown substation {d.sub}"
                )
        for coll, kind in ((self.lines, "line"), (self.generators, "generator"),
                           (self.loads, "load")):
            ids = [e.id for e in coll]
            if len(set(ids)) != len(ids):
                raise GridModelError(f"duplicate {kind} ids")
        refs = [s.id for s in self.substations if s.is_ref]
        if len(refs) != 1:
            raise GridModelError(
                f"need exactly one reference substation, found {len(refs)}"
            )
        if not _connected(known, [(l.from_sub, l.to_sub)
                                  for l in self.lines if l.in_service]):
            raise GridModelError("in-service line graph is disconnected")

    # -- lookups ---------------------------------------------------------

    def sub(self, sub_id: int) -> Substation:
        return self._sub_map[sub_id]

    def line(self, line_id: int) -> Line:
        return self._line_map[line_id]

    def generator(self, gen_id: int) -> Generator:
        return self._gen_map[gen_id]

    def load(self, load_id: int) -> Load:
        return self._load_map[load_id]

    @property
    def _sub_map(self) -> dict[int, Substation]:
        return self._cache("_sub_map_c", lambda: {s.id: s for s in self.substations})

    @property
    def _line_map(self) -> dict[int, Line]:
        return self._cache("_line_map_c", lambda: {l.id: l for l in self.lines})

    @property
    def _gen_map(self) -> dict[int, Generator]:
        return self._cache("_gen_map_c", lambda: {g.id: g for g in self.generators})

    @property
    def _load_map(self) -> dict[int, Load]:
        return self._cache("_load_map_c", lambda: {d.id: d for d in self.loads})

    def _cache(self, key, build):
        try:
            return object.__getattribute__(self, key)
        except AttributeError:
            value = build()
            object.__setattr__(self, key, value)
            return value

    @property
    def ref_sub(self) -> int:
        return next(s.id for s in self.substations if s.is_ref)

    def slack_generator(self) -> Generator:
        """The generator whose injection floats to close the balance.

        By convention this is the lowest-id generator at the reference
        substation.
        """
        at_ref = sorted((g for g in self.generators if g.sub == self.ref_sub),
                        key=lambda g: g.id)
        if not at_ref:
            raise GridModelError("reference substation has no generator")
        return at_ref[0]

    def in_service_lines(self) -> tuple[Line, ...]:
        return tuple(l for l in self.lines if l.in_service)

    def lines_at(self, sub_id: int) -> tuple[Line, ...]:
        """In-service lines incident to a substation."""
        return self._cache(
            "_lines_at_c", self._build_lines_at).get(sub_id, ())

    def _build_lines_at(self) -> dict[int, tuple[Line, ...]]:
        at: dict[int, list[Line]] = {s.id: [] for s in self.substations}
        for l in self.in_service_lines():
            at[l.from_sub].append(l)
            at[l.to_sub].append(l)
        return {k: tuple(v) for k, v in at.items()}

    def gens_at(self, sub_id: int) -> tuple[Generator, ...]:
        return self._cache(
            "_gens_at_c",
            lambda: _group(self.generators, self.substations)).get(sub_id, ())

    def loads_at(self, sub_id: int) -> tuple[Load, ...]:
        return self._cache(
            "_loads_at_c",
            lambda: _group(self.loads, self.substations)).get(sub_id, ())

    def degree(self, sub_id: int) -> int:
        """Number of in-service line connections (parallel lines counted)."""
        return len(self.lines_at(sub_id))

    def with_lines(self, lines: tuple[Line, ...], name: str | None = None) -> "Network":
        return replace(self, lines=lines, name=self.name if name is None else name)


def _group(elements, substations):
    at: dict[int, list] = {s.id: [] for s in substations}
    for e in elements:
        at[e.sub].append(e)
    return {k: tuple(v) for k, v in at.items()}


def _connected(node_ids: set[int], edges: list[tuple[int, int]]) -> bool:
    if not node_ids:
        return True
    adj: dict[int, list[int]] = {n: [] for n in node_ids}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    start = next(iter(node_ids))
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == len(node_ids)
