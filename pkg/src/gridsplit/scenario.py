"""Operating scenario and labeled sample records.

A :class:`Scenario` freezes one operating point of a network: load and
cost scalings, planned outages, the dispatched injections, and the solved
base (no-switching) state including the loss-linearization angles.  Arrays
are aligned with the element order of the owning network, which is the
order of the case file.

Records serialize to single JSON lines with a fixed key order, so a
dataset written twice from the same seed is byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Scenario:
    seed: int
    pf_mode: str
    load_scale: tuple[float, ...]          # aligned with net.loads
    outages: tuple[int, ...]               # line ids, sorted
    cost_scale: tuple[float, ...]          # aligned with net.generators
    dispatch_p: tuple[float, ...]          # aligned with net.generators
    dispatch_q: tuple[float, ...]
    base_flows: dict[int, tuple[float, float, float, float]]  # id -> (pf,qf,pt,qt)
    base_v: dict[int, float]               # substation id -> squared voltage
    base_dtheta: dict[int, float]          # line id -> loss linearization angle
    congested: tuple[int, ...]             # line ids with loading > 1, sorted
    objective_pwl: float                   # no-switching objective (PWL)
    objective_exact: float
    limit_scale: float = 1.0               # thermal rating scale in force

    def loads_pq(self, net) -> dict[int, tuple[float, float]]:
        """Scaled (p, q) demand per load id; q follows p at fixed phi."""
        out = {}
        for d, s in zip(net.loads, self.load_scale):
            out[d.id] = (d.p_nom * s, d.q_nom * s)
        return out

    def dispatch(self, net) -> dict[int, tuple[float, float]]:
        return {g.id: (p, q) for g, p, q in
                zip(net.generators, self.dispatch_p, self.dispatch_q)}

    def to_record(self, case: str) -> dict:
        return {
            "case": case,
            "seed": self.seed,
            "pf_mode": self.pf_mode,
            "load_scale": list(self.load_scale),
            "outages": list(self.outages),
            "cost_scale": list(self.cost_scale),
            "dispatch_p": list(self.dispatch_p),
            "dispatch_q": list(self.dispatch_q),
            "base_flows": [[lid, *vals] for lid, vals in sorted(self.base_flows.items())],
            "base_v": [[sid, v] for sid, v in sorted(self.base_v.items())],
            "base_dtheta": [[lid, v] for lid, v in sorted(self.base_dtheta.items())],
            "congested": list(self.congested),
            "objective_pwl": self.objective_pwl,
            "objective_exact": self.objective_exact,
            "limit_scale": self.limit_scale,
        }

    @staticmethod
    def from_record(rec: dict) -> "Scenario":
        return Scenario(
            seed=rec["seed"],
            pf_mode=rec["pf_mode"],
            load_scale=tuple(rec["load_scale"]),
            outages=tuple(rec["outages"]),
            cost_scale=tuple(rec["cost_scale"]),
            dispatch_p=tuple(rec["dispatch_p"]),
            dispatch_q=tuple(rec["dispatch_q"]),
            base_flows={int(r[0]): (r[1], r[2], r[3], r[4]) for r in rec["base_flows"]},
            base_v={int(r[0]): r[1] for r in rec["base_v"]},
            base_dtheta={int(r[0]): r[1] for r in rec["base_dtheta"]},
            congested=tuple(rec["congested"]),
            objective_pwl=rec["objective_pwl"],
            objective_exact=rec["objective_exact"],
            limit_scale=rec.get("limit_scale", 1.0),
        )


@dataclass(frozen=True)
class LabeledSample:
    scenario: Scenario
    v_p: tuple[int, ...]                    # prediction set, ascending ids
    delta: dict[int, float | None] = field(default_factory=dict)
    clf_label: dict[int, int] = field(default_factory=dict)
    reg_label: dict[int, float] = field(default_factory=dict)

    def valid_nodes(self) -> tuple[int, ...]:
        return tuple(i for i in self.v_p if self.delta.get(i) is not None)

    def to_record(self, case: str) -> dict:
        rec = self.scenario.to_record(case)
        rec["v_p"] = list(self.v_p)
        rec["delta"] = [self.delta.get(i) for i in self.v_p]
        rec["clf"] = [self.clf_label.get(i) for i in self.v_p]
        rec["reg"] = [self.reg_label.get(i) for i in self.v_p]
        return rec

    @staticmethod
    def from_record(rec: dict) -> "LabeledSample":
        scenario = Scenario.from_record(rec)
        v_p = tuple(rec["v_p"])
        delta = dict(zip(v_p, rec["delta"]))
        clf = {i: c for i, c in zip(v_p, rec["clf"]) if c is not None}
        reg = {i: r for i, r in zip(v_p, rec["reg"]) if r is not None}
        return LabeledSample(scenario=scenario, v_p=v_p, delta=delta,
                             clf_label=clf, reg_label=reg)


def dump_record(rec: dict) -> str:
    return json.dumps(rec, separators=(",", ":"), allow_nan=False)


def read_records(path) -> list[dict]:
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out
