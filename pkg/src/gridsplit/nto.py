"""Switching optimization: the busbar-splitting MILP and its oracle.

Substations outside the candidate set are modeled as single nodes; each
candidate gets two busbars, a coupler binary, and per-element assignment
binaries.  Line ends at candidates carry their own angle/voltage variables
tied to the assigned busbar by big-M links, and their flow splits across
per-busbar gated variables.

Thermal limits are enforced through the loading objective rather than as
hard cuts: each line's polygon gauge feeds a convex PWL penalty which
grows past the last breakpoint on its final slope.  This keeps the
unsplit operating point (however congested) feasible, so the optimization
can only improve on the no-switching objective.

The enumeration oracle evaluates every admissible single-substation
assignment on a physically split copy of the network via the same linear
power flow, providing an independent check of the MILP path.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .config import NtoConfig
from .milp import MilpProblem, SolveReport, default_backend
from .network import GridModelError, Network, Substation
from .pf import linearize_losses, solve_fixed_injection_pf
from .pwl import penalty_from_config, polygonize_circle
from .scenario import Scenario


def eligible_substations(net: Network) -> tuple[int, ...]:
    """Substations with at least four in-service line connections."""
    return tuple(sorted(s.id for s in net.substations if net.degree(s.id) >= 4))


@dataclass
class SwitchingSolution:
    coupler_status: dict[int, int]                  # 1 = closed (unsplit)
    line_assignment: dict[tuple[int, int], int]     # (line, sub) -> busbar bit
    gen_assignment: dict[int, int]
    load_assignment: dict[int, int]
    flows: dict[int, tuple[float, float, float, float]]
    loadings: dict[int, float]                      # polygon gauge per line
    busbar_states: dict[int, tuple[tuple[float, float], tuple[float, float] | None]]
    objective_value: float
    solver_status: str
    wall_time: float

    def split_substations(self) -> tuple[int, ...]:
        return tuple(sorted(i for i, z in self.coupler_status.items() if z == 0))


@dataclass
class NtoModel:
    """A built switching MILP plus the metadata to interpret its solution."""

    problem: MilpProblem
    net: Network
    scenario: Scenario
    cfg: NtoConfig
    candidates: tuple[int, ...]
    mode: str

    def set_branching_priorities(self, ordered_candidates: list[int]):
        """Give coupler binaries of earlier candidates higher priority."""
        top = len(ordered_candidates)
        for rank, sub_id in enumerate(ordered_candidates):
            name = f"z[{sub_id}]"
            if self.problem.has_var(name):
                self.problem.set_priority(self.problem.var(name), top - rank)

    def extract(self, x: np.ndarray, report: SolveReport) -> SwitchingSolution:
        prob = self.problem
        val = lambda name: float(x[prob.var(name)])
        coupler = {s.id: 1 for s in self.net.substations}
        line_assign: dict[tuple[int, int], int] = {}
        gen_assign: dict[int, int] = {}
        load_assign: dict[int, int] = {}
        for i in self.candidates:
            coupler[i] = int(round(val(f"z[{i}]")))
            for l in self.net.lines_at(i):
                line_assign[(l.id, i)] = int(round(val(f"zl[{l.id},{i}]")))
            for g in self.net.gens_at(i):
                gen_assign[g.id] = int(round(val(f"zg[{g.id}]")))
            for d in self.net.loads_at(i):
                load_assign[d.id] = int(round(val(f"zd[{d.id}]")))
        ac = self.mode == "linear_ac"
        flows = {}
        loadings = {}
        for l in self.net.in_service_lines():
            pf_ = val(f"pF[{l.id}]")
            qf_ = val(f"qF[{l.id}]") if ac else 0.0
            pt_ = val(f"pT[{l.id}]")
            qt_ = val(f"qT[{l.id}]") if ac else 0.0
            flows[l.id] = (pf_, qf_, pt_, qt_)
            loadings[l.id] = val(f"s[{l.id}]")
        states: dict[int, tuple] = {}
        for s in self.net.substations:
            if s.id in self.candidates:
                b1 = (val(f"thb1[{s.id}]"), val(f"vb1[{s.id}]") if ac else 1.0)
                b2 = (val(f"thb2[{s.id}]"), val(f"vb2[{s.id}]") if ac else 1.0)
                states[s.id] = (b1, b2)
            else:
                states[s.id] = ((val(f"th[{s.id}]"),
                                 val(f"v[{s.id}]") if ac else 1.0), None)
        return SwitchingSolution(
            coupler_status=coupler, line_assignment=line_assign,
            gen_assignment=gen_assign, load_assignment=load_assign,
            flows=flows, loadings=loadings, busbar_states=states,
            objective_value=report.objective_value,
            solver_status=report.status, wall_time=report.wall_time)


def build_nto(net: Network, scenario: Scenario, cfg: NtoConfig,
              candidates: tuple[int, ...] | None = None) -> NtoModel:
    """Assemble the switching MILP for one scenario.

    ``candidates`` restricts which substations may split; ``None`` allows
    every substation with at least four line connections.  Candidates with
    fewer than four lines are rejected since the two-lines-per-busbar rule
    could not hold.
    """
    mode = cfg.pf_mode
    ac = mode == "linear_ac"
    if candidates is None:
        candidates = eligible_substations(net)
    else:
        candidates = tuple(sorted(set(candidates)))
        for i in candidates:
            if net.degree(i) < 4:
                raise GridModelError(
                    f"substation {i} has {net.degree(i)} line connections; "
                    "splitting needs at least 4")
    cand = set(candidates)
    pen = penalty_from_config(cfg)
    coefs = linearize_losses(net, scenario.base_dtheta) if ac else None
    loads = scenario.loads_pq(net)
    dispatch = scenario.dispatch(net)
    slack = net.slack_generator()
    ref = net.ref_sub
    m_theta = cfg.big_m_theta if cfg.big_m_theta is not None else 2.0 * cfg.theta_box

    prob = MilpProblem(f"nto[{net.name}]")

    # -- node / busbar variables ------------------------------------------
    for s in net.substations:
        if s.id in cand:
            prob.add_var(f"thb1[{s.id}]", -cfg.theta_box, cfg.theta_box)
            prob.add_var(f"thb2[{s.id}]", -cfg.theta_box, cfg.theta_box)
            if ac:
                prob.add_var(f"vb1[{s.id}]", s.v_min_sq, s.v_max_sq)
                prob.add_var(f"vb2[{s.id}]", s.v_min_sq, s.v_max_sq)
        else:
            prob.add_var(f"th[{s.id}]", -cfg.theta_box, cfg.theta_box)
            if ac:
                prob.add_var(f"v[{s.id}]", s.v_min_sq, s.v_max_sq)

    if ref in cand:
        prob.fix_var(prob.var(f"thb1[{ref}]"), 0.0)
        if ac:
            prob.fix_var(prob.var(f"vb1[{ref}]"), _ref_setpoint(net))
    else:
        prob.fix_var(prob.var(f"th[{ref}]"), 0.0)
        if ac:
            prob.fix_var(prob.var(f"v[{ref}]"), _ref_setpoint(net))

    # -- switching binaries ------------------------------------------------
    for i in candidates:
        prob.add_var(f"z[{i}]", binary=True)
        for l in net.lines_at(i):
            prob.add_var(f"zl[{l.id},{i}]", binary=True)
        for g in net.gens_at(i):
            prob.add_var(f"zg[{g.id}]", binary=True)
        for d in net.loads_at(i):
            prob.add_var(f"zd[{d.id}]", binary=True)

    # -- line flow variables ------------------------------------------------
    lines = net.in_service_lines()
    for l in lines:
        cap = cfg.flow_cap * l.s_max
        prob.add_var(f"pF[{l.id}]", -cap, cap)
        prob.add_var(f"pT[{l.id}]", -cap, cap)
        if ac:
            prob.add_var(f"qF[{l.id}]", -cap, cap)
            prob.add_var(f"qT[{l.id}]", -cap, cap)
        prob.add_var(f"s[{l.id}]", 0.0, cfg.flow_cap)
        prob.add_var(f"t[{l.id}]", pen.floor, math.inf, obj=1.0)
        for end_sub in (l.from_sub, l.to_sub):
            if end_sub in cand:
                prob.add_var(f"thl[{l.id},{end_sub}]", -cfg.theta_box, cfg.theta_box)
                if ac:
                    sub = net.sub(end_sub)
                    prob.add_var(f"vl[{l.id},{end_sub}]", sub.v_min_sq, sub.v_max_sq)
                for b in (1, 2):
                    prob.add_var(f"pb{b}[{l.id},{end_sub}]", -cap, cap)
                    if ac:
                        prob.add_var(f"qb{b}[{l.id},{end_sub}]", -cap, cap)

    # -- slack generator ----------------------------------------------------
    prob.add_var("pslack", slack.p_min, slack.p_max)
    q_big = _slack_q_bound(net, cfg, slack.sub)
    if ac:
        prob.add_var("qslack", -q_big, q_big)
    if slack.sub in cand:
        p_big = max(abs(slack.p_min), abs(slack.p_max))
        for b in (1, 2):
            prob.add_var(f"pslackb{b}", -p_big, p_big)
            if ac:
                prob.add_var(f"qslackb{b}", -q_big, q_big)
        zg = prob.var(f"zg[{slack.id}]")
        prob.add_eq([(prob.var("pslackb1"), 1.0), (prob.var("pslackb2"), 1.0),
                     (prob.var("pslack"), -1.0)], 0.0)
        _gate(prob, prob.var("pslackb1"), zg, p_big, on_when_one=False)
        _gate(prob, prob.var("pslackb2"), zg, p_big, on_when_one=True)
        if ac:
            prob.add_eq([(prob.var("qslackb1"), 1.0), (prob.var("qslackb2"), 1.0),
                         (prob.var("qslack"), -1.0)], 0.0)
            _gate(prob, prob.var("qslackb1"), zg, q_big, on_when_one=False)
            _gate(prob, prob.var("qslackb2"), zg, q_big, on_when_one=True)

    # -- candidate busbar machinery per line end ----------------------------
    for l in lines:
        for end_sub, other_sub in ((l.from_sub, l.to_sub), (l.to_sub, l.from_sub)):
            if end_sub not in cand:
                continue
            zl = prob.var(f"zl[{l.id},{end_sub}]")
            thl = prob.var(f"thl[{l.id},{end_sub}]")
            b1 = prob.var(f"thb1[{end_sub}]")
            b2 = prob.var(f"thb2[{end_sub}]")
            # |thl - thb1| <= M * zl ; |thl - thb2| <= M * (1 - zl)
            prob.add_le([(thl, 1.0), (b1, -1.0), (zl, -m_theta)], 0.0)
            prob.add_ge([(thl, 1.0), (b1, -1.0), (zl, m_theta)], 0.0)
            prob.add_le([(thl, 1.0), (b2, -1.0), (zl, m_theta)], m_theta)
            prob.add_ge([(thl, 1.0), (b2, -1.0), (zl, -m_theta)], -m_theta)
            if ac:
                sub = net.sub(end_sub)
                m_v = cfg.big_m_v if cfg.big_m_v is not None else (
                    sub.v_max_sq - sub.v_min_sq)
                vl = prob.var(f"vl[{l.id},{end_sub}]")
                v1 = prob.var(f"vb1[{end_sub}]")
                v2 = prob.var(f"vb2[{end_sub}]")
                prob.add_le([(vl, 1.0), (v1, -1.0), (zl, -m_v)], 0.0)
                prob.add_ge([(vl, 1.0), (v1, -1.0), (zl, m_v)], 0.0)
                prob.add_le([(vl, 1.0), (v2, -1.0), (zl, m_v)], m_v)
                prob.add_ge([(vl, 1.0), (v2, -1.0), (zl, -m_v)], -m_v)
            cap = cfg.flow_cap * l.s_max
            end_is_from = end_sub == l.from_sub
            total = prob.var(f"pF[{l.id}]" if end_is_from else f"pT[{l.id}]")
            pb1 = prob.var(f"pb1[{l.id},{end_sub}]")
            pb2 = prob.var(f"pb2[{l.id},{end_sub}]")
            _gate(prob, pb1, zl, cap, on_when_one=False)
            _gate(prob, pb2, zl, cap, on_when_one=True)
            prob.add_eq([(total, 1.0), (pb1, -1.0), (pb2, -1.0)], 0.0)
            if ac:
                totq = prob.var(f"qF[{l.id}]" if end_is_from else f"qT[{l.id}]")
                qb1 = prob.var(f"qb1[{l.id},{end_sub}]")
                qb2 = prob.var(f"qb2[{l.id},{end_sub}]")
                _gate(prob, qb1, zl, cap, on_when_one=False)
                _gate(prob, qb2, zl, cap, on_when_one=True)
                prob.add_eq([(totq, 1.0), (qb1, -1.0), (qb2, -1.0)], 0.0)

    # -- switching limits and symmetry breaking -----------------------------
    if candidates:
        prob.add_ge([(prob.var(f"z[{i}]"), 1.0) for i in candidates],
                    len(candidates) - cfg.z_max)
    for i in candidates:
        z = prob.var(f"z[{i}]")
        zls = [prob.var(f"zl[{l.id},{i}]") for l in net.lines_at(i)]
        deg = len(zls)
        prob.add_le([(z, -2.0)] + [(c, -1.0) for c in zls], -2.0)
        prob.add_le([(z, -2.0)] + [(c, 1.0) for c in zls], float(deg - 2))
        for c in zls:
            prob.add_le([(z, 1.0), (c, 1.0)], 1.0)
        for g in net.gens_at(i):
            prob.add_le([(z, 1.0), (prob.var(f"zg[{g.id}]"), 1.0)], 1.0)
        for d in net.loads_at(i):
            prob.add_le([(z, 1.0), (prob.var(f"zd[{d.id}]"), 1.0)], 1.0)

    # -- flow definitions ----------------------------------------------------
    def end_vars(l, end_sub):
        if end_sub in cand:
            th = prob.var(f"thl[{l.id},{end_sub}]")
            v = prob.var(f"vl[{l.id},{end_sub}]") if ac else None
        else:
            th = prob.var(f"th[{end_sub}]")
            v = prob.var(f"v[{end_sub}]") if ac else None
        return th, v

    for l in lines:
        ti, vi = end_vars(l, l.from_sub)
        tj, vj = end_vars(l, l.to_sub)
        si, sj = net.sub(l.from_sub), net.sub(l.to_sub)
        p_from = prob.var(f"pF[{l.id}]")
        p_to = prob.var(f"pT[{l.id}]")
        if ac:
            lc = coefs[l.id]
            q_from = prob.var(f"qF[{l.id}]")
            q_to = prob.var(f"qT[{l.id}]")
            prob.add_eq([(p_from, 1.0),
                         (vi, -si.shunt_g - 0.5 * l.g), (vj, 0.5 * l.g),
                         (ti, l.b - lc.slope_p), (tj, -(l.b - lc.slope_p))],
                        lc.const_p)
            prob.add_eq([(q_from, 1.0),
                         (vi, si.shunt_b + 0.5 * l.b), (vj, -0.5 * l.b),
                         (ti, l.g - lc.slope_q), (tj, -(l.g - lc.slope_q))],
                        lc.const_q)
            prob.add_eq([(p_to, 1.0),
                         (vj, -sj.shunt_g - 0.5 * l.g), (vi, 0.5 * l.g),
                         (tj, l.b + lc.slope_p), (ti, -(l.b + lc.slope_p))],
                        lc.const_p)
            prob.add_eq([(q_to, 1.0),
                         (vj, sj.shunt_b + 0.5 * l.b), (vi, -0.5 * l.b),
                         (tj, l.g + lc.slope_q), (ti, -(l.g + lc.slope_q))],
                        lc.const_q)
        else:
            prob.add_eq([(p_from, 1.0), (ti, l.b), (tj, -l.b)], 0.0)
            prob.add_eq([(p_to, 1.0), (tj, l.b), (ti, -l.b)], 0.0)

    # -- balance -------------------------------------------------------------
    for s in net.substations:
        if s.id in cand:
            _candidate_balance(prob, net, s, loads, dispatch, slack, ac)
        else:
            _single_node_balance(prob, net, s, loads, dispatch, slack, ac)

    # -- loading gauge and penalty epigraph -----------------------------------
    for l in lines:
        sv = prob.var(f"s[{l.id}]")
        p_from = prob.var(f"pF[{l.id}]")
        if ac:
            q_from = prob.var(f"qF[{l.id}]")
            for a, b, c in polygonize_circle(1.0, cfg.circle_segments):
                prob.add_le([(p_from, a / l.s_max), (q_from, b / l.s_max),
                             (sv, -1.0)], 0.0)
        else:
            prob.add_le([(p_from, 1.0 / l.s_max), (sv, -1.0)], 0.0)
            prob.add_le([(p_from, -1.0 / l.s_max), (sv, -1.0)], 0.0)
        tv = prob.var(f"t[{l.id}]")
        for m, c in zip(pen.slopes, pen.intercepts):
            prob.add_ge([(tv, 1.0), (sv, -m)], c)

    return NtoModel(problem=prob, net=net, scenario=scenario, cfg=cfg,
                    candidates=candidates, mode=mode)


def _gate(prob: MilpProblem, var: int, binary: int, big: float, on_when_one: bool):
    """|var| <= big * binary (on_when_one) or big * (1 - binary)."""
    if on_when_one:
        prob.add_le([(var, 1.0), (binary, -big)], 0.0)
        prob.add_ge([(var, 1.0), (binary, big)], 0.0)
    else:
        prob.add_le([(var, 1.0), (binary, big)], big)
        prob.add_ge([(var, 1.0), (binary, -big)], -big)


def _ref_setpoint(net: Network) -> float:
    s = net.sub(net.ref_sub)
    return min(max(1.0, s.v_min_sq), s.v_max_sq)


def _slack_q_bound(net: Network, cfg: NtoConfig, slack_sub: int) -> float:
    lines = [l for l in net.lines_at(slack_sub)]
    bound = cfg.flow_cap * sum(l.s_max for l in lines)
    bound += sum(abs(d.q_nom) for d in net.loads_at(slack_sub))
    return bound + 1.0


def _end_flow_var(prob, l, sub_id, ac, reactive=False):
    tag = "F" if l.from_sub == sub_id else "T"
    return prob.var(f"{'q' if reactive else 'p'}{tag}[{l.id}]")


def _single_node_balance(prob, net, s: Substation, loads, dispatch, slack, ac):
    coeffs_p = []
    coeffs_q = []
    rhs_p = 0.0
    rhs_q = 0.0
    for g in net.gens_at(s.id):
        if g.id == slack.id:
            coeffs_p.append((prob.var("pslack"), -1.0))
            if ac:
                coeffs_q.append((prob.var("qslack"), -1.0))
        else:
            p, q = dispatch[g.id]
            rhs_p += p
            rhs_q += q
    for d in net.loads_at(s.id):
        p, q = loads[d.id]
        rhs_p -= p
        rhs_q -= q
    for l in net.lines_at(s.id):
        coeffs_p.append((_end_flow_var(prob, l, s.id, ac), 1.0))
        if ac:
            coeffs_q.append((_end_flow_var(prob, l, s.id, ac, reactive=True), 1.0))
    prob.add_eq(coeffs_p, rhs_p)
    if ac:
        prob.add_eq(coeffs_q, rhs_q)


def _candidate_balance(prob, net, s: Substation, loads, dispatch, slack, ac):
    for b in (1, 2):
        on_b2 = b == 2
        coeffs_p = []
        coeffs_q = []
        rhs_p = 0.0
        rhs_q = 0.0
        for l in net.lines_at(s.id):
            coeffs_p.append((prob.var(f"pb{b}[{l.id},{s.id}]"), 1.0))
            if ac:
                coeffs_q.append((prob.var(f"qb{b}[{l.id},{s.id}]"), 1.0))
        for g in net.gens_at(s.id):
            if g.id == slack.id:
                coeffs_p.append((prob.var(f"pslackb{b}"), -1.0))
                if ac:
                    coeffs_q.append((prob.var(f"qslackb{b}"), -1.0))
                continue
            p, q = dispatch[g.id]
            zg = prob.var(f"zg[{g.id}]")
            # P_{g,b1} = (1 - zg) * p ; P_{g,b2} = zg * p
            if on_b2:
                coeffs_p.append((zg, -p))
                if ac:
                    coeffs_q.append((zg, -q))
            else:
                coeffs_p.append((zg, p))
                rhs_p += p
                if ac:
                    coeffs_q.append((zg, q))
                    rhs_q += q
        for d in net.loads_at(s.id):
            p, q = loads[d.id]
            zd = prob.var(f"zd[{d.id}]")
            if on_b2:
                coeffs_p.append((zd, p))
                if ac:
                    coeffs_q.append((zd, q))
            else:
                coeffs_p.append((zd, -p))
                rhs_p -= p
                if ac:
                    coeffs_q.append((zd, -q))
                    rhs_q -= q
        prob.add_eq(coeffs_p, rhs_p)
        if ac:
            prob.add_eq(coeffs_q, rhs_q)


def solve_nto(model: NtoModel, rel_gap: float | None = None,
              time_limit: float | None = None, seed: int = 0,
              backend=None) -> tuple[SolveReport, SwitchingSolution | None]:
    """Solve a built model; infeasibility is reported, not raised."""
    backend = backend or default_backend()
    cfg = model.cfg
    report, x = backend.solve(
        model.problem,
        rel_gap=cfg.rel_gap if rel_gap is None else rel_gap,
        time_limit=cfg.time_limit if time_limit is None else time_limit,
        seed=seed)
    solution = model.extract(x, report) if x is not None else None
    return report, solution


@dataclass
class LabelResult:
    sub_id: int
    valid: bool
    delta: float
    objective: float
    status: str


def label_substation(net: Network, scenario: Scenario, sub_id: int,
                     cfg: NtoConfig, rel_gap: float = 0.01,
                     time_limit: float | None = 10.0) -> LabelResult:
    """Congestion reduction achievable by reconfiguring one substation.

    Solves the switching problem with only this substation's binaries free
    and returns delta = O_base - O_split (non-negative up to solver gap,
    since staying unsplit is always admissible).
    """
    model = build_nto(net, scenario, replace(cfg, z_max=1), candidates=(sub_id,))
    report, _ = solve_nto(model, rel_gap=rel_gap, time_limit=time_limit)
    if not report.feasible:
        return LabelResult(sub_id, False, math.nan, math.inf, report.status)
    delta = scenario.objective_pwl - report.objective_value
    return LabelResult(sub_id, True, delta, report.objective_value, report.status)


@dataclass
class OracleConfiguration:
    sub_id: int | None                       # None = unsplit everywhere
    line_bits: tuple[int, ...] = ()
    gen_bits: tuple[int, ...] = ()
    load_bits: tuple[int, ...] = ()


@dataclass
class OracleResult:
    objective: float
    best: OracleConfiguration
    evaluated: int
    infeasible: int


def split_network(net: Network, sub_id: int, lines_b2: set[int],
                  gens_b2: set[int], loads_b2: set[int]) -> Network:
    """Physical two-node copy of the network for an open coupler.

    The new node takes the moved elements; the substation shunt is split
    evenly between the halves.  Raises if the result is disconnected.
    """
    new_id = max(s.id for s in net.substations) + 1
    subs = []
    for s in net.substations:
        if s.id == sub_id:
            half = replace(s, shunt_g=s.shunt_g / 2.0, shunt_b=s.shunt_b / 2.0)
            subs.append(half)
            subs.append(replace(half, id=new_id, is_ref=False))
        else:
            subs.append(s)
    lines = []
    for l in net.lines:
        if l.id in lines_b2:
            if l.from_sub == sub_id:
                l = replace(l, from_sub=new_id)
            elif l.to_sub == sub_id:
                l = replace(l, to_sub=new_id)
        lines.append(l)
    gens = tuple(replace(g, sub=new_id) if g.id in gens_b2 else g
                 for g in net.generators)
    loads = tuple(replace(d, sub=new_id) if d.id in loads_b2 else d
                  for d in net.loads)
    return Network(base_power=net.base_power, substations=tuple(subs),
                   lines=tuple(lines), generators=gens, loads=loads,
                   name=f"{net.name}+split{sub_id}")


ENUMERATION_GUARD = 2 ** 20


def brute_force_oracle(net: Network, scenario: Scenario,
                       scope: tuple[int, ...], cfg: NtoConfig) -> OracleResult:
    """Enumerate admissible single-substation configurations.

    Every assignment keeping at least two lines per busbar is evaluated by
    the same linear power flow on a physically split network copy; the
    unsplit operating point is always included.  Ties go to the
    lexicographically smallest assignment bit-string (lines, then
    generators, then loads, ascending ids), with the unsplit configuration
    ranked first of all.
    """
    total = 0
    for i in scope:
        deg = net.degree(i)
        if deg < 4:
            raise GridModelError(f"substation {i} has fewer than 4 lines")
        total += 2 ** (deg + len(net.gens_at(i)) + len(net.loads_at(i)))
    if total > ENUMERATION_GUARD:
        raise ValueError(f"enumeration size {total} exceeds guard {ENUMERATION_GUARD}")

    mode = cfg.pf_mode
    loads = scenario.loads_pq(net)
    dispatch = scenario.dispatch(net)
    base = solve_fixed_injection_pf(net, dispatch, loads, mode,
                                    scenario.base_dtheta, cfg)
    best_obj = base.objective_pwl if base.feasible else math.inf
    best = OracleConfiguration(sub_id=None)
    evaluated = 1
    infeasible = 0 if base.feasible else 1

    for i in scope:
        incident = sorted(net.lines_at(i), key=lambda l: l.id)
        gens = sorted(net.gens_at(i), key=lambda g: g.id)
        loads_i = sorted(net.loads_at(i), key=lambda d: d.id)
        deg = len(incident)
        for line_bits in itertools.product((0, 1), repeat=deg):
            moved = sum(line_bits)
            if moved < 2 or deg - moved < 2:
                continue
            lines_b2 = {l.id for l, bit in zip(incident, line_bits) if bit}
            for elem_bits in itertools.product((0, 1), repeat=len(gens) + len(loads_i)):
                gen_bits = elem_bits[:len(gens)]
                load_bits = elem_bits[len(gens):]
                gens_b2 = {g.id for g, bit in zip(gens, gen_bits) if bit}
                loads_b2 = {d.id for d, bit in zip(loads_i, load_bits) if bit}
                evaluated += 1
                try:
                    snet = split_network(net, i, lines_b2, gens_b2, loads_b2)
                except GridModelError:
                    infeasible += 1
                    continue
                res = solve_fixed_injection_pf(snet, dispatch, loads, mode,
                                               scenario.base_dtheta, cfg)
                if not res.feasible:
                    infeasible += 1
                    continue
                if res.objective_pwl < best_obj - 1e-12:
                    best_obj = res.objective_pwl
                    best = OracleConfiguration(i, line_bits, gen_bits, load_bits)
    return OracleResult(objective=best_obj, best=best,
                        evaluated=evaluated, infeasible=infeasible)
