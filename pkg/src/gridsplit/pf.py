"""Linearized power flow, loss linearization, and the dispatch LP.

The flow model keeps squared voltage magnitudes and reactive power (the
"linear_ac" mode) or drops them entirely ("dc").  Per line end the active
and reactive flows are

    P = g_i*V_i + (g_l/2)(V_i - V_j) - b_l(th_i - th_j) + PL
    Q = -b_i*V_i - (b_l/2)(V_i - V_j) - g_l(th_i - th_j) + QL

with the substation shunt entering through each incident line end, series
admittance g_l = r/(r^2+x^2), b_l = x/(r^2+x^2), and quadratic losses
PL = (g_l/2)dth^2, QL = -(b_l/2)dth^2 replaced by their tangent at a base
angle difference.  With every element on busbar 1 this collapses to one
node per substation; the reference substation pins angle zero and its
voltage setpoint, and the slack generator's injection floats to close the
balance under the linearized losses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as spla

from .config import NtoConfig
from .milp import MilpProblem, default_backend
from .network import Network
from .pwl import PwlPenalty, penalty_from_config, polygon_norm, polygonize_circle
from .scenario import Scenario

_BOUND_TOL = 1e-7


@dataclass(frozen=True)
class LossCoefs:
    """Affine per-end loss expressions p(d) = slope_p*d + const_p (and q
    alike) in the end-oriented angle difference d, tangent to the
    quadratic loss at the base difference."""

    slope_p: float
    const_p: float
    slope_q: float
    const_q: float

    def p_at(self, dtheta: float) -> float:
        return self.slope_p * dtheta + self.const_p

    def q_at(self, dtheta: float) -> float:
        return self.slope_q * dtheta + self.const_q


def loss_coefs(g: float, b: float, dtheta_base: float) -> LossCoefs:
    return LossCoefs(
        slope_p=g * dtheta_base,
        const_p=-0.5 * g * dtheta_base * dtheta_base,
        slope_q=-b * dtheta_base,
        const_q=0.5 * b * dtheta_base * dtheta_base,
    )


def linearize_losses(net: Network, base_dtheta: dict[int, float]) -> dict[int, LossCoefs]:
    """Tangent loss expressions per in-service line at the given base
    from-to angle differences (missing lines default to a flat base)."""
    return {l.id: loss_coefs(l.g, l.b, base_dtheta.get(l.id, 0.0))
            for l in net.in_service_lines()}


@dataclass
class PfResult:
    mode: str
    feasible: bool
    reasons: tuple[str, ...]
    theta: dict[int, float]
    v_sq: dict[int, float]
    flows: dict[int, tuple[float, float, float, float]]   # id -> (pf,qf,pt,qt)
    dtheta: dict[int, float]                              # from-to angle diff
    base_dtheta: dict[int, float]                         # linearization base
    slack_p: float
    slack_q: float
    objective_pwl: float
    objective_exact: float

    def loading_exact(self, net: Network) -> dict[int, float]:
        out = {}
        for l in net.in_service_lines():
            pf_, qf_, _, _ = self.flows[l.id]
            out[l.id] = math.hypot(pf_, qf_) / l.s_max
        return out

    def loading_gauge(self, net: Network, cfg: NtoConfig) -> dict[int, float]:
        out = {}
        for l in net.in_service_lines():
            pf_, qf_, _, _ = self.flows[l.id]
            if self.mode == "dc":
                out[l.id] = abs(pf_) / l.s_max
            else:
                out[l.id] = polygon_norm(pf_, qf_, cfg.circle_segments) / l.s_max
        return out

    def congested_lines(self, net: Network) -> tuple[int, ...]:
        loading = self.loading_exact(net)
        return tuple(sorted(lid for lid, s in loading.items() if s > 1.0))


def objective_from_flows(net: Network, flows, mode: str, cfg: NtoConfig,
                         pen: PwlPenalty | None = None) -> tuple[float, float]:
    """(PWL objective, exact objective) from per-line from-side flows."""
    if pen is None:
        pen = penalty_from_config(cfg)
    pwl_total = 0.0
    exact_total = 0.0
    for l in net.in_service_lines():
        pf_, qf_ = flows[l.id][0], flows[l.id][1]
        if mode == "dc":
            gauge = abs(pf_) / l.s_max
        else:
            gauge = polygon_norm(pf_, qf_, cfg.circle_segments) / l.s_max
        pwl_total += pen.value(gauge)
        exact_total += pen.exact(math.hypot(pf_, qf_) / l.s_max)
    return pwl_total, exact_total


def solve_fixed_injection_pf(net: Network, dispatch: dict[int, tuple[float, float]],
                             loads: dict[int, tuple[float, float]], mode: str,
                             base_dtheta: dict[int, float] | None,
                             cfg: NtoConfig) -> PfResult:
    """Square linear solve of the unsplit network with fixed injections.

    All generator injections are parameters except the slack generator,
    whose P (and Q in linear_ac mode) floats; the reference substation
    pins angle zero and, in linear_ac mode, its voltage setpoint.
    """
    subs = net.substations
    n = len(subs)
    pos = {s.id: k for k, s in enumerate(subs)}
    lines = net.in_service_lines()
    slack = net.slack_generator()
    ref = net.ref_sub
    ac = mode == "linear_ac"
    base_dtheta = dict(base_dtheta or {})
    coefs = linearize_losses(net, base_dtheta) if ac else None

    # columns: theta(n) | [V(n)] | P_slack | [Q_slack]
    n_v = n if ac else 0
    col_ps = n + n_v
    size = col_ps + (2 if ac else 1)
    rows_i: list[int] = []
    rows_j: list[int] = []
    vals: list[float] = []
    rhs = np.zeros(size)

    def put(r, c, v):
        rows_i.append(r)
        rows_j.append(c)
        vals.append(v)

    # balance rows: P at row k, Q at row n + k
    for l in lines:
        i, j = pos[l.from_sub], pos[l.to_sub]
        gi = net.sub(l.from_sub).shunt_g
        gj = net.sub(l.to_sub).shunt_g
        bi = net.sub(l.from_sub).shunt_b
        bj = net.sub(l.to_sub).shunt_b
        if ac:
            lc = coefs[l.id]
            # from side -> row i
            put(i, i, -l.b + lc.slope_p)
            put(i, j, l.b - lc.slope_p)
            put(i, n + i, gi + 0.5 * l.g)
            put(i, n + j, -0.5 * l.g)
            rhs[i] -= lc.const_p
            # to side -> row j (loss slope flips with the orientation)
            put(j, j, -l.b - lc.slope_p)
            put(j, i, l.b + lc.slope_p)
            put(j, n + j, gj + 0.5 * l.g)
            put(j, n + i, -0.5 * l.g)
            rhs[j] -= lc.const_p
            # reactive, from side -> row n+i
            put(n + i, i, -l.g + lc.slope_q)
            put(n + i, j, l.g - lc.slope_q)
            put(n + i, n + i, -bi - 0.5 * l.b)
            put(n + i, n + j, 0.5 * l.b)
            rhs[n + i] -= lc.const_q
            # reactive, to side -> row n+j
            put(n + j, j, -l.g - lc.slope_q)
            put(n + j, i, l.g + lc.slope_q)
            put(n + j, n + j, -bj - 0.5 * l.b)
            put(n + j, n + i, 0.5 * l.b)
            rhs[n + j] -= lc.const_q
        else:
            put(i, i, -l.b)
            put(i, j, l.b)
            put(j, j, -l.b)
            put(j, i, l.b)

    # injections: fixed generators and loads on the right-hand side
    for g in net.generators:
        k = pos[g.sub]
        if g.id == slack.id:
            put(k, col_ps, -1.0)
            if ac:
                put(n + k, col_ps + 1, -1.0)
            continue
        p, q = dispatch.get(g.id, (g.p_set, g.q_set))
        rhs[k] += p
        if ac:
            rhs[n + k] += q
    for d in net.loads:
        k = pos[d.sub]
        p, q = loads.get(d.id, (d.p_nom, d.q_nom))
        rhs[k] -= p
        if ac:
            rhs[n + k] -= q

    # reference pins replace nothing: appended as the last rows
    pin_row = n + n_v
    put(pin_row, pos[ref], 1.0)
    rhs[pin_row] = 0.0
    if ac:
        v0 = _ref_voltage_setpoint(net)
        put(pin_row + 1, n + pos[ref], 1.0)
        rhs[pin_row + 1] = v0

    mat = sparse.coo_matrix((vals, (rows_i, rows_j)), shape=(size, size)).tocsc()
    try:
        x = spla.spsolve(mat, rhs)
    except Exception:
        x = np.full(size, np.nan)

    reasons: list[str] = []
    if not np.all(np.isfinite(x)):
        return _infeasible_result(mode, ("singular_system",), base_dtheta)
    residual = np.abs(mat @ x - rhs).max()
    if residual > 1e-7 * max(1.0, np.abs(rhs).max()):
        return _infeasible_result(mode, ("ill_conditioned_system",), base_dtheta)

    theta = {s.id: float(x[pos[s.id]]) for s in subs}
    v_sq = ({s.id: float(x[n + pos[s.id]]) for s in subs} if ac
            else {s.id: 1.0 for s in subs})
    slack_p = float(x[col_ps])
    slack_q = float(x[col_ps + 1]) if ac else 0.0

    flows: dict[int, tuple[float, float, float, float]] = {}
    dtheta: dict[int, float] = {}
    for l in lines:
        d = theta[l.from_sub] - theta[l.to_sub]
        dtheta[l.id] = d
        if ac:
            lc = coefs[l.id]
            vi, vj = v_sq[l.from_sub], v_sq[l.to_sub]
            si, sj = net.sub(l.from_sub), net.sub(l.to_sub)
            pf_ = si.shunt_g * vi + 0.5 * l.g * (vi - vj) - l.b * d + lc.p_at(d)
            qf_ = -si.shunt_b * vi - 0.5 * l.b * (vi - vj) - l.g * d + lc.q_at(d)
            # to side: opposite angle difference, its own shunt terms
            pt_ = (sj.shunt_g * vj + 0.5 * l.g * (vj - vi) + l.b * d
                   + lc.slope_p * d + lc.const_p)
            qt_ = (-sj.shunt_b * vj - 0.5 * l.b * (vj - vi) + l.g * d
                   + lc.slope_q * d + lc.const_q)
        else:
            pf_ = -l.b * d
            qf_ = 0.0
            pt_ = -pf_
            qt_ = 0.0
        flows[l.id] = (pf_, qf_, pt_, qt_)

    if ac:
        for s in subs:
            if not (s.v_min_sq - _BOUND_TOL <= v_sq[s.id] <= s.v_max_sq + _BOUND_TOL):
                reasons.append("voltage_bounds")
                break
    if any(abs(t) > cfg.theta_box + _BOUND_TOL for t in theta.values()):
        reasons.append("angle_bounds")
    if not (slack.p_min - _BOUND_TOL <= slack_p <= slack.p_max + _BOUND_TOL):
        reasons.append("slack_bounds")

    obj_pwl, obj_exact = objective_from_flows(net, flows, mode, cfg)
    return PfResult(mode=mode, feasible=not reasons, reasons=tuple(reasons),
                    theta=theta, v_sq=v_sq, flows=flows, dtheta=dtheta,
                    base_dtheta=base_dtheta, slack_p=slack_p, slack_q=slack_q,
                    objective_pwl=obj_pwl, objective_exact=obj_exact)


def _infeasible_result(mode, reasons, base_dtheta):
    return PfResult(mode=mode, feasible=False, reasons=tuple(reasons),
                    theta={}, v_sq={}, flows={}, dtheta={},
                    base_dtheta=base_dtheta, slack_p=math.nan, slack_q=math.nan,
                    objective_pwl=math.inf, objective_exact=math.inf)


def _ref_voltage_setpoint(net: Network) -> float:
    s = net.sub(net.ref_sub)
    return min(max(1.0, s.v_min_sq), s.v_max_sq)


def linear_pf(net: Network, scenario: Scenario, mode: str | None = None,
              cfg: NtoConfig | None = None) -> PfResult:
    """No-switching power flow for a scenario.

    In linear_ac mode the losses are linearized around the scenario's
    stored base angles; when the scenario carries none, a flat (lossless)
    pass supplies them and the returned result records the base actually
    used, keeping later problem builds consistent with this solution.
    """
    mode = mode or scenario.pf_mode
    cfg = cfg or NtoConfig(pf_mode=mode)
    loads = scenario.loads_pq(net)
    dispatch = scenario.dispatch(net)
    if mode == "dc":
        return solve_fixed_injection_pf(net, dispatch, loads, mode, {}, cfg)
    base = scenario.base_dtheta
    if not base:
        flat = solve_fixed_injection_pf(net, dispatch, loads, mode, {}, cfg)
        if not flat.feasible:
            return flat
        base = flat.dtheta
    return solve_fixed_injection_pf(net, dispatch, loads, mode, base, cfg)


@dataclass
class OpfResult:
    feasible: bool
    dispatch_p: dict[int, float]
    dispatch_q: dict[int, float]
    cost: float
    max_overload: float
    status: str
    dtheta: dict[int, float]


def opf_dispatch(net: Network, loads: dict[int, tuple[float, float]],
                 mode: str, cost_scale: dict[int, float] | None = None,
                 cfg: NtoConfig | None = None,
                 overload_penalty: float = 2000.0,
                 v_margin: float = 0.01,
                 loss_base: dict[int, float] | None = None) -> OpfResult:
    """Cost-minimizing dispatch LP on the unsplit topology.

    Thermal limits are soft: each line may exceed its rating at a linear
    penalty, so stressed load patterns yield congested dispatches instead
    of infeasibility.  ``loss_base`` selects the loss linearization angles
    (absent: lossless); pass the angles of a first lossless solve to get a
    dispatch, including reactive injections, consistent with the lossy
    flow equations.  Voltage bounds are tightened by ``v_margin`` (squared
    units) so the fixed-dispatch re-solve stays inside the real band
    instead of starting on a bound vertex.
    """
    cfg = cfg or NtoConfig(pf_mode=mode)
    ac = mode == "linear_ac"
    cost_scale = cost_scale or {}
    coefs = linearize_losses(net, loss_base or {}) if ac else None
    prob = MilpProblem("opf")
    ref = net.ref_sub

    th = {s.id: prob.add_var(f"th[{s.id}]", -cfg.theta_box, cfg.theta_box)
          for s in net.substations}
    prob.fix_var(th[ref], 0.0)
    v = {}
    if ac:
        for s in net.substations:
            margin = min(v_margin, 0.4 * (s.v_max_sq - s.v_min_sq))
            v[s.id] = prob.add_var(f"v[{s.id}]", s.v_min_sq + margin,
                                   s.v_max_sq - margin)
        prob.fix_var(v[ref], _ref_voltage_setpoint(net))

    pg = {}
    qg = {}
    for g in net.generators:
        scale = cost_scale.get(g.id, 1.0)
        pg[g.id] = prob.add_var(f"pg[{g.id}]", g.p_min, g.p_max,
                                obj=g.cost_linear * scale)
        if ac:
            qg[g.id] = prob.add_var(f"qg[{g.id}]")

    lines = net.in_service_lines()
    pfv, qfv, ptv, qtv = {}, {}, {}, {}
    for l in lines:
        pfv[l.id] = prob.add_var(f"pf[{l.id}]")
        ptv[l.id] = prob.add_var(f"pt[{l.id}]")
        if ac:
            qfv[l.id] = prob.add_var(f"qf[{l.id}]")
            qtv[l.id] = prob.add_var(f"qt[{l.id}]")
        sigma = prob.add_var(f"sigma[{l.id}]", 0.0, math.inf,
                             obj=overload_penalty)
        if ac:
            for a, b, c in polygonize_circle(l.s_max, cfg.circle_segments):
                prob.add_le([(pfv[l.id], a), (qfv[l.id], b), (sigma, -l.s_max)], c)
        else:
            prob.add_le([(pfv[l.id], 1.0), (sigma, -l.s_max)], l.s_max)
            prob.add_le([(pfv[l.id], -1.0), (sigma, -l.s_max)], l.s_max)

    for l in lines:
        i, j = l.from_sub, l.to_sub
        si, sj = net.sub(i), net.sub(j)
        if ac:
            lc = coefs[l.id]
            prob.add_eq([(pfv[l.id], 1.0),
                         (v[i], -si.shunt_g - 0.5 * l.g), (v[j], 0.5 * l.g),
                         (th[i], l.b - lc.slope_p), (th[j], -(l.b - lc.slope_p))],
                        lc.const_p)
            prob.add_eq([(qfv[l.id], 1.0),
                         (v[i], si.shunt_b + 0.5 * l.b), (v[j], -0.5 * l.b),
                         (th[i], l.g - lc.slope_q), (th[j], -(l.g - lc.slope_q))],
                        lc.const_q)
            prob.add_eq([(ptv[l.id], 1.0),
                         (v[j], -sj.shunt_g - 0.5 * l.g), (v[i], 0.5 * l.g),
                         (th[j], l.b + lc.slope_p), (th[i], -(l.b + lc.slope_p))],
                        lc.const_p)
            prob.add_eq([(qtv[l.id], 1.0),
                         (v[j], sj.shunt_b + 0.5 * l.b), (v[i], -0.5 * l.b),
                         (th[j], l.g + lc.slope_q), (th[i], -(l.g + lc.slope_q))],
                        lc.const_q)
        else:
            prob.add_eq([(pfv[l.id], 1.0), (th[i], l.b), (th[j], -l.b)], 0.0)
            prob.add_eq([(ptv[l.id], 1.0), (th[j], l.b), (th[i], -l.b)], 0.0)

    for s in net.substations:
        coeffs_p: list[tuple[int, float]] = []
        coeffs_q: list[tuple[int, float]] = []
        rhs_p = 0.0
        rhs_q = 0.0
        for g in net.gens_at(s.id):
            coeffs_p.append((pg[g.id], 1.0))
            if ac:
                coeffs_q.append((qg[g.id], 1.0))
        for d in net.loads_at(s.id):
            p, q = loads.get(d.id, (d.p_nom, d.q_nom))
            rhs_p += p
            rhs_q += q
        for l in net.lines_at(s.id):
            end_p = pfv if l.from_sub == s.id else ptv
            coeffs_p.append((end_p[l.id], -1.0))
            if ac:
                end_q = qfv if l.from_sub == s.id else qtv
                coeffs_q.append((end_q[l.id], -1.0))
        prob.add_eq(coeffs_p, rhs_p)
        if ac:
            prob.add_eq(coeffs_q, rhs_q)

    report, x = default_backend().solve(prob)
    if x is None or report.status == "infeasible":
        return OpfResult(False, {}, {}, math.inf, math.inf, report.status, {})
    dispatch_p = {g.id: float(x[pg[g.id]]) for g in net.generators}
    dispatch_q = ({g.id: float(x[qg[g.id]]) for g in net.generators}
                  if ac else {g.id: 0.0 for g in net.generators})
    overloads = [float(x[prob.var(f"sigma[{l.id}]")]) for l in lines]
    dtheta = {l.id: float(x[th[l.from_sub]] - x[th[l.to_sub]]) for l in lines}
    return OpfResult(True, dispatch_p, dispatch_q, float(report.objective_value),
                     max(overloads) if overloads else 0.0, report.status, dtheta)
