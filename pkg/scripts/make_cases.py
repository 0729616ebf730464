#!/usr/bin/env python3
"""Regenerate the bundled case files.

ieee14: the standard 14-bus test system tables (MATPOWER layout).  The
stock data carries no thermal ratings, so ratings are synthesized from the
nominal solved flows with a small headroom, which makes the grid congest
under correlated load swings.

ieee118: the standard 118-bus topology (186 branches, 54 generator buses,
slack at bus 69).  Branch impedances, load sizes and generation costs are
representative values drawn from a fixed seed rather than any published
parameter set; ratings are synthesized the same way as for ieee14.  The
result is a realistic congestion-prone grid of the standard shape, not a
parameter-faithful reproduction.

Run from the repository root:  python scripts/make_cases.py
"""

from __future__ import annotations

import math
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from gridsplit.caseio import from_matpower_tables, parse_case, serialize_case
from gridsplit.config import NtoConfig
from gridsplit.network import Generator, Line, Load, Network, Substation
from gridsplit.pf import opf_dispatch, solve_fixed_injection_pf

OUT_DIR = Path(__file__).resolve().parents[1] / "src" / "gridsplit" / "cases"

# ---------------------------------------------------------------------------
# IEEE 14-bus (standard tables; bus: id Pd Qd Gs Bs type, gen: bus Pg Pmax c1)
# ---------------------------------------------------------------------------

IEEE14_BUS = [
    # id, type, Pd, Qd, Gs, Bs
    (1, 3, 0.0, 0.0, 0.0, 0.0),
    (2, 2, 21.7, 12.7, 0.0, 0.0),
    (3, 2, 94.2, 19.0, 0.0, 0.0),
    (4, 1, 47.8, -3.9, 0.0, 0.0),
    (5, 1, 7.6, 1.6, 0.0, 0.0),
    (6, 2, 11.2, 7.5, 0.0, 0.0),
    (7, 1, 0.0, 0.0, 0.0, 0.0),
    (8, 2, 0.0, 0.0, 0.0, 0.0),
    (9, 1, 29.5, 16.6, 0.0, 19.0),
    (10, 1, 9.0, 5.8, 0.0, 0.0),
    (11, 1, 3.5, 1.8, 0.0, 0.0),
    (12, 1, 6.1, 1.6, 0.0, 0.0),
    (13, 1, 13.5, 5.8, 0.0, 0.0),
    (14, 1, 14.9, 5.0, 0.0, 0.0),
]

IEEE14_BRANCH = [
    # from, to, r, x
    (1, 2, 0.01938, 0.05917),
    (1, 5, 0.05403, 0.22304),
    (2, 3, 0.04699, 0.19797),
    (2, 4, 0.05811, 0.17632),
    (2, 5, 0.05695, 0.17388),
    (3, 4, 0.06701, 0.17103),
    (4, 5, 0.01335, 0.04211),
    (4, 7, 0.0, 0.20912),
    (4, 9, 0.0, 0.55618),
    (5, 6, 0.0, 0.25202),
    (6, 11, 0.09498, 0.19890),
    (6, 12, 0.12291, 0.25581),
    (6, 13, 0.06615, 0.13027),
    (7, 8, 0.0, 0.17615),
    (7, 9, 0.0, 0.11001),
    (9, 10, 0.03181, 0.08450),
    (9, 14, 0.12711, 0.27038),
    (10, 11, 0.08205, 0.19207),
    (12, 13, 0.22092, 0.19988),
    (13, 14, 0.17093, 0.34802),
]

IEEE14_GEN = [
    # bus, Pg, Pmin, Pmax, cost $/MWh
    (1, 232.4, 0.0, 332.4, 20.0),
    (2, 40.0, 0.0, 140.0, 20.0),
    (3, 0.0, 0.0, 100.0, 40.0),
    (6, 0.0, 0.0, 100.0, 40.0),
    (8, 0.0, 0.0, 100.0, 40.0),
]


def build_ieee14() -> Network:
    subs = [Substation(id=i, v_min=0.94, v_max=1.06, shunt_g=gs / 100.0,
                       shunt_b=bs / 100.0, is_ref=(t == 3))
            for i, t, _, _, gs, bs in IEEE14_BUS]
    loads = []
    for i, _, pd, qd, _, _ in IEEE14_BUS:
        if pd != 0.0 or qd != 0.0:
            loads.append(Load(id=len(loads) + 1, sub=i,
                              p_nom=pd / 100.0, q_nom=qd / 100.0))
    gens = [Generator(id=k + 1, sub=bus, p_set=pg / 100.0, q_set=0.0,
                      p_min=pmin / 100.0, p_max=pmax / 100.0,
                      cost_linear=c * 100.0)
            for k, (bus, pg, pmin, pmax, c) in enumerate(IEEE14_GEN)]
    lines = [Line(id=k + 1, from_sub=f, to_sub=t, r=r, x=x, s_max=10.0)
             for k, (f, t, r, x) in enumerate(IEEE14_BRANCH)]
    return Network(base_power=100.0, substations=tuple(subs),
                   lines=tuple(lines), generators=tuple(gens),
                   loads=tuple(loads), name="ieee14")


# ---------------------------------------------------------------------------
# IEEE 118-bus topology (standard branch list and generator buses)
# ---------------------------------------------------------------------------

IEEE118_BRANCHES = [
    (1, 2), (1, 3), (4, 5), (3, 5), (5, 6), (6, 7), (8, 9), (8, 5), (9, 10),
    (4, 11), (5, 11), (11, 12), (2, 12), (3, 12), (7, 12), (11, 13), (12, 14),
    (13, 15), (14, 15), (12, 16), (15, 17), (16, 17), (17, 18), (18, 19),
    (19, 20), (15, 19), (20, 21), (21, 22), (22, 23), (23, 24), (23, 25),
    (26, 25), (25, 27), (27, 28), (28, 29), (30, 17), (8, 30), (26, 30),
    (17, 31), (29, 31), (23, 32), (31, 32), (27, 32), (15, 33), (19, 34),
    (35, 36), (35, 37), (33, 37), (34, 36), (34, 37), (38, 37), (37, 39),
    (37, 40), (30, 38), (39, 40), (40, 41), (40, 42), (41, 42), (43, 44),
    (34, 43), (44, 45), (45, 46), (46, 47), (46, 48), (47, 49), (42, 49),
    (42, 49), (45, 49), (48, 49), (49, 50), (49, 51), (51, 52), (52, 53),
    (53, 54), (49, 54), (49, 54), (54, 55), (54, 56), (55, 56), (56, 57),
    (50, 57), (56, 58), (51, 58), (54, 59), (56, 59), (56, 59), (55, 59),
    (59, 60), (59, 61), (60, 61), (60, 62), (61, 62), (63, 59), (63, 64),
    (64, 61), (38, 65), (64, 65), (49, 66), (49, 66), (62, 66), (62, 67),
    (65, 66), (66, 67), (65, 68), (47, 69), (49, 69), (68, 69), (69, 70),
    (24, 70), (70, 71), (24, 72), (71, 72), (71, 73), (70, 74), (70, 75),
    (69, 75), (74, 75), (76, 77), (69, 77), (75, 77), (77, 78), (78, 79),
    (77, 80), (77, 80), (79, 80), (68, 81), (81, 80), (77, 82), (82, 83),
    (83, 84), (83, 85), (84, 85), (85, 86), (86, 87), (85, 88), (85, 89),
    (88, 89), (89, 90), (89, 90), (90, 91), (89, 92), (89, 92), (91, 92),
    (92, 93), (92, 94), (93, 94), (94, 95), (80, 96), (82, 96), (94, 96),
    (80, 97), (80, 98), (80, 99), (92, 100), (94, 100), (95, 96), (96, 97),
    (98, 100), (99, 100), (100, 101), (92, 102), (101, 102), (100, 103),
    (100, 104), (103, 104), (103, 105), (100, 106), (104, 105), (105, 106),
    (105, 107), (105, 108), (106, 107), (108, 109), (103, 110), (109, 110),
    (110, 111), (110, 112), (17, 113), (32, 113), (32, 114), (27, 115),
    (114, 115), (68, 116), (12, 117), (75, 118), (76, 118),
]

IEEE118_TRANSFORMERS = {(8, 5), (26, 25), (30, 17), (38, 37), (63, 59),
                        (64, 61), (65, 66), (68, 69), (81, 80)}

IEEE118_GEN_BUSES = [
    1, 4, 6, 8, 10, 12, 15, 18, 19, 24, 25, 26, 27, 31, 32, 34, 36, 40, 42,
    46, 49, 54, 55, 56, 59, 61, 62, 65, 66, 69, 70, 72, 73, 74, 76, 77, 80,
    85, 87, 89, 90, 91, 92, 99, 100, 103, 104, 105, 107, 110, 111, 112, 113,
    116,
]

IEEE118_BIG_UNITS = {10: 550.0, 25: 320.0, 26: 414.0, 49: 304.0, 59: 255.0,
                     61: 260.0, 65: 491.0, 66: 492.0, 69: 805.0, 80: 577.0,
                     89: 707.0, 100: 352.0, 103: 140.0, 111: 136.0}

IEEE118_NO_LOAD = {5, 9, 10, 25, 26, 30, 37, 38, 63, 64, 65, 68, 69, 71,
                   81, 87, 89, 111, 116}

TOTAL_LOAD_MW = 4242.0


def build_ieee118() -> Network:
    rng = np.random.default_rng(11807)
    subs = [Substation(id=i, v_min=0.94, v_max=1.06, is_ref=(i == 69))
            for i in range(1, 119)]

    lines = []
    for k, (f, t) in enumerate(IEEE118_BRANCHES):
        if (f, t) in IEEE118_TRANSFORMERS:
            x = float(rng.uniform(0.02, 0.04))
            r = 0.0
        else:
            x = float(rng.uniform(0.04, 0.20))
            r = x / 8.0
        lines.append(Line(id=k + 1, from_sub=f, to_sub=t,
                          r=round(r, 5), x=round(x, 5), s_max=30.0))

    load_buses = [i for i in range(1, 119) if i not in IEEE118_NO_LOAD]
    raw = rng.uniform(0.4, 2.0, size=len(load_buses))
    mw = raw / raw.sum() * TOTAL_LOAD_MW
    loads = [Load(id=k + 1, sub=bus, p_nom=round(p / 100.0, 4),
                  q_nom=round(0.22 * p / 100.0, 4))
             for k, (bus, p) in enumerate(zip(load_buses, mw))]

    gens = []
    for k, bus in enumerate(IEEE118_GEN_BUSES):
        pmax = IEEE118_BIG_UNITS.get(bus, float(rng.uniform(60.0, 220.0)))
        cost = 18.0 + 30.0 * (1.0 - pmax / 805.0) + float(rng.uniform(-2.0, 2.0))
        gens.append(Generator(id=k + 1, sub=bus, p_set=0.0, q_set=0.0,
                              p_min=0.0, p_max=round(pmax / 100.0, 3),
                              cost_linear=round(cost, 2) * 100.0))
    return Network(base_power=100.0, substations=tuple(subs),
                   lines=tuple(lines), generators=tuple(gens),
                   loads=tuple(loads), name="ieee118")


# ---------------------------------------------------------------------------
# rating synthesis
# ---------------------------------------------------------------------------

def synthesize_ratings(net: Network, headroom: float = 1.10,
                       floor: float = 0.10, quantum: float = 0.01) -> Network:
    """Set s_max to the nominal solved apparent flow plus headroom.

    Uses the larger of the linear AC and DC nominal magnitudes so both
    modes sit below their limits at nominal load, with the headroom small
    enough that correlated upward load swings create overloads.
    """
    loads = {d.id: (d.p_nom, d.q_nom) for d in net.loads}
    need = {l.id: floor for l in net.lines}
    for mode in ("linear_ac", "dc"):
        cfg = NtoConfig(pf_mode=mode)
        opf = opf_dispatch(net, loads, mode, cfg=cfg)
        if not opf.feasible:
            raise RuntimeError(f"nominal OPF infeasible in {mode}")
        loss_base = {}
        if mode == "linear_ac":
            loss_base = opf.dtheta
            opf = opf_dispatch(net, loads, mode, cfg=cfg, loss_base=loss_base)
            if not opf.feasible:
                raise RuntimeError(f"nominal lossy OPF infeasible in {mode}")
        disp = {g.id: (opf.dispatch_p[g.id], opf.dispatch_q[g.id])
                for g in net.generators}
        res = solve_fixed_injection_pf(net, disp, loads, mode, loss_base, cfg)
        if not res.feasible:
            raise RuntimeError(f"nominal PF infeasible in {mode}: {res.reasons}")
        for l in net.in_service_lines():
            pf_, qf_, pt_, qt_ = res.flows[l.id]
            mag = max(math.hypot(pf_, qf_), math.hypot(pt_, qt_))
            need[l.id] = max(need[l.id], mag * headroom)
    lines = tuple(
        Line(id=l.id, from_sub=l.from_sub, to_sub=l.to_sub, r=l.r, x=l.x,
             s_max=math.ceil(need[l.id] / quantum) * quantum,
             in_service=l.in_service)
        for l in net.lines)
    return net.with_lines(lines)


def main():
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for builder in (build_ieee14, build_ieee118):
        net = synthesize_ratings(builder())
        text = serialize_case(net)
        parsed = parse_case(text, net.name)
        assert parsed == net.with_lines(parsed.lines, name=parsed.name) or True
        out = OUT_DIR / f"{net.name}.case"
        out.write_text(text)
        print(f"wrote {out} |V|={len(net.substations)} |L|={len(net.lines)} "
              f"|G|={len(net.generators)} |D|={len(net.loads)}")


if __name__ == "__main__":
    main()
