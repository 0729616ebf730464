"""Case file parsing and serialization.

The case format is a sectioned plain-text table document::

    baseMVA
    100.0

    units
    mw

    bus
    # id  v_min  v_max  shunt_g  shunt_b  is_ref
    1  0.94  1.06  0.0  0.0  1

    branch
    # id  from  to  r  x  s_max  status
    1  1  2  0.01938  0.05917  120.0  1

    gen
    # id  bus  p_set  q_set  p_min  p_max  cost_linear
    1  1  232.4  -16.9  0.0  332.4  20.0

    load
    # id  bus  p_nom  q_nom
    1  2  21.7  12.7

Columns are whitespace separated, ``#`` starts a comment, one record per
row.  The optional ``units`` section selects ``mw`` (power columns in
MW/MVAr/MVA, costs in $/MWh; the default) or ``pu`` (already on the MVA
base, costs in $ per per-unit).  Voltages are magnitudes in both variants
and are squared internally.  Resistance and reactance are always per-unit.

Serialization always emits ``units pu`` so that parse -> serialize ->
parse reproduces the exact same :class:`~gridsplit.network.Network`.

``from_matpower_tables`` documents the mapping from the widely used
MATPOWER/pglib case-table layout (bus/gen/branch/gencost matrices).
"""

from __future__ import annotations

from .network import Generator, GridModelError, Line, Load, Network, Substation

_SECTIONS = ("baseMVA", "units", "bus", "branch", "gen", "load")


class CaseFormatError(Exception):
    """Malformed case document; message carries the 1-based line number."""


def _tokenize(text: str):
    """Yield (line_number, tokens) for non-empty, non-comment lines."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield lineno, body.split()


def parse_case(text: str, name: str = "") -> Network:
    """Parse a case document into a validated :class:`Network`.

    Raises
    ------
    CaseFormatError
        On syntax problems (with the offending line number).
    GridModelError
        On semantic problems (dangling references, zero reactance,
        missing reference substation, ...).
    """
    sections: dict[str, list[tuple[int, list[str]]]] = {s: [] for s in _SECTIONS}
    current: str | None = None
    for lineno, toks in _tokenize(text):
        if len(toks) == 1 and toks[0] in _SECTIONS:
            current = toks[0]
            continue
        if current is None:
            raise CaseFormatError(f"line {lineno}: data before any section header")
        sections[current].append((lineno, toks))

    base = _parse_scalar_section(sections, "baseMVA")
    units = _parse_units_section(sections)
    to_pu = 1.0 / base if units == "mw" else 1.0
    cost_to_pu = base if units == "mw" else 1.0

    subs = []
    for lineno, toks in sections["bus"]:
        vals = _floats(lineno, "bus", toks, 6)
        subs.append(Substation(
            id=_int(lineno, toks[0]),
            v_min=vals[1], v_max=vals[2],
            shunt_g=vals[3] * to_pu, shunt_b=vals[4] * to_pu,
            is_ref=bool(_int(lineno, toks[5])),
        ))

    lines = []
    for lineno, toks in sections["branch"]:
        vals = _floats(lineno, "branch", toks, 7)
        lines.append(Line(
            id=_int(lineno, toks[0]),
            from_sub=_int(lineno, toks[1]), to_sub=_int(lineno, toks[2]),
            r=vals[3], x=vals[4], s_max=vals[5] * to_pu,
            in_service=bool(_int(lineno, toks[6])),
        ))

    gens = []
    for lineno, toks in sections["gen"]:
        vals = _floats(lineno, "gen", toks, 7)
        gens.append(Generator(
            id=_int(lineno, toks[0]), sub=_int(lineno, toks[1]),
            p_set=vals[2] * to_pu, q_set=vals[3] * to_pu,
            p_min=vals[4] * to_pu, p_max=vals[5] * to_pu,
            cost_linear=vals[6] * cost_to_pu,
        ))

    loads = []
    for lineno, toks in sections["load"]:
        vals = _floats(lineno, "load", toks, 4)
        loads.append(Load(
            id=_int(lineno, toks[0]), sub=_int(lineno, toks[1]),
            p_nom=vals[2] * to_pu, q_nom=vals[3] * to_pu,
        ))

    return Network(base_power=base, substations=tuple(subs), lines=tuple(lines),
                   generators=tuple(gens), loads=tuple(loads), name=name)


def _parse_scalar_section(sections, key) -> float:
    rows = sections[key]
    if len(rows) != 1 or len(rows[0][1]) != 1:
        raise CaseFormatError(f"section {key!r} must hold exactly one scalar")
    lineno, toks = rows[0]
    try:
        value = float(toks[0])
    except ValueError:
        raise CaseFormatError(f"line {lineno}: bad number {toks[0]!r}") from None
    if not value > 0.0:
        raise GridModelError("base_power must be positive")
    return value


def _parse_units_section(sections) -> str:
    rows = sections["units"]
    if not rows:
        return "mw"
    if len(rows) != 1 or len(rows[0][1]) != 1:
        raise CaseFormatError("section 'units' must hold exactly one token")
    lineno, toks = rows[0]
    if toks[0] not in ("mw", "pu"):
        raise CaseFormatError(f"line {lineno}: units must be 'mw' or 'pu'")
    return toks[0]


def _int(lineno: int, tok: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise CaseFormatError(f"line {lineno}: bad integer {tok!r}") from None


def _floats(lineno: int, section: str, toks: list[str], expect: int) -> list[float]:
    if len(toks) != expect:
        raise CaseFormatError(
            f"line {lineno}: {section} row needs {expect} columns, got {len(toks)}"
        )
    out = []
    for tok in toks:
        try:
            out.append(float(tok))
        except ValueError:
            raise CaseFormatError(f"line {lineno}: bad number {tok!r}") from None
    return out


def serialize_case(net: Network) -> str:
    """Render a Network back to case-document text (always per-unit)."""
    out = []
    if net.name:
        out.append(f"# case: {net.name}")
    out.append("baseMVA")
    out.append(repr(net.base_power))
    out.append("")
    out.append("units")
    out.append("pu")
    out.append("")
    out.append("bus")
    out.append("# id v_min v_max shunt_g shunt_b is_ref")
    for s in net.substations:
        out.append(f"{s.id} {float(s.v_min)!r} {float(s.v_max)!r} "
                   f"{float(s.shunt_g)!r} {float(s.shunt_b)!r} {int(s.is_ref)}")
    out.append("")
    out.append("branch")
    out.append("# id from to r x s_max status")
    for l in net.lines:
        out.append(f"{l.id} {l.from_sub} {l.to_sub} {float(l.r)!r} {float(l.x)!r} "
                   f"{float(l.s_max)!r} {int(l.in_service)}")
    out.append("")
    out.append("gen")
    out.append("# id bus p_set q_set p_min p_max cost_linear")
    for g in net.generators:
        out.append(f"{g.id} {g.sub} {float(g.p_set)!r} {float(g.q_set)!r} "
                   f"{float(g.p_min)!r} {float(g.p_max)!r} {float(g.cost_linear)!r}")
    out.append("")
    out.append("load")
    out.append("# id bus p_nom q_nom")
    for d in net.loads:
        out.append(f"{d.id} {d.sub} {float(d.p_nom)!r} {float(d.q_nom)!r}")
    out.append("")
    return "\n".join(out)


def load_case(path) -> Network:
    from pathlib import Path

    p = Path(path)
    return parse_case(p.read_text(), name=p.stem)


def bundled_case_path(name: str):
    """Path of a case file shipped with the package (e.g. 'ieee14')."""
    from pathlib import Path

    p = Path(__file__).parent / "cases" / f"{name}.case"
    if not p.exists():
        raise FileNotFoundError(f"no bundled case named {name!r}")
    return p


def load_bundled_case(name: str) -> Network:
    return load_case(bundled_case_path(name))


def from_matpower_tables(baseMVA, bus, gen, branch, gencost=None,
                         name: str = "", unlimited_rating_mva: float = 1e4) -> Network:
    """Convert MATPOWER-style case tables to a :class:`Network`.

    Column mapping (indices follow the standard case-table layout):

    * ``bus``: BUS_I(0), BUS_TYPE(1; 3 marks the reference), PD(2), QD(3),
      GS(4), BS(5), VMAX(11), VMIN(12).  Nonzero PD/QD becomes one load.
    * ``gen``: GEN_BUS(0), PG(1), QG(2), PMAX(8), PMIN(9); out-of-service
      units (STATUS(7) <= 0) are dropped.
    * ``branch``: F_BUS(0), T_BUS(1), R(2), X(3), RATE_A(5), STATUS(10).
      A zero RATE_A means unlimited and is replaced by
      ``unlimited_rating_mva``.  Tap ratios and phase shifts are ignored
      (out of scope here).
    * ``gencost``: polynomial rows; the linear coefficient becomes
      ``cost_linear`` ($/MWh).  Quadratic terms are dropped.

    All powers are MW/MVAr on ``baseMVA`` and converted to per-unit.
    """
    base = float(baseMVA)
    subs = []
    loads = []
    load_id = 0
    for row in bus:
        bus_id = int(row[0])
        subs.append(Substation(
            id=bus_id, v_min=float(row[12]), v_max=float(row[11]),
            shunt_g=float(row[4]) / base, shunt_b=float(row[5]) / base,
            is_ref=int(row[1]) == 3,
        ))
        pd, qd = float(row[2]), float(row[3])
        if pd != 0.0 or qd != 0.0:
            load_id += 1
            loads.append(Load(id=load_id, sub=bus_id,
                              p_nom=pd / base, q_nom=qd / base))

    gens = []
    for k, row in enumerate(gen):
        if len(row) > 7 and float(row[7]) <= 0:
            continue
        c1 = 0.0
        if gencost is not None:
            c1 = _linear_cost(gencost[k])
        pg = float(row[1]) / base
        pmin = min(float(row[9]) / base, pg)
        pmax = max(float(row[8]) / base, pg)
        gens.append(Generator(
            id=k + 1, sub=int(row[0]), p_set=pg, q_set=float(row[2]) / base,
            p_min=pmin, p_max=pmax, cost_linear=c1 * base,
        ))

    lines = []
    for k, row in enumerate(branch):
        rate = float(row[5])
        if rate == 0.0:
            rate = unlimited_rating_mva
        status = int(row[10]) if len(row) > 10 else 1
        lines.append(Line(
            id=k + 1, from_sub=int(row[0]), to_sub=int(row[1]),
            r=float(row[2]), x=float(row[3]), s_max=rate / base,
            in_service=status != 0,
        ))

    return Network(base_power=base, substations=tuple(subs), lines=tuple(lines),
                   generators=tuple(gens), loads=tuple(loads), name=name)


def _linear_cost(row) -> float:
    # polynomial rows: MODEL(0)=2, STARTUP, SHUTDOWN, NCOST, cN ... c1 c0
    if int(row[0]) != 2:
        return 0.0
    ncost = int(row[3])
    coeffs = [float(v) for v in row[4:4 + ncost]]
    if len(coeffs) >= 2:
        return coeffs[-2]
    return 0.0
