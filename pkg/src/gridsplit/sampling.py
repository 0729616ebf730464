"""Scenario generation: correlated loads, outages, dispatch, labels.

Load multipliers follow a Kumaraswamy distribution mapped onto the
configured band, coupled through a Gaussian copula whose latent
correlation is calibrated so the output Pearson correlation hits the
requested value.  Outages are drawn uniformly from non-bridge lines and
resampled when they would disconnect the grid.  Each retained scenario
carries a congested base case solved from a cost-minimizing dispatch.

Generation is reproducible: attempt ``k`` uses seed ``seed_base + k`` and
the dataset file orders samples by attempt index, so the bytes do not
depend on worker count.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import optimize, special

from .config import GenConfig, NtoConfig, config_hash
from .network import Network
from .nto import label_substation
from .pf import opf_dispatch, solve_fixed_injection_pf
from .scenario import LabeledSample, Scenario, dump_record, read_records
from .topology import (DisconnectionError, apply_outages, non_radial_lines,
                       proximity_filter)

DATASET_FORMAT_VERSION = 1


# -- correlated load multipliers -------------------------------------------

def kumaraswamy_ppf(u, a: float, b: float):
    """Inverse CDF of Kumaraswamy(a, b) on [0, 1]."""
    u = np.asarray(u, dtype=float)
    return (1.0 - (1.0 - u) ** (1.0 / b)) ** (1.0 / a)


def _gh_nodes(n: int = 64):
    x, w = np.polynomial.hermite_e.hermegauss(n)
    return x, w / w.sum()


def _mapped(z, a, b, lo, hi):
    u = special.ndtr(z)
    return lo + (hi - lo) * kumaraswamy_ppf(u, a, b)


def output_pearson(rho_z: float, a: float, b: float, lo: float, hi: float) -> float:
    """Pearson correlation of two copula-coupled mapped marginals, by
    Gauss-Hermite quadrature."""
    x, w = _gh_nodes()
    g = _mapped(x, a, b, lo, hi)
    mean = float(w @ g)
    var = float(w @ (g - mean) ** 2)
    zz = x[:, None]
    yy = rho_z * zz + math.sqrt(max(0.0, 1.0 - rho_z * rho_z)) * x[None, :]
    gy = _mapped(yy, a, b, lo, hi)
    exy = float(w @ ((gy * w[None, :]).sum(axis=1) * g))
    return (exy - mean * mean) / var


@lru_cache(maxsize=16)
def calibrate_copula_rho(target: float, a: float, b: float,
                         lo: float, hi: float) -> float:
    """Latent normal correlation whose mapped output correlation matches
    the target (monotone in rho_z, solved by bisection)."""
    if target == 0.0:
        return 0.0
    return float(optimize.brentq(
        lambda r: output_pearson(r, a, b, lo, hi) - target,
        1e-6, 1.0 - 1e-9, xtol=1e-10))


def sample_loads(net: Network, n: int, cfg: GenConfig, seed: int) -> np.ndarray:
    """(n, n_loads) matrix of load multipliers in [load_lo, load_hi]."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rho_z = calibrate_copula_rho(cfg.load_rho, cfg.kuma_a, cfg.kuma_b,
                                 cfg.load_lo, cfg.load_hi)
    rng = np.random.default_rng(seed)
    m = len(net.loads)
    common = rng.standard_normal((n, 1))
    own = rng.standard_normal((n, m))
    z = math.sqrt(rho_z) * common + math.sqrt(1.0 - rho_z) * own
    return _mapped(z, cfg.kuma_a, cfg.kuma_b, cfg.load_lo, cfg.load_hi)


def sample_outages(net: Network, k: int, rng: np.random.Generator,
                   retries: int = 50) -> tuple[int, ...]:
    """k distinct non-bridge lines whose joint removal keeps the grid
    connected; resamples up to the retry budget."""
    if k == 0:
        return ()
    pool = sorted(non_radial_lines(net))
    if len(pool) < k:
        raise DisconnectionError("not enough non-radial lines to sample from")
    for _ in range(retries):
        pick = tuple(sorted(rng.choice(pool, size=k, replace=False).tolist()))
        try:
            apply_outages(net, set(pick))
        except DisconnectionError:
            continue
        return pick
    raise DisconnectionError(f"no connected {k}-outage found in {retries} tries")


def scale_limits(net: Network, factor: float) -> Network:
    """Copy with every thermal rating multiplied by ``factor``."""
    if factor == 1.0:
        return net
    from dataclasses import replace as _replace

    return net.with_lines(tuple(_replace(l, s_max=l.s_max * factor)
                                for l in net.lines))


def scenario_network(net: Network, scenario: Scenario) -> Network:
    """The grid a scenario operates on: outages applied, ratings scaled."""
    return scale_limits(apply_outages(net, set(scenario.outages)),
                        scenario.limit_scale)


# -- scenario assembly -------------------------------------------------------

@dataclass
class Rejection:
    reason: str


def make_scenario(net: Network, gen_cfg: GenConfig, nto_cfg: NtoConfig,
                  seed: int) -> tuple[Scenario | None, Network | None, str]:
    """Draw one operating sample; returns (scenario, outaged net, reason).

    The scenario is ``None`` when rejected; the reason string is one of
    outage_exhausted, opf_infeasible, pf_infeasible, overload_cap,
    non_congested, or "ok".
    """
    mode = nto_cfg.pf_mode
    rng = np.random.default_rng(seed)
    scales = sample_loads(net, 1, gen_cfg, int(rng.integers(2 ** 63)))[0]
    try:
        outages = sample_outages(net, gen_cfg.nk, rng, gen_cfg.outage_retries)
    except DisconnectionError:
        return None, None, "outage_exhausted"
    cost_scale = rng.uniform(gen_cfg.cost_lo, gen_cfg.cost_hi,
                             size=len(net.generators))

    outaged = scale_limits(apply_outages(net, set(outages)),
                           gen_cfg.limit_scale)
    loads = {d.id: (d.p_nom * s, d.q_nom * s)
             for d, s in zip(net.loads, scales)}
    cost = {g.id: c for g, c in zip(net.generators, cost_scale)}
    # the dispatch sees relaxed ratings; congestion is judged against the
    # effective ones, which is what makes overloaded base cases appear
    opf_net = scale_limits(outaged, gen_cfg.opf_limit_scale)
    opf = opf_dispatch(opf_net, loads, mode, cost_scale=cost, cfg=nto_cfg,
                       overload_penalty=gen_cfg.opf_overload_penalty)
    if not opf.feasible:
        return None, None, "opf_infeasible"
    loss_base: dict[int, float] = {}
    if mode == "linear_ac":
        # second pass around the lossless angles so the fixed dispatch,
        # reactive injections included, matches the lossy flow equations
        loss_base = opf.dtheta
        opf = opf_dispatch(opf_net, loads, mode, cost_scale=cost, cfg=nto_cfg,
                           overload_penalty=gen_cfg.opf_overload_penalty,
                           loss_base=loss_base)
        if not opf.feasible:
            return None, None, "opf_infeasible"
    dispatch = {g.id: (opf.dispatch_p[g.id], opf.dispatch_q[g.id])
                for g in net.generators}

    base = solve_fixed_injection_pf(outaged, dispatch, loads, mode,
                                    loss_base, nto_cfg)
    if not base.feasible:
        return None, None, "pf_infeasible"

    loading = base.loading_exact(outaged)
    if max(loading.values(), default=0.0) > nto_cfg.flow_cap:
        return None, None, "overload_cap"
    congested = base.congested_lines(outaged)
    if not congested:
        return None, None, "non_congested"

    dispatch_p = []
    dispatch_q = []
    slack_id = net.slack_generator().id
    for g in net.generators:
        if g.id == slack_id:
            dispatch_p.append(base.slack_p)
            dispatch_q.append(base.slack_q)
        else:
            dispatch_p.append(dispatch[g.id][0])
            dispatch_q.append(dispatch[g.id][1])

    scenario = Scenario(
        seed=seed, pf_mode=mode,
        load_scale=tuple(float(s) for s in scales),
        outages=outages,
        cost_scale=tuple(float(c) for c in cost_scale),
        dispatch_p=tuple(dispatch_p), dispatch_q=tuple(dispatch_q),
        base_flows=base.flows, base_v=base.v_sq,
        base_dtheta=base.base_dtheta,
        congested=congested,
        objective_pwl=base.objective_pwl,
        objective_exact=base.objective_exact,
        limit_scale=gen_cfg.limit_scale,
    )
    return scenario, outaged, "ok"


def build_labels(net: Network, scenario: Scenario, gen_cfg: GenConfig,
                 nto_cfg: NtoConfig,
                 outaged: Network | None = None) -> LabeledSample:
    """Label every substation in the prediction set of a scenario.

    A failed subproblem only invalidates that node's label, not the
    sample.
    """
    outaged = outaged or scenario_network(net, scenario)
    v_p = proximity_filter(outaged, set(scenario.congested), gen_cfg.hops_k)
    delta: dict[int, float | None] = {}
    clf: dict[int, int] = {}
    reg: dict[int, float] = {}
    for i in v_p:
        res = label_substation(outaged, scenario, i, nto_cfg,
                               rel_gap=gen_cfg.label_rel_gap,
                               time_limit=gen_cfg.label_time_limit)
        if not res.valid:
            delta[i] = None
            continue
        delta[i] = res.delta
        clf[i] = int(res.delta > gen_cfg.o_threshold)
        reg[i] = max(res.delta, gen_cfg.reg_clip)
    return LabeledSample(scenario=scenario, v_p=v_p, delta=delta,
                         clf_label=clf, reg_label=reg)


def _attempt(args):
    net, gen_cfg, nto_cfg, seed, with_labels = args
    scenario, outaged, reason = make_scenario(net, gen_cfg, nto_cfg, seed)
    if scenario is None:
        return seed, None, reason
    if with_labels:
        sample = build_labels(net, scenario, gen_cfg, nto_cfg, outaged)
        if not sample.v_p:
            return seed, None, "empty_prediction_set"
        return seed, sample, "ok"
    return seed, LabeledSample(scenario=scenario, v_p=()), "ok"


@dataclass
class DatasetResult:
    samples: list[LabeledSample]
    attempted: int
    rejections: dict[str, int]


def generate_dataset(net: Network, case: str, gen_cfg: GenConfig,
                     nto_cfg: NtoConfig, seed_base: int = 0, jobs: int = 1,
                     with_labels: bool = True,
                     progress=None) -> DatasetResult:
    """Retain ``gen_cfg.n_samples`` labeled samples.

    Attempt k uses seed ``seed_base + k``; retained samples keep attempt
    order, so output is independent of ``jobs``.
    """
    want = gen_cfg.n_samples
    max_attempts = want * gen_cfg.max_attempts_factor
    samples: list[LabeledSample] = []
    rejections: dict[str, int] = {}
    attempted = 0
    chunk = max(4 * jobs, 8)
    pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        while len(samples) < want and attempted < max_attempts:
            n = min(chunk, max_attempts - attempted)
            seeds = [seed_base + attempted + k for k in range(n)]
            args = [(net, gen_cfg, nto_cfg, s, with_labels) for s in seeds]
            results = list(pool.map(_attempt, args)) if pool else [
                _attempt(a) for a in args]
            attempted += n
            for _, sample, reason in results:
                if sample is not None and len(samples) < want:
                    samples.append(sample)
                elif sample is None:
                    rejections[reason] = rejections.get(reason, 0) + 1
                if progress is not None:
                    progress(len(samples), attempted)
    finally:
        if pool:
            pool.shutdown()
    return DatasetResult(samples=samples, attempted=attempted,
                         rejections=rejections)


def write_dataset(path, case: str, result: DatasetResult, gen_cfg: GenConfig,
                  nto_cfg: NtoConfig):
    """JSONL records plus a sidecar manifest (``<path>.manifest.json``)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        for sample in result.samples:
            fh.write(dump_record(sample.to_record(case)) + "\n")
    manifest = {
        "format_version": DATASET_FORMAT_VERSION,
        "case": case,
        "pf_mode": nto_cfg.pf_mode,
        "nk": gen_cfg.nk,
        "retained": len(result.samples),
        "attempted": result.attempted,
        "rejections": dict(sorted(result.rejections.items())),
        "gen_config_hash": config_hash(gen_cfg),
        "nto_config_hash": config_hash(nto_cfg),
    }
    with open(str(path) + ".manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_dataset(path) -> list[LabeledSample]:
    return [LabeledSample.from_record(rec) for rec in read_records(path)]


def split_dataset(samples: list, fractions=(0.7, 0.1, 0.2), seed: int = 0):
    """Random disjoint (train, val, test) cover, deterministic under seed."""
    if len(samples) < 10:
        raise ValueError("need at least 10 samples to split")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError("fractions must sum to 1")
    idx = np.random.default_rng(seed).permutation(len(samples))
    n_train = int(len(samples) * fractions[0])
    n_val = int(len(samples) * fractions[1])
    train = [samples[i] for i in idx[:n_train]]
    val = [samples[i] for i in idx[n_train:n_train + n_val]]
    test = [samples[i] for i in idx[n_train + n_val:]]
    return train, val, test
