"""Configuration dataclasses and the flat key-value config file reader.

Defaults follow the experimental setup this toolkit targets: proximity
hops k=5, gamma=2, loading threshold 0.8, top-5 candidates, learning rate
1e-3, up to 100 epochs, decision threshold 0.5, labeling threshold 0.05,
regression clip -0.2, 70/10/20 splits, solver relative gap 1e-2.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path


@dataclass(frozen=True)
class NtoConfig:
    """Knobs of the switching MILP and its linear power flow."""

    z_max: int = 1                  # max number of open couplers
    gamma: float = 2.0              # loading penalty exponent
    s_threshold: float = 0.8        # loading below this is not penalized
    threshold_on_power: bool = False  # clip the gamma-power instead of the loading
    big_m_theta: float | None = None  # None: per-instance 2*(theta_box)
    big_m_v: float | None = None      # None: per-substation (v_max_sq - v_min_sq)
    circle_segments: int = 16       # tangent cuts approximating the flow circle
    penalty_breakpoints: int = 6    # PWL points on [s_threshold, s_cap]
    s_cap: float = 1.25             # last PWL breakpoint; beyond: last slope
    flow_cap: float = 2.0           # hard cap on per-line loading variables
    theta_box: float = math.pi / 2  # angle variable bounds
    rel_gap: float = 0.01
    time_limit: float | None = None
    pf_mode: str = "linear_ac"      # "linear_ac" | "dc"

    def __post_init__(self):
        if self.z_max < 0:
            raise ValueError("z_max must be >= 0")
        if self.gamma < 1.0:
            raise ValueError("gamma must be >= 1")
        if not (0.0 <= self.s_threshold < self.s_cap):
            raise ValueError("need 0 <= s_threshold < s_cap")
        if self.circle_segments < 8 or self.circle_segments % 2:
            raise ValueError("circle_segments must be even and >= 8")
        if self.penalty_breakpoints < 3:
            raise ValueError("penalty_breakpoints must be >= 3")
        if self.pf_mode not in ("linear_ac", "dc"):
            raise ValueError(f"unknown pf_mode {self.pf_mode!r}")
        for name in ("big_m_theta", "big_m_v"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class GenConfig:
    """Scenario generation and labeling knobs."""

    n_samples: int = 100            # retained samples to produce
    nk: int = 0                     # planned line outages per sample
    load_lo: float = 0.8
    load_hi: float = 1.2
    load_rho: float = 0.75          # pairwise Pearson correlation target
    kuma_a: float = 1.6
    kuma_b: float = 2.8
    cost_lo: float = 0.8
    cost_hi: float = 1.2
    opf_overload_penalty: float = 2000.0  # $/pu objective weight on overloads
    opf_limit_scale: float = 1.25   # dispatch sees ratings scaled by this
    limit_scale: float = 1.0        # thermal limits used for the scenario
    hops_k: int = 5
    o_threshold: float = 0.05       # classification labeling threshold
    reg_clip: float = -0.2          # lower clip of the regression target
    label_time_limit: float = 10.0
    label_rel_gap: float = 0.01
    outage_retries: int = 50
    max_attempts_factor: int = 50   # attempts allowed per retained sample

    def __post_init__(self):
        if self.nk not in (0, 1, 2):
            raise ValueError("nk must be 0, 1 or 2")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")


@dataclass(frozen=True)
class TrainConfig:
    """Training knobs of the splitting predictor."""

    task: str = "clf"               # "clf" | "reg"
    mode: str = "het"               # "hom" | "het"
    hidden: int = 64
    layers: int = 5
    lr: float = 1e-3
    max_epochs: int = 100
    patience: int = 10
    min_delta: float = 1e-4
    batch_size: int = 32
    threshold: float = 0.5          # decision threshold on the sigmoid output
    seed: int = 0

    def __post_init__(self):
        if self.task not in ("clf", "reg"):
            raise ValueError(f"unknown task {self.task!r}")
        if self.mode not in ("hom", "het"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.lr <= 0:
            raise ValueError("lr must be positive")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")


@dataclass(frozen=True)
class RunConfig:
    """End-to-end pipeline configuration."""

    case: str = ""
    pf_mode: str = "linear_ac"
    hops_k: int = 5
    top_x: int = 5
    task: str = "clf"
    seeds: tuple[int, ...] = (0,)
    out_dir: str = "out"
    jobs: int = 1
    split_fractions: tuple[float, float, float] = (0.7, 0.1, 0.2)
    nto: NtoConfig = field(default_factory=NtoConfig)
    gen: GenConfig = field(default_factory=GenConfig)
    train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if self.top_x < 1:
            raise ValueError("top_x must be >= 1")
        if self.hops_k < 0:
            raise ValueError("hops_k must be >= 0")
        if not self.seeds:
            raise ValueError("seeds must be non-empty")


_BOOL = {"true": True, "1": True, "yes": True, "on": True,
         "false": False, "0": False, "no": False, "off": False}


def _coerce(raw: str, ftype):
    raw = raw.strip()
    if ftype is bool or "bool" in str(ftype):
        try:
            return _BOOL[raw.lower()]
        except KeyError:
            raise ValueError(f"bad boolean {raw!r}") from None
    if ftype is int:
        return int(raw)
    if ftype is float or ftype == "float | None":
        if raw.lower() in ("none", ""):
            return None
        return float(raw)
    if "tuple" in str(ftype):
        parts = [p for p in raw.replace(",", " ").split() if p]
        if "float" in str(ftype):
            return tuple(float(p) for p in parts)
        return tuple(int(p) for p in parts)
    return raw


def _apply(cls, values: dict[str, str]):
    kwargs = {}
    for f in dataclasses.fields(cls):
        if f.name in values:
            kwargs[f.name] = _coerce(values[f.name], f.type)
    return kwargs


def read_config(path, overrides: dict[str, str] | None = None) -> RunConfig:
    """Read a flat ``key = value`` config file into a :class:`RunConfig`.

    Sections are allowed but purely organizational; keys address dataclass
    fields by name regardless of section.  Unknown keys are rejected.
    """
    parser = configparser.ConfigParser(default_section="__default__")
    parser.optionxform = str
    text = Path(path).read_text()
    if not text.lstrip().startswith("["):
        text = "[run]\n" + text
    parser.read_string(text)
    flat: dict[str, str] = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            if key in flat:
                raise ValueError(f"duplicate config key {key!r}")
            flat[key] = value
    if overrides:
        flat.update(overrides)

    known = set()
    for cls in (RunConfig, NtoConfig, GenConfig, TrainConfig):
        known |= {f.name for f in dataclasses.fields(cls)}
    known -= {"nto", "gen", "train"}
    unknown = set(flat) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")

    run_kwargs = _apply(RunConfig, flat)
    run_kwargs["nto"] = NtoConfig(**_apply(NtoConfig, flat))
    run_kwargs["gen"] = GenConfig(**_apply(GenConfig, flat))
    run_kwargs["train"] = TrainConfig(**_apply(TrainConfig, flat))
    return RunConfig(**run_kwargs)


def config_hash(cfg) -> str:
    """Stable short hash of any (possibly nested) config dataclass."""
    blob = json.dumps(dataclasses.asdict(cfg), sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]
