"""Piecewise-linear machinery: circle cuts and the convex loading penalty.

The quadratic apparent-flow circle P^2 + Q^2 <= s_max^2 is replaced by
tangent half-planes (an outer, circumscribing polygon), and the loading
penalty max(s, s_th)^gamma by chords between breakpoints (an epigraph
over-approximation).  Both keep every point of the true feasible set
feasible, and both carry analytic error bounds used by the objective
consistency checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def polygonize_circle(s_max: float, n: int) -> list[tuple[float, float, float]]:
    """Tangent half-planes ``a*P + b*Q <= c`` outer-approximating the disc
    of radius ``s_max``.

    Cut ``k`` touches the circle at angle ``2*pi*k/n``; the polygon admits
    points up to radius ``s_max / cos(pi/n)``.
    """
    if n < 8 or n % 2:
        raise ValueError("need an even segment count >= 8")
    if s_max <= 0:
        raise ValueError("s_max must be positive")
    cuts = []
    for k in range(n):
        alpha = 2.0 * math.pi * k / n
        cuts.append((math.cos(alpha), math.sin(alpha), s_max))
    return cuts


def polygon_norm(p: float, q: float, n: int) -> float:
    """Support value max_k cos(a_k)*p + sin(a_k)*q of the cut family.

    This is the loading gauge the MILP sees; it underestimates the true
    magnitude by at most the factor cos(pi/n).
    """
    angles = 2.0 * math.pi * np.arange(n) / n
    return float(np.max(np.cos(angles) * p + np.sin(angles) * q))


@dataclass(frozen=True)
class PwlPenalty:
    """Convex PWL over-approximation of the loading penalty.

    ``value(s)`` equals max(floor, max_k slope_k*s + intercept_k) which is
    exact at every breakpoint, constant below the threshold, and extends
    past the last breakpoint on the final slope.
    """

    gamma: float
    s_threshold: float
    s_cap: float
    breakpoints: tuple[float, ...]
    slopes: tuple[float, ...]
    intercepts: tuple[float, ...]
    threshold_on_power: bool = False

    @property
    def floor(self) -> float:
        if self.threshold_on_power:
            return self.s_threshold
        return self.s_threshold ** self.gamma

    def exact(self, s: float) -> float:
        """The penalty being approximated, evaluated exactly."""
        s = abs(s)
        if self.threshold_on_power:
            return max(s ** self.gamma, self.s_threshold)
        return max(s, self.s_threshold) ** self.gamma

    def value(self, s: float) -> float:
        s = abs(s)
        best = self.floor
        for m, c in zip(self.slopes, self.intercepts):
            best = max(best, m * s + c)
        return best

    def chord_error_bound(self) -> float:
        """Max over-approximation error on [s_threshold, s_cap].

        For each chord the worst gap to s**gamma sits where the derivative
        matches the chord slope; evaluated in closed form.
        """
        worst = 0.0
        g = self.gamma
        for (lo, hi), m, c in zip(
                zip(self.breakpoints[:-1], self.breakpoints[1:]),
                self.slopes, self.intercepts):
            if g == 1.0:
                continue
            s_star = (m / g) ** (1.0 / (g - 1.0)) if m > 0 else lo
            s_star = min(max(s_star, lo), hi)
            worst = max(worst, m * s_star + c - s_star ** g)
        return worst

    def extension_deficit(self, s: float) -> float:
        """Under-approximation beyond the last breakpoint (0 within it)."""
        s = abs(s)
        if s <= self.s_cap:
            return 0.0
        return max(0.0, self.exact(s) - self.value(s))


def pwl_penalty(gamma: float, s_threshold: float, n_breakpoints: int,
                s_cap: float = 1.25,
                threshold_on_power: bool = False) -> PwlPenalty:
    """Chord PWL of the loading penalty on [s_threshold, s_cap].

    Breakpoints sit at the threshold and uniformly up to ``s_cap``.  With
    ``threshold_on_power`` the clip applies to s**gamma instead of to the
    loading itself; the approximated curve is then max(s**gamma, s_th),
    whose knee sits at s_th**(1/gamma).
    """
    if n_breakpoints < 3:
        raise ValueError("need at least 3 breakpoints")
    if gamma < 1.0:
        raise ValueError("gamma must be >= 1")
    knee = s_threshold ** (1.0 / gamma) if threshold_on_power else s_threshold
    if not knee < s_cap:
        raise ValueError("threshold knee must lie below s_cap")
    pts = tuple(np.linspace(knee, s_cap, n_breakpoints).tolist())
    slopes = []
    intercepts = []
    for lo, hi in zip(pts[:-1], pts[1:]):
        flo, fhi = lo ** gamma, hi ** gamma
        m = (fhi - flo) / (hi - lo)
        slopes.append(m)
        intercepts.append(flo - m * lo)
    return PwlPenalty(gamma=gamma, s_threshold=s_threshold, s_cap=s_cap,
                      breakpoints=pts, slopes=tuple(slopes),
                      intercepts=tuple(intercepts),
                      threshold_on_power=threshold_on_power)


def penalty_from_config(cfg) -> PwlPenalty:
    return pwl_penalty(cfg.gamma, cfg.s_threshold, cfg.penalty_breakpoints,
                       s_cap=cfg.s_cap, threshold_on_power=cfg.threshold_on_power)


def objective_error_bound(pen: PwlPenalty, loadings, n_segments: int,
                          dc: bool) -> float:
    """Rigorous |exact - reported| bound for a set of line loadings.

    Combines the chord error, the polygon-gauge shrink factor cos(pi/n)
    (linear AC only), and the deficit of the last-slope extension for
    loadings beyond the PWL range.
    """
    chord = pen.chord_error_bound()
    lip = max(pen.slopes) if pen.slopes else 0.0
    shrink = 0.0 if dc else 1.0 - math.cos(math.pi / n_segments)
    total = 0.0
    for s in loadings:
        s = abs(s)
        total += chord + lip * s * shrink + pen.extension_deficit(s)
    return total
