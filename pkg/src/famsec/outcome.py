"""Outcome-side confidence: partial moments against a minimal standard.

Given an empirical cumulative-reward distribution and a minimal
acceptable outcome z*, the indicator contrasts expected excess gains
above z* (upper partial moment) with expected shortfalls below it (lower
partial moment), squashed onto [-1, 1].  Also here: the order-0 odds
ratio, a discrete-class variant, a prospect-theory meta-utility over the
empirical CDF, and standard sweeps producing confidence profiles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .rollouts import RewardSamples


class EmptySamples(ValueError):
    pass


class InvalidDist(ValueError):
    pass


@dataclass(frozen=True)
class OutcomeStandard:
    """Minimal acceptable outcome plus moment order and squash steepness."""

    z_star: float = 0.0
    alpha: int = 1
    k: float = 1.0

    def __post_init__(self):
        if self.alpha < 0 or int(self.alpha) != self.alpha:
            raise ValueError("alpha must be a non-negative integer")
        if self.k <= 0:
            raise ValueError("k must be positive")


@dataclass(frozen=True)
class OutcomeAssessmentResult:
    upm: float
    lpm: float
    ratio: float  # may be inf; report writers must not serialize it raw
    x_o: float
    n: int
    flags: tuple[str, ...] = ()


class PartialMoments(NamedTuple):
    upm: float
    lpm: float
    ratio: float


def _values(samples) -> np.ndarray:
    if isinstance(samples, RewardSamples):
        vals = samples.array()
    else:
        vals = np.asarray(list(samples), dtype=float)
    if vals.size == 0:
        raise EmptySamples("no outcome samples")
    return vals


def upm_lpm(samples, std: OutcomeStandard) -> PartialMoments:
    """Empirical upper/lower partial moments of order ``std.alpha``.

    At order 0 the moments are the favorable/unfavorable probability
    masses, with ties at z* counted as favorable.  At order >= 1 they are
    mean excess gains/losses to the power alpha; ties contribute zero to
    both sides.
    """
    vals = _values(samples)
    z = std.z_star
    if std.alpha == 0:
        upm = float(np.mean(vals >= z))
        lpm = float(np.mean(vals < z))
    else:
        gains = np.maximum(vals - z, 0.0)
        losses = np.maximum(z - vals, 0.0)
        if std.alpha != 1:
            gains = gains**std.alpha
            losses = losses**std.alpha
        upm = float(gains.mean())
        lpm = float(losses.mean())
    if lpm > 0.0:
        ratio = upm / lpm
    elif upm > 0.0:
        ratio = math.inf
    else:
        ratio = math.nan
    return PartialMoments(upm, lpm, ratio)


def x_o_from_ratio(upm: float, lpm: float, k: float = 1.0) -> float:
    """Squash a moment pair to [-1, 1] via (u^k - l^k) / (u^k + l^k).

    Computed from the moments directly (never through a ratio float), so
    one-sided mass gives exactly +/-1.  Both moments zero means the
    standard is met exactly; that maps to 0.
    """
    if upm < 0 or lpm < 0:
        raise ValueError("partial moments must be non-negative")
    if upm == 0.0 and lpm == 0.0:
        return 0.0
    scale = max(upm, lpm)
    u = (upm / scale) ** k
    l = (lpm / scale) ** k
    return (u - l) / (u + l)


def assess_outcomes(samples, std: OutcomeStandard) -> OutcomeAssessmentResult:
    """Full indicator for one sample batch against one standard."""
    vals = _values(samples)
    pm = upm_lpm(vals, std)
    flags: list[str] = []
    if pm.upm == 0.0 and pm.lpm == 0.0:
        flags.append("standard-exactly-met")
    return OutcomeAssessmentResult(
        upm=pm.upm,
        lpm=pm.lpm,
        ratio=pm.ratio,
        x_o=x_o_from_ratio(pm.upm, pm.lpm, std.k),
        n=int(vals.size),
        flags=tuple(flags),
    )


def omega_ratio(samples, z_star: float) -> float:
    """Odds of favorable vs unfavorable outcomes (order-0 moment ratio)."""
    return upm_lpm(samples, OutcomeStandard(z_star=z_star, alpha=0)).ratio


@dataclass(frozen=True)
class DiscreteOutcomeDist:
    """Probabilities over strictly increasing integer outcome classes."""

    classes: tuple[int, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.classes) != len(self.probs) or not self.classes:
            raise InvalidDist("classes and probs must be equal-length and non-empty")
        if any(b <= a for a, b in zip(self.classes, self.classes[1:])):
            raise InvalidDist("classes must be strictly increasing")
        if any(p < 0 for p in self.probs):
            raise InvalidDist("negative probability")
        if abs(sum(self.probs) - 1.0) > 1e-9:
            raise InvalidDist(f"probabilities sum to {sum(self.probs)}")


def goa(dist: DiscreteOutcomeDist, z_star: int, k: float = 1.0) -> OutcomeAssessmentResult:
    """Discrete-class outcome assessment.

    Favorable side sums (z - z* + 1) * P(z) over classes z >= z* (the +1
    keeps exact attainment favorable); unfavorable side sums
    (z* - z) * P(z) over z < z*.
    """
    lo, hi = dist.classes[0], dist.classes[-1]
    if not lo - 1 <= z_star <= hi + 1:
        raise InvalidDist(f"z_star={z_star} not within or adjacent to class range")
    dupm = sum((z - z_star + 1) * p for z, p in zip(dist.classes, dist.probs) if z >= z_star)
    dlpm = sum((z_star - z) * p for z, p in zip(dist.classes, dist.probs) if z < z_star)
    if dlpm > 0.0:
        ratio = dupm / dlpm
    elif dupm > 0.0:
        ratio = math.inf
    else:
        ratio = math.nan
    return OutcomeAssessmentResult(
        upm=float(dupm),
        lpm=float(dlpm),
        ratio=ratio,
        x_o=x_o_from_ratio(dupm, dlpm, k),
        n=len(dist.classes),
        flags=(),
    )


@dataclass(frozen=True)
class CptSpec:
    """Prospect-theory meta-utility pieces.

    ``value_fn`` maps outcomes to perceived value (monotone);
    ``weight_fn`` distorts cumulative probabilities (monotone, fixing 0
    and 1).  ``loss_bound``/``gain_bound`` delimit what counts as a loss
    or a gain.
    """

    value_fn: Callable[[float], float]
    weight_fn: Callable[[float], float]
    loss_bound: float
    gain_bound: float

    def __post_init__(self):
        if self.loss_bound > self.gain_bound:
            raise ValueError("loss_bound must not exceed gain_bound")
        for p in (0.0, 1.0):
            if abs(self.weight_fn(p) - p) > 1e-12:
                raise ValueError("weight_fn must fix 0 and 1")


def identity(x: float) -> float:
    return x


def loss_averse_value(loss_weight: float = 2.25) -> Callable[[float], float]:
    """Kinked linear value: gains at face value, losses amplified."""
    return lambda z: z if z >= 0 else loss_weight * z


def cpt_value(samples, spec: CptSpec) -> float:
    """Evaluate the prospect-theory meta-utility on the empirical CDF.

    Losses are atoms strictly below ``loss_bound``, weighted by
    increments of w(F); gains are atoms at or above ``gain_bound``,
    weighted by increments of w applied to the survival function (ties at
    the gain bound count as gains, matching the discrete favorable-tie
    convention).  With identity value/weight functions and coincident
    bounds this is exactly the sample mean.
    """
    vals = np.sort(_values(samples))
    atoms, counts = np.unique(vals, return_counts=True)
    probs = counts / counts.sum()
    cdf = np.cumsum(probs)
    w = spec.weight_fn
    v = spec.value_fn

    total = 0.0
    prev_f = 0.0
    for z, f in zip(atoms, cdf):
        if z < spec.loss_bound:
            total += v(float(z)) * (w(float(f)) - w(float(prev_f)))
        prev_f = f
    # survival S_i = P(Z >= z_i); iterate gains from the top down
    next_s = 0.0
    for i in range(len(atoms) - 1, -1, -1):
        z = atoms[i]
        s = 1.0 - (cdf[i - 1] if i > 0 else 0.0)
        if z >= spec.gain_bound:
            total += v(float(z)) * (w(float(s)) - w(float(next_s)))
        next_s = s
    return float(total)


def confidence_profile(
    samples,
    z_star_grid: Sequence[float],
    alpha: int = 1,
    k: float = 1.0,
) -> list[tuple[float, float]]:
    """Indicator value across a grid of standards, sorted by z*."""
    if len(z_star_grid) == 0:
        raise ValueError("empty z* grid")
    vals = _values(samples)
    out = []
    for z in sorted(float(z) for z in z_star_grid):
        pm = upm_lpm(vals, OutcomeStandard(z_star=z, alpha=alpha, k=k))
        out.append((z, x_o_from_ratio(pm.upm, pm.lpm, k)))
    return out
