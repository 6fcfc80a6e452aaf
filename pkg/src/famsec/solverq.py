"""Solver-side confidence: candidate vs trusted reward distributions.

The candidate solver's empirical cumulative-reward distribution is
compared to a trusted reference distribution (measured, or predicted by
the surrogate).  Distribution overlap enters through the squared
Hellinger distance; direction through the sign of the mean gap; scale
context through the gap relative to the global reward range.  The signed
meta-utility is squashed onto (0, 2), where 1 means parity with the
trusted solver.

Sign convention: delta_mu = candidate mean - trusted mean, so a better
candidate pushes the indicator above 1.  Reports echo this convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rollouts import RewardSamples

DELTA_MU_CONVENTION = "candidate_minus_trusted"


class BinMismatch(ValueError):
    pass


class InvalidConfig(ValueError):
    pass


@dataclass(frozen=True)
class GaussianSummary:
    mu: float
    sigma: float

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma)):
            raise ValueError("non-finite summary")


@dataclass(frozen=True)
class SolverQualityConfig:
    """Scale context for the comparison.

    ``r_low``/``r_high`` bound the reward realizations seen across the
    task family; ``kappa`` balances the range-scale factor against the
    distribution distance; ``squash_gain`` sets how fast the indicator
    saturates (the default saturates near meta-utility +/-1).
    """

    r_low: float
    r_high: float
    kappa: float = 0.5
    squash_gain: float = 5.0

    def __post_init__(self):
        if not self.r_high > self.r_low:
            raise InvalidConfig("need r_high > r_low")
        if not 0.0 < self.kappa < 1.0:
            raise InvalidConfig("kappa must lie in (0, 1)")
        if self.squash_gain <= 0:
            raise InvalidConfig("squash_gain must be positive")

    @property
    def sigma_min(self) -> float:
        return 1e-6 * (self.r_high - self.r_low)


@dataclass(frozen=True)
class SolverQualityResult:
    h2: float
    delta_mu: float
    f: float
    m_s: float
    x_s: float
    candidate: GaussianSummary
    trusted: GaussianSummary
    flags: tuple[str, ...] = ()


def hellinger2_gaussian(p: GaussianSummary, q: GaussianSummary, sigma_min: float = 0.0) -> float:
    """Squared Hellinger distance between two Gaussians (closed form).

    Symmetric, in [0, 1], zero iff the (floored) summaries coincide.
    """
    sp = max(p.sigma, sigma_min)
    sq = max(q.sigma, sigma_min)
    if sp == 0.0 and sq == 0.0:
        return 0.0 if p.mu == q.mu else 1.0
    var_sum = sp * sp + sq * sq
    bc = math.sqrt(2.0 * sp * sq / var_sum) * math.exp(-0.25 * (p.mu - q.mu) ** 2 / var_sum)
    return min(max(1.0 - bc, 0.0), 1.0)


def hellinger2_hist(p_hist, q_hist, edges_p=None, edges_q=None) -> float:
    """Squared Hellinger distance between two histograms on shared bins."""
    p = np.asarray(p_hist, dtype=float)
    q = np.asarray(q_hist, dtype=float)
    if p.shape != q.shape:
        raise BinMismatch(f"histogram shapes differ: {p.shape} vs {q.shape}")
    if edges_p is not None or edges_q is not None:
        ep = np.asarray(edges_p, dtype=float)
        eq = np.asarray(edges_q, dtype=float)
        if ep.shape != eq.shape or not np.array_equal(ep, eq):
            raise BinMismatch("histograms use different bin edges")
    if p.sum() <= 0 or q.sum() <= 0:
        raise BinMismatch("empty histogram")
    p = p / p.sum()
    q = q / q.sum()
    bc = float(np.sqrt(p * q).sum())
    return min(max(1.0 - bc, 0.0), 1.0)


def gaussian_from_samples(samples) -> GaussianSummary:
    vals = samples.array() if isinstance(samples, RewardSamples) else np.asarray(list(samples), dtype=float)
    if vals.size == 0:
        raise ValueError("no samples")
    sigma = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
    return GaussianSummary(mu=float(vals.mean()), sigma=sigma)


def solver_quality(
    candidate: GaussianSummary,
    trusted: GaussianSummary,
    config: SolverQualityConfig,
    extra_flags: tuple[str, ...] = (),
) -> SolverQualityResult:
    """Signed, range-scaled distribution comparison.

    delta_mu = 0 gives exactly 1 (parity) regardless of spreads; swapping
    the two sides reflects the indicator around 1.
    """
    smin = config.sigma_min
    flags = list(extra_flags)
    if candidate.sigma < smin or trusted.sigma < smin:
        flags.append("sigma-floored")
    h2 = hellinger2_gaussian(candidate, trusted, sigma_min=smin)
    delta_mu = candidate.mu - trusted.mu
    f = abs(delta_mu) / (config.r_high - config.r_low)
    if delta_mu > 0:
        sign = 1.0
    elif delta_mu < 0:
        sign = -1.0
    else:
        sign = 0.0
        if h2 > 1e-12:
            flags.append("variance-blind-fixed-point")
    m_s = sign * f**config.kappa * math.sqrt(h2)
    # 2 / (1 + exp(-g*m)) written via tanh: exact odd symmetry in m_s.
    x_s = 1.0 + math.tanh(0.5 * config.squash_gain * m_s)
    x_s = min(max(x_s, math.nextafter(0.0, 1.0)), math.nextafter(2.0, 0.0))
    return SolverQualityResult(
        h2=h2,
        delta_mu=delta_mu,
        f=f,
        m_s=m_s,
        x_s=x_s,
        candidate=candidate,
        trusted=trusted,
        flags=tuple(flags),
    )


def x_s_from_samples(
    candidate_samples,
    trusted,
    config: SolverQualityConfig,
) -> SolverQualityResult:
    """Indicator from a measured candidate batch.

    The trusted side takes either a measured batch or a predicted
    summary.  Degenerate candidate batches (fewer than two values, or
    zero spread) are handled by the sigma floor and flagged.
    """
    cand = gaussian_from_samples(candidate_samples)
    flags: list[str] = []
    if cand.sigma == 0.0:
        flags.append("degenerate-candidate")
    if isinstance(trusted, GaussianSummary):
        trust = trusted
    else:
        trust = gaussian_from_samples(trusted)
        if trust.sigma == 0.0:
            flags.append("degenerate-trusted")
    return solver_quality(cand, trust, config, extra_flags=tuple(flags))
