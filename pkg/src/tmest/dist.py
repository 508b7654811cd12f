"""Normalized-cdf machinery for demand-size distributions.

A demand sample divided by its own maximum has a "normalized empirical cdf"
on [0, 1]. For n iid draws X_i with cdf F and density f, the ratio
X_i / max_j X_j of a draw that is not itself the maximum has cdf

    G(y) = n * integral F(y t) [F(t)]^(n-2) f(t) dt,    0 <= y <= 1.

(The unconditional ratio law carries an extra atom of mass 1/n at y = 1,
the sample that IS the maximum; the normalized empirical cdf pins that
point at 1 by construction, so the conditional law is the one a sample's
remaining points follow.) For Beta(alpha, 1) sources G collapses to
y**alpha for every n.

This module computes that integral, samples normalized power-law vectors,
fits the exponent by maximum likelihood, and measures sup-norm (KS) distance
between samples and a target cdf.

Convention used throughout: zero demands are excluded from cdf fitting and
cdf comparison, and each sample is normalized by its own maximum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSample, InsufficientData, QuadratureFailure, TmestError


def make_rng(seed) -> np.random.Generator:
    """Seedable counter-based (Philox, 64-bit) generator; passes through Generators."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed))


# ---------------------------------------------------------------------------
# Source distributions (the underlying iid draws, before max-normalization)


@dataclass(frozen=True)
class BetaAlphaOne:
    """Beta(alpha, 1): F(x) = x**alpha on [0, 1]."""

    alpha: float

    def __post_init__(self):
        if not (self.alpha > 0 and np.isfinite(self.alpha)):
            raise TmestError("alpha must be positive and finite")

    def cdf(self, x):
        x = np.clip(x, 0.0, 1.0)
        return np.power(x, self.alpha)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where((x > 0) & (x <= 1), self.alpha * np.power(x, self.alpha - 1.0), 0.0)
        return out

    def ppf(self, u):
        return np.power(u, 1.0 / self.alpha)


@dataclass(frozen=True)
class Uniform01:
    """Uniform on [0, 1] (the alpha = 1 power law)."""

    def cdf(self, x):
        return np.clip(x, 0.0, 1.0)

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= 0) & (x <= 1), 1.0, 0.0)

    def ppf(self, u):
        return np.asarray(u, dtype=float)


# ---------------------------------------------------------------------------
# Normalized cdf targets


@dataclass(frozen=True)
class PowerLawCdf:
    """G(y) = y**alpha on [0, 1]."""

    alpha: float

    kind = "power-law"

    def __post_init__(self):
        if not (self.alpha > 0 and np.isfinite(self.alpha)):
            raise TmestError("alpha must be positive and finite")

    def evaluate(self, y):
        return np.power(np.clip(y, 0.0, 1.0), self.alpha)

    def evaluate_left(self, y):
        return self.evaluate(y)

    def jump_points(self) -> np.ndarray:
        return np.empty(0)

    def sample_sorted(self, p: int, rng) -> np.ndarray:
        return np.sort(sample_normalized_power_law(p, self.alpha, rng))


@dataclass(frozen=True)
class TabulatedCdf:
    """Step cdf jumping 1/n at each scaled sample point; G(1) = 1."""

    points: np.ndarray

    kind = "tabulated"

    def __post_init__(self):
        pts = np.sort(np.asarray(self.points, dtype=float))
        if pts.size == 0:
            raise TmestError("tabulated cdf needs at least one point")
        if pts[0] <= 0 or pts[-1] != 1.0:
            raise TmestError("tabulated points must lie in (0, 1] with max exactly 1")
        object.__setattr__(self, "points", pts)
        pts.flags.writeable = False

    def evaluate(self, y):
        y = np.asarray(y, dtype=float)
        return np.searchsorted(self.points, y, side="right") / self.points.size

    def evaluate_left(self, y):
        y = np.asarray(y, dtype=float)
        return np.searchsorted(self.points, y, side="left") / self.points.size

    def jump_points(self) -> np.ndarray:
        return self.points

    def sample_sorted(self, p: int, rng) -> np.ndarray:
        rng = make_rng(rng)
        draws = self.points[rng.integers(0, self.points.size, size=p)]
        # Renormalize so the candidate is itself a max-scaled sample.
        return np.sort(draws / draws.max())


def tabulated_from_sample(demands) -> TabulatedCdf:
    """Normalized empirical cdf of the positive demands in a sample."""
    d = np.asarray(demands, dtype=float)
    pos = d[d > 0]
    if pos.size == 0:
        raise InsufficientData("no positive demands")
    return TabulatedCdf(np.sort(pos / pos.max()))


# ---------------------------------------------------------------------------
# Quadrature for the max-ratio cdf


def _adaptive_simpson(f, tol: float, max_depth: int = 48) -> float:
    """Adaptive Simpson rule on [0, 1] with Richardson acceptance test."""

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        if abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        if depth >= max_depth:
            raise QuadratureFailure(f"tolerance {tol:g} not reached at depth {max_depth}")
        return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) + recurse(
            m, b, fm, frm, fb, right, 0.5 * tol, depth + 1
        )

    fa, fm, fb = f(0.0), f(0.5), f(1.0)
    whole = (fa + 4.0 * fm + fb) / 6.0
    return recurse(0.0, 1.0, fa, fm, fb, whole, tol, 0)


def normalized_cdf_of_max_ratio(src, n: int, y: float, tol: float = 1e-8) -> float:
    """Cdf at y of X_i / max_j X_j for a non-maximal draw among n iid draws.

    The integral is evaluated in the probability variable u = F(t), which
    removes any density singularity at the origin:

        G(y) = n * integral_0^1 F(y * Finv(u)) u**(n-2) du.
    """
    if n < 2:
        raise TmestError("max-ratio cdf requires n >= 2")
    if not (0.0 <= y <= 1.0):
        raise TmestError("y must lie in [0, 1]")
    if y == 0.0:
        return 0.0

    def integrand(u: float) -> float:
        return float(src.cdf(y * src.ppf(u))) * u ** (n - 2)

    return n * _adaptive_simpson(integrand, tol)


# ---------------------------------------------------------------------------
# Sampling


def _beta_from_uniform(u, alpha: float):
    """Inverse-cdf transform for Beta(alpha, 1): U**(1/alpha)."""
    return np.power(u, 1.0 / alpha)


def beta_alpha_one_sample(alpha: float, seed) -> float:
    """One Beta(alpha, 1) draw in (0, 1] via inverse cdf."""
    if not alpha > 0:
        raise TmestError("alpha must be positive")
    rng = make_rng(seed)
    return float(_beta_from_uniform(1.0 - rng.random(), alpha))


def sample_normalized_power_law(n: int, alpha: float, seed) -> np.ndarray:
    """n values whose normalized empirical cdf follows y**alpha.

    Draws n iid Beta(alpha, 1) variables and divides by their maximum. The
    ratio is computed before exponentiation so the maximum is exactly 1;
    for very small alpha the smallest ratios can underflow to 0 (they are
    mathematically below the double-precision range).
    """
    if n < 1:
        raise TmestError("n must be at least 1")
    if not alpha > 0:
        raise TmestError("alpha must be positive")
    rng = make_rng(seed)
    u = 1.0 - rng.random(n)
    return _beta_from_uniform(u / u.max(), alpha)


# ---------------------------------------------------------------------------
# Fitting and comparison


def fit_alpha_mle(demands) -> float:
    """Closed-form MLE of the power-law exponent from positive demands.

    Positive demands are normalized by their maximum; for density
    alpha * y**(alpha-1) the maximizer is alpha = -k / sum(log y_i), where
    the maximum's log(1) = 0 term is included in the k values.
    """
    d = np.asarray(demands, dtype=float)
    pos = d[d > 0]
    if pos.size < 2:
        raise InsufficientData("need at least 2 positive demands")
    y = pos / pos.max()
    log_sum = float(np.sum(np.log(y)))
    if log_sum == 0.0:
        raise DegenerateSample("all positive demands are equal")
    return -pos.size / log_sum


def ks_distance(samples, target) -> float:
    """Sup-norm distance between the sample's empirical cdf and the target.

    Zeros are excluded; the positive samples are compared as-is (callers
    normalize by the sample maximum beforehand when needed). Returns 1.0
    for a sample with no positive entries.
    """
    s = np.asarray(samples, dtype=float)
    if s.size == 0:
        raise TmestError("empty sample")
    if np.any((s < 0) | (s > 1)):
        raise TmestError("samples must lie in [0, 1]")
    pos = np.sort(s[s > 0])
    if pos.size == 0:
        return 1.0
    n = pos.size
    pts = np.union1d(pos, target.jump_points())
    emp_right = np.searchsorted(pos, pts, side="right") / n
    emp_left = np.searchsorted(pos, pts, side="left") / n
    d_right = np.abs(emp_right - target.evaluate(pts))
    d_left = np.abs(emp_left - target.evaluate_left(pts))
    return float(max(d_right.max(), d_left.max()))
