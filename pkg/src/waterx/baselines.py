"""Alternative threshold selectors for comparison against Otsu.

Three selectors: picking the valley between the two dominant histogram
peaks, a two-component Gaussian mixture fit by EM with the posterior
crossing as threshold, and weighted one-dimensional 2-means.  All are
deterministic given their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateHistogramError,
    NoSeparatingRootError,
    NoValleyError,
)
from .histogram import Histogram, smooth_histogram
from .otsu import ThresholdResult, class_statistics, otsu_linear

__all__ = [
    "GmmParams",
    "EmFitResult",
    "SIGMA_FLOOR",
    "valley_threshold",
    "em_fit",
    "gmm_bayes_threshold",
    "kmeans2_threshold",
]

# Lower bound on component standard deviations; keeps EM from collapsing
# a component onto a single spike.
SIGMA_FLOOR = 1e-3

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class GmmParams:
    """Two-component Gaussian mixture, component 1 being the low mode.

    Canonicalized so that ``mu1 <= mu2`` (components are swapped when
    needed); weights must sum to 1 and sigmas sit at or above
    ``SIGMA_FLOOR``.
    """

    w1: float
    w2: float
    mu1: float
    mu2: float
    sigma1: float
    sigma2: float

    def __post_init__(self):
        if abs(self.w1 + self.w2 - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {self.w1 + self.w2}")
        if self.w1 < 0 or self.w2 < 0:
            raise ValueError("weights must be non-negative")
        if self.sigma1 < SIGMA_FLOOR or self.sigma2 < SIGMA_FLOOR:
            raise ValueError(f"sigmas must be >= {SIGMA_FLOOR}")
        if self.mu1 > self.mu2:
            for a, b in (("w1", "w2"), ("mu1", "mu2"), ("sigma1", "sigma2")):
                va, vb = getattr(self, a), getattr(self, b)
                object.__setattr__(self, a, vb)
                object.__setattr__(self, b, va)


@dataclass(frozen=True)
class EmFitResult(GmmParams):
    """Mixture parameters plus EM diagnostics.

    ``log_likelihoods`` traces the weighted log-likelihood from the
    initial parameters through every completed iteration.
    """

    iterations: int = 0
    converged: bool = False
    log_likelihood: float = math.nan
    log_likelihoods: tuple[float, ...] = ()


def valley_threshold(h: Histogram, window: int = 3) -> ThresholdResult:
    """Threshold at the lowest smoothed count between the two main peaks.

    Smooths with :func:`smooth_histogram`, finds the two highest local
    maxima (plateaus count once, at their first bin), and returns the bin
    of minimum smoothed count strictly between them; ties go to the
    smaller bin value.  The objective field carries the smoothed count at
    the valley.

    Raises
    ------
    NoValleyError
        If the smoothed histogram has fewer than two local maxima.
    """
    hs = smooth_histogram(h, window)
    peaks = _peak_indices(hs.counts)
    if len(peaks) < 2:
        raise NoValleyError("smoothed histogram is unimodal")
    order = sorted(peaks, key=lambda i: (-hs.counts[i], hs.values[i]))
    lo, hi = sorted(order[:2])
    seg = hs.counts[lo + 1:hi]
    ti = lo + 1 + int(np.argmin(seg))
    threshold = float(hs.values[ti])
    return ThresholdResult(threshold, float(hs.counts[ti]), "valley",
                           stats=class_statistics(h, threshold),
                           details={"window": float(window)})


def _peak_indices(counts: np.ndarray) -> list[int]:
    """Plateau-aware local maxima; grid ends count as open (-inf) sides."""
    n = counts.size
    peaks = []
    i = 0
    while i < n:
        j = i
        while j + 1 < n and counts[j + 1] == counts[i]:
            j += 1
        left = counts[i - 1] if i > 0 else -np.inf
        right = counts[j + 1] if j + 1 < n else -np.inf
        if counts[i] > left and counts[i] > right:
            peaks.append(i)
        i = j + 1
    return peaks


def _weighted_log_density(x, w, mu, sigma):
    if w <= 0:
        return np.full_like(x, -np.inf)
    z = (x - mu) / sigma
    return math.log(w) - 0.5 * z * z - math.log(sigma) - _LOG_SQRT_2PI


def _mixture_logpdf(x: np.ndarray, g: GmmParams):
    """Per-component weighted log densities and their log-sum."""
    la = _weighted_log_density(x, g.w1, g.mu1, g.sigma1)
    lb = _weighted_log_density(x, g.w2, g.mu2, g.sigma2)
    return la, lb, np.logaddexp(la, lb)


def em_fit(h: Histogram, max_iter: int = 200, tol: float = 1e-8) -> EmFitResult:
    """Fit a two-component Gaussian mixture to the binned data by EM.

    Each bin is treated as ``count`` points at its representative value.
    Initialization takes the per-cluster moments of the Otsu split, which
    makes the fit deterministic.  Iterates until the relative change in
    log-likelihood drops below ``tol`` or ``max_iter`` is reached; sigmas
    are floored at ``SIGMA_FLOOR``.
    """
    nz = np.flatnonzero(h.counts > 0)
    if nz.size < 2:
        raise DegenerateHistogramError(
            "mixture fit needs at least two occupied bins")
    x = h.values[nz]
    c = h.counts[nz]
    total = float(c.sum())

    init = otsu_linear(h).stats
    params = GmmParams(
        w1=init.omega0,
        w2=1.0 - init.omega0,
        mu1=init.mu0,
        mu2=init.mu1,
        sigma1=max(math.sqrt(init.v0 / init.omega0), SIGMA_FLOOR),
        sigma2=max(math.sqrt(init.v1 / init.omega1), SIGMA_FLOOR),
    )

    def loglik(g: GmmParams) -> float:
        _, _, lm = _mixture_logpdf(x, g)
        return float(c @ lm)

    ll_prev = loglik(params)
    trace = [ll_prev]
    converged = False
    iterations = 0
    for k in range(max_iter):
        la, lb, lm = _mixture_logpdf(x, params)
        r1 = np.exp(la - lm)
        r2 = np.exp(lb - lm)
        n1 = float(c @ r1)
        n2 = float(c @ r2)
        if n1 > 0:
            mu1 = float((c * r1) @ x) / n1
            s1 = max(math.sqrt(float((c * r1) @ (x - mu1) ** 2) / n1), SIGMA_FLOOR)
        else:  # component died; freeze it
            mu1, s1 = params.mu1, params.sigma1
        if n2 > 0:
            mu2 = float((c * r2) @ x) / n2
            s2 = max(math.sqrt(float((c * r2) @ (x - mu2) ** 2) / n2), SIGMA_FLOOR)
        else:
            mu2, s2 = params.mu2, params.sigma2
        w1 = n1 / total
        params = GmmParams(w1=w1, w2=1.0 - w1, mu1=mu1, mu2=mu2,
                           sigma1=s1, sigma2=s2)
        ll = loglik(params)
        trace.append(ll)
        iterations = k + 1
        if abs(ll - ll_prev) < tol * max(abs(ll_prev), 1.0):
            converged = True
            ll_prev = ll
            break
        ll_prev = ll

    return EmFitResult(
        w1=params.w1, w2=params.w2, mu1=params.mu1, mu2=params.mu2,
        sigma1=params.sigma1, sigma2=params.sigma2,
        iterations=iterations, converged=converged,
        log_likelihood=ll_prev, log_likelihoods=tuple(trace),
    )


def _weighted_density_crossings(g: GmmParams) -> list[float]:
    """Real solutions of w1*N(x|mu1,s1) == w2*N(x|mu2,s2), ascending."""
    m1, s1, m2, s2 = g.mu1, g.sigma1, g.mu2, g.sigma2
    if g.w1 <= 0 or g.w2 <= 0:
        return []
    if s1 == s2:
        if m1 == m2:
            return []  # densities proportional everywhere
        x = 0.5 * (m1 + m2) + s1 * s1 * math.log(g.w2 / g.w1) / (m1 - m2)
        return [x]
    a = 0.5 / (s2 * s2) - 0.5 / (s1 * s1)
    b = m1 / (s1 * s1) - m2 / (s2 * s2)
    cc = (m2 * m2) / (2 * s2 * s2) - (m1 * m1) / (2 * s1 * s1) \
        + math.log(g.w1 * s2 / (g.w2 * s1))
    disc = b * b - 4 * a * cc
    if disc < 0:
        return []
    if disc == 0:
        return [-b / (2 * a)]
    sq = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(sq, b))
    return sorted((q / a, cc / q))


def _log_density_slope(x: float, g: GmmParams) -> float:
    """d/dx of log(w1 f1) - log(w2 f2)."""
    return -(x - g.mu1) / (g.sigma1 ** 2) + (x - g.mu2) / (g.sigma2 ** 2)


def gmm_bayes_threshold(g: GmmParams) -> ThresholdResult:
    """Posterior-equality threshold of a two-component mixture.

    Returns the value strictly between the means where the weighted
    component densities are equal, solved in closed form.  The objective
    field carries the common weighted density at the crossing.  No
    histogram is involved, so the result has no class statistics.

    Raises
    ------
    NoSeparatingRootError
        If no crossing lies in the open interval (mu1, mu2).
    """
    if not g.mu1 < g.mu2:
        raise NoSeparatingRootError("component means coincide")
    inside = [x for x in _weighted_density_crossings(g) if g.mu1 < x < g.mu2]
    if not inside:
        raise NoSeparatingRootError(
            "weighted densities do not cross between the component means")
    if len(inside) == 1:
        x = inside[0]
    else:
        # Two interior crossings can only arise under extreme weight or
        # variance skew; take the descending one (water-dominant below).
        descending = [r for r in inside if _log_density_slope(r, g) < 0]
        x = descending[0] if descending else inside[0]
    z = (x - g.mu1) / g.sigma1
    obj = g.w1 * math.exp(-0.5 * z * z) / (g.sigma1 * math.sqrt(2 * math.pi))
    return ThresholdResult(float(x), obj, "gmm")


def _weighted_quantile(x: np.ndarray, wts: np.ndarray, q: float) -> float:
    cum = np.cumsum(wts)
    cum = cum / cum[-1]
    return float(x[int(np.searchsorted(cum, q, side="left"))])


def kmeans2_threshold(h: Histogram, seed: int = 0,
                      max_iter: int = 1000) -> ThresholdResult:
    """Weighted 1-D Lloyd iteration with two centers.

    Centers start at the weighted 25th/75th percentiles (``seed`` is
    reserved for optional random restarts and currently unused), and
    iterate until the assignment stabilizes.  The threshold is the
    smallest bin value assigned to the upper cluster; the objective field
    carries the intraclass variance of the final partition.
    """
    nz = np.flatnonzero(h.counts > 0)
    if nz.size < 2:
        raise DegenerateHistogramError(
            "2-means needs at least two occupied bins")
    x = h.values[nz]
    wts = h.counts[nz]

    c0 = _weighted_quantile(x, wts, 0.25)
    c1 = _weighted_quantile(x, wts, 0.75)
    if c0 == c1:
        c0, c1 = float(x[0]), float(x[-1])

    upper = x >= 0.5 * (c0 + c1)
    iterations = 0
    for _ in range(max_iter):
        iterations += 1
        w_lo = wts[~upper]
        w_hi = wts[upper]
        c0 = float(w_lo @ x[~upper]) / float(w_lo.sum())
        c1 = float(w_hi @ x[upper]) / float(w_hi.sum())
        new_upper = x >= 0.5 * (c0 + c1)
        if np.array_equal(new_upper, upper):
            break
        upper = new_upper

    # Snap to the smallest lattice bin on the upper side of the midpoint.
    split = 0.5 * (c0 + c1)
    ti = int(np.searchsorted(h.values, split, side="left"))
    threshold = float(h.values[ti])
    stats = class_statistics(h, threshold)
    return ThresholdResult(threshold, stats.v0 + stats.v1, "kmeans",
                           stats=stats,
                           details={"iterations": float(iterations),
                                    "center_low": c0, "center_high": c1})
