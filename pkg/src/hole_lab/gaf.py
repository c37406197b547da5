"""Zero counts of the limit field g(z) = int_0^1 t^rho e^{zt} dB(t) by winding.

The field is sampled only on a discretised window boundary, as a circular
complex Gaussian vector with covariance F^(2 rho)(z_i + conj z_j) (Cholesky
factor computed once), and its zero count inside is the winding number of
the sampled values around 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernel import f_derivs
from .parallel import map_ordered
from .polynomial import rng_for
from .stats import wilson_ci
from .windows import Window

JITTER0 = 1e-14
JITTER_STEPS = 3
SMALL_VALUE = 1e-8
MAX_INCREMENT = math.pi / 2
MAX_REJECT_RATE = 0.05
M_MAX = 4096
BLOCK = 50


class CholeskyError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class BoundaryGrid:
    points: np.ndarray
    window: Window

    @property
    def m(self):
        return len(self.points)


@dataclass
class GafSample:
    values: np.ndarray
    winding: int | None
    raw_winding: float = math.nan

    @property
    def rejected(self):
        return self.winding is None


@dataclass
class CountSummary:
    rho: int
    window: Window
    m: int
    trials: int
    counts: np.ndarray  # zero count per accepted trial
    rejected: int
    raw_windings: np.ndarray = field(repr=False, default=None)

    @property
    def accepted(self):
        return len(self.counts)

    @property
    def rejection_rate(self):
        return self.rejected / self.trials if self.trials else 0.0

    @property
    def low_confidence(self):
        return self.rejection_rate > MAX_REJECT_RATE

    @property
    def mean(self):
        return float(np.mean(self.counts))

    @property
    def var(self):
        return float(np.var(self.counts, ddof=1)) if self.accepted > 1 else 0.0

    @property
    def se(self):
        return math.sqrt(self.var / self.accepted) if self.accepted else math.inf

    def moment(self, ell):
        return float(np.mean(self.counts.astype(float) ** ell))

    def histogram(self):
        vals, freq = np.unique(self.counts, return_counts=True)
        return {int(v): int(f) for v, f in zip(vals, freq)}

    def p_zero(self):
        k = int(np.count_nonzero(self.counts == 0))
        return k / self.accepted, wilson_ci(k, self.accepted)

    def to_json(self):
        d = {"schema_version": 1, "rho": self.rho, "m": self.m, "trials": self.trials,
             "rejected": self.rejected, "counts": {str(k): v for k, v in self.histogram().items()},
             "mean": self.mean, "var": self.var}
        if self.window.kind == "strip":
            d["C"] = self.window.C
            d["delta"] = self.window.delta
        else:
            d["radius"] = self.window.radius
        p, (lo, hi) = self.p_zero()
        d["p_zero"] = p
        d["p_zero_ci"] = [lo, hi]
        d["low_confidence"] = self.low_confidence
        return d


def default_m(C):
    return max(1024, int(math.ceil(128 * C)))


def boundary_grid(window: Window, m=None):
    if m is None:
        m = default_m(window.C if window.kind == "strip" else window.radius)
    return BoundaryGrid(window.boundary(m), window)


def covariance(rho, grid):
    pts = grid.points if isinstance(grid, BoundaryGrid) else np.asarray(grid, dtype=complex)
    if len(pts) > M_MAX:
        raise ValueError(f"grid has {len(pts)} > {M_MAX} points")
    u = pts[:, None] + np.conj(pts)[None, :]
    sig = f_derivs(2 * rho, u)[2 * rho]
    # exact Hermitian symmetry
    return 0.5 * (sig + sig.conj().T)


def cholesky(sigma):
    """Lower Cholesky factor with diagonal jitter escalation."""
    m = sigma.shape[0]
    scale = float(np.trace(sigma).real) / m
    jitter = JITTER0 * scale
    for _ in range(JITTER_STEPS + 1):
        try:
            return np.linalg.cholesky(sigma + jitter * np.eye(m))
        except np.linalg.LinAlgError:
            jitter *= 10.0
    raise CholeskyError("Cholesky failed after jitter escalation; grid too fine")


def complex_normal(rng, size):
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / math.sqrt(2.0)


def winding(values, sigma_diag=None):
    """(rounded winding or None if rejected, raw winding sum / 2 pi)."""
    v = np.asarray(values)
    inc = np.angle(np.roll(v, -1) / v)
    raw = float(np.sum(inc) / (2 * math.pi))
    scale = np.sqrt(sigma_diag) if sigma_diag is not None else np.ones(len(v))
    if np.any(np.abs(v) < SMALL_VALUE * scale) or np.max(np.abs(inc)) > MAX_INCREMENT:
        return None, raw
    return int(round(raw)), raw


def sample_and_wind(chol, rng, sigma_diag=None):
    z = complex_normal(rng, chol.shape[0])
    v = chol @ z
    if sigma_diag is None:
        sigma_diag = np.sum(np.abs(chol) ** 2, axis=1)
    w, raw = winding(v, sigma_diag)
    return GafSample(v, w, raw)


def _block(args):
    chol, diag, seed, lo, hi = args
    Z = np.stack([complex_normal(rng_for(seed, t, "gaf"), chol.shape[0]) for t in range(lo, hi)], axis=1)
    V = chol @ Z
    return [winding(V[:, j], diag) for j in range(hi - lo)]


def zero_count_stats(rho, window: Window, m=None, trials=500, seed=0, workers=None):
    """Monte Carlo zero-count distribution of the limit field in ``window``."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    grid = boundary_grid(window, m)
    sigma = covariance(rho, grid)
    chol = cholesky(sigma)
    diag = np.real(np.diag(sigma))
    blocks = [(chol, diag, seed, lo, min(lo + BLOCK, trials)) for lo in range(0, trials, BLOCK)]
    res = [r for blk in map_ordered(_block, blocks, workers) for r in blk]
    counts = np.array([w for w, _ in res if w is not None], dtype=int)
    raws = np.array([r for w, r in res if w is not None])
    rejected = sum(1 for w, _ in res if w is None)
    return CountSummary(rho, window, grid.m, trials, counts, rejected, raws)
