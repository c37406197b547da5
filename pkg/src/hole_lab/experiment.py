"""Seeded Monte Carlo campaigns on weighted Kac polynomials.

A trial is fully determined by (master_seed, law, trial_index); campaigns
run trials in fixed blocks through :func:`parallel.map_ordered` and merge
in trial order, so outputs do not depend on the worker count.

Root solves do not depend on the target point zeta, so one solve per trial
serves any number of zetas and windows.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .parallel import map_ordered
from .polynomial import PolySpec, sample
from .rootfind import RESIDUAL_TOL, all_roots, count_in_window, horner_batch, nearest_rescaled_distance
from .stats import ks_2samp_stat, wilson_ci
from .windows import Window

__all__ = ["HoleCurve", "ProbeResult", "hole_scan", "hole_scan_multi", "window_counts",
           "real_root_probe", "real_root_probe_multi", "sign_change", "probe_grid",
           "universality_compare", "wilson_ci", "manifest", "config_hash"]

BLOCK = 25
MAX_DISCARD_RATE = 0.01
DEFAULT_ALPHA = 1.5


@dataclass
class HoleCurve:
    """Distribution of r* = n * dist(zeta, roots) over trials.

    ``trial_rstar`` is indexed by trial (nan where the solve was discarded).
    """

    spec: PolySpec
    zeta: complex
    trials: int
    trial_rstar: np.ndarray
    trial_residual: np.ndarray
    master_seed: int = 0
    rstars: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        ok = ~np.isnan(self.trial_rstar)
        self.rstars = np.sort(self.trial_rstar[ok])

    @property
    def discarded(self):
        return int(self.trials - len(self.rstars))

    @property
    def flagged(self):
        return self.discarded > MAX_DISCARD_RATE * self.trials

    def hits(self, r):
        """Number of kept trials with a root in the open ball B(zeta, r/n)."""
        out = np.searchsorted(self.rstars, np.asarray(r, dtype=float), side="left")
        return int(out) if out.ndim == 0 else out

    def holes(self, r):
        """Number of kept trials with no root in B(zeta, r/n), i.e. r* >= r."""
        out = len(self.rstars) - np.searchsorted(self.rstars, np.asarray(r, dtype=float), side="left")
        return int(out) if out.ndim == 0 else out

    def cdf(self, r):
        """P-hat(N(B(zeta, r/n)) > 0) = P-hat(r* < r)."""
        out = np.asarray(self.hits(r)) / len(self.rstars)
        return float(out) if out.ndim == 0 else out

    def survival(self, r):
        """P-hat(r* >= r) = P-hat(no root in B(zeta, r/n))."""
        out = np.asarray(self.holes(r)) / len(self.rstars)
        return float(out) if out.ndim == 0 else out

    def median(self):
        return float(np.median(self.rstars))

    def quantile(self, q):
        return float(np.quantile(self.rstars, q))

    def ks_distance(self, other: "HoleCurve"):
        return ks_2samp_stat(self.rstars, other.rstars)

    def rows(self):
        """CSV rows sorted by r* ascending, discarded trials last."""
        order = np.argsort(np.where(np.isnan(self.trial_rstar), np.inf, self.trial_rstar), kind="stable")
        for t in order:
            r = self.trial_rstar[t]
            yield {"trial": int(t), "rstar": "" if np.isnan(r) else repr(float(r)),
                   "residual_max": repr(float(self.trial_residual[t])),
                   "discarded_flag": int(np.isnan(r))}

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            wr = csv.DictWriter(fh, fieldnames=["trial", "rstar", "residual_max", "discarded_flag"])
            wr.writeheader()
            wr.writerows(self.rows())

    def manifest(self):
        return manifest({"kind": "hole_scan", "spec": self.spec.to_dict(),
                         "zeta_angle": float(np.angle(self.zeta)), "trials": self.trials,
                         "seed": self.master_seed},
                        {"discarded": self.discarded, "median": self.median() if len(self.rstars) else None})


@dataclass
class ProbeResult:
    C: float
    alpha: float
    M: int
    trials: int
    successes: int

    @property
    def prob_sign_change(self):
        return self.successes / self.trials

    @property
    def ci(self):
        return wilson_ci(self.successes, self.trials)

    def to_json(self):
        lo, hi = self.ci
        return {"schema_version": 1, "C": self.C, "alpha": self.alpha, "M": self.M, "trials": self.trials,
                "prob_sign_change": self.prob_sign_change, "ci": [lo, hi]}


def config_hash(config):
    """sha256 of the canonical JSON of ``config`` (git-style content hash)."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(b"blob %d\0" % len(blob) + blob).hexdigest()


def manifest(config, summary=None):
    out = {"schema_version": 1, "config": config, "hash": config_hash(config)}
    if summary is not None:
        out["summary"] = summary
    return out


def _check_zeta(zeta):
    if abs(abs(zeta) - 1.0) > 1e-12:
        raise ValueError("zeta must have modulus 1")


def _solve(spec, seed, t):
    rs = all_roots(sample(spec, seed, t).coeffs)
    ok = rs.converged and rs.max_residual <= RESIDUAL_TOL
    return rs, ok


def _scan_block(args):
    spec, zetas, windows, seed, lo, hi = args
    out = []
    for t in range(lo, hi):
        rs, ok = _solve(spec, seed, t)
        if ok:
            r = [nearest_rescaled_distance(rs, z, spec.n) for z in zetas]
            c = [[count_in_window(rs, z, w, spec.n) for w in windows] for z in zetas]
        else:
            r = [math.nan] * len(zetas)
            c = [[-1] * len(windows) for _ in zetas]
        out.append((r, c, rs.max_residual))
    return out


def _campaign(spec, zetas, windows, trials, master_seed, workers):
    if trials <= 0:
        raise ValueError("trials must be positive")
    for z in zetas:
        _check_zeta(z)
    blocks = [(spec, list(zetas), list(windows), master_seed, lo, min(lo + BLOCK, trials))
              for lo in range(0, trials, BLOCK)]
    res = [r for blk in map_ordered(_scan_block, blocks, workers) for r in blk]
    R = np.array([r for r, _, _ in res], dtype=float).reshape(trials, len(zetas))
    K = np.array([c for _, c, _ in res], dtype=int).reshape(trials, len(zetas), len(windows))
    resid = np.array([m for _, _, m in res])
    return R, K, resid


def hole_scan_multi(spec: PolySpec, zetas, trials, master_seed=0, workers=None):
    """One HoleCurve per zeta, sharing the root solves."""
    zetas = [complex(z) for z in zetas]
    R, _, resid = _campaign(spec, zetas, [], trials, master_seed, workers)
    return [HoleCurve(spec, z, trials, R[:, j].copy(), resid.copy(), master_seed) for j, z in enumerate(zetas)]


def hole_scan(spec: PolySpec, zeta, trials, master_seed=0, workers=None):
    return hole_scan_multi(spec, [zeta], trials, master_seed, workers)[0]


def window_counts(spec: PolySpec, zeta, window: Window, trials, master_seed=0, workers=None):
    """Root counts of g_n in ``window`` (rescaled at zeta), one per kept trial."""
    _, K, _ = _campaign(spec, [complex(zeta)], [window], trials, master_seed, workers)
    k = K[:, 0, 0]
    return k[k >= 0]


def probe_grid(C, alpha=DEFAULT_ALPHA):
    """Sorted mirrored grid -x_M < ... < -x_1 < x_1 < ... < x_M, x_i = alpha^(i-1)."""
    if alpha <= 1:
        raise ValueError("alpha must exceed 1")
    if C < 1:
        raise ValueError("C must be >= 1 so that the grid is nonempty")
    M = int(math.floor(math.log(C) / math.log(alpha) + 1e-12)) + 1
    x = alpha ** np.arange(M)
    pts = np.concatenate([-x[::-1], x])
    if len(pts) < 2:
        raise ValueError("probe grid needs at least two points")
    return M, pts


def sign_change(coeffs, C, alpha=DEFAULT_ALPHA):
    """Does h_n(x) = f(1 + x/n)/sqrt(n) change sign along the probe grid?"""
    c = np.ascontiguousarray(coeffs, dtype=float)
    n = len(c) - 1
    _, x = probe_grid(C, alpha)
    v = horner_batch(c, np.ascontiguousarray(1.0 + x / n + 0j)).real
    return bool(np.any(v[:-1] * v[1:] < 0))


def _probe_block(args):
    spec, Cs, alpha, seed, lo, hi = args
    return [[sign_change(sample(spec, seed, t).coeffs, C, alpha) for C in Cs] for t in range(lo, hi)]


def real_root_probe_multi(spec: PolySpec, Cs, alpha=DEFAULT_ALPHA, trials=1000, master_seed=0, workers=None):
    """ProbeResults for several C sharing the coefficient draws (nested grids)."""
    if spec.rho != 0:
        raise ValueError("the real-root probe is implemented for rho = 0 only")
    if trials <= 0:
        raise ValueError("trials must be positive")
    Ms = [probe_grid(C, alpha)[0] for C in Cs]
    blocks = [(spec, list(Cs), alpha, master_seed, lo, min(lo + BLOCK * 4, trials))
              for lo in range(0, trials, BLOCK * 4)]
    hits = np.array([r for blk in map_ordered(_probe_block, blocks, workers) for r in blk], dtype=bool)
    return [ProbeResult(float(C), float(alpha), M, trials, int(hits[:, j].sum()))
            for j, (C, M) in enumerate(zip(Cs, Ms))]


def real_root_probe(spec: PolySpec, C, alpha=DEFAULT_ALPHA, trials=1000, master_seed=0, workers=None):
    return real_root_probe_multi(spec, [C], alpha, trials, master_seed, workers)[0]


def universality_compare(spec_a: PolySpec, spec_b: PolySpec, zeta, n=None, trials=2000, seed=0,
                         seed_b=None, workers=None):
    """KS distance between r* samples under two coefficient laws."""
    da, db = spec_a.to_dict(), spec_b.to_dict()
    da.pop("dist"), db.pop("dist")
    if da != db:
        raise ValueError("specs may differ only in dist")
    if n is not None and n != spec_a.n:
        raise ValueError("n disagrees with the specs")
    a = hole_scan(spec_a, zeta, trials, seed, workers)
    b = hole_scan(spec_b, zeta, trials, seed if seed_b is None else seed_b, workers)
    return a.ks_distance(b)
