"""Weighted Kac polynomials f(z) = sum_i a_i xi_i z^i.

Weights are the falling factorials a_i = i (i-1) ... (i - rho + 1), optionally
perturbed by factors (1 + eps_i) with |eps_i| <= eps_n.  Coefficients xi_i are
i.i.d. with mean 0 and variance 1 and come from a counter-based Philox stream
keyed by (master_seed, law, trial_index), so trial k is reproducible without
generating trials 0..k-1.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .rootfind import comp_horner, horner_batch

DISTS = ("rademacher", "gaussian", "uniform")
_DIST_CODE = {"rademacher": 1, "gaussian": 2, "uniform": 3}
RHO_MAX = 6
N_MAX = 100_000
SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class PolySpec:
    rho: int
    n: int
    dist: str = "rademacher"
    weight_mode: str = "exact_falling_factorial"
    eps_n: float = 0.0

    def __post_init__(self):
        if not (0 <= self.rho <= RHO_MAX):
            raise ValueError(f"rho must be in [0, {RHO_MAX}]")
        if not (max(4, self.rho + 1) <= self.n <= N_MAX):
            raise ValueError(f"n must be in [max(4, rho+1), {N_MAX}]")
        if self.dist not in DISTS:
            raise ValueError(f"dist must be one of {DISTS}")
        if self.weight_mode not in ("exact_falling_factorial", "perturbed"):
            raise ValueError("weight_mode must be 'exact_falling_factorial' or 'perturbed'")

    def to_dict(self):
        return {"rho": self.rho, "n": self.n, "dist": self.dist,
                "weight_mode": self.weight_mode, "eps_n": self.eps_n}


@dataclass(frozen=True)
class CoeffSample:
    coeffs: np.ndarray
    xi: np.ndarray
    spec: PolySpec
    seed_path: tuple = field(default=(0, 0))


def weights(rho, n, weight_mode="exact_falling_factorial", eps_n=0.0):
    """a_i for i = 0..n."""
    if n < rho:
        raise ValueError("need n >= rho")
    i = np.arange(n + 1, dtype=float)
    a = np.ones(n + 1)
    for j in range(rho):
        a *= i - j
    if weight_mode == "perturbed":
        # deterministic, |eps_i| <= eps_n
        a *= 1.0 + eps_n * np.sin(1.0 + i * (1.0 + math.sqrt(5.0)) / 2.0)
    elif weight_mode != "exact_falling_factorial":
        raise ValueError(f"unknown weight_mode {weight_mode!r}")
    return a


def rng_for(master_seed, trial_index, dist="gaussian", salt=0):
    ss = np.random.SeedSequence([int(master_seed), _DIST_CODE.get(dist, 0), int(trial_index), int(salt)])
    return np.random.Generator(np.random.Philox(ss))


def draw_xi(dist, size, rng):
    if dist == "rademacher":
        return 2.0 * rng.integers(0, 2, size=size).astype(float) - 1.0
    if dist == "gaussian":
        return rng.standard_normal(size)
    if dist == "uniform":
        return rng.uniform(-SQRT3, SQRT3, size)
    raise ValueError(f"unknown dist {dist!r}")


def sample(spec: PolySpec, master_seed, trial_index):
    rng = rng_for(master_seed, trial_index, spec.dist)
    xi = draw_xi(spec.dist, spec.n + 1, rng)
    a = weights(spec.rho, spec.n, spec.weight_mode, spec.eps_n)
    return CoeffSample(a * xi, xi, spec, (int(master_seed), int(trial_index)))


def eval_poly(coeffs, z, compensated=False):
    """Horner evaluation of sum coeffs[i] z^i (scalar or array z)."""
    c = np.ascontiguousarray(coeffs, dtype=float)
    za = np.asarray(z, dtype=complex)
    flat = za.reshape(-1)
    if compensated:
        out = np.array([complex(*comp_horner(c, w.real, w.imag)[:2]) for w in flat])
    else:
        out = horner_batch(c, np.ascontiguousarray(flat))
    out = out.reshape(za.shape)
    return complex(out) if out.ndim == 0 else out


def eval_gn(coeffs, zeta, z, rho=None):
    """g_n(z) = n^-(rho + 1/2) f(zeta + zeta z / n).

    ``rho`` defaults to the number of leading zero coefficients.
    """
    if abs(abs(zeta) - 1.0) > 1e-12:
        raise ValueError("zeta must have modulus 1")
    c = np.asarray(coeffs, dtype=float)
    n = len(c) - 1
    if rho is None:
        rho = int(np.argmax(c != 0.0))
    w = zeta + zeta * np.asarray(z, dtype=complex) / n
    return n ** -(rho + 0.5) * eval_poly(c, w)


def gn_covariance(rho, n, z, w, a=None):
    """Exact E g_n(z) conj(g_n(w)) for Gaussian coefficients."""
    if a is None:
        a = weights(rho, n)
    k = np.arange(n + 1)
    return np.sum(a ** 2 * ((1 + z / n) * (1 + np.conj(w) / n)) ** k) / n ** (2 * rho + 1)


def write_coeff_csv(sample_: CoeffSample, path):
    a = weights(sample_.spec.rho, sample_.spec.n, sample_.spec.weight_mode, sample_.spec.eps_n)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["index", "weight", "xi", "coeff"])
        for i, (ai, x, c) in enumerate(zip(a, sample_.xi, sample_.coeffs)):
            wr.writerow([i, repr(float(ai)), repr(float(x)), repr(float(c))])
