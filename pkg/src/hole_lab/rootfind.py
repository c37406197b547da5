"""All complex roots of a real polynomial with residual certificates.

Aberth-Ehrlich simultaneous iteration on the cofactor left after removing
the trailing zero coefficients (the rho-fold root at the origin), started
from Newton-polygon circles.  Each root gets a relative backward error
|p(w)| / sum |c_i| |w|^i computed by compensated Horner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .windows import Window

TOL = 1e-14
MAX_ITER = 200
RESIDUAL_TOL = 1e-10
POLISH_STEPS = 2
_EPS = 2.0 ** -53


@dataclass
class RootSet:
    roots: np.ndarray
    residuals: np.ndarray
    iterations: int
    converged: bool
    n_zero: int = 0
    retried: bool = field(default=False)

    @property
    def degree(self):
        return len(self.roots)

    @property
    def max_residual(self):
        return float(self.residuals.max()) if len(self.residuals) else 0.0


# ---------------------------------------------------------------- numerics

@njit(cache=True, nogil=True)
def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


@njit(cache=True, nogil=True)
def _split(a):
    c = 134217729.0 * a  # 2^27 + 1
    hi = c - (c - a)
    return hi, a - hi


@njit(cache=True, nogil=True)
def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = al * bl - (((p - ah * bh) - al * bh) - ah * bl)
    return p, err


@njit(cache=True, nogil=True)
def comp_horner(c, zr, zi):
    """Compensated Horner for real coefficients ``c`` (ascending) at z.

    Returns (Re p, Im p, sum |c_i| |z|^i).
    """
    d = c.shape[0] - 1
    sr = c[d]
    si = 0.0
    er = 0.0
    ei = 0.0
    az = math.hypot(zr, zi)
    bound = abs(c[d])
    for j in range(d - 1, -1, -1):
        # (sr + i si)(zr + i zi) with error-free transforms
        p1, e1 = _two_prod(sr, zr)
        p2, e2 = _two_prod(si, zi)
        pr, e3 = _two_sum(p1, -p2)
        p3, e4 = _two_prod(sr, zi)
        p4, e5 = _two_prod(si, zr)
        pim, e6 = _two_sum(p3, p4)
        nr, e7 = _two_sum(pr, c[j])
        # error term of this step
        tr = e1 - e2 + e3 + e7
        ti = e4 + e5 + e6
        er, ei = er * zr - ei * zi + tr, er * zi + ei * zr + ti
        sr = nr
        si = pim
        bound = bound * az + abs(c[j])
    return sr + er, si + ei, bound


@njit(cache=True, nogil=True)
def horner_batch(c, zs):
    """Plain Horner of real ascending coefficients at many complex points."""
    d = c.shape[0] - 1
    m = zs.shape[0]
    out = np.empty(m, dtype=np.complex128)
    for k in range(m):
        z = zs[k]
        p = c[d] + 0j
        for j in range(d - 1, -1, -1):
            p = p * z + c[j]
        out[k] = p
    return out


@njit(cache=True, nogil=True, fastmath=True, error_model="numpy")
def _newton_ratios(c, xr, xi, idx, nr_out, ni_out, bad_out):
    """p/p' at roots ``idx``; reversed polynomial used where |z| > 1.

    bad_out flags roots whose residual is already at rounding level.
    """
    d = c.shape[0] - 1
    m = idx.shape[0]
    pr = np.empty(m)
    pi = np.empty(m)
    qr = np.empty(m)
    qi = np.empty(m)
    br = np.empty(m)  # bound sum |c| |w|^k
    wr = np.empty(m)
    wi = np.empty(m)
    aw = np.empty(m)
    rev = np.empty(m, dtype=np.bool_)
    for k in range(m):
        zr = xr[idx[k]]
        zi = xi[idx[k]]
        a2 = zr * zr + zi * zi
        if a2 > 1.0:
            rev[k] = True
            wr[k] = zr / a2
            wi[k] = -zi / a2
            pr[k] = c[0]
            br[k] = abs(c[0])
        else:
            rev[k] = False
            wr[k] = zr
            wi[k] = zi
            pr[k] = c[d]
            br[k] = abs(c[d])
        aw[k] = math.sqrt(wr[k] * wr[k] + wi[k] * wi[k])
        pi[k] = 0.0
        qr[k] = 0.0
        qi[k] = 0.0
    for j in range(1, d + 1):
        cf = c[d - j]
        cr = c[j]
        for k in range(m):
            a = wr[k]
            b = wi[k]
            # derivative first (uses old p)
            t_r = qr[k] * a - qi[k] * b + pr[k]
            t_i = qr[k] * b + qi[k] * a + pi[k]
            qr[k] = t_r
            qi[k] = t_i
            coef = cr if rev[k] else cf
            s_r = pr[k] * a - pi[k] * b + coef
            s_i = pr[k] * b + pi[k] * a
            pr[k] = s_r
            pi[k] = s_i
            br[k] = br[k] * aw[k] + abs(coef)
    for k in range(m):
        p2 = pr[k] * pr[k] + pi[k] * pi[k]
        bad_out[k] = math.sqrt(p2) <= 8.0 * (d + 1) * _EPS * br[k]
        if not rev[k]:
            # N = p / p'
            q2 = qr[k] * qr[k] + qi[k] * qi[k]
            if q2 == 0.0:
                nr_out[k] = 0.0
                ni_out[k] = 0.0
                continue
            nr_out[k] = (pr[k] * qr[k] + pi[k] * qi[k]) / q2
            ni_out[k] = (pi[k] * qr[k] - pr[k] * qi[k]) / q2
        else:
            # N = 1 / (w (d - w q'/q))
            if p2 == 0.0:
                nr_out[k] = 0.0
                ni_out[k] = 0.0
                continue
            rr = (qr[k] * pr[k] + qi[k] * pi[k]) / p2
            ri = (qi[k] * pr[k] - qr[k] * pi[k]) / p2
            a = wr[k]
            b = wi[k]
            er_ = d - (a * rr - b * ri)
            ei_ = -(a * ri + b * rr)
            dr = a * er_ - b * ei_
            di = a * ei_ + b * er_
            dd = dr * dr + di * di
            if dd == 0.0:
                nr_out[k] = 0.0
                ni_out[k] = 0.0
                continue
            nr_out[k] = dr / dd
            ni_out[k] = -di / dd


@njit(cache=True, nogil=True, fastmath=True, error_model="numpy")
def _aberth(c, z0, tol, max_iter):
    d = c.shape[0] - 1
    xr = z0.real.copy()
    xi = z0.imag.copy()
    active = np.ones(d, dtype=np.bool_)
    nr = np.empty(d)
    ni = np.empty(d)
    small = np.empty(d, dtype=np.bool_)
    it = 0
    for it in range(1, max_iter + 1):
        idx = np.nonzero(active)[0]
        m = idx.shape[0]
        if m == 0:
            it -= 1
            break
        _newton_ratios(c, xr, xi, idx, nr, ni, small)
        for k in range(m):
            i = idx[k]
            ar = xr[i]
            ai = xi[i]
            sr = 0.0
            si = 0.0
            for j in range(d):
                dx = ar - xr[j]
                dy = ai - xi[j]
                q = dx * dx + dy * dy
                inv = 1.0 / q if j != i else 0.0
                sr += dx * inv
                si -= dy * inv
            # w = N / (1 - N S)
            a = nr[k]
            b = ni[k]
            den_r = 1.0 - (a * sr - b * si)
            den_i = -(a * si + b * sr)
            dd = den_r * den_r + den_i * den_i
            wr_ = (a * den_r + b * den_i) / dd
            wi_ = (b * den_r - a * den_i) / dd
            nr[k] = wr_
            ni[k] = wi_
        for k in range(m):
            i = idx[k]
            xr[i] -= nr[k]
            xi[i] -= ni[k]
            corr = math.hypot(nr[k], ni[k])
            if corr <= tol * (1.0 + math.hypot(xr[i], xi[i])) or small[k]:
                active[i] = False
    conv = not np.any(active)
    return xr + 1j * xi, it, conv


@njit(cache=True, nogil=True, error_model="numpy")
def comp_horner_batch(c, zs):
    """Relative backward errors |p(z)| / sum |c_i||z|^i by compensated Horner.

    The reversed polynomial at 1/z is used where |z| > 1 (same ratio).
    Batched across points so independent Horner chains interleave.
    """
    d = c.shape[0] - 1
    m = zs.shape[0]
    wr = np.empty(m)
    wi = np.empty(m)
    aw = np.empty(m)
    rev = np.empty(m, dtype=np.bool_)
    sr = np.empty(m)
    si = np.zeros(m)
    er = np.zeros(m)
    ei = np.zeros(m)
    bd = np.empty(m)
    for k in range(m):
        z = zs[k]
        if abs(z) > 1.0:
            v = 1.0 / z
            rev[k] = True
            sr[k] = c[0]
        else:
            v = z
            rev[k] = False
            sr[k] = c[d]
        wr[k] = v.real
        wi[k] = v.imag
        aw[k] = abs(v)
        bd[k] = abs(sr[k])
    for j in range(1, d + 1):
        cf = c[d - j]
        cb = c[j]
        for k in range(m):
            coef = cb if rev[k] else cf
            zr = wr[k]
            zi = wi[k]
            a = sr[k]
            b = si[k]
            p1, e1 = _two_prod(a, zr)
            p2, e2 = _two_prod(b, zi)
            pr, e3 = _two_sum(p1, -p2)
            p3, e4 = _two_prod(a, zi)
            p4, e5 = _two_prod(b, zr)
            pim, e6 = _two_sum(p3, p4)
            nr, e7 = _two_sum(pr, coef)
            tr = e1 - e2 + e3 + e7
            ti = e4 + e5 + e6
            x = er[k]
            y = ei[k]
            er[k] = x * zr - y * zi + tr
            ei[k] = x * zi + y * zr + ti
            sr[k] = nr
            si[k] = pim
            bd[k] = bd[k] * aw[k] + abs(coef)
    out = np.empty(m)
    for k in range(m):
        val = math.hypot(sr[k] + er[k], si[k] + ei[k])
        out[k] = val / bd[k] if bd[k] > 0 else 0.0
    return out


@njit(cache=True, nogil=True, error_model="numpy")
def _polish_and_certify(c, z, steps):
    d = c.shape[0] - 1
    m = z.shape[0]
    xr = z.real.copy()
    xi = z.imag.copy()
    idx = np.arange(m)
    nr = np.empty(m)
    ni = np.empty(m)
    small = np.empty(m, dtype=np.bool_)
    for _ in range(steps):
        _newton_ratios(c, xr, xi, idx, nr, ni, small)
        for k in range(m):
            xr[k] -= nr[k]
            xi[k] -= ni[k]
    for k in range(m):
        z[k] = xr[k] + 1j * xi[k]
    return comp_horner_batch(c, z)


# ------------------------------------------------------------ initial guess

def _upper_hull(xs, ys):
    hull = []
    for p in zip(xs, ys):
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) >= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def initial_guesses(c, rotation=0.0):
    """Starting points on Newton-polygon circles (Bini's rule).

    For each edge (i, j) of the upper convex hull of (k, log|c_k|), place
    j - i points on the circle of radius (|c_i|/|c_j|)^(1/(j - i)).
    """
    d = len(c) - 1
    nz = np.nonzero(c)[0]
    logs = np.log(np.abs(c[nz]))
    hull = _upper_hull(nz.tolist(), logs.tolist())
    out = np.empty(d, dtype=complex)
    pos = 0
    for (i, yi), (j, yj) in zip(hull[:-1], hull[1:]):
        cnt = j - i
        r = math.exp((yi - yj) / cnt)
        ang = 2.0 * np.pi * np.arange(cnt) / cnt + 2.0 * np.pi * i / d + 0.4 + rotation
        out[pos:pos + cnt] = r * np.exp(1j * ang)
        pos += cnt
    return out


# ------------------------------------------------------------------ public

def _solve_cofactor(q, rotation):
    z0 = initial_guesses(q, rotation)
    z, iters, conv = _aberth(q, z0, TOL, MAX_ITER)
    res = _polish_and_certify(q, z, POLISH_STEPS)
    ok = conv and bool(np.all(np.isfinite(z))) and bool(np.all(res <= RESIDUAL_TOL))
    return z, res, iters, ok


def all_roots(coeffs):
    """All n roots of ``sum coeffs[i] z^i`` (coefficients ascending).

    Trailing zero coefficients give exact roots at 0 which are appended
    analytically with residual 0.  Retries once from rotated circles before
    reporting ``converged=False``.
    """
    c = np.asarray(coeffs, dtype=float)
    n = len(c) - 1
    if n < 1 or c[-1] == 0.0:
        raise ValueError("need degree >= 1 and nonzero leading coefficient")
    n_zero = int(np.argmax(c != 0.0))
    q = np.ascontiguousarray(c[n_zero:])
    d = len(q) - 1
    if d == 0:
        z = np.empty(0, complex)
        res = np.empty(0)
        iters, ok, retried = 0, True, False
    elif d == 1:
        z = np.array([-q[0] / q[1] + 0j])
        res = np.zeros(1)
        iters, ok, retried = 0, True, False
    else:
        z, res, iters, ok = _solve_cofactor(q, 0.0)
        retried = False
        if not ok:
            retried = True
            z2, res2, it2, ok2 = _solve_cofactor(q, 0.5 * np.pi / d + 0.123)
            iters += it2
            if ok2 or res2.max() < res.max():
                z, res, ok = z2, res2, ok2
    roots = np.concatenate([z, np.zeros(n_zero, complex)])
    residuals = np.concatenate([res, np.zeros(n_zero)])
    return RootSet(roots, residuals, int(iters), bool(ok), n_zero, retried)


def rescaled(roots, zeta, n):
    """Images n (w / zeta - 1) of roots in the zoomed coordinates."""
    return n * (np.asarray(roots) / zeta - 1.0)


def nearest_rescaled_distance(rootset, zeta, n=None):
    """r* = n min_w |w - zeta|; ``n`` defaults to the polynomial degree."""
    if abs(abs(zeta) - 1.0) > 1e-12:
        raise ValueError("zeta must lie on the unit circle")
    roots = rootset.roots if isinstance(rootset, RootSet) else np.asarray(rootset)
    if len(roots) == 0:
        raise ValueError("empty root set")
    n = len(roots) if n is None else n
    return float(n * np.min(np.abs(roots - zeta)))


def count_in_window(rootset, zeta, window: Window, n=None):
    roots = rootset.roots if isinstance(rootset, RootSet) else np.asarray(rootset)
    n = len(roots) if n is None else n
    return int(np.count_nonzero(window.contains(rescaled(roots, zeta, n))))


def write_roots_csv(path, rootsets):
    """Root dump with columns trial, re, im, residual; ``rootsets`` is an iterable of (trial, RootSet)."""
    import csv

    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["trial", "re", "im", "residual"])
        for t, rs in rootsets:
            for w, r in zip(rs.roots, rs.residuals):
                wr.writerow([int(t), repr(float(w.real)), repr(float(w.imag)), repr(float(r))])
