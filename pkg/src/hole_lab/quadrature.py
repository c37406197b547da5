"""Kac-Rice quadrature for zero counts of the limit field.

Mean count: integral of rho1 over the window.  Second moment: the
correlation defect rho2 - rho1 rho1 depends on (x1, x2, y1 - y2) only, so
over a strip the 4D integral collapses to

    int dx1 dx2 int_{-2C}^{2C} (2C - |dy|) defect(x1, x2, dy) ddy,

and the integrand is even in dy.  All rules are Gauss-Legendre (tensor or
composite).  Evaluation order of the nodes is fixed, so results are
deterministic.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .kernel import defect_values, devf_min, rho1_values
from .windows import Window

X_NODES = 64
X_NODES_COARSE = 32
PANEL_NODES = 16
DIAG_PANEL = 0.25
TAIL_PANEL = 1.0
CHUNK = 20_000
LOW_CONF_REL = 0.05
DELTA_MAX = 0.5


def gauss_legendre(a, b, n):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (b + a), 0.5 * (b - a) * w


def composite_gl(a, b, panel, n):
    """Composite rule on [a, b] with panels of length <= panel."""
    if b <= a:
        return np.empty(0), np.empty(0)
    k = max(1, int(math.ceil((b - a) / panel - 1e-12)))
    edges = np.linspace(a, b, k + 1)
    xs, ws = zip(*(gauss_legendre(lo, hi, n) for lo, hi in zip(edges[:-1], edges[1:])))
    return np.concatenate(xs), np.concatenate(ws)


def check_window(rho, window: Window):
    if window.kind == "strip":
        if not 0 < window.delta <= DELTA_MAX:
            raise ValueError(f"strip delta must be in (0, {DELTA_MAX}]")
        if devf_min(rho, window.delta) <= 0:
            raise ValueError("V S - T^2 not positive on [-2 delta, 2 delta]; reduce delta")
    elif window.kind != "ball":
        raise ValueError("quadrature supports strip and ball windows only")


def mean_count(rho, window: Window, nodes=X_NODES, integrand=None):
    """E N(window) = integral of rho1.

    ``integrand`` replaces rho1 (a function of z); used for sanity hooks.
    """
    check_window(rho, window)
    f = integrand if integrand is not None else (lambda z: rho1_values(rho, z))
    if window.kind == "strip":
        x, w = gauss_legendre(-window.delta, window.delta, nodes)
        # rho1 is independent of Im z
        return float(2.0 * window.C * np.sum(w * f(x + 0j)))
    r, wr = gauss_legendre(0.0, window.radius, nodes)
    th, wt = gauss_legendre(0.0, 2 * math.pi, nodes)
    R, TH = np.meshgrid(r, th, indexing="ij")
    vals = f(R * np.exp(1j * TH)) * R
    return float(np.einsum("i,j,ij->", wr, wt, vals))


def small_ball_mean(rho, c_radius, nodes=X_NODES):
    if not 0 < c_radius <= 0.5:
        raise ValueError("c_radius must be in (0, 0.5]")
    return mean_count(rho, Window.ball(c_radius), nodes)


def default_d0(C):
    return min(math.log(C), C) if C > 1 else C


def dy_rule(C, D0, panel_nodes=PANEL_NODES):
    """Nodes/weights on [0, 2C]: dense panels on [0, D0], coarser beyond."""
    D0 = min(max(D0, 0.0), 2 * C)
    a, wa = composite_gl(0.0, D0, DIAG_PANEL, panel_nodes)
    b, wb = composite_gl(D0, 2 * C, TAIL_PANEL, panel_nodes)
    return np.concatenate([a, b]), np.concatenate([wa, wb]), len(a)


def _defect_grid(rho, x, dy, defect):
    """defect at all (x1, x2, dy) combinations, shape (len(x), len(x), len(dy))."""
    X1, X2, DY = np.meshgrid(x, x, dy, indexing="ij")
    z1 = (X1 + 1j * DY).ravel()
    z2 = (X2 + 0j).ravel()
    out = np.empty(z1.shape)
    for lo in range(0, len(z1), CHUNK):
        out[lo:lo + CHUNK] = defect(rho, z1[lo:lo + CHUNK], z2[lo:lo + CHUNK])
    return out.reshape(X1.shape)


def defect_integral(rho, window: Window, D0=None, x_nodes=X_NODES, panel_nodes=PANEL_NODES,
                    defect=None, dy_min=0.0):
    """Integral of rho2 - rho1 rho1 over window^2.

    Returns (total, diagonal part |dy| < D0, tail part |dy| >= D0).
    ``dy_min`` restricts to |dy| >= dy_min (tail studies).
    """
    if window.kind != "strip":
        raise ValueError("defect_integral needs a strip window")
    check_window(rho, window)
    C, delta = window.C, window.delta
    D0 = default_d0(C) if D0 is None else D0
    if not 0 < D0 <= C:
        raise ValueError("need 0 < D0 <= C")
    f = defect if defect is not None else defect_values
    x, wx = gauss_legendre(-delta, delta, x_nodes)
    if dy_min > 0:
        dy, wdy = composite_gl(dy_min, 2 * C, TAIL_PANEL, panel_nodes)
        n_diag = 0
    else:
        dy, wdy, n_diag = dy_rule(C, D0, panel_nodes)
    vals = _defect_grid(rho, x, dy, f)
    inner = np.einsum("i,j,ijk->k", wx, wx, vals)
    per_dy = 2.0 * (2 * C - dy) * wdy * inner  # factor 2: even in dy
    diag = float(np.sum(per_dy[:n_diag]))
    tail = float(np.sum(per_dy[n_diag:]))
    return diag + tail, diag, tail


def factorial_moment(rho, window: Window, D0=None, x_nodes=X_NODES, panel_nodes=PANEL_NODES):
    """E N(N - 1) = integral of rho2 = defect integral + (E N)^2."""
    d, _, _ = defect_integral(rho, window, D0, x_nodes, panel_nodes)
    m = mean_count(rho, window, x_nodes)
    return d + m * m


@dataclass
class IntensityReport:
    rho: int
    delta: float
    C: float
    mean_count: float
    factorial_moment: float
    variance: float
    ratio: float
    split_D0: float
    defect_integral: float
    diagonal_part: float
    tail_part: float
    quadrature_error_estimate: float
    low_confidence: bool

    def to_json(self):
        d = asdict(self)
        return {"schema_version": 1, "rho": d["rho"], "delta": d["delta"], "C": d["C"],
                "mean": d["mean_count"], "factorial_moment": d["factorial_moment"],
                "variance": d["variance"], "ratio": d["ratio"], "D0": d["split_D0"],
                "defect_integral": d["defect_integral"], "err_estimate": d["quadrature_error_estimate"],
                "low_confidence": d["low_confidence"]}


def variance_report(rho, window: Window, D0=None):
    """Mean, E N(N-1), Var = E N(N-1) + E N - (E N)^2 and Var / (E N)^2."""
    D0 = default_d0(window.C) if D0 is None else D0
    mean = mean_count(rho, window)
    dfi, diag, tail = defect_integral(rho, window, D0)
    dfi_c, _, _ = defect_integral(rho, window, D0, x_nodes=X_NODES_COARSE)
    mean_c = mean_count(rho, window, X_NODES_COARSE)
    fm = dfi + mean * mean
    fm_c = dfi_c + mean_c * mean_c
    err = abs(fm - fm_c)
    var = fm + mean - mean * mean
    low = err > LOW_CONF_REL * abs(fm)
    return IntensityReport(rho, window.delta, window.C, mean, fm, var, var / mean ** 2, D0,
                           dfi, diag, tail, err, bool(low))
