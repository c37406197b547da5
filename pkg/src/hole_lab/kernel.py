"""Kernel F(u) = (e^u - 1)/u, its derivatives, and Kac-Rice intensities.

The limit field g(z) = int_0^1 t^rho e^{zt} dB(t) has covariance
E g(z) conj(g(w)) = F^(2 rho)(z + conj(w)), where

    F^(k)(u) = int_0^1 t^k e^{tu} dt.

Everything here is a pure function of its inputs and works elementwise on
numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

K_MAX = 16
U_SWITCH = 1.5
D_MIN = 1e-6
DIAGONAL_OFFSET = 1e-4
# pairs closer than this use the divided-difference formulation
STABLE_PAIR_RADIUS = 1.0
IMAG_RESIDUE_TOL = 1e-8

_SERIES_REL_TOL = 1e-18
_SERIES_MAX_TERMS = 200
# upward recurrence amplifies rounding by ~k!/|u|^k; keep that below this
_RECURRENCE_GROWTH_CAP = 1e3

_GL_T_NODES, _GL_T_WEIGHTS = np.polynomial.legendre.leggauss(40)
_GL_T_NODES = 0.5 * (_GL_T_NODES + 1.0)
_GL_T_WEIGHTS = 0.5 * _GL_T_WEIGHTS


class NearDiagonalError(ValueError):
    """Raised when a two-point intensity is requested at |z1 - z2| < d_min."""


class ImaginaryResidueError(ArithmeticError):
    """A quantity that must be real came out with a large imaginary part."""


def _check_order(k):
    if k < 0 or k > K_MAX:
        raise ValueError(f"derivative order k={k} outside [0, {K_MAX}]")


def switch_radius(k, u_switch=U_SWITCH):
    """Radius below which the power series is used for orders up to ``k``.

    This is ``u_switch`` unless the upward recurrence would amplify rounding
    errors by more than ``1e3`` at that radius (only for k >= 8).
    """
    cond = (math.factorial(k) / _RECURRENCE_GROWTH_CAP) ** (1.0 / k) if k > 0 else 0.0
    return max(u_switch, cond)


def f_derivs_series(kmax, u):
    """All of F^(0..kmax)(u) by the power series sum_m u^m / (m! (m+k+1))."""
    u = np.asarray(u, dtype=complex)
    out = np.zeros((kmax + 1,) + u.shape, dtype=complex)
    ks = np.arange(kmax + 1).reshape((-1,) + (1,) * u.ndim)
    term = np.ones_like(u)
    for m in range(_SERIES_MAX_TERMS):
        contrib = term / (m + ks + 1)
        out += contrib
        if np.all(np.abs(contrib) <= _SERIES_REL_TOL * np.abs(out)):
            break
        term = term * u / (m + 1)
    return out


def f_derivs_recurrence(kmax, u):
    """All of F^(0..kmax)(u) by F^(k) = (e^u - k F^(k-1)) / u.

    Accurate when |u| is large compared with k; loses about
    log10(k!/|u|^k) digits otherwise.
    """
    u = np.asarray(u, dtype=complex)
    out = np.empty((kmax + 1,) + u.shape, dtype=complex)
    eu = np.exp(u)
    with np.errstate(divide="ignore", invalid="ignore"):
        out[0] = np.expm1(u) / u
        for k in range(1, kmax + 1):
            out[k] = (eu - k * out[k - 1]) / u
    return out


def f_deriv_recurrence_mp(k, u, dps=60):
    """Upward recurrence carried out in ``dps``-digit arithmetic (scalar)."""
    import mpmath

    with mpmath.workdps(dps):
        um = mpmath.mpc(complex(u))
        eu = mpmath.exp(um)
        val = mpmath.expm1(um) / um
        for j in range(1, k + 1):
            val = (eu - j * val) / um
        return complex(val)


def f_derivs(kmax, u, u_switch=U_SWITCH):
    """F^(k)(u) for k = 0..kmax; array of shape ``(kmax+1,) + u.shape``."""
    _check_order(kmax)
    u = np.asarray(u, dtype=complex)
    r = switch_radius(kmax, u_switch)
    small = np.abs(u) <= r
    if np.all(small):
        return f_derivs_series(kmax, u)
    if not np.any(small):
        return f_derivs_recurrence(kmax, u)
    out = np.empty((kmax + 1,) + u.shape, dtype=complex)
    out[:, small] = f_derivs_series(kmax, u[small])
    out[:, ~small] = f_derivs_recurrence(kmax, u[~small])
    return out


def f_deriv(k, u, u_switch=U_SWITCH):
    """F^(k)(u) = int_0^1 t^k e^{tu} dt.

    Parameters
    ----------
    k : int
        Derivative order, ``0 <= k <= 16``.
    u : complex or array_like
        Argument(s). ``Re u > 700`` overflows and raises.
    u_switch : float
        Minimum radius of the power-series regime.

    Returns
    -------
    complex or ndarray
    """
    _check_order(k)
    ua = np.asarray(u, dtype=complex)
    if np.any(ua.real > 700.0):
        raise OverflowError("Re u > 700: exp(u) overflows double precision")
    val = f_derivs(k, ua, u_switch)[k]
    return complex(val) if val.ndim == 0 else val


@dataclass(frozen=True)
class KernelScalars:
    u: complex
    S: complex
    T: complex
    V: complex
    rho: int


@dataclass(frozen=True)
class KernelPair:
    z1: complex
    z2: complex
    S: np.ndarray
    T: np.ndarray
    V: np.ndarray
    rho: int


@dataclass(frozen=True)
class IntensityValue:
    value: float
    kind: str  # "one_point" | "two_point" | "defect"

    def __float__(self):
        return self.value


def kernel_scalars(rho, z):
    u = 2.0 * complex(z).real
    S, T, V = f_derivs(2 * rho + 2, u)[2 * rho:]
    return KernelScalars(complex(u), complex(S), complex(T), complex(V), rho)


def rho1_values(rho, z):
    """Vectorised one-point intensity (VS - T^2) / (pi S^2); depends on Re z only."""
    u = 2.0 * np.real(np.asarray(z, dtype=complex))
    S, T, V = f_derivs(2 * rho + 2, u)[2 * rho:].real
    return (V * S - T * T) / (np.pi * S * S)


def rho1(rho, z):
    return IntensityValue(float(rho1_values(rho, z)), "one_point")


def pair_matrices(rho, z1, z2):
    z = np.array([complex(z1), complex(z2)])
    u = z[:, None] + np.conj(z)[None, :]
    F = f_derivs(2 * rho + 2, u)
    return KernelPair(complex(z1), complex(z2), F[2 * rho], F[2 * rho + 1], F[2 * rho + 2], rho)


def _per2(a11, a12, a21, a22):
    return a11 * a22 + a12 * a21


def _rho2_direct(rho, z1, z2):
    """Literal per(V - T S^-1 T*) / (pi^2 det S) from F-derivative matrices."""
    u11 = 2.0 * z1.real
    u22 = 2.0 * z2.real
    u12 = z1 + np.conj(z2)
    k0 = 2 * rho
    F11 = f_derivs(k0 + 2, u11)[k0:]
    F22 = f_derivs(k0 + 2, u22)[k0:]
    F12 = f_derivs(k0 + 2, u12)[k0:]
    S11, T11, V11 = F11
    S22, T22, V22 = F22
    S12, T12, V12 = F12
    S21, T21, V21 = np.conj(S12), np.conj(T12), np.conj(V12)
    det = S11 * S22 - S12 * S21
    # S^-1 = adj / det
    i11, i12, i21, i22 = S22 / det, -S12 / det, -S21 / det, S11 / det
    # T* = T (Hermitian), so W = T S^-1 T
    A11 = T11 * i11 + T12 * i21
    A12 = T11 * i12 + T12 * i22
    A21 = T21 * i11 + T22 * i21
    A22 = T21 * i12 + T22 * i22
    W11 = A11 * T11 + A12 * T21
    W12 = A11 * T12 + A12 * T22
    W21 = A21 * T11 + A22 * T21
    W22 = A21 * T12 + A22 * T22
    per = _per2(V11 - W11, V12 - W12, V21 - W21, V22 - W22)
    return per / (np.pi ** 2 * det)


def _phi12(x):
    """phi1(x) = (e^x - 1)/x and phi2(x) = (e^x - 1 - x)/x^2, elementwise."""
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < 0.5
    p1 = np.empty_like(x)
    p2 = np.empty_like(x)
    if np.any(small):
        xs = x[small]
        s1 = np.zeros_like(xs)
        s2 = np.zeros_like(xs)
        term = np.ones_like(xs)  # x^m / m!
        for m in range(24):
            s1 += term / (m + 1)
            s2 += term / ((m + 1) * (m + 2))
            term = term * xs / (m + 1)
        p1[small] = s1
        p2[small] = s2
    if np.any(~small):
        xl = x[~small]
        e = np.expm1(xl)
        p1[~small] = e / xl
        p2[~small] = (e - xl) / (xl * xl)
    return p1, p2


def _rho2_stable(rho, z1, z2):
    """rho2 in the divided-difference basis, accurate as z2 -> z1.

    Conditions g'(z1) - D, g'(z2) - D on (g(z1), D) with
    D = (g(z2) - g(z1))/h, h = z2 - z1.  All four variables are
    t^rho e^{z1 t} times smooth functions of t; their Gram matrix is
    computed by Gauss-Legendre quadrature in t.  The result equals the
    direct formula identically; it only avoids the O(h^2) cancellation.
    """
    h = z2 - z1
    x1 = z1.real
    t = _GL_T_NODES
    w = _GL_T_WEIGHTS * t ** (2 * rho) * np.exp(2.0 * x1[..., None] * t)
    p1, p2 = _phi12(h[..., None] * t)
    b0 = np.ones_like(p1)
    b1 = t * p1
    c0 = -(t * t) * p2
    c1 = (t * t) * (p1 - p2)

    def gram(a, b):
        return np.sum(w * a * np.conj(b), axis=-1)

    S11 = gram(b0, b0).real
    S12 = gram(b0, b1)
    S22 = gram(b1, b1).real
    T11 = gram(c0, b0)
    T12 = gram(c0, b1)
    T21 = gram(c1, b0)
    T22 = gram(c1, b1)
    V11 = gram(c0, c0).real
    V12 = gram(c0, c1)
    V22 = gram(c1, c1).real
    S21 = np.conj(S12)
    V21 = np.conj(V12)
    det = S11 * S22 - (S12 * S21).real
    i11, i12, i21, i22 = S22 / det, -S12 / det, -S21 / det, S11 / det
    # K = V - T S^-1 T^*
    A11 = T11 * i11 + T12 * i21
    A12 = T11 * i12 + T12 * i22
    A21 = T21 * i11 + T22 * i21
    A22 = T21 * i12 + T22 * i22
    K11 = V11 - (A11 * np.conj(T11) + A12 * np.conj(T12))
    K12 = V12 - (A11 * np.conj(T21) + A12 * np.conj(T22))
    K21 = V21 - (A21 * np.conj(T11) + A22 * np.conj(T12))
    K22 = V22 - (A21 * np.conj(T21) + A22 * np.conj(T22))
    per = _per2(K11, K12, K21, K22)
    return np.abs(h) ** 2 * per / (np.pi ** 2 * det)


def rho2_values(rho, z1, z2, d_min=D_MIN):
    """Vectorised two-point intensity. Raises NearDiagonalError if any
    |z1 - z2| < d_min."""
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    z1, z2 = np.broadcast_arrays(z1, z2)
    dist = np.abs(z2 - z1)
    if np.any(dist < d_min):
        raise NearDiagonalError(f"|z1 - z2| < {d_min}; use rho2_near_diagonal")
    out = np.empty(z1.shape, dtype=complex)
    near = dist < STABLE_PAIR_RADIUS
    if np.any(near):
        out[near] = _rho2_stable(rho, z1[near], z2[near])
    if np.any(~near):
        out[~near] = _rho2_direct(rho, z1[~near], z2[~near])
    resid = np.abs(out.imag)
    scale = np.maximum(np.abs(out.real), 1e-300)
    if np.any(resid > IMAG_RESIDUE_TOL * scale) and np.any(resid > 1e-14):
        raise ImaginaryResidueError(f"imaginary residue {resid.max():.3e} in rho2")
    return out.real


def rho2_near_diagonal(rho, z1, z2, offset=DIAGONAL_OFFSET):
    """Continuity-limit evaluation: rho2 at z1 + offset * direction(z2 - z1)."""
    z1 = complex(z1)
    h = complex(z2) - z1
    direction = h / abs(h) if h != 0 else 1.0
    return float(rho2_values(rho, z1, z1 + offset * direction))


def rho2(rho, z1, z2, d_min=D_MIN):
    return IntensityValue(float(rho2_values(rho, z1, z2, d_min)), "two_point")


def defect_values(rho, z1, z2, d_min=D_MIN):
    """rho2(z1, z2) - rho1(z1) rho1(z2), vectorised."""
    return rho2_values(rho, z1, z2, d_min) - rho1_values(rho, z1) * rho1_values(rho, z2)


def corr_defect(rho, z1, z2, d_min=D_MIN):
    return IntensityValue(float(defect_values(rho, z1, z2, d_min)), "defect")


def devf_min(rho, delta, num=201):
    """min over u in [-2 delta, 2 delta] of V(u) S(u) - T(u)^2."""
    u = np.linspace(-2.0 * delta, 2.0 * delta, num)
    S, T, V = f_derivs(2 * rho + 2, u)[2 * rho:].real
    return float(np.min(V * S - T * T))
