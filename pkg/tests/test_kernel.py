import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from hole_lab import kernel as K

# Frozen from an independent 50-digit mpmath route (mp.quad for F, the plain
# Kac-Rice formulas in extended precision).
F_ORACLE = [
    (0, 1, 1.7182818284590452354),
    (3, -2.5, 0.037236305950761067968),
    (7, 0.3 + 0.4j, 0.15287737019639755133 + 0.056973475755410295854j),
    (12, 30j, -0.026733475831852220416 - 0.016145031606242792035j),
    (5, -40, 2.9296874999879082752e-8),
    (2, 40, 5597755876967881.528),
]
RHO1_ORACLE = [
    (0, 0.07, 0.026499848745988826888),
    (1, -0.13, 0.01245467044968587271),
    (2, 0.0, 0.0063156723449164815781),
    (0, 0.4, 0.025698081931647889292),
]
RHO2_ORACLE = [
    (0, 0.05, -0.02 + 0.7j, 2.3659869612800236368e-6),
    (0, 0.0, 0.1 + 3j, 0.000059429254206571045423),
    (1, 0.02 + 1j, -0.05, 1.2584452528794785718e-6),
    (1, 0.0, 15j, 0.00014076807902778266049),
    (0, 0.03, 0.03 + 0.3j, 4.2361185962192240105e-7),
]
# lim_{t -> 0} rho2(0, t e^{i phi}) / t^2 for rho = 0 (80-digit oracle)
RHO2_QUADRATIC_COEFF = 4.69079518718747e-6

complex_u = st.builds(complex, st.floats(-20, 20), st.floats(-20, 20))
small_z = st.builds(complex, st.floats(-0.5, 0.5), st.floats(-10, 10))


def quad_oracle(k, u):
    """Adaptive quadrature of the defining integral (scipy QUADPACK)."""
    scale = quad(lambda t: abs(t ** k * cmath.exp(t * u)), 0, 1)[0]
    kw = dict(epsabs=1e-14 * scale, epsrel=1e-13, limit=400)
    re = quad(lambda t: (t ** k * cmath.exp(t * u)).real, 0, 1, **kw)[0]
    im = quad(lambda t: (t ** k * cmath.exp(t * u)).imag, 0, 1, **kw)[0]
    return complex(re, im)


class TestFDeriv:
    @pytest.mark.parametrize("k", range(K.K_MAX + 1))
    def test_value_at_zero(self, k):
        assert K.f_deriv(k, 0) == pytest.approx(1 / (k + 1), rel=1e-15)

    def test_closed_forms(self):
        assert K.f_deriv(0, 1) == pytest.approx(math.e - 1, rel=1e-15)
        assert K.f_deriv(1, 1) == pytest.approx(1.0, rel=1e-15)
        assert K.f_deriv(2, 0) == pytest.approx(1 / 3, rel=1e-15)

    @pytest.mark.parametrize("k,u,expected", F_ORACLE)
    def test_frozen_oracle(self, k, u, expected):
        assert abs(K.f_deriv(k, u) - expected) <= 1e-12 * abs(expected)

    def test_adaptive_quadrature_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            u = complex(*rng.uniform(-28, 28, 2))
            if abs(u) > 40:
                continue
            k = int(rng.integers(0, 13))
            ref = quad_oracle(k, u)
            assert abs(K.f_deriv(k, u) - ref) <= 1e-9 * abs(ref)

    def test_vectorised_matches_scalar(self):
        u = np.array([0.0, 0.7j, -3.0, 12 + 5j])
        vals = K.f_derivs(6, u)
        for j, uj in enumerate(u):
            for k in range(7):
                assert vals[k, j] == K.f_deriv(k, uj) or abs(vals[k, j] - K.f_deriv(k, uj)) < 1e-15 * abs(vals[k, j])

    def test_errors(self):
        with pytest.raises(ValueError):
            K.f_deriv(K.K_MAX + 1, 0.3)
        with pytest.raises(OverflowError):
            K.f_deriv(0, 701.0)

    @given(complex_u)
    def test_conjugate_symmetry(self, u):
        for k in (0, 3, 8):
            a, b = K.f_deriv(k, u.conjugate()), K.f_deriv(k, u).conjugate()
            assert abs(a - b) <= 1e-13 * abs(a)

    @given(st.floats(-30, 30))
    def test_real_positive_on_real_axis(self, x):
        v = K.f_derivs(8, np.array([x]))[:, 0]
        assert np.all(v.real > 0) and np.all(v.imag == 0)

    @given(complex_u)
    def test_derivative_identity(self, u):
        # d/du F^(k) = F^(k+1): central difference
        h = 1e-5
        for k in (0, 2, 5):
            fd = (K.f_deriv(k, u + h) - K.f_deriv(k, u - h)) / (2 * h)
            ref = K.f_deriv(k + 1, u)
            assert abs(fd - ref) <= 1e-6 * max(abs(ref), abs(K.f_deriv(k, u)))

    def test_dual_path_overlap(self):
        # series vs the same recurrence carried out in 60 digits; the double
        # recurrence alone cannot reach 1e-10 at |u| = 0.5 when k is large
        for r in np.linspace(0.5, 3.0, 6):
            for phi in np.arange(9) * np.pi / 4:
                u = r * cmath.exp(1j * phi)
                s = K.f_derivs_series(12, np.array([u]))[:, 0]
                for k in range(13):
                    ref = K.f_deriv_recurrence_mp(k, u)
                    assert abs(s[k] - ref) <= 1e-10 * abs(ref)

    def test_double_recurrence_where_conditioned(self):
        for r in (2.5, 3.0, 10.0):
            for phi in np.arange(8) * np.pi / 4:
                u = r * cmath.exp(1j * phi)
                rec = K.f_derivs_recurrence(12, np.array([u]))[:, 0]
                ref = np.array([K.f_deriv_recurrence_mp(k, u) for k in range(13)])
                assert np.all(np.abs(rec - ref) <= 1e-9 * np.abs(ref))

    def test_switch_radius(self):
        assert K.switch_radius(4) == K.U_SWITCH
        assert K.switch_radius(16) > K.U_SWITCH


class TestScalars:
    def test_examples(self):
        s = K.kernel_scalars(0, 7.3j)
        assert (s.S, s.T, s.V) == pytest.approx((1, 1 / 2, 1 / 3), rel=1e-15)
        s = K.kernel_scalars(1, 0)
        assert (s.S, s.T, s.V) == pytest.approx((1 / 3, 1 / 4, 1 / 5), rel=1e-15)
        s = K.kernel_scalars(0, 0.05)
        assert s.S.real == pytest.approx(quad(lambda t: math.exp(0.1 * t), 0, 1)[0], rel=1e-13)

    @given(st.integers(0, 4), st.floats(-2, 2))
    def test_cauchy_schwarz(self, rho, x):
        s = K.kernel_scalars(rho, x / 2)
        assert s.S.real > 0 and s.T.real > 0 and s.V.real > 0
        assert s.V.real * s.S.real - s.T.real ** 2 > 0

    def test_devf_min_positive(self):
        for rho in range(4):
            assert K.devf_min(rho, 0.5) > 0


class TestRho1:
    def test_closed_forms(self):
        assert K.rho1(0, 0).value == pytest.approx(1 / (12 * math.pi), rel=1e-13)
        assert K.rho1(1, 0).value == pytest.approx(3 / (80 * math.pi), rel=1e-13)
        assert K.rho1(0, 0).kind == "one_point"

    @pytest.mark.parametrize("rho,z,expected", RHO1_ORACLE)
    def test_frozen_oracle(self, rho, z, expected):
        assert K.rho1(rho, z).value == pytest.approx(expected, rel=1e-12)

    @given(st.integers(0, 3), st.floats(-1, 1), st.floats(-50, 50))
    def test_y_independent_and_positive(self, rho, x, y):
        a = K.rho1(rho, complex(x, y)).value
        assert a > 0
        assert a == K.rho1(rho, x).value


class TestPairMatrices:
    def test_diagonal_rank_one(self):
        p = K.pair_matrices(1, 0.1 + 2j, 0.1 + 2j)
        assert np.allclose(p.S, p.S[0, 0])
        assert abs(np.linalg.det(p.S)) < 1e-15

    def test_example_entry(self):
        p = K.pair_matrices(0, 0, 1j * math.pi)
        u = -1j * math.pi
        assert abs(p.S[0, 1] - (cmath.exp(u) - 1) / u) < 1e-14
        assert abs(p.S[0, 1] - quad_oracle(0, u)) < 1e-12

    @given(small_z, small_z)
    def test_hermitian(self, z1, z2):
        p = K.pair_matrices(1, z1, z2)
        for M in (p.S, p.T, p.V):
            assert np.allclose(M, M.conj().T, rtol=1e-13, atol=0)

    @given(small_z, st.floats(0.1, 5), st.floats(0, 2 * math.pi))
    def test_det_positive_off_diagonal(self, z1, r, phi):
        p = K.pair_matrices(0, z1, z1 + r * cmath.exp(1j * phi))
        assert np.linalg.eigvalsh(p.S).min() > 0

    @given(small_z, small_z, st.floats(-30, 30))
    def test_translation_invariance(self, z1, z2, s):
        a = K.pair_matrices(0, z1, z2)
        b = K.pair_matrices(0, z1 + 1j * s, z2 + 1j * s)
        for M, N in ((a.S, b.S), (a.T, b.T), (a.V, b.V)):
            assert np.allclose(M, N, rtol=1e-9, atol=1e-12)


class TestRho2:
    @pytest.mark.parametrize("rho,z1,z2,expected", RHO2_ORACLE)
    def test_frozen_oracle(self, rho, z1, z2, expected):
        assert K.rho2(rho, z1, z2).value == pytest.approx(expected, rel=1e-9)

    def test_near_diagonal_error(self):
        with pytest.raises(K.NearDiagonalError):
            K.rho2(0, 0.1, 0.1 + 1e-7)
        v = K.rho2_near_diagonal(0, 0.1, 0.1 + 1e-7j)
        assert np.isfinite(v) and v >= 0

    def test_small_offsets_isotropic(self):
        vals = [K.rho2(0, 0, 1e-3 * cmath.exp(1j * phi)).value for phi in (0, math.pi / 4, math.pi / 2)]
        assert max(vals) - min(vals) <= 0.01 * max(vals)
        assert vals[0] / 1e-6 == pytest.approx(RHO2_QUADRATIC_COEFF, rel=1e-6)

    def test_continuity_at_diagonal(self):
        for rho in (0, 1):
            for b in [complex(x, y) for x in (-0.1, 0, 0.1) for y in (-3, 0, 3)]:
                r1sq = K.rho1(rho, b).value ** 2
                for j in range(8):
                    e = cmath.exp(1j * math.pi * j / 4)
                    a = K.rho2(rho, b, b + 1e-4 * e).value
                    c = K.rho2(rho, b, b + 1e-5 * e).value
                    assert abs(a - c) <= 0.01 * r1sq
                    assert a / 1e-8 == pytest.approx(c / 1e-10, rel=0.01)

    def test_stable_and_direct_agree(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            z1 = complex(rng.uniform(-0.3, 0.3), rng.uniform(-2, 2))
            h = rng.uniform(0.4, 1.0) * cmath.exp(1j * rng.uniform(0, 2 * math.pi))
            a = K._rho2_direct(0, np.array([z1]), np.array([z1 + h]))[0]
            b = K._rho2_stable(0, np.array([z1]), np.array([z1 + h]))[0]
            assert abs(a - b) <= 1e-8 * abs(b)

    def test_decorrelation(self):
        assert K.rho2(0, 0, 20j).value == pytest.approx(K.rho1(0, 0).value ** 2, rel=0.1)

    @given(small_z, small_z)
    def test_symmetric_nonnegative(self, z1, z2):
        if abs(z1 - z2) < 1e-3:
            return
        a, b = K.rho2(1, z1, z2).value, K.rho2(1, z2, z1).value
        assert a >= 0
        assert abs(a - b) <= 1e-9 * max(abs(a), 1e-12)

    @given(small_z, small_z, st.floats(-40, 40))
    def test_depends_on_dy_only(self, z1, z2, s):
        if abs(z1 - z2) < 1e-3:
            return
        a = K.rho2(0, z1, z2).value
        b = K.rho2(0, z1 + 1j * s, z2 + 1j * s).value
        assert abs(a - b) <= 1e-9 * abs(a) + 1e-15


class TestDefect:
    def test_far_apart_vanishes(self):
        far = abs(K.corr_defect(0, 0, 80j).value)
        near = abs(K.corr_defect(0, 0, 2j).value)
        assert far < 0.01 * near

    def test_bounded(self):
        vals = [K.corr_defect(1, 0.05, 0.05 + d * 1j).value for d in np.linspace(1e-3, 20, 200)]
        assert np.all(np.isfinite(vals)) and max(abs(v) for v in vals) < 1.0

    def test_swap_symmetric(self):
        z1, z2 = 0.04 + 1.3j, -0.02 - 0.4j
        assert K.corr_defect(0, z1, z2).value == pytest.approx(K.corr_defect(0, z2, z1).value, rel=1e-9)

    def test_decay_profile(self):
        dy = np.linspace(10, 100, 91)
        for rho in (0, 1):
            d = K.defect_values(rho, 0.05 + 1j * dy, -0.03 + 0j * dy)
            assert np.polyfit(dy, np.abs(d) * dy, 1)[0] <= 0
