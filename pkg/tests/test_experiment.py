import cmath
import json

import numpy as np
import pytest

from hole_lab import experiment as E
from hole_lab.polynomial import PolySpec, sample
from hole_lab.rootfind import all_roots, count_in_window
from hole_lab.windows import Window

ZETA = cmath.exp(1j)


@pytest.fixture(scope="module")
def curve():
    return E.hole_scan(PolySpec(0, 300), ZETA, 120, master_seed=4)


class TestHoleCurve:
    def test_trials_zero(self):
        with pytest.raises(ValueError):
            E.hole_scan(PolySpec(0, 50), ZETA, 0)

    def test_bad_zeta(self):
        with pytest.raises(ValueError):
            E.hole_scan(PolySpec(0, 50), 1.1, 3)

    def test_sorted_and_limits(self, curve):
        assert np.all(np.diff(curve.rstars) >= 0)
        assert curve.cdf(0.0) == 0.0 and curve.cdf(np.inf) == 1.0
        assert curve.discarded == 0 and not curve.flagged

    def test_hole_law_identity(self, curve):
        for r in np.concatenate([curve.rstars[::10], [0.5, 1.0, 3.0]]):
            assert curve.hits(r) + curve.holes(r) == len(curve.rstars)
            assert curve.cdf(r) == pytest.approx(1.0 - curve.survival(r), abs=1e-15)
            assert curve.cdf(r) == np.count_nonzero(curve.rstars < r) / len(curve.rstars)

    def test_cdf_matches_ball_counts(self, curve):
        spec, r = curve.spec, 2.0
        hits = [count_in_window(all_roots(sample(spec, 4, t).coeffs), ZETA, Window.ball(r), spec.n) > 0
                for t in range(curve.trials)]
        assert np.mean(hits) == curve.cdf(r)

    def test_deterministic_across_workers(self):
        spec = PolySpec(1, 150, "gaussian")
        a = E.hole_scan(spec, ZETA, 60, 7, workers=1)
        b = E.hole_scan(spec, ZETA, 60, 7, workers=3)
        assert np.array_equal(a.trial_rstar, b.trial_rstar)
        assert np.array_equal(a.trial_residual, b.trial_residual)

    def test_multi_matches_single(self):
        spec = PolySpec(0, 120)
        zs = [ZETA, 1.0, -1.0]
        multi = E.hole_scan_multi(spec, zs, 30, 2)
        for z, c in zip(zs, multi):
            assert np.array_equal(c.rstars, E.hole_scan(spec, z, 30, 2).rstars)

    def test_median_band_over_n(self):
        meds = [E.hole_scan(PolySpec(0, n), ZETA, 150, 1).median() for n in (100, 200, 400)]
        assert max(meds) <= 2 * min(meds)

    def test_discard_flag(self):
        r = np.array([1.0, np.nan, 2.0] + [3.0] * 97)
        c = E.HoleCurve(PolySpec(0, 10), 1.0, 100, r, np.zeros(100))
        assert c.discarded == 1 and not c.flagged
        r[5] = np.nan
        c = E.HoleCurve(PolySpec(0, 10), 1.0, 100, r, np.zeros(100))
        assert c.flagged

    def test_csv(self, curve, tmp_path):
        p = tmp_path / "curve.csv"
        curve.write_csv(p)
        lines = p.read_text().splitlines()
        assert lines[0] == "trial,rstar,residual_max,discarded_flag"
        vals = [float(l.split(",")[1]) for l in lines[1:]]
        assert len(vals) == curve.trials and vals == sorted(vals)

    def test_manifest_hash(self, curve):
        m = curve.manifest()
        assert m["hash"] == E.config_hash(m["config"])
        other = E.hole_scan(PolySpec(0, 300), ZETA, 120, master_seed=5).manifest()
        assert other["hash"] != m["hash"]
        json.dumps(m)


class TestProbe:
    def test_grid(self):
        M, x = E.probe_grid(100, 1.5)
        assert M == 12 and len(x) == 24 and np.all(np.diff(x) > 0)
        assert E.probe_grid(1, 1.5)[0] == 1
        with pytest.raises(ValueError):
            E.probe_grid(10, 1.0)
        with pytest.raises(ValueError):
            E.probe_grid(0.5, 1.5)

    def test_constant_stub(self):
        assert not E.sign_change(np.r_[1.0, np.zeros(99), 1e-300], 100)
        c = np.zeros(501)
        c[0] = 2.0
        c[-1] = 1e-300
        assert not E.sign_change(c, 50)

    def test_linear_root(self):
        n = 100
        # f(z) = z - 1 - 0.5/n vanishes at x = 0.5, between the grid points -1 and 1
        c = np.zeros(n + 1)
        c[0], c[1], c[-1] = -(1 + 0.5 / n), 1.0, 1e-300
        assert E.sign_change(c, 1)

    def test_rho_restriction(self):
        with pytest.raises(ValueError):
            E.real_root_probe(PolySpec(1, 100), 10, trials=5)

    def test_monotone_nested(self):
        res = E.real_root_probe_multi(PolySpec(0, 2000), [1, 1.5, 5, 20, 100], 1.5, 200, 3)
        p = [r.prob_sign_change for r in res]
        assert p == sorted(p)
        for r in res:
            lo, hi = r.ci
            assert 0 <= lo <= r.prob_sign_change <= hi <= 1
        assert res[-1].to_json()["M"] == 12


class TestUniversality:
    def test_identical_zero(self):
        s = PolySpec(0, 150, "gaussian")
        assert E.universality_compare(s, s, ZETA, 150, 40, 1) == 0.0

    def test_spec_mismatch(self):
        with pytest.raises(ValueError):
            E.universality_compare(PolySpec(0, 150), PolySpec(1, 150, "gaussian"), ZETA, trials=5)
        with pytest.raises(ValueError):
            E.universality_compare(PolySpec(0, 150), PolySpec(0, 150, "gaussian"), ZETA, n=200, trials=5)

    def test_small_distance(self):
        d = E.universality_compare(PolySpec(0, 200), PolySpec(0, 200, "gaussian"), ZETA, trials=300, seed=2)
        assert 0 < d < 0.2


def test_window_counts():
    k = E.window_counts(PolySpec(0, 300, "gaussian"), ZETA, Window.strip(0.1, 5), 40, 0)
    assert len(k) == 40 and np.all(k >= 0)
