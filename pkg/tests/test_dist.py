import math

import numpy as np
import pytest
from scipy import stats

from bienayme_lab import dist
from bienayme_lab.rng import stream

from conftest import CAUCHY_A


class TestLoadSpec:
    def test_geometric_preset(self, geom):
        for k in range(6):
            assert geom.pmf(k) == pytest.approx(2.0 ** -(k + 1), abs=0)
        assert geom.mean == 1.0 and geom.is_critical

    def test_tabulated(self, tab_half):
        assert tab_half.pmf(0) == 0.5
        assert tab_half.pmf(1) == 0.0
        assert tab_half.pmf(2) == 0.5
        assert tab_half.is_critical

    def test_cauchy_solves_head(self, cauchy_a):
        # mass and mean close exactly by the linear solve
        assert abs(cauchy_a.total_mass - 1.0) <= 1e-12
        assert abs(cauchy_a.mean - 1.0) <= 1e-9
        # tail values follow c L(n)/n^2
        c = cauchy_a.c
        for n in (12, 100, 5000):
            assert cauchy_a.pmf(n) == pytest.approx(c / (n ** 2 * math.log(n) ** 2), rel=1e-14)

    def test_cauchy_default_c_is_max_feasible(self):
        d = dist.load_spec({"kind": "cauchy_A", "beta": 1.0, "cutoff": 2})
        # at the feasibility edge mu_1 hits zero
        assert d.head[1] == pytest.approx(0.0, abs=1e-12)
        with pytest.raises(dist.DistError):
            dist.load_spec({"kind": "cauchy_A", "beta": 1.0, "cutoff": 2,
                            "c": d.c * 1.01})

    def test_malformed_documents(self):
        with pytest.raises(dist.DistError):
            dist.load_spec("not json at all {")
        with pytest.raises(dist.DistError):
            dist.load_spec({"kind": "tabulated", "probs": [0.5, -0.1, 0.6]})
        with pytest.raises(dist.DistError):
            dist.load_spec({"kind": "tabulated", "probs": [0.5, 0.4]})
        with pytest.raises(dist.DistError):
            dist.load_spec({"kind": "wat"})

    def test_degenerate_flagged(self):
        d = dist.load_spec({"kind": "tabulated", "probs": [0.5, 0.5]})
        assert d.is_degenerate_linear


class TestPointwise:
    def test_pmf_examples(self, geom, tab_half, cauchy_a):
        assert geom.pmf(3) == 1 / 16
        assert tab_half.pmf(1) == 0.0
        d = dist.load_spec({"kind": "cauchy_A", "beta": 1.0, "cutoff": 2})
        assert d.pmf(10) == pytest.approx(d.c * math.log(10.0) ** -2 / 100, rel=1e-14)

    def test_tail_examples(self, geom, tab_half):
        assert geom.tail(2) == 0.25
        assert geom.tail(0) == 1.0
        assert tab_half.tail(3) == 0.0

    def test_tail_monotone(self, cauchy_a):
        t = cauchy_a.tail_array(2000)
        assert np.all(np.diff(t) <= 0)

    def test_tail_moment_examples(self, geom, tab_half):
        assert geom.tail_moment(2) == pytest.approx(0.75, abs=1e-15)
        assert geom.tail_moment(0) == 1.0
        assert tab_half.tail_moment(2) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("spec", [
        {"kind": "geometric"},
        {"kind": "tabulated", "probs": [0.5, 0, 0.5]},
        CAUCHY_A,
        {"kind": "cauchy_A", "beta": 1.0, "cutoff": 2},
    ])
    def test_tail_two_code_paths(self, spec):
        # suffix-sum path against pmf accumulation, u <= 1e4
        d = dist.load_spec(spec)
        kmax = 10 ** 4
        bulk = d.tail_array(kmax)
        direct = np.empty(kmax + 1)
        for u in range(kmax + 1):
            direct[u] = d.tail(u) if u % 997 == 0 else np.nan
        mask = ~np.isnan(direct)
        assert np.max(np.abs(bulk[mask] - direct[mask])) < 1e-10

    @pytest.mark.parametrize("spec", [
        {"kind": "geometric"},
        {"kind": "tabulated", "probs": [0.5, 0, 0.5]},
        CAUCHY_A,
    ])
    def test_telescoping(self, spec):
        # l*(x) - l*(x+1) = x mu_x, checked on a grid up to 1e4
        d = dist.load_spec(spec)
        xs = np.unique(np.concatenate([np.arange(0, 64),
                                       np.geomspace(64, 10 ** 4, 60).astype(int)]))
        ells = d.tail_moment(xs)
        nxt = d.tail_moment(xs + 1)
        pm = d.pmf(xs)
        assert np.max(np.abs(ells - nxt - xs * pm)) < 1e-12

    def test_ellstar_array_matches_scalar(self, cauchy_a, geom):
        for d in (cauchy_a, geom):
            arr = d.ellstar_array(50000)
            for x in (0, 1, 2, 5, 11, 12, 13, 997, 32768, 40000, 50000):
                assert arr[x] == pytest.approx(float(d.tail_moment(x)), rel=1e-11)

    def test_normalization_every_family(self, geom, tab_half, cauchy_a, cauchy_b, cauchy_c):
        for d in (geom, tab_half, cauchy_a, cauchy_b, cauchy_c):
            assert abs(d.total_mass - 1.0) <= 1e-12
            assert abs(d.mean - 1.0) <= 1e-9


class TestSpanFeasibility:
    def test_span_examples(self, geom, tab_half):
        assert dist.span(geom) == 1
        assert dist.span(tab_half) == 2
        d3 = dist.load_spec({"kind": "tabulated", "probs": [2 / 3, 0, 0, 1 / 3]})
        assert dist.span(d3) == 3
        assert dist.feasible_size(d3, 4)

    def test_span_error_on_delta0(self):
        with pytest.raises(dist.DistError):
            dist.span(dist.load_spec({"kind": "tabulated", "probs": [1.0]}))

    def test_feasibility_parity(self, tab_half, geom):
        feas = [n for n in range(1, 20) if dist.feasible_size(tab_half, n)]
        assert feas == [n for n in range(1, 20) if n % 2 == 1]
        assert all(dist.feasible_size(geom, n) for n in range(1, 20))
        # exact DP agrees with congruence heuristic at the boundary
        assert dist.feasible_size(tab_half, 63) and not dist.feasible_size(tab_half, 64)

    def test_feasibility_vs_bruteforce(self):
        # degrees in {0, 3}: n vertices, j threes with 3j = n-1
        d = dist.load_spec({"kind": "tabulated", "probs": [0.75, 0, 0, 0.25]})
        for n in range(1, 40):
            assert dist.feasible_size(d, n) == ((n - 1) % 3 == 0)


class TestSampling:
    def test_point_mass(self):
        d = dist.load_spec({"kind": "tabulated", "probs": [1.0]})
        assert np.all(d.sample(stream(0, 0), 100) == 0)

    def test_geometric_binomial_bands(self, geom):
        n = 10 ** 6
        y = geom.sample(stream(11, 0), n)
        for k in range(10):
            p = 2.0 ** -(k + 1)
            got = int(np.sum(y == k))
            sd = math.sqrt(n * p * (1 - p))
            assert abs(got - n * p) < 4 * sd, f"bin {k}"

    @pytest.mark.parametrize("spec", [
        {"kind": "geometric"},
        {"kind": "tabulated", "probs": [0.5, 0, 0.5]},
        CAUCHY_A,
    ])
    def test_chisquare_not_rejected(self, spec):
        d = dist.load_spec(spec)
        n = 10 ** 6
        y = d.sample(stream(5, 0), n)
        top = 40
        obs = np.bincount(np.minimum(y, top), minlength=top + 1)
        exp = np.append(d.pmf(np.arange(top)), d.tail(top)) * n
        keep = exp > 10
        chi2 = float(np.sum((obs[keep] - exp[keep]) ** 2 / exp[keep]))
        pval = stats.chi2.sf(chi2, keep.sum() - 1)
        assert pval > 1e-6

    def test_cauchy_deep_tail_ratio(self, cauchy_a):
        # empirical tail over theoretical tail stays near 1 far out
        n = 10 ** 7
        y = cauchy_a.sample(stream(6, 0), n)
        for u in (10, 100, 1000):
            emp = float(np.mean(y >= u))
            theo = float(cauchy_a.tail(u))
            assert 0.9 < emp / theo < 1.1, (u, emp, theo)

    def test_determinism(self, cauchy_a):
        a = cauchy_a.sample(stream(42, 7), 1000)
        b = cauchy_a.sample(stream(42, 7), 1000)
        assert np.array_equal(a, b)
