import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import beta_identity, brute_quantile_integral
from uwarrant import (
    DomainError,
    IntegrationError,
    NormalUncertainVariable,
    QuadratureRule,
    QuantileFunction,
    expected_value_from_distribution,
    expected_value_from_quantile,
    integrate_logit,
    inv_normal,
    inv_std_normal,
    normal_distribution,
)

# (sqrt(3)/pi) ln 9, 40-digit mpmath evaluation
INV_STD_NORMAL_09 = 1.211393399216391733502765213970258283538
# 2 + 3 sqrt(3) ln(3) / pi
X_AT_075 = 3.817090098824587600254147820955387425308

STD = NormalUncertainVariable(0.0, 1.0)


def power_quantile(c):
    return QuantileFunction(lambda a: (a / (1 - a)) ** c, logit_eval=lambda u: np.exp(c * u))


class TestNormalDistribution:
    def test_median(self):
        assert normal_distribution(STD, 0.0) == 0.5

    def test_upper_limit_monotone(self):
        xs = [1.0, 5.0, 10.0, 20.0, 40.0]
        vals = [normal_distribution(STD, x) for x in xs]
        assert all(a < b for a, b in zip(vals[:3], vals[1:4]))
        assert vals[-1] == pytest.approx(1.0, abs=1e-15)
        assert normal_distribution(STD, -40.0) < 1e-30

    def test_quartile(self):
        v = NormalUncertainVariable(2.0, 3.0)
        assert normal_distribution(v, X_AT_075) == pytest.approx(0.75, rel=1e-14)

    def test_array_input(self):
        out = normal_distribution(STD, np.array([-1.0, 0.0, 1.0]))
        assert out.shape == (3,)
        assert out[0] + out[2] == pytest.approx(1.0)

    @pytest.mark.parametrize("x", [math.nan, math.inf, -math.inf])
    def test_non_finite_x(self, x):
        with pytest.raises(DomainError):
            normal_distribution(STD, x)

    @pytest.mark.parametrize("sigma", [0.0, -1.0, math.nan, math.inf])
    def test_bad_sigma(self, sigma):
        with pytest.raises(DomainError):
            NormalUncertainVariable(0.0, sigma)


class TestInverse:
    def test_std_median(self):
        assert inv_std_normal(0.5) == 0.0

    def test_std_09(self):
        assert inv_std_normal(0.9) == pytest.approx(INV_STD_NORMAL_09, rel=1e-14)

    def test_inv_normal_median(self):
        assert inv_normal(NormalUncertainVariable(5.0, 2.0), 0.5) == 5.0

    def test_inv_normal_09(self):
        assert inv_normal(STD, 0.9) == pytest.approx(INV_STD_NORMAL_09, rel=1e-14)

    def test_round_trip(self):
        v = NormalUncertainVariable(1.5, 0.7)
        for a in (1e-8, 0.01, 0.3, 0.5, 0.77, 0.999):
            assert normal_distribution(v, inv_normal(v, a)) == pytest.approx(a, rel=1e-12)

    @pytest.mark.parametrize("alpha", [0.0, 1.0, -0.2, 1.5, math.nan])
    def test_domain(self, alpha):
        with pytest.raises(DomainError):
            inv_std_normal(alpha)
        with pytest.raises(DomainError):
            inv_normal(STD, alpha)

    @given(st.floats(0.5, 1 - 1e-9))
    def test_odd_symmetry(self, b):
        a = 1.0 - b  # exact for b >= 0.5, so (a, b) is a true complementary pair
        assert abs(inv_std_normal(a) + inv_std_normal(b)) <= 1e-12 * max(1.0, abs(inv_std_normal(b)))

    @given(st.floats(1e-9, 0.5), st.floats(1e-9, 0.5))
    def test_strictly_increasing(self, a, gap):
        b = min(a + gap, 1 - 1e-9)
        if b > a:
            assert inv_std_normal(b) > inv_std_normal(a)


class TestExpectedValueFromQuantile:
    def test_constant(self):
        assert expected_value_from_quantile(lambda a: np.full_like(a, 3.25)) == pytest.approx(3.25, rel=1e-12)

    def test_scalar_only_callable(self):
        assert expected_value_from_quantile(lambda a: 2.0 * math.sqrt(a)) == pytest.approx(4.0 / 3.0, rel=1e-10)

    @pytest.mark.parametrize("sigma", [0.01, 1.0, 100.0])
    @pytest.mark.parametrize("e", [-7.0, 0.0, 3.0])
    def test_normal_mean(self, e, sigma):
        v = NormalUncertainVariable(e, sigma)
        assert expected_value_from_quantile(v.quantile()) == pytest.approx(e, abs=1e-10 * max(1.0, sigma))
        # alpha-only callable takes the clipped route
        assert expected_value_from_quantile(lambda a: inv_normal(v, a)) == pytest.approx(e, abs=1e-9 * max(1, sigma))

    def test_normal_mean_brute_force(self):
        v = NormalUncertainVariable(3.0, 2.0)
        brute = brute_quantile_integral(lambda a: inv_normal(v, a), 10**6)
        assert expected_value_from_quantile(v.quantile()) == pytest.approx(brute, abs=1e-4)

    @pytest.mark.parametrize("c", [0.05, 0.3, 0.7, 0.9])
    def test_beta_identity(self, c):
        assert expected_value_from_quantile(power_quantile(c)) == pytest.approx(beta_identity(c), rel=1e-8)

    @pytest.mark.parametrize("c", [0.05, 0.3])
    def test_beta_identity_brute_force(self, c):
        brute = brute_quantile_integral(lambda a: (a / (1 - a)) ** c, 10**6)
        assert brute == pytest.approx(beta_identity(c), rel=1e-3)

    def test_composite_backend_cross_check(self):
        rule = QuadratureRule(method="composite")
        v = NormalUncertainVariable(1.0, 1.0)
        assert expected_value_from_quantile(v.quantile(), rule) == pytest.approx(1.0, abs=1e-7)
        # power-law endpoint singularity; [1 - eps, 1] alone holds ~eps**0.7 of mass
        assert expected_value_from_quantile(power_quantile(0.3), rule) == pytest.approx(beta_identity(0.3), rel=1e-4)

    @pytest.mark.parametrize("c", [1.0, 1.5])
    def test_divergent(self, c):
        with pytest.raises(IntegrationError):
            expected_value_from_quantile(power_quantile(c))

    def test_node_budget(self):
        with pytest.raises(IntegrationError, match="nodes"):
            expected_value_from_quantile(power_quantile(0.999), QuadratureRule(max_nodes=5000))


class TestIntegrateLogit:
    @pytest.mark.parametrize(
        "lo, hi",
        [(-math.inf, math.inf), (-3.0, math.inf), (-math.inf, 2.0), (-1e9, 1e9), (5.0, 1e9), (-2.0, 3.0)],
    )
    def test_weight_mass(self, lo, hi):
        def expit(u):
            return 1.0 / (1.0 + math.exp(-u)) if u > -700 else 0.0

        expected = expit(min(hi, 700)) - expit(max(lo, -700))
        got = integrate_logit(lambda u: np.ones_like(u), lo, hi)
        assert got == pytest.approx(expected, rel=1e-10, abs=1e-14)

    def test_empty_interval(self):
        assert integrate_logit(lambda u: np.ones_like(u), 2.0, 1.0) == 0.0


class TestExpectedValueFromDistribution:
    def test_standard(self):
        assert expected_value_from_distribution(lambda x: normal_distribution(STD, x)) == pytest.approx(0.0, abs=1e-10)

    @pytest.mark.parametrize("e", [-20.0, -1.0, 0.5, 4.0, 100.0])
    @pytest.mark.parametrize("sigma", [0.01, 1.0, 5.0])
    def test_agrees_with_quantile_route(self, e, sigma):
        v = NormalUncertainVariable(e, sigma)
        from_dist = expected_value_from_distribution(lambda x: normal_distribution(v, x))
        from_quantile = expected_value_from_quantile(v.quantile())
        assert from_dist == pytest.approx(from_quantile, abs=1e-6)

    def test_near_step(self):
        v = NormalUncertainVariable(3.0, 1e-6)
        assert expected_value_from_distribution(lambda x: normal_distribution(v, x)) == pytest.approx(3.0, abs=1e-6)

    def test_heavy_tail_runs_out_of_budget(self):
        # Cauchy-like tails: neither tail integral converges
        dist = lambda x: 0.5 + np.arctan(x) / math.pi
        with pytest.raises(IntegrationError):
            expected_value_from_distribution(dist, QuadratureRule(max_nodes=200_000))


@settings(max_examples=200)
@given(
    st.floats(-10, 10),
    st.floats(0.1, 10),
    st.floats(1e-6, 1 - 1e-6),
)
def test_round_trip_property(e, sigma, alpha):
    v = NormalUncertainVariable(e, sigma)
    assert abs(normal_distribution(v, inv_normal(v, alpha)) - alpha) <= 1e-12 * alpha


@given(st.floats(-50, 50), st.floats(-50, 50))
def test_distribution_increasing_property(x, dx):
    y = x + abs(dx)
    v = NormalUncertainVariable(0.3, 2.0)
    assert normal_distribution(v, y) >= normal_distribution(v, x)
