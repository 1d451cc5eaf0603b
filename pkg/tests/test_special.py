import math

import numpy as np
import pytest
import scipy.special as sps

from heavycomb.errors import (
    BracketError,
    ConvergenceError,
    DomainError,
    InfiniteQuantileError,
)
from heavycomb.special import (
    RootBracket,
    find_root,
    log_gamma,
    normal_cdf,
    normal_quantile,
    reg_beta,
    reg_gamma_lower,
    reg_gamma_upper,
)

# mpmath (30 digits): Phi(1.959964) = 0.975000000903557595697504894747
PHI_AT_1959964 = 0.9750000009035576
# mpmath: log Gamma(1/2) = 0.572364942924700087071713675677
LOG_GAMMA_HALF = 0.5723649429247001


class TestNormalCdf:
    def test_symmetry_at_zero(self):
        assert normal_cdf(0.0) == 0.5

    def test_limit_at_40(self):
        assert abs(normal_cdf(40.0) - 1.0) < 1e-300

    def test_high_precision_point(self):
        assert normal_cdf(1.959964) == pytest.approx(PHI_AT_1959964, rel=1e-15)

    def test_symmetry_identity(self):
        for x in np.concatenate([np.linspace(-8, 8, 41), [-30.0, 30.0]]):
            assert abs(normal_cdf(x) + normal_cdf(-x) - 1.0) <= 1e-15

    def test_against_scipy(self):
        xs = np.linspace(-10, 10, 201)
        ours = np.array([normal_cdf(x) for x in xs])
        assert np.allclose(ours, sps.ndtr(xs), rtol=5e-13, atol=0)

    def test_nonfinite_rejected(self):
        for bad in (math.nan, math.inf, -math.inf):
            with pytest.raises(DomainError):
                normal_cdf(bad)


class TestNormalQuantile:
    def test_median(self):
        assert normal_quantile(0.5) == 0.0

    def test_known_point(self):
        assert normal_quantile(0.975) == pytest.approx(1.9599639845400545, abs=1e-12)

    def test_antisymmetry(self):
        for u in (0.01, 0.1, 0.3, 0.45):
            assert normal_quantile(u) == pytest.approx(-normal_quantile(1 - u), abs=1e-13)

    def test_roundtrip_grid(self):
        # log-spaced grid 1e-12 .. 1 - 1e-12 in both tails
        lows = np.logspace(-12, -0.31, 60)
        grid = np.concatenate([lows, 1.0 - lows])
        for u in grid:
            assert abs(normal_cdf(normal_quantile(u)) - u) <= 1e-12

    def test_bounds(self):
        with pytest.raises(InfiniteQuantileError):
            normal_quantile(0.0)
        with pytest.raises(InfiniteQuantileError):
            normal_quantile(1.0)
        with pytest.raises(DomainError):
            normal_quantile(-0.1)
        with pytest.raises(DomainError):
            normal_quantile(1.1)


class TestLogGamma:
    def test_at_one_and_two(self):
        assert log_gamma(1.0) == 0.0
        assert log_gamma(2.0) == 0.0

    def test_at_half(self):
        assert log_gamma(0.5) == pytest.approx(LOG_GAMMA_HALF, rel=1e-13)

    def test_integers_match_factorials(self):
        for n in range(3, 21):
            assert log_gamma(n) == pytest.approx(math.log(math.factorial(n - 1)), rel=1e-13)

    def test_domain(self):
        for bad in (0.0, -1.0):
            with pytest.raises(DomainError):
                log_gamma(bad)


class TestRegGamma:
    def test_shape_one_closed_form(self):
        for x in (0.1, 0.5, 1.0, 3.0, 10.0):
            assert reg_gamma_upper(1.0, x) == pytest.approx(math.exp(-x), rel=1e-13)

    def test_at_zero(self):
        for s in (0.3, 1.0, 4.5):
            assert reg_gamma_upper(s, 0.0) == 1.0
            assert reg_gamma_lower(s, 0.0) == 0.0

    def test_shape_two_closed_form(self):
        # Q(2, x) = (1 + x) e^-x; at x = 1 this is 2/e
        assert reg_gamma_upper(2.0, 1.0) == pytest.approx(0.7357588823428847, rel=1e-13)

    def test_monotone_decreasing_in_x(self):
        for s in (0.5, 1.7, 6.0):
            values = [reg_gamma_upper(s, x) for x in np.linspace(0, 30, 400)]
            assert all(a >= b for a, b in zip(values, values[1:]))

    def test_complement(self):
        for s in (0.4, 2.3, 9.0):
            for x in (0.2, 1.0, 5.0, 20.0):
                assert reg_gamma_lower(s, x) + reg_gamma_upper(s, x) == pytest.approx(1.0, abs=1e-14)

    def test_against_scipy(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            s = rng.uniform(0.05, 40)
            x = rng.uniform(0, 60)
            assert reg_gamma_upper(s, x) == pytest.approx(sps.gammaincc(s, x), rel=1e-11, abs=1e-300)

    def test_domain(self):
        with pytest.raises(DomainError):
            reg_gamma_upper(0.0, 1.0)
        with pytest.raises(DomainError):
            reg_gamma_upper(1.0, -0.5)


class TestRegBeta:
    def test_endpoints(self):
        assert reg_beta(0.0, 2.0, 3.0) == 0.0
        assert reg_beta(1.0, 2.0, 3.0) == 1.0

    def test_uniform_case(self):
        assert reg_beta(0.5, 1.0, 1.0) == 0.5

    def test_arcsine_point(self):
        # I_x(1/2, 1/2) = (2/pi) arcsin(sqrt(x)); at x = 1/4 this is 1/3
        assert reg_beta(0.25, 0.5, 0.5) == pytest.approx(1.0 / 3.0, rel=1e-13)

    def test_reflection_identity(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            a = rng.uniform(0.1, 50)
            b = rng.uniform(0.1, 50)
            x = rng.uniform(0, 1)
            assert abs(reg_beta(x, a, b) - (1.0 - reg_beta(1.0 - x, b, a))) <= 1e-13

    def test_monotone_in_x(self):
        for a, b in ((0.5, 0.5), (2.0, 5.0), (7.0, 0.3)):
            values = [reg_beta(x, a, b) for x in np.linspace(0, 1, 500)]
            assert all(v2 >= v1 for v1, v2 in zip(values, values[1:]))

    def test_against_scipy(self):
        rng = np.random.default_rng(5)
        for _ in range(300):
            a = rng.uniform(0.05, 60)
            b = rng.uniform(0.05, 60)
            x = rng.uniform(0, 1)
            assert reg_beta(x, a, b) == pytest.approx(sps.betainc(a, b, x), rel=1e-11, abs=1e-295)

    def test_domain(self):
        with pytest.raises(DomainError):
            reg_beta(-0.1, 1.0, 1.0)
        with pytest.raises(DomainError):
            reg_beta(0.5, 0.0, 1.0)
        with pytest.raises(DomainError):
            reg_beta(0.5, 1.0, -2.0)


class TestFindRoot:
    def test_linear(self):
        assert find_root(lambda x: x - 3.0, RootBracket(0.0, 10.0)) == pytest.approx(3.0, abs=1e-12)

    def test_normal_quantile_equivalent(self):
        root = find_root(lambda x: normal_cdf(x) - 0.975, RootBracket(0.0, 10.0))
        assert root == pytest.approx(1.9599639845400545, abs=1e-10)

    def test_sqrt_two(self):
        root = find_root(lambda x: x * x - 2.0, RootBracket(1.0, 2.0))
        assert root == pytest.approx(math.sqrt(2.0), abs=1e-12)

    def test_no_sign_change(self):
        with pytest.raises(BracketError):
            find_root(lambda x: x * x + 1.0, RootBracket(-1.0, 1.0))

    def test_iteration_budget(self):
        with pytest.raises(ConvergenceError):
            find_root(lambda x: normal_cdf(x) - 0.975, RootBracket(0.0, 10.0, max_iter=2))

    def test_bracket_validation(self):
        with pytest.raises(DomainError):
            RootBracket(2.0, 1.0)
        with pytest.raises(DomainError):
            RootBracket(0.0, 1.0, rel_tol=0.0)
