import math

import mpmath as mpm
import numpy as np
import pytest

from polyphase.duals import external_objective, solve_external_argmin
from polyphase.errors import DomainError
from polyphase.exponents import (
    ExponentPoint,
    internal_rate,
    psi_com,
    psi_ext,
    psi_ext_nu_derivative,
    psi_ext_second_deriv,
    psi_face,
    psi_int,
    psi_net,
    weak_objective,
)
from polyphase.specfun import SQRT_PI, approximant, entropy
from polyphase.thresholds import weak_nu_slope

LOG2 = math.log(2)
H01 = 0.325082973391448  # entropy(0.1), high-precision value


class TestCombinatorial:
    def test_gamma_zero(self):
        assert psi_com("simplex", 0.5, 0.0) == pytest.approx(LOG2, abs=1e-15)

    def test_cross_offset(self):
        assert psi_com("cross", 0.3, 0.2) - psi_com("simplex", 0.3, 0.2) == pytest.approx(0.3 * LOG2, abs=1e-15)

    def test_value(self):
        assert psi_com("simplex", 0.1, 0.1) == pytest.approx(H01 * 1.1, abs=1e-12)
        assert psi_com("simplex", 0.1, 0.1) == pytest.approx(0.357591, abs=1e-6)


class TestInternal:
    def test_linear_in_nu(self):
        assert psi_int(0.8, 0.3) == pytest.approx(2 * psi_int(0.4, 0.3), rel=1e-15)

    def test_small_gamma_asymptote(self):
        g = 0.01
        asym = -0.5 * (math.log(g) + math.log(math.e / (2 * math.pi)))
        assert abs(psi_int(1.0, g) - asym) <= 0.05 * abs(math.log(g))

    def test_against_independent_root(self):
        g, nu = mpm.mpf("0.2"), mpm.mpf("0.5")

        def eq(s):
            return s * mpm.sqrt(mpm.pi / 2) * mpm.erfc(s / mpm.sqrt(2)) * mpm.exp(s * s / 2) - (1 - g)

        s = mpm.findroot(eq, (1.0, 3.0), solver="anderson", tol=1e-30)
        y = g * s / (1 - g)
        ref = nu * (1 - g) * (mpm.log(y / g) + mpm.log(2 * mpm.pi) / 2 + (g - 1) / (2 * g) * y * y)
        assert psi_int(0.5, 0.2) == pytest.approx(float(ref), rel=1e-12)

    def test_gamma_zero_is_infinite(self):
        assert internal_rate(0.0) == math.inf
        assert psi_net("simplex", 0.5, 0.0) == -math.inf

    def test_domain(self):
        with pytest.raises(DomainError):
            internal_rate(1.0)


class TestExternal:
    def test_near_one(self):
        assert psi_ext("simplex", 1 - 1e-9) == pytest.approx(0.0, abs=1e-8)
        assert psi_ext("simplex", 1.0) == 0.0

    def test_small_nu_asymptote(self):
        nu = 1e-4
        z = 1 / (2 * nu * SQRT_PI)
        lz, llz = math.log(z), math.log(math.log(z))
        asym = nu * (lz - 0.5 * llz + 1)
        assert abs(psi_ext("simplex", nu) - asym) <= 2 * nu * llz / lz

    def test_cross_half_direct_minimisation(self):
        nu = mpm.mpf("0.5")
        f = lambda t: nu * t * t - (1 - nu) * mpm.log(mpm.erf(t))  # noqa: E731
        grid = [mpm.mpf(i) / 200 for i in range(1, 801)]
        t0 = min(grid, key=f)
        a, b = t0 - mpm.mpf(1) / 200, t0 + mpm.mpf(1) / 200
        r = (mpm.sqrt(5) - 1) / 2
        for _ in range(100):
            c, d = b - r * (b - a), a + r * (b - a)
            if f(c) < f(d):
                b = d
            else:
                a = c
        assert psi_ext("cross", 0.5) == pytest.approx(float(f((a + b) / 2)), rel=1e-13)

    @pytest.mark.parametrize("family", ["simplex", "cross"])
    def test_nonnegative(self, family):
        v = psi_ext(family, np.linspace(0.001, 0.999, 200))
        assert np.all(v >= 0)

    @pytest.mark.parametrize("family", ["simplex", "cross"])
    def test_nu_derivative_against_finite_difference(self, family):
        rng = np.random.default_rng(11)
        for nu in rng.uniform(0.02, 0.95, 20):
            h = 1e-6
            fd = (psi_ext(family, nu + h) - psi_ext(family, nu - h)) / (2 * h)
            assert psi_ext_nu_derivative(family, nu) == pytest.approx(fd, rel=1e-5, abs=1e-8)


class TestCurvature:
    def test_documented_closed_form_simplex_half(self):
        # literal closed form 2 nu/(1-nu) (1 + 2x^2) at nu = 1/2
        x = solve_external_argmin("simplex", 0.5).argmin
        assert psi_ext_second_deriv("simplex", 0.5) == pytest.approx(2 * (1 + 2 * x * x), rel=1e-12)

    @pytest.mark.parametrize("family", ["simplex", "cross"])
    def test_positive(self, family):
        assert np.all(psi_ext_second_deriv(family, np.arange(1, 10) / 10) > 0)

    @pytest.mark.parametrize("family", ["simplex", "cross"])
    @pytest.mark.parametrize("nu", [0.05, 0.3, 0.5, 0.7, 0.9])
    def test_finite_difference(self, family, nu):
        t = solve_external_argmin(family, nu).argmin
        h = 1e-4
        fd = (external_objective(family, nu, t + h) - 2 * external_objective(family, nu, t)
              + external_objective(family, nu, t - h)) / h ** 2
        assert psi_ext_second_deriv(family, nu) == pytest.approx(fd, rel=1e-5)


class TestFaceAndNet:
    def test_face_half(self):
        assert psi_face("simplex", 1.0, 0.5) == pytest.approx(LOG2)
        assert psi_face("cross", 1.0, 0.5) == pytest.approx(1.5 * LOG2)

    def test_face_value(self):
        assert psi_face("simplex", 0.5, 0.2) == pytest.approx(H01, abs=1e-12)

    @pytest.mark.parametrize("family", ["simplex", "cross"])
    def test_additivity(self, family):
        nu, g = 0.5, 0.1
        total = psi_net(family, nu, g) + psi_int(nu, g) + psi_ext(family, nu)
        assert total == pytest.approx(psi_com(family, nu, g), abs=1e-12)

    def test_recomposition(self):
        nu, g = 0.5555, 0.3
        parts = entropy(nu) + nu * entropy(g) - nu * internal_rate(g) - psi_ext("simplex", nu)
        v = psi_net("simplex", nu, g)
        assert math.isfinite(v) and v == pytest.approx(parts, abs=1e-14)

    def test_weak_is_net_minus_face(self):
        assert weak_objective("cross", 0.4, 0.3) == pytest.approx(
            psi_net("cross", 0.4, 0.3) - psi_face("cross", 0.4, 0.3), abs=1e-15)

    def test_point_validation(self):
        ExponentPoint(1.0, 0.0)
        for nu, g in ((0.0, 0.1), (1.1, 0.1), (0.5, 1.0), (0.5, -0.1)):
            with pytest.raises(DomainError):
                ExponentPoint(nu, g)


STRONG = [("simplex", "r_strong_plus"), ("cross", "r_strong_pm")]


class TestSmallDeltaTrajectories:
    @pytest.mark.parametrize("delta", [1e-3, 1e-4])
    @pytest.mark.parametrize("family,which", STRONG)
    def test_strong_sign_change_around_2e(self, delta, family, which):
        above = psi_net(family, delta, approximant(which, delta, 2 * math.e * 1.2))
        below = psi_net(family, delta, approximant(which, delta, 2 * math.e * 0.8))
        assert above < 0 < below

    @pytest.mark.parametrize("delta", [1e-6, 1e-8])
    @pytest.mark.parametrize("family,which", STRONG)
    def test_strong_sign_change_deeper(self, delta, family, which):
        above = psi_net(family, delta, approximant(which, delta, 2 * math.e * 1.2))
        below = psi_net(family, delta, approximant(which, delta, 2 * math.e * 0.8))
        assert above < 0 < below

    @pytest.mark.parametrize("family", ["simplex", "cross"])
    def test_weak_sign_change_between_18_and_22(self, family):
        # the weak maximal function changes sign where its nu-slope at nu = delta does
        delta = 1e-3
        lo = weak_nu_slope(family, delta, approximant("r_weak", delta, 2.2))
        hi = weak_nu_slope(family, delta, approximant("r_weak", delta, 1.8))
        assert lo < 0 < hi


class TestMonotonicity:
    @pytest.mark.parametrize("family", ["simplex", "cross"])
    @pytest.mark.parametrize("nu", [0.001, 0.01, 0.1, 0.5, 0.9])
    def test_increasing_in_gamma(self, family, nu):
        g = np.linspace(1e-4, 1 / 30, 60)
        assert np.all(np.diff(psi_net(family, nu, g)) > 0)

    @pytest.mark.parametrize("family,which", STRONG)
    def test_decreasing_in_nu(self, family, which):
        delta = 1e-3
        r = approximant(which, delta, 2 * math.e * 1.2)
        nus = np.linspace(delta, 0.99, 300)
        for g in (r, r / 2, r / 10):
            assert np.all(np.diff(psi_net(family, nus, g)) < 0)
