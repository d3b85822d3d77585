import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rmdirac import (ConvergenceError, DomainError, HypParams, ParameterError,
                     apply_euler, apply_pfaff, gauss_2f1, jacobi_p, ln_gamma)
from rmdirac.hyp import f21_conj_real_values, f21_values


def f21_series_oracle(a, b, c, z, terms=400, dps=40):
    """Independent extended-precision direct power series (test oracle)."""
    with mp.workdps(dps):
        a, b, c, z = (mp.mpmathify(v) for v in (a, b, c, z))
        t = mp.mpf(1)
        s = mp.mpf(1) if all(mp.im(v) == 0 for v in (a, b)) else mp.mpc(1)
        for n in range(terms):
            t = t * (a + n) * (b + n) * z / ((c + n) * (n + 1))
            s += t
        return complex(s)


class TestLnGamma:
    def test_gamma_one(self):
        assert ln_gamma(1.0) == pytest.approx(0.0, abs=1e-15)

    def test_gamma_half(self):
        assert ln_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-13)

    def test_gamma_five(self):
        assert ln_gamma(5.0) == pytest.approx(math.log(24.0), rel=1e-13)

    def test_nonpositive_rejected(self):
        with pytest.raises(DomainError):
            ln_gamma(0.0)
        with pytest.raises(DomainError):
            ln_gamma(-1.3)

    def test_accuracy_range(self):
        # against mpmath on a log-spaced sweep
        for x in np.geomspace(0.1, 100.0, 37):
            exact = float(mp.loggamma(mp.mpf(float(x))))
            got = ln_gamma(float(x))
            assert abs(got - exact) <= 1e-13 * max(1.0, abs(exact))


class TestGauss2F1:
    def test_empty_sum_at_zero(self):
        res = gauss_2f1(HypParams(0.7, 1.3, 2.1), 0.0)
        assert res.value.real == pytest.approx(1.0, abs=1e-15)
        assert res.converged

    def test_binomial_identity(self):
        # 2F1(a, b; b; z) = (1-z)^(-a)
        res = gauss_2f1(HypParams(0.5, 1.7, 1.7), 0.3)
        assert res.value.real == pytest.approx(0.7 ** -0.5, rel=1e-12)

    def test_dilog_style_value(self):
        # frozen from the extended-precision direct-series oracle
        res = gauss_2f1(HypParams(1.0, 1.0, 2.0), 0.5)
        assert res.value.real == pytest.approx(1.3862943611198906, rel=1e-12)
        oracle = f21_series_oracle(1, 1, 2, 0.5).real
        assert res.value.real == pytest.approx(oracle, rel=1e-12)

    def test_quantization_fixture_value(self):
        # frozen from the extended-precision direct-series oracle
        res = gauss_2f1(HypParams(1.5, 0.5, 2.0), 0.5)
        assert res.value.real == pytest.approx(1.2819759956554337, rel=1e-12)

    def test_pfaff_route_matches_oracle(self):
        res = gauss_2f1(HypParams(0.8, 1.9, 2.4), -0.85)
        oracle = f21_series_oracle(0.8, 1.9, 2.4, -0.85, terms=2000).real
        assert res.value.real == pytest.approx(oracle, rel=1e-12)

    def test_upper_half_direct_with_guard(self):
        res = gauss_2f1(HypParams(0.3, 0.9, 2.2), 0.8)
        oracle = f21_series_oracle(0.3, 0.9, 2.2, 0.8, terms=2000).real
        assert res.value.real == pytest.approx(oracle, rel=1e-11)
        assert res.terms_used > 50

    def test_out_of_domain(self):
        with pytest.raises(DomainError):
            gauss_2f1(HypParams(1, 1, 2), 1.0)
        with pytest.raises(DomainError):
            gauss_2f1(HypParams(1, 1, 2), -1.0000001)

    def test_c_pole_rejected(self):
        with pytest.raises(ParameterError):
            HypParams(1.0, 1.0, 0.0)
        with pytest.raises(ParameterError):
            HypParams(1.0, 1.0, -3.0)

    def test_non_conjugate_complex_rejected(self):
        with pytest.raises(ParameterError):
            HypParams(1 + 2j, 0.5 + 2j, 2.0)

    def test_convergence_error_carries_terms(self):
        with pytest.raises(ConvergenceError) as err:
            gauss_2f1(HypParams(2.0, 3.0, 1.5), 0.97, max_terms=40)
        assert err.value.terms_used == 40

    def test_terminating_series_is_exact(self):
        # negative-integer a terminates the series: a polynomial in z
        res = gauss_2f1(HypParams(-2.0, 1.3, 2.0), 0.4)
        a, b, c, z = -2.0, 1.3, 2.0, 0.4
        exact = 1.0 + a * b / c * z + a * (a + 1) * b * (b + 1) / (c * (c + 1)) / 2 * z * z
        assert res.value.real == pytest.approx(exact, rel=1e-14)

    def test_grid_matches_scalar(self):
        z = np.array([-0.95, -0.6, -0.3, 0.0, 0.25, 0.45])
        grid = f21_values(0.7, 1.1, 1.9, z)
        for zi, vi in zip(z, grid):
            assert vi == pytest.approx(gauss_2f1(HypParams(0.7, 1.1, 1.9), float(zi)).value.real,
                                       rel=1e-13)


@given(
    a=st.floats(-3, 3), b=st.floats(-3, 3),
    c=st.floats(0.51, 5), z=st.floats(-0.9, 0.45),
)
def test_euler_identity_property(a, b, c, z):
    p = HypParams(a, b, c)
    q, expo = apply_euler(p)
    lhs = gauss_2f1(p, z).value.real
    rhs = (1 - z) ** expo.real * gauss_2f1(q, z).value.real
    assert lhs == pytest.approx(rhs, rel=1e-11, abs=1e-11)


@given(
    a=st.floats(-3, 3), b=st.floats(-3, 3),
    c=st.floats(0.51, 5), z=st.floats(-0.9, 0.45),
)
def test_pfaff_identity_property(a, b, c, z):
    p = HypParams(a, b, c)
    q, w, expo = apply_pfaff(p, z)
    lhs = gauss_2f1(p, z).value.real
    rhs = (1 - z) ** expo.real * gauss_2f1(q, w).value.real
    assert lhs == pytest.approx(rhs, rel=1e-11, abs=1e-11)


class TestTransforms:
    def test_euler_self_dual(self):
        q, expo = apply_euler(HypParams(1.0, 1.0, 2.0))
        assert (q.a.real, q.b.real, q.c) == (1.0, 1.0, 2.0)
        assert expo == 0

    def test_euler_terminating_factor(self):
        q, expo = apply_euler(HypParams(0.5, 1.7, 1.7))
        assert (q.a.real, q.b.real, q.c) == pytest.approx((1.2, 0.0, 1.7))
        assert expo.real == pytest.approx(-0.5)
        # with b=0 the transformed series is 1, so the identity reduces to
        # the binomial closed form
        z = 0.3
        assert gauss_2f1(q, z).value.real == pytest.approx(1.0, abs=1e-14)
        assert (1 - z) ** expo.real == pytest.approx((1 - z) ** -0.5)

    def test_euler_preserves_conjugate_pairs(self):
        q, _ = apply_euler(HypParams(1 + 2j, 1 - 2j, 2.5))
        assert q.a == q.b.conjugate()

    def test_pfaff_maps_minus_one_to_half(self):
        _, w, _ = apply_pfaff(HypParams(0.7, 1.2, 2.0), -1.0)
        assert w == pytest.approx(0.5, abs=1e-15)

    def test_pfaff_fixed_point_zero(self):
        q, w, expo = apply_pfaff(HypParams(0.7, 1.2, 2.0), 0.0)
        assert w == 0.0
        assert (1 - 0.0) ** expo.real == 1.0

    def test_pfaff_identity_spot(self):
        p = HypParams(0.9, 1.4, 2.3)
        z = -0.8
        q, w, expo = apply_pfaff(p, z)
        lhs = f21_series_oracle(0.9, 1.4, 2.3, z, terms=3000).real
        rhs = (1 - z) ** expo.real * f21_series_oracle(q.a.real, q.b.real, q.c, w).real
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_pfaff_rejects_z_above_one(self):
        with pytest.raises(DomainError):
            apply_pfaff(HypParams(1, 1, 2), 1.5)

    def test_pfaff_rejects_conjugate_pairs(self):
        with pytest.raises(ParameterError):
            apply_pfaff(HypParams(1 + 1j, 1 - 1j, 2.0), -0.8)


class TestConjugateReality:
    def test_thousand_draws(self):
        rng = np.random.default_rng(7)
        worst = 0.0
        for _ in range(1000):
            pr, q = rng.uniform(-3, 3, size=2)
            c = rng.uniform(0.5, 5.0)
            z = rng.uniform(-0.9, 0.45)
            res = gauss_2f1(HypParams(complex(pr, q), complex(pr, -q), c), z)
            worst = max(worst, res.imag_leak / abs(res.value))
        assert worst <= 1e-12

    def test_direct_region_exactly_real(self):
        res = gauss_2f1(HypParams(1 + 2j, 1 - 2j, 2.5), -0.4)
        assert res.imag_leak == 0.0

    def test_grid_route_matches_oracle(self):
        # the direct series is only conditionally convergent at z = -1, so
        # the reference values come from mpmath's full evaluator
        a, c = 1.3 + 2.1j, 2.4
        z = np.array([-1.0, -0.8, -0.5, -0.2, -0.01])
        vals = f21_conj_real_values(a, c, z)
        with mp.workdps(30):
            for zi, vi in zip(z, vals):
                oracle = mp.hyp2f1(a, complex(a).conjugate(), c, float(zi))
                assert vi == pytest.approx(float(mp.re(oracle)), rel=1e-11)


class TestGaussSummation:
    def _extrapolated_limit(self, a, b, c, checkpoints=(2000, 4000, 8000, 16000)):
        n = np.arange(max(checkpoints), dtype=np.float64)
        ratios = (a + n) * (b + n) / ((c + n) * (n + 1.0))
        terms = np.concatenate([[1.0], np.cumprod(ratios)])
        partial = np.cumsum(terms)
        s = c - a - b
        rows = [[1.0] + [-(float(N)) ** (-(s + j)) for j in range(3)]
                for N in checkpoints]
        rhs = [partial[N] for N in checkpoints]
        return float(np.linalg.solve(np.array(rows), np.array(rhs))[0])

    def test_limit_matches_gamma_formula(self):
        rng = np.random.default_rng(42)
        for _ in range(25):
            c = rng.uniform(0.6, 5.0)
            s = rng.uniform(0.25, 2.5)
            if c - s - 0.05 <= -s + 0.05:
                continue
            a = rng.uniform(-s + 0.05, c - s - 0.05)
            b = c - s - a
            expected = math.exp(ln_gamma(c) + ln_gamma(c - a - b)
                                - ln_gamma(c - a) - ln_gamma(c - b))
            got = self._extrapolated_limit(a, b, c)
            assert got == pytest.approx(expected, rel=1e-8)


class TestJacobi:
    def test_degree_zero(self):
        assert jacobi_p(0, 0.7, -0.2, 3.7) == 1.0

    def test_degree_one_at_minus_one(self):
        assert jacobi_p(1, 0.4, 1.2, -1.0) == pytest.approx(-2.2, rel=1e-14)

    def test_value_at_one_is_binomial(self):
        assert jacobi_p(2, 1.0, 0.0, 1.0) == pytest.approx(3.0, rel=1e-14)

    def test_invalid_parameters(self):
        with pytest.raises(ParameterError):
            jacobi_p(2, -1.0, 0.5, 0.3)
        with pytest.raises(ParameterError):
            jacobi_p(-1, 0.5, 0.5, 0.3)

    def test_against_scipy(self):
        from scipy.special import eval_jacobi
        rng = np.random.default_rng(3)
        for _ in range(200):
            n = int(rng.integers(0, 9))
            mu = rng.uniform(-0.9, 3.0)
            nu = rng.uniform(-0.9, 3.0)
            x = rng.uniform(-2.0, 3.5)
            mine = jacobi_p(n, mu, nu, x)
            ref = eval_jacobi(n, mu, nu, x)
            assert mine == pytest.approx(ref, rel=1e-11, abs=1e-11)

    @given(n=st.integers(0, 8), mu=st.floats(-0.89, 3), nu=st.floats(-0.89, 3),
           z=st.floats(0, 1))
    def test_hypergeometric_bridge(self, n, mu, nu, z):
        # P_n(1-2z) = Gamma(n+mu+1) / (Gamma(mu+1) n!) 2F1(-n, n+mu+nu+1, mu+1; z)
        lhs = jacobi_p(n, mu, nu, 1.0 - 2.0 * z)
        coef = math.exp(ln_gamma(n + mu + 1.0) - ln_gamma(mu + 1.0)
                        - ln_gamma(n + 1.0))
        if z < 1.0:
            f = gauss_2f1(HypParams(-float(n), n + mu + nu + 1.0, mu + 1.0), z)
            rhs = coef * f.value.real
        else:
            rhs = coef * f21_series_oracle(-n, n + mu + nu + 1.0, mu + 1.0, z,
                                           terms=n + 2).real
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)
