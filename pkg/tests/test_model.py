import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rmdirac import (NumericalError, ParameterError, PhysicalParams, SymmetryKind,
                     bound_window, couplings, map_coeffs, pekeris_approx,
                     pekeris_coeffs, sigma, z_of_r)
from rmdirac.model import _eps_sq

SPIN = SymmetryKind.spin
PSEUDO = SymmetryKind.pseudospin


def make_params(**kw):
    base = dict(M=5.0, hbar_c=1.0, alpha=0.25, V1=3.0, V2=0.5, r_e=2.5,
                kappa=1, C_s=0.0, C_ps=0.0)
    base.update(kw)
    return PhysicalParams(**base)


class TestParamsValidation:
    def test_kappa_zero_rejected(self):
        with pytest.raises(ParameterError):
            make_params(kappa=0)

    def test_negative_scales_rejected(self):
        for field in ("M", "hbar_c", "alpha", "r_e"):
            with pytest.raises(ParameterError):
                make_params(**{field: -1.0})

    def test_both_kappa_signs_accepted(self):
        assert make_params(kappa=-2).kappa == -2
        assert make_params(kappa=3).kappa == 3


class TestSigma:
    def test_at_origin(self):
        p = make_params()
        assert sigma(0.0, p) == pytest.approx(-p.V1, rel=1e-14)

    def test_asymptote(self):
        p = make_params()
        r = 50.0 / p.alpha
        assert abs(sigma(r, p) - p.V2) <= 1e-12 * abs(p.V2) + 1e-12 * abs(p.V1)

    def test_half_exponential_point(self):
        p = make_params()
        r = math.log(2.0) / (2.0 * p.alpha)
        assert sigma(r, p) == pytest.approx(-8.0 / 9.0 * p.V1 + p.V2 / 3.0, rel=1e-14)

    def test_vectorized(self):
        p = make_params()
        r = np.linspace(0, 10, 5)
        assert sigma(r, p).shape == (5,)


class TestZofR:
    def test_at_origin(self):
        assert z_of_r(0.0, 0.25) == -1.0

    def test_limit(self):
        z = z_of_r(50.0 / 0.25, 0.25)
        assert -1e-40 < z < 0.0

    def test_half_point(self):
        assert z_of_r(math.log(2.0) / 0.5, 0.25) == pytest.approx(-0.5, rel=1e-15)


class TestPekeris:
    def test_frozen_fixture(self):
        # independently solved 3x3 system in extended precision
        d = pekeris_coeffs(0.5, 2.0)
        assert d.D0 == pytest.approx(0.34056219022922407, rel=1e-12)
        assert d.D1 == pytest.approx(-1.5397301776787325, rel=1e-12)
        assert d.D2 == pytest.approx(33.491885387704729, rel=1e-12)

    @given(alpha=st.floats(0.1, 2.0), r_e=st.floats(0.5, 8.0))
    def test_matching_conditions(self, alpha, r_e):
        d = pekeris_coeffs(alpha, r_e)
        with mp.workdps(30):
            al, re = mp.mpf(alpha), mp.mpf(r_e)

            def g(r):
                s = 1 / (1 + mp.e ** (2 * al * r))
                return (d.D0 - d.D1 * s + d.D2 * s * s) / re**2

            assert abs(g(re) - 1 / re**2) <= 1e-10 / r_e**2
            assert abs(mp.diff(g, re) + 2 / re**3) <= 1e-10 * 2 / r_e**3
            assert abs(mp.diff(g, re, 2) - 6 / re**4) <= 1e-10 * 6 / r_e**4

    def test_local_quality_at_unit_alpha_re(self):
        alpha, r_e = 0.5, 2.0
        d = pekeris_coeffs(alpha, r_e)
        r = np.linspace(0.8 * r_e, 1.2 * r_e, 201)
        rel = np.abs(pekeris_approx(r, d, alpha, r_e) - 1.0 / r**2) * r**2
        assert rel.max() <= 0.05

    def test_cubic_taylor_order(self):
        # |g(r) - 1/r^2| ~ C |r-r_e|^3: fitted log-log slope >= 2.9
        alpha, r_e = 0.25, 2.5
        d = pekeris_coeffs(alpha, r_e)
        offsets = np.geomspace(1e-4, 1e-2, 9) * r_e
        errs = [abs(pekeris_approx(r_e + dr, d, alpha, r_e) - 1.0 / (r_e + dr) ** 2)
                for dr in offsets]
        slope = np.polyfit(np.log(offsets), np.log(errs), 1)[0]
        assert slope >= 2.9

    def test_degenerate_geometry_rejected(self):
        # far enough out that the logistic weights underflow entirely
        with pytest.raises(NumericalError):
            pekeris_coeffs(40.0, 10.0)

    def test_invalid_arguments(self):
        with pytest.raises(ParameterError):
            pekeris_coeffs(-0.5, 2.0)


class TestMapCoeffs:
    def test_free_particle_reduction(self):
        # kappa=-1 kills the centrifugal factor; with V1=V2=0 the
        # coefficients collapse to multiples of -k2/(4 alpha^2)
        p = make_params(kappa=-1, V1=0.0, V2=0.0, C_s=0.7)
        d = pekeris_coeffs(p.alpha, p.r_e)
        E = 2.3
        rc = map_coeffs(p, E, SPIN, d)
        k2 = (E**2 - p.M**2 + p.C_s * (p.M - E)) / p.hbar_c**2
        expected = -k2 / (4.0 * p.alpha**2)
        assert rc.eps_sq == pytest.approx(expected, rel=1e-13)
        assert rc.beta1 == pytest.approx(expected, rel=1e-13)
        assert rc.beta2 == pytest.approx(2.0 * expected, rel=1e-13)
        assert rc.delta_plus == pytest.approx(1.0, rel=1e-13)

    def test_coefficient_identity_100_draws(self):
        # beta1 - beta2 + eps2 = [kap_c D2/r_e^2 + 4 g V1] / (4 alpha^2)
        rng = np.random.default_rng(11)
        for _ in range(100):
            kappa = int(rng.integers(-3, 4)) or 1
            p = make_params(kappa=kappa, V1=float(rng.uniform(-3, 3)),
                            V2=float(rng.uniform(-2, 2)),
                            C_s=float(rng.uniform(-1, 1)),
                            alpha=float(rng.uniform(0.1, 0.6)))
            d = pekeris_coeffs(p.alpha, p.r_e)
            E = float(rng.uniform(-4, 4))
            kap_c, g, _ = couplings(p, E, SPIN)
            try:
                rc = map_coeffs(p, E, SPIN, d)
            except NumericalError:
                continue  # complex exponent: identity untestable via delta_plus path
            lhs = rc.beta1 - rc.beta2 + rc.eps_sq
            rhs = (kap_c * d.D2 / p.r_e**2 + 4.0 * g * p.V1) / (4.0 * p.alpha**2)
            assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)

    def test_duality_componentwise(self):
        # spin(kappa, E, C_s, V1, V2) == pseudospin(kappa+1, -E, -C_s, -V1, -V2)
        rng = np.random.default_rng(13)
        for _ in range(100):
            kappa = int(rng.integers(-3, 4)) or 1
            if kappa + 1 == 0:
                continue
            v1, v2, cs = rng.uniform(-3, 3), rng.uniform(-2, 2), rng.uniform(-1, 1)
            E = float(rng.uniform(-4, 4))
            p_spin = make_params(kappa=kappa, V1=float(v1), V2=float(v2),
                                 C_s=float(cs))
            p_pseudo = make_params(kappa=kappa + 1, V1=float(-v1),
                                   V2=float(-v2), C_ps=float(-cs))
            d = pekeris_coeffs(p_spin.alpha, p_spin.r_e)
            e_spin = _eps_sq(p_spin, E, SPIN, d)
            e_pseudo = _eps_sq(p_pseudo, -E, PSEUDO, d)
            assert e_spin == pytest.approx(e_pseudo, rel=1e-12, abs=1e-15)
            try:
                rc_s = map_coeffs(p_spin, E, SPIN, d)
                rc_p = map_coeffs(p_pseudo, -E, PSEUDO, d)
            except NumericalError:
                continue
            assert rc_s.beta1 == pytest.approx(rc_p.beta1, rel=1e-12, abs=1e-15)
            assert rc_s.beta2 == pytest.approx(rc_p.beta2, rel=1e-12, abs=1e-15)
            assert rc_s.delta_plus == pytest.approx(rc_p.delta_plus, rel=1e-12)

    def test_pseudospin_uses_kappa_minus_one(self):
        p = make_params(kappa=2)
        kap_c, _, _ = couplings(p, 1.0, PSEUDO)
        assert kap_c == 2 * 1

    def test_complex_exponent_flagged(self):
        # strongly negative coupling product drives the radicand negative
        p = make_params(kappa=1, V1=-40.0, V2=0.0)
        d = pekeris_coeffs(p.alpha, p.r_e)
        with pytest.raises(NumericalError):
            map_coeffs(p, 2.0, SPIN, d)

    def test_sqrt_beta1_branch(self):
        p = make_params(kappa=-1, V1=3.0, V2=2.0)
        d = pekeris_coeffs(p.alpha, p.r_e)
        rc = map_coeffs(p, 5.0, SPIN, d)
        assert rc.beta1 < 0
        assert rc.sqrt_beta1.real == 0.0
        assert rc.sqrt_beta1.imag == pytest.approx(math.sqrt(-rc.beta1), rel=1e-14)


class TestBoundWindow:
    def test_endpoints_are_roots(self, canonical, canonical_pekeris):
        w = bound_window(canonical, SPIN, canonical_pekeris)
        hi_eps = _eps_sq(canonical, w.hi, SPIN, canonical_pekeris)
        assert abs(hi_eps) <= 1e-10
        # lower endpoint here is the guard rail, not a root
        assert w.lo == -canonical.M

    def test_midpoint_positive_and_just_outside_negative(self, canonical,
                                                         canonical_pekeris):
        w = bound_window(canonical, SPIN, canonical_pekeris)
        mid = 0.5 * (w.lo + w.hi)
        assert _eps_sq(canonical, mid, SPIN, canonical_pekeris) > 0
        outside = w.hi + 1e-6 * w.width
        assert _eps_sq(canonical, outside, SPIN, canonical_pekeris) < 0

    def test_twenty_interior_points_positive(self, canonical, canonical_pekeris):
        w = bound_window(canonical, SPIN, canonical_pekeris)
        for E in np.linspace(w.lo + 1e-9, w.hi - 1e-9, 20):
            assert _eps_sq(canonical, float(E), SPIN, canonical_pekeris) > 0

    def test_free_particle_window(self):
        p = make_params(kappa=-1, V1=0.0, V2=0.0, C_s=0.0)
        d = pekeris_coeffs(p.alpha, p.r_e)
        w = bound_window(p, SPIN, d)
        assert w.lo == pytest.approx(-p.M, rel=1e-12)
        assert w.hi == pytest.approx(p.M, rel=1e-12)

    def test_empty_window(self):
        # enormous bias pushes eps2 below zero everywhere above the rail
        # (kappa=-1 so no centrifugal sliver survives near E = -M)
        p = make_params(V2=-1e4, kappa=-1)
        d = pekeris_coeffs(p.alpha, p.r_e)
        assert bound_window(p, SPIN, d) is None
