"""Independent eigenvalue oracle: two-sided shooting with Wronskian matching.

The radial equation is integrated outward from r = 0 with (F, F') =
(0, 1) and inward from r_max with the decaying asymptote (1, -2 a eps);
the normalized Wronskian mismatch at the match point changes sign across
each eigenvalue.  The effective potential depends on E beyond the
eigenvalue term (the coupling g is energy dependent), which is why a
nonlinear shooting search is used instead of a matrix eigensolve.

A fixed-step classical 4th-order Runge-Kutta scheme is used so that grid
convergence of the eigenvalues can be checked against the expected
order.  The module also provides the finite-difference residual test of
the reduced z-equation, evaluated in extended precision so that the
pinned step 1e-5 is not drowned by rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .errors import DomainError, NumericalError
from .model import (EnergyWindow, PekerisCoeffs, PhysicalParams, ReducedCoeffs,
                    SymmetryKind, couplings, map_coeffs, pekeris_approx)
from .spectrum import MARGIN_FRAC, EnergyLevel

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a hard dep, fallback for safety
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

_RENORM_EVERY = 100
_RENORM_LIMIT = 1e50
_ORACLE_GRID = 512
_BISECT_FRAC = 1e-12


@dataclass(frozen=True)
class ShootConfig:
    """Geometry and resolution of one shooting integration.

    r_max and match_point default to automatic choices (decay-length
    based and r_e respectively).  The integrator order is fixed at 4.
    """

    r_min: float = 0.0
    r_max: float | None = None
    steps: int = 6000
    match_point: float | None = None
    exact_centrifugal: bool = False

    order: int = 4

    def __post_init__(self):
        if self.steps < 2000:
            raise DomainError(f"steps must be >= 2000, got {self.steps}")
        if self.r_max is not None and not self.r_min < self.r_max:
            raise DomainError("requires r_min < r_max")
        if self.order != 4:
            raise DomainError("integrator order is fixed at 4")


@njit(cache=True)
def _wronskian_batch(cent, sig, g, k2, eps, h, i_match, n_steps, alpha):
    """Normalized Wronskian mismatch at the match index for a batch of energies.

    cent and sig are potential profiles sampled at half-step resolution
    (length 2*n_steps + 1).
    """
    n_e = g.shape[0]
    out = np.empty(n_e)
    for e in range(n_e):
        ge = g[e]
        k2e = k2[e]
        f = 0.0
        fp = 1.0
        for i in range(i_match):
            w0 = cent[2 * i] + ge * sig[2 * i] - k2e
            w1 = cent[2 * i + 1] + ge * sig[2 * i + 1] - k2e
            w2 = cent[2 * i + 2] + ge * sig[2 * i + 2] - k2e
            k1f = fp
            k1g = w0 * f
            k2f = fp + 0.5 * h * k1g
            k2g = w1 * (f + 0.5 * h * k1f)
            k3f = fp + 0.5 * h * k2g
            k3g = w1 * (f + 0.5 * h * k2f)
            k4f = fp + h * k3g
            k4g = w2 * (f + h * k3f)
            f = f + h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f)
            fp = fp + h / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g)
            if i % _RENORM_EVERY == _RENORM_EVERY - 1:
                m = max(abs(f), abs(fp))
                if m > _RENORM_LIMIT:
                    f /= m
                    fp /= m
        f_out = f
        fp_out = fp
        m_out = max(abs(f_out), abs(fp_out))

        f = 1.0
        fp = -2.0 * alpha * eps[e]
        for i in range(n_steps, i_match, -1):
            w0 = cent[2 * i] + ge * sig[2 * i] - k2e
            w1 = cent[2 * i - 1] + ge * sig[2 * i - 1] - k2e
            w2 = cent[2 * i - 2] + ge * sig[2 * i - 2] - k2e
            k1f = fp
            k1g = w0 * f
            k2f = fp - 0.5 * h * k1g
            k2g = w1 * (f - 0.5 * h * k1f)
            k3f = fp - 0.5 * h * k2g
            k3g = w1 * (f - 0.5 * h * k2f)
            k4f = fp - h * k3g
            k4g = w2 * (f - h * k3f)
            f = f - h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f)
            fp = fp - h / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g)
            if i % _RENORM_EVERY == 0:
                m = max(abs(f), abs(fp))
                if m > _RENORM_LIMIT:
                    f /= m
                    fp /= m
        f_in = f
        fp_in = fp
        m_in = max(abs(f_in), abs(fp_in))
        out[e] = (f_out * fp_in - f_in * fp_out) / (m_out * m_in)
    return out


@njit(cache=True)
def _trajectory(cent, sig, g, k2, eps, h, i_match, n_steps, alpha):
    """Glued eigenfunction samples on the integration nodes (unnormalized)."""
    values = np.empty(n_steps + 1)
    f = 0.0
    fp = 1.0
    values[0] = f
    for i in range(i_match):
        w0 = cent[2 * i] + g * sig[2 * i] - k2
        w1 = cent[2 * i + 1] + g * sig[2 * i + 1] - k2
        w2 = cent[2 * i + 2] + g * sig[2 * i + 2] - k2
        k1f = fp
        k1g = w0 * f
        k2f = fp + 0.5 * h * k1g
        k2g = w1 * (f + 0.5 * h * k1f)
        k3f = fp + 0.5 * h * k2g
        k3g = w1 * (f + 0.5 * h * k2f)
        k4f = fp + h * k3g
        k4g = w2 * (f + h * k3f)
        f = f + h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f)
        fp = fp + h / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g)
        values[i + 1] = f
        if i % _RENORM_EVERY == _RENORM_EVERY - 1:
            m = max(abs(f), abs(fp))
            if m > _RENORM_LIMIT:
                f /= m
                fp /= m
                for j in range(i + 2):
                    values[j] /= m
    f_match_out = values[i_match]

    f = 1.0
    fp = -2.0 * alpha * eps
    values[n_steps] = f
    for i in range(n_steps, i_match, -1):
        w0 = cent[2 * i] + g * sig[2 * i] - k2
        w1 = cent[2 * i - 1] + g * sig[2 * i - 1] - k2
        w2 = cent[2 * i - 2] + g * sig[2 * i - 2] - k2
        k1f = fp
        k1g = w0 * f
        k2f = fp - 0.5 * h * k1g
        k2g = w1 * (f - 0.5 * h * k1f)
        k3f = fp - 0.5 * h * k2g
        k3g = w1 * (f - 0.5 * h * k2f)
        k4f = fp - h * k3g
        k4g = w2 * (f - h * k3f)
        f = f - h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f)
        fp = fp - h / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g)
        if i - 1 > i_match:
            values[i - 1] = f
            if i % _RENORM_EVERY == 0:
                m = max(abs(f), abs(fp))
                if m > _RENORM_LIMIT:
                    f /= m
                    fp /= m
                    for j in range(i_match + 1, n_steps + 1):
                        values[j] /= m
        elif i - 1 == i_match:
            # glue the inward branch onto the outward amplitude
            if f != 0.0:
                scale = f_match_out / f
                for j in range(i_match + 1, n_steps + 1):
                    values[j] *= scale
    return values


def _eps_of(p: PhysicalParams, E: float, s: SymmetryKind, d: PekerisCoeffs) -> float:
    rc = map_coeffs(p, E, s, d)
    if rc.eps_sq <= 0.0:
        raise DomainError(f"E={E:.8g} outside the bound window (eps2 <= 0)")
    return math.sqrt(rc.eps_sq)


def _resolve_geometry(p: PhysicalParams, cfg: ShootConfig, eps_min: float):
    r_min = cfg.r_min
    if cfg.exact_centrifugal and p.kappa * (p.kappa + 1) != 0 and r_min == 0.0:
        r_min = 1e-4 * p.r_e
    r_max = cfg.r_max
    if r_max is None:
        r_max = max(30.0 / (2.0 * p.alpha * eps_min), 10.0 * p.r_e)
    if not r_min < r_max:
        raise DomainError(f"degenerate integration range ({r_min}, {r_max})")
    match = cfg.match_point if cfg.match_point is not None else p.r_e
    h = (r_max - r_min) / cfg.steps
    i_match = int(round((match - r_min) / h))
    i_match = min(max(i_match, 1), cfg.steps - 1)
    return r_min, r_max, h, i_match


def _profiles(p: PhysicalParams, s: SymmetryKind, d: PekerisCoeffs,
              cfg: ShootConfig, r_min: float, r_max: float):
    """Centrifugal and potential profiles on the half-step lattice."""
    from .model import sigma

    r_half = np.linspace(r_min, r_max, 2 * cfg.steps + 1)
    kap_c = p.kappa * (p.kappa + 1) if s is SymmetryKind.spin \
        else p.kappa * (p.kappa - 1)
    if cfg.exact_centrifugal:
        with np.errstate(divide="ignore"):
            cent = kap_c / r_half**2
        if kap_c == 0:
            cent = np.zeros_like(r_half)
        elif not np.all(np.isfinite(cent)):
            raise DomainError("exact centrifugal term requires r_min > 0")
    else:
        cent = kap_c * pekeris_approx(r_half, d, p.alpha, p.r_e)
    sig = sigma(r_half, p)
    return cent, sig


def _wronskian_at(p, s, d, cfg, energies, r_min, r_max, h, i_match):
    cent, sig = _profiles(p, s, d, cfg, r_min, r_max)
    g = np.empty(len(energies))
    k2 = np.empty(len(energies))
    eps = np.empty(len(energies))
    for i, E in enumerate(energies):
        _, g[i], k2[i] = couplings(p, float(E), s)
        eps[i] = _eps_of(p, float(E), s, d)
    out = _wronskian_batch(cent, sig, g, k2, eps, h, i_match, cfg.steps, p.alpha)
    if not np.all(np.isfinite(out)):
        raise NumericalError("shooting integration overflowed despite rescaling")
    return out


def shoot_residual(p: PhysicalParams, E: float, s: SymmetryKind, d: PekerisCoeffs,
                   cfg: ShootConfig = ShootConfig()) -> float:
    """Normalized Wronskian mismatch of the two-sided integration at energy E."""
    eps = _eps_of(p, E, s, d)
    r_min, r_max, h, i_match = _resolve_geometry(p, cfg, eps)
    return float(_wronskian_at(p, s, d, cfg, [E], r_min, r_max, h, i_match)[0])


def oracle_eigenvalues(p: PhysicalParams, s: SymmetryKind, d: PekerisCoeffs,
                       window: EnergyWindow, cfg: ShootConfig = ShootConfig(),
                       margin_frac: float = MARGIN_FRAC) -> list[float]:
    """Eigenvalues from sign changes of the Wronskian on a 512-point scan.

    The scan covers the margin-shrunken window and every refinement uses
    one shared integration geometry, so the Wronskian stays a continuous
    function of E throughout.
    """
    margin = margin_frac * window.width
    lo, hi = window.lo + margin, window.hi - margin
    if not lo < hi:
        return []
    grid = np.linspace(lo, hi, _ORACLE_GRID)
    eps_grid = np.array([_eps_of(p, float(E), s, d) for E in grid])
    r_min, r_max, h, i_match = _resolve_geometry(p, cfg, float(eps_grid.min()))
    w = _wronskian_at(p, s, d, cfg, grid, r_min, r_max, h, i_match)

    sign_change = (w[:-1] * w[1:]) < 0.0
    los = grid[:-1][sign_change]
    his = grid[1:][sign_change]
    if los.size == 0:
        return []
    f_los = w[:-1][sign_change].copy()
    tol = _BISECT_FRAC * window.width
    while np.max(his - los) > tol:
        mids = 0.5 * (los + his)
        f_mid = _wronskian_at(p, s, d, cfg, mids, r_min, r_max, h, i_match)
        take_hi = f_los * f_mid < 0.0
        his = np.where(take_hi, mids, his)
        los = np.where(take_hi, los, mids)
        f_los = np.where(take_hi, f_los, f_mid)
        if np.any(f_mid == 0.0):
            exact = f_mid == 0.0
            los = np.where(exact, mids, los)
            his = np.where(exact, mids, his)
    return [float(E) for E in 0.5 * (los + his)]


def oracle_eigenfunction(p: PhysicalParams, E: float, s: SymmetryKind,
                         d: PekerisCoeffs, cfg: ShootConfig = ShootConfig()):
    """Normalized eigenfunction samples (r, F) at a refined eigenvalue.

    Normalization matches the closed-form convention: unit trapezoidal
    integral of F^2 and positive first lobe.
    """
    eps = _eps_of(p, E, s, d)
    r_min, r_max, h, i_match = _resolve_geometry(p, cfg, eps)
    cent, sig = _profiles(p, s, d, cfg, r_min, r_max)
    _, g, k2 = couplings(p, E, s)
    vals = _trajectory(cent, sig, g, k2, eps, h, i_match, cfg.steps, p.alpha)
    r = np.linspace(r_min, r_max, cfg.steps + 1)
    norm = np.trapz(vals * vals, r)
    if not norm > 0:
        raise NumericalError("degenerate eigenfunction (zero norm)")
    vals = vals / math.sqrt(norm)
    vmax = np.max(np.abs(vals))
    live = np.nonzero(np.abs(vals) >= 1e-9 * vmax)[0]
    if live.size and vals[live[0]] < 0.0:
        vals = -vals
    return r, vals


# ---------------------------------------------------------------------------
# finite-difference residual of the reduced z-equation (extended precision)
# ---------------------------------------------------------------------------

_FD_STEP = 1e-5
_FD_DPS = 40
_Z_BAND = (-0.95, -0.05)


def _jacobi_mp(n, mu, nu, x):
    p0 = mp.mpf(1)
    if n == 0:
        return p0
    p1 = (mu - nu) / 2 + (mu + nu + 2) / 2 * x
    for k in range(2, n + 1):
        s = mu + nu
        a1 = 2 * k * (k + s) * (2 * k + s - 2)
        a2 = (2 * k + s - 1) * (mu * mu - nu * nu)
        a3 = (2 * k + s - 1) * (2 * k + s) * (2 * k + s - 2)
        a4 = 2 * (k + mu - 1) * (k + nu - 1) * (2 * k + s)
        p0, p1 = p1, ((a2 + a3 * x) * p1 - a4 * p0) / a1
    return p1


def _closed_form_mp(rc: ReducedCoeffs):
    eps = mp.sqrt(rc.eps_sq)
    dp = mp.mpf(rc.delta_plus)
    sb = mp.sqrt(mp.mpf(rc.beta1)) if rc.beta1 >= 0 else mp.mpc(0, mp.sqrt(-rc.beta1))

    def f(z):
        return (-z) ** eps * (1 - z) ** dp * mp.hyp2f1(eps + dp + sb, eps + dp - sb,
                                                       2 * eps + 1, z)
    return f


def _nu_form_mp(rc: ReducedCoeffs, n_r: int):
    eps = mp.sqrt(rc.eps_sq)
    dp = mp.mpf(rc.delta_plus)

    def f(z):
        return (-z) ** eps * (1 - z) ** dp * _jacobi_mp(n_r, 2 * eps, 2 * dp - 1,
                                                        1 - 2 * z)
    return f


def fd_ode_residual(f, rc: ReducedCoeffs, samples: int = 50,
                    step: float = _FD_STEP) -> float:
    """Max finite-difference residual of the reduced equation, relative to max |f|.

    f is evaluated in extended precision at second-order central-difference
    stencils (pinned step 1e-5 in z) on interior points of (-1, 0).
    """
    if rc.eps_sq <= 0:
        raise DomainError("residual test needs eps2 > 0")
    with mp.workdps(_FD_DPS):
        h = mp.mpf(step)
        zs = [mp.mpf(_Z_BAND[0]) + (mp.mpf(_Z_BAND[1]) - mp.mpf(_Z_BAND[0]))
              * i / (samples - 1) for i in range(samples)]
        b1, b2, e2 = mp.mpf(rc.beta1), mp.mpf(rc.beta2), mp.mpf(rc.eps_sq)
        worst = mp.mpf(0)
        fmax = mp.mpf(0)
        for z in zs:
            fm, f0, fp = f(z - h), f(z), f(z + h)
            d1 = (fp - fm) / (2 * h)
            d2 = (fp - 2 * f0 + fm) / (h * h)
            res = z * (1 - z) * d2 + (1 - z) * d1 \
                - (b1 * z * z - b2 * z + e2) / (z * (1 - z)) * f0
            worst = max(worst, abs(res))
            fmax = max(fmax, abs(f0))
        if fmax == 0:
            raise NumericalError("residual test on an identically-zero function")
        return float(worst / fmax)


def ode_residual(p: PhysicalParams, level: EnergyLevel, s: SymmetryKind,
                 d: PekerisCoeffs, samples: int = 50) -> float:
    """Residual of the closed-form component of a level in the reduced equation."""
    return fd_ode_residual(_closed_form_mp(level.coeffs), level.coeffs, samples)


def ode_residual_from_coeffs(rc: ReducedCoeffs, samples: int = 50) -> float:
    """Residual of the closed form assembled from explicit coefficients."""
    return fd_ode_residual(_closed_form_mp(rc), rc, samples)


def nu_ode_residual(p: PhysicalParams, E: float, n_r: int, s: SymmetryKind,
                    d: PekerisCoeffs, samples: int = 50) -> float:
    """Interior residual of the polynomial-truncation form at a candidate energy."""
    rc = map_coeffs(p, E, s, d)
    return fd_ode_residual(_nu_form_mp(rc, n_r), rc, samples)
