"""Transcendental quantization condition and its root pipeline.

The bound energies are the zeros of

    q(E) = 2F1(eps + dp + sqrt(beta1), eps - dp + sqrt(beta1) + 1,
               2 eps + 1; 1/2)

inside the bound window (barred coefficients on the pseudospin branch).
For beta1 < 0 the displayed parameters leave the real class; q is then
evaluated through the equivalent conjugate-pair form at argument -1
(same zeros, constant positive rescaling, constant phase dropped), which
keeps every series partial sum real up to rounding.

The termination spectrum reconstructs the energies at which the series
solution truncates to a Jacobi polynomial, sqrt(beta1) = eps + dp + n_r;
these are the candidates the refutation harness evaluates against the
r = 0 boundary condition.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import BracketingError, DomainError, NumericalError
from .hyp import HypParams, gauss_2f1
from .model import (EnergyWindow, PekerisCoeffs, PhysicalParams, ReducedCoeffs,
                    SymmetryKind, map_coeffs)

log = logging.getLogger(__name__)

#: relative shrink applied to the window before grid scans, keeping the
#: scan away from the eps -> 0 endpoint degeneracy.
ETA_FRAC = 1e-6

#: roots closer than this fraction of the window width to an endpoint are
#: reported as marginal and excluded from the accepted list.
MARGIN_FRAC = 1e-3

DEFAULT_TOL_Q = 1e-10
DEFAULT_BISECT_FRAC = 1e-12


@dataclass(frozen=True)
class EnergyLevel:
    """One bound state: labels, energy, and the residual of its defining root."""

    n_r: int
    kappa: int
    symmetry: SymmetryKind
    E: float
    coeffs: ReducedCoeffs
    q_residual: float
    bracket: tuple[float, float]


@dataclass(frozen=True)
class RefutationRecord:
    """One polynomial-truncation candidate with its boundary evidence.

    boundary_value is |F(0)| / max|F| of the assembled Jacobi-form
    solution; verdict is True when it violates the r = 0 boundary
    condition.  Evidence fields are None until filled by the
    wavefunction/oracle layers.
    """

    n_r: int
    E_nu: float
    boundary_value: float | None = None
    ode_ok: bool | None = None
    verdict: bool | None = None


def quantization_value_from_coeffs(rc: ReducedCoeffs, *, rtol: float = 1e-12,
                                   max_terms: int = 10000) -> float:
    """Quantization value from an explicit coefficient record (diagnostics entry).

    Returns the real value whose zeros are the bound energies.  For
    beta1 >= 0 this is exactly the hypergeometric at argument 1/2; for
    beta1 < 0 the conjugate-pair route is used and the imaginary residue
    is guarded inside the hypergeometric kernel (never silently
    truncated).
    """
    if rc.eps_sq <= 0.0:
        raise DomainError(f"not a bound-state energy: eps2 = {rc.eps_sq:.6g} <= 0")
    eps = math.sqrt(rc.eps_sq)
    dp = rc.delta_plus
    c = 2.0 * eps + 1.0
    if rc.beta1 >= 0.0:
        sb = rc.sqrt_beta1.real
        res = gauss_2f1(HypParams(eps + dp + sb, eps - dp + sb + 1.0, c), 0.5,
                        rtol=rtol, max_terms=max_terms)
        return res.value.real
    a = complex(eps + dp, rc.sqrt_beta1.imag)
    res = gauss_2f1(HypParams(a, a.conjugate(), c), -1.0,
                    rtol=rtol, max_terms=max_terms)
    return math.pow(2.0, eps + dp) * res.value.real


def quantization_value(p: PhysicalParams, E: float, s: SymmetryKind,
                       d: PekerisCoeffs, *, rtol: float = 1e-12,
                       max_terms: int = 10000, coeff_tweak=None) -> float:
    """Quantization value at energy E (must lie inside the bound window).

    coeff_tweak, when given, transforms the coefficient record before
    evaluation (fault-injection hook used by the verification command).
    """
    rc = map_coeffs(p, E, s, d)
    if coeff_tweak is not None:
        rc = coeff_tweak(rc)
    return quantization_value_from_coeffs(rc, rtol=rtol, max_terms=max_terms)


def scan_quantization(p: PhysicalParams, s: SymmetryKind, d: PekerisCoeffs,
                      window: EnergyWindow, n_grid: int,
                      eta_frac: float = ETA_FRAC, coeff_tweak=None):
    """Sample q(E) on a uniform grid over the eta-shrunken window.

    Returns (energies, values, n_failed); failed evaluations are NaN.
    """
    eta = eta_frac * window.width
    energies = np.linspace(window.lo + eta, window.hi - eta, n_grid)
    values = np.full(n_grid, np.nan)
    n_failed = 0
    for i, E in enumerate(energies):
        try:
            values[i] = quantization_value(p, float(E), s, d,
                                           coeff_tweak=coeff_tweak)
        except (DomainError, NumericalError) as exc:
            n_failed += 1
            log.warning("quantization scan failed at E=%.8g: %s", E, exc)
    return energies, values, n_failed


def bracket_roots(p: PhysicalParams, s: SymmetryKind, d: PekerisCoeffs,
                  window: EnergyWindow, n_grid: int = 400) -> list[tuple[float, float]]:
    """Isolate sign changes of the quantization value on a uniform grid."""
    if n_grid < 16:
        raise DomainError(f"n_grid must be >= 16, got {n_grid}")
    energies, values, n_failed = scan_quantization(p, s, d, window, n_grid)
    if n_failed == n_grid:
        raise NumericalError("quantization value failed at every grid point")
    brackets = []
    for i in range(n_grid - 1):
        a, b = values[i], values[i + 1]
        if np.isfinite(a) and np.isfinite(b) and a * b < 0.0:
            brackets.append((float(energies[i]), float(energies[i + 1])))
    return brackets


def refine_root(p: PhysicalParams, s: SymmetryKind, d: PekerisCoeffs,
                bracket: tuple[float, float], *, window: EnergyWindow | None = None,
                q_scale: float | None = None, tol_q: float = DEFAULT_TOL_Q,
                bisect_frac: float = DEFAULT_BISECT_FRAC,
                coeff_tweak=None) -> EnergyLevel:
    """Bisect a sign-change bracket down to bisect_frac of the window width.

    q_residual is recorded relative to q_scale (the largest |q| seen on
    the isolating scan); with the default scale, the magnitudes at the
    bracket endpoints are used.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    f_lo = quantization_value(p, lo, s, d, coeff_tweak=coeff_tweak)
    f_hi = quantization_value(p, hi, s, d, coeff_tweak=coeff_tweak)
    if window is None:
        width = hi - lo if hi > lo else abs(hi) + 1.0
    else:
        width = window.width
    if q_scale is None:
        q_scale = max(abs(f_lo), abs(f_hi))
    if f_lo == 0.0:
        a = b = lo
    elif f_hi == 0.0:
        a = b = hi
    elif f_lo * f_hi > 0.0:
        raise BracketingError(
            f"no sign change across bracket ({lo:.8g}, {hi:.8g}): "
            f"q={f_lo:.3e}, {f_hi:.3e}"
        )
    else:
        # bisect past the guaranteed width target all the way to float
        # resolution: the r=0 boundary quality of the assembled component
        # tracks |q(E*)|, and the extra halvings are cheap
        a, b, fa = lo, hi, f_lo
        while a < b:
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                break  # float resolution reached
            try:
                fm = quantization_value(p, mid, s, d, coeff_tweak=coeff_tweak)
            except (DomainError, NumericalError) as exc:
                if b - a <= bisect_frac * width:
                    break  # already inside the guaranteed width
                raise BracketingError(
                    f"evaluation failed mid-bisection at E={mid:.12g} "
                    f"(bracket ({a:.12g}, {b:.12g}))"
                ) from exc
            if fm == 0.0:
                a = b = mid
                break
            if fa * fm < 0.0:
                b = mid
            else:
                a, fa = mid, fm

    e_star = 0.5 * (a + b)
    rc = map_coeffs(p, e_star, s, d)
    if coeff_tweak is not None:
        rc = coeff_tweak(rc)
    q_val = abs(quantization_value_from_coeffs(rc))
    residual = q_val / q_scale if q_scale > 0 else q_val
    if residual > tol_q:
        raise NumericalError(
            f"refined root at E={e_star:.12g} has scaled residual "
            f"{residual:.3e} > {tol_q:.1e}"
        )
    return EnergyLevel(n_r=0, kappa=p.kappa, symmetry=s, E=e_star, coeffs=rc,
                       q_residual=residual, bracket=(lo, hi))


def enumerate_levels(p: PhysicalParams, s: SymmetryKind, d: PekerisCoeffs, *,
                     n_grid: int = 400, margin_frac: float = MARGIN_FRAC,
                     tol_q: float = DEFAULT_TOL_Q, wf_points: int = 2048,
                     coeff_tweak=None) -> list[EnergyLevel]:
    """All accepted bound levels, ascending in E, labelled by node count.

    Roots inside margin_frac of a window endpoint are reported as
    marginal and excluded (their bound-state character is not resolved
    at this scale).
    """
    from .model import bound_window
    from .wavefunction import build_table

    window = bound_window(p, s, d)
    if window is None:
        return []
    energies, values, _ = scan_quantization(p, s, d, window, n_grid,
                                            coeff_tweak=coeff_tweak)
    finite = values[np.isfinite(values)]
    q_scale = float(np.max(np.abs(finite))) if finite.size else None
    levels = []
    margin = margin_frac * window.width
    for i in range(n_grid - 1):
        a, b = values[i], values[i + 1]
        if not (np.isfinite(a) and np.isfinite(b) and a * b < 0.0):
            continue
        level = refine_root(p, s, d, (float(energies[i]), float(energies[i + 1])),
                            window=window, q_scale=q_scale, tol_q=tol_q,
                            coeff_tweak=coeff_tweak)
        if level.E - window.lo < margin or window.hi - level.E < margin:
            log.info("marginal root at E=%.10g (within %.2g of window edge), "
                     "not accepted", level.E, margin)
            continue
        levels.append(level)
    levels.sort(key=lambda lv: lv.E)
    levels = [dataclasses.replace(lv, n_r=i) for i, lv in enumerate(levels)]
    relabelled = []
    for lv in levels:
        table = build_table(p, lv, n_points=wf_points)
        relabelled.append(dataclasses.replace(lv, n_r=table.nodes))
    return relabelled


def _termination_value(p: PhysicalParams, E: float, s: SymmetryKind,
                       d: PekerisCoeffs, n_r: int) -> float:
    rc = map_coeffs(p, E, s, d)
    if rc.eps_sq <= 0.0 or rc.beta1 < 0.0:
        return math.nan
    return rc.sqrt_beta1.real - math.sqrt(rc.eps_sq) - rc.delta_plus - n_r


def termination_spectrum(p: PhysicalParams, s: SymmetryKind, d: PekerisCoeffs,
                         n_r_max: int, *, n_grid: int = 2000,
                         bisect_frac: float = DEFAULT_BISECT_FRAC) -> list[RefutationRecord]:
    """Energies at which the series solution truncates to a Jacobi polynomial.

    For each n_r in [0, n_r_max], solves sqrt(beta1) = eps + dp + n_r on
    the sub-window where beta1 >= 0 and the exponent radicand is
    nonnegative.  n_r values without a root are omitted (logged).
    Boundary evidence is filled by the wavefunction layer.
    """
    from .model import bound_window

    if n_r_max < 0:
        raise DomainError(f"n_r_max must be >= 0, got {n_r_max}")
    window = bound_window(p, s, d)
    if window is None:
        return []
    eta = ETA_FRAC * window.width
    energies = np.linspace(window.lo + eta, window.hi - eta, n_grid)
    records = []
    for n_r in range(n_r_max + 1):
        values = np.full(n_grid, np.nan)
        for i, E in enumerate(energies):
            try:
                values[i] = _termination_value(p, float(E), s, d, n_r)
            except (DomainError, NumericalError):
                pass
        found = False
        for i in range(n_grid - 1):
            a, b = values[i], values[i + 1]
            if not (np.isfinite(a) and np.isfinite(b) and a * b < 0.0):
                continue
            lo, hi, fa = float(energies[i]), float(energies[i + 1]), float(a)
            while hi - lo > bisect_frac * window.width:
                mid = 0.5 * (lo + hi)
                if mid <= lo or mid >= hi:
                    break
                fm = _termination_value(p, mid, s, d, n_r)
                if math.isnan(fm):
                    raise BracketingError(
                        f"termination condition undefined inside bracket at E={mid:.10g}"
                    )
                if fm == 0.0:
                    lo = hi = mid
                    break
                if fa * fm < 0.0:
                    hi = mid
                else:
                    lo, fa = mid, fm
            records.append(RefutationRecord(n_r=n_r, E_nu=0.5 * (lo + hi)))
            found = True
        if not found:
            log.info("no truncation root for n_r=%d inside the window", n_r)
    records.sort(key=lambda rec: (rec.n_r, rec.E_nu))
    return records
