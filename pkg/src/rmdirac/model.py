"""Physical parameters, the Rosen-Morse well, and its dimensionless reduction.

The radial problem is

    -F'' + [kap_c / r^2 + g * Sigma(r)] F = k2 * F,   F(0) = F(inf) = 0,

where kap_c = kappa(kappa+1) (spin branch) or kappa(kappa-1) (pseudospin
branch), and g, k2 are the energy-dependent coupling and separation
constant.  Replacing 1/r^2 by the three-term exponential approximant
anchored at r_e and substituting z = -exp(-2 alpha r) turns this into

    z(1-z) F'' + (1-z) F' - (beta1 z^2 - beta2 z + eps2) / (z(1-z)) F = 0

on z in (-1, 0) with F(-1) = F(0) = 0.  This module owns the mapping of
(params, E) to (eps2, beta1, beta2) and the bound window where eps2 > 0.
"""

from __future__ import annotations

import cmath
import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError, ParameterError

log = logging.getLogger(__name__)

#: hbar*c in MeV fm, for runs in physical units (the default configs are
#: dimensionless with hbar_c = 1).
HBAR_C_MEV_FM = 197.3269804

class SymmetryKind(enum.Enum):
    """Which second-order component equation is being solved."""

    spin = "spin"
    pseudospin = "pseudospin"


@dataclass(frozen=True)
class PhysicalParams:
    """Full input record: masses, couplings, and potential shape.

    All energies share one unit (M plays the role of M c^2); alpha is an
    inverse length, r_e a length, and hbar_c carries energy*length.
    """

    M: float
    hbar_c: float
    alpha: float
    V1: float
    V2: float
    r_e: float
    kappa: int
    C_s: float = 0.0
    C_ps: float = 0.0

    def __post_init__(self):
        if self.M <= 0:
            raise ParameterError(f"M must be positive, got {self.M}")
        if self.hbar_c <= 0:
            raise ParameterError(f"hbar_c must be positive, got {self.hbar_c}")
        if self.alpha <= 0:
            raise ParameterError(f"alpha must be positive, got {self.alpha}")
        if self.r_e <= 0:
            raise ParameterError(f"r_e must be positive, got {self.r_e}")
        if int(self.kappa) != self.kappa or self.kappa == 0:
            raise ParameterError(f"kappa must be a nonzero integer, got {self.kappa}")


@dataclass(frozen=True)
class PekerisCoeffs:
    """Coefficients of the centrifugal approximant
    (1/r_e^2) [D0 - D1 u/(1+u) + D2 (u/(1+u))^2], u = exp(-2 alpha r)."""

    D0: float
    D1: float
    D2: float


@dataclass(frozen=True)
class ReducedCoeffs:
    """Dimensionless coefficient triple of the reduced equation at one (E, kappa).

    sqrt_beta1 is the principal square root of beta1 (purely imaginary
    when beta1 < 0); delta_plus is the upper exponent
    1/2 + sqrt(1/4 + beta1 - beta2 + eps2).
    """

    eps_sq: float
    beta1: float
    beta2: float
    delta_plus: float
    sqrt_beta1: complex


@dataclass(frozen=True)
class EnergyWindow:
    """Open energy interval on which eps2(E) > 0 (bound-state search domain)."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ParameterError(f"window requires lo < hi, got ({self.lo}, {self.hi})")

    @property
    def width(self) -> float:
        return self.hi - self.lo


def sigma(r, p: PhysicalParams):
    """Rosen-Morse potential: well of depth scale V1 plus asymmetric bias V2.

    Sigma(0) = -V1 and Sigma(r) -> V2 as r -> inf.  The pseudospin-branch
    potential Delta(r) is the same function.
    """
    u = np.exp(-2.0 * p.alpha * np.asarray(r, dtype=np.float64))
    return (-4.0 * p.V1 * u / (1.0 + u) ** 2 + p.V2 * (1.0 - u) / (1.0 + u))[()]


def z_of_r(r, alpha: float):
    """Change of variables z = -exp(-2 alpha r); maps [0, inf) onto [-1, 0)."""
    return (-np.exp(-2.0 * alpha * np.asarray(r, dtype=np.float64)))[()]


def pekeris_coeffs(alpha: float, r_e: float) -> PekerisCoeffs:
    """Match the exponential approximant to 1/r^2 at r_e up to second derivative.

    Solves the 3x3 linear system for (D0, D1, D2); the system is
    rejected if its condition number indicates a degenerate alpha*r_e.
    """
    if alpha <= 0 or r_e <= 0:
        raise ParameterError("pekeris_coeffs requires alpha > 0 and r_e > 0")
    u = math.exp(-2.0 * alpha * r_e)  # underflows harmlessly for huge alpha*r_e
    s0 = u / (1.0 + u)
    s1 = -2.0 * alpha * s0 * (1.0 - s0)
    s2 = 4.0 * alpha**2 * s0 * (1.0 - s0) * (1.0 - 2.0 * s0)
    A = np.array([
        [1.0, -s0, s0 * s0],
        [0.0, -s1, 2.0 * s0 * s1],
        [0.0, -s2, 2.0 * s1 * s1 + 2.0 * s0 * s2],
    ])
    rhs = np.array([1.0, -2.0 / r_e, 6.0 / r_e**2])
    cond = np.linalg.cond(A)
    log.debug("pekeris matching matrix condition number: %.3e", cond)
    try:
        D = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"pekeris matching system singular (cond={cond:.3e}) "
            f"for alpha*r_e={alpha * r_e:.4g}"
        ) from exc
    # enforce the defining conditions directly; the condition number alone
    # overstates the error of the pivoted solve on this nearly-triangular system
    residual = np.abs(A @ D - rhs)
    if np.any(residual > 1e-10 * np.abs(rhs)):
        raise NumericalError(
            f"pekeris matching failed (residuals {residual}, cond={cond:.3e}) "
            f"for alpha*r_e={alpha * r_e:.4g}"
        )
    return PekerisCoeffs(D0=float(D[0]), D1=float(D[1]), D2=float(D[2]))


def pekeris_approx(r, d: PekerisCoeffs, alpha: float, r_e: float):
    """Evaluate the centrifugal approximant at r."""
    u = np.exp(-2.0 * alpha * np.asarray(r, dtype=np.float64))
    s = u / (1.0 + u)
    return ((d.D0 - d.D1 * s + d.D2 * s * s) / r_e**2)[()]


def couplings(p: PhysicalParams, E: float, s: SymmetryKind) -> tuple[float, float, float]:
    """Energy-dependent ingredients (kap_c, g, k2) of the radial equation.

    kap_c is the centrifugal integer factor, g multiplies Sigma(r), and
    k2 is the separation constant; g and k2 carry 1/length^2.
    """
    h2 = p.hbar_c**2
    if s is SymmetryKind.spin:
        kap_c = p.kappa * (p.kappa + 1)
        g = (p.M + E - p.C_s) / h2
        k2 = (E * E - p.M * p.M + p.C_s * (p.M - E)) / h2
    else:
        kap_c = p.kappa * (p.kappa - 1)
        g = -(p.M - E + p.C_ps) / h2
        k2 = (E * E - p.M * p.M - p.C_ps * (p.M + E)) / h2
    return kap_c, g, k2


def _eps_sq(p: PhysicalParams, E: float, s: SymmetryKind, d: PekerisCoeffs) -> float:
    kap_c, g, k2 = couplings(p, E, s)
    A = kap_c / p.r_e**2
    return (A * d.D0 + g * p.V2 - k2) / (4.0 * p.alpha**2)


def map_coeffs(p: PhysicalParams, E: float, s: SymmetryKind,
               d: PekerisCoeffs) -> ReducedCoeffs:
    """Reduce the radial equation at energy E to (eps2, beta1, beta2, delta_plus).

    The coefficients are read off the numerator quadratic
    beta1 z^2 - beta2 z + eps2 after the z-substitution; eps_sq <= 0 is
    a valid not-a-bound-state result, while a negative radicand under
    delta_plus is a hard error (complex exponent).
    """
    kap_c, g, k2 = couplings(p, E, s)
    A = kap_c / p.r_e**2
    four_a2 = 4.0 * p.alpha**2
    eps_sq = (A * d.D0 + g * p.V2 - k2) / four_a2
    beta1 = (A * (d.D0 - d.D1 + d.D2) - g * p.V2 - k2) / four_a2
    beta2 = (A * (2.0 * d.D0 - d.D1) - 4.0 * g * p.V1 - 2.0 * k2) / four_a2
    radicand = 0.25 + beta1 - beta2 + eps_sq
    if radicand < 0.0:
        raise NumericalError(
            f"exponent radicand 1/4 + beta1 - beta2 + eps2 = {radicand:.6g} < 0 "
            f"at E={E:.6g} (complex exponent)"
        )
    delta_plus = 0.5 + math.sqrt(radicand)
    sqrt_beta1 = cmath.sqrt(beta1)
    return ReducedCoeffs(eps_sq=eps_sq, beta1=beta1, beta2=beta2,
                         delta_plus=delta_plus, sqrt_beta1=sqrt_beta1)


def bound_window(p: PhysicalParams, s: SymmetryKind, d: PekerisCoeffs,
                 rail_lo: float | None = None) -> EnergyWindow | None:
    """Open interval where eps2(E) > 0, intersected with the lower guard rail.

    eps2 is a quadratic in E with negative leading coefficient; the
    window is the interval between its real roots.  rail_lo defaults to
    -M (the lower continuum edge).  Returns None when no window exists.
    """
    if rail_lo is None:
        rail_lo = -p.M
    # exact quadratic through three evaluations of eps2(E)
    e0 = _eps_sq(p, 0.0, s, d)
    ep = _eps_sq(p, 1.0, s, d)
    em = _eps_sq(p, -1.0, s, d)
    a2 = 0.5 * (ep + em) - e0
    a1 = 0.5 * (ep - em)
    a0 = e0
    if a2 >= 0.0:
        raise NumericalError(f"eps2(E) has nonnegative leading coefficient {a2:.6g}")
    disc = a1 * a1 - 4.0 * a2 * a0
    if disc <= 0.0:
        return None
    sq = math.sqrt(disc)
    r_lo = (-a1 + sq) / (2.0 * a2)
    r_hi = (-a1 - sq) / (2.0 * a2)
    lo = max(r_lo, rail_lo)
    if lo >= r_hi:
        return None
    return EnergyWindow(lo=lo, hi=r_hi)
