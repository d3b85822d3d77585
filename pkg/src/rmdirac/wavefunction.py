"""Radial component evaluation, normalization, and boundary diagnostics.

Two families are evaluated on r-grids:

* the closed-form bound-state component
      exp(-2 a eps r) (1+u)^(-eps-sqrt(beta1))
          2F1(eps+dp+sb, eps-dp+sb+1, 2 eps+1; u/(1+u)),   u = exp(-2 a r),
  with the constant phase of (-u)^eps dropped (absorbed into the
  arbitrary normalization constant); for beta1 < 0 the equivalent
  conjugate-pair form exp(-2 a eps r) (1+u)^dp 2F1(a, conj a, c; -u)
  is used, which is real up to guarded rounding residue;

* the polynomial-truncation (refuted) form
      exp(-2 a eps r) (1+u)^dp P_n^(2 eps, 2 dp - 1)(1 + 2 u),
  whose Jacobi argument 1 + 2u lies in (1, 3] -- outside the
  orthogonality interval -- and which fails the r = 0 boundary
  condition.
"""

from __future__ import annotations

import dataclasses
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError
from .hyp import f21_conj_real_values, f21_values, jacobi_p
from .model import PekerisCoeffs, PhysicalParams, ReducedCoeffs, SymmetryKind, map_coeffs
from .spectrum import EnergyLevel, RefutationRecord

#: normalized |F(0)| above which a candidate is declared in violation of
#: the r = 0 boundary condition.
VIOLATION_THRESHOLD = 0.01

#: node-count noise band, relative to max |value|.
NOISE_BAND = 1e-9

_GRID_STRETCH = 2.0  # sinh clustering strength toward r = 0
_MIN_PTS_PER_DECAY = 32.0


@dataclass(frozen=True)
class WavefunctionTable:
    """Sampled radial component with normalization metadata."""

    r: np.ndarray
    values: np.ndarray
    norm: float
    nodes: int
    boundary0: float
    boundary_inf: float


def radial_grid(alpha: float, eps: float, r_e: float,
                n_points: int = 2048) -> np.ndarray:
    """Grid from 0 to max(30/(2 alpha eps), 10 r_e) refined toward the origin.

    The point count is raised automatically if needed to keep at least
    32 samples per decay length 1/(2 alpha eps) everywhere.
    """
    if eps <= 0:
        raise DomainError(f"radial_grid requires eps > 0, got {eps}")
    r_max = max(30.0 / (2.0 * alpha * eps), 10.0 * r_e)
    g = _GRID_STRETCH
    # worst (largest) spacing is at r_max: r_max * g * cosh(g) / sinh(g) / n
    stretch_end = g * math.cosh(g) / math.sinh(g)
    n_needed = int(math.ceil(_MIN_PTS_PER_DECAY * stretch_end * r_max
                             * 2.0 * alpha * eps))
    n = max(int(n_points), n_needed)
    t = np.linspace(0.0, 1.0, n)
    return r_max * np.sinh(g * t) / math.sinh(g)


def _coeff_ingredients(rc: ReducedCoeffs) -> tuple[float, float, complex]:
    if rc.eps_sq <= 0.0:
        raise DomainError(f"component undefined outside the bound window "
                          f"(eps2 = {rc.eps_sq:.6g})")
    return math.sqrt(rc.eps_sq), rc.delta_plus, rc.sqrt_beta1


def eval_component_from_coeffs(rc: ReducedCoeffs, alpha: float, r):
    """Closed-form component value(s) at radius r for explicit coefficients."""
    eps, dp, sb = _coeff_ingredients(rc)
    r = np.asarray(r, dtype=np.float64)
    if r.size and r.min() < 0:
        raise DomainError("radius must be nonnegative")
    u = np.exp(-2.0 * alpha * r)
    lead = np.exp(-2.0 * alpha * eps * r)
    c = 2.0 * eps + 1.0
    if rc.beta1 >= 0.0:
        sbr = sb.real
        w = u / (1.0 + u)
        f = f21_values(eps + dp + sbr, eps - dp + sbr + 1.0, c, w)
        vals = lead * (1.0 + u) ** (-eps - sbr) * np.real(f)
    else:
        a = complex(eps + dp, sb.imag)
        f = f21_conj_real_values(a, c, -u)
        vals = lead * (1.0 + u) ** dp * f
    return vals.reshape(np.shape(r))[()]


def eval_component(p: PhysicalParams, level: EnergyLevel, r):
    """Closed-form radial component of a bound level at radius r (real convention)."""
    return eval_component_from_coeffs(level.coeffs, p.alpha, r)


def eval_nu_component(p: PhysicalParams, E: float, n_r: int, s: SymmetryKind,
                      d: PekerisCoeffs, r):
    """Polynomial-truncation (refuted) component at a candidate energy.

    The Jacobi factor is evaluated at 1 + 2u in (1, 3], legitimately as
    a polynomial but outside the interval on which such polynomials form
    an orthogonal family.
    """
    rc = map_coeffs(p, E, s, d)
    eps, dp, sb = _coeff_ingredients(rc)
    if rc.beta1 < 0.0:
        raise NumericalError(
            f"truncation form needs beta1 >= 0, got {rc.beta1:.6g} at E={E:.8g}"
        )
    r = np.asarray(r, dtype=np.float64)
    if r.size and r.min() < 0:
        raise DomainError("radius must be nonnegative")
    u = np.exp(-2.0 * p.alpha * r)
    lead = np.exp(-2.0 * p.alpha * eps * r)
    vals = lead * (1.0 + u) ** dp * jacobi_p(n_r, 2.0 * eps, 2.0 * dp - 1.0, 1.0 + 2.0 * u)
    return np.asarray(vals).reshape(np.shape(r))[()]


def _table_from_values(r: np.ndarray, vals: np.ndarray) -> WavefunctionTable:
    vmax = float(np.max(np.abs(vals)))
    if vmax == 0.0:
        raise NumericalError("component vanished identically on the grid")
    norm = float(np.trapz(vals * vals, r))
    return WavefunctionTable(
        r=r, values=vals, norm=norm,
        nodes=_count_node_flips(vals, vmax),
        boundary0=float(abs(vals[0])) / vmax,
        boundary_inf=float(abs(vals[-1])) / vmax,
    )


def _count_node_flips(vals: np.ndarray, vmax: float) -> int:
    interior = vals[1:-1]  # endpoint samples carry boundary noise, not nodes
    live = interior[np.abs(interior) >= NOISE_BAND * vmax]
    if live.size < 2:
        return 0
    signs = np.sign(live)
    return int(np.sum(signs[1:] * signs[:-1] < 0))


def build_table(p: PhysicalParams, level: EnergyLevel,
                n_points: int = 2048) -> WavefunctionTable:
    """Normalized table of the closed-form component of one bound level."""
    eps = math.sqrt(level.coeffs.eps_sq)
    r = radial_grid(p.alpha, eps, p.r_e, n_points)
    vals = eval_component(p, level, r)
    return normalize(_table_from_values(r, vals))


def build_nu_table(p: PhysicalParams, record: RefutationRecord, s: SymmetryKind,
                   d: PekerisCoeffs, n_points: int = 2048) -> WavefunctionTable:
    """Normalized table of a polynomial-truncation candidate."""
    rc = map_coeffs(p, record.E_nu, s, d)
    eps = math.sqrt(rc.eps_sq)
    r = radial_grid(p.alpha, eps, p.r_e, n_points)
    vals = eval_nu_component(p, record.E_nu, record.n_r, s, d, r)
    return normalize(_table_from_values(r, vals))


def normalize(table: WavefunctionTable) -> WavefunctionTable:
    """Scale so the trapezoidal integral of value^2 is 1, first lobe positive."""
    if not table.norm > 0.0:
        raise NumericalError(f"cannot normalize table with norm {table.norm}")
    vals = table.values / math.sqrt(table.norm)
    vmax = float(np.max(np.abs(vals)))
    live = np.nonzero(np.abs(vals) >= NOISE_BAND * vmax)[0]
    if live.size and vals[live[0]] < 0.0:
        vals = -vals
    return _table_from_values(table.r, vals)


def count_nodes(table: WavefunctionTable) -> int:
    """Strict sign changes among samples, ignoring the sub-noise band."""
    vmax = float(np.max(np.abs(table.values)))
    if vmax == 0.0:
        return 0
    return _count_node_flips(table.values, vmax)


def assess_boundary(p: PhysicalParams, record: RefutationRecord, s: SymmetryKind,
                    d: PekerisCoeffs, n_points: int = 2048) -> RefutationRecord:
    """Fill boundary evidence of a truncation candidate (verdict by threshold)."""
    table = build_nu_table(p, record, s, d, n_points)
    return dataclasses.replace(
        record,
        boundary_value=table.boundary0,
        verdict=table.boundary0 > VIOLATION_THRESHOLD,
    )


def table_to_csv(table: WavefunctionTable, meta: dict | None = None) -> str:
    """Two-column CSV (r, value) with '#'-comment metadata header."""
    buf = io.StringIO()
    buf.write("# schema_version=1\n")
    for key, val in (meta or {}).items():
        buf.write(f"# {key}={val}\n")
    buf.write(f"# norm={table.norm!r}\n")
    buf.write(f"# nodes={table.nodes}\n")
    buf.write(f"# boundary0={table.boundary0!r}\n")
    buf.write(f"# boundary_inf={table.boundary_inf!r}\n")
    buf.write("r,value\n")
    for r, v in zip(table.r, table.values):
        buf.write(f"{r!r},{v!r}\n")
    return buf.getvalue()
