"""Gauss hypergeometric kernel with the Euler/Pfaff transformation ladder.

Evaluation strategy: the defining power series is used directly for
|z| <= 1/2 (geometric convergence), while arguments in [-1, -1/2) are
routed through the Pfaff map z -> z/(z-1), which lands in (1/3, 1/2].
Arguments in (1/2, 1) fall back to the direct series under the
convergence guard.  Parameter pairs (a, b) are either both real or a
complex-conjugate pair; in the conjugate case the series partial sums
are real and dedicated real-valued entry points are provided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from .errors import ConvergenceError, DomainError, NumericalError, ParameterError

DEFAULT_RTOL = 1e-12
DEFAULT_MAX_TERMS = 10000

_PAIR_TOL = 1e-12

#: partial sums exceeding the result by this factor indicate cancellation
#: severe enough that float64 noise pollutes the value; such points are
#: re-summed in extended precision.
_CANCEL_RATIO = 1e-4
_MAX_DPS = 120


@dataclass(frozen=True)
class HypParams:
    """Parameter triple (a, b, c) of the Gauss series.

    a and b must be both real or complex conjugates of each other; c is
    real and must stay away from the poles at 0, -1, -2, ...
    """

    a: complex
    b: complex
    c: float

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        object.__setattr__(self, "c", float(self.c))
        c = self.c
        if c <= 0.5 and abs(c - round(c)) <= _PAIR_TOL and round(c) <= 0:
            raise ParameterError(f"c={c} is a nonpositive integer (pole of the series)")
        scale = max(abs(self.a), abs(self.b), 1.0)
        both_real = abs(self.a.imag) <= _PAIR_TOL * scale and abs(self.b.imag) <= _PAIR_TOL * scale
        conj_pair = abs(self.a - self.b.conjugate()) <= _PAIR_TOL * scale
        if not (both_real or conj_pair):
            raise ParameterError(
                f"(a, b)=({self.a}, {self.b}) is neither real nor a conjugate pair"
            )

    @property
    def is_conjugate_pair(self) -> bool:
        """True when a, b carry a genuinely nonzero imaginary part."""
        scale = max(abs(self.a), 1.0)
        return abs(self.a.imag) > _PAIR_TOL * scale


@dataclass(frozen=True)
class EvalResult:
    """One hypergeometric evaluation with its convergence record."""

    value: complex
    imag_leak: float
    terms_used: int
    converged: bool


def ln_gamma(x: float) -> float:
    """log Gamma(x) for x > 0."""
    if not x > 0:
        raise DomainError(f"ln_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def _series_term_mp(a, b, c, z, dps, max_terms):
    """One extended-precision re-summation of the raw power series."""
    with mp.workdps(dps):
        am, bm = mp.mpmathify(complex(a)), mp.mpmathify(complex(b))
        if mp.im(am) == 0 and mp.im(bm) == 0:
            am, bm = mp.re(am), mp.re(bm)
            total = mp.mpf(1)
        else:
            total = mp.mpc(1)
        cm, zm = mp.mpf(c), mp.mpf(z)
        term = mp.mpf(1)
        stop = mp.mpf(10) ** (-(dps - 3))
        scale = mp.mpf(1)
        for n in range(max_terms):
            term = term * (am + n) * (bm + n) * zm / ((cm + n) * (n + 1))
            total = total + term
            scale = max(scale, abs(total))
            if abs(term) <= stop * abs(total):
                return complex(total), float(scale)
        raise ConvergenceError(
            f"extended-precision 2F1 series did not converge within {max_terms} terms",
            terms_used=max_terms,
        )


def _resum_mp(a, b, c, z, scale, total_est, max_terms):
    """Escalating-precision re-summation for cancellation-dominated points."""
    dps = 26 + int(math.ceil(math.log10(scale / max(abs(total_est), 1e-300))))
    dps = min(max(dps, 30), _MAX_DPS)
    while True:
        value, scale_mp = _series_term_mp(a, b, c, z, dps, max_terms)
        if abs(value) >= 10.0 ** (-(dps - 16)) * scale_mp or dps >= _MAX_DPS:
            return value
        dps = min(dps + 20, _MAX_DPS)


def _series_general(a, b, c, z, rtol, max_terms):
    """Raw power series sum(n) (a)_n (b)_n / ((c)_n n!) z^n.

    z may be a scalar or ndarray with |z| < 1.  Returns (sum, terms_used,
    scale) where scale is the largest |partial sum| encountered (per
    element for arrays) -- the natural magnitude against which rounding
    noise should be judged.  Points whose result is buried under
    cancellation noise (|sum| << scale) are re-summed in extended
    precision, so the returned values are reliable even near zeros of
    the function.
    """
    z_arr = np.asarray(z, dtype=np.float64)
    is_complex = abs(complex(a).imag) > 0 or abs(complex(b).imag) > 0
    dtype = np.complex128 if is_complex else np.float64
    if not is_complex:
        a, b = complex(a).real, complex(b).real
    term = np.ones(z_arr.shape, dtype=dtype)
    total = np.ones(z_arr.shape, dtype=dtype)
    scale = np.ones(z_arr.shape, dtype=np.float64)
    small_streak = 0
    n_used = None
    for n in range(max_terms):
        term = term * ((a + n) * (b + n) / ((c + n) * (n + 1))) * z_arr
        total = total + term
        np.maximum(scale, np.abs(total), out=scale)
        if np.all(np.abs(term) <= 0.1 * rtol * np.abs(total)):
            small_streak += 1
            if small_streak >= 2:
                n_used = n + 1
                break
        else:
            small_streak = 0
    if n_used is None:
        raise ConvergenceError(
            f"2F1 series did not converge within {max_terms} terms "
            f"(|z|={np.max(np.abs(z_arr)):.4g})",
            terms_used=max_terms,
        )
    cancelled = np.abs(total) < _CANCEL_RATIO * scale
    if np.any(cancelled):
        flat_total = np.atleast_1d(total)
        flat_scale = np.atleast_1d(scale)
        flat_z = np.atleast_1d(z_arr)
        for i in np.nonzero(np.atleast_1d(cancelled))[0]:
            value = _resum_mp(a, b, c, float(flat_z[i]), float(flat_scale[i]),
                              flat_total[i], max_terms)
            flat_total[i] = value if is_complex else value.real
        total = flat_total.reshape(total.shape)[()] if np.ndim(total) else flat_total[0]
    return total[()] if np.ndim(total) else total, n_used, scale[()]


def _series_conj_real(a: complex, c: float, z, rtol, max_terms):
    """Direct series for the conjugate pair (a, conj(a)) in pure real arithmetic.

    (a+n)(conj(a)+n) = (Re a + n)^2 + (Im a)^2 is real, so every partial
    sum is exactly real for real c and z.
    """
    z_arr = np.asarray(z, dtype=np.float64)
    ar, ai2 = a.real, a.imag * a.imag
    term = np.ones(z_arr.shape, dtype=np.float64)
    total = np.ones(z_arr.shape, dtype=np.float64)
    scale = np.ones(z_arr.shape, dtype=np.float64)
    small_streak = 0
    n_used = None
    for n in range(max_terms):
        term = term * (((ar + n) ** 2 + ai2) / ((c + n) * (n + 1))) * z_arr
        total = total + term
        np.maximum(scale, np.abs(total), out=scale)
        if np.all(np.abs(term) <= 0.1 * rtol * np.abs(total)):
            small_streak += 1
            if small_streak >= 2:
                n_used = n + 1
                break
        else:
            small_streak = 0
    if n_used is None:
        raise ConvergenceError(
            f"conjugate-pair 2F1 series did not converge within {max_terms} terms",
            terms_used=max_terms,
        )
    cancelled = np.abs(total) < _CANCEL_RATIO * scale
    if np.any(cancelled):
        flat_total = np.atleast_1d(total)
        flat_scale = np.atleast_1d(scale)
        flat_z = np.atleast_1d(z_arr)
        for i in np.nonzero(np.atleast_1d(cancelled))[0]:
            value = _resum_mp(a, a.conjugate(), c, float(flat_z[i]),
                              float(flat_scale[i]), flat_total[i], max_terms)
            flat_total[i] = value.real
        total = flat_total.reshape(total.shape)[()] if np.ndim(total) else flat_total[0]
    return (total[()] if np.ndim(total) else total), n_used


def gauss_2f1(p: HypParams, z: float, *, rtol: float = DEFAULT_RTOL,
              max_terms: int = DEFAULT_MAX_TERMS) -> EvalResult:
    """Evaluate 2F1(a, b, c; z) for -1 <= z < 1.

    For z in [-1, -1/2) the Pfaff-transformed series is summed; its
    prefactor (1-z)^(-a) is complex for conjugate-pair parameters, and
    the (analytically cancelling) imaginary residue is recorded as
    imag_leak and guarded against the magnitude of the computation.
    """
    z = float(z)
    if not -1.0 <= z < 1.0:
        raise DomainError(f"gauss_2f1 argument must lie in [-1, 1), got {z}")
    a, b, c = p.a, p.b, p.c
    if z < -0.5:
        w = z / (z - 1.0)
        total, terms, scale = _series_general(a, c - b, c, w, rtol, max_terms)
        pref = np.exp(-a * math.log1p(-z))
        value = complex(pref * total)
        mag = abs(pref) * float(scale)
        leak = abs(value.imag)
        if p.is_conjugate_pair and leak > 1e-8 * mag:
            raise NumericalError(
                f"imaginary leak {leak:.3e} exceeds 1e-8 x scale {mag:.3e} "
                f"in conjugate-pair evaluation at z={z}"
            )
    else:
        if p.is_conjugate_pair:
            total, terms = _series_conj_real(a, c, z, rtol, max_terms)
            value = complex(float(total), 0.0)
        else:
            total, terms, _ = _series_general(a, b, c, z, rtol, max_terms)
            value = complex(total)
        leak = abs(value.imag)
    return EvalResult(value=value, imag_leak=leak, terms_used=terms, converged=True)


def f21_values(a, b, c, z, *, rtol: float = DEFAULT_RTOL,
               max_terms: int = DEFAULT_MAX_TERMS) -> np.ndarray:
    """Vectorized 2F1 over an array of arguments in [-1, 1) with shared (a, b, c)."""
    z = np.atleast_1d(np.asarray(z, dtype=np.float64))
    if z.size and (z.min() < -1.0 or z.max() >= 1.0):
        raise DomainError("f21_values arguments must lie in [-1, 1)")
    is_complex = abs(complex(a).imag) > 0 or abs(complex(b).imag) > 0
    out = np.empty(z.shape, dtype=np.complex128 if is_complex else np.float64)
    near = z >= -0.5
    if near.any():
        total, _, _ = _series_general(a, b, c, z[near], rtol, max_terms)
        out[near] = total
    far = ~near
    if far.any():
        zf = z[far]
        total, _, _ = _series_general(a, c - b, c, zf / (zf - 1.0), rtol, max_terms)
        if is_complex:
            pref = np.exp(-complex(a) * np.log1p(-zf))
        else:
            pref = np.exp(-complex(a).real * np.log1p(-zf))
        out[far] = pref * total
    return out


def f21_conj_real_values(a: complex, c: float, z, *, rtol: float = DEFAULT_RTOL,
                         max_terms: int = DEFAULT_MAX_TERMS) -> np.ndarray:
    """Real values of 2F1(a, conj(a), c; z) on a grid z in [-1, 0].

    The direct region is summed in real arithmetic (exactly real); the
    Pfaff region extracts the real part of the complex composition and
    guards the discarded imaginary residue against the composition
    magnitude.
    """
    a = complex(a)
    z = np.atleast_1d(np.asarray(z, dtype=np.float64))
    if z.size and (z.min() < -1.0 or z.max() > 0.0):
        raise DomainError("f21_conj_real_values arguments must lie in [-1, 0]")
    out = np.empty(z.shape, dtype=np.float64)
    near = z >= -0.5
    if near.any():
        total, _ = _series_conj_real(a, c, z[near], rtol, max_terms)
        out[near] = total
    far = ~near
    if far.any():
        zf = z[far]
        total, _, scale = _series_general(a, c - a.conjugate(), c, zf / (zf - 1.0),
                                          rtol, max_terms)
        lg = np.log1p(-zf)
        mod = np.exp(-a.real * lg)
        phi = -a.imag * lg
        re = mod * (total.real * np.cos(phi) - total.imag * np.sin(phi))
        im = mod * (total.real * np.sin(phi) + total.imag * np.cos(phi))
        mag = mod * np.asarray(scale, dtype=np.float64)
        bad = np.abs(im) > 1e-8 * mag
        if bad.any():
            i = int(np.argmax(np.abs(im) / mag))
            raise NumericalError(
                f"imaginary leak {abs(im.flat[i]):.3e} exceeds 1e-8 x scale "
                f"{mag.flat[i]:.3e} in conjugate-pair grid evaluation"
            )
        out[far] = re
    return out


def apply_euler(p: HypParams) -> tuple[HypParams, complex]:
    """Euler transform: params (c-a, c-b, c) and prefactor exponent c-a-b.

    2F1(a,b,c;z) = (1-z)^(c-a-b) 2F1(c-a, c-b, c; z).
    """
    q = HypParams(p.c - p.a, p.c - p.b, p.c)
    return q, p.c - p.a - p.b


def apply_pfaff(p: HypParams, z: float) -> tuple[HypParams, float, complex]:
    """Pfaff transform: params (a, c-b, c), argument z/(z-1), exponent -a.

    2F1(a,b,c;z) = (1-z)^(-a) 2F1(a, c-b, c; z/(z-1)).  The transformed
    parameter pair (a, c-b) leaves the conjugate-pair class, so only
    real parameter triples are accepted here; conjugate-pair inputs take
    the internal complex route (f21_conj_real_values).
    """
    z = float(z)
    if z >= 1.0:
        raise DomainError(f"apply_pfaff requires z < 1, got {z}")
    if p.is_conjugate_pair:
        raise ParameterError("apply_pfaff on a conjugate pair leaves the valid parameter class")
    q = HypParams(p.a, p.c - p.b, p.c)
    return q, z / (z - 1.0), -p.a


def jacobi_p(n: int, mu: float, nu: float, x) -> float | np.ndarray:
    """Jacobi polynomial P_n^(mu, nu)(x) by the three-term recurrence.

    Valid for any real x (including outside [-1, 1], where the
    polynomial is still a polynomial but no longer part of an orthogonal
    family).
    """
    if n < 0 or n != int(n):
        raise ParameterError(f"jacobi_p degree must be a nonnegative integer, got {n}")
    if mu <= -1 or nu <= -1:
        raise ParameterError(f"jacobi_p requires mu, nu > -1, got ({mu}, {nu})")
    n = int(n)
    x = np.asarray(x, dtype=np.float64)
    p0 = np.ones(x.shape)
    if n == 0:
        return p0[()]
    p1 = (mu - nu) / 2.0 + (mu + nu + 2.0) / 2.0 * x
    if n == 1:
        return p1[()]
    for k in range(2, n + 1):
        s = mu + nu
        a1 = 2.0 * k * (k + s) * (2.0 * k + s - 2.0)
        a2 = (2.0 * k + s - 1.0) * (mu * mu - nu * nu)
        a3 = (2.0 * k + s - 1.0) * (2.0 * k + s) * (2.0 * k + s - 2.0)
        a4 = 2.0 * (k + mu - 1.0) * (k + nu - 1.0) * (2.0 * k + s)
        p0, p1 = p1, ((a2 + a3 * x) * p1 - a4 * p0) / a1
    return p1[()]
