"""Special functions and quadrature shared by all numeric modules.

Bessel functions of fractional order and their zeros, the one-dimensional
theta-type sum used for exact rectangle heat traces, and adaptive
integration helpers.  All functions here are pure.
"""

from __future__ import annotations

import math
from typing import Callable, Tuple

import numpy as np
from scipy import integrate as _sci_integrate
from scipy import special as _sci_special

from .errors import NumericalError, SpecError

# Euler-Mascheroni constant to 30 significant digits.
EULER_GAMMA = 0.577215664901532860606512090082

# Switch point for the theta sum: both branches converge in <= 12 terms here.
THETA_T_SWITCH = 0.15


# ---------------------------------------------------------------------------
# Bessel functions
# ---------------------------------------------------------------------------

def bessel_j(nu: float, x) -> float | np.ndarray:
    """Bessel function J_nu(x) for real order nu >= 0 and x >= 0.

    Accurate to ~1e-13 relative over x in (0, 1e4].  Overflow or total
    accuracy loss raises instead of returning garbage.
    """
    if nu < 0:
        raise SpecError(f"bessel_j requires nu >= 0, got {nu}")
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0):
        raise SpecError("bessel_j requires x >= 0")
    out = _sci_special.jv(nu, x_arr)
    if np.any(~np.isfinite(out)):
        raise NumericalError("bessel_j", f"non-finite result for nu={nu}")
    return out if np.ndim(x) else float(out)


def _bessel_j_prime(nu: float, x: np.ndarray) -> np.ndarray:
    if nu == 0:
        return -_sci_special.jv(1, x)
    return 0.5 * (_sci_special.jv(nu - 1.0, x) - _sci_special.jv(nu + 1.0, x))


# Consecutive positive zeros of J_nu are separated by at least ~3.1 for any
# nu >= 0 (spacing tends to pi from below for nu < 1/2, from above otherwise),
# so a scan step of 1.5 cannot skip a sign change.
_SCAN_STEP = 1.5


def _refine_zeros(nu: float, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Bisection then safeguarded Newton on brackets [lo, hi] of J_nu."""
    flo = _sci_special.jv(nu, lo)
    for _ in range(8):
        mid = 0.5 * (lo + hi)
        fmid = _sci_special.jv(nu, mid)
        take_lo = (flo * fmid) > 0
        lo = np.where(take_lo, mid, lo)
        flo = np.where(take_lo, fmid, flo)
        hi = np.where(take_lo, hi, mid)
    x = 0.5 * (lo + hi)
    for _ in range(6):
        f = _sci_special.jv(nu, x)
        fp = _bessel_j_prime(nu, x)
        step = f / fp
        x_new = x - step
        # fall back to the bracket midpoint if Newton escapes
        bad = (x_new <= lo) | (x_new >= hi)
        x = np.where(bad, 0.5 * (lo + hi), x_new)
        if np.max(np.abs(step)) < 1e-14 * np.max(x):
            break
    return x


def bessel_zeros_upto(nu: float, x_max: float) -> np.ndarray:
    """All positive zeros of J_nu in (0, x_max], ascending, ~1e-12 relative."""
    if nu < 0:
        raise SpecError("bessel_zeros_upto requires nu >= 0")
    start = max(nu, 1e-8)
    if start >= x_max:
        return np.empty(0)
    grid = np.arange(start, x_max + _SCAN_STEP, _SCAN_STEP)
    vals = _sci_special.jv(nu, grid)
    sign = np.signbit(vals)
    idx = np.nonzero(sign[1:] != sign[:-1])[0]
    if idx.size == 0:
        return np.empty(0)
    zeros = _refine_zeros(nu, grid[idx], grid[idx + 1])
    return zeros[zeros <= x_max]


def bessel_zero(nu: float, k: int) -> float:
    """k-th positive zero of J_nu, k >= 1, to ~1e-12 relative."""
    if k < 1:
        raise SpecError("bessel_zero requires k >= 1")
    if nu < 0:
        raise SpecError("bessel_zero requires nu >= 0")
    # McMahon-style upper estimate for where the k-th zero lives, padded.
    beta = (k + 0.5 * nu - 0.25) * math.pi
    x_max = max(beta + nu + 10.0, nu + 1.9 * max(nu, 1.0) ** (1 / 3) + 5.0)
    zeros = bessel_zeros_upto(nu, x_max)
    while zeros.size < k:
        x_max *= 1.5
        zeros = bessel_zeros_upto(nu, x_max)
        if x_max > 1e8:
            raise NumericalError(
                "bessel_zero",
                f"bracketing failure for nu={nu}, k={k}; searched up to x={x_max:.3g}",
            )
    return float(zeros[k - 1])


# ---------------------------------------------------------------------------
# Theta-type sum for rectangle spectra
# ---------------------------------------------------------------------------

def rect_theta_factor(t: float) -> float:
    """S(t) = sum_{m>=1} exp(-pi^2 m^2 t), absolute error < 1e-14.

    For t < THETA_T_SWITCH the modular transform
    S(t) = -1/2 + 1/(2 sqrt(pi t)) + (1/sqrt(pi t)) sum_{m>=1} exp(-m^2/t)
    is used; both branches need at most ~12 terms at the switch point.
    """
    if t <= 0:
        raise SpecError(f"rect_theta_factor requires t > 0, got {t}")
    if t >= THETA_T_SWITCH:
        total = 0.0
        m = 1
        while True:
            term = math.exp(-math.pi**2 * m * m * t)
            total += term
            if term < 1e-18:
                return total
            m += 1
    sqrt_pi_t = math.sqrt(math.pi * t)
    tail = 0.0
    m = 1
    while True:
        term = math.exp(-m * m / t)
        tail += term
        if term < 1e-18 * sqrt_pi_t or term == 0.0:
            break
        m += 1
    return -0.5 + (0.5 + tail) / sqrt_pi_t


# ---------------------------------------------------------------------------
# Adaptive integration
# ---------------------------------------------------------------------------

def integrate_adaptive(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-12,
    points=None,
) -> Tuple[float, float]:
    """Integrate f over [a, b] (b may be inf) to absolute tolerance tol.

    Returns (value, error_estimate).  Raises NumericalError carrying the
    best estimate if the requested tolerance is not met.
    """
    kwargs = dict(epsabs=tol, epsrel=min(tol, 1e-10), limit=400, full_output=1)
    if points is not None and np.isfinite(b):
        kwargs["points"] = points
    res = _sci_integrate.quad(f, a, b, **kwargs)
    value, err = res[0], res[1]
    if len(res) >= 4 or err > max(tol, 10 * abs(value) * 1e-15):
        # quad reports convergence trouble via a 4th message element
        if len(res) >= 4 and err <= tol:
            pass  # roundoff warning but tolerance met
        else:
            raise NumericalError(
                "integrate_adaptive",
                f"achieved error {err:.3g} exceeds tolerance {tol:.3g}",
                best_estimate=value,
            )
    return value, err


def tanh_sinh(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = 1e-13,
    max_level: int = 12,
) -> Tuple[float, float]:
    """Tanh-sinh (double exponential) quadrature on a finite interval.

    f must accept numpy arrays.  Returns (value, error_estimate).
    Suited to integrands that are smooth inside (a, b) but may have
    integrable endpoint singularities.
    """
    if not (np.isfinite(a) and np.isfinite(b)) or b <= a:
        raise SpecError("tanh_sinh requires a finite interval a < b")
    half = 0.5 * (b - a)

    def eval_level(h: float, only_odd: bool) -> float:
        # nodes t = k h; at refinement only odd k are new
        t_max = np.arcsinh(2.0 / math.pi * 0.5 * math.log(4.0 * half / 1e-305))
        k_max = int(np.ceil(t_max / h)) + 1
        k = np.arange(-k_max, k_max + 1)
        if only_odd:
            k = k[k % 2 != 0]
        t = k * h
        u = 0.5 * math.pi * np.sinh(t)
        # distance of the node from the nearer endpoint, computed without
        # cancellation: half*(1 - |tanh u|) = half * 2 / (exp(2|u|) + 1)
        with np.errstate(over="ignore"):
            d = 2.0 * half / (np.exp(2.0 * np.abs(u)) + 1.0)
            x = np.where(t >= 0, b - d, a + d)
            w = 0.5 * math.pi * np.cosh(t) / np.cosh(u) ** 2
        w = np.where(np.isfinite(w), w, 0.0)
        keep = (x > a) & (x < b) & (w > 0)
        x, w = x[keep], w[keep]
        vals = np.asarray(f(x), dtype=float)
        vals = np.where(np.isfinite(vals), vals, 0.0)
        return float(np.sum(vals * w))

    h = 1.0
    total = eval_level(h, only_odd=False)
    prev = total * h * half
    for level in range(1, max_level + 1):
        h *= 0.5
        total += eval_level(h, only_odd=True)
        value = total * h * half
        err = abs(value - prev)
        if err < tol * max(1.0, abs(value)) and level >= 3:
            return value, err
        prev = value
    raise NumericalError(
        "tanh_sinh",
        f"no convergence after level {max_level}, last change {err:.3g}",
        best_estimate=prev,
    )


_GAUSS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Cached Gauss-Legendre nodes/weights on [-1, 1]."""
    if order not in _GAUSS_CACHE:
        _GAUSS_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GAUSS_CACHE[order]


def gauss_panels(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = 1e-10,
    order: int = 20,
    max_panels: int = 4096,
) -> Tuple[float, float]:
    """Composite Gauss-Legendre with panel doubling until the change < tol.

    f must accept numpy arrays.  Deterministic reduction order.
    """
    x0, w0 = gauss_rule(order)
    prev = None
    n = 1
    while n <= max_panels:
        edges = np.linspace(a, b, n + 1)
        mids = 0.5 * (edges[:-1] + edges[1:])
        halfs = 0.5 * (edges[1:] - edges[:-1])
        xs = (mids[:, None] + halfs[:, None] * x0[None, :]).ravel()
        ws = (halfs[:, None] * w0[None, :]).ravel()
        value = float(np.sum(f(xs) * ws))
        if prev is not None:
            err = abs(value - prev)
            if err < tol * max(1.0, abs(value)):
                return value, err
        prev = value
        n *= 2
    raise NumericalError(
        "gauss_panels",
        f"quadrature did not converge below {tol:.3g} with {max_panels} panels",
        best_estimate=prev,
    )
