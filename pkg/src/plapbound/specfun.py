"""Comparison functions for the curvature models and the p-trigonometric constant.

All functions accept scalars or arrays for ``t``. The three curvature branches
(``kappa > 0``, ``== 0``, ``< 0``) are evaluated through the generalized sine
and cosine

    sn_k(t) = sin(sqrt(k) t) / sqrt(k),    cs_k(t) = cos(sqrt(k) t)

(with the hyperbolic continuation for ``k < 0``), switching to a Taylor series
when ``|k| t**2`` is tiny so that the branches join continuously at ``k = 0``.
"""

import math

import numpy as np
from scipy import integrate

from .errors import DomainError, FocalPointError, PoleError

SERIES_THRESHOLD = 1e-8
POLE_GAP = 1e-12


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def _check_finite(**values):
    for name, v in values.items():
        if not np.all(np.isfinite(v)):
            raise DomainError(f"{name} must be finite, got {v!r}")


def _sn_cs(kappa, t):
    t = np.asarray(t, dtype=float)
    x = kappa * t * t
    small = np.abs(x) < SERIES_THRESHOLD
    # next omitted terms are O(x**3) relative, far below double precision here
    sn_series = t * (1.0 - x / 6.0 + x * x / 120.0)
    cs_series = 1.0 - x / 2.0 + x * x / 24.0
    if kappa > 0:
        a = math.sqrt(kappa)
        sn = np.sin(a * t) / a
        cs = np.cos(a * t)
    elif kappa < 0:
        b = math.sqrt(-kappa)
        sn = np.sinh(b * t) / b
        cs = np.cosh(b * t)
    else:
        sn, cs = t.copy(), np.ones_like(t)
    return np.where(small, sn_series, sn), np.where(small, cs_series, cs)


def sn_kappa(kappa, t):
    """Generalized sine: solution of ``y'' + kappa y = 0``, ``y(0)=0``, ``y'(0)=1``."""
    _check_finite(kappa=kappa, t=t)
    return _out(_sn_cs(kappa, t)[0])


def c_kappa(kappa, t):
    """Generalized cosine ``cos(sqrt(kappa) t)``, ``1`` or ``cosh(sqrt(-kappa) t)``."""
    _check_finite(kappa=kappa, t=t)
    return _out(_sn_cs(kappa, t)[1])


def kappa_pole(kappa):
    """First positive zero of ``c_kappa`` (``inf`` unless ``kappa > 0``)."""
    return math.pi / (2.0 * math.sqrt(kappa)) if kappa > 0 else math.inf


def t_kappa(kappa, t):
    """``sqrt(k) tan(sqrt(k) t)``, ``0`` or ``-sqrt(-k) tanh(sqrt(-k) t)``.

    Raises
    ------
    PoleError
        If ``kappa > 0`` and ``|t|`` is within ``1e-12`` of, or beyond, the
        tangent pole ``pi / (2 sqrt(kappa))``.
    """
    _check_finite(kappa=kappa, t=t)
    t = np.asarray(t, dtype=float)
    pole = kappa_pole(kappa)
    if kappa > 0 and np.any(np.abs(t) >= pole - POLE_GAP):
        raise PoleError(
            f"t_kappa: |t|={np.max(np.abs(t))!r} reaches the pole {pole!r} "
            f"for kappa={kappa!r}",
            pole=pole,
        )
    x = kappa * t * t
    series = kappa * t * (1.0 + x / 3.0 + 2.0 * x * x / 15.0)
    if kappa > 0:
        a = math.sqrt(kappa)
        exact = a * np.tan(a * t)
    elif kappa < 0:
        b = math.sqrt(-kappa)
        exact = -b * np.tanh(b * t)
    else:
        exact = np.zeros_like(t)
    return _out(np.where(np.abs(x) < SERIES_THRESHOLD, series, exact))


def big_c(kappa, lam, t):
    """Solution ``C`` of ``C'' + kappa C = 0`` with ``C(0)=1``, ``C'(0)=-lam``."""
    _check_finite(kappa=kappa, lam=lam, t=t)
    sn, cs = _sn_cs(kappa, t)
    return _out(cs - lam * sn)


def big_c_prime(kappa, lam, t):
    """Derivative of :func:`big_c` in ``t``."""
    _check_finite(kappa=kappa, lam=lam, t=t)
    sn, cs = _sn_cs(kappa, t)
    return _out(-kappa * sn - lam * cs)


def first_zero(kappa, lam):
    """First positive zero of ``C_{kappa,lam}``, or ``inf`` if it never vanishes."""
    _check_finite(kappa=kappa, lam=lam)
    if kappa > 0:
        a = math.sqrt(kappa)
        return math.atan2(a, lam) / a
    if kappa == 0:
        return 1.0 / lam if lam > 0 else math.inf
    b = math.sqrt(-kappa)
    return math.atanh(b / lam) / b if lam > b else math.inf


def t_kappa_lambda(kappa, lam, t):
    """``-C'/C`` for ``C = C_{kappa,lam}``; equals ``lam`` at ``t = 0``.

    Raises
    ------
    FocalPointError
        If ``C`` vanishes between 0 and ``t`` (within ``1e-12``). The error
        carries the signed location of the first zero.
    """
    _check_finite(kappa=kappa, lam=lam, t=t)
    t = np.asarray(t, dtype=float)
    tmax, tmin = float(np.max(t, initial=0.0)), float(np.min(t, initial=0.0))
    zero_fwd = first_zero(kappa, lam)
    if tmax >= zero_fwd - POLE_GAP:
        raise FocalPointError(
            f"C_(kappa={kappa!r}, Lambda={lam!r}) vanishes at t={zero_fwd!r} "
            f"inside [0, {tmax!r}]",
            location=zero_fwd,
        )
    # C_{k,lam}(-t) = C_{k,-lam}(t)
    zero_bwd = first_zero(kappa, -lam)
    if -tmin >= zero_bwd - POLE_GAP:
        raise FocalPointError(
            f"C_(kappa={kappa!r}, Lambda={lam!r}) vanishes at t={-zero_bwd!r} "
            f"inside [{tmin!r}, 0]",
            location=-zero_bwd,
        )
    sn, cs = _sn_cs(kappa, t)
    return _out((kappa * sn + lam * cs) / (cs - lam * sn))


def pi_p(p):
    """Half period ``2 pi / (p sin(pi / p))`` of the p-sine; ``pi_2 = pi``."""
    if not (np.isfinite(p) and p > 1):
        raise DomainError(f"pi_p needs p > 1, got {p!r}")
    return 2.0 * math.pi / (p * math.sin(math.pi / p))


def pi_p_quadrature(p):
    """``2 * int_0^1 (1 - u**p)**(-1/p) du`` by adaptive quadrature.

    The endpoint singularity ``(1-u)**(-1/p)`` is factored into QUADPACK's
    algebraic weight so the remaining integrand is smooth.
    """
    if not (np.isfinite(p) and p > 1):
        raise DomainError(f"pi_p needs p > 1, got {p!r}")

    def smooth(u):
        if u >= 1.0:
            return (1.0 / p) ** (1.0 / p)
        if u <= 0:
            return 1.0
        return ((1.0 - u) / -math.expm1(p * math.log(u))) ** (1.0 / p)

    val, _ = integrate.quad(
        smooth, 0.0, 1.0, weight="alg", wvar=(0.0, -1.0 / p),
        epsabs=1e-14, epsrel=1e-13, limit=200,
    )
    return 2.0 * val
