"""One-dimensional weighted p-Laplacian eigenproblems.

Both comparison problems have the form

    (p-1)|phi'|^(p-2) phi'' - b(s) |phi'|^(p-2) phi' = -mu |phi|^(p-2) phi

on ``[0, h]`` with ``phi(0) = 0`` and ``phi'(h) = 0``. The drift is
``b = 2(m-1) T_{kappa2} + T_{4 kappa1}`` for the Neumann (closed manifold)
problem and the ``T_{kappa,Lambda}`` analogue for the Dirichlet problem. With
the weight ``W = C_{kappa2}^(2m-2) C_{4 kappa1}`` we have ``b = -W'/W``, so the
equation is equivalent to the divergence form ``(W w)' = -mu W |phi|^(p-2) phi``
with momentum ``w = |phi'|^(p-2) phi'``. The shooting solver integrates the
regular first-order system

    phi' = sign(w) |w|^(1/(p-1)),     w' = b w - mu |phi|^(p-2) phi

and adjusts ``mu`` until the first zero of ``w`` lands on ``h``. The Rayleigh
oracle minimises the weighted quotient on a grid and shares no code with the
shooting path beyond the weight function.
"""

import enum
import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, optimize
from scipy.integrate import solve_ivp

from . import specfun
from .errors import (
    BracketError,
    ConvergenceError,
    DomainError,
    FocalPointError,
    IntegrationError,
)

# halfwidths this close to the first zero of the weight are snapped onto it
ENDPOINT_SNAP = 1e-9


class ProblemKind(str, enum.Enum):
    NEUMANN = "neumann"
    DIRICHLET = "dirichlet"


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances for the shooting solver and the Rayleigh oracle."""

    rtol: float = 1e-10
    atol: float = 1e-12
    method: str = "DOP853"
    mu_tol: float = 1e-13
    residual_tol: float = 1e-7
    n_samples: int = 401
    # relative distance from a vanishing-weight endpoint where integration stops
    singular_gap: float = 1e-7
    max_expansions: int = 60
    rayleigh_max_iter: int = 10000


DEFAULT_CONFIG = SolverConfig()


@dataclass(frozen=True)
class SpectralParams:
    """One instance of the comparison eigenproblem.

    ``halfwidth`` is ``D/2`` for the Neumann problem and ``R`` for the
    Dirichlet problem. ``lam`` (the boundary convexity bound) only enters the
    Dirichlet problem and must be 0 for Neumann.
    """

    m: int
    p: float
    kappa1: float
    kappa2: float
    halfwidth: float
    lam: float = 0.0
    kind: ProblemKind = ProblemKind.NEUMANN

    def __post_init__(self):
        object.__setattr__(self, "kind", ProblemKind(self.kind))
        if isinstance(self.m, bool) or int(self.m) != self.m or self.m < 1:
            raise DomainError(f"m must be an integer >= 1, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))
        for name in ("p", "kappa1", "kappa2", "halfwidth", "lam"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)
        if not self.p > 1:
            raise DomainError(f"p must exceed 1, got {self.p!r}")
        if not self.halfwidth > 0:
            raise DomainError(f"halfwidth must be positive, got {self.halfwidth!r}")
        if self.kind is ProblemKind.NEUMANN and self.lam != 0:
            raise DomainError("the Neumann problem has no boundary term; use lam=0")
        end = self.weight_end
        if self.halfwidth > end + ENDPOINT_SNAP:
            raise FocalPointError(
                f"weight vanishes at s={end!r} before halfwidth={self.halfwidth!r}",
                location=end,
            )

    @property
    def factors(self):
        """``(kappa, exponent)`` pairs making up the weight."""
        out = [(4.0 * self.kappa1, 1)]
        if self.m > 1:
            out.append((self.kappa2, 2 * self.m - 2))
        return out

    @functools.cached_property
    def weight_end(self):
        """First zero of the weight on ``(0, inf)``."""
        return min(specfun.first_zero(k, self.lam) for k, _ in self.factors)

    @property
    def singular_end(self):
        """True when the weight vanishes at the right endpoint."""
        return abs(self.halfwidth - self.weight_end) <= ENDPOINT_SNAP

    @property
    def span(self):
        """Length of the interval actually solved on (snapped to the weight zero)."""
        return self.weight_end if self.singular_end else self.halfwidth

    def scaled(self, c):
        """Instance with lengths multiplied by ``c``; eigenvalues scale by ``c**-p``."""
        return SpectralParams(
            self.m, self.p, self.kappa1 / c**2, self.kappa2 / c**2,
            self.halfwidth * c, self.lam / c, self.kind,
        )


@dataclass(frozen=True)
class ShootingState:
    """Phase variables at position ``s``; ``w = |phi'|^(p-2) phi'``."""

    s: float
    phi: float
    w: float


def momentum(dphi, p):
    """``|phi'|^(p-2) phi'``."""
    return np.sign(dphi) * np.abs(dphi) ** (p - 1.0)


def velocity(w, p):
    """Inverse of :func:`momentum`: ``sign(w) |w|^(1/(p-1))``."""
    return np.sign(w) * np.abs(w) ** (1.0 / (p - 1.0))


@dataclass
class EigenResult:
    eigenvalue: float
    grid: np.ndarray
    phi_samples: np.ndarray
    w_samples: np.ndarray
    residual: float
    method: str
    iterations: int
    bracket: tuple
    params: SpectralParams = None
    meta: dict = field(default_factory=dict)


def _check_kind(params, kind):
    if params.kind is not kind:
        raise DomainError(f"expected a {kind.value} instance, got {params.kind.value}")


def _check_s(params, s):
    s = np.asarray(s, dtype=float)
    if np.any(s < -1e-12) or np.any(s > params.span + 1e-12):
        raise FocalPointError(
            f"s outside [0, {params.span!r}] where the weight is positive",
            location=params.weight_end,
        )
    return s


def drift(params, s):
    """Drift coefficient ``b(s) = -W'(s)/W(s)`` of the matching problem."""
    s = _check_s(params, s)
    total = np.zeros_like(s)
    for k, e in params.factors:
        if params.kind is ProblemKind.NEUMANN:
            total = total + e * np.asarray(specfun.t_kappa(k, s))
        else:
            total = total + e * np.asarray(specfun.t_kappa_lambda(k, params.lam, s))
    return specfun._out(total)


def weight_at(params, s):
    """Weight ``C_{kappa2}^(2m-2) C_{4 kappa1}`` (``C = c_kappa`` for Neumann)."""
    s = _check_s(params, s)
    out = np.ones_like(s)
    for k, e in params.factors:
        out = out * np.asarray(specfun.big_c(k, params.lam, s)) ** e
    if np.any(out < 0):
        raise FocalPointError("weight is negative", location=params.weight_end)
    return specfun._out(np.maximum(out, 0.0))


def _scalar_drift(params):
    """Fast scalar version of :func:`drift` for the ODE right-hand side."""
    terms = []
    for k, e in params.factors:
        a = math.sqrt(abs(k))
        terms.append((k, e, a))
    lam = params.lam

    def b(s):
        total = 0.0
        for k, e, a in terms:
            x = k * s * s
            if abs(x) < specfun.SERIES_THRESHOLD:
                sn = s * (1.0 - x / 6.0 + x * x / 120.0)
                cs = 1.0 - x / 2.0 + x * x / 24.0
            elif k > 0:
                sn, cs = math.sin(a * s) / a, math.cos(a * s)
            else:
                sn, cs = math.sinh(a * s) / a, math.cosh(a * s)
            total += e * (k * sn + lam * cs) / (cs - lam * sn)
        return total

    return b


def _stop_point(params, config):
    span = params.span
    return span * (1.0 - config.singular_gap) if params.singular_end else span


def _shoot(params, mu, config, events=True, dense_output=False):
    p = params.p
    b = _scalar_drift(params)
    inv = 1.0 / (p - 1.0)

    def rhs(s, y):
        phi, w = y
        dphi = math.copysign(abs(w) ** inv, w)
        return [dphi, b(s) * w - mu * math.copysign(abs(phi) ** (p - 1.0), phi)]

    def w_zero(s, y):
        return y[1]

    w_zero.terminal = True
    w_zero.direction = -1

    sol = solve_ivp(
        rhs, (0.0, _stop_point(params, config)), [0.0, 1.0],
        method=config.method, rtol=config.rtol, atol=config.atol,
        events=w_zero if events else None, dense_output=dense_output,
    )
    if sol.status == -1:
        raise IntegrationError(f"integration failed at mu={mu!r}: {sol.message}")
    return sol


def integrate_shooting(params, mu, config=DEFAULT_CONFIG):
    """Integrate the phase system from ``(phi, w) = (0, 1)`` with eigenvalue guess ``mu``.

    Returns ``(first_zero, terminal)`` where ``first_zero`` is the first ``s``
    with ``w(s) = 0`` (``None`` if ``w`` stays positive up to the end of the
    interval) and ``terminal`` is the :class:`ShootingState` where integration
    stopped.
    """
    if not mu > 0:
        raise DomainError(f"mu must be positive, got {mu!r}")
    sol = _shoot(params, mu, config)
    zero = float(sol.t_events[0][0]) if sol.t_events[0].size else None
    return zero, ShootingState(float(sol.t[-1]), float(sol.y[0, -1]), float(sol.y[1, -1]))


def _miss(params, mu, config):
    """Signed distance, in length units, from the first zero of ``w`` to the end.

    Negative when ``w`` vanishes inside the interval. When it does not, the
    zero is extrapolated linearly from the terminal slope so the function is
    continuous through the eigenvalue.
    """
    sol = _shoot(params, mu, config)
    end = sol.t[-1]
    if sol.t_events[0].size:
        return float(sol.t_events[0][0]) - params.span
    phi, w = sol.y[:, -1]
    slope = mu * abs(phi) ** (params.p - 1.0)
    return float(end - params.span + w / slope) if slope > 0 else math.inf


def _weight_ratio(params):
    s = np.linspace(0.0, _stop_point(params, DEFAULT_CONFIG), 257)
    W = np.asarray(weight_at(params, s))
    ratio = float(W.max() / max(W.min(), 1e-300))
    return min(ratio, 1e3)


def closed_form_bound(p, D):
    """``(p-1) (pi_p / D)^p``: the flat-case comparison eigenvalue for diameter ``D``."""
    if not (math.isfinite(D) and D > 0):
        raise DomainError(f"D must be positive, got {D!r}")
    return (p - 1.0) * (specfun.pi_p(p) / D) ** p


def _find_bracket(params, config):
    base = closed_form_bound(params.p, 2.0 * params.span)
    ratio = _weight_ratio(params)
    lo, hi = base / ratio, base * ratio
    for _ in range(config.max_expansions):
        f_lo = _miss(params, lo, config)
        if f_lo > 0:
            break
        lo /= 2.0
    else:
        raise BracketError(f"no lower bracket for {params}")
    for _ in range(config.max_expansions):
        f_hi = _miss(params, hi, config)
        if f_hi < 0:
            break
        lo, f_lo = max(lo, hi), f_hi
        hi *= 2.0
    else:
        raise BracketError(f"no upper bracket for {params}")
    return lo, hi


def _solve(params, tol, config):
    lo, hi = _find_bracket(params, config)
    rtol = max(tol, 4 * np.finfo(float).eps)
    mu, info = optimize.brentq(
        lambda mu: _miss(params, mu, config), lo, hi, xtol=1e-300, rtol=rtol,
        maxiter=200, full_output=True,
    )
    if not info.converged:
        raise BracketError(f"root search did not converge: {info.flag}")

    # certify a tight bracket around the root; widen if ODE noise blurs the sign
    delta = 2.0 * rtol * mu
    for _ in range(8):
        b_lo, b_hi = mu - delta, mu + delta
        if _miss(params, b_lo, config) > 0 and _miss(params, b_hi, config) < 0:
            break
        delta *= 10.0
    else:
        raise BracketError(f"could not certify a bracket around mu={mu!r}")

    sol = _shoot(params, mu, config, events=False, dense_output=True)
    end = sol.t[-1]
    grid = np.linspace(0.0, params.span, config.n_samples)
    y = sol.sol(np.minimum(grid, end))
    phi, w = y[0].copy(), y[1].copy()
    residual = _defect(params, mu, sol)
    if residual > config.residual_tol:
        raise IntegrationError(
            f"divergence-form defect {residual:.3e} exceeds {config.residual_tol:.1e}"
        )
    return EigenResult(
        eigenvalue=float(mu), grid=grid, phi_samples=phi, w_samples=w,
        residual=residual, method="shooting", iterations=int(info.iterations),
        bracket=(float(b_lo), float(b_hi)), params=params,
        meta={"rtol": config.rtol, "atol": config.atol, "mu_tol": rtol,
              "function_calls": int(info.function_calls),
              "singular_end": params.singular_end},
    )


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


def _defect(params, mu, sol):
    """Max defect of the integral form of the phase system along a trajectory.

    Checks ``W w |_0^s + mu int_0^s W |phi|^(p-2) phi = 0`` and
    ``phi(s) - int_0^s phi' = 0`` at every accepted step, with Gauss-Legendre
    quadrature of the dense output on each step.
    """
    p = params.p
    t = sol.t
    a, b = t[:-1], t[1:]
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b))[:, None] + half[:, None] * _GL_NODES[None, :]
    y = sol.sol(nodes.ravel())
    phi = y[0].reshape(nodes.shape)
    w = y[1].reshape(nodes.shape)
    W = np.asarray(weight_at(params, nodes.ravel())).reshape(nodes.shape)
    src = (W * np.sign(phi) * np.abs(phi) ** (p - 1.0)) @ _GL_WEIGHTS * half
    vel = velocity(w, p) @ _GL_WEIGHTS * half
    ends = sol.sol(t)
    Wt = np.asarray(weight_at(params, t))
    flux = Wt * ends[1]
    r_flux = flux[1:] - flux[0] + mu * np.cumsum(src)
    r_phi = ends[0][1:] - np.cumsum(vel)
    scale_flux = max(np.max(np.abs(flux)), 1e-300)
    scale_phi = max(np.max(np.abs(ends[0])), 1e-300)
    return float(max(np.max(np.abs(r_flux)) / scale_flux,
                     np.max(np.abs(r_phi)) / scale_phi))


def solve_neumann(params, tol=1e-13, config=DEFAULT_CONFIG):
    """First nonzero eigenvalue of the closed/Neumann comparison problem.

    Solved on ``[0, D/2]`` with ``phi(0) = 0`` and ``phi'(D/2) = 0`` (the odd
    first eigenfunction on ``[-D/2, D/2]`` restricted to the right half).

    Parameters
    ----------
    params : SpectralParams
        Instance with ``kind="neumann"``; ``halfwidth`` is ``D/2``.
    tol : float
        Relative tolerance of the root search in the eigenvalue.
    config : SolverConfig, optional

    Returns
    -------
    EigenResult
        Eigenvalue, eigenfunction samples normalised by ``w(0) = 1``, the
        certified eigenvalue bracket and the trajectory defect.
    """
    _check_kind(params, ProblemKind.NEUMANN)
    return _solve(params, tol, config)


def solve_dirichlet(params, tol=1e-13, config=DEFAULT_CONFIG):
    """First eigenvalue of the boundary-distance comparison problem on ``[0, R]``.

    Same shooting scheme as :func:`solve_neumann` with the drift built from
    ``T_{kappa,Lambda}``.
    """
    _check_kind(params, ProblemKind.DIRICHLET)
    return _solve(params, tol, config)


def solve(params, tol=1e-13, config=DEFAULT_CONFIG):
    return _solve(params, tol, config)


def _banded_stiffness(coef, dx):
    """Tridiagonal ``D^T diag(coef) D`` on the free nodes 1..n-1, banded form."""
    diag = coef / dx
    main = diag.copy()
    main[:-1] += diag[1:]
    ab = np.zeros((2, main.size))
    ab[0, 1:] = -diag[1:]
    ab[1] = main
    return ab


def rayleigh_oracle(params, n=2048, tol=1e-11, config=DEFAULT_CONFIG):
    """Minimise the discrete weighted Rayleigh quotient with ``phi(0) = 0``.

    Energy uses forward differences with cell weights averaged from the nodes,
    the denominator uses the trapezoidal rule. Descent directions are
    gradients taken in a weighted Sobolev metric (the frozen-coefficient
    Hessian of the energy), with Armijo backtracking and renormalisation after
    each step. For ``p = 2`` a unit step is exactly inverse iteration.
    """
    if n < 32:
        raise DomainError(f"need at least 32 grid nodes, got {n}")
    p = params.p
    s = np.linspace(0.0, params.span, n)
    dx = s[1] - s[0]
    W = np.asarray(weight_at(params, s))
    Wc = 0.5 * (W[:-1] + W[1:])
    mass = W * dx
    mass[0] *= 0.5
    mass[-1] *= 0.5

    def parts(phi):
        d = np.diff(phi) / dx
        E = dx * np.sum(Wc * np.abs(d) ** p)
        N = np.sum(mass * np.abs(phi) ** p)
        return d, E, N

    def quotient(phi):
        _, E, N = parts(phi)
        return E / N

    phi = s.copy()
    phi /= np.sum(mass * phi**p) ** (1.0 / p)
    q_prev = quotient(phi)
    q = q_prev
    it = 0
    for it in range(1, config.rayleigh_max_iter + 1):
        d, E, N = parts(phi)
        q = E / N
        flux = p * Wc * np.sign(d) * np.abs(d) ** (p - 1.0)
        gE = np.zeros(n)
        gE[:-1] -= flux
        gE[1:] += flux
        gN = p * mass * np.sign(phi) * np.abs(phi) ** (p - 1.0)
        g = ((gE - q * gN) / N)[1:]

        ad = np.abs(d)
        eps = 1e-4 * ad.max()
        coef = p * (p - 1.0) * Wc * np.maximum(ad, eps) ** (p - 2.0)
        direction = -linalg.solveh_banded(_banded_stiffness(coef, dx), g,
                                          check_finite=False)
        slope = float(g @ direction)
        alpha = (p - 1.0) * N
        accepted = False
        for _ in range(60):
            trial = phi.copy()
            trial[1:] += alpha * direction
            q_trial = quotient(trial)
            if q_trial <= q + 1e-4 * alpha * slope:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            # no representable decrease left
            q_prev = q
            break
        if trial[-1] < 0:
            trial = -trial
        phi = trial / np.sum(mass * np.abs(trial) ** p) ** (1.0 / p)
        q_prev, q = q, q_trial
        if abs(q_prev - q) <= tol * abs(q):
            break
    else:
        raise ConvergenceError(
            f"Rayleigh descent stalled: relative change {abs(q_prev - q) / q:.2e} "
            f"after {config.rayleigh_max_iter} iterations"
        )

    d = np.diff(phi) / dx
    w = np.append(momentum(d, p), 0.0)
    return EigenResult(
        eigenvalue=float(q), grid=s, phi_samples=phi, w_samples=w,
        residual=float(abs(q_prev - q) / q), method="rayleigh", iterations=it,
        bracket=(float(q), float(max(q, q_prev))), params=params,
        meta={"n": n, "tol": tol},
    )
