"""Half-plane arithmetic, hyperbolic geometry, adaptive ODE stepping and
finite-difference kernels used by every other module.

Complex points are plain Python ``complex`` values.  The right half-plane is
``{Re z > 0}``; the unit disk is ``{|z| < 1}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import DomainError, NonConvergenceError

__all__ = [
    "ODEConfig",
    "QuadratureConfig",
    "StepStats",
    "OdeResult",
    "DomainExit",
    "cayley",
    "cayley_inv",
    "hyperbolic_distance",
    "adaptive_ode_step",
    "alternating_differences",
    "gauss_legendre",
    "as_complex",
]


@dataclass(frozen=True)
class ODEConfig:
    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: float = math.inf
    max_steps: int = 10**6
    boundary_margin: float = 0.0

    def __post_init__(self):
        if not (self.rtol >= 1e-14):
            raise DomainError(f"rtol={self.rtol} below 1e-14")
        if not (self.atol >= 1e-16):
            raise DomainError(f"atol={self.atol} below 1e-16")
        if not self.max_step > 0:
            raise DomainError("max_step must be positive")
        if int(self.max_steps) != self.max_steps or self.max_steps < 1:
            raise DomainError("max_steps must be a positive integer")
        if not self.boundary_margin >= 0:
            raise DomainError("boundary_margin must be non-negative")


@dataclass(frozen=True)
class QuadratureConfig:
    panel_order: int = 16
    tail_rel_tol: float = 1e-12
    max_panels: int = 512

    def __post_init__(self):
        if self.panel_order < 4 or self.panel_order % 2:
            raise DomainError("panel_order must be an even integer >= 4")
        if not self.tail_rel_tol > 0:
            raise DomainError("tail_rel_tol must be positive")
        if self.max_panels < 1:
            raise DomainError("max_panels must be positive")


@dataclass
class StepStats:
    steps: int = 0
    rejected: int = 0
    nfev: int = 0


@dataclass
class OdeResult:
    y: complex
    stats: StepStats


@dataclass
class DomainExit:
    """The trajectory left ``{Re y > boundary_margin}`` (or blew up).

    The exit happened inside ``[t_lo, t_hi]`` (ordered along the direction of
    integration); ``t_exit`` is the midpoint of that bracket.
    """

    t_exit: float
    t_lo: float
    t_hi: float
    y_last: complex
    reason: str = "boundary"
    stats: StepStats = field(default_factory=StepStats)


def as_complex(z) -> complex:
    """Coerce ``z`` to ``complex`` and reject NaN/Inf components."""
    w = complex(z)
    if not (math.isfinite(w.real) and math.isfinite(w.imag)):
        raise DomainError(f"non-finite complex value {z!r}")
    return w


def cayley(z, allow_boundary: bool = False) -> complex:
    """Map the unit disk onto the right half-plane, ``(1+z)/(1-z)``.

    With ``allow_boundary`` the unit circle (minus the pole ``z = 1``) is
    accepted and mapped onto the imaginary axis.
    """
    z = as_complex(z)
    r = abs(z)
    if r > 1.0 or (r == 1.0 and not allow_boundary) or z == 1:
        raise DomainError(f"cayley: |z| = {r} outside the open unit disk")
    return (1 + z) / (1 - z)


def cayley_inv(w, allow_boundary: bool = False) -> complex:
    """Inverse Cayley map ``(w-1)/(w+1)``; ``allow_boundary`` admits ``Re w = 0``."""
    w = as_complex(w)
    if w.real < 0.0 or (w.real == 0.0 and not allow_boundary):
        raise DomainError(f"cayley_inv: Re w = {w.real} <= 0")
    return (w - 1) / (w + 1)


def hyperbolic_distance(z, w) -> float:
    """Distance for the metric ``|dz| / Re z`` on the right half-plane."""
    z = as_complex(z)
    w = as_complex(w)
    if z.real <= 0 or w.real <= 0:
        raise DomainError("hyperbolic_distance: points must lie in Re > 0")
    if z == w:
        return 0.0
    # 2 artanh(r) = log((1+r)/(1-r)); written to avoid cancellation in 1 - r
    num = abs(z - w)
    den = abs(z + w.conjugate())
    return 2.0 * math.atanh(num / den) if num / den < 0.5 else math.log(
        (den + num) ** 2 / (4.0 * z.real * w.real)
    )


# Dormand-Prince 5(4) tableau.
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))

_SAFETY = 0.9
_FAC_MIN = 0.2
_FAC_MAX = 5.0
_PI_ALPHA = 0.7 / 5
_PI_BETA = 0.4 / 5
EXIT_TIME_TOL = 1e-10


def _initial_step(rhs, t0, y0, f0, span, cfg):
    sc = cfg.atol + cfg.rtol * abs(y0)
    d0 = abs(y0) / sc
    d1 = abs(f0) / sc
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    return min(h0, span, cfg.max_step)


def adaptive_ode_step(
    rhs: Callable[[float, complex], complex],
    t0: float,
    t1: float,
    y0,
    cfg: ODEConfig | None = None,
):
    """Integrate ``dy/dt = rhs(t, y)`` from ``t0`` to ``t1``.

    Returns an :class:`OdeResult` or, if ``Re y`` drops to
    ``cfg.boundary_margin`` (or the solution blows up), a :class:`DomainExit`
    whose bracket is narrower than ``1e-10`` in time.  ``rhs`` may raise
    :class:`DomainError` at trial stages; the step is then shrunk.
    """
    cfg = cfg or ODEConfig()
    y = as_complex(y0)
    t0 = float(t0)
    t1 = float(t1)
    stats = StepStats()
    if t0 == t1:
        return OdeResult(y, stats)
    direction = 1.0 if t1 > t0 else -1.0
    span = abs(t1 - t0)
    margin = cfg.boundary_margin
    t = t0
    trajectory = [(t, y)]

    f0 = rhs(t, y)
    stats.nfev += 1
    h = _initial_step(rhs, t0, y, f0, span, cfg)
    err_prev = 1.0
    grow_ok = True

    while True:
        remaining = abs(t1 - t)
        if remaining <= 1e-15 * max(1.0, abs(t1)):
            return OdeResult(y, stats)
        if stats.steps + stats.rejected >= cfg.max_steps:
            raise NonConvergenceError(
                f"max_steps={cfg.max_steps} exceeded at t={t}", trajectory
            )
        last = h >= remaining
        if last:
            h = remaining
        dt = direction * h

        ks = [f0]
        ok = True
        try:
            for i in range(1, 7):
                yi = y + dt * sum(a * k for a, k in zip(_A[i], ks))
                ki = rhs(t + _C[i] * dt, yi)
                stats.nfev += 1
                if not (math.isfinite(ki.real) and math.isfinite(ki.imag)):
                    ok = False
                    break
                ks.append(ki)
        except (DomainError, OverflowError, ZeroDivisionError, FloatingPointError):
            ok = False

        if ok:
            y_new = y + dt * sum(b * k for b, k in zip(_B5, ks))
            if not (math.isfinite(y_new.real) and math.isfinite(y_new.imag)):
                ok = False
            elif y_new.real <= margin:
                ok = False

        if not ok:
            stats.rejected += 1
            tol_t = EXIT_TIME_TOL * max(1.0, abs(t))
            if h <= tol_t:
                t_hi = t + dt
                return DomainExit(
                    t_exit=0.5 * (t + t_hi), t_lo=t, t_hi=t_hi, y_last=y,
                    reason="boundary", stats=stats,
                )
            h *= 0.5
            grow_ok = False
            continue

        err_vec = dt * sum(e * k for e, k in zip(_E, ks))
        sc = cfg.atol + cfg.rtol * max(abs(y), abs(y_new))
        err = abs(err_vec) / sc
        if err <= 1.0:
            t = t1 if last else t + dt
            y = y_new
            f0 = ks[6]  # FSAL
            stats.steps += 1
            trajectory.append((t, y))
            if err == 0.0:
                fac = _FAC_MAX
            else:
                fac = _SAFETY * err ** (-_PI_ALPHA) * err_prev ** _PI_BETA
                fac = min(_FAC_MAX, max(_FAC_MIN, fac))
            if not grow_ok:
                fac = min(fac, 1.0)
            err_prev = max(err, 1e-4)
            grow_ok = True
            if last:
                return OdeResult(y, stats)
            h = min(h * fac, cfg.max_step)
        else:
            stats.rejected += 1
            fac = max(_FAC_MIN, _SAFETY * err ** (-1 / 5))
            h *= fac
            grow_ok = False
            tol_t = EXIT_TIME_TOL * max(1.0, abs(t))
            if h <= tol_t:
                # error control collapses only at a singularity (blow-up)
                t_hi = t + direction * h
                return DomainExit(
                    t_exit=0.5 * (t + t_hi), t_lo=t, t_hi=t_hi, y_last=y,
                    reason="singular", stats=stats,
                )


def alternating_differences(g: Callable[[float], float], x0: float, h: float, depth: int):
    """Return ``[(-1)**k * Delta_h**k g(x0) for k = 0..depth]``.

    Sums are accumulated with ``math.fsum`` so deep differences of smooth
    functions keep their sign.
    """
    if depth < 1:
        raise DomainError("depth must be >= 1")
    if not h > 0:
        raise DomainError("h must be positive")
    values = []
    for j in range(depth + 1):
        x = x0 + j * h
        try:
            v = float(g(x))
        except Exception as exc:  # noqa: BLE001 - re-raised with abscissa
            raise DomainError(f"evaluation failed at x={x}: {exc}") from exc
        if not math.isfinite(v):
            raise DomainError(f"non-finite value at x={x}")
        values.append(v)
    out = []
    for k in range(depth + 1):
        # (-1)^k Delta^k g(x0) = sum_j (-1)^j C(k, j) g(x0 + j h)
        out.append(math.fsum((-1) ** j * math.comb(k, j) * values[j] for j in range(k + 1)))
    return out


@lru_cache(maxsize=None)
def gauss_legendre(n: int):
    """Nodes and weights on ``[-1, 1]`` as read-only arrays."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w
