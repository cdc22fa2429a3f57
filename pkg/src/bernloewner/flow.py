"""Autonomous semigroups ``v_t`` solving ``dw/dt + phi(w) = 0``, ``w(0) = z``.

Elementary generators (constant, linear, quadratic and their Riccati
combination) are dispatched to exact formulas; atomic Levy measures go
through the compiled integrator and everything else through
:func:`~bernloewner.numerics.adaptive_ode_step`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from . import _backend
from .bernstein import BernsteinRepr, evaluate
from .errors import DomainError, SingularPathError
from .generator import GeneratorRepr, eval_gen, from_bernstein
from .numerics import (
    DomainExit,
    ODEConfig,
    QuadratureConfig,
    adaptive_ode_step,
    as_complex,
    gauss_legendre,
)

__all__ = [
    "FlowResult",
    "flow",
    "closed_form_flow",
    "euler_flow",
    "trotter_flow",
    "koenigs",
    "abel_residual",
    "semigroup_residual",
]


@dataclass(frozen=True)
class FlowResult:
    w: complex
    steps: int = 0
    rejected_steps: int = 0
    used_closed_form: bool = False


def _riccati_time(a: float, t: float) -> float:
    """``(1 - e^{-at}) / a`` with the ``a -> 0`` limit ``t``."""
    if a == 0.0:
        return t
    at = a * t
    if abs(at) < 1e-300:
        return t
    return -math.expm1(-at) / a


def closed_form_flow(g: GeneratorRepr, t: float, z: complex) -> complex | None:
    """Exact ``v_t(z)`` for the elementary generators, else ``None``.

    ``q`` alone gives ``z + qt``; ``a`` and ``b`` (with ``q = 0``) give the
    Riccati solution ``e^{-at} z / (1 + b k z)`` with ``k = (1 - e^{-at})/a``,
    which contains the linear and quadratic flows as special cases.
    """
    if not g.pi.is_empty:
        return None
    if g.q != 0.0:
        if g.a == 0.0 and g.b == 0.0:
            return z + g.q * t
        return None
    decay = math.exp(-g.a * t)
    if g.b == 0.0:
        return decay * z
    k = _riccati_time(g.a, t)
    return decay * z / (1.0 + g.b * k * z)


def flow(
    g: GeneratorRepr,
    t: float,
    z,
    cfg: ODEConfig | None = None,
    force_ode: bool = False,
) -> FlowResult:
    """``v_t^phi(z)`` for ``t >= 0`` and ``Re z > 0``."""
    z = as_complex(z)
    t = float(t)
    if not (t >= 0 and math.isfinite(t)):
        raise DomainError(f"flow time must be finite and >= 0, got {t}")
    if z.real <= 0:
        raise DomainError(f"flow needs Re z > 0, got {z}")
    if t == 0.0:
        return FlowResult(z, used_closed_form=True)
    cfg = cfg or ODEConfig()

    if not force_ode:
        w = closed_form_flow(g, t, z)
        if w is not None:
            return FlowResult(w, used_closed_form=True)

    if g.pi.is_atomic:
        w, steps, rejected = _backend.flow_atoms(
            g.q, g.a, g.b, g.pi.atom_locations, g.pi.atom_weights, t, z,
            cfg.rtol, cfg.atol, cfg.max_step, int(cfg.max_steps),
        )
        return FlowResult(w, int(steps), int(rejected))

    res = adaptive_ode_step(lambda _s, w: -eval_gen(g, w), 0.0, t, z, cfg)
    if isinstance(res, DomainExit):
        # a Bernstein generator keeps the half-plane invariant, so this is a
        # solver failure rather than a property of the input
        raise DomainError(
            f"internal error: flow left the half-plane near t={res.t_exit} ({res.reason})"
        )
    return FlowResult(res.y, res.stats.steps, res.stats.rejected)


def euler_flow(f: BernsteinRepr, t: float, n: int, z) -> complex:
    """Forward Euler for ``dw/dt = f(w)`` (the semigroup of ``phi = -f``)."""
    if n < 1:
        raise DomainError("n must be >= 1")
    if t < 0:
        raise DomainError("t must be >= 0")
    v = as_complex(z)
    dt = t / n
    for _ in range(n):
        v = v + dt * evaluate(f, v)
    return v


def trotter_flow(g1: GeneratorRepr, g2: GeneratorRepr, t: float, n: int, z, cfg: ODEConfig | None = None) -> complex:
    """``(v^1_{t/n} o v^2_{t/n})^n (z)``."""
    if n < 1:
        raise DomainError("n must be >= 1")
    w = as_complex(z)
    dt = t / n
    for _ in range(n):
        w = flow(g1, dt, flow(g2, dt, w, cfg).w, cfg).w
    return w


def _segment_panel(f, z0: complex, dz: complex, lo: float, hi: float, order: int) -> complex:
    x, wts = gauss_legendre(order)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    acc = 0j
    for xi, wi in zip(x, wts):
        val = evaluate(f, z0 + (mid + half * xi) * dz)
        if val == 0:
            raise SingularPathError(f"f vanishes at {z0 + (mid + half * xi) * dz}")
        acc += wi / val
    return acc * half * dz


def koenigs(f: BernsteinRepr, z, cfg: QuadratureConfig | None = None) -> complex:
    """``h(z) = int_1^z d zeta / f(zeta)`` along the straight segment from 1.

    Adaptive bisection with Gauss-Legendre panels; a panel whose estimate
    does not settle within the panel budget signals a zero of ``f`` on (or
    extremely close to) the path.
    """
    cfg = cfg or QuadratureConfig()
    z = as_complex(z)
    if z.real <= 0:
        raise DomainError("koenigs needs Re z > 0")
    if z == 1:
        return 0j
    dz = z - 1.0
    order = cfg.panel_order

    def panel(lo, hi):
        return _segment_panel(f, 1.0 + 0j, dz, lo, hi, order)

    total = 0j
    stack = [(0.0, 1.0, panel(0.0, 1.0))]
    panels_used = 1
    while stack:
        lo, hi, est = stack.pop()
        mid = 0.5 * (lo + hi)
        left, right = panel(lo, mid), panel(mid, hi)
        panels_used += 2
        refined = left + right
        scale = max(abs(total), abs(refined), 1e-300)
        if abs(refined - est) <= 1e-13 * scale or hi - lo < 1e-12:
            if not (math.isfinite(refined.real) and math.isfinite(refined.imag)):
                raise SingularPathError("integrand of the Koenigs function blows up on the path")
            total += refined
            continue
        if panels_used > 64 * cfg.max_panels:
            raise SingularPathError("Koenigs quadrature did not settle: f nearly vanishes on the path")
        stack.append((mid, hi, right))
        stack.append((lo, mid, left))
    return total


def abel_residual(f: BernsteinRepr, t: float, z, cfg: ODEConfig | None = None) -> float:
    """``|h(v_t(z)) - h(z) - t|`` for the semigroup generated by ``-f``."""
    if t == 0:
        return 0.0
    z = as_complex(z)
    w = flow(from_bernstein(f), t, z, cfg).w
    return abs(koenigs(f, w) - koenigs(f, z) - t)


def semigroup_residual(g: GeneratorRepr, s: float, t: float, z, cfg: ODEConfig | None = None) -> float:
    whole = flow(g, s + t, z, cfg).w
    split = flow(g, s, flow(g, t, z, cfg).w, cfg).w
    return abs(whole - split)
