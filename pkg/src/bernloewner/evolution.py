"""Non-autonomous Loewner-Kufarev dynamics for piecewise-constant fields.

A :class:`HerglotzField` holds breakpoints ``0 = t_0 < ... < t_m`` and one
Bernstein generator per interval ``[t_{k-1}, t_k)``.  The evolution family
``w_{s,t}`` composes the per-slice semigroups with the latest slice outermost;
the reverse family ``v_{s,t}`` composes them with the earliest outermost.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError, NoBRFPError, ParseError
from .flow import flow
from .generator import GeneratorRepr, check_generator_numeric, classify, eval_gen, generator_from_json
from .numerics import DomainExit, ODEConfig, StepStats, adaptive_ode_step, as_complex

__all__ = [
    "HerglotzField",
    "BoundaryCoefficientPath",
    "evolve",
    "reverse_evolve",
    "inverse_evolve",
    "ef2_residual",
    "ref2_residual",
    "boundary_path",
    "brfp0_derivative",
    "brfp0_second_derivative",
    "chain_rule_check",
    "finite_difference_brfp0",
]

_SPAN_TOL = 1e-12


class HerglotzField:
    """Piecewise-constant field of Bernstein generators.

    Slices are trusted to be valid generators (``GeneratorRepr`` validates
    its coefficients and measure); :meth:`check` runs the numeric test of the
    defining conditions on each slice.
    """

    __slots__ = ("breakpoints", "slices")

    def __init__(self, breakpoints: Sequence[float], slices: Sequence[GeneratorRepr]):
        bps = tuple(float(t) for t in breakpoints)
        slices = tuple(slices)
        if len(slices) < 1:
            raise DomainError("a field needs at least one slice")
        if len(bps) != len(slices) + 1:
            raise DomainError(
                f"{len(slices)} slices need {len(slices) + 1} breakpoints, got {len(bps)}"
            )
        if bps[0] != 0.0:
            raise DomainError("the first breakpoint must be 0")
        if any(not math.isfinite(t) for t in bps):
            raise DomainError("breakpoints must be finite")
        if any(b <= a for a, b in zip(bps, bps[1:])):
            raise DomainError("breakpoints must be strictly increasing")
        for g in slices:
            if not isinstance(g, GeneratorRepr):
                raise DomainError("slices must be GeneratorRepr instances")
        self.breakpoints = bps
        self.slices = slices

    @classmethod
    def constant(cls, g: GeneratorRepr, T: float = 1.0) -> "HerglotzField":
        return cls((0.0, T), (g,))

    @property
    def span(self) -> float:
        return self.breakpoints[-1]

    def __len__(self):
        return len(self.slices)

    def __eq__(self, other):
        if not isinstance(other, HerglotzField):
            return NotImplemented
        return self.breakpoints == other.breakpoints and self.slices == other.slices

    def __hash__(self):
        return hash((self.breakpoints, self.slices))

    def __repr__(self):
        return f"HerglotzField(breakpoints={list(self.breakpoints)}, slices={list(self.slices)})"

    def generator_at(self, t: float) -> GeneratorRepr:
        for k, g in enumerate(self.slices):
            if t < self.breakpoints[k + 1]:
                return g
        return self.slices[-1]

    def pieces(self, s: float, t: float):
        """``(k, lo, hi)`` for each slice meeting ``[s, t]`` with positive length."""
        out = []
        for k, g in enumerate(self.slices):
            lo = max(s, self.breakpoints[k])
            hi = min(t, self.breakpoints[k + 1])
            if hi > lo:
                out.append((k, lo, hi))
        return out

    def check(self) -> tuple[bool, list[dict]]:
        """Run :func:`check_generator_numeric` on every slice."""
        reports = []
        ok = True
        for g in self.slices:
            passed, rep = check_generator_numeric(lambda x, g=g: eval_gen(g, x))
            ok &= passed
            reports.append(rep)
        return ok, reports

    def to_json(self) -> dict:
        return {"breakpoints": list(self.breakpoints), "slices": [g.to_json() for g in self.slices]}

    @classmethod
    def from_json(cls, data, validate: bool = True, slice_parser=None) -> "HerglotzField":
        """Strict parse; ``slice_parser(obj, validate)`` overrides the slice decoder."""
        slice_parser = slice_parser or generator_from_json
        if not isinstance(data, dict):
            raise ParseError("field: expected a JSON object")
        extra = set(data) - {"breakpoints", "slices"}
        if extra:
            raise ParseError(f"field: unknown keys {sorted(extra)}")
        if "breakpoints" not in data or "slices" not in data:
            raise ParseError("field: 'breakpoints' and 'slices' are required")
        if not isinstance(data["slices"], list) or not isinstance(data["breakpoints"], list):
            raise ParseError("field: 'breakpoints' and 'slices' must be arrays")
        slices = [slice_parser(s, validate=validate) for s in data["slices"]]
        try:
            return cls(data["breakpoints"], slices)
        except (DomainError, TypeError) as exc:
            raise ParseError(str(exc)) from exc


@dataclass(frozen=True)
class BoundaryCoefficientPath:
    """Per-slice ``phi'(0)`` (``c``) and ``phi''(0)`` (``s2``) of a field."""

    c: tuple
    s2: tuple


def _check_interval(F: HerglotzField, s: float, t: float):
    if not (0.0 <= s <= t):
        raise DomainError(f"need 0 <= s <= t, got s={s}, t={t}")
    if t > F.span * (1 + _SPAN_TOL):
        raise DomainError(f"t={t} beyond the field span {F.span}")


def evolve(F: HerglotzField, s: float, t: float, z, cfg: ODEConfig | None = None) -> complex:
    """``w_{s,t}(z)``: slices applied in increasing time."""
    _check_interval(F, s, t)
    w = as_complex(z)
    for k, lo, hi in F.pieces(s, t):
        w = flow(F.slices[k], hi - lo, w, cfg).w
    return w


def reverse_evolve(F: HerglotzField, s: float, t: float, z, cfg: ODEConfig | None = None) -> complex:
    """``v_{s,t}(z)``: slices applied from the latest to the earliest."""
    _check_interval(F, s, t)
    w = as_complex(z)
    for k, lo, hi in reversed(F.pieces(s, t)):
        w = flow(F.slices[k], hi - lo, w, cfg).w
    return w


def inverse_evolve(
    F: HerglotzField,
    s: float,
    t: float,
    z,
    cfg: ODEConfig | None = None,
    family: str = "forward",
) -> complex | DomainExit:
    """Solve ``dw/dtau = phi(w, .)`` to undo an evolution.

    ``family="forward"`` returns ``w_{s,t}^{-1}(z)``: the slices are undone
    from the latest back to the earliest.  ``family="reverse"`` integrates
    ``dw/dtau = phi(w, tau)``, ``w(s) = z`` forward over ``[s, t]``, which
    inverts ``v_{s,t}``.  In both cases the elapsed time of the solve is
    ``tau - s``; when ``z`` lies outside the image the trajectory reaches
    ``Re w = 0`` and a :class:`DomainExit` with ``t_exit = s + elapsed`` is
    returned.
    """
    _check_interval(F, s, t)
    if family not in ("forward", "reverse"):
        raise DomainError(f"family must be 'forward' or 'reverse', got {family!r}")
    cfg = cfg or ODEConfig()
    w = as_complex(z)
    if w.real <= 0:
        raise DomainError("inverse_evolve needs Re z > 0")
    pieces = F.pieces(s, t)
    if family == "forward":
        pieces = pieces[::-1]
    elapsed = 0.0
    total = StepStats()
    for k, lo, hi in pieces:
        g = F.slices[k]
        res = adaptive_ode_step(lambda _tau, y, g=g: eval_gen(g, y), 0.0, hi - lo, w, cfg)
        total.steps += res.stats.steps
        total.rejected += res.stats.rejected
        total.nfev += res.stats.nfev
        if isinstance(res, DomainExit):
            return DomainExit(
                t_exit=s + elapsed + res.t_exit,
                t_lo=s + elapsed + res.t_lo,
                t_hi=s + elapsed + res.t_hi,
                y_last=res.y_last,
                reason=res.reason,
                stats=total,
            )
        w = res.y
        elapsed += hi - lo
    return w


def ef2_residual(F, s, t, u, z, cfg: ODEConfig | None = None) -> float:
    """``|w_{s,u}(z) - w_{t,u}(w_{s,t}(z))|``."""
    _check_triple(s, t, u)
    lhs = evolve(F, s, u, z, cfg)
    rhs = evolve(F, t, u, evolve(F, s, t, z, cfg), cfg)
    return abs(lhs - rhs)


def ref2_residual(F, s, t, u, z, cfg: ODEConfig | None = None) -> float:
    """``|v_{s,u}(z) - v_{s,t}(v_{t,u}(z))|``."""
    _check_triple(s, t, u)
    lhs = reverse_evolve(F, s, u, z, cfg)
    rhs = reverse_evolve(F, s, t, reverse_evolve(F, t, u, z, cfg), cfg)
    return abs(lhs - rhs)


def _check_triple(s, t, u):
    if not (s <= t <= u):
        raise DomainError(f"need s <= t <= u, got {(s, t, u)}")


def boundary_path(F: HerglotzField, require: Sequence[int] | None = None) -> BoundaryCoefficientPath:
    """Boundary coefficients at 0 of every slice.

    Slices listed in ``require`` (all by default) must have a BRFP at 0.
    """
    require = range(len(F)) if require is None else require
    cs, s2s = [], []
    for k, g in enumerate(F.slices):
        cl = classify(g)
        if k in require and not cl.has_brfp_0:
            why = f"q={g.q} > 0" if g.q > 0 else "phi'(0) is infinite"
            raise NoBRFPError(f"slice {k} has no boundary regular fixed point at 0 ({why})")
        cs.append(cl.phi_prime0)
        s2s.append(cl.phi_second0)
    return BoundaryCoefficientPath(tuple(cs), tuple(s2s))


def _active_path(F, s, t):
    pieces = F.pieces(s, t)
    path = boundary_path(F, require=[k for k, _, _ in pieces])
    return pieces, path


def brfp0_derivative(F: HerglotzField, s: float, t: float) -> float:
    """``w'_{s,t}(0) = exp(-int_s^t phi'(0, xi) d xi)``."""
    _check_interval(F, s, t)
    pieces, path = _active_path(F, s, t)
    return math.exp(-math.fsum(path.c[k] * (hi - lo) for k, lo, hi in pieces))


def _exp_mean(c: float, L: float) -> float:
    """``int_0^L e^{-c x} dx``."""
    x = c * L
    if x == 0.0:
        return L
    return -math.expm1(-x) / c


def brfp0_second_derivative(F: HerglotzField, s: float, t: float, family: str = "forward") -> float:
    """Second angular derivative at 0 of ``w_{s,t}`` (or ``v_{s,t}``).

    Forward family: ``-w'_{s,t}(0) sum_k phi''_k int_{I_k} w'_{s,xi}(0) d xi``.
    Reverse family: the same with ``v'_{xi,t}(0)`` in the integrand.  Each
    integral is a piecewise exponential and is evaluated exactly; a slice
    with ``phi''(0) = inf`` gives ``-inf``.
    """
    _check_interval(F, s, t)
    if family not in ("forward", "reverse"):
        raise DomainError(f"family must be 'forward' or 'reverse', got {family!r}")
    pieces, path = _active_path(F, s, t)
    logs = [path.c[k] * (hi - lo) for k, lo, hi in pieces]
    d1 = math.exp(-math.fsum(logs))
    terms = []
    for i, (k, lo, hi) in enumerate(pieces):
        s2 = path.s2[k]
        if s2 == 0.0:
            continue
        if math.isinf(s2):
            return -math.inf
        c = path.c[k]
        if family == "forward":
            # w'_{s,xi}(0) = e^{-C_before} e^{-c (xi - lo)}
            pre = math.fsum(logs[:i])
        else:
            # v'_{xi,t}(0) = e^{-C_after} e^{-c (hi - xi)}
            pre = math.fsum(logs[i + 1:])
        terms.append(s2 * math.exp(-pre) * _exp_mean(c, hi - lo))
    if not terms:
        return 0.0
    return -d1 * math.fsum(terms)


def chain_rule_check(F: HerglotzField, s: float, t: float, tol: float | None = None):
    """Residuals of ``w'_{s,t} = w'_{0,t}/w'_{0,s}`` and of the matching
    second-order identity at 0.

    With ``tol`` given, a :class:`DomainError` is raised if either residual
    exceeds it.
    """
    d_st = brfp0_derivative(F, s, t)
    d_0t = brfp0_derivative(F, 0.0, t)
    d_0s = brfp0_derivative(F, 0.0, s)
    r1 = abs(d_st - d_0t / d_0s)
    dd_st = brfp0_second_derivative(F, s, t)
    dd_0t = brfp0_second_derivative(F, 0.0, t)
    dd_0s = brfp0_second_derivative(F, 0.0, s)
    if math.isinf(dd_st) or math.isinf(dd_0t) or math.isinf(dd_0s):
        r2 = 0.0 if (dd_st == dd_0t == -math.inf) else math.inf
    else:
        r2 = abs(dd_st - (dd_0t - dd_0s * d_0t / d_0s) / (d_0s * d_0s))
    if tol is not None and max(r1, r2) > tol:
        raise DomainError(f"chain rule residuals ({r1}, {r2}) exceed tol={tol}")
    return r1, r2


_FD_CFG = ODEConfig(rtol=1e-13, atol=1e-16)


def finite_difference_brfp0(F: HerglotzField, s: float, t: float, h: float, cfg: ODEConfig | None = None):
    """Radial estimates of ``w'_{s,t}(0)`` and ``w''_{s,t}(0)`` from
    ``w_{s,t}`` at ``h``, ``2h`` and ``4h``.

    ``D(x) = w(x)/x`` and ``S(x) = 2 (w(x) - d1 x)/x^2`` are each extrapolated
    with two Richardson steps (removing the ``O(x)`` then the ``O(x^2)`` term).
    """
    if not h > 0:
        raise DomainError("h must be positive")
    cfg = cfg or _FD_CFG
    xs = (h, 2 * h, 4 * h)
    ws = [evolve(F, s, t, x, cfg).real for x in xs]

    def richardson(vals):
        r_h = 2 * vals[0] - vals[1]
        r_2h = 2 * vals[1] - vals[2]
        return (4 * r_h - r_2h) / 3

    d1 = richardson([w / x for w, x in zip(ws, xs)])
    d2 = richardson([2 * (w - d1 * x) / (x * x) for w, x in zip(ws, xs)])
    return d1, d2
