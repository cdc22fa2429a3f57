"""Bernstein generators (branching mechanisms) in Silverstein form

    phi(z) = -q + a z + b z^2 + int (e^{-z x} - 1 + z x 1_(0,1)(x)) pi(dx),

together with the Le Gall form (BRFP at 0) and the subordinator form (BRFP at
infinity), boundary classification and the Berkson-Porta factor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from scipy.optimize import brentq

from . import _backend
from .bernstein import BernsteinRepr, _real
from .errors import DomainError, IntegrabilityError, NoBRFPError, ParseError
from .measure import (
    IntegrabilityClass,
    JumpMeasure,
    Kernel,
    _num,
    _require_keys,
    check_class,
    integrate_kernel,
    moment,
)
from .numerics import QuadratureConfig, alternating_differences, as_complex

__all__ = [
    "GeneratorRepr",
    "LeGallRepr",
    "SubordinatorGenRepr",
    "DWPoint",
    "GeneratorClassification",
    "eval_gen",
    "from_bernstein",
    "classify",
    "to_legall",
    "to_subordinator_form",
    "from_legall",
    "from_subordinator_form",
    "cone_add",
    "cone_scale",
    "check_generator_numeric",
    "berkson_porta_P",
    "generator_from_json",
]


@dataclass(frozen=True)
class GeneratorRepr:
    q: float = 0.0
    a: float = 0.0
    b: float = 0.0
    pi: JumpMeasure = field(default_factory=JumpMeasure)
    validate: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        for name in ("q", "a", "b"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not self.validate:
            return
        if not all(math.isfinite(v) for v in (self.q, self.a, self.b)):
            raise DomainError("generator coefficients must be finite")
        if self.q < 0:
            raise DomainError(f"killing rate q={self.q} must be >= 0")
        if self.b < 0:
            raise DomainError(f"quadratic coefficient b={self.b} must be >= 0")
        chk = check_class(self.pi, IntegrabilityClass.GENERATOR)
        if not chk:
            raise IntegrabilityError(f"pi is not a Levy measure: {chk.witness} diverges")

    @classmethod
    def zero(cls) -> "GeneratorRepr":
        return cls()

    def __call__(self, z) -> complex:
        return eval_gen(self, z)

    def __add__(self, other: "GeneratorRepr") -> "GeneratorRepr":
        return cone_add(self, other)

    @property
    def is_polynomial(self) -> bool:
        return self.pi.is_empty

    def to_json(self) -> dict:
        return {"q": self.q, "a": self.a, "b": self.b, "pi": self.pi.to_json()}


@dataclass(frozen=True)
class LeGallRepr:
    """``phi(z) = c z + b z^2 + int (e^{-zx} - 1 + zx) pi(dx)``, ``c = phi'(0)``."""

    c: float
    b: float = 0.0
    pi: JumpMeasure = field(default_factory=JumpMeasure)

    def __post_init__(self):
        if self.b < 0:
            raise DomainError("b must be >= 0")
        chk = check_class(self.pi, IntegrabilityClass.BRFP0)
        if not chk:
            raise IntegrabilityError(f"Le Gall form needs int min(x^2, x) pi < inf: {chk.witness} diverges")

    def __call__(self, z) -> complex:
        z = as_complex(z)
        val = self.c * z + self.b * z * z
        if not self.pi.is_empty:
            val += integrate_kernel(self.pi, Kernel.K5, z)
        return val

    def to_json(self) -> dict:
        return {"form": "legall", "c": self.c, "b": self.b, "pi": self.pi.to_json()}


@dataclass(frozen=True)
class SubordinatorGenRepr:
    """``phi(z) = -q + c z - int (1 - e^{-zx}) pi(dx)``, ``c = phi'(inf)``."""

    q: float
    c: float
    pi: JumpMeasure = field(default_factory=JumpMeasure)

    def __post_init__(self):
        if self.q < 0:
            raise DomainError("q must be >= 0")
        chk = check_class(self.pi, IntegrabilityClass.BERNSTEIN)
        if not chk:
            raise IntegrabilityError(f"subordinator form needs int min(x, 1) pi < inf: {chk.witness} diverges")

    def __call__(self, z) -> complex:
        z = as_complex(z)
        val = -self.q + self.c * z
        if not self.pi.is_empty:
            val -= integrate_kernel(self.pi, Kernel.K1, z)
        return val

    def to_json(self) -> dict:
        return {"form": "subordinator", "q": self.q, "c": self.c, "pi": self.pi.to_json()}


@dataclass(frozen=True)
class DWPoint:
    """Denjoy-Wolff point: ``kind`` in {zero, infinity, interior, undetermined}."""

    kind: str
    x: float | None = None

    def __str__(self):
        return self.kind if self.x is None else f"{self.kind}({self.x!r})"

    @classmethod
    def parse(cls, tau) -> "DWPoint":
        if isinstance(tau, DWPoint):
            return tau
        if tau in ("zero", 0, 0.0):
            return cls("zero")
        if tau in ("infinity", "inf", math.inf):
            return cls("infinity")
        if isinstance(tau, (int, float)) and tau > 0:
            return cls("interior", float(tau))
        raise DomainError(f"cannot interpret {tau!r} as a Denjoy-Wolff point")


@dataclass(frozen=True)
class GeneratorClassification:
    phi0: float
    phi_prime0: float
    phi_second0: float
    phi_prime_inf: float
    phi_second_inf: float
    has_brfp_0: bool
    has_brfp_inf: bool
    dw_point: DWPoint

    def to_json(self) -> dict:
        d = {
            "phi0": self.phi0,
            "phi_prime0": _json_float(self.phi_prime0),
            "phi_second0": _json_float(self.phi_second0),
            "phi_prime_inf": _json_float(self.phi_prime_inf),
            "phi_second_inf": self.phi_second_inf,
            "has_brfp_0": self.has_brfp_0,
            "has_brfp_inf": self.has_brfp_inf,
            "dw_point": self.dw_point.kind,
        }
        if self.dw_point.x is not None:
            d["dw_x"] = self.dw_point.x
        return d


def _json_float(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def eval_gen(g: GeneratorRepr, z, cfg: QuadratureConfig | None = None) -> complex:
    z = as_complex(z)
    if g.pi.is_atomic:
        xs, ws = g.pi.atom_locations, g.pi.atom_weights
        if xs.size == 0:
            return -g.q + g.a * z + g.b * z * z
        if z.real < 0:
            raise DomainError(f"generators are evaluated on Re z >= 0, got {z}")
        return _backend.generator_atoms(g.q, g.a, g.b, xs, ws, z)
    if z.real < 0:
        raise DomainError(f"generators are evaluated on Re z >= 0, got {z}")
    val = -g.q + g.a * z + g.b * z * z
    return val + integrate_kernel(g.pi, Kernel.K4, z, cfg)


def from_bernstein(f: BernsteinRepr) -> GeneratorRepr:
    """Silverstein form of ``-f``."""
    return GeneratorRepr(
        q=f.alpha, a=-f.beta - moment(f.rho, 1, "near_zero"), b=0.0, pi=f.rho
    )


def _safe_sub(x: float, y: float) -> float:
    return -math.inf if math.isinf(y) else x - y


def classify(g: GeneratorRepr) -> GeneratorClassification:
    tail1 = moment(g.pi, 1, "tail")
    near1 = moment(g.pi, 1, "near_zero")
    phi_prime0 = _safe_sub(g.a, tail1)
    phi_second0 = 2 * g.b + moment(g.pi, 2, "all")
    phi_prime_inf = math.inf if (g.b > 0 or math.isinf(near1)) else g.a + near1
    has0 = g.q == 0 and math.isfinite(phi_prime0)
    has_inf = math.isfinite(phi_prime_inf)

    if has0 and phi_prime0 >= 0:
        dw = DWPoint("zero")
    elif has_inf and phi_prime_inf <= 0:
        dw = DWPoint("infinity")
    else:
        root = _interior_root(g)
        dw = DWPoint("interior", root) if root is not None else DWPoint("undetermined")

    return GeneratorClassification(
        phi0=-g.q if g.q else 0.0,
        phi_prime0=phi_prime0,
        phi_second0=phi_second0,
        phi_prime_inf=phi_prime_inf,
        phi_second_inf=2 * g.b,
        has_brfp_0=has0,
        has_brfp_inf=has_inf,
        dw_point=dw,
    )


def _interior_root(g: GeneratorRepr) -> float | None:
    """Sign change of the convex real restriction of ``phi`` on ``(0, inf)``."""
    phi = lambda x: eval_gen(g, x).real  # noqa: E731
    x_pos = 1.0
    while phi(x_pos) <= 0:
        x_pos *= 2.0
        if x_pos > 1e12:
            return None
    x_neg = x_pos
    while phi(x_neg) >= 0:
        x_neg *= 0.5
        if x_neg < 1e-12:
            return None
    return brentq(phi, x_neg, x_pos, xtol=1e-14, rtol=1e-15, maxiter=200)


def to_legall(g: GeneratorRepr) -> LeGallRepr:
    if g.q > 0:
        raise NoBRFPError(f"phi(0) = -{g.q} != 0: no boundary regular fixed point at 0")
    tail1 = moment(g.pi, 1, "tail")
    if math.isinf(tail1):
        raise IntegrabilityError("int_[1,inf) x pi(dx) diverges: min(x^2, x) integrability fails")
    return LeGallRepr(c=g.a - tail1, b=g.b, pi=g.pi)


def from_legall(lg: LeGallRepr) -> GeneratorRepr:
    return GeneratorRepr(q=0.0, a=lg.c + moment(lg.pi, 1, "tail"), b=lg.b, pi=lg.pi)


def to_subordinator_form(g: GeneratorRepr) -> SubordinatorGenRepr:
    if g.b > 0:
        raise NoBRFPError("b > 0 forces phi'(inf) = inf: no boundary regular fixed point at infinity")
    near1 = moment(g.pi, 1, "near_zero")
    if math.isinf(near1):
        raise NoBRFPError("int_(0,1) x pi(dx) diverges: no boundary regular fixed point at infinity")
    return SubordinatorGenRepr(q=g.q, c=g.a + near1, pi=g.pi)


def from_subordinator_form(sg: SubordinatorGenRepr) -> GeneratorRepr:
    return GeneratorRepr(q=sg.q, a=sg.c - moment(sg.pi, 1, "near_zero"), b=0.0, pi=sg.pi)


def cone_add(g1: GeneratorRepr, g2: GeneratorRepr) -> GeneratorRepr:
    return GeneratorRepr(g1.q + g2.q, g1.a + g2.a, g1.b + g2.b, g1.pi + g2.pi)


def cone_scale(g: GeneratorRepr, c: float) -> GeneratorRepr:
    if not (math.isfinite(c) and c >= 0):
        raise DomainError(f"cone scale must be finite and >= 0, got {c}")
    return GeneratorRepr(c * g.q, c * g.a, c * g.b, g.pi.scaled(c))


def default_generator_grid(lo: float = 0.05, hi: float = 20.0, n: int = 12, rel_step: float = 0.2):
    ratio = (hi / lo) ** (1.0 / max(n - 1, 1))
    return [(lo * ratio**i, rel_step * lo * ratio**i) for i in range(n)]


def check_generator_numeric(
    phi: Callable[[float], complex | float],
    grid: Sequence[tuple[float, float]] | None = None,
    depth: int = 4,
) -> tuple[bool, dict]:
    """Numeric test of the three defining conditions of a Bernstein generator.

    The report maps each category (``real_on_axis``, ``phi0_nonpositive``,
    ``phi2_completely_monotone``) to ``{"passed": bool, "worst": float}``;
    ``worst`` is the largest violation found (0.0 when clean).
    """
    grid = default_generator_grid() if grid is None else grid
    report = {}

    worst_im = 0.0
    ok_im = True
    for x0, _h in grid:
        v = phi(x0)
        im = abs(v.imag) if isinstance(v, complex) else 0.0
        tol = 1e-6 * (abs(_real(v)) + 1.0)
        worst_im = max(worst_im, im)
        ok_im &= im <= tol
    report["real_on_axis"] = {"passed": ok_im, "worst": worst_im}

    # phi(0+) from phi(1e-6) by one linear extrapolation step; testing
    # phi(1e-6) itself would flag generators with a large linear term
    x_small = 1e-6
    p1 = _real(phi(x_small))
    p2 = _real(phi(2 * x_small))
    excess = max(2 * p1 - p2, 0.0)
    report["phi0_nonpositive"] = {"passed": excess <= 1e-6 * (abs(p1) + 1.0), "worst": excess}

    worst_cm = 0.0
    ok_cm = True
    for x0, h in grid:
        if not x0 - h > 0:
            raise DomainError(f"grid point x0={x0}, h={h} reaches x <= 0")
        tol = 1e-6 * (abs(_real(phi(x0))) + 1.0)
        diffs = alternating_differences(lambda x: _real(phi(x)), x0 - h, h, depth + 2)
        # (-1)^k Delta^k phi''(x0) ~ (-1)^(k+2) Delta^(k+2) phi(x0 - h) / h^2
        vals = [diffs[k + 2] / (h * h) for k in range(depth + 1)]
        lowest = min(vals)
        if lowest < 0:
            worst_cm = max(worst_cm, -lowest)
        ok_cm &= lowest >= -tol
    report["phi2_completely_monotone"] = {"passed": ok_cm, "worst": worst_cm}

    passed = all(r["passed"] for r in report.values())
    return passed, report


def berkson_porta_P(g: GeneratorRepr, tau, samples: Sequence[complex]):
    """Berkson-Porta factor ``P`` with ``Re P >= 0`` at the true DW-point.

    ``P(z) = phi(z) / ((z - tau)(z + conj(tau)))`` for finite ``tau`` and
    ``P = -phi`` for ``tau = infinity``.  Returns ``(values, min_re)``.
    """
    tau = DWPoint.parse(tau)
    if tau.kind == "undetermined":
        raise DomainError("Berkson-Porta factor needs a determined DW point")
    tval = 0.0 if tau.kind == "zero" else tau.x
    values = []
    for z in samples:
        z = as_complex(z)
        if z.real <= 0:
            raise DomainError("samples must lie in Re z > 0")
        phi = eval_gen(g, z)
        if tau.kind == "infinity":
            values.append(-phi)
            continue
        if z == tval:
            raise DomainError("sample coincides with the DW point")
        values.append(phi / ((z - tval) * (z + complex(tval).conjugate())))
    return values, min(v.real for v in values)


def generator_from_json(data, validate: bool = True):
    """Parse a generator in Silverstein (default), Le Gall or subordinator form.

    Le Gall and subordinator forms are converted to Silverstein form.
    """
    if not isinstance(data, dict):
        raise ParseError("generator: expected a JSON object")
    form = data.get("form", "silverstein")
    try:
        if form == "silverstein":
            _require_keys(data, {"form", "q", "a", "b", "pi"}, set(), "generator")
            pi = JumpMeasure.from_json(data.get("pi", {}))
            return GeneratorRepr(
                _num(data.get("q", 0.0)), _num(data.get("a", 0.0)), _num(data.get("b", 0.0)), pi,
                validate=validate,
            )
        if form == "legall":
            _require_keys(data, {"form", "c", "b", "pi"}, {"c"}, "Le Gall generator")
            pi = JumpMeasure.from_json(data.get("pi", {}))
            return from_legall(LeGallRepr(_num(data["c"]), _num(data.get("b", 0.0)), pi))
        if form == "subordinator":
            _require_keys(data, {"form", "q", "c", "pi"}, {"c"}, "subordinator generator")
            pi = JumpMeasure.from_json(data.get("pi", {}))
            return from_subordinator_form(SubordinatorGenRepr(_num(data.get("q", 0.0)), _num(data["c"]), pi))
    except (DomainError, IntegrabilityError) as exc:
        raise ParseError(str(exc)) from exc
    raise ParseError(f"unknown generator form {form!r}")
