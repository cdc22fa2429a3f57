"""Bernstein functions ``f(z) = alpha + beta z + int (1 - e^{-l z}) rho(dl)``."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .errors import DomainError, IntegrabilityError, ParseError
from .measure import Divergent, IntegrabilityClass, JumpMeasure, Kernel, check_class, integrate_kernel, moment
from .measure import _require_keys, _num
from .numerics import QuadratureConfig, alternating_differences, as_complex

__all__ = [
    "BernsteinRepr",
    "BoundaryData",
    "evaluate",
    "deriv",
    "boundary_data",
    "julia_check",
    "rigidity_gap",
    "compose_eval",
    "is_bernstein_numeric",
    "default_grid",
]


@dataclass(frozen=True)
class BernsteinRepr:
    alpha: float = 0.0
    beta: float = 0.0
    rho: JumpMeasure = field(default_factory=JumpMeasure)
    validate: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))
        if not self.validate:
            return
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise DomainError("alpha must be finite and >= 0")
        if not (math.isfinite(self.beta) and self.beta >= 0):
            raise DomainError("beta must be finite and >= 0")
        chk = check_class(self.rho, IntegrabilityClass.BERNSTEIN)
        if not chk:
            raise IntegrabilityError(f"rho is not a Bernstein measure: {chk.witness} diverges")
        if self.alpha == 0 and self.beta == 0 and self.rho.is_empty:
            raise DomainError("the zero function is not a Bernstein function")

    @classmethod
    def identity(cls) -> "BernsteinRepr":
        return cls(0.0, 1.0)

    def __call__(self, z) -> complex:
        return evaluate(self, z)

    def __add__(self, other: "BernsteinRepr") -> "BernsteinRepr":
        return BernsteinRepr(self.alpha + other.alpha, self.beta + other.beta, self.rho + other.rho)

    def scaled(self, c: float) -> "BernsteinRepr":
        if not c > 0:
            raise DomainError("Bernstein functions form a cone: scale must be > 0")
        return BernsteinRepr(c * self.alpha, c * self.beta, self.rho.scaled(c))

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "rho": self.rho.to_json()}

    @classmethod
    def from_json(cls, data, validate: bool = True) -> "BernsteinRepr":
        _require_keys(data, {"alpha", "beta", "rho"}, set(), "Bernstein function")
        rho = JumpMeasure.from_json(data.get("rho", {}))
        try:
            return cls(_num(data.get("alpha", 0.0)), _num(data.get("beta", 0.0)), rho, validate=validate)
        except (DomainError, IntegrabilityError) as exc:
            raise ParseError(str(exc)) from exc


@dataclass(frozen=True)
class BoundaryData:
    f0: float
    fprime0: float  # +inf allowed
    fsecond0: float  # -inf allowed
    fprime_inf: float


def evaluate(f: BernsteinRepr, z, cfg: QuadratureConfig | None = None) -> complex:
    """``f(z)`` on the closed right half-plane."""
    z = as_complex(z)
    if z.real < 0:
        raise DomainError(f"Bernstein functions are evaluated on Re z >= 0, got {z}")
    val = f.alpha + f.beta * z
    if not f.rho.is_empty:
        val += integrate_kernel(f.rho, Kernel.K1, z, cfg)
    return val


def deriv(f: BernsteinRepr, z, n: int = 1, cfg: QuadratureConfig | None = None) -> complex:
    """n-th derivative by term-wise differentiation of the representation."""
    z = as_complex(z)
    if z.real <= 0:
        raise DomainError("deriv needs Re z > 0")
    if n < 1:
        raise DomainError("derivative order must be >= 1")
    if n == 1:
        base = f.beta
        lap = integrate_kernel(f.rho, Kernel.K2, z, cfg) if not f.rho.is_empty else 0j
        return base + lap
    lap = _laplace_power(f.rho, n, z, cfg)
    return (-1) ** (n + 1) * lap


def _laplace_power(m: JumpMeasure, n: int, z: complex, cfg) -> complex:
    """``int l**n e^{-l z} m(dl)`` for ``n >= 2``."""
    if m.is_empty:
        return 0j
    if n == 2:
        return integrate_kernel(m, Kernel.K3, z, cfg)
    # l^n e^{-lz} = l^2 e^{-lz} against l^{n-2} m(dl)
    from .measure import _integrate_weighted

    return _integrate_weighted(m, Kernel.K3, z, cfg, n - 2)


def boundary_data(f: BernsteinRepr) -> BoundaryData:
    m1 = moment(f.rho, 1, "all")
    m2 = moment(f.rho, 2, "all")
    return BoundaryData(f0=f.alpha, fprime0=f.beta + m1, fsecond0=-m2, fprime_inf=f.beta)


def julia_check(f: BernsteinRepr, samples: Sequence[complex]) -> tuple[float, bool]:
    """Minimum of ``Re f(z) / Re z`` over ``samples``; passes when it is at
    least ``f'(inf) = beta`` (up to 1e-9)."""
    ratios = []
    for z in samples:
        z = as_complex(z)
        if z.real <= 0:
            raise DomainError("julia_check samples must satisfy Re z > 0")
        ratios.append(evaluate(f, z).real / z.real)
    min_ratio = min(ratios)
    return min_ratio, min_ratio >= f.beta - 1e-9


def rigidity_gap(f: BernsteinRepr, z) -> float:
    """``f(0) + |(f'(0)-1) z| + |f''(0) z^2|/2 - |f(z) - z|`` (never negative)."""
    z = as_complex(z)
    bd = boundary_data(f)
    if math.isinf(bd.fprime0) or math.isinf(bd.fsecond0):
        raise DomainError("rigidity_gap needs finite f'(0) and f''(0)")
    bound = bd.f0 + abs((bd.fprime0 - 1.0) * z) + 0.5 * abs(bd.fsecond0 * z * z)
    return bound - abs(evaluate(f, z) - z)


def compose_eval(outer: BernsteinRepr, inner: BernsteinRepr, z) -> complex:
    return evaluate(outer, evaluate(inner, z))


def default_grid(lo: float = 0.1, hi: float = 10.0, n: int = 12, rel_step: float = 0.25):
    """Geometric abscissae ``x0`` in ``[lo, hi]`` with steps ``h = rel_step * x0``."""
    ratio = (hi / lo) ** (1.0 / max(n - 1, 1))
    return [(lo * ratio**i, rel_step * lo * ratio**i) for i in range(n)]


def is_bernstein_numeric(
    g: Callable[[float], float],
    grid: Sequence[tuple[float, float]] | None = None,
    depth: int = 5,
) -> tuple[bool, float]:
    """Discrete test that ``g >= 0`` and ``g'`` is completely monotone.

    ``g'`` is estimated by central differences of half-width ``h/2``, which
    turns ``(-1)^k Delta_h^k g'(x0)`` into ``-(-1)^(k+1) Delta_h^(k+1) g(x0-h/2)/h``.
    Returns ``(passed, worst_violation)`` where ``worst_violation <= 0`` is the
    most negative tested quantity (0 if none is negative).
    """
    grid = default_grid() if grid is None else grid
    worst = 0.0
    passed = True
    for x0, h in grid:
        if not x0 - 0.5 * h > 0:
            raise DomainError(f"grid point x0={x0}, h={h} reaches x <= 0")
        g0 = float(_real(g(x0)))
        tol = 1e-6 * (abs(g0) + 1.0)
        diffs = alternating_differences(lambda x: _real(g(x)), x0 - 0.5 * h, h, depth + 1)
        checks = [g0] + [-diffs[k + 1] / h for k in range(depth + 1)]
        lowest = min(checks)
        worst = min(worst, lowest)
        if lowest < -tol:
            passed = False
    return passed, worst


def _real(v) -> float:
    if isinstance(v, complex):
        return v.real
    return float(v)
