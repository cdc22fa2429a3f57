"""Non-negative jump measures on ``(0, inf)``: finite atoms plus density panels.

The five kernels integrated against a measure ``m`` are

=====  ===================================
``K1``  ``1 - exp(-l z)``
``K2``  ``l exp(-l z)``
``K3``  ``l**2 exp(-l z)``
``K4``  ``exp(-l z) - 1 + l z 1_(0,1)(l)``
``K5``  ``exp(-l z) - 1 + l z``
=====  ===================================

The indicator in ``K4`` is the open interval, so an atom sitting exactly at
``l = 1`` gets indicator 0.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import special

from . import _backend
from .errors import DomainError, ParseError, QuadratureError
from .numerics import QuadratureConfig, as_complex, gauss_legendre

__all__ = [
    "Kernel",
    "IntegrabilityClass",
    "DensityPanel",
    "JumpMeasure",
    "Divergent",
    "ClassCheck",
    "power_law",
    "exponential",
    "tabulated",
    "integrate_kernel",
    "check_class",
    "moment",
]


class Kernel(enum.IntEnum):
    K1 = 1
    K2 = 2
    K3 = 3
    K4 = 4
    K5 = 5


class IntegrabilityClass(str, enum.Enum):
    BERNSTEIN = "bernstein"  # int min(l, 1) m(dl) < inf
    GENERATOR = "generator"  # int min(l^2, 1) m(dl) < inf
    BRFP0 = "brfp0"  # int min(l^2, l) m(dl) < inf


@dataclass(frozen=True)
class Divergent:
    """Returned instead of a number when a required moment is infinite."""

    moment: str

    def __bool__(self):
        return False


@dataclass(frozen=True)
class ClassCheck:
    holds: bool
    witness: str | None = None

    def __bool__(self):
        return self.holds


@dataclass(frozen=True)
class DensityPanel:
    """A density on ``[a, b]``.

    ``kind`` is ``"power_law"`` (``c * l**p``), ``"exponential"``
    (``c * exp(-r l)``) or ``"tabulated"`` (piecewise-linear through
    ``nodes``/``values``; ``a``/``b`` are the first/last node).
    """

    kind: str
    a: float
    b: float
    c: float = 1.0
    p: float = 0.0
    r: float = 0.0
    nodes: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in ("power_law", "exponential", "tabulated"):
            raise DomainError(f"unknown panel kind {self.kind!r}")
        if not (math.isfinite(self.a) and self.a >= 0):
            raise DomainError(f"panel lower end a={self.a} must be finite and >= 0")
        if not self.b > self.a:
            raise DomainError(f"panel support [{self.a}, {self.b}] is empty")
        if not (math.isfinite(self.c) and self.c >= 0):
            raise DomainError("panel scale c must be finite and >= 0")
        if self.kind == "power_law":
            if not math.isfinite(self.p):
                raise DomainError("power_law exponent must be finite")
            if math.isinf(self.b) and not self.p < -1:
                raise DomainError("unbounded power_law panel needs p < -1")
        elif self.kind == "exponential":
            if not (math.isfinite(self.r) and self.r > 0) and math.isinf(self.b):
                raise DomainError("unbounded exponential panel needs rate r > 0")
            if not math.isfinite(self.r):
                raise DomainError("exponential rate must be finite")
        else:
            if len(self.nodes) < 2 or len(self.nodes) != len(self.values):
                raise DomainError("tabulated panel needs >= 2 nodes and matching values")
            if any(v < 0 or not math.isfinite(v) for v in self.values):
                raise DomainError("tabulated values must be finite and non-negative")
            if any(x1 <= x0 for x0, x1 in zip(self.nodes, self.nodes[1:])):
                raise DomainError("tabulated nodes must be strictly increasing")

    def density(self, lam):
        lam = np.asarray(lam, dtype=float)
        if self.kind == "power_law":
            return self.c * lam**self.p
        if self.kind == "exponential":
            return self.c * np.exp(-self.r * lam)
        return np.interp(lam, self.nodes, self.values)

    def scaled(self, factor: float) -> "DensityPanel":
        if self.kind == "tabulated":
            return DensityPanel(
                "tabulated", self.a, self.b,
                nodes=self.nodes, values=tuple(factor * v for v in self.values),
            )
        return DensityPanel(self.kind, self.a, self.b, c=factor * self.c, p=self.p, r=self.r)

    def to_json(self) -> dict:
        b = "inf" if math.isinf(self.b) else self.b
        if self.kind == "power_law":
            return {"kind": "power_law", "p": self.p, "c": self.c, "a": self.a, "b": b}
        if self.kind == "exponential":
            return {"kind": "exponential", "r": self.r, "c": self.c, "a": self.a, "b": b}
        return {"kind": "tabulated", "nodes": list(self.nodes), "values": list(self.values)}


def power_law(p: float, c: float = 1.0, a: float = 0.0, b: float = math.inf) -> DensityPanel:
    return DensityPanel("power_law", float(a), float(b), c=float(c), p=float(p))


def exponential(r: float, c: float = 1.0, a: float = 0.0, b: float = math.inf) -> DensityPanel:
    return DensityPanel("exponential", float(a), float(b), c=float(c), r=float(r))


def tabulated(nodes: Sequence[float], values: Sequence[float]) -> DensityPanel:
    nodes = tuple(float(x) for x in nodes)
    values = tuple(float(v) for v in values)
    if len(nodes) < 2:
        raise DomainError("tabulated panel needs >= 2 nodes")
    return DensityPanel("tabulated", nodes[0], nodes[-1], nodes=nodes, values=values)


class JumpMeasure:
    """Immutable measure: sorted, merged atoms plus density panels."""

    __slots__ = ("_xs", "_ws", "panels")

    def __init__(self, atoms: Iterable[tuple[float, float]] = (), panels: Iterable[DensityPanel] = ()):
        merged: dict[float, float] = {}
        for x, w in atoms:
            x = float(x)
            w = float(w)
            if not (math.isfinite(x) and x > 0):
                raise DomainError(f"atom location {x} must be finite and > 0")
            if not (math.isfinite(w) and w >= 0):
                raise DomainError(f"atom weight {w} must be finite and >= 0")
            if w > 0:
                merged[x] = merged.get(x, 0.0) + w
        xs = sorted(merged)
        self._xs = np.array(xs, dtype=float)
        self._ws = np.array([merged[x] for x in xs], dtype=float)
        self._xs.setflags(write=False)
        self._ws.setflags(write=False)
        self.panels = tuple(panels)
        for pnl in self.panels:
            if not isinstance(pnl, DensityPanel):
                raise DomainError(f"not a DensityPanel: {pnl!r}")

    @classmethod
    def delta(cls, x: float, w: float = 1.0) -> "JumpMeasure":
        return cls([(x, w)])

    @property
    def atoms(self) -> tuple[tuple[float, float], ...]:
        return tuple(zip(self._xs.tolist(), self._ws.tolist()))

    @property
    def atom_locations(self) -> np.ndarray:
        return self._xs

    @property
    def atom_weights(self) -> np.ndarray:
        return self._ws

    @property
    def is_empty(self) -> bool:
        return self._xs.size == 0 and all(
            not any(p.values) if p.kind == "tabulated" else p.c == 0 for p in self.panels
        )

    @property
    def is_atomic(self) -> bool:
        return not self.panels

    def scaled(self, factor: float) -> "JumpMeasure":
        if not (math.isfinite(factor) and factor >= 0):
            raise DomainError("measure scale factor must be finite and >= 0")
        return JumpMeasure(
            zip(self._xs, self._ws * factor), (p.scaled(factor) for p in self.panels)
        )

    def __add__(self, other: "JumpMeasure") -> "JumpMeasure":
        return JumpMeasure(self.atoms + other.atoms, self.panels + other.panels)

    def __eq__(self, other):
        if not isinstance(other, JumpMeasure):
            return NotImplemented
        return self.atoms == other.atoms and self.panels == other.panels

    def __hash__(self):
        return hash((self.atoms, self.panels))

    def __repr__(self):
        return f"JumpMeasure(atoms={list(self.atoms)!r}, panels={list(self.panels)!r})"

    def to_json(self) -> dict:
        return {
            "atoms": [{"x": x, "w": w} for x, w in self.atoms],
            "panels": [p.to_json() for p in self.panels],
        }

    @classmethod
    def from_json(cls, data) -> "JumpMeasure":
        _require_keys(data, {"atoms", "panels"}, set(), "measure")
        atoms = []
        for item in data.get("atoms", []):
            _require_keys(item, {"x", "w"}, {"x", "w"}, "atom")
            atoms.append((_num(item["x"]), _num(item["w"])))
        panels = [_panel_from_json(p) for p in data.get("panels", [])]
        try:
            return cls(atoms, panels)
        except DomainError as exc:
            raise ParseError(str(exc)) from exc


def _num(v, allow_inf=False) -> float:
    if isinstance(v, bool):
        raise ParseError(f"expected a number, got {v!r}")
    if allow_inf and v == "inf":
        return math.inf
    if not isinstance(v, (int, float)):
        raise ParseError(f"expected a number, got {v!r}")
    return float(v)


def _require_keys(data, allowed: set, required: set, what: str):
    if not isinstance(data, dict):
        raise ParseError(f"{what}: expected a JSON object")
    unknown = set(data) - allowed
    if unknown:
        raise ParseError(f"{what}: unknown field(s) {sorted(unknown)}")
    missing = required - set(data)
    if missing:
        raise ParseError(f"{what}: missing field(s) {sorted(missing)}")


def _panel_from_json(d) -> DensityPanel:
    if not isinstance(d, dict) or "kind" not in d:
        raise ParseError("panel: expected an object with a 'kind' field")
    kind = d["kind"]
    try:
        if kind == "power_law":
            _require_keys(d, {"kind", "p", "c", "a", "b"}, {"p"}, "power_law panel")
            return power_law(
                _num(d["p"]), _num(d.get("c", 1.0)), _num(d.get("a", 0.0)),
                _num(d.get("b", "inf"), allow_inf=True),
            )
        if kind == "exponential":
            _require_keys(d, {"kind", "r", "c", "a", "b"}, {"r"}, "exponential panel")
            return exponential(
                _num(d["r"]), _num(d.get("c", 1.0)), _num(d.get("a", 0.0)),
                _num(d.get("b", "inf"), allow_inf=True),
            )
        if kind == "tabulated":
            _require_keys(d, {"kind", "nodes", "values"}, {"nodes", "values"}, "tabulated panel")
            return tabulated([_num(x) for x in d["nodes"]], [_num(v) for v in d["values"]])
    except DomainError as exc:
        raise ParseError(str(exc)) from exc
    raise ParseError(f"unknown panel kind {kind!r}")


# ---------------------------------------------------------------------------
# moments

_REGIONS = {"near_zero": (0.0, 1.0), "tail": (1.0, math.inf), "all": (0.0, math.inf)}


def _panel_moment(pnl: DensityPanel, k: int, lo: float, hi: float) -> float:
    """``int_[lo,hi] l**k pnl(dl)`` (inf if divergent)."""
    A = max(lo, pnl.a)
    B = min(hi, pnl.b)
    if not B > A or pnl.c == 0 and pnl.kind != "tabulated":
        return 0.0
    if pnl.kind == "power_law":
        s = pnl.p + k + 1
        if A == 0.0 and s <= 0:
            return math.inf
        if math.isinf(B) and s >= 0:
            return math.inf
        if s == 0:
            return pnl.c * math.log(B / A)
        top = 0.0 if math.isinf(B) else B**s
        bot = 0.0 if A == 0.0 else A**s
        return pnl.c * (top - bot) / s
    if pnl.kind == "exponential":
        r = pnl.r
        if r == 0:
            return pnl.c * (B ** (k + 1) - A ** (k + 1)) / (k + 1)
        g = math.gamma(k + 1) / r ** (k + 1)
        qa = special.gammaincc(k + 1, r * A)
        qb = 0.0 if math.isinf(B) else special.gammaincc(k + 1, r * B)
        return pnl.c * g * (qa - qb)
    # piecewise linear density times l^k: 4-point Gauss is exact
    x, w = gauss_legendre(4)
    nodes = np.asarray(pnl.nodes)
    cuts = np.unique(np.concatenate([[A, B], nodes[(nodes > A) & (nodes < B)]]))
    total = 0.0
    for u, v in zip(cuts[:-1], cuts[1:]):
        lam = 0.5 * (v - u) * x + 0.5 * (u + v)
        total += 0.5 * (v - u) * float(np.dot(w, lam**k * pnl.density(lam)))
    return total


def _atom_moment(m: JumpMeasure, k: int, lo: float, hi: float, hi_closed: bool = False) -> float:
    xs, ws = m.atom_locations, m.atom_weights
    if lo == 0.0:
        mask = (xs < hi) if not hi_closed else (xs <= hi)
    else:
        mask = (xs >= lo) & (xs < hi)
    return math.fsum((ws[mask] * xs[mask] ** k).tolist())


def moment(m: JumpMeasure, power: int, region: str = "all") -> float:
    """``int_region l**power m(dl)`` with ``near_zero = (0, 1)``,
    ``tail = [1, inf)``; ``math.inf`` when divergent."""
    if power not in (0, 1, 2):
        raise DomainError("moment power must be 0, 1 or 2")
    try:
        lo, hi = _REGIONS[region]
    except KeyError:
        raise DomainError(f"unknown region {region!r}") from None
    total = _atom_moment(m, power, lo, hi)
    for pnl in m.panels:
        total += _panel_moment(pnl, power, lo, hi)
    return total


_CLASS_PARTS = {
    IntegrabilityClass.BERNSTEIN: ((1, "near_zero", "first moment near 0"), (0, "tail", "mass of the tail [1, inf)")),
    IntegrabilityClass.GENERATOR: ((2, "near_zero", "second moment near 0"), (0, "tail", "mass of the tail [1, inf)")),
    IntegrabilityClass.BRFP0: ((2, "near_zero", "second moment near 0"), (1, "tail", "first moment of the tail [1, inf)")),
}


def check_class(m: JumpMeasure, cls) -> ClassCheck:
    cls = IntegrabilityClass(cls)
    for power, region, label in _CLASS_PARTS[cls]:
        if math.isinf(moment(m, power, region)):
            return ClassCheck(False, label)
    return ClassCheck(True)


# ---------------------------------------------------------------------------
# kernel quadrature

# small-l behaviour |K(l, z)| <= A l^order, used for divergence checks
_NEAR_ZERO_ORDER = {1: 1, 2: 1, 3: 2, 4: 2, 5: 2}
_NEAR_ZERO_LABEL = {1: "first moment near 0", 2: "first moment near 0", 3: "second moment near 0",
                    4: "second moment near 0", 5: "second moment near 0"}
# large-l polynomial part of the kernel: list of (coefficient factory, power)
_TAIL_LABEL = {1: "mass of the tail [1, inf)", 4: "mass of the tail [1, inf)",
               5: "first moment of the tail [1, inf)"}


def _series_coefficients(code: int, z: complex, nterms: int = 24):
    """``K(l, z) = sum_j coef_j l**j`` for ``l < 1`` as (coef, j) pairs."""
    out = []
    term = 1.0 + 0j  # (-z)^n / n!
    for n in range(nterms):
        if n > 0:
            term *= -z / n
        if code == 1 and n >= 1:
            out.append((-term, n))
        elif code == 2:
            out.append((term, n + 1))
        elif code == 3:
            out.append((term, n + 2))
        elif code in (4, 5) and n >= 2:
            out.append((term, n))
    return out


def _power_law_series(pnl: DensityPanel, code: int, z: complex, A: float, B: float, extra: int = 0) -> complex:
    """Exact term-by-term integral of the kernel series over ``[A, B]``."""
    total = 0j
    for coef, j in _series_coefficients(code, z):
        s = pnl.p + j + 1 + extra
        if s == 0:
            piece = math.log(B / A)
        else:
            piece = (B**s - (A**s if A > 0 else 0.0)) / s
        contrib = coef * pnl.c * piece
        total += contrib
        if abs(contrib) <= 1e-18 * max(abs(total), 1e-300) and j > 4:
            break
    return total


def _decade_cuts(lo: float, hi: float, extra=()) -> list[float]:
    cuts = {lo, hi}
    if lo > 0:
        k = math.floor(math.log10(lo)) + 1
        while 10.0**k < hi:
            cuts.add(10.0**k)
            k += 1
    for e in extra:
        if lo < e < hi:
            cuts.add(e)
    return sorted(cuts)


def _subdivide(cuts, z: complex):
    """Split intervals so each spans at most a few oscillations/decay lengths."""
    az = abs(z)
    out = []
    for u, v in zip(cuts[:-1], cuts[1:]):
        n = max(1, math.ceil(az * (v - u) / 4.0))
        if n == 1:
            out.append((u, v, False))
        else:
            edges = np.linspace(u, v, n + 1)
            out.extend((float(e0), float(e1), True) for e0, e1 in zip(edges[:-1], edges[1:]))
    return out


def _gl_sum(pnl: DensityPanel, code: int, z: complex, intervals, order: int, log_var: bool,
            extra: int = 0) -> complex:
    """Gauss-Legendre on every interval, in ``log l`` or linear ``l``."""
    if not intervals:
        return 0j
    x, w = gauss_legendre(order)
    nodes = []
    weights = []
    for u, v, linear in intervals:
        if log_var and not linear and u > 0:
            lu, lv = math.log(u), math.log(v)
            t = 0.5 * (lv - lu) * x + 0.5 * (lu + lv)
            lam = np.exp(t)
            jac = 0.5 * (lv - lu) * lam
        else:
            lam = 0.5 * (v - u) * x + 0.5 * (u + v)
            jac = np.full_like(lam, 0.5 * (v - u))
        nodes.append(lam)
        dens = pnl.density(lam) if not extra else pnl.density(lam) * lam**extra
        weights.append(w * jac * dens)
    return _backend.kernel_sum(code, np.concatenate(nodes), np.concatenate(weights), z)


def _tail_poly(pnl: DensityPanel, code: int, z: complex, L: float) -> complex:
    """Integral of the non-decaying part of the kernel over ``[L, inf)``, ``L >= 1``."""
    if code in (2, 3):
        return 0j
    c, p = pnl.c, pnl.p
    if pnl.kind == "power_law":
        m0 = c * L ** (p + 1) / (-(p + 1))
        if code == 1:
            return complex(m0)
        if code == 4:
            return complex(-m0)
        m1 = c * L ** (p + 2) / (-(p + 2))
        return -m0 + z * m1
    r = pnl.r
    e = math.exp(-r * L)
    m0 = c * e / r
    if code == 1:
        return complex(m0)
    if code == 4:
        return complex(-m0)
    m1 = c * e * (L / r + 1 / r**2)
    return -m0 + z * m1


def _tail_exp_power_law(pnl: DensityPanel, code: int, z: complex, L: float, extra: int = 0) -> complex:
    """``int_L^inf sign * l**j exp(-l z) c l**p dl`` via the incomplete gamma."""
    import mpmath

    j = {1: 0, 2: 1, 3: 2, 4: 0, 5: 0}[code]
    sign = -1.0 if code == 1 else 1.0
    s = pnl.p + j + 1 + extra
    val = mpmath.gammainc(s, a=L * z) * mpmath.power(z, -s)
    return sign * pnl.c * complex(val)


def _integrate_panel(pnl: DensityPanel, code: int, z: complex, cfg: QuadratureConfig, extra: int = 0):
    if pnl.kind != "tabulated" and pnl.c == 0:
        return 0j
    order = cfg.panel_order
    rz = z.real

    if pnl.kind == "tabulated":
        cuts = _decade_cuts(pnl.a, pnl.b, extra=tuple(pnl.nodes) + (1.0,)) if pnl.a > 0 else \
            sorted(set(pnl.nodes) | ({1.0} if pnl.a < 1.0 < pnl.b else set()))
        intervals = [(u, v, True) for u, v, _ in _subdivide(cuts, z)]
        if len(intervals) > cfg.max_panels:
            raise QuadratureError("tabulated panel needs more than max_panels subpanels")
        return _gl_sum(pnl, code, z, intervals, order, log_var=False, extra=extra)

    total = 0j
    lo = pnl.a
    # exact series near the origin for power laws (handles integrable singularities)
    if pnl.kind == "power_law":
        eps = min(pnl.b, 1.0, 0.25 / max(abs(z), 1e-300))
        if lo < eps:
            total += _power_law_series(pnl, code, z, lo, eps, extra)
            lo = eps
        if lo >= pnl.b:
            return total

    if math.isfinite(pnl.b):
        hi = pnl.b
        tail_mode = None
    else:
        decay = pnl.r if pnl.kind == "exponential" else 0.0
        rate = rz + decay
        L_decay = lo + 40.0 / rate if rate > 0 else math.inf
        L_budget = lo + 4.0 * cfg.max_panels / (2.0 * max(abs(z), 1e-300))
        hi = max(min(L_decay, L_budget), lo * 10.0, 1.0)
        if pnl.kind == "exponential":
            if not math.isfinite(L_decay):
                raise QuadratureError("exponential panel with zero decay")
            hi = max(L_decay, 1.0)
            tail_mode = "exp_bound"
        elif hi >= L_decay:
            tail_mode = "decayed"
        else:
            tail_mode = "gamma"

    intervals = _subdivide(_decade_cuts(lo, hi, extra=(1.0,)), z)
    if len(intervals) > cfg.max_panels:
        raise QuadratureError(
            f"{pnl.kind} panel needs {len(intervals)} subpanels > max_panels={cfg.max_panels}"
        )
    total += _gl_sum(pnl, code, z, intervals, order, log_var=True, extra=extra)

    if tail_mode is None:
        return total
    if tail_mode == "exp_bound":
        # whole kernel ~ polynomial * exp(-r l) beyond hi: use its exact tail
        total += _tail_poly(pnl, code, z, hi) if code in (1, 4, 5) else 0j
        return total
    total += _tail_poly(pnl, code, z, hi)
    if tail_mode == "gamma":
        total += _tail_exp_power_law(pnl, code, z, hi, extra)
    return total


def integrate_kernel(m: JumpMeasure, kernel, z, cfg: QuadratureConfig | None = None):
    """``int K(l, z) m(dl)`` as a complex number, or :class:`Divergent`."""
    cfg = cfg or QuadratureConfig()
    code = int(Kernel(kernel))
    z = as_complex(z)
    if z.real < 0:
        raise DomainError(f"integrate_kernel needs Re z >= 0, got {z}")
    if code in (2, 3) and z.real == 0 and any(math.isinf(p.b) for p in m.panels):
        raise DomainError("K2/K3 on an unbounded panel need Re z > 0")

    power = _NEAR_ZERO_ORDER[code]
    if math.isinf(moment(m, power, "near_zero")):
        return Divergent(_NEAR_ZERO_LABEL[code])
    if code in _TAIL_LABEL:
        tail_power = 1 if code == 5 else 0
        if math.isinf(moment(m, tail_power, "tail")):
            return Divergent(_TAIL_LABEL[code])

    total = _backend.kernel_sum(code, m.atom_locations, m.atom_weights, z)
    for pnl in m.panels:
        total += _integrate_panel(pnl, code, z, cfg)
    return total


def _integrate_weighted(m: JumpMeasure, kernel, z, cfg: QuadratureConfig | None, extra: int):
    """``int K(l, z) l**extra m(dl)`` for the decaying kernels ``K2``/``K3``."""
    cfg = cfg or QuadratureConfig()
    code = int(Kernel(kernel))
    if code not in (2, 3):
        raise DomainError("weighted integration is only defined for K2 and K3")
    z = as_complex(z)
    if z.real <= 0:
        raise DomainError("weighted Laplace integrals need Re z > 0")
    order = _NEAR_ZERO_ORDER[code] + extra
    if order <= 2 and math.isinf(moment(m, order, "near_zero")):
        return Divergent(f"moment of order {order} near 0")
    for pnl in m.panels:
        if pnl.kind == "power_law" and pnl.a == 0 and pnl.p + order + 1 <= 0:
            return Divergent(f"moment of order {order} near 0")
    xs, ws = m.atom_locations, m.atom_weights
    total = _backend.kernel_sum(code, xs, ws * xs**extra, z)
    for pnl in m.panels:
        total += _integrate_panel(pnl, code, z, cfg, extra)
    return total
