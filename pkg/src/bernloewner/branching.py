"""Continuous-state branching processes at the level of Laplace transforms.

For a field of branching mechanisms, ``E[exp(-zeta X_t) | X_s = x] =
exp(-x v_{s,t}(zeta))`` where ``v_{s,t}`` is the reverse evolution family.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

from scipy.special import gamma

from .errors import DomainError, ParseError
from .evolution import HerglotzField, _check_interval, brfp0_derivative, brfp0_second_derivative, reverse_evolve
from .generator import GeneratorRepr, generator_from_json
from .measure import JumpMeasure, _num, _require_keys, power_law
from .numerics import ODEConfig, as_complex

__all__ = [
    "MechanismSpec",
    "stable_constant",
    "field_from_mechanisms",
    "laplace_exponent",
    "transition_laplace",
    "conditional_mean",
    "conditional_variance",
]

_KINDS = {
    "feller": ({"b"}, set()),
    "linear": ({"a"}, set()),
    "killing": ({"q"}, set()),
    "stable": ({"alpha", "scale"}, set()),
    "compound_poisson": ({"rate", "jump_atoms"}, set()),
}

BOUNDARY_EPS = 1e-8


def stable_constant(alpha: float, scale: float = 1.0) -> float:
    """Density constant ``C`` with ``int (e^{-zx} - 1 + zx) C x^{-2-alpha} dx = scale z^{1+alpha}``."""
    return scale / gamma(-1.0 - alpha)


@dataclass(frozen=True)
class MechanismSpec:
    """A named branching mechanism.

    ``params`` holds the kind's parameters: ``b`` (feller), ``a`` (linear),
    ``q`` (killing), ``alpha`` and ``scale`` (stable), ``rate`` and
    ``jump_atoms`` as ``[(size, weight), ...]`` (compound_poisson).
    """

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown mechanism kind {self.kind!r}")
        required, _ = _KINDS[self.kind]
        missing = required - set(self.params)
        if missing:
            raise DomainError(f"{self.kind} mechanism needs {sorted(missing)}")
        extra = set(self.params) - required
        if extra:
            raise DomainError(f"{self.kind} mechanism: unknown parameters {sorted(extra)}")
        p = self.params
        if self.kind == "feller" and not p["b"] > 0:
            raise DomainError("feller mechanism needs b > 0")
        if self.kind == "killing" and not p["q"] > 0:
            raise DomainError("killing mechanism needs q > 0")
        if self.kind == "linear" and not math.isfinite(p["a"]):
            raise DomainError("linear mechanism needs finite a")
        if self.kind == "stable":
            if not 0 < p["alpha"] < 1:
                raise DomainError("stable mechanism needs alpha in (0, 1)")
            if not p["scale"] > 0:
                raise DomainError("stable mechanism needs scale > 0")
        if self.kind == "compound_poisson":
            if not p["rate"] > 0:
                raise DomainError("compound_poisson mechanism needs rate > 0")
            atoms = [(float(x), float(w)) for x, w in p["jump_atoms"]]
            if not atoms or any(not (x > 0 and w >= 0) for x, w in atoms) or sum(w for _, w in atoms) <= 0:
                raise DomainError("jump_atoms must be non-empty (size > 0, weight >= 0) with positive total weight")
            object.__setattr__(self, "params", {"rate": float(p["rate"]), "jump_atoms": tuple(atoms)})

    def __hash__(self):
        return hash((self.kind, tuple(sorted(self.params.items()))))

    # convenience constructors
    @classmethod
    def feller(cls, b: float) -> "MechanismSpec":
        return cls("feller", {"b": b})

    @classmethod
    def linear(cls, a: float) -> "MechanismSpec":
        return cls("linear", {"a": a})

    @classmethod
    def killing(cls, q: float) -> "MechanismSpec":
        return cls("killing", {"q": q})

    @classmethod
    def stable(cls, alpha: float, scale: float = 1.0) -> "MechanismSpec":
        return cls("stable", {"alpha": alpha, "scale": scale})

    @classmethod
    def compound_poisson(cls, rate: float, jump_atoms) -> "MechanismSpec":
        return cls("compound_poisson", {"rate": rate, "jump_atoms": jump_atoms})

    def to_generator(self) -> GeneratorRepr:
        p = self.params
        if self.kind == "feller":
            return GeneratorRepr(b=p["b"])
        if self.kind == "linear":
            return GeneratorRepr(a=p["a"])
        if self.kind == "killing":
            return GeneratorRepr(q=p["q"])
        if self.kind == "stable":
            alpha = p["alpha"]
            C = stable_constant(alpha, p["scale"])
            # Le Gall coefficient c = 0, so a = int_[1,inf) x pi(dx) = C / alpha
            return GeneratorRepr(a=C / alpha, pi=JumpMeasure(panels=[power_law(-2.0 - alpha, C)]))
        # compound Poisson: phi(z) = -rate * sum p_i (1 - e^{-z x_i})
        atoms = p["jump_atoms"]
        total = sum(w for _, w in atoms)
        pi = JumpMeasure(atoms=[(x, p["rate"] * w / total) for x, w in atoms])
        near1 = sum(x * w for x, w in pi.atoms if x < 1)
        return GeneratorRepr(a=-near1, pi=pi)

    def to_json(self) -> dict:
        d = {"kind": self.kind}
        for k, v in self.params.items():
            d[k] = [list(a) for a in v] if k == "jump_atoms" else v
        return d

    @classmethod
    def from_json(cls, data) -> "MechanismSpec":
        if not isinstance(data, dict) or "kind" not in data:
            raise ParseError("mechanism: expected an object with a 'kind'")
        kind = data["kind"]
        if kind not in _KINDS:
            raise ParseError(f"unknown mechanism kind {kind!r}")
        required, _ = _KINDS[kind]
        _require_keys(data, required | {"kind"}, required, f"{kind} mechanism")
        params = {}
        for k in required:
            if k == "jump_atoms":
                try:
                    params[k] = [(_num(x), _num(w)) for x, w in data[k]]
                except (TypeError, ValueError) as exc:
                    raise ParseError(f"jump_atoms must be [[size, weight], ...]: {exc}") from exc
            else:
                params[k] = _num(data[k])
        try:
            return cls(kind, params)
        except DomainError as exc:
            raise ParseError(str(exc)) from exc


def slice_from_json(data, validate: bool = True) -> GeneratorRepr:
    """A field slice given either as a generator or as a mechanism (has ``kind``)."""
    if isinstance(data, dict) and "kind" in data:
        return MechanismSpec.from_json(data).to_generator()
    return generator_from_json(data, validate=validate)


def field_from_mechanisms(breakpoints: Sequence[float], mechanisms: Sequence) -> HerglotzField:
    slices = [m.to_generator() if isinstance(m, MechanismSpec) else m for m in mechanisms]
    return HerglotzField(breakpoints, slices)


def laplace_exponent(F: HerglotzField, s: float, t: float, zeta, cfg: ODEConfig | None = None) -> complex:
    """``v_{s,t}(zeta)`` on the closed half-plane ``Re zeta >= 0``.

    On the imaginary axis ``v`` is the continuous extension, estimated from
    ``zeta + eps`` and ``zeta + 2 eps`` with one Richardson step.
    """
    zeta = as_complex(zeta)
    if zeta.real < 0:
        raise DomainError(f"Laplace exponents need Re zeta >= 0, got {zeta}")
    if zeta.real > 0:
        return reverse_evolve(F, s, t, zeta, cfg)
    if zeta == 0 and all(F.slices[k].q == 0 for k, _, _ in F.pieces(s, t)):
        _check_interval(F, s, t)
        return 0j
    eps = BOUNDARY_EPS
    v1 = reverse_evolve(F, s, t, zeta + eps, cfg)
    v2 = reverse_evolve(F, s, t, zeta + 2 * eps, cfg)
    return 2 * v1 - v2


def transition_laplace(F: HerglotzField, s: float, t: float, x: float, zeta, cfg: ODEConfig | None = None) -> complex:
    """``E[exp(-zeta X_t) | X_s = x] = exp(-x v_{s,t}(zeta))``."""
    if not x >= 0:
        raise DomainError("x must be >= 0")
    if x == 0:
        return 1 + 0j
    v = laplace_exponent(F, s, t, zeta, cfg)
    return cmath.exp(-x * v)


def conditional_mean(F: HerglotzField, s: float, t: float, x: float) -> float:
    """``E[X_t | X_s = x] = x exp(-int_s^t c)``."""
    if not x >= 0:
        raise DomainError("x must be >= 0")
    d = brfp0_derivative(F, s, t)
    return x * d


def conditional_variance(F: HerglotzField, s: float, t: float, x: float) -> float:
    """``Var[X_t | X_s = x] = -x v''_{s,t}(0)`` (``inf`` when the mechanism
    has an infinite second moment)."""
    if not x >= 0:
        raise DomainError("x must be >= 0")
    d2 = brfp0_second_derivative(F, s, t, family="reverse")
    if x == 0:
        return 0.0
    return -x * d2 if d2 != 0 else 0.0
