"""Command-line front end.

Every command reads its objects as JSON (inline text or a file path), prints
numbers with 17 significant digits and exits with 0 on success, 1 on
parse/configuration errors and 2 on domain errors.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Sequence

from .bernstein import BernsteinRepr, evaluate, is_bernstein_numeric
from .branching import (
    MechanismSpec,
    conditional_mean,
    laplace_exponent,
    slice_from_json,
    transition_laplace,
)
from .errors import BernLoewnerError, DomainError, NonConvergenceError, ParseError
from .evolution import (
    HerglotzField,
    brfp0_derivative,
    brfp0_second_derivative,
    evolve,
    inverse_evolve,
    reverse_evolve,
)
from .flow import flow
from .generator import GeneratorRepr, check_generator_numeric, classify, eval_gen, generator_from_json
from .measure import IntegrabilityClass, check_class
from .numerics import DomainExit, ODEConfig

__all__ = ["main", "fmt", "emit_table", "dumps"]

ENV_RTOL = "LOEWNER_DEFAULT_RTOL"
QUANTITIES = ("v", "transition", "mean", "deriv0", "deriv0_2")


class CLIError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CLIError(f"{self.prog}: {message}", 1)


# ---------------------------------------------------------------- formatting
def fmt(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0"
    return format(x, ".17g")


def fmt_complex(w) -> str:
    w = complex(w)
    return f"{fmt(w.real)},{fmt(w.imag)}"


def dumps(obj) -> str:
    """JSON text with floats in 17-digit form; infinities become strings."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        s = fmt(obj)
        return json.dumps(s) if s in ("inf", "-inf", "nan") else s
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, complex):
        return dumps([obj.real, obj.imag])
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# ------------------------------------------------------------------- parsing
def _load_json(text: str, what: str):
    if text is None:
        raise CLIError(f"missing --{what}", 1)
    src = text
    if not text.lstrip().startswith(("{", "[")):
        try:
            with open(text, encoding="utf-8") as fh:
                src = fh.read()
        except OSError as exc:
            raise CLIError(f"--{what}: cannot read {text!r}: {exc.strerror}", 1) from exc
    try:
        return json.loads(src)
    except json.JSONDecodeError as exc:
        raise CLIError(f"--{what}: invalid JSON: {exc}", 1) from exc


def parse_complex(text: str) -> complex:
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise CLIError(f"cannot parse complex value {text!r} (expected 're,im')", 1)


def parse_grid(text: str | None) -> list[float]:
    """``"0,1,2"`` or ``"lin:START:STOP:N"``; empty text gives an empty grid."""
    if text is None or text.strip() == "":
        return []
    try:
        if text.startswith("lin:"):
            _, a, b, n = text.split(":")
            a, b, n = float(a), float(b), int(n)
            if n < 1:
                raise ValueError
            if n == 1:
                return [a]
            return [a + (b - a) * i / (n - 1) for i in range(n)]
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise CLIError(f"cannot parse grid {text!r}", 1) from None


def _ode_config(args) -> ODEConfig:
    rtol = ODEConfig.rtol
    env = os.environ.get(ENV_RTOL)
    if env is not None:
        try:
            rtol = float(env)
        except ValueError:
            raise CLIError(f"{ENV_RTOL}={env!r} is not a number", 1) from None
    if args.rtol is not None:
        rtol = args.rtol
    atol = ODEConfig.atol if args.atol is None else args.atol
    try:
        return ODEConfig(rtol=rtol, atol=atol)
    except DomainError as exc:
        raise CLIError(f"invalid solver configuration: {exc}", 1) from exc


def _generator(args, validate=True) -> GeneratorRepr:
    if args.mech is not None:
        return MechanismSpec.from_json(_load_json(args.mech, "mech")).to_generator()
    return generator_from_json(_load_json(args.gen, "gen"), validate=validate)


def _field(args, validate=True) -> HerglotzField:
    return HerglotzField.from_json(_load_json(args.field, "field"), validate=validate, slice_parser=slice_from_json)


# ------------------------------------------------------------------ commands
def _out(args, csv_line: str, obj) -> str:
    return dumps(obj) + "\n" if args.output == "json" else csv_line + "\n"


def cmd_eval(args, cfg):
    z = parse_complex(args.z)
    if args.bern is not None:
        f = BernsteinRepr.from_json(_load_json(args.bern, "bern"))
        val = evaluate(f, z)
    else:
        val = eval_gen(_generator(args), z)
    return _out(args, fmt_complex(val), {"value": val})


def cmd_flow(args, cfg):
    g = _generator(args)
    res = flow(g, _req(args.t, "t"), parse_complex(args.z), cfg)
    return _out(args, fmt_complex(res.w), {
        "w": res.w, "steps": res.steps, "rejected_steps": res.rejected_steps,
        "used_closed_form": res.used_closed_form,
    })


def _req(v, name):
    if v is None:
        raise CLIError(f"missing --{name}", 1)
    return v


def cmd_evolve(args, cfg, fn=evolve):
    F = _field(args)
    w = fn(F, args.s, _req(args.t, "t"), parse_complex(args.z), cfg)
    return _out(args, fmt_complex(w), {"w": w})


def cmd_inverse(args, cfg):
    F = _field(args)
    res = inverse_evolve(F, args.s, _req(args.t, "t"), parse_complex(args.z), cfg, family=args.family)
    if isinstance(res, DomainExit):
        if not args.allow_exit:
            raise DomainError(f"trajectory left the half-plane at t_exit={fmt(res.t_exit)}")
        return _out(args, f"exit,{fmt(res.t_exit)}", {"domain_exit": True, "t_exit": res.t_exit})
    return _out(args, fmt_complex(res), {"w": res})


def cmd_classify(args, cfg):
    return dumps(classify(_generator(args)).to_json()) + "\n"


def cmd_mech(args, cfg):
    mspec = MechanismSpec.from_json(_load_json(_req(args.mech, "mech"), "mech"))
    g = mspec.to_generator()
    out = {"mechanism": mspec.to_json(), "generator": g.to_json(), "classification": classify(g).to_json()}
    if args.t is not None:
        F = HerglotzField.constant(g, args.t)
        out["laplace_exponent"] = laplace_exponent(F, 0.0, args.t, parse_complex(args.z), cfg)
    return dumps(out) + "\n"


def _generator_report(g: GeneratorRepr) -> dict:
    """Worst violation per category for one (possibly invalid) generator."""
    cats = {}
    cats["phi0_nonpositive"] = {"passed": g.q >= 0, "worst": max(0.0, -g.q)}
    cats["phi2_completely_monotone"] = {"passed": g.b >= 0, "worst": max(0.0, -g.b)}
    lev = check_class(g.pi, IntegrabilityClass.GENERATOR)
    cats["levy_integrability"] = {"passed": bool(lev), "witness": None if lev else lev.witness}
    if lev:
        _, numeric = check_generator_numeric(lambda x: eval_gen(g, x))
        for name, rep in numeric.items():
            prev = cats.get(name)
            if prev is None:
                cats[name] = rep
            else:
                cats[name] = {"passed": prev["passed"] and rep["passed"], "worst": max(prev["worst"], rep["worst"])}
        try:
            again = generator_from_json(json.loads(dumps(g.to_json())), validate=False)
            cats["json_roundtrip"] = {"passed": again == g}
        except ParseError:
            cats["json_roundtrip"] = {"passed": False}
    order = ("real_on_axis", "phi0_nonpositive", "phi2_completely_monotone", "levy_integrability", "json_roundtrip")
    return {k: cats[k] for k in order if k in cats}


def cmd_check(args, cfg):
    if args.field is not None:
        F = _field(args, validate=False)
        objects = [{"slice": k, "categories": _generator_report(g)} for k, g in enumerate(F.slices)]
    elif args.bern is not None:
        f = BernsteinRepr.from_json(_load_json(args.bern, "bern"), validate=False)
        cm = check_class(f.rho, IntegrabilityClass.BERNSTEIN)
        cats = {
            "coefficients_nonnegative": {"passed": f.alpha >= 0 and f.beta >= 0,
                                         "worst": max(0.0, -f.alpha, -f.beta)},
            "levy_integrability": {"passed": bool(cm), "witness": None if cm else cm.witness},
        }
        if cm:
            ok, worst = is_bernstein_numeric(lambda x: evaluate(f, x).real)
            cats["bernstein_numeric"] = {"passed": ok, "worst": -worst}
        objects = [{"categories": cats}]
    else:
        objects = [{"categories": _generator_report(_generator(args, validate=False))}]
    passed = all(c["passed"] for o in objects for c in o["categories"].values())
    text = dumps({"passed": passed, "objects": objects}) + "\n"
    if not passed:
        failed = sorted({name for o in objects for name, c in o["categories"].items() if not c["passed"]})
        raise _CheckFailed(text, failed)
    return text


class _CheckFailed(Exception):
    def __init__(self, text, categories):
        super().__init__("violations: " + ", ".join(categories))
        self.text = text


def emit_table(
    F: HerglotzField,
    s_grid: Sequence[float],
    t_grid: Sequence[float],
    zeta_grid: Sequence[complex],
    quantity: str = "v",
    x: float = 1.0,
    cfg: ODEConfig | None = None,
) -> list[list[str]]:
    """Rows (header first) in lexicographic ``(s, t, zeta)`` order; pairs with
    ``s > t`` are skipped.  Derivative quantities carry no zeta columns."""
    if quantity not in QUANTITIES:
        raise DomainError(f"unknown quantity {quantity!r}")
    with_zeta = quantity in ("v", "transition")
    header = ["s", "t", "re_zeta", "im_zeta", "re_val", "im_val"] if with_zeta else ["s", "t", "re_val", "im_val"]
    rows = [header]
    for s in s_grid:
        for t in t_grid:
            if s > t:
                continue
            if with_zeta:
                for zeta in zeta_grid:
                    if quantity == "v":
                        val = laplace_exponent(F, s, t, zeta, cfg)
                    else:
                        val = transition_laplace(F, s, t, x, zeta, cfg)
                    rows.append([fmt(s), fmt(t), fmt(zeta.real), fmt(zeta.imag), fmt(val.real), fmt(val.imag)])
            else:
                if quantity == "mean":
                    val = conditional_mean(F, s, t, x)
                elif quantity == "deriv0":
                    val = brfp0_derivative(F, s, t)
                else:
                    val = brfp0_second_derivative(F, s, t)
                rows.append([fmt(s), fmt(t), fmt(val), "0"])
    return rows


def cmd_table(args, cfg):
    F = _field(args)
    zetas = [parse_complex(z) for z in (args.zeta or [])]
    if args.quantity in ("v", "transition") and not zetas:
        zetas = [1 + 0j]
    rows = emit_table(F, parse_grid(args.s_grid), parse_grid(args.t_grid), zetas, args.quantity, args.x, cfg)
    if args.output == "json":
        header, body = rows[0], rows[1:]
        return dumps([dict(zip(header, [float(v) for v in r])) for r in body]) + "\n"
    return "".join(",".join(r) + "\n" for r in rows)


COMMANDS = {
    "eval": cmd_eval,
    "flow": cmd_flow,
    "evolve": cmd_evolve,
    "reverse": lambda a, c: cmd_evolve(a, c, reverse_evolve),
    "inverse": cmd_inverse,
    "classify": cmd_classify,
    "check": cmd_check,
    "table": cmd_table,
    "mech": cmd_mech,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bernloewner", description="Bernstein generators, semigroups and Loewner-Kufarev evolutions.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, field=False, gen=False, time=False):
        if gen:
            sp.add_argument("--gen", help="generator JSON (inline or file path)")
            sp.add_argument("--mech", help="mechanism JSON (inline or file path)")
        if field:
            sp.add_argument("--field", required=True, help="field JSON (inline or file path)")
        if time:
            sp.add_argument("--s", type=float, default=0.0)
            sp.add_argument("--t", type=float)
            sp.add_argument("--z", default="1,0", help="complex point as 're,im'")
        sp.add_argument("--output", choices=("csv", "json"), default="csv")
        sp.add_argument("--out", help="write to this file instead of standard output")
        sp.add_argument("--rtol", type=float)
        sp.add_argument("--atol", type=float)

    sp = sub.add_parser("eval", help="evaluate a generator (or --bern Bernstein function) at z")
    common(sp, gen=True)
    sp.add_argument("--bern", help="Bernstein function JSON")
    sp.add_argument("--z", default="1,0")
    common(sub.add_parser("flow", help="semigroup v_t(z)"), gen=True, time=True)
    common(sub.add_parser("evolve", help="evolution family w_{s,t}(z)"), field=True, time=True)
    common(sub.add_parser("reverse", help="reverse evolution family v_{s,t}(z)"), field=True, time=True)
    sp = sub.add_parser("inverse", help="inverse evolution by the backward ODE")
    common(sp, field=True, time=True)
    sp.add_argument("--family", choices=("forward", "reverse"), default="forward")
    sp.add_argument("--allow-exit", action="store_true", help="report a domain exit instead of failing")
    common(sub.add_parser("classify", help="boundary classification of a generator"), gen=True)
    sp = sub.add_parser("check", help="validate a generator, field or Bernstein function")
    sp.add_argument("--gen")
    sp.add_argument("--mech")
    sp.add_argument("--bern")
    sp.add_argument("--field")
    sp.add_argument("--output", choices=("json",), default="json")
    sp.add_argument("--out")
    sp.add_argument("--rtol", type=float)
    sp.add_argument("--atol", type=float)
    sp = sub.add_parser("table", help="CSV table of v, transition, mean, deriv0 or deriv0_2")
    common(sp, field=True)
    sp.add_argument("--s-grid", default="0")
    sp.add_argument("--t-grid", default="")
    sp.add_argument("--zeta", action="append", help="complex 're,im' (repeatable)")
    sp.add_argument("--quantity", choices=QUANTITIES, default="v")
    sp.add_argument("--x", type=float, default=1.0)
    sp = sub.add_parser("mech", help="expand a branching mechanism")
    sp.add_argument("--mech", required=True)
    sp.add_argument("--t", type=float)
    sp.add_argument("--z", default="1,0")
    sp.add_argument("--output", choices=("json",), default="json")
    sp.add_argument("--out")
    sp.add_argument("--rtol", type=float)
    sp.add_argument("--atol", type=float)
    return p


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        cfg = _ode_config(args)
        cmd = args.command
        if cmd in ("eval", "flow", "classify") and args.gen is None and args.mech is None \
                and getattr(args, "bern", None) is None:
            raise CLIError(f"{cmd}: one of --gen or --mech is required", 1)
        text = COMMANDS[cmd](args, cfg)
        code = 0
    except CLIError as exc:
        print(str(exc), file=stderr)
        return exc.code
    except _CheckFailed as exc:
        text, code = exc.text, 2
        print(f"check: {exc}", file=stderr)
    except ParseError as exc:
        print(f"parse error: {exc}", file=stderr)
        return 1
    except (BernLoewnerError, NonConvergenceError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return code


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
