"""Canonical text form of domain and problem definitions.

``parse(print(parse(text)))`` reproduces the object model exactly.
"""

from __future__ import annotations

from pjp.core import is_number, split_var
from pjp.domain.model import Assign, DomainDef, ProblemDef, SeeDecl, SelfDecl
from pjp.semantics import And, Epi, Jp, Lit, Not, Pred, Var, format_prefix


def _num(x) -> str:
    if isinstance(x, float) and x.is_integer() and abs(x) < 1e16:
        return f"{x:.1f}"
    return repr(x)


def _value(x) -> str:
    if x is None:
        return "none"
    if is_number(x):
        return _num(x)
    return str(x)


def _vec(items) -> str:
    return "[" + ",".join("" if x is None else _num(x) for x in items) + "]"


def _fluent(f, args) -> str:
    return "(" + " ".join((f,) + tuple(args)) + ")"


def _typed(params) -> str:
    return " ".join(f"{p} - {t}" for p, t in params)


def format_term(t) -> str:
    if isinstance(t, Var):
        return _fluent(*split_var(t.name))
    if isinstance(t, Lit):
        return _value(t.value) if not (isinstance(t.value, str) and " " in t.value) else f'"{t.value}"'
    if isinstance(t, Jp):
        return f'(@jp ("{format_prefix(t.prefix)}") {_fluent(*split_var(t.var))})'
    if isinstance(t, Epi):
        return f'(@epi ("{format_prefix(t.prefix)}") {format_formula(t.formula)})'
    raise TypeError(f"not a term: {t!r}")


def _conjuncts(f):
    # only the right spine is flattened; that is the shape the parser builds
    while isinstance(f, And):
        yield f.left
        f = f.right
    yield f


def format_formula(f) -> str:
    if isinstance(f, Pred):
        return f"({f.rel} {format_term(f.left)} {format_term(f.right)})"
    if isinstance(f, Not):
        return f"(not {format_formula(f.sub)})"
    if isinstance(f, And):
        return "(and " + " ".join(format_formula(x) for x in _conjuncts(f)) + ")"
    raise TypeError(f"formula {f!r} has no text form")


def _effect(e, ind: str) -> list[str]:
    if isinstance(e, Assign):
        return [f"{ind}(assign {_fluent(e.fluent, e.args)} {format_term(e.value)})"]
    lines = [f"{ind}(forall ({_typed(e.params)})"]
    for x in e.effects:
        lines += _effect(x, ind + "  ")
    lines[-1] += ")"
    return lines


def format_domain(d: DomainDef) -> str:
    out = [f"(define (domain {d.name})"]
    if d.types:
        out.append(f"  (:types {' '.join(d.types)})")
    if d.functions:
        out.append("  (:functions")
        for f in d.functions:
            body = " ".join([f.name] + ([_typed(f.params)] if f.params else []))
            out.append(f"    ({body})")
        out[-1] += ")"
    if d.rules:
        out.append("  (:rules")
        for r in d.rules:
            out.append(f"    ({r.type} {_fluent(r.fluent, r.args)} {_vec(r.eta)} {_vec(r.believed_eta)})")
        out[-1] += ")"
    if d.visibility:
        out.append("  (:visibility")
        for v in d.visibility:
            if isinstance(v, SelfDecl):
                out.append(f"    (self {_fluent(v.fluent, v.args)})")
            else:
                gs = "".join(" (= " + " ".join(
                    _fluent(s[1], s[2]) if s[0] == "var" else _value(s[1]) for s in g) + ")"
                    for g in v.guards)
                out.append(f"    (see {_fluent(v.fluent, v.args)}{gs})")
        out[-1] += ")"
    for a in d.actions:
        out.append(f"  (:action {a.name}")
        out.append(f"    :parameters ({_typed(a.params)})")
        if a.precondition is not None:
            out.append(f"    :precondition {format_formula(a.precondition)}")
        out.append("    :effect (and")
        for e in a.effects:
            out += _effect(e, "      ")
        out[-1] += "))"
    out[-1] += ")"
    return "\n".join(out) + "\n"


def format_problem(p: ProblemDef) -> str:
    out = [f"(define (problem {p.name})"]
    if p.domain:
        out.append(f"  (:domain {p.domain})")
    if p.objects:
        out.append(f"  (:objects {_typed(p.objects)})")
    out.append("  (:init")
    for f, args, v in p.init:
        out.append(f"    (= {_fluent(f, args)} {_value(v)})")
    out[-1] += ")"
    if p.goal is not None:
        out.append(f"  (:goal {format_formula(p.goal)})")
    out[-1] += ")"
    return "\n".join(out) + "\n"
