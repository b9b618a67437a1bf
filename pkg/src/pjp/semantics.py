"""Formulas of the knowledge/belief language and their ternary evaluation.

Truth values are the floats ``0.0``, ``0.5`` and ``1.0``.  Formulas are
evaluated on a :class:`~pjp.perspectives.View`; ``evaluate`` also accepts a
plain state sequence.
"""

from __future__ import annotations

import re
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any, Union

from pjp.core import MISSING, EPS, is_number, values_equal
from pjp.perspectives import EvalContext, Timer, UnknownVariableError, View

TRUE, UNKNOWN, FALSE = 1.0, 0.5, 0.0

EPI_TRUE, EPI_FALSE, EPI_UNKNOWN = "epi.true", "epi.false", "epi.unknown"
JP_NONE = "jp.none"
_EPI_SYMBOL = {TRUE: EPI_TRUE, FALSE: EPI_FALSE, UNKNOWN: EPI_UNKNOWN}


# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Lit:
    """A literal; ``Lit(None)`` is the ⊥ constant (``none`` / ``jp.none``)."""

    value: Any


@dataclass(frozen=True)
class Jp:
    """``@jp``: value of ``var`` in the last state of a belief chain."""

    prefix: tuple  # QueryPrefix items
    var: str


@dataclass(frozen=True)
class Epi:
    """``@epi``: the ternary symbol of a prefixed formula."""

    prefix: tuple
    formula: "Formula"


Term = Union[Var, Lit, Jp, Epi]


# ---------------------------------------------------------------------------
# formulas

RELATIONS = ("=", "!=", "<", "<=", ">", ">=", "~=")
APPROX_TOL = 0.005  # ``~=``: equal when printed to two decimals


@dataclass(frozen=True)
class Pred:
    rel: str
    left: Term
    right: Term

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise ValueError(f"unknown relation {self.rel!r}")


@dataclass(frozen=True)
class Not:
    sub: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class SeesVar:
    agent: str
    var: str


@dataclass(frozen=True)
class Sees:
    agent: str
    sub: "Formula"


@dataclass(frozen=True)
class Knows:
    agent: str
    sub: "Formula"


@dataclass(frozen=True)
class Believes:
    agent: str
    sub: "Formula"


Formula = Union[Pred, Not, And, SeesVar, Sees, Knows, Believes]


def Or(a: Formula, b: Formula) -> Formula:
    return Not(And(Not(a), Not(b)))


def Imply(a: Formula, b: Formula) -> Formula:
    return Not(And(a, Not(b)))


def conj(*fs: Formula) -> Formula:
    if not fs:
        raise ValueError("empty conjunction")
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = And(f, out)
    return out


def depth(f: Formula) -> int:
    """Modal nesting depth."""
    if isinstance(f, Pred) or isinstance(f, SeesVar):
        return int(isinstance(f, SeesVar))
    if isinstance(f, Not):
        return depth(f.sub)
    if isinstance(f, And):
        return max(depth(f.left), depth(f.right))
    return 1 + depth(f.sub)


# ---------------------------------------------------------------------------
# query prefixes


@dataclass(frozen=True)
class PrefixItem:
    negated: bool
    op: str  # b | k | s
    agent: str


class PrefixError(ValueError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at position {pos}")
        self.pos = pos


_ITEM = re.compile(r"(-?)([a-z])\[([^\[\]\s]+)\]")


def parse_query_prefix(text: str) -> tuple[PrefixItem, ...]:
    """Parse ``"-b[b] k[a]"`` into items, outermost first."""
    items = []
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _ITEM.match(text, pos)
        if not m:
            raise PrefixError(f"malformed query prefix {text!r}", pos)
        if m.group(2) not in "bks":
            raise PrefixError(f"unknown operator {m.group(2)!r}", m.start(2))
        items.append(PrefixItem(m.group(1) == "-", m.group(2), m.group(3)))
        pos = m.end()
        if pos < n and not text[pos].isspace():
            raise PrefixError("expected whitespace between items", pos)
    return tuple(items)


def format_prefix(items: Sequence[PrefixItem]) -> str:
    return " ".join(f"{'-' if i.negated else ''}{i.op}[{i.agent}]" for i in items)


def apply_prefix(items: Sequence[PrefixItem], inner: Formula) -> Formula:
    """Wrap ``inner``; a ``-`` negates the operator it precedes."""
    f = inner
    for it in reversed(items):
        f = {"b": Believes, "k": Knows, "s": Sees}[it.op](it.agent, f)
        if it.negated:
            f = Not(f)
    return f


# ---------------------------------------------------------------------------
# evaluation


def _as_view(ctx: EvalContext, seq) -> View:
    return seq if isinstance(seq, View) else ctx.view(seq)


def evaluate(ctx: EvalContext, seq, f: Formula) -> float:
    """Ternary value of ``f`` on ``seq`` (a view or a state sequence)."""
    return _eval(_as_view(ctx, seq), f)


def _eval(view: View, f) -> float:
    if isinstance(f, Pred):
        return _pred(view, f)
    if isinstance(f, Not):
        return 1.0 - _eval(view, f.sub)
    if isinstance(f, And):
        a = _eval(view, f.left)
        if a == FALSE:
            return FALSE
        return min(a, _eval(view, f.right))
    if isinstance(f, Believes):
        return _eval(view.perspective(f.agent), f.sub)
    if isinstance(f, Knows):
        a = _eval(view, f.sub)
        if a == FALSE:
            return FALSE
        return min(a, _sees(view, f.agent, f.sub, a))
    if isinstance(f, Sees):
        return _sees(view, f.agent, f.sub, None)
    if isinstance(f, SeesVar):
        return _sees_var(view, f.agent, f.var)
    raise TypeError(f"not a formula: {f!r}")


def _agent_present(view: View, agent: str) -> bool:
    model = view.ctx.model
    model.check_agent(agent)
    x = view.get(view.n, model.self_vars[agent])
    return x is not None and x is not MISSING


def _sees_var(view: View, agent: str, v: str) -> float:
    view.ctx.check_variable(v)
    x = view.get(view.n, v)
    if x is None or x is MISSING or not _agent_present(view, agent):
        return UNKNOWN
    return TRUE if view.observed(agent).sees(view.n, v) else FALSE


def _sees(view: View, agent: str, sub, known) -> float:
    a = _eval(view, sub) if known is None else known
    if a == UNKNOWN or not _agent_present(view, agent):
        return UNKNOWN
    return FALSE if _eval(view.observed(agent), sub) == UNKNOWN else TRUE


def _term(view: View, term):
    """Value of a term at the last timestamp (``MISSING`` when absent)."""
    if isinstance(term, Var):
        view.ctx.check_variable(term.name)
        return view.get(view.n, term.name)
    if isinstance(term, Lit):
        return term.value
    if isinstance(term, Jp):
        with Timer(view.ctx.stats):
            return _jp(view, term.prefix, term.var)
    if isinstance(term, Epi):
        with Timer(view.ctx.stats):
            return _EPI_SYMBOL[_eval(view, apply_prefix(term.prefix, term.formula))]
    raise TypeError(f"not a term: {term!r}")


def _is_none_lit(term) -> bool:
    return isinstance(term, Lit) and term.value is None


def _pred(view: View, p: Pred) -> float:
    rel = p.rel
    if rel in ("=", "!=") and (_is_none_lit(p.left) or _is_none_lit(p.right)):
        other = p.right if _is_none_lit(p.left) else p.left
        x = _term(view, other)
        if x is MISSING:
            return UNKNOWN
        r = TRUE if x is None else FALSE
        return r if rel == "=" else 1.0 - r
    a = _term(view, p.left)
    b = _term(view, p.right)
    if a is None or a is MISSING or b is None or b is MISSING:
        return UNKNOWN
    if rel == "=":
        return TRUE if values_equal(a, b) else FALSE
    if rel == "!=":
        return FALSE if values_equal(a, b) else TRUE
    if not (is_number(a) and is_number(b)):
        raise TypeError(f"relation {rel!r} needs numbers, got {a!r} and {b!r}")
    if rel == "~=":
        return TRUE if abs(a - b) <= APPROX_TOL + EPS else FALSE
    if rel == "<":
        r = a < b and not values_equal(a, b)
    elif rel == "<=":
        r = a <= b or values_equal(a, b)
    elif rel == ">":
        r = a > b and not values_equal(a, b)
    else:
        r = a >= b or values_equal(a, b)
    return TRUE if r else FALSE


def _jp(view: View, prefix, v: str):
    for it in prefix:
        if it.negated or it.op != "b":
            raise ValueError("@jp prefixes may only contain positive b[...] items")
    view.ctx.check_variable(v)
    target = view.chain(("f", it.agent) for it in prefix)
    x = target.get(target.n, v)
    return None if x is MISSING else x


def term_value(ctx: EvalContext, seq, term):
    """Value of ``term`` on the last state of ``seq`` (``None`` for ⊥ or absent)."""
    x = _term(_as_view(ctx, seq), term)
    return None if x is MISSING else x


# ---------------------------------------------------------------------------
# external functions


def epi_eval(ctx: EvalContext, seq, prefix, inner: Formula) -> str:
    """``@epi``: ``epi.true`` / ``epi.false`` / ``epi.unknown``."""
    if isinstance(prefix, str):
        prefix = parse_query_prefix(prefix)
    with Timer(ctx.stats):
        return _EPI_SYMBOL[_eval(_as_view(ctx, seq), apply_prefix(prefix, inner))]


def jp_value(ctx: EvalContext, seq, prefix, v: str):
    """``@jp``: value of ``v`` in the last state of the belief chain
    (``None`` for ⊥)."""
    if isinstance(prefix, str):
        prefix = parse_query_prefix(prefix)
    with Timer(ctx.stats):
        return _jp(_as_view(ctx, seq), prefix, v)


def render_jp(x) -> str:
    from pjp.core import format_value
    return JP_NONE if x is None or x is MISSING else format_value(x)


__all__ = ["Var", "Lit", "Jp", "Epi", "Pred", "Not", "And", "Or", "Imply", "SeesVar", "Sees",
           "Knows", "Believes", "conj", "depth", "PrefixItem", "PrefixError", "parse_query_prefix",
           "format_prefix", "apply_prefix", "evaluate", "term_value", "epi_eval", "jp_value", "render_jp",
           "TRUE", "FALSE", "UNKNOWN", "EPI_TRUE", "EPI_FALSE", "EPI_UNKNOWN", "JP_NONE",
           "UnknownVariableError"]
