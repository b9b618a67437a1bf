"""States, state sequences, the override operator and observation functions.

A state is a partial assignment of ground variables to values.  ``None`` is
the distinguished "no value" constant; a variable that is *assigned* ``None``
is different from a variable that is *absent* from the state.  Sequence views
use the :data:`MISSING` sentinel for absence.
"""

from __future__ import annotations

import math
import random
import re
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

EPS = 1e-9

Value = Any  # float | str | None


class _Missing:
    __slots__ = ()

    def __repr__(self) -> str:
        return "MISSING"

    def __bool__(self) -> bool:
        return False


MISSING = _Missing()


def is_number(x: object) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def values_equal(a: Value, b: Value) -> bool:
    """Equality with the numeric tolerance :data:`EPS`."""
    if is_number(a) and is_number(b):
        return a == b or math.isclose(a, b, rel_tol=EPS, abs_tol=EPS)
    return a == b


def format_value(x: Value, absent: str = "-") -> str:
    """Two-decimal display with trailing zeros stripped (``6.33``, ``3``)."""
    if x is None or x is MISSING:
        return absent
    if is_number(x):
        s = f"{x:.2f}".rstrip("0").rstrip(".")
        return "0" if s in ("-0", "") else s
    return str(x)


class State(Mapping):
    """Immutable partial assignment ``variable -> value``."""

    __slots__ = ("_d", "_hash")

    def __init__(self, assignments: Mapping[str, Value] | Iterable[tuple[str, Value]] = ()):
        self._d = dict(assignments)
        self._hash = None

    def __getitem__(self, key: str) -> Value:
        return self._d[key]

    def __iter__(self) -> Iterator[str]:
        return iter(self._d)

    def __len__(self) -> int:
        return len(self._d)

    def get(self, key: str, default: Value = None) -> Value:
        return self._d.get(key, default)

    def has_value(self, v: str) -> bool:
        """``v`` is assigned and its value is not ``None``."""
        return self._d.get(v) is not None

    def __eq__(self, other: object) -> bool:
        if isinstance(other, State):
            other = other._d
        if not isinstance(other, Mapping) or len(other) != len(self._d):
            return False
        for k, x in self._d.items():
            if k not in other:
                return False
            y = other[k]
            if (x is None) != (y is None) or not values_equal(x, y):
                return False
        return True

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._d))
        return self._hash

    def issubset(self, other: Mapping[str, Value]) -> bool:
        for k, x in self._d.items():
            if k not in other:
                return False
            y = other[k]
            if (x is None) != (y is None) or not values_equal(x, y):
                return False
        return True

    def as_dict(self) -> dict[str, Value]:
        return dict(self._d)

    def __repr__(self) -> str:
        body = ", ".join(f"{k}={format_value(v, '⊥')}" for k, v in sorted(self._d.items()))
        return "{" + body + "}"


StateSequence = tuple  # tuple[State, ...]


def as_state(s: Mapping[str, Value] | State) -> State:
    return s if isinstance(s, State) else State(s)


def as_sequence(seq: Iterable[Mapping[str, Value]]) -> tuple[State, ...]:
    return tuple(as_state(s) for s in seq)


def bottom_state(variables: Iterable[str]) -> State:
    return State((v, None) for v in variables)


def override(target: Mapping[str, Value], winner: Mapping[str, Value]) -> State:
    """``target⟨winner⟩``: every assignment of ``winner`` survives, the rest
    is copied from ``target``."""
    d = dict(target)
    d.update(winner)
    return State(d)


def override_seq(target: Mapping[str, Value], seq: Sequence[Mapping[str, Value]]) -> tuple[State, ...]:
    return tuple(override(target, s) for s in seq)


# ---------------------------------------------------------------------------
# variable names

_VAR_RE = re.compile(r"^\s*([^\s(),]+)\s*(?:\((.*)\))?\s*$")


def var_name(fluent: str, args: Sequence[str] = ()) -> str:
    return f"{fluent}({','.join(args)})" if args else fluent


def split_var(name: str) -> tuple[str, tuple[str, ...]]:
    m = _VAR_RE.match(name)
    if not m:
        raise ValueError(f"malformed variable name {name!r}")
    args = m.group(2)
    if args is None or not args.strip():
        return m.group(1), ()
    return m.group(1), tuple(a.strip() for a in args.split(","))


# ---------------------------------------------------------------------------
# observation


@dataclass(frozen=True)
class VarTerm:
    """A (possibly lifted) variable reference inside a visibility guard."""

    pattern: str


@dataclass(frozen=True)
class Atom:
    left: Any  # VarTerm | constant
    right: Any
    negated: bool = False


@dataclass(frozen=True)
class VisibilityRule:
    """Variables matching ``pattern`` are visible when every atom holds.

    Pattern arguments starting with ``?`` are parameters; ``?self`` is bound
    to the observing agent.  Atoms compare two terms for equality.  A term
    referencing an absent or ``None`` variable makes a positive atom false.
    Negated atoms exist only so that broken models can be constructed and
    caught by :func:`check_observation_properties`.
    """

    pattern: str
    guard: tuple[Atom, ...] = ()

    @classmethod
    def make(cls, pattern: str, *atoms: tuple) -> "VisibilityRule":
        out = []
        for a in atoms:
            if isinstance(a, Atom):
                out.append(a)
            elif len(a) == 3:
                op, l, r = a
                out.append(Atom(_as_term(l), _as_term(r), negated=(op == "!=")))
            else:
                l, r = a
                out.append(Atom(_as_term(l), _as_term(r)))
        return cls(pattern, tuple(out))


def _as_term(x: Any) -> Any:
    return x


class UnknownAgentError(KeyError):
    pass


# compiled guard: tuple of (left, right, negated) where each side is
# ("v", varname) or ("c", constant)
_CompiledGuard = tuple


class ObservationModel:
    """Per-agent observation functions built from visibility rules."""

    def __init__(self, agents: Iterable[str], self_vars: Mapping[str, str],
                 rules: Iterable[VisibilityRule]):
        self.agents = tuple(agents)
        self.self_vars = dict(self_vars)
        for a in self.agents:
            if a not in self.self_vars:
                raise ValueError(f"agent {a!r} has no self variable")
        self.rules = tuple(rules)
        self._parsed = [(split_var(r.pattern), r.guard) for r in self.rules]
        self._cache: dict[tuple[str, str], tuple[_CompiledGuard, ...]] = {}

    def check_agent(self, agent: str) -> None:
        if agent not in self.self_vars:
            raise UnknownAgentError(f"unknown agent {agent!r}")

    def guards(self, agent: str, v: str) -> tuple[_CompiledGuard, ...]:
        """Alternative guards under which ``agent`` sees ``v`` (empty tuple:
        never visible; a guard ``()`` means always visible)."""
        key = (agent, v)
        g = self._cache.get(key)
        if g is not None:
            return g
        self.check_agent(agent)
        fluent, args = split_var(v)
        out = []
        for (pf, pargs), guard in self._parsed:
            if pf != fluent or len(pargs) != len(args):
                continue
            binding = {"?self": agent}
            ok = True
            for p, a in zip(pargs, args):
                if p.startswith("?"):
                    if binding.setdefault(p, a) != a:
                        ok = False
                        break
                elif p != a:
                    ok = False
                    break
            if not ok:
                continue
            out.append(tuple((_bind(at.left, binding), _bind(at.right, binding), at.negated)
                             for at in guard))
        if v == self.self_vars[agent] and () not in out:
            out.append(())
        g = tuple(out)
        self._cache[key] = g
        return g

    def visible(self, agent: str, v: str, lookup, value: Value = MISSING) -> bool:
        """Is ``v`` visible to ``agent`` in the state read through ``lookup``?

        ``lookup(name)`` returns a value, ``None`` or :data:`MISSING`.  When
        ``value`` is given it overrides ``v`` itself (``s⟨{v=value}⟩``).
        """
        own = lookup(v) if value is MISSING else value
        if own is None or own is MISSING:
            return False
        for guard in self.guards(agent, v):
            if _guard_holds(guard, v, value, lookup):
                return True
        return False

    def observe(self, agent: str, state: Mapping[str, Value]) -> State:
        self.check_agent(agent)
        lookup = _state_lookup(state)
        return State((v, x) for v, x in state.items()
                     if x is not None and self.visible(agent, v, lookup))

    def observe_seq(self, agent: str, seq: Sequence[Mapping[str, Value]]) -> tuple[State, ...]:
        return tuple(self.observe(agent, s) for s in seq)


def _bind(term: Any, binding: Mapping[str, str]):
    if isinstance(term, VarTerm):
        fluent, args = split_var(term.pattern)
        return ("v", var_name(fluent, [binding.get(a, a) for a in args]))
    return ("c", term)


def _state_lookup(state: Mapping[str, Value]):
    return lambda name: state.get(name, MISSING)


def _guard_holds(guard, v, value, lookup) -> bool:
    for left, right, negated in guard:
        lv = _term_value(left, v, value, lookup)
        rv = _term_value(right, v, value, lookup)
        holds = (lv is not None and lv is not MISSING and rv is not None and rv is not MISSING
                 and values_equal(lv, rv))
        if holds == negated:
            return False
    return True


def _term_value(term, v, value, lookup):
    kind, x = term
    if kind == "c":
        return x
    if x == v and value is not MISSING:
        return value
    return lookup(x)


def observe(model: ObservationModel, agent: str, state: Mapping[str, Value]) -> State:
    return model.observe(agent, state)


def observe_seq(model: ObservationModel, agent: str, seq) -> tuple[State, ...]:
    return model.observe_seq(agent, seq)


# ---------------------------------------------------------------------------
# property checking


@dataclass
class Violation:
    agent: str
    prop: str  # contraction | idempotence | monotonicity
    witness: tuple


@dataclass
class ObservationReport:
    checked_states: int
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def failed(self, agent: str | None = None) -> set[str]:
        return {x.prop for x in self.violations if agent is None or x.agent == agent}


def check_observation_properties(model: ObservationModel, sample_states: Sequence[Mapping[str, Value]],
                                 subsets_per_state: int = 4, seed: int = 0) -> ObservationReport:
    """Check contraction, idempotence and monotonicity on sampled states.

    Monotonicity pairs are built by dropping random assignments from each
    sample, so every pair satisfies ``s ⊆ s'`` by construction.
    """
    if not sample_states:
        raise ValueError("check_observation_properties needs at least one sample state")
    rng = random.Random(seed)
    report = ObservationReport(checked_states=len(sample_states))
    seen: set[tuple[str, str]] = set()

    def add(agent, prop, witness):
        if (agent, prop) not in seen:
            seen.add((agent, prop))
            report.violations.append(Violation(agent, prop, witness))

    for raw in sample_states:
        s = as_state(raw)
        keys = list(s)
        for agent in model.agents:
            o = model.observe(agent, s)
            if not o.issubset(s):
                add(agent, "contraction", (s,))
            if model.observe(agent, o) != o:
                add(agent, "idempotence", (s,))
            for _ in range(subsets_per_state):
                sub = State((k, s[k]) for k in keys if rng.random() < 0.5)
                if not model.observe(agent, sub).issubset(o):
                    add(agent, "monotonicity", (sub, s))
            # dropping one assignment at a time catches single-variable flips
            for k in keys:
                sub = State((x, s[x]) for x in keys if x != k)
                if not model.observe(agent, sub).issubset(o):
                    add(agent, "monotonicity", (sub, s))
                    break
    return report
