"""Object model for parsed domain and problem files."""

from __future__ import annotations

from dataclasses import dataclass

from pjp.semantics import Formula, Term


@dataclass(frozen=True)
class FunctionDecl:
    name: str
    params: tuple  # ((var, type), ...)


@dataclass(frozen=True)
class RuleDecl:
    type: str
    fluent: str
    args: tuple
    eta: tuple
    believed_eta: tuple


@dataclass(frozen=True)
class SelfDecl:
    """``(self (agent_loc ?self))``: the variable identifying an agent."""

    fluent: str
    args: tuple


@dataclass(frozen=True)
class SeeDecl:
    """``(see (fluent ?x ...) guard*)``; each guard is ``(= lhs rhs)``.

    Guard sides are ``("var", fluent, args)`` or ``("const", value)``.
    """

    fluent: str
    args: tuple
    guards: tuple


@dataclass(frozen=True)
class Assign:
    fluent: str
    args: tuple
    value: Term


@dataclass(frozen=True)
class Forall:
    params: tuple
    effects: tuple


@dataclass(frozen=True)
class ActionSchema:
    name: str
    params: tuple  # ((var, type), ...)
    precondition: Formula | None
    effects: tuple  # Assign | Forall


@dataclass(frozen=True)
class DomainDef:
    name: str
    types: tuple
    functions: tuple
    rules: tuple
    visibility: tuple
    actions: tuple

    def function(self, name: str) -> FunctionDecl | None:
        for f in self.functions:
            if f.name == name:
                return f
        return None

    def action(self, name: str) -> ActionSchema | None:
        for a in self.actions:
            if a.name == name:
                return a
        return None


@dataclass(frozen=True)
class ProblemDef:
    name: str
    domain: str
    objects: tuple  # ((name, type), ...)
    init: tuple  # ((fluent, args, value), ...)
    goal: Formula | None
