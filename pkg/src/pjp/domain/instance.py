"""Grounded planning instances: initial sequence, successor generation and
action application with processual evolution."""

from __future__ import annotations

import itertools
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

from pjp.core import ObservationModel, State, VarTerm, VisibilityRule, Atom, split_var, var_name
from pjp.domain.model import Assign, DomainDef, ProblemDef, SeeDecl, SelfDecl
from pjp.perspectives import EvalContext, View
from pjp.prediction import Omega, OmegaEntry, PRRegistry, world_value
from pjp.semantics import (And, Believes, Epi, Jp, Knows, Lit, Not, Pred, PrefixItem, Sees,
                           SeesVar, TRUE, Var, evaluate, term_value)


class InstanceError(ValueError):
    """The domain and problem do not fit together."""


class InapplicableActionError(ValueError):
    pass


@dataclass(frozen=True)
class GroundAction:
    name: str
    args: tuple
    precondition: object  # Formula | None
    effects: tuple  # ((variable, Term), ...)

    @property
    def label(self) -> str:
        return "(" + " ".join((self.name,) + self.args) + ")"

    def __str__(self) -> str:
        return self.label


def parse_action_label(text: str) -> tuple[str, tuple]:
    """``"(move c rm2)"`` or ``"move c rm2"`` -> ``("move", ("c", "rm2"))``."""
    t = text.strip()
    if t.startswith("(") and t.endswith(")"):
        t = t[1:-1]
    parts = t.replace(",", " ").split()
    if not parts:
        raise ValueError(f"empty action {text!r}")
    return parts[0], tuple(parts[1:])


# ---------------------------------------------------------------------------
# substitution


def _sub_name(name: str, b: Mapping[str, str]) -> str:
    f, args = split_var(name)
    return var_name(f, [b.get(a, a) for a in args])


def _sub_prefix(prefix, b):
    return tuple(PrefixItem(i.negated, i.op, b.get(i.agent, i.agent)) for i in prefix)


def substitute(x, b: Mapping[str, str]):
    """Replace ``?params`` in a formula or term."""
    if isinstance(x, Var):
        return Var(_sub_name(x.name, b))
    if isinstance(x, Lit):
        return Lit(b.get(x.value, x.value)) if isinstance(x.value, str) else x
    if isinstance(x, Jp):
        return Jp(_sub_prefix(x.prefix, b), _sub_name(x.var, b))
    if isinstance(x, Epi):
        return Epi(_sub_prefix(x.prefix, b), substitute(x.formula, b))
    if isinstance(x, Pred):
        return Pred(x.rel, substitute(x.left, b), substitute(x.right, b))
    if isinstance(x, Not):
        return Not(substitute(x.sub, b))
    if isinstance(x, And):
        return And(substitute(x.left, b), substitute(x.right, b))
    if isinstance(x, SeesVar):
        return SeesVar(b.get(x.agent, x.agent), _sub_name(x.var, b))
    if isinstance(x, (Sees, Knows, Believes)):
        return type(x)(b.get(x.agent, x.agent), substitute(x.sub, b))
    if x is None:
        return None
    raise TypeError(f"cannot substitute into {x!r}")


def _symbols(x, vars_out: set, agents_out: set) -> None:
    if isinstance(x, Var):
        vars_out.add(x.name)
    elif isinstance(x, (Jp, Epi)):
        agents_out.update(i.agent for i in x.prefix)
        if isinstance(x, Jp):
            vars_out.add(x.var)
        else:
            _symbols(x.formula, vars_out, agents_out)
    elif isinstance(x, Pred):
        _symbols(x.left, vars_out, agents_out)
        _symbols(x.right, vars_out, agents_out)
    elif isinstance(x, Not):
        _symbols(x.sub, vars_out, agents_out)
    elif isinstance(x, And):
        _symbols(x.left, vars_out, agents_out)
        _symbols(x.right, vars_out, agents_out)
    elif isinstance(x, (Sees, Knows, Believes)):
        agents_out.add(x.agent)
        _symbols(x.sub, vars_out, agents_out)


# ---------------------------------------------------------------------------


class PlanningInstance:
    """A domain bound to a problem: ground variables, Ω, the observation
    model, ground actions and the goal."""

    AGENT_TYPE = "agent"

    def __init__(self, domain: DomainDef, problem: ProblemDef,
                 registry: PRRegistry | None = None, overrides: Mapping[str, str] | None = None):
        self.domain = domain
        self.problem = problem
        registry = registry or PRRegistry()
        if overrides:
            registry = registry.with_overrides(overrides)
        self.registry = registry

        self.objects: dict[str, list[str]] = {}
        seen_obj = set()
        for o, t in problem.objects:
            if o in seen_obj:
                raise InstanceError(f"duplicate object {o!r}")
            seen_obj.add(o)
            self.objects.setdefault(t, []).append(o)
        for t in self.objects:
            self.objects[t].sort()
        self.all_objects = sorted(seen_obj)
        self.agents = tuple(self.objects.get(self.AGENT_TYPE, ()))

        self.variables = self._ground_variables()
        varset = set(self.variables)
        self.omega = self._omega(varset)
        self.model = self._observation_model(varset)
        self.init = self._initial_state(varset)
        self.actions = self._ground_actions(varset)
        self.goal = problem.goal
        if self.goal is not None:
            self._check_symbols(self.goal, varset, "goal")
        self.ctx = self.new_context()

    # -- construction ---------------------------------------------------

    def objects_of(self, typ: str) -> list[str]:
        if typ == "object":
            return self.all_objects
        if typ not in self.objects and typ not in self.domain.types:
            raise InstanceError(f"unknown type {typ!r}")
        return self.objects.get(typ, [])

    def _ground_variables(self) -> tuple[str, ...]:
        out = []
        for f in self.domain.functions:
            pools = [self.objects_of(t) for _, t in f.params]
            out.extend(var_name(f.name, combo) for combo in itertools.product(*pools))
        return tuple(sorted(out))

    def _omega(self, varset) -> Omega:
        entries = {}
        for r in self.domain.rules:
            v = var_name(r.fluent, r.args)
            if v not in varset:
                raise InstanceError(f"rule for undeclared variable {v}")
            if r.type not in self.registry:
                raise InstanceError(f"no PR function for type {r.type!r}")
            entries[v] = OmegaEntry(r.type, r.eta, r.believed_eta)
        return Omega(entries)

    def _observation_model(self, varset) -> ObservationModel:
        self_vars, rules = {}, []
        selfs = [d for d in self.domain.visibility if isinstance(d, SelfDecl)]
        if self.agents and len(selfs) != 1:
            raise InstanceError("the :visibility section needs exactly one (self ...) entry")
        for a in self.agents:
            v = var_name(selfs[0].fluent, [a if x == "?self" else x for x in selfs[0].args])
            if v not in varset:
                raise InstanceError(f"self variable {v} is not declared")
            self_vars[a] = v
        for d in self.domain.visibility:
            if isinstance(d, SeeDecl):
                atoms = []
                for g in d.guards:
                    sides = [VarTerm(var_name(s[1], s[2])) if s[0] == "var" else s[1] for s in g]
                    atoms.append(Atom(sides[0], sides[1]))
                rules.append(VisibilityRule(var_name(d.fluent, d.args), tuple(atoms)))
        return ObservationModel(self.agents, self_vars, rules)

    def _initial_state(self, varset) -> State:
        d = {}
        for f, args, value in self.problem.init:
            v = var_name(f, args)
            if v not in varset:
                raise InstanceError(f"init assigns undeclared variable {v}")
            if v in d:
                raise InstanceError(f"init assigns {v} twice")
            d[v] = value
        evolving = dict(self.omega.evolving())
        missing = [v for v in self.variables if v not in d and v not in evolving]
        if missing:
            raise InstanceError(f"init does not assign {missing[0]}"
                                + (f" (and {len(missing) - 1} more)" if len(missing) > 1 else ""))
        for v, e in evolving.items():
            d[v] = world_value(e.type, e.eta, 0)
        return State((v, d[v]) for v in self.variables)

    def _check_symbols(self, f, varset, where: str) -> None:
        vs, ags = set(), set()
        _symbols(f, vs, ags)
        bad = sorted(vs - varset)
        if bad:
            raise InstanceError(f"{where} references unknown variable {bad[0]}")
        bad = sorted(a for a in ags if a not in self.agents)
        if bad:
            raise InstanceError(f"{where} references unknown agent {bad[0]}")

    def _ground_effects(self, effects, b, out: list) -> None:
        for e in effects:
            if isinstance(e, Assign):
                v = var_name(e.fluent, [b.get(a, a) for a in e.args])
                out.append((v, substitute(e.value, b)))
            else:
                pools = [self.objects_of(t) for _, t in e.params]
                for combo in itertools.product(*pools):
                    nb = dict(b)
                    nb.update(zip((p for p, _ in e.params), combo))
                    self._ground_effects(e.effects, nb, out)

    def _ground_actions(self, varset) -> tuple[GroundAction, ...]:
        out = []
        for schema in self.domain.actions:
            pools = [self.objects_of(t) for _, t in schema.params]
            for combo in itertools.product(*pools):
                b = dict(zip((p for p, _ in schema.params), combo))
                pre = substitute(schema.precondition, b)
                effs: list = []
                self._ground_effects(schema.effects, b, effs)
                label = f"{schema.name}{combo}"
                targets = [v for v, _ in effs]
                if len(set(targets)) != len(targets):
                    raise InstanceError(f"{label} assigns a variable twice")
                for v, t in effs:
                    if v not in varset:
                        raise InstanceError(f"{label} assigns undeclared variable {v}")
                    self._check_symbols(t, varset, label)
                if pre is not None:
                    self._check_symbols(pre, varset, label)
                out.append(GroundAction(schema.name, tuple(combo), pre, tuple(effs)))
        out.sort(key=lambda a: (a.name, a.args))
        return tuple(out)

    # -- runtime --------------------------------------------------------

    def new_context(self, count_segments: bool = True) -> EvalContext:
        return EvalContext(self.model, self.omega, self.registry, self.variables,
                           count_segments=count_segments)

    def initial_sequence(self) -> tuple[State, ...]:
        return (self.init,)

    def view(self, seq, ctx: EvalContext | None = None) -> View:
        return (ctx or self.ctx).view(seq)

    def find_action(self, name: str, args: Sequence[str]) -> GroundAction:
        for a in self.actions:
            if a.name == name and a.args == tuple(args):
                return a
        raise InapplicableActionError(f"no such action ({' '.join((name,) + tuple(args))})")

    def is_applicable(self, view: View, action: GroundAction) -> bool:
        return action.precondition is None or evaluate(view.ctx, view, action.precondition) == TRUE

    def applicable_actions(self, seq_or_view, ctx: EvalContext | None = None) -> list[GroundAction]:
        view = seq_or_view if isinstance(seq_or_view, View) else self.view(seq_or_view, ctx)
        return [a for a in self.actions if self.is_applicable(view, a)]

    def evolve(self, state: State, t: int) -> dict:
        """Copy of ``state`` with every rule-governed variable moved to ``t``."""
        d = state.as_dict()
        for v, e in self.omega.evolving():
            d[v] = world_value(e.type, e.eta, t)
        return d

    def apply(self, seq, action: GroundAction, ctx: EvalContext | None = None,
              check: bool = True) -> tuple[State, ...]:
        """Append the successor state.

        Rule-governed variables advance first; effect right-hand sides are
        then read from the sequence extended by that evolved state, and all
        assignments happen at once.
        """
        ctx = ctx or self.ctx
        seq = tuple(seq)
        if check and not self.is_applicable(ctx.view(seq), action):
            raise InapplicableActionError(f"{action.label} is not applicable")
        t = len(seq)
        d = self.evolve(seq[-1], t)
        if action.effects:
            ext = ctx.view(seq + (State(d),))
            updates = [(v, term_value(ctx, ext, term)) for v, term in action.effects]
            d.update(updates)
        return seq + (State(d),)

    def goal_value(self, seq_or_view, ctx: EvalContext | None = None) -> float:
        if self.goal is None:
            return TRUE
        view = seq_or_view if isinstance(seq_or_view, View) else self.view(seq_or_view, ctx)
        return evaluate(view.ctx, view, self.goal)

    def goal_holds(self, seq_or_view, ctx: EvalContext | None = None) -> bool:
        return self.goal_value(seq_or_view, ctx) == TRUE
