"""Justified and predictive justified perspectives.

Perspectives are built lazily.  A *view* answers ``get(t, v)`` for a state
sequence that may never be materialised: the objective sequence, an agent's
observation of another view, or an agent's predictive justified perspective
of another view.  A perspective computes the whole series of one variable
at a time (one PR call per variable), and every view caches its children,
so nested beliefs cost one series per (agent chain, variable).
"""

from __future__ import annotations

import time
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from pjp.core import MISSING, ObservationModel, State, as_sequence
from pjp.prediction import Omega, PRRegistry, observed_points, retrieve


class UnknownVariableError(KeyError):
    pass


@dataclass
class Stats:
    """Counters shared by every view of one evaluation context."""

    segments: int = 0  # series computed by a genuine fit
    series: int = 0
    calls: int = 0  # external @epi/@jp calls
    call_time: float = 0.0

    def reset(self) -> None:
        self.segments = self.series = self.calls = 0
        self.call_time = 0.0

    @property
    def avg_call_ms(self) -> float:
        return 1000.0 * self.call_time / self.calls if self.calls else 0.0


class EvalContext:
    """Everything needed to build perspectives: the observation model, the
    processual-variable model, the PR registry and the variable universe."""

    def __init__(self, model: ObservationModel, omega: Omega | None = None,
                 registry: PRRegistry | None = None, variables: Iterable[str] | None = None,
                 count_segments: bool = False):
        self.model = model
        self.omega = omega or Omega.all_static()
        self.registry = registry or PRRegistry()
        self.variables = tuple(sorted(variables)) if variables is not None else None
        self._varset = frozenset(self.variables) if self.variables is not None else None
        self.count_segments = count_segments
        self.stats = Stats()
        # resolve every PR up front so unregistered types fail early
        self._pr_cache: dict[str, object] = {}

    def pr_for(self, v: str):
        pr = self._pr_cache.get(v)
        if pr is None:
            pr = self.registry[self.omega.type_of(v)]
            self._pr_cache[v] = pr
        return pr

    def check_variable(self, v: str) -> None:
        if self._varset is not None and v not in self._varset:
            raise UnknownVariableError(f"unknown variable {v!r}")

    def universe(self, seq: Sequence[State]) -> tuple[str, ...]:
        if self.variables is not None:
            return self.variables
        return tuple(sorted({v for s in seq for v in s}))

    def view(self, seq: Sequence) -> "ConcreteView":
        return ConcreteView(self, as_sequence(seq))


class View:
    """A lazily evaluated state sequence of length ``n + 1``."""

    ctx: EvalContext
    n: int

    def __init__(self, ctx: EvalContext, n: int):
        self.ctx = ctx
        self.n = n
        self._children: dict[tuple[str, str], View] = {}

    def get(self, t: int, v: str):
        """Value of ``v`` at ``t``: a value, ``None`` (⊥) or ``MISSING``."""
        raise NotImplementedError

    def lookup(self, t: int):
        return lambda name: self.get(t, name)

    def observed(self, agent: str) -> "ObservedView":
        key = ("o", agent)
        c = self._children.get(key)
        if c is None:
            self.ctx.model.check_agent(agent)
            c = self._children[key] = ObservedView(agent, self)
        return c

    def perspective(self, agent: str) -> "PerspectiveView":
        key = ("f", agent)
        c = self._children.get(key)
        if c is None:
            self.ctx.model.check_agent(agent)
            c = self._children[key] = PerspectiveView(agent, self)
        return c

    def chain(self, ops: Iterable[tuple[str, str]]) -> "View":
        """Follow ``("o"|"f", agent)`` steps, outermost first."""
        view = self
        for op, agent in ops:
            view = view.observed(agent) if op == "o" else view.perspective(agent)
        return view

    def column(self, v: str) -> list:
        return [self.get(t, v) for t in range(self.n + 1)]

    def materialize(self, variables: Iterable[str] | None = None) -> tuple[State, ...]:
        """Explicit sequence; absent variables are left out."""
        vs = list(variables) if variables is not None else list(self.ctx.universe(self._root_seq()))
        out = []
        for t in range(self.n + 1):
            d = {}
            for v in vs:
                x = self.get(t, v)
                if x is not MISSING:
                    d[v] = x
            out.append(State(d))
        return tuple(out)

    def _root_seq(self):
        raise NotImplementedError


class ConcreteView(View):
    def __init__(self, ctx: EvalContext, seq: tuple[State, ...]):
        if not seq:
            raise ValueError("empty state sequence")
        super().__init__(ctx, len(seq) - 1)
        self.seq = seq

    def get(self, t, v):
        return self.seq[t].get(v, MISSING)

    def _root_seq(self):
        return self.seq


class ObservedView(View):
    """``O_agent`` applied statewise to ``base``."""

    def __init__(self, agent: str, base: View):
        super().__init__(base.ctx, base.n)
        self.agent = agent
        self.base = base
        self._vis: dict[tuple[int, str], bool] = {}

    def sees(self, t: int, v: str) -> bool:
        key = (t, v)
        r = self._vis.get(key)
        if r is None:
            r = self._vis[key] = self.ctx.model.visible(self.agent, v, self.base.lookup(t))
        return r

    def get(self, t, v):
        return self.base.get(t, v) if self.sees(t, v) else MISSING

    def _root_seq(self):
        return self.base._root_seq()


class PerspectiveView(View):
    """Predictive justified perspective of ``agent`` on ``base``.

    Complete: every variable of the universe gets a value, possibly ``None``.
    """

    def __init__(self, agent: str, base: View):
        super().__init__(base.ctx, base.n)
        self.agent = agent
        self.base = base
        self.obs = base.observed(agent)
        self._cols: dict[str, list] = {}

    def get(self, t, v):
        col = self._cols.get(v)
        if col is None:
            col = self._cols[v] = self._column(v)
        return col[t]

    def _column(self, v: str) -> list:
        ctx = self.ctx
        n = self.n
        obs = self.obs
        points = []
        seen = []
        for t in range(n + 1):
            x = obs.get(t, v)
            if x is not MISSING and x is not None:
                points.append((t, x))
                seen.append(True)
            else:
                seen.append(False)
        points = tuple(points)
        pr = ctx.pr_for(v)
        pred = pr.series(points, n)
        ctx.stats.series += 1
        if ctx.count_segments and points and pr.is_genuine(points):
            ctx.stats.segments += 1
        model = ctx.model
        base = self.base
        out = []
        for t in range(n + 1):
            e = pred[t]
            if seen[t]:
                out.append(e)
            elif e is None or not model.visible(self.agent, v, base.lookup(t), value=e):
                out.append(e)
            else:
                # the prediction would contradict not seeing v now
                out.append(None)
        return out

    def _root_seq(self):
        return self.base._root_seq()


# ---------------------------------------------------------------------------
# eager entry points


def _ctx(model, omega=None, registry=None, seq=()):
    return EvalContext(model, omega, registry, {v for s in seq for v in s})


def pjp_perspective(model: ObservationModel, omega: Omega, registry: PRRegistry,
                    agent: str, seq: Sequence) -> tuple[State, ...]:
    """``f_agent(seq)`` as an explicit complete sequence."""
    seq = as_sequence(seq)
    ctx = _ctx(model, omega, registry, seq)
    return ctx.view(seq).perspective(agent).materialize()


def nested_perspective(model: ObservationModel, omega: Omega, registry: PRRegistry,
                       agents: Sequence[str], seq: Sequence) -> tuple[State, ...]:
    """``f_ak(...f_a1(seq)...)``: the first agent is the outermost believer."""
    if not agents:
        raise ValueError("nested_perspective needs at least one agent")
    seq = as_sequence(seq)
    ctx = _ctx(model, omega, registry, seq)
    return ctx.view(seq).chain(("f", a) for a in agents).materialize()


def jp_perspective(model: ObservationModel, agent: str, seq: Sequence) -> tuple[State, ...]:
    """Justified perspective without prediction.

    Retrieval runs on the raw prefix ``[s_0..s_t]`` from the agent's last
    observation of each variable at or before ``t``.
    """
    seq = as_sequence(seq)
    if not seq:
        raise ValueError("empty state sequence")
    model.check_agent(agent)
    variables = sorted({v for s in seq for v in s})
    obs = [model.observe(agent, s) for s in seq]
    out = []
    for t, s in enumerate(seq):
        lookup = lambda name, s=s: s.get(name, MISSING)
        d = {}
        for v in variables:
            lt = max((j for j in range(t + 1) if v in obs[j]), default=-1)
            e = retrieve(seq[:t + 1], lt, v)
            cur = s.get(v, MISSING)
            keep = (cur is not MISSING and (cur == e if e is not None else cur is None)) \
                or e is None or not model.visible(agent, v, lookup, value=e)
            d[v] = e if keep else None
        out.append(State(d))
    return tuple(out)


class Timer:
    """Accumulates wall-clock time of external calls into ``stats``."""

    __slots__ = ("stats", "_t0")

    def __init__(self, stats: Stats):
        self.stats = stats

    def __enter__(self):
        self._t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.stats.calls += 1
        self.stats.call_time += time.perf_counter() - self._t0
        return False


__all__ = ["EvalContext", "View", "ConcreteView", "ObservedView", "PerspectiveView", "Stats",
           "UnknownVariableError", "pjp_perspective", "nested_perspective", "jp_perspective",
           "observed_points", "Timer"]
