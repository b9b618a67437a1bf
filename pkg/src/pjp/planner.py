"""Breadth-first epistemic planning, plan validation and perspective traces."""

from __future__ import annotations

import re
import resource
import sys
import time
from collections import deque
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from pjp.core import MISSING, format_value, split_var, var_name
from pjp.domain.instance import (GroundAction, InapplicableActionError, PlanningInstance,
                                 parse_action_label)
from pjp.perspectives import View
from pjp.semantics import TRUE, render_jp


@dataclass
class Limits:
    timeout: float | None = 600.0  # seconds
    memory: int | None = 8 * 1024 ** 3  # bytes of peak resident memory
    max_depth: int | None = None


@dataclass
class Metrics:
    generated: int = 0
    expanded: int = 0
    segments: int = 0
    pjp_ms_avg: float = 0.0
    total_s: float = 0.0
    length: int | None = None

    def as_dict(self) -> dict:
        return {"generated": self.generated, "expanded": self.expanded,
                "segments": self.segments, "pjp_ms_avg": round(self.pjp_ms_avg, 4),
                "total_s": round(self.total_s, 4), "length": self.length}


@dataclass
class SearchResult:
    status: str  # solved | unsolvable | timeout | memory | depth
    plan: list[GroundAction] | None
    metrics: Metrics
    limit: str | None = None

    @property
    def solved(self) -> bool:
        return self.status == "solved"

    def as_dict(self) -> dict:
        return {"status": self.status, "limit": self.limit,
                "plan": [a.label for a in self.plan] if self.plan is not None else [],
                "metrics": self.metrics.as_dict()}


def _peak_rss() -> int:
    r = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    return r if sys.platform == "darwin" else r * 1024


def bfs_solve(instance: PlanningInstance, limits: Limits | None = None) -> SearchResult:
    """Shortest plan by breadth-first search.

    Successors are generated in lexicographic action order, the goal is
    tested when a node is generated, and no duplicate detection is done.
    """
    limits = limits or Limits()
    ctx = instance.new_context()
    m = Metrics()
    t0 = time.perf_counter()

    def finish(status, plan=None, limit=None):
        m.total_s = time.perf_counter() - t0
        m.segments = ctx.stats.segments
        m.pjp_ms_avg = ctx.stats.avg_call_ms
        m.length = len(plan) if plan is not None else None
        return SearchResult(status, plan, m, limit)

    root = instance.initial_sequence()
    if instance.goal_holds(ctx.view(root)):
        return finish("solved", [])
    deadline = t0 + limits.timeout if limits.timeout is not None else None
    frontier = deque([(root, ())])
    depth_cut = False
    while frontier:
        seq, plan = frontier.popleft()
        if limits.max_depth is not None and len(plan) >= limits.max_depth:
            depth_cut = True
            continue
        m.expanded += 1
        view = ctx.view(seq)
        for a in instance.applicable_actions(view):
            child = instance.apply(seq, a, ctx, check=False)
            m.generated += 1
            if instance.goal_holds(ctx.view(child)):
                return finish("solved", list(plan + (a,)))
            frontier.append((child, plan + (a,)))
            if deadline is not None and time.perf_counter() > deadline:
                return finish("timeout", limit="timeout")
        if limits.memory is not None and m.expanded % 256 == 0 and _peak_rss() > limits.memory:
            return finish("memory", limit="memory")
    if depth_cut:
        return finish("depth", limit="depth")
    return finish("unsolvable")


# ---------------------------------------------------------------------------
# plans


def parse_plan(text: str) -> list[tuple[str, tuple]]:
    """One action per line, ``(name arg ...)``; ``;`` starts a comment."""
    out = []
    for line in text.splitlines():
        line = line.split(";", 1)[0].strip()
        if line:
            out.append(parse_action_label(line))
    return out


def _resolve(instance: PlanningInstance, step) -> GroundAction:
    if isinstance(step, GroundAction):
        return step
    name, args = parse_action_label(step) if isinstance(step, str) else step
    return instance.find_action(name, args)


@dataclass
class ValidationReport:
    ok: bool
    applicable: bool
    goal_value: float | None
    failed_step: int | None = None
    error: str | None = None
    sequence: tuple = ()
    values: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"ok": self.ok, "applicable": self.applicable, "goal": self.goal_value,
                "failed_step": self.failed_step, "error": self.error,
                "values": {k: render_jp(v) for k, v in self.values.items()}}


def validate_plan(instance: PlanningInstance, plan: Sequence, queries: Iterable[str] = ()) -> ValidationReport:
    """Apply ``plan`` step by step and evaluate the goal on the result.

    ``queries`` are trace queries (see :func:`parse_trace_query`) whose
    final values are reported.
    """
    ctx = instance.new_context()
    seq = instance.initial_sequence()
    for i, step in enumerate(plan):
        try:
            a = _resolve(instance, step)
            seq = instance.apply(seq, a, ctx)
        except InapplicableActionError as e:
            return ValidationReport(False, False, None, i, str(e), seq)
    view = ctx.view(seq)
    g = instance.goal_value(view)
    values = {}
    for q in queries:
        ops, v = parse_trace_query(q)
        ctx.check_variable(v)
        target = view.chain(ops)
        x = target.get(target.n, v)
        values[q] = None if x is MISSING else x
    return ValidationReport(g == TRUE, True, g, None, None, seq, values)


# ---------------------------------------------------------------------------
# traces

_TRACE_ITEM = re.compile(r"\s*([ob])\[([^\[\]\s]+)\]")


class QueryError(ValueError):
    pass


def parse_trace_query(text: str) -> tuple[list[tuple[str, str]], str]:
    """``"b[a] b[c]:shared(sa)"`` -> ``([("f","a"), ("f","c")], "shared(sa)")``.

    ``o[i]`` is agent i's observation and ``b[i]`` its perspective, applied
    left to right (the first item is the outermost believer).  The variable
    may be written ``shared(sa)`` or ``(shared sa)``.
    """
    if ":" not in text:
        raise QueryError(f"query {text!r} needs the form PREFIX:VARIABLE")
    prefix, var = text.rsplit(":", 1)
    ops = []
    pos = 0
    while pos < len(prefix):
        if prefix[pos:].strip() == "":
            break
        m = _TRACE_ITEM.match(prefix, pos)
        if not m:
            raise QueryError(f"bad query prefix {prefix!r} at position {pos}")
        ops.append(("o" if m.group(1) == "o" else "f", m.group(2)))
        pos = m.end()
    var = var.strip()
    if var.startswith("(") and var.endswith(")"):
        parts = var[1:-1].split()
        if not parts:
            raise QueryError("empty variable")
        var = var_name(parts[0], parts[1:])
    else:
        split_var(var)
    return ops, var


@dataclass
class Trace:
    timestamps: list[int]
    actions: list[str]
    rows: list[tuple[str, list]]

    def to_csv(self) -> str:
        import csv
        import io
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["query"] + self.timestamps)
        w.writerow(["action"] + self.actions)
        for label, vals in self.rows:
            w.writerow([label] + [format_value(x) for x in vals])
        return buf.getvalue()


def trace(instance: PlanningInstance, plan: Sequence, queries: Iterable[str]) -> Trace:
    """Per-timestamp values of each query along the plan's sequence."""
    parsed = [(q, *parse_trace_query(q)) for q in queries]
    ctx = instance.new_context()
    for _, ops, v in parsed:
        ctx.check_variable(v)
        for _, agent in ops:
            instance.model.check_agent(agent)
    seq = instance.initial_sequence()
    labels = [""]
    for step in plan:
        a = _resolve(instance, step)
        seq = instance.apply(seq, a, ctx)
        labels.append(" ".join((a.name,) + a.args))
    root: View = ctx.view(seq)
    rows = [(q, root.chain(ops).column(v)) for q, ops, v in parsed]
    return Trace(list(range(len(seq))), labels, rows)
