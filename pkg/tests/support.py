"""Shared helpers for the test suite: fixture loading, random Grapevine
walks, random formulas and independent oracles."""

from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import pjp
from pjp.domain import load_instance
from pjp.semantics import And, Believes, Knows, Lit, Not, Pred, Sees, SeesVar, Var

FIXTURES = Path(pjp.__file__).parent / "fixtures"


def fixture_paths(name: str):
    d = FIXTURES / name
    return d / "domain.pddl", d / "problem.pddl"


@lru_cache(maxsize=None)
def instance(name: str, **overrides):
    return load_instance(*fixture_paths(name), overrides=overrides or None)


def load(name: str, overrides=None):
    return load_instance(*fixture_paths(name), overrides=overrides)


def plan_text(name: str) -> str:
    return (FIXTURES / name / "plan.txt").read_text(encoding="utf-8")


def run_plan(inst, plan):
    from pjp.planner import parse_plan
    seq = inst.initial_sequence()
    ctx = inst.new_context()
    for name, args in parse_plan(plan) if isinstance(plan, str) else plan:
        seq = inst.apply(seq, inst.find_action(name, args), ctx)
    return seq


def random_walk(inst, rng: random.Random, length: int):
    seq = inst.initial_sequence()
    ctx = inst.new_context()
    for _ in range(length):
        acts = inst.applicable_actions(seq, ctx)
        if not acts:
            break
        seq = inst.apply(seq, rng.choice(acts), ctx, check=False)
    return seq


# ---------------------------------------------------------------------------
# random formulas over a Grapevine instance

ATOM_VARS = ("shared(sa)", "shared_loc(sa)", "sharing", "agent_loc(b)", "secret(sa)")


def random_atom(rng: random.Random, seq, allow_none: bool = False):
    """Compare a variable with a value it takes somewhere in ``seq``.

    The ⊥-equality predicate decides ignorance instead of reporting ½, so it
    is only drawn when ``allow_none`` is set.
    """
    v = rng.choice(ATOM_VARS)
    pool = [s.get(v) for s in seq if s.get(v) is not None] or [0]
    if allow_none:
        pool.append(None)
    x = rng.choice(pool)
    if x is None or isinstance(x, str):
        rel = rng.choice(["=", "!="])
    else:
        rel = rng.choice(["=", "=", "!=", "<=", ">"])
    return Pred(rel, Var(v), Lit(x))


def random_formula(rng: random.Random, seq, agents, depth: int, allow_none: bool = False):
    """A formula with modal depth at most ``depth``."""
    r = rng.random()
    if depth == 0 or r < 0.25:
        if depth > 0 and r < 0.05:
            return SeesVar(rng.choice(agents), rng.choice(ATOM_VARS))
        return random_atom(rng, seq, allow_none)
    if r < 0.35:
        return Not(random_formula(rng, seq, agents, depth, allow_none))
    if r < 0.45:
        return And(random_formula(rng, seq, agents, depth, allow_none), random_formula(rng, seq, agents, depth, allow_none))
    op = rng.choice([Believes, Believes, Believes, Knows, Sees])
    return op(rng.choice(agents), random_formula(rng, seq, agents, depth - 1, allow_none))


# ---------------------------------------------------------------------------
# oracles


def brute_retrieve(seq, m, v):
    """Retrieval written directly from its set definition."""
    n = len(seq) - 1
    lt = [j for j in range(n + 1) if v in seq[j] and seq[j][v] is not None and j <= m]
    rt = [j for j in range(n + 1) if v in seq[j] and seq[j][v] is not None and m < j]
    if lt:
        return seq[max(lt)][v]
    if rt:
        return seq[min(rt)][v]
    return None


def exact_first_poly(points, t):
    """Two-point extrapolation in exact rationals; picks the pair by the
    bracketing case analysis."""
    pts = [(Fraction(a), Fraction(b)) for a, b in points]
    if not pts:
        return None
    if len(pts) == 1:
        return pts[0][1]
    before = [p for p in pts if p[0] <= t]
    after = [p for p in pts if p[0] > t]
    if before and after:
        (t1, y1), (t2, y2) = before[-1], after[0]
    elif before:
        (t1, y1), (t2, y2) = before[-2], before[-1]
    else:
        (t1, y1), (t2, y2) = after[0], after[1]
    return (t - t1) / (t1 - t2) * (y1 - y2) + y1


def exact_quadratic(points, t):
    """Lagrange interpolation in exact rationals."""
    pts = [(Fraction(a), Fraction(b)) for a, b in points]
    total = Fraction(0)
    for i, (xi, yi) in enumerate(pts):
        term = yi
        for j, (xj, _) in enumerate(pts):
            if i != j:
                term *= (t - xj) / (xi - xj)
        total += term
    return total


def iddfs_optimum(inst, max_depth: int):
    """Length of the shortest plan by iterative deepening, or None."""
    ctx = inst.new_context(count_segments=False)

    def dfs(seq, left):
        if inst.goal_holds(ctx.view(seq)):
            return True
        if left == 0:
            return False
        return any(dfs(inst.apply(seq, a, ctx, check=False), left - 1)
                   for a in inst.applicable_actions(ctx.view(seq)))

    root = inst.initial_sequence()
    for d in range(max_depth + 1):
        if dfs(root, d):
            return d
    return None


# ---------------------------------------------------------------------------
# PR plugins for the CLI tests


def broken_pr(points, t):
    """Ignores its observations entirely."""
    return t


def doubling_pr(points, t):
    return points[-1][1] * 2 ** (t - points[-1][0])
