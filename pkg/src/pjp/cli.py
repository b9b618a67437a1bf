"""``pjp`` command line: solve, validate, trace and check-model.

Exit codes: 0 solved / goal holds / checks pass, 1 unsolvable / goal fails /
checks fail, 2 parse or usage error, 3 search limit reached.
"""

from __future__ import annotations

import argparse
import importlib
import json
import os
import random
import sys
from pathlib import Path

from pjp.core import check_observation_properties
from pjp.domain import InstanceError, ParseError, load_instance, parse_domain
from pjp.domain.instance import InapplicableActionError
from pjp.perspectives import UnknownVariableError
from pjp.planner import Limits, QueryError, bfs_solve, parse_plan, trace, validate_plan
from pjp.prediction import (BUILTIN_PR, CallablePR, PRFunction, PRRegistry, UnknownTypeError, check_pr_consistency,
                            view_flag_model, view_flag_samples)
from pjp.semantics import PrefixError, render_jp

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_LIMIT = 0, 1, 2, 3

_UNITS = {"": 1, "B": 1, "K": 1000, "KB": 1000, "KIB": 1024, "M": 1000 ** 2, "MB": 1000 ** 2,
          "MIB": 1024 ** 2, "G": 1000 ** 3, "GB": 1000 ** 3, "GIB": 1024 ** 3}


def parse_size(text: str) -> int:
    s = text.strip().upper()
    num = s.rstrip("ABGIKM")
    unit = s[len(num):]
    if unit not in _UNITS or not num:
        raise argparse.ArgumentTypeError(f"bad memory size {text!r}")
    return int(float(num) * _UNITS[unit])


def parse_overrides(items) -> dict[str, str]:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ValueError(f"--pr-override expects TYPE=FUNCTION, got {item!r}")
        k, v = item.split("=", 1)
        k, v = k.strip(), v.strip()
        if v not in BUILTIN_PR:
            raise ValueError(f"unknown PR function {v!r} (known: {', '.join(sorted(BUILTIN_PR))})")
        out[k] = v
    return out


def load_plugins(items) -> dict[str, PRFunction]:
    """``TYPE=module:attr`` pairs; ``attr`` is a PRFunction (class or
    instance) or a plain ``f(points, t)``."""
    out = {}
    for item in items or ():
        if "=" not in item or ":" not in item.split("=", 1)[1]:
            raise ValueError(f"--pr-plugin expects TYPE=MODULE:ATTR, got {item!r}")
        k, ref = item.split("=", 1)
        mod, attr = ref.split(":", 1)
        obj = getattr(importlib.import_module(mod.strip()), attr.strip())
        if isinstance(obj, type) and issubclass(obj, PRFunction):
            obj = obj()
        elif not isinstance(obj, PRFunction):
            if not callable(obj):
                raise ValueError(f"plugin {ref!r} is not callable")
            obj = CallablePR(attr.strip(), obj)
        out[k.strip()] = obj
    return out


def _registry(args) -> PRRegistry:
    reg = PRRegistry().with_overrides(parse_overrides(args.pr_override))
    for k, fn in load_plugins(getattr(args, "pr_plugin", None)).items():
        reg = reg.register(k, fn)
    return reg


def _seed() -> int:
    return int(os.environ.get("PJP_SEED", "0"))


def _load(args):
    return load_instance(args.domain, args.problem, registry=_registry(args))


def cmd_solve(args) -> int:
    inst = _load(args)
    res = bfs_solve(inst, Limits(timeout=args.timeout, memory=args.memory, max_depth=args.max_depth))
    doc = json.dumps(res.as_dict(), sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(doc + "\n", encoding="utf-8")
    else:
        print(doc)
    if args.metrics:
        m = res.metrics
        print(f"|gen|={m.generated} |seg|={m.segments} tau_p(ms)={m.pjp_ms_avg:.2f} "
              f"tau_t(s)={m.total_s:.2f} |plan|={m.length if m.length is not None else '-'}",
              file=sys.stderr)
    if res.solved:
        return EXIT_OK
    return EXIT_LIMIT if res.limit in ("timeout", "memory") else EXIT_FAIL


def cmd_validate(args) -> int:
    inst = _load(args)
    plan = parse_plan(Path(args.plan).read_text(encoding="utf-8"))
    rep = validate_plan(inst, plan, args.query or ())
    if not rep.applicable:
        print(f"step {rep.failed_step + 1}: {rep.error}")
        return EXIT_FAIL
    g = {1.0: "true", 0.0: "false"}.get(rep.goal_value, "unknown")
    print(f"plan applicable ({len(plan)} steps); goal {g}")
    for q, v in rep.values.items():
        print(f"{q} = {render_jp(v)}")
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_trace(args) -> int:
    inst = _load(args)
    plan = parse_plan(Path(args.plan).read_text(encoding="utf-8"))
    tr = trace(inst, plan, args.query or ())
    text = tr.to_csv()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _random_walk_states(inst, rng: random.Random, walks: int, length: int):
    states, seqs = [], []
    for _ in range(walks):
        seq = inst.initial_sequence()
        for _ in range(length):
            acts = inst.applicable_actions(seq)
            if not acts:
                break
            seq = inst.apply(seq, rng.choice(acts), check=False)
        states.extend(seq)
        seqs.append(seq)
    return states, seqs


def cmd_check_model(args) -> int:
    text = Path(args.domain).read_text(encoding="utf-8")
    dom = parse_domain(text, source=args.domain)
    rng = random.Random(_seed())
    types = sorted({r.type for r in dom.rules} | {"static"})
    ok = True
    samples = None
    if args.problem:
        inst = _load(args)
        states, walks = _random_walk_states(inst, rng, args.walks, args.length)
        rep = check_observation_properties(inst.model, states, seed=_seed())
        print(f"observation model: {len(states)} states checked")
        for agent in inst.agents:
            bad = rep.failed(agent)
            for prop in ("contraction", "idempotence", "monotonicity"):
                print(f"  {agent:<8} {prop:<13} {'FAIL' if prop in bad else 'pass'}")
        ok &= rep.ok
        samples = walks
        model = inst.model
        registry = inst.registry
    else:
        registry = _registry(args)
        model = view_flag_model(("i", "j"), ("x", "y"))
        samples = view_flag_samples(rng, args.walks)
    print("PR functions:")
    print(f"  {'type':<14}{'function':<14}{'preserving':<12}{'recursive':<12}reconstructive")
    for t in types:
        pr = registry[t]
        r = check_pr_consistency(pr, samples, model=model, seed=_seed())
        rec = r.reconstructive.passed
        rec_s = "n/a" if rec is None else ("pass" if rec else "fail")
        print(f"  {t:<14}{pr.name:<14}{_pf(r.preserving.passed):<12}{_pf(r.recursive.passed):<12}{rec_s}")
        ok &= r.compulsory_ok
    return EXIT_OK if ok else EXIT_FAIL


def _pf(x) -> str:
    return "pass" if x else "FAIL"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pjp", description="Epistemic planning with predictive justified perspectives.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, problem=True, plan=False):
        sp.add_argument("domain")
        if problem:
            sp.add_argument("problem")
        if plan:
            sp.add_argument("plan")
        sp.add_argument("--pr-override", action="append", metavar="TYPE=FUNCTION",
                        help="bind a processual type to another PR function (repeatable)")
        sp.add_argument("--pr-plugin", action="append", metavar="TYPE=MODULE:ATTR",
                        help="bind a processual type to a user PR function (repeatable)")

    s = sub.add_parser("solve", help="breadth-first search for a plan")
    common(s)
    s.add_argument("--timeout", type=float, default=600.0, help="seconds (default 600)")
    s.add_argument("--memory", type=parse_size, default=parse_size("8GiB"), help="peak memory (default 8GiB)")
    s.add_argument("--max-depth", type=int, default=None)
    s.add_argument("--out", help="write the JSON result here instead of stdout")
    s.add_argument("--metrics", action="store_true", help="print a metrics row to stderr")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("validate", help="check a plan and its goal")
    common(v, plan=True)
    v.add_argument("--query", action="append", help="report a value, e.g. 'b[b]:shared(sa)'")
    v.set_defaults(func=cmd_validate)

    t = sub.add_parser("trace", help="per-timestamp query values as CSV")
    common(t, plan=True)
    t.add_argument("--query", action="append", help="PREFIX:VARIABLE, e.g. 'o[b]:shared(sa)' or 'b[a] b[c]:shared(sa)'")
    t.add_argument("--out")
    t.set_defaults(func=cmd_trace)

    c = sub.add_parser("check-model", help="observation and PR consistency checks")
    c.add_argument("domain")
    c.add_argument("problem", nargs="?")
    c.add_argument("--pr-override", action="append", metavar="TYPE=FUNCTION")
    c.add_argument("--pr-plugin", action="append", metavar="TYPE=MODULE:ATTR")
    c.add_argument("--walks", type=int, default=50)
    c.add_argument("--length", type=int, default=8)
    c.set_defaults(func=cmd_check_model)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        return args.func(args)
    except (ParseError, InstanceError, PrefixError, QueryError, UnknownTypeError,
            UnknownVariableError, InapplicableActionError, ValueError, KeyError, OSError,
            ImportError, AttributeError) as e:
        print(f"pjp: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
