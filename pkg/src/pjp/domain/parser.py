"""Parser for the domain / problem dialect.

Domain sections: ``:types :functions :rules :visibility :action``.
Problem sections: ``:domain :objects :init :goal``.  Conditions may be an
``(and ...)`` or a bare list of conditions; the same holds for effects.
"""

from __future__ import annotations

from pjp.core import var_name
from pjp.domain.model import (ActionSchema, Assign, DomainDef, Forall, FunctionDecl, ProblemDef,
                              RuleDecl, SeeDecl, SelfDecl)
from pjp.domain.sexpr import Atom, ParseError, SList, Str, Vec, parse_number, read
from pjp.prediction import BUILTIN_PR, OmegaEntry
from pjp.semantics import (RELATIONS, And, Epi, Imply, Jp, Lit, Not, Or, Pred, PrefixError, Var,
                           conj, parse_query_prefix)

NONE_SYMBOLS = ("none", "jp.none")


class _Reader:
    def __init__(self, source: str | None, functions: dict | None):
        self.source = source
        self.functions = functions  # name -> arity, or None to skip checks

    def fail(self, msg: str, node) -> None:
        pos = getattr(node, "pos", None)
        raise ParseError(msg, pos.line if pos else 0, pos.col if pos else 0, self.source)

    # -- atoms ------------------------------------------------------------

    def atom(self, node, what: str = "symbol") -> str:
        if not isinstance(node, Atom):
            self.fail(f"expected {what}", node)
        return node.text

    def value(self, node):
        """Literal value: number, symbol or ``None`` for ``none``."""
        if not isinstance(node, Atom):
            self.fail("expected a literal value", node)
        x = parse_number(node.text)
        if x is not None:
            return x
        return None if node.text in NONE_SYMBOLS else node.text

    def typed_list(self, node) -> tuple:
        """``?a ?b - agent ?s - secret`` -> ``(("?a","agent"), ...)``."""
        items = node.items if isinstance(node, SList) else node
        out, pending = [], []
        i = 0
        while i < len(items):
            it = items[i]
            text = self.atom(it, "name")
            if text == "-":
                if i + 1 >= len(items) or not pending:
                    self.fail("dangling '-' in typed list", it)
                typ = self.atom(items[i + 1], "type name")
                out.extend((p, typ) for p in pending)
                pending = []
                i += 2
                continue
            pending.append(text)
            i += 1
        out.extend((p, "object") for p in pending)
        return tuple(out)

    # -- variables, terms, formulas --------------------------------------

    def fluent(self, node) -> tuple[str, tuple]:
        if not isinstance(node, SList) or not node.items:
            self.fail("expected a function term like (f ?x)", node)
        name = self.atom(node[0], "function name")
        args = tuple(self.atom(a, "argument") for a in node.items[1:])
        if self.functions is not None:
            if name not in self.functions:
                self.fail(f"unknown function {name!r}", node)
            if self.functions[name] != len(args):
                self.fail(f"function {name!r} takes {self.functions[name]} arguments", node)
        return name, args

    def prefix(self, node):
        if isinstance(node, SList) and len(node) == 1 and isinstance(node[0], Str):
            node = node[0]
        if not isinstance(node, Str):
            self.fail('expected a quoted query prefix like ("b[a]")', node)
        try:
            return parse_query_prefix(node.text)
        except PrefixError as e:
            raise ParseError(str(e), node.pos.line, node.pos.col + 1 + e.pos, self.source) from None

    def term(self, node):
        if isinstance(node, Atom):
            return Lit(self.value(node))
        if isinstance(node, Str):
            return Lit(node.text)
        if isinstance(node, SList) and node.head == "@jp":
            if len(node) != 3:
                self.fail("@jp takes a prefix and a variable", node)
            f, args = self.fluent(node[2])
            return Jp(self.prefix(node[1]), var_name(f, args))
        if isinstance(node, SList) and node.head == "@epi":
            if len(node) != 3:
                self.fail("@epi takes a prefix and a formula", node)
            return Epi(self.prefix(node[1]), self.formula(node[2]))
        f, args = self.fluent(node)
        return Var(var_name(f, args))

    def formula(self, node):
        if not isinstance(node, SList) or not node.items:
            self.fail("expected a condition", node)
        if isinstance(node[0], SList):  # bare list of conditions
            return conj(*(self.formula(x) for x in node.items))
        head = node.head
        rest = node.items[1:]
        if head == "and":
            if not rest:
                self.fail("empty (and)", node)
            return conj(*(self.formula(x) for x in rest))
        if head == "or":
            if not rest:
                self.fail("empty (or)", node)
            out = self.formula(rest[-1])
            for x in reversed(rest[:-1]):
                out = Or(self.formula(x), out)
            return out
        if head == "not":
            if len(rest) != 1:
                self.fail("(not) takes one condition", node)
            return Not(self.formula(rest[0]))
        if head == "imply":
            if len(rest) != 2:
                self.fail("(imply) takes two conditions", node)
            return Imply(self.formula(rest[0]), self.formula(rest[1]))
        if head in RELATIONS:
            if len(rest) != 2:
                self.fail(f"({head}) takes two terms", node)
            return Pred(head, self.term(rest[0]), self.term(rest[1]))
        self.fail(f"unknown condition {head!r}", node)

    def effects(self, node) -> tuple:
        if not isinstance(node, SList):
            self.fail("expected effects", node)
        if not node.items:
            return ()
        if isinstance(node[0], SList):
            return tuple(e for x in node.items for e in self.effects(x))
        head = node.head
        if head == "and":
            return tuple(e for x in node.items[1:] for e in self.effects(x))
        if head == "assign":
            if len(node) != 3:
                self.fail("(assign) takes a variable and a value", node)
            f, args = self.fluent(node[1])
            return (Assign(f, args, self.term(node[2])),)
        if head == "forall":
            if len(node) < 3 or not isinstance(node[1], SList):
                self.fail("(forall (params) effect...)", node)
            params = self.typed_list(node[1])
            body = tuple(e for x in node.items[2:] for e in self.effects(x))
            return (Forall(params, body),)
        self.fail(f"unknown effect {head!r}", node)


def _sections(r: _Reader, top: list, kind: str):
    if len(top) != 1:
        r.fail("expected exactly one (define ...) form", top[1] if len(top) > 1 else None)
    d = top[0]
    if not isinstance(d, SList) or d.head != "define" or len(d) < 2:
        r.fail("expected (define ...)", d)
    hdr = d[1]
    if not isinstance(hdr, SList) or hdr.head != kind or len(hdr) != 2:
        r.fail(f"expected ({kind} NAME)", hdr)
    name = r.atom(hdr[1], f"{kind} name")
    secs = []
    for s in d.items[2:]:
        if not isinstance(s, SList) or not s.head or not s.head.startswith(":"):
            r.fail("expected a (:section ...)", s)
        secs.append(s)
    return name, secs


def parse_domain(text: str, source: str | None = None) -> DomainDef:
    r = _Reader(source, None)
    name, secs = _sections(r, read(text, source), "domain")
    types, functions, rules, vis, actions = (), [], [], [], []
    action_nodes = []
    rule_nodes = []
    vis_nodes = []
    for s in secs:
        h = s.head
        if h == ":types":
            types = tuple(r.atom(x, "type") for x in s.items[1:] if r.atom(x) != "-")
        elif h == ":functions" or h == ":predicates":
            for f in s.items[1:]:
                if not isinstance(f, SList) or not f.items:
                    r.fail("expected (name ?param - type ...)", f)
                fname = r.atom(f[0], "function name")
                if any(x.name == fname for x in functions):
                    r.fail(f"duplicate function {fname!r}", f)
                functions.append(FunctionDecl(fname, r.typed_list(f.items[1:])))
        elif h == ":rules":
            rule_nodes.extend(s.items[1:])
        elif h == ":visibility":
            vis_nodes.extend(s.items[1:])
        elif h == ":action":
            action_nodes.append(s)
        else:
            r.fail(f"unknown domain section {h!r}", s)
    r.functions = {f.name: len(f.params) for f in functions}

    seen = set()
    for node in rule_nodes:
        if not isinstance(node, SList) or len(node) != 4:
            r.fail("expected (type (f args) [eta] [believed])", node)
        typ = r.atom(node[0], "processual type")
        if typ not in BUILTIN_PR:
            r.fail(f"unknown processual type {typ!r}", node[0])
        f, args = r.fluent(node[1])
        if (f, args) in seen:
            r.fail(f"duplicate rule for {var_name(f, args)}", node)
        seen.add((f, args))
        eta, bel = node[2], node[3]
        if not isinstance(eta, Vec) or not isinstance(bel, Vec):
            r.fail("expected coefficient vectors [..] [..]", node)
        if any(x is None for x in eta.items):
            r.fail("rule coefficients must all be given", eta)
        try:
            OmegaEntry(typ, eta.items, bel.items)
        except ValueError as e:
            r.fail(str(e), eta)
        rules.append(RuleDecl(typ, f, args, eta.items, bel.items))

    for node in vis_nodes:
        if not isinstance(node, SList) or node.head not in ("self", "see") or len(node) < 2:
            r.fail("expected (self (f ?self)) or (see (f ...) guard*)", node)
        f, args = r.fluent(node[1])
        if node.head == "self":
            if len(node) != 2 or "?self" not in args:
                r.fail("(self ...) needs exactly one variable mentioning ?self", node)
            vis.append(SelfDecl(f, args))
            continue
        guards = []
        for g in node.items[2:]:
            if not isinstance(g, SList) or g.head != "=" or len(g) != 3:
                r.fail("visibility guards are (= lhs rhs)", g)
            sides = []
            for side in g.items[1:]:
                if isinstance(side, SList):
                    gf, gargs = r.fluent(side)
                    sides.append(("var", gf, gargs))
                else:
                    sides.append(("const", r.value(side)))
            guards.append(tuple(sides))
        vis.append(SeeDecl(f, args, tuple(guards)))

    for s in action_nodes:
        if len(s) < 2:
            r.fail("action needs a name", s)
        aname = r.atom(s[1], "action name")
        if any(a.name == aname for a in actions):
            r.fail(f"duplicate action {aname!r}", s)
        params, pre, eff = (), None, ()
        items = s.items[2:]
        if len(items) % 2:
            r.fail("action body must be :key value pairs", s)
        for k, v in zip(items[::2], items[1::2]):
            key = r.atom(k, "keyword")
            if key == ":parameters":
                if not isinstance(v, SList):
                    r.fail("expected a parameter list", v)
                params = r.typed_list(v)
            elif key == ":precondition":
                pre = r.formula(v) if isinstance(v, SList) and v.items else None
            elif key == ":effect":
                eff = r.effects(v)
            else:
                r.fail(f"unknown action key {key!r}", k)
        _check_params(r, s, params, pre, eff)
        actions.append(ActionSchema(aname, params, pre, eff))
    return DomainDef(name, types, tuple(functions), tuple(rules), tuple(vis), tuple(actions))


def _check_params(r: _Reader, node, params, pre, eff) -> None:
    declared = {p for p, _ in params}
    used = set()
    _collect_params(pre, used)
    for e in eff:
        _collect_effect_params(e, used, declared)
    extra = sorted(used - declared)
    if extra:
        r.fail(f"undeclared parameter {extra[0]}", node)


def _collect_params(x, out: set) -> None:
    from pjp.core import split_var
    if x is None:
        return
    if isinstance(x, Var):
        out.update(a for a in split_var(x.name)[1] if a.startswith("?"))
    elif isinstance(x, Lit):
        if isinstance(x.value, str) and x.value.startswith("?"):
            out.add(x.value)
    elif isinstance(x, Jp):
        out.update(i.agent for i in x.prefix if i.agent.startswith("?"))
        _collect_params(Var(x.var), out)
    elif isinstance(x, Epi):
        out.update(i.agent for i in x.prefix if i.agent.startswith("?"))
        _collect_params(x.formula, out)
    elif isinstance(x, Pred):
        _collect_params(x.left, out)
        _collect_params(x.right, out)
    elif isinstance(x, (Not,)):
        _collect_params(x.sub, out)
    elif isinstance(x, And):
        _collect_params(x.left, out)
        _collect_params(x.right, out)
    elif hasattr(x, "sub"):
        out.add(x.agent) if x.agent.startswith("?") else None
        _collect_params(x.sub, out)


def _collect_effect_params(e, out: set, declared: set) -> None:
    if isinstance(e, Assign):
        out.update(a for a in e.args if a.startswith("?"))
        _collect_params(e.value, out)
    else:
        inner: set = set()
        for x in e.effects:
            _collect_effect_params(x, inner, declared)
        out.update(inner - {p for p, _ in e.params})


def parse_problem(text: str, domain: DomainDef | None = None, source: str | None = None) -> ProblemDef:
    functions = {f.name: len(f.params) for f in domain.functions} if domain else None
    r = _Reader(source, functions)
    name, secs = _sections(r, read(text, source), "problem")
    dom, objects, init, goal = "", (), [], None
    obj_node = None
    for s in secs:
        h = s.head
        if h == ":domain":
            dom = r.atom(s[1], "domain name") if len(s) == 2 else r.fail("(:domain NAME)", s)
        elif h == ":objects":
            objects = r.typed_list(s.items[1:])
            obj_node = s
        elif h == ":init":
            for a in s.items[1:]:
                if not isinstance(a, SList) or a.head != "=" or len(a) != 3:
                    r.fail("init entries are (= (f args) value)", a)
                f, args = r.fluent(a[1])
                init.append((f, args, r.value(a[2])))
        elif h == ":goal":
            if len(s) != 2:
                r.fail("(:goal FORMULA)", s)
            goal = r.formula(s[1])
        else:
            r.fail(f"unknown problem section {h!r}", s)
    if domain is not None:
        if dom and dom != domain.name:
            r.fail(f"problem is for domain {dom!r}, not {domain.name!r}", secs[0] if secs else None)
        known_types = set(domain.types) | {"object"}
        for o, t in objects:
            if t not in known_types:
                r.fail(f"undeclared type {t!r} for object {o!r}", obj_node)
    return ProblemDef(name, dom, objects, tuple(init), goal)
