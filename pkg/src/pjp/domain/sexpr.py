"""A small s-expression reader with source positions.

Besides parenthesised lists and atoms it understands ``"strings"``,
``[1.0,2.0]`` coefficient vectors (empty slots read as ``None``) and
``;`` line comments.  Commas outside vectors are treated as whitespace, so
``(?a - agent, ?s - secret)`` reads like ``(?a - agent ?s - secret)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class ParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int, source: str | None = None):
        where = f"{source}:" if source else ""
        super().__init__(f"{where}{line}:{col}: {msg}")
        self.msg = msg
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Pos:
    line: int
    col: int


@dataclass
class Atom:
    text: str
    pos: Pos = field(compare=False)

    def __repr__(self):
        return self.text


@dataclass
class Str:
    text: str
    pos: Pos = field(compare=False)

    def __repr__(self):
        return f'"{self.text}"'


@dataclass
class Vec:
    items: tuple
    pos: Pos = field(compare=False)


@dataclass
class SList:
    items: list
    pos: Pos = field(compare=False)

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    def __getitem__(self, i):
        return self.items[i]

    @property
    def head(self) -> str | None:
        return self.items[0].text if self.items and isinstance(self.items[0], Atom) else None


_DELIMS = set("()[]\";")


def parse_number(text: str):
    """``int`` for integral literals, ``float`` otherwise, ``None`` if not numeric."""
    try:
        return int(text)
    except ValueError:
        pass
    try:
        x = float(text)
    except ValueError:
        return None
    return x if text.lower() not in ("nan", "inf", "-inf", "+inf", "infinity") else None


def read(text: str, source: str | None = None) -> list:
    """Read every top-level expression of ``text``."""
    i, line, col = 0, 1, 1
    n = len(text)
    stack: list[SList] = []
    top: list = []

    def err(msg, ln=None, cl=None):
        raise ParseError(msg, ln or line, cl or col, source)

    def emit(node):
        (stack[-1].items if stack else top).append(node)

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch.isspace() or ch == ",":
            i += 1
            col += 1
            continue
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        pos = Pos(line, col)
        if ch == "(":
            stack.append(SList([], pos))
            i += 1
            col += 1
        elif ch == ")":
            if not stack:
                err("unexpected ')'")
            node = stack.pop()
            emit(node)
            i += 1
            col += 1
        elif ch == '"':
            j = text.find('"', i + 1)
            if j < 0 or "\n" in text[i:j]:
                err("unterminated string")
            emit(Str(text[i + 1:j], pos))
            col += j + 1 - i
            i = j + 1
        elif ch == "[":
            j = text.find("]", i + 1)
            if j < 0 or "\n" in text[i:j]:
                err("unterminated '['")
            body = text[i + 1:j]
            items = []
            if body.strip():
                for k, part in enumerate(body.split(",")):
                    part = part.strip()
                    if not part:
                        items.append(None)
                        continue
                    x = parse_number(part)
                    if x is None:
                        err(f"bad vector entry {part!r}", line, col + 1)
                    items.append(x)
            elif "," in body:
                items = [None] * (body.count(",") + 1)
            emit(Vec(tuple(items), pos))
            col += j + 1 - i
            i = j + 1
        elif ch == "]":
            err("unexpected ']'")
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in _DELIMS and text[j] != ",":
                j += 1
            emit(Atom(text[i:j], pos))
            col += j - i
            i = j
    if stack:
        p = stack[-1].pos
        raise ParseError("unclosed '('", p.line, p.col, source)
    return top
