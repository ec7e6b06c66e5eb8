"""Regex subset parser and required-literal extraction.

Patterns are byte strings. The supported grammar is::

    alt     := concat ('|' concat)*
    concat  := (atom quant?)*
    atom    := literal | '.' | class | '(' alt ')' | '^' | '$' | escape
    quant   := ('*' | '+' | '?' | '{m}' | '{m,}' | '{,n}' | '{m,n}') '?'?

Anything else (look-around, back references, ``(?...)`` groups, word
boundaries) is rejected with a :class:`RegexParseError` carrying the byte
offset. Brace handling follows Python's ``re``: a ``{`` that does not open a
well-formed counted repetition is a literal.

:func:`extract_literal_tree` turns the AST into an AND/OR tree of literals
that every matching string must contain.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

__all__ = [
    "RegexParseError",
    "Literal",
    "AnyChar",
    "CharClass",
    "Anchor",
    "Group",
    "Concat",
    "Alternation",
    "Repeat",
    "RegexAst",
    "Lit",
    "And",
    "Or",
    "LiteralTree",
    "parse",
    "extract_literal_tree",
    "literal_tree",
    "literals",
    "to_sexpr",
    "from_sexpr",
    "escape_bytes",
]


class RegexParseError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


# --------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Literal:
    data: bytes


@dataclass(frozen=True)
class AnyChar:
    pass


@dataclass(frozen=True)
class CharClass:
    members: frozenset
    negated: bool = False

    def matches(self, byte: int) -> bool:
        return (byte in self.members) != self.negated


@dataclass(frozen=True)
class Anchor:
    kind: str  # "start" or "end"


@dataclass(frozen=True)
class Group:
    body: "RegexAst"


@dataclass(frozen=True)
class Concat:
    items: tuple


@dataclass(frozen=True)
class Alternation:
    branches: tuple


@dataclass(frozen=True)
class Repeat:
    node: "RegexAst"
    min: int
    max: Optional[int]  # None = unbounded
    lazy: bool = False


RegexAst = Union[Literal, AnyChar, CharClass, Anchor, Group, Concat, Alternation, Repeat]

_DIGITS = frozenset(b"0123456789")
_WORD = frozenset(b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_")
_SPACE = frozenset(b" \t\n\r\f\v")
_ALL = frozenset(range(256))
_CLASS_ESCAPES = {
    ord("d"): (_DIGITS, False),
    ord("D"): (_DIGITS, True),
    ord("w"): (_WORD, False),
    ord("W"): (_WORD, True),
    ord("s"): (_SPACE, False),
    ord("S"): (_SPACE, True),
}
_CONTROL_ESCAPES = {
    ord("n"): 0x0A,
    ord("t"): 0x09,
    ord("r"): 0x0D,
    ord("f"): 0x0C,
    ord("v"): 0x0B,
    ord("a"): 0x07,
}
_HEX = b"0123456789abcdefABCDEF"


class _Parser:
    def __init__(self, pattern: bytes):
        self.src = pattern
        self.pos = 0

    def peek(self) -> Optional[int]:
        return self.src[self.pos] if self.pos < len(self.src) else None

    def parse(self) -> RegexAst:
        node = self.alternation()
        if self.pos < len(self.src):
            # only an unbalanced ')' can stop the top-level alternation early
            raise RegexParseError("unbalanced parenthesis", self.pos)
        return node

    def alternation(self) -> RegexAst:
        branches = [self.concat()]
        while self.peek() == ord("|"):
            self.pos += 1
            branches.append(self.concat())
        if len(branches) == 1:
            return branches[0]
        return Alternation(tuple(branches))

    def concat(self) -> Concat:
        items: list = []
        while True:
            ch = self.peek()
            if ch is None or ch in b"|)":
                break
            start = self.pos
            atom = self.atom()
            atom = self.quantifier(atom, start)
            items.append(atom)
        return Concat(tuple(_merge_literals(items)))

    def atom(self) -> RegexAst:
        ch = self.src[self.pos]
        if ch == ord("("):
            open_at = self.pos
            self.pos += 1
            if self.peek() == ord("?"):
                raise RegexParseError("unsupported group extension", self.pos)
            body = self.alternation()
            if self.peek() != ord(")"):
                raise RegexParseError("missing ), unterminated subpattern", open_at)
            self.pos += 1
            return Group(body)
        if ch == ord("["):
            return self.char_class()
        if ch == ord("."):
            self.pos += 1
            return AnyChar()
        if ch == ord("^"):
            self.pos += 1
            return Anchor("start")
        if ch == ord("$"):
            self.pos += 1
            return Anchor("end")
        if ch == ord("\\"):
            return self.escape(in_class=False)
        if ch in b"*+?":
            raise RegexParseError("nothing to repeat", self.pos)
        if ch == ord("{") and self._counted_at(self.pos) is not None:
            raise RegexParseError("nothing to repeat", self.pos)
        self.pos += 1
        return Literal(bytes([ch]))

    def escape(self, in_class: bool):
        at = self.pos
        self.pos += 1
        ch = self.peek()
        if ch is None:
            raise RegexParseError("bad escape (end of pattern)", at)
        self.pos += 1
        if ch in _CLASS_ESCAPES:
            members, negated = _CLASS_ESCAPES[ch]
            return CharClass(members, negated)
        if ch in _CONTROL_ESCAPES:
            return Literal(bytes([_CONTROL_ESCAPES[ch]]))
        if ch == ord("x"):
            digits = self.src[self.pos:self.pos + 2]
            if len(digits) != 2 or any(d not in _HEX for d in digits):
                raise RegexParseError("incomplete escape \\x", at)
            self.pos += 2
            return Literal(bytes([int(digits, 16)]))
        if ch == ord("0"):
            return Literal(b"\x00")
        if (0x30 <= ch <= 0x39) or (0x41 <= ch <= 0x5A) or (0x61 <= ch <= 0x7A):
            raise RegexParseError(f"unsupported escape \\{chr(ch)}", at)
        return Literal(bytes([ch]))

    def char_class(self) -> CharClass:
        open_at = self.pos
        self.pos += 1
        negated = False
        if self.peek() == ord("^"):
            negated = True
            self.pos += 1
        members: set = set()
        first = True
        while True:
            ch = self.peek()
            if ch is None:
                raise RegexParseError("unterminated character set", open_at)
            if ch == ord("]") and not first:
                self.pos += 1
                break
            first = False
            lo = self._class_item()
            if isinstance(lo, CharClass):
                members |= lo.members if not lo.negated else (_ALL - lo.members)
                if self.peek() == ord("-") and self._peek_at(self.pos + 1) not in (None, ord("]")):
                    raise RegexParseError("bad character range", self.pos)
                continue
            if self.peek() == ord("-") and self._peek_at(self.pos + 1) not in (None, ord("]")):
                dash = self.pos
                self.pos += 1
                hi = self._class_item()
                if isinstance(hi, CharClass) or hi < lo:
                    raise RegexParseError("bad character range", dash)
                members.update(range(lo, hi + 1))
            else:
                members.add(lo)
        return CharClass(frozenset(members), negated)

    def _class_item(self):
        ch = self.src[self.pos]
        if ch == ord("\\"):
            item = self.escape(in_class=True)
            if isinstance(item, Literal):
                return item.data[0]
            return item
        self.pos += 1
        return ch

    def _peek_at(self, i: int) -> Optional[int]:
        return self.src[i] if i < len(self.src) else None

    def _counted_at(self, i: int):
        """Return (min, max, end_pos) if a counted repetition starts at i."""
        src = self.src
        if i >= len(src) or src[i] != ord("{"):
            return None
        j = i + 1
        if j < len(src) and src[j] == ord("}"):
            return None
        lo_start = j
        while j < len(src) and src[j] in _DIGITS:
            j += 1
        lo = src[lo_start:j]
        if j < len(src) and src[j] == ord(","):
            j += 1
            hi_start = j
            while j < len(src) and src[j] in _DIGITS:
                j += 1
            hi = src[hi_start:j]
        else:
            hi = lo
        if j >= len(src) or src[j] != ord("}"):
            return None
        mn = int(lo) if lo else 0
        mx = int(hi) if hi else None
        return mn, mx, j + 1

    def quantifier(self, atom: RegexAst, start: int) -> RegexAst:
        ch = self.peek()
        counted = None
        if ch in (ord("*"), ord("+"), ord("?")):
            mn, mx = {ord("*"): (0, None), ord("+"): (1, None), ord("?"): (0, 1)}[ch]
            self.pos += 1
        elif ch == ord("{") and (counted := self._counted_at(self.pos)) is not None:
            mn, mx, end = counted
            if mx is not None and mx < mn:
                raise RegexParseError("min repeat greater than max repeat", self.pos)
            self.pos = end
        else:
            return atom
        if isinstance(atom, Anchor):
            raise RegexParseError("nothing to repeat", start)
        lazy = False
        if self.peek() == ord("?"):
            lazy = True
            self.pos += 1
        nxt = self.peek()
        if nxt in (ord("*"), ord("+"), ord("?")) or (nxt == ord("{") and self._counted_at(self.pos)):
            raise RegexParseError("multiple repeat", self.pos)
        return Repeat(atom, mn, mx, lazy)


def _merge_literals(items: list) -> list:
    out: list = []
    for item in items:
        if isinstance(item, Literal) and out and isinstance(out[-1], Literal):
            out[-1] = Literal(out[-1].data + item.data)
        else:
            out.append(item)
    return out


def parse(pattern: bytes | str) -> RegexAst:
    """Parse ``pattern`` into an AST; raises :class:`RegexParseError`."""
    if isinstance(pattern, str):
        pattern = pattern.encode("utf-8")
    return _Parser(pattern).parse()


# --------------------------------------------------------------------------
# Literal trees

@dataclass(frozen=True)
class Lit:
    data: bytes


@dataclass(frozen=True)
class And:
    children: tuple


@dataclass(frozen=True)
class Or:
    children: tuple


LiteralTree = Union[Lit, And, Or]

_BREAK = object()


def _exact(node: RegexAst) -> Optional[bytes]:
    """The single string ``node`` matches, or None if it can match several."""
    if isinstance(node, Literal):
        return node.data
    if isinstance(node, Group):
        return _exact(node.body)
    if isinstance(node, Concat):
        parts = []
        for item in node.items:
            e = _exact(item)
            if e is None:
                return None
            parts.append(e)
        return b"".join(parts)
    if isinstance(node, Repeat) and node.max == node.min:
        e = _exact(node.node)
        return None if e is None else e * node.min
    return None


def _sequence_parts(items, out: list) -> None:
    for item in items:
        if isinstance(item, Literal):
            out.append(item.data)
        elif isinstance(item, Group) and isinstance(item.body, Concat):
            _sequence_parts(item.body.items, out)
        elif isinstance(item, Concat):
            _sequence_parts(item.items, out)
        elif isinstance(item, Repeat):
            if item.min == 0:
                out.append(_BREAK)
                continue
            exact = _exact(item.node)
            if exact is not None and item.max == item.min:
                out.append(exact * item.min)
            elif exact is not None:
                # x{m,n}: the first copy abuts the left context, the last the right
                if exact:
                    out.append(exact)
                    out.append(_BREAK)
                    out.append(exact)
                else:
                    out.append(_BREAK)
            else:
                sub = extract_literal_tree(item.node)
                out.append(_BREAK if sub is None else sub)
        elif isinstance(item, (Group, Alternation)):
            sub = extract_literal_tree(item)
            out.append(_BREAK if sub is None else sub)
        else:
            out.append(_BREAK)


def _make(kind, children: list) -> Optional[LiteralTree]:
    flat: list = []
    for child in children:
        if isinstance(child, kind):
            flat.extend(child.children)
        else:
            flat.append(child)
    if kind is Or:
        unique = list(dict.fromkeys(flat))
    else:
        # only adjacent repeats collapse; separate occurrences stay visible
        unique = [c for i, c in enumerate(flat) if i == 0 or flat[i - 1] != c]
    if not unique:
        return None
    if len(unique) == 1:
        return unique[0]
    return kind(tuple(unique))


def extract_literal_tree(ast: RegexAst) -> Optional[LiteralTree]:
    """Required-literal tree of ``ast``, or None if no literal is required."""
    if isinstance(ast, Group):
        return extract_literal_tree(ast.body)
    if isinstance(ast, Alternation):
        subs = [extract_literal_tree(b) for b in ast.branches]
        if any(s is None for s in subs):
            return None
        return _make(Or, subs)
    parts: list = []
    _sequence_parts([ast], parts)
    children: list = []
    run = b""
    for part in parts:
        if isinstance(part, bytes):
            run += part
            continue
        if run:
            children.append(Lit(run))
            run = b""
        if part is not _BREAK:
            children.append(part)
    if run:
        children.append(Lit(run))
    return _make(And, children)


def literal_tree(pattern: bytes | str) -> Optional[LiteralTree]:
    """Parse and extract in one step; unparseable patterns yield None."""
    try:
        return extract_literal_tree(parse(pattern))
    except RegexParseError:
        return None


def literals(tree: Optional[LiteralTree]) -> list:
    """All LIT leaves of ``tree`` in depth-first order, deduplicated."""
    out: dict = {}

    def walk(node):
        if isinstance(node, Lit):
            out[node.data] = None
        elif node is not None:
            for child in node.children:
                walk(child)

    walk(tree)
    return list(out)


def satisfies(tree: Optional[LiteralTree], text: bytes) -> bool:
    if tree is None:
        return True
    if isinstance(tree, Lit):
        return tree.data in text
    if isinstance(tree, And):
        return all(satisfies(c, text) for c in tree.children)
    return any(satisfies(c, text) for c in tree.children)


# --------------------------------------------------------------------------
# S-expression dump

def escape_bytes(data: bytes) -> str:
    """Printable ASCII kept, backslash doubled, everything else as \\xHH."""
    out = []
    for b in data:
        if b == 0x5C:
            out.append("\\\\")
        elif 0x20 <= b < 0x7F:
            out.append(chr(b))
        else:
            out.append(f"\\x{b:02x}")
    return "".join(out)


def unescape_bytes(text: str) -> bytes:
    out = bytearray()
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\":
            nxt = text[i + 1]
            if nxt == "x":
                out.append(int(text[i + 2:i + 4], 16))
                i += 4
                continue
            out.append(ord(nxt))
            i += 2
            continue
        out.append(ord(ch))
        i += 1
    return bytes(out)


def _quote(data: bytes) -> str:
    return '"' + escape_bytes(data).replace('"', '\\"') + '"'


def to_sexpr(tree: Optional[LiteralTree]) -> str:
    if tree is None:
        return "none"
    if isinstance(tree, Lit):
        return f"(lit {_quote(tree.data)})"
    tag = "and" if isinstance(tree, And) else "or"
    return f"({tag} " + " ".join(to_sexpr(c) for c in tree.children) + ")"


def from_sexpr(text: str) -> Optional[LiteralTree]:
    text = text.strip()
    if text == "none":
        return None
    node, end = _read_sexpr(text, 0)
    if text[end:].strip():
        raise ValueError(f"trailing input at {end}")
    return node


def _read_sexpr(text: str, i: int):
    while text[i].isspace():
        i += 1
    if text[i] != "(":
        raise ValueError(f"expected '(' at {i}")
    j = i + 1
    while text[j].isalpha():
        j += 1
    tag = text[i + 1:j]
    if tag == "lit":
        while text[j].isspace():
            j += 1
        if text[j] != '"':
            raise ValueError(f"expected string at {j}")
        k = j + 1
        raw = []
        while text[k] != '"':
            if text[k] == "\\":
                if text[k + 1] == '"':
                    raw.append('"')
                else:
                    raw.append(text[k:k + 2])
                k += 2
                continue
            raw.append(text[k])
            k += 1
        k += 1
        while text[k].isspace():
            k += 1
        if text[k] != ")":
            raise ValueError(f"expected ')' at {k}")
        return Lit(unescape_bytes("".join(raw))), k + 1
    if tag not in ("and", "or"):
        raise ValueError(f"unknown node {tag!r}")
    children = []
    while True:
        while text[j].isspace():
            j += 1
        if text[j] == ")":
            j += 1
            break
        child, j = _read_sexpr(text, j)
        children.append(child)
    return (And if tag == "and" else Or)(tuple(children)), j
