"""A small regex engine over the parsed AST.

Matching tracks the set of reachable end offsets for each sub-pattern, so
running time is polynomial in the text length whatever the pattern. It
shares the parser with the literal extractor but nothing else, and serves
as the second engine in differential tests against :mod:`re`.
"""

from __future__ import annotations

from .regex_literal import (
    Alternation,
    Anchor,
    AnyChar,
    CharClass,
    Concat,
    Group,
    Literal,
    Repeat,
    RegexAst,
    parse,
)

_NEWLINE = 0x0A


def _step(node: RegexAst, text: bytes, starts: frozenset) -> frozenset:
    if not starts:
        return starts
    if isinstance(node, Literal):
        data = node.data
        n = len(data)
        return frozenset(p + n for p in starts if text.startswith(data, p))
    if isinstance(node, AnyChar):
        return frozenset(p + 1 for p in starts if p < len(text) and text[p] != _NEWLINE)
    if isinstance(node, CharClass):
        return frozenset(p + 1 for p in starts if p < len(text) and node.matches(text[p]))
    if isinstance(node, Anchor):
        if node.kind == "start":
            return frozenset(p for p in starts if p == 0)
        # like re, $ also matches just before a final newline
        end = len(text)
        return frozenset(p for p in starts
                         if p == end or (p == end - 1 and text[p] == _NEWLINE))
    if isinstance(node, Group):
        return _step(node.body, text, starts)
    if isinstance(node, Concat):
        cur = starts
        for item in node.items:
            cur = _step(item, text, cur)
            if not cur:
                break
        return cur
    if isinstance(node, Alternation):
        out: set = set()
        for branch in node.branches:
            out |= _step(branch, text, starts)
        return frozenset(out)
    if isinstance(node, Repeat):
        cur = starts
        for _ in range(node.min):
            cur = _step(node.node, text, cur)
            if not cur:
                return cur
        reached = set(cur)
        frontier = cur
        extra = 0
        while frontier and (node.max is None or extra < node.max - node.min):
            frontier = _step(node.node, text, frontier)
            extra += 1
            new = frontier - reached
            if node.max is None:
                if not new:
                    break
                frontier = frozenset(new)
            reached |= frontier
        return frozenset(reached)
    raise TypeError(f"unknown node {node!r}")


def search(ast: RegexAst, text: bytes) -> bool:
    """Unanchored search: does any substring of ``text`` match ``ast``?"""
    return bool(_step(ast, text, frozenset(range(len(text) + 1))))


class AstMatcher:
    """Compiled-pattern facade mirroring ``re.Pattern.search`` truthiness."""

    def __init__(self, pattern: bytes | str):
        self.pattern = pattern
        self.ast = parse(pattern)

    def search(self, text: bytes) -> bool:
        return search(self.ast, text)
