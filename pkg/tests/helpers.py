"""Independent reference computations used by the tests.

Nothing here goes through the CYK oracle or the enumeration pipeline, so
these functions can check both.
"""

from __future__ import annotations

import itertools
from collections import deque

from cfspanner.decorate import DecoratedTerminal
from cfspanner.grammar import (
    ExtractionGrammar,
    NonTerminal,
    SpanMapping,
    Terminal,
    VarOp,
    is_valid,
)

AB_BALANCED = """\
vars: x, y
start: S
S -> B {x 'a' A 'b' y} B
A -> 'a' A 'b' | x} {y
B -> 'a' B | 'b' B | eps
"""


def documents(max_len: int, alphabet: str = "ab", min_len: int = 0):
    for n in range(min_len, max_len + 1):
        for letters in itertools.product(alphabet, repeat=n):
            yield "".join(letters)


def spans(n: int):
    return [(i, j) for i in range(1, n + 2) for j in range(i, n + 2)]


def disjoint_equal_length(d: str) -> set[SpanMapping]:
    """All pairs of disjoint spans of equal length, straight from the definition."""
    out = set()
    for x in spans(len(d)):
        for y in spans(len(d)):
            if x[1] - x[0] == y[1] - y[0] and (x[1] <= y[0] or y[1] <= x[0]):
                out.add(SpanMapping.from_spans({"x": x, "y": y}))
    return out


def refwords_by_permutation(d: str, variables) -> set[tuple]:
    """Valid ref-words cleaning to ``d``, by filtering all permutations."""
    symbols = [Terminal(c) for c in d]
    for v in variables:
        symbols += [VarOp(v, True), VarOp(v, False)]
    out = set()
    for perm in set(itertools.permutations(symbols)):
        letters = [s.char for s in perm if isinstance(s, Terminal)]
        if "".join(letters) == d and is_valid(perm, variables):
            out.add(perm)
    return out


def derives(g: ExtractionGrammar, word: tuple, max_forms: int = 200_000) -> bool:
    """Bounded leftmost-derivation search from the start symbol.

    Sentential forms whose terminal prefix disagrees with ``word`` or that
    hold more terminals than ``word`` are dropped.
    """
    rules: dict[str, list[tuple]] = {}
    for p in g.productions:
        rules.setdefault(p.lhs, []).append(p.rhs)
    start = (NonTerminal(g.start),)
    seen = {start}
    queue = deque([start])
    while queue and len(seen) < max_forms:
        form = queue.popleft()
        k = 0
        while k < len(form) and not isinstance(form[k], NonTerminal):
            k += 1
        if k == len(form):
            if form == word:
                return True
            continue
        if form[:k] != word[:k]:
            continue
        for rhs in rules.get(form[k].name, ()):
            new = form[:k] + rhs + form[k + 1:]
            if sum(1 for s in new if not isinstance(s, NonTerminal)) > len(word):
                continue
            if new not in seen:
                seen.add(new)
                queue.append(new)
    return False


def jump_by_search(dg, flags, stable) -> dict[int, set[int]]:
    """Jump sets by depth-first search over skippable rules, per non-terminal."""
    skip_edges: dict[int, list[int]] = {}
    real = set()
    for r, (lhs, rhs) in enumerate(dg.rules):
        if flags[r]:
            b, c = rhs
            skip_edges.setdefault(lhs, []).append(c if stable[b] else b)
        else:
            real.add(lhs)
    out = {}
    for a in range(len(dg.nodes)):
        if stable[a]:
            continue
        reached = {a}
        todo = [a]
        while todo:
            for nxt in skip_edges.get(todo.pop(), ()):
                if nxt not in reached:
                    reached.add(nxt)
                    todo.append(nxt)
        out[a] = {m for m in reached if m in real}
    return out


def terminal(x: int, i: int, y: int) -> DecoratedTerminal:
    return DecoratedTerminal(x, i, y)


def count_trees(g: ExtractionGrammar, word: tuple) -> int:
    """Number of parse trees of ``word`` in a CNF grammar (chart of counts)."""
    n = len(word)
    if n == 0:
        return 0
    unary: dict = {}
    binary = []
    for p in g.productions:
        if len(p.rhs) == 1:
            unary.setdefault(p.rhs[0], []).append(p.lhs)
        else:
            binary.append((p.lhs, p.rhs[0].name, p.rhs[1].name))
    chart: dict[tuple[int, int], dict[str, int]] = {}
    for i, s in enumerate(word):
        cell: dict[str, int] = {}
        for a in unary.get(s, ()):
            cell[a] = cell.get(a, 0) + 1
        chart[i, i + 1] = cell
    for width in range(2, n + 1):
        for i in range(n - width + 1):
            cell = {}
            for k in range(i + 1, i + width):
                left, right = chart[i, k], chart[k, i + width]
                for a, b, c in binary:
                    if b in left and c in right:
                        cell[a] = cell.get(a, 0) + left[b] * right[c]
            chart[i, i + width] = cell
    return chart[0, n].get(g.start, 0)
