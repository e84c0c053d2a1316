"""Reference evaluator: try every valid ref-word of the document with CYK.

This is deliberately simple and exponential in the number of variables.  It
is the ground truth the enumeration pipeline is tested against, not a
production path.
"""

from __future__ import annotations

import os
from typing import Iterator, Sequence

from .errors import ResourceLimitError
from .grammar import (
    ExtractionGrammar,
    GrammarError,
    NonTerminal,
    OpIndex,
    SpanMapping,
    Terminal,
    VarOp,
    ref_to_mapping,
)
from .transforms import FunctionalGrammar, to_cnf

DEFAULT_BUDGET = 10**7
BUDGET_ENV = "CFSPANNER_ORACLE_BUDGET"


def oracle_budget(budget: int | None = None) -> int:
    if budget is not None:
        return budget
    raw = os.environ.get(BUDGET_ENV)
    return int(raw) if raw else DEFAULT_BUDGET


def check_budget(n: int, k: int, budget: int | None = None) -> None:
    cap = oracle_budget(budget)
    need = (n + 2) ** (2 * k)
    if need > cap:
        raise ResourceLimitError(
            f"oracle would examine about {need} gap assignments (|d|={n}, k={k}); "
            f"budget is {cap}, raise it with {BUDGET_ENV}"
        )


def _grammar(g) -> ExtractionGrammar:
    return g.grammar if isinstance(g, FunctionalGrammar) else g


def cyk_accepts(g: ExtractionGrammar, r: Sequence) -> bool:
    """Plain CYK over the extended alphabet; ``g`` must already be in CNF."""
    g = _grammar(g)
    if not g.is_cnf():
        raise GrammarError("cyk_accepts needs a grammar in CNF")
    n = len(r)
    if n == 0 or g.is_empty_language:
        return False
    unary: dict = {}
    binary = []
    for p in g.productions:
        if len(p.rhs) == 1:
            unary.setdefault(p.rhs[0], set()).add(p.lhs)
        else:
            binary.append((p.lhs, p.rhs[0].name, p.rhs[1].name))
    table = [[set() for _ in range(n)] for _ in range(n)]
    for i, sym in enumerate(r):
        table[i][i] = set(unary.get(sym, ()))
    for length in range(2, n + 1):
        for i in range(n - length + 1):
            j = i + length - 1
            cell = table[i][j]
            for m in range(i, j):
                left, right = table[i][m], table[m + 1][j]
                if not left or not right:
                    continue
                for a, b, c in binary:
                    if b in left and c in right:
                        cell.add(a)
    return g.start in table[0][n - 1]


class _IncrementalCYK:
    """CYK chart that grows and shrinks one symbol at a time.

    Cells are bitmasks over non-terminal indices; column ``j`` holds the
    cells ``[i, j]`` for every ``i <= j``.
    """

    def __init__(self, g: ExtractionGrammar):
        order = g.nonterminal_order()
        self.bit = {nt: 1 << m for m, nt in enumerate(order)}
        self.start_bit = self.bit[g.start]
        self.unary: dict = {}
        # by_left[b] = list of (mask of right child, mask of lhs)
        by_left: dict[int, dict[int, int]] = {}
        for p in g.productions:
            if len(p.rhs) == 1:
                self.unary[p.rhs[0]] = self.unary.get(p.rhs[0], 0) | self.bit[p.lhs]
            else:
                b = self.bit[p.rhs[0].name].bit_length() - 1
                c = self.bit[p.rhs[1].name]
                row = by_left.setdefault(b, {})
                row[c] = row.get(c, 0) | self.bit[p.lhs]
        self.by_left = {b: tuple(row.items()) for b, row in by_left.items()}
        self.columns: list[list[int]] = []

    def push(self, sym) -> None:
        cols = self.columns
        j = len(cols)
        column = [0] * (j + 1)
        column[j] = self.unary.get(sym, 0)
        by_left = self.by_left
        for i in range(j - 1, -1, -1):
            acc = 0
            for m in range(i, j):
                left = cols[m][i]
                right = column[m + 1]
                if not left or not right:
                    continue
                while left:
                    low = left & -left
                    for c, a in by_left.get(low.bit_length() - 1, ()):
                        if right & c:
                            acc |= a
                    left ^= low
            column[i] = acc
        cols.append(column)

    def pop(self) -> None:
        self.columns.pop()

    def accepts(self) -> bool:
        return bool(self.columns) and bool(self.columns[-1][0] & self.start_bit)


def _walk(d: str, idx: OpIndex, chart: _IncrementalCYK | None) -> Iterator[tuple]:
    """Depth-first walk over all valid ref-words cleaning to ``d``.

    At every point the walk may place any operation that is still missing
    (a close only after its open), or move past the next letter.  Operations
    come before the letter, and lower bits before higher ones.
    """
    n = len(d)
    nbits = 2 * len(idx.variables)
    ops = [idx.op(b) for b in range(nbits)]
    letters = [Terminal(c) for c in d]
    full = idx.full
    word: list = []

    def rec(pos: int, placed: int):
        if pos == n and placed == full:
            if chart is None or (chart.accepts() if word else False):
                yield tuple(word)
            return
        for b in range(nbits):
            if placed >> b & 1:
                continue
            if b & 1 and not placed >> (b - 1) & 1:
                continue
            word.append(ops[b])
            if chart is not None:
                chart.push(ops[b])
            yield from rec(pos, placed | 1 << b)
            if chart is not None:
                chart.pop()
            word.pop()
        if pos < n:
            word.append(letters[pos])
            if chart is not None:
                chart.push(letters[pos])
            yield from rec(pos + 1, placed)
            if chart is not None:
                chart.pop()
            word.pop()

    return rec(0, 0)


def valid_refwords(d: str, variables: Sequence[str], budget: int | None = None) -> Iterator[tuple]:
    """Every valid ref-word over ``variables`` that cleans to ``d``, each once."""
    idx = OpIndex(tuple(variables))
    check_budget(len(d), len(idx.variables), budget)
    return _walk(d, idx, None)


def _derives_empty(g: ExtractionGrammar) -> bool:
    nullable: set[str] = set()
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            if p.lhs not in nullable and all(
                isinstance(s, NonTerminal) and s.name in nullable for s in p.rhs
            ):
                nullable.add(p.lhs)
                changed = True
    return g.start in nullable


def accepted_refwords(g, d: str, budget: int | None = None) -> Iterator[tuple]:
    """The valid ref-words of ``g`` that clean to ``d`` (the set Ref(g, d))."""
    g = _grammar(g)
    idx = OpIndex(g.vars)
    check_budget(len(d), g.k, budget)
    if not d and g.k == 0:
        # the only candidate is the empty word, which CNF cannot express
        return iter([()] if _derives_empty(g) else [])
    cnf = g if g.is_cnf() else to_cnf(g)
    if cnf.is_empty_language:
        return iter(())
    return _walk(d, idx, _IncrementalCYK(cnf))


def naive_evaluate(g, d: str, budget: int | None = None) -> set[SpanMapping]:
    """The set of mappings the grammar extracts from ``d``."""
    grammar = _grammar(g)
    return {ref_to_mapping(r, grammar.vars) for r in accepted_refwords(grammar, d, budget)}


__all__ = [
    "BUDGET_ENV",
    "DEFAULT_BUDGET",
    "accepted_refwords",
    "check_budget",
    "cyk_accepts",
    "naive_evaluate",
    "oracle_budget",
    "valid_refwords",
]
