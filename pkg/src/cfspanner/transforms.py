"""Grammar normalisation and spanner-level grammar operations.

Everything here treats variable operations as ordinary terminal symbols,
except :func:`functionalize`, which tracks the set of operations each
non-terminal emits so that only valid ref-words survive.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import NotFunctionalError
from .grammar import (
    ExtractionGrammar,
    GrammarError,
    NonTerminal,
    OpIndex,
    Production,
    SpanMapping,
    Terminal,
    VarOp,
)


class NameSupply:
    """Fresh non-terminal names of the form ``<base>%<counter>``."""

    def __init__(self, taken: Iterable[str]):
        self.taken = set(taken)
        self.counter = itertools.count(1)

    def fresh(self, base: str) -> str:
        base = base.split("%", 1)[0]
        while True:
            name = f"{base}%{next(self.counter)}"
            if name not in self.taken:
                self.taken.add(name)
                return name


def _empty_like(g: ExtractionGrammar) -> ExtractionGrammar:
    return ExtractionGrammar.build(g.vars, (), g.start, g.declared_unambiguous)


def remove_useless(g: ExtractionGrammar) -> ExtractionGrammar:
    """Drop non-terminals that derive nothing or are unreachable from the start.

    Returns the empty-language marker (a grammar without productions) when the
    start symbol itself is useless.
    """
    productive: set[str] = set()
    changed = True
    while changed:
        changed = False
        for p in g.productions:
            if p.lhs not in productive and all(
                s.name in productive for s in p.rhs if isinstance(s, NonTerminal)
            ):
                productive.add(p.lhs)
                changed = True
    if g.start not in productive:
        return _empty_like(g)

    live = [p for p in g.productions
            if all(s.name in productive for s in p.rhs if isinstance(s, NonTerminal))]
    reachable = {g.start}
    queue = deque([g.start])
    by_lhs: dict[str, list[Production]] = {}
    for p in live:
        by_lhs.setdefault(p.lhs, []).append(p)
    while queue:
        a = queue.popleft()
        for p in by_lhs.get(a, ()):
            for s in p.rhs:
                if isinstance(s, NonTerminal) and s.name not in reachable:
                    reachable.add(s.name)
                    queue.append(s.name)
    kept = [p for p in live if p.lhs in reachable]
    return ExtractionGrammar.build(g.vars, kept, g.start, g.declared_unambiguous)


def _wrapper_base(s) -> str:
    if isinstance(s, Terminal):
        return "T" + (s.char if s.char.isascii() and s.char.isalnum() else "")
    return ("O_" if s.opening else "C_") + s.var


def _dedupe(items):
    return list(dict.fromkeys(items))


def to_cnf(g: ExtractionGrammar) -> ExtractionGrammar:
    """Chomsky normal form over the extended alphabet.

    Letters and variable operations are both treated as terminals.  The empty
    ref-word is dropped from the language; documents of length zero are
    handled separately by :func:`empty_doc_mapping`.
    """
    g = remove_useless(g)
    if g.is_empty_language:
        return g
    names = NameSupply(g.nonterminals)

    # terminals inside long bodies get one wrapper non-terminal each
    wrappers: dict = {}
    wrapper_rules: list[tuple[str, tuple]] = []
    rules: list[tuple[str, tuple]] = []
    for p in g.productions:
        if len(p.rhs) <= 1:
            rules.append((p.lhs, p.rhs))
            continue
        body = []
        for s in p.rhs:
            if isinstance(s, NonTerminal):
                body.append(s)
                continue
            if s not in wrappers:
                wrappers[s] = names.fresh(_wrapper_base(s))
                wrapper_rules.append((wrappers[s], (s,)))
            body.append(NonTerminal(wrappers[s]))
        lhs = p.lhs
        while len(body) > 2:
            tail = names.fresh(p.lhs)
            rules.append((lhs, (body[0], NonTerminal(tail))))
            lhs = tail
            body = body[1:]
        rules.append((lhs, tuple(body)))
    rules.extend(wrapper_rules)

    # epsilon removal; bodies are at most two symbols long here
    nullable: set[str] = set()
    changed = True
    while changed:
        changed = False
        for lhs, rhs in rules:
            if lhs not in nullable and all(
                isinstance(s, NonTerminal) and s.name in nullable for s in rhs
            ):
                nullable.add(lhs)
                changed = True
    no_eps = []
    for lhs, rhs in rules:
        if not rhs:
            continue
        no_eps.append((lhs, rhs))
        if len(rhs) == 2:
            b, c = rhs
            if b.name in nullable:
                no_eps.append((lhs, (c,)))
            if c.name in nullable:
                no_eps.append((lhs, (b,)))
    no_eps = _dedupe(no_eps)

    # unit removal by unit-closure
    units: dict[str, list[str]] = {}
    for lhs, rhs in no_eps:
        if len(rhs) == 1 and isinstance(rhs[0], NonTerminal):
            units.setdefault(lhs, []).append(rhs[0].name)
    order = g.nonterminal_order() + sorted(names.taken - set(g.nonterminals))
    inverse: dict[str, list[str]] = {}
    for a in order:
        seen = {a: None}
        queue = deque([a])
        while queue:
            for b in units.get(queue.popleft(), ()):
                if b not in seen:
                    seen[b] = None
                    queue.append(b)
        for b in seen:
            if b != a:
                inverse.setdefault(b, []).append(a)
    final = []
    for lhs, rhs in no_eps:
        if len(rhs) == 1 and isinstance(rhs[0], NonTerminal):
            continue
        final.append((lhs, rhs))
        for a in inverse.get(lhs, ()):
            final.append((a, rhs))
    productions = [Production(lhs, rhs) for lhs, rhs in _dedupe(final)]
    out = ExtractionGrammar.build(g.vars, productions, g.start, g.declared_unambiguous)
    return remove_useless(out)


@dataclass(frozen=True)
class VarOpSetTable:
    """The set of operations every ref-word of a non-terminal contains, as bitmasks."""

    index: OpIndex
    masks: Mapping[str, int]

    def __getitem__(self, nt: str) -> int:
        return self.masks[nt]

    def __contains__(self, nt: str) -> bool:
        return nt in self.masks

    def ops(self, nt: str) -> frozenset:
        return self.index.ops(self.masks[nt])


@dataclass(frozen=True)
class FunctionalGrammar:
    """A CNF grammar all of whose ref-words are valid.

    ``origin`` maps each generated non-terminal to the source non-terminal and
    operation mask it was built from.  The witness is trusted downstream.
    """

    grammar: ExtractionGrammar
    varops: VarOpSetTable
    origin: Mapping[str, tuple[str, int]]
    functional: bool = True

    @property
    def is_empty_language(self) -> bool:
        return self.grammar.is_empty_language

    @property
    def vars(self) -> tuple[str, ...]:
        return self.grammar.vars


def functionalize(g: ExtractionGrammar) -> FunctionalGrammar:
    """Pair every non-terminal with the operation set it emits.

    The pair ``(A, X)`` derives exactly the ref-words of ``A`` whose
    operations are ``X``, each at most once and no variable closed before it
    is opened.  The start pair uses the full operation set, so every derived
    ref-word is valid.  Pairs that are unproductive or unreachable are never
    materialised.
    """
    if not g.is_cnf():
        raise GrammarError("functionalize expects a grammar in CNF")
    idx = OpIndex(g.vars)
    if g.is_empty_language:
        return FunctionalGrammar(g, VarOpSetTable(idx, {}), {})

    term_rules: list[tuple[str, int, object]] = []
    binary: list[tuple[str, str, str]] = []
    for p in g.productions:
        if len(p.rhs) == 1:
            s = p.rhs[0]
            term_rules.append((p.lhs, idx.bit(s) if isinstance(s, VarOp) else 0, s))
        else:
            binary.append((p.lhs, p.rhs[0].name, p.rhs[1].name))

    by_left: dict[str, list[int]] = {}
    by_right: dict[str, list[int]] = {}
    for r, (_, b, c) in enumerate(binary):
        by_left.setdefault(b, []).append(r)
        by_right.setdefault(c, []).append(r)

    sets: dict[str, dict[int, None]] = {nt: {} for nt in g.nonterminal_order()}
    queue: deque[tuple[str, int]] = deque()

    def add(nt: str, mask: int):
        if mask not in sets[nt]:
            sets[nt][mask] = None
            queue.append((nt, mask))

    for a, mask, _ in term_rules:
        add(a, mask)
    while queue:
        nt, mask = queue.popleft()
        for r in by_left.get(nt, ()):
            a, _, c = binary[r]
            for other in list(sets[c]):
                if not mask & other and idx.order_ok(mask, other):
                    add(a, mask | other)
        for r in by_right.get(nt, ()):
            a, b, _ = binary[r]
            for other in list(sets[b]):
                if not mask & other and idx.order_ok(other, mask):
                    add(a, other | mask)

    if idx.full not in sets[g.start]:
        empty = ExtractionGrammar.build(g.vars, (), g.start, g.declared_unambiguous)
        return FunctionalGrammar(empty, VarOpSetTable(idx, {}), {})

    names = NameSupply(g.nonterminals)
    pair_name: dict[tuple[str, int], str] = {}

    def name_of(pair):
        if pair not in pair_name:
            pair_name[pair] = names.fresh(pair[0])
            pending.append(pair)
        return pair_name[pair]

    rules_of: dict[str, list] = {}
    for a, mask, s in term_rules:
        rules_of.setdefault(a, []).append(("t", mask, s))
    for a, b, c in binary:
        rules_of.setdefault(a, []).append(("b", b, c))

    pending: deque = deque()
    start = name_of((g.start, idx.full))
    productions = []
    while pending:
        a, whole = pending.popleft()
        lhs = pair_name[(a, whole)]
        for rule in rules_of.get(a, ()):
            if rule[0] == "t":
                if rule[1] == whole:
                    productions.append(Production(lhs, (rule[2],)))
                continue
            _, b, c = rule
            for left in sets[b]:
                if left & ~whole:
                    continue
                right = whole ^ left
                if right in sets[c] and idx.order_ok(left, right):
                    productions.append(Production(lhs, (
                        NonTerminal(name_of((b, left))),
                        NonTerminal(name_of((c, right))),
                    )))
    out = ExtractionGrammar.build(g.vars, productions, start, g.declared_unambiguous)
    masks = {name: mask for (_, mask), name in pair_name.items()}
    origin = {name: pair for pair, name in pair_name.items()}
    return FunctionalGrammar(out, VarOpSetTable(idx, masks), origin)


def compute_varop_sets(g: FunctionalGrammar | ExtractionGrammar) -> VarOpSetTable:
    """Recompute the operation set of every non-terminal from the rules alone.

    Each non-terminal takes the set of the first derivation found in
    productivity order; every rule is then checked against the local
    equations, and a mismatch means the grammar was not functional.
    """
    grammar = g.grammar if isinstance(g, FunctionalGrammar) else g
    if not grammar.is_cnf():
        raise GrammarError("compute_varop_sets expects a grammar in CNF")
    idx = OpIndex(grammar.vars)
    value: dict[str, int] = {}
    waiting: dict[str, list[int]] = {}
    missing: list[int] = []
    queue: deque[str] = deque()
    prods = grammar.productions
    for r, p in enumerate(prods):
        if len(p.rhs) == 1:
            missing.append(0)
            if p.lhs not in value:
                s = p.rhs[0]
                value[p.lhs] = idx.bit(s) if isinstance(s, VarOp) else 0
                queue.append(p.lhs)
        else:
            kids = {s.name for s in p.rhs}
            missing.append(len(kids))
            for kid in kids:
                waiting.setdefault(kid, []).append(r)
    while queue:
        nt = queue.popleft()
        for r in waiting.get(nt, ()):
            missing[r] -= 1
            p = prods[r]
            if missing[r] == 0 and p.lhs not in value:
                value[p.lhs] = value[p.rhs[0].name] | value[p.rhs[1].name]
                queue.append(p.lhs)

    for p in prods:
        if p.lhs not in value:
            raise NotFunctionalError(f"grammar not functional: {p.lhs} is unproductive")
        if len(p.rhs) == 1:
            s = p.rhs[0]
            expect = idx.bit(s) if isinstance(s, VarOp) else 0
        else:
            b, c = value.get(p.rhs[0].name), value.get(p.rhs[1].name)
            if b is None or c is None or b & c:
                raise NotFunctionalError(f"grammar not functional: rule {p}")
            expect = b | c
        if value[p.lhs] != expect:
            raise NotFunctionalError(f"grammar not functional: rule {p}")
    return VarOpSetTable(idx, value)


def union(g1: ExtractionGrammar, g2: ExtractionGrammar) -> ExtractionGrammar:
    """Grammar whose ref-language is the union of both (after renaming ``g2``)."""
    if set(g1.vars) != set(g2.vars):
        raise GrammarError(
            f"variable sets differ: {sorted(g1.vars)} vs {sorted(g2.vars)}"
        )
    names = NameSupply(g1.nonterminals | g2.nonterminals)
    rename = {nt: (names.fresh(nt) if nt in g1.nonterminals else nt)
              for nt in g2.nonterminal_order()}
    start = names.fresh("S")

    def sym(s):
        return NonTerminal(rename[s.name]) if isinstance(s, NonTerminal) else s

    productions = [
        Production(start, (NonTerminal(g1.start),)),
        Production(start, (NonTerminal(rename[g2.start]),)),
        *g1.productions,
        *(Production(rename[p.lhs], tuple(sym(s) for s in p.rhs)) for p in g2.productions),
    ]
    return ExtractionGrammar.build(
        g1.vars, productions, start,
        extra_nonterminals=[g1.start, rename[g2.start]],
    )


def project(g: ExtractionGrammar, keep: Iterable[str]) -> ExtractionGrammar:
    """Keep only the variables in ``keep``.

    Operations of dropped variables are erased from a functional version of
    ``g``; erasing them from ``g`` directly would let ref-words that are
    invalid for the full variable set become valid for the smaller one.
    """
    keep = set(keep)
    unknown = keep - set(g.vars)
    if unknown:
        raise GrammarError(f"unknown variable(s) {', '.join(sorted(unknown))}")
    if keep == set(g.vars):
        return g
    fg = functionalize(to_cnf(g)).grammar
    productions = [
        Production(p.lhs, tuple(
            s for s in p.rhs if not (isinstance(s, VarOp) and s.var not in keep)
        ))
        for p in fg.productions
    ]
    variables = tuple(v for v in g.vars if v in keep)
    start = fg.start
    if empty_doc_mapping(g) is not None:
        names = NameSupply(fg.nonterminals)
        start = names.fresh("S")
        productions = [Production(start, (NonTerminal(fg.start),)),
                       Production(start, ()), *productions]
    return ExtractionGrammar.build(variables, productions, start,
                                   extra_nonterminals=[fg.start])


def empty_doc_mapping(g: FunctionalGrammar | ExtractionGrammar) -> SpanMapping | None:
    """The mapping extracted from the empty document, if any.

    On the empty document every variable can only be mapped to ``[1,1>``, so
    the question is whether ``g`` derives a valid ref-word made of operations
    only.  Operation sets are tracked per non-terminal so that invalid
    operation-only words do not count.
    """
    grammar = g.grammar if isinstance(g, FunctionalGrammar) else g
    idx = OpIndex(grammar.vars)
    sets: dict[str, set[int]] = {nt: set() for nt in grammar.nonterminals}
    changed = True
    while changed:
        changed = False
        for p in grammar.productions:
            current = {0}
            for s in p.rhs:
                if isinstance(s, Terminal):
                    current = set()
                elif isinstance(s, VarOp):
                    options = (idx.bit(s),)
                else:
                    options = sets[s.name]
                if isinstance(s, Terminal):
                    break
                current = {
                    left | right
                    for left in current
                    for right in options
                    if not left & right and idx.order_ok(left, right)
                }
                if not current:
                    break
            new = current - sets[p.lhs]
            if new:
                sets[p.lhs] |= new
                changed = True
    if idx.full not in sets[grammar.start]:
        return None
    return SpanMapping.from_spans({v: (1, 1) for v in grammar.vars})


def is_regular_form(g: ExtractionGrammar) -> bool:
    """True iff every rule is ``A -> s B`` or ``A -> s`` with ``s`` a letter or operation."""
    for p in g.productions:
        if not p.rhs or len(p.rhs) > 2:
            return False
        if isinstance(p.rhs[0], NonTerminal):
            return False
        if len(p.rhs) == 2 and not isinstance(p.rhs[1], NonTerminal):
            return False
    return True


__all__ = [
    "FunctionalGrammar",
    "NameSupply",
    "VarOpSetTable",
    "compute_varop_sets",
    "empty_doc_mapping",
    "functionalize",
    "is_regular_form",
    "project",
    "remove_useless",
    "to_cnf",
    "union",
]
