"""Constant-delay enumeration over a decorated grammar, and the full pipeline.

Stable non-terminals already show every operation of their subtree in their
superscripts, so the enumerator never descends into them.  Skippable rules
add no operation and have exactly one non-stable child; the jump table
follows chains of them in one step, so every step of the enumerator either
outputs something or adds at least one operation to the current mapping.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .adjust import AdjustedGrammar, adjust
from .decorate import DecoratedGrammar, DecoratedTerminal, decorate
from .errors import ResourceLimitError
from .grammar import MAX_VARIABLES, ExtractionGrammar, OpIndex, SpanMapping, iter_bits
from .transforms import (
    FunctionalGrammar,
    VarOpSetTable,
    compute_varop_sets,
    empty_doc_mapping,
    functionalize,
    remove_useless,
    to_cnf,
)


def _stable_list(dg: DecoratedGrammar, stable) -> list[bool]:
    if stable is None:
        return dg.stable_flags()
    if isinstance(stable, list):
        return stable
    return [node in stable for node in dg.nodes]


def mark_skippable(dg: DecoratedGrammar, stable=None) -> list[bool]:
    """One flag per rule of ``dg``: True for skippable rules.

    A binary rule is skippable when its left-hand side is not stable, the
    inner superscripts (suffix of the left child, prefix of the right child)
    are empty, and exactly one child is stable.
    """
    st = _stable_list(dg, stable)
    flags = []
    for lhs, rhs in dg.rules:
        if isinstance(rhs, DecoratedTerminal) or st[lhs]:
            flags.append(False)
            continue
        b, c = rhs
        flags.append(
            not dg.nodes[b].y and not dg.nodes[c].x and st[b] != st[c]
        )
    return flags


@dataclass(frozen=True)
class JumpTable:
    """Jump sets of the non-stable decorated non-terminals, as sorted node ids."""

    grammar: DecoratedGrammar
    targets: dict[int, tuple[int, ...]]

    def __getitem__(self, node) -> tuple[int, ...]:
        m = node if isinstance(node, int) else self.grammar.node_id(node)
        return self.targets.get(m, ())

    def nodes(self, node) -> set:
        return {self.grammar.nodes[t] for t in self[node]}


def compute_jump(dg: DecoratedGrammar, flags: Sequence[bool], stable=None) -> JumpTable:
    """Jump table: the non-stable nodes reachable by skippable rules that head a non-skippable rule.

    Left-hand sides are swept by increasing span length; a skippable rule's
    non-stable child always has a shorter span, so its set is final by then.
    """
    st = _stable_list(dg, stable)
    has_real = [False] * len(dg.nodes)
    skip_rules: list[tuple[int, int]] = []
    for r, (lhs, rhs) in enumerate(dg.rules):
        if flags[r]:
            b, c = rhs
            skip_rules.append((lhs, c if st[b] else b))
        else:
            has_real[lhs] = True
    reach: dict[int, set[int]] = {m: {m} for m in range(len(dg.nodes)) if not st[m]}
    nodes = dg.nodes
    skip_rules.sort(key=lambda e: (nodes[e[0]].j - nodes[e[0]].i, e[0]))
    for lhs, child in skip_rules:
        reach[lhs] |= reach[child]
    targets = {
        m: tuple(sorted(t for t in reached if has_real[t]))
        for m, reached in reach.items()
    }
    return JumpTable(dg, targets)


def _prod_table(dg: DecoratedGrammar, flags: Sequence[bool], st: list[bool]) -> list[tuple]:
    """For every node, the ``(beta, pairs)`` of its non-skippable binary rules."""
    return [() if st[m] else tuple(_rows(dg, flags, st, m)) for m in range(len(dg.nodes))]


def apply_prod(dg: DecoratedGrammar, flags: Sequence[bool], stable, node) -> Iterator[tuple[tuple, frozenset]]:
    """Yield ``(beta, m)`` for every non-skippable rule of a non-stable node.

    ``beta`` lists the non-stable children (as decorated non-terminals) and
    ``m`` holds the ``(operation, position)`` pairs placed between them.
    """
    st = _stable_list(dg, stable)
    m = node if isinstance(node, int) else dg.node_id(node)
    if st[m]:
        raise ValueError("apply_prod called on a stable non-terminal")
    idx = dg.index
    rows = _rows(dg, flags, st, m)
    if not rows:
        raise ValueError("apply_prod called on a non-terminal without non-skippable rules")
    for beta, pairs in rows:
        yield (tuple(dg.nodes[b] for b in beta),
               frozenset((idx.op(bit), pos) for bit, pos in pairs))


def _rows(dg, flags, st, m) -> list[tuple]:
    nodes = dg.nodes
    rows = []
    for r in dg.rules_of[m]:
        rhs = dg.rules[r][1]
        if flags[r] or isinstance(rhs, DecoratedTerminal):
            continue
        b, c = rhs
        pos = nodes[b].j + 1
        pairs = tuple((bit, pos) for bit in iter_bits(nodes[b].y | nodes[c].x))
        rows.append((tuple(x for x in (b, c) if not st[x]), pairs))
    return rows


@dataclass
class EnumerationStats:
    """Instrumentation of one enumeration run.

    ``delays`` holds the step count before each output, and one final entry
    for the steps between the last output (or the start) and exhaustion.
    """

    outputs: int = 0
    duplicates: int = 0
    steps: int = 0
    max_depth: int = 0
    delays: list[int] = field(default_factory=list)
    finished: bool = False

    @property
    def max_delay(self) -> int:
        return max(self.delays, default=0)


def enumerate_mappings(
    dg: DecoratedGrammar,
    jump: JumpTable,
    flags: Sequence[bool] | None = None,
    stable=None,
    check_duplicates: bool = False,
    stats: EnumerationStats | None = None,
) -> Iterator[SpanMapping]:
    """Yield the mappings of ``dg`` one by one.

    The recursion runs on an explicit stack of frames, each holding the
    pending non-stable nodes, the partial mapping (a linked list of pair
    chunks), and cursors into the jump set and the current rule list.
    Steps are counted per loop iteration of the driver.
    """
    st = _stable_list(dg, stable)
    if flags is None:
        flags = mark_skippable(dg, st)
    if stats is None:
        stats = EnumerationStats()
    prods = _prod_table(dg, flags, st)
    targets = jump.targets
    idx = dg.index
    n = dg.n
    seen: set | None = set() if check_duplicates else None
    return _drive(dg, st, prods, targets, idx, n, seen, stats)


def _drive(dg, st, prods, targets, idx: OpIndex, n: int, seen, stats: EnumerationStats):
    ops = [idx.op(b) for b in range(2 * len(idx.variables))]
    since = 0

    def emit(chain) -> SpanMapping | None:
        nonlocal since
        pairs = []
        while chain is not None:
            chunk, chain = chain
            pairs.extend(chunk)
        if seen is not None:
            key = frozenset(pairs)
            if key in seen:
                stats.duplicates += 1
                return None
            seen.add(key)
        stats.delays.append(since)
        stats.steps += since
        since = 0
        stats.outputs += 1
        return SpanMapping(tuple((ops[b], pos) for b, pos in pairs))

    for s in dg.start:
        node = dg.nodes[s]
        seed = tuple((b, 1) for b in iter_bits(node.x)) + tuple(
            (b, n + 1) for b in iter_bits(node.y))
        chain = (seed, None)
        if st[s]:
            since += 1
            mapping = emit(chain)
            if mapping is not None:
                yield mapping
            continue
        # frame: [pending nodes, mapping chain, jump targets, cursor, rows, cursor]
        stack = [[(s,), chain, targets.get(s, ()), 0, (), 0]]
        while stack:
            since += 1
            if len(stack) > stats.max_depth:
                stats.max_depth = len(stack)
            frame = stack[-1]
            alpha = frame[0]
            if not alpha:
                stack.pop()
                mapping = emit(frame[1])
                if mapping is not None:
                    yield mapping
            elif frame[5] < len(frame[4]):
                beta, pairs = frame[4][frame[5]]
                frame[5] += 1
                rest = beta + alpha[1:]
                stack.append([rest, (pairs, frame[1]),
                              targets.get(rest[0], ()) if rest else (), 0, (), 0])
            elif frame[3] < len(frame[2]):
                frame[4] = prods[frame[2][frame[3]]]
                frame[3] += 1
                frame[5] = 0
            else:
                stack.pop()
    stats.delays.append(since)
    stats.steps += since
    stats.finished = True


# --------------------------------------------------------------------------
# pipeline


@dataclass
class StageTimes:
    adjust: float = 0.0
    decorate: float = 0.0
    stable: float = 0.0
    skippable: float = 0.0
    jump: float = 0.0

    def as_dict(self) -> dict[str, float]:
        return dict(self.__dict__)


class SpannerRun:
    """One evaluation of a compiled spanner on a document.

    Iterating yields the mappings; ``stats`` fills in as the stream is
    consumed.  The intermediate grammars stay available for inspection.
    """

    def __init__(self, compiled: "CompiledSpanner", d: str, check_duplicates: bool = False):
        self.document = d
        self.times = StageTimes()
        self.stats = EnumerationStats()
        self.adjusted: AdjustedGrammar | None = None
        self.decorated: DecoratedGrammar | None = None
        self.jump: JumpTable | None = None
        self._empty_doc: SpanMapping | None = None
        if not d:
            self._empty_doc = compiled.empty_doc
            self._stream = self._empty_stream()
            return
        clock = time.perf_counter
        t0 = clock()
        self.adjusted = adjust(compiled.functional, d)
        t1 = clock()
        self.decorated = decorate(self.adjusted, compiled.varops)
        t2 = clock()
        self.stable = self.decorated.stable_flags()
        t3 = clock()
        self.flags = mark_skippable(self.decorated, self.stable)
        t4 = clock()
        self.jump = compute_jump(self.decorated, self.flags, self.stable)
        t5 = clock()
        self.times = StageTimes(t1 - t0, t2 - t1, t3 - t2, t4 - t3, t5 - t4)
        self._stream = enumerate_mappings(
            self.decorated, self.jump, self.flags, self.stable,
            check_duplicates=check_duplicates, stats=self.stats,
        )

    def _empty_stream(self):
        if self._empty_doc is not None:
            self.stats.delays.append(1)
            self.stats.outputs = 1
            yield self._empty_doc
        self.stats.delays.append(0)
        self.stats.finished = True

    def __iter__(self) -> Iterator[SpanMapping]:
        return self._stream


class CompiledSpanner:
    """A grammar normalised once (CNF, functional, operation sets) for repeated evaluation."""

    def __init__(self, g: ExtractionGrammar):
        if g.k > MAX_VARIABLES:
            raise ResourceLimitError(
                f"{g.k} variables exceed the engine limit of {MAX_VARIABLES}"
            )
        self.grammar = g
        clock = time.perf_counter
        t0 = clock()
        self.functional: FunctionalGrammar = functionalize(to_cnf(remove_useless(g)))
        self.varops: VarOpSetTable = compute_varop_sets(self.functional)
        self.empty_doc = empty_doc_mapping(g)
        self.normalise_time = clock() - t0

    def run(self, d: str, check_duplicates: bool | None = None) -> SpannerRun:
        """Evaluate on ``d``.

        Duplicate filtering defaults to on for grammars that are not declared
        unambiguous, since only unambiguous grammars enumerate each mapping once.
        """
        if check_duplicates is None:
            check_duplicates = not self.grammar.declared_unambiguous
        return SpannerRun(self, d, check_duplicates)


def compile_spanner(g: ExtractionGrammar) -> CompiledSpanner:
    return CompiledSpanner(g)


def spanner_enumerate(g: ExtractionGrammar, d: str, check_duplicates: bool | None = None) -> SpannerRun:
    """Evaluate ``g`` on ``d`` with the enumeration pipeline."""
    return compile_spanner(g).run(d, check_duplicates)


__all__ = [
    "CompiledSpanner",
    "EnumerationStats",
    "JumpTable",
    "SpannerRun",
    "StageTimes",
    "apply_prod",
    "compile_spanner",
    "compute_jump",
    "enumerate_mappings",
    "mark_skippable",
    "spanner_enumerate",
]
