"""The decorated grammar: operation sets moved into superscripts.

A decorated non-terminal ``A^{x,y}[i,j]`` derives the letters ``i..j`` and
records in ``x`` the operations that sit at the very start of its sub-word
and in ``y`` those at the very end.  Decorated terminals ``(x, i, y)`` carry
the operations directly before and after letter ``i``.  Epsilon
non-terminals disappear: their operations end up in superscripts.

Operation sets are bitmasks laid out by :class:`~cfspanner.grammar.OpIndex`.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .adjust import AdjustedGrammar
from .grammar import OpIndex, SpanMapping
from .transforms import VarOpSetTable


@dataclass(frozen=True, slots=True, order=True)
class DecoratedNonTerminal:
    base: str
    i: int
    j: int
    x: int
    y: int


@dataclass(frozen=True, slots=True)
class DecoratedTerminal:
    x: int
    i: int
    y: int


@dataclass(frozen=True)
class DecoratedGrammar:
    """Decorated grammar for one document.

    ``rules[r]`` is ``(lhs, rhs)`` where ``rhs`` is a
    :class:`DecoratedTerminal` or a pair of node ids.  ``start`` lists the
    nodes ``S^{x,y}[1,n]`` that the fresh start symbol derives, in order.
    ``base_masks[m]`` is the operation set of the base non-terminal of node
    ``m``.
    """

    document: str
    index: OpIndex
    nodes: tuple[DecoratedNonTerminal, ...]
    base_masks: tuple[int, ...]
    rules: tuple[tuple[int, object], ...]
    start: tuple[int, ...]
    rules_of: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    ids: Mapping[DecoratedNonTerminal, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        by_lhs: list[list[int]] = [[] for _ in self.nodes]
        for r, (lhs, _) in enumerate(self.rules):
            by_lhs[lhs].append(r)
        object.__setattr__(self, "rules_of", tuple(tuple(rs) for rs in by_lhs))
        object.__setattr__(self, "ids", {node: m for m, node in enumerate(self.nodes)})

    @classmethod
    def from_rules(
        cls,
        document: str,
        variables: Sequence[str],
        rules: Iterable[tuple[DecoratedNonTerminal, object]],
        start: Iterable[DecoratedNonTerminal],
        base_masks: Mapping[str, int],
    ) -> "DecoratedGrammar":
        """Assemble a decorated grammar from explicit rules (used for hand-built examples).

        Each rule's right-hand side is a :class:`DecoratedTerminal` or a pair
        of :class:`DecoratedNonTerminal`.
        """
        ids: dict[DecoratedNonTerminal, int] = {}

        def nid(node):
            if node not in ids:
                ids[node] = len(ids)
            return ids[node]

        start_ids = tuple(nid(s) for s in start)
        table = []
        for lhs, rhs in rules:
            if isinstance(rhs, DecoratedTerminal):
                table.append((nid(lhs), rhs))
            else:
                b, c = rhs
                table.append((nid(lhs), (nid(b), nid(c))))
        nodes = tuple(ids)
        return cls(
            document,
            OpIndex(tuple(variables)),
            nodes,
            tuple(base_masks[node.base] for node in nodes),
            tuple(table),
            start_ids,
        )

    @property
    def n(self) -> int:
        return len(self.document)

    @property
    def variables(self) -> tuple[str, ...]:
        return self.index.variables

    @property
    def is_empty_language(self) -> bool:
        return not self.start

    def node_id(self, node: DecoratedNonTerminal) -> int:
        return self.ids[node]

    def stable_flags(self) -> list[bool]:
        return [self.base_masks[m] == (node.x | node.y) for m, node in enumerate(self.nodes)]

    def format_ops(self, mask: int) -> str:
        ops = sorted(self.index.ops(mask), key=lambda op: self.index.bit(op))
        return " ".join(str(op) for op in ops) or "-"

    def format_node(self, m: int) -> str:
        node = self.nodes[m]
        return f"{node.base}^<{self.format_ops(node.x)};{self.format_ops(node.y)}>[{node.i},{node.j}]"

    def format_terminal(self, t: DecoratedTerminal) -> str:
        return f"({self.format_ops(t.x)};{t.i};{self.format_ops(t.y)})"

    def dump(self) -> str:
        lines = [f"# decorated grammar for a document of length {self.n}"]
        for s in self.start:
            lines.append(f"START -> {self.format_node(s)}")
        for lhs, rhs in self.rules:
            if isinstance(rhs, DecoratedTerminal):
                body = self.format_terminal(rhs)
            else:
                body = f"{self.format_node(rhs[0])} {self.format_node(rhs[1])}"
            lines.append(f"{self.format_node(lhs)} -> {body}")
        return "\n".join(lines) + "\n"


def _empty(ag: AdjustedGrammar, idx: OpIndex) -> DecoratedGrammar:
    return DecoratedGrammar(ag.document, idx, (), (), (), ())


def decorate(ag: AdjustedGrammar, ops: VarOpSetTable) -> DecoratedGrammar:
    """Build the decorated grammar of an adjusted grammar.

    Decorated non-terminals are generated bottom-up, so only productive ones
    exist.  Rules that pair a span non-terminal with an epsilon one become
    unit rules that add the epsilon side's operations to a superscript; the
    unit rules are then removed by unit-closure, and a final reachability
    pass keeps what the start can reach.
    """
    idx = ops.index
    if ag.is_empty_language:
        return _empty(ag, idx)
    masks = [ops[base] for base, _, _ in ag.nodes]
    rules_of = ag.rules_of()
    span_nodes = [m for m, (_, i, _) in enumerate(ag.nodes) if i]
    order = sorted(
        span_nodes,
        key=lambda m: (ag.nodes[m][2] - ag.nodes[m][1], bin(masks[m]).count("1"), m),
    )

    sup: dict[int, dict[tuple[int, int], None]] = {}
    dec_id: dict[tuple[int, int, int], int] = {}
    dec_key: list[tuple[int, int, int]] = []
    # raw rules per decorated node: ("t", i) | ("u", child) | ("b", left, right)
    raw: list[list[tuple]] = []

    def dec(m, x, y):
        key = (m, x, y)
        d = dec_id.get(key)
        if d is None:
            d = dec_id[key] = len(dec_key)
            dec_key.append(key)
            raw.append([])
            sup[m][(x, y)] = None
        return d

    for m in order:
        _, i, _ = ag.nodes[m]
        sup[m] = {}
        for r in rules_of[m]:
            rhs = ag.rules[r][1]
            if len(rhs) == 1:
                raw[dec(m, 0, 0)].append(("t", i))
                continue
            b, c = rhs
            if not ag.nodes[c][1]:
                xc = masks[c]
                for x, y in list(sup[b]):
                    if not (x | y) & xc:
                        raw[dec(m, x, y | xc)].append(("u", dec_id[(b, x, y)]))
            elif not ag.nodes[b][1]:
                xb = masks[b]
                for x, y in list(sup[c]):
                    if not (x | y) & xb:
                        raw[dec(m, x | xb, y)].append(("u", dec_id[(c, x, y)]))
            else:
                right = list(sup[c])
                for x, y in list(sup[b]):
                    left = dec_id[(b, x, y)]
                    for z, w in right:
                        if (x | y) & (z | w) or x & y or z & w:
                            continue
                        raw[dec(m, x, w)].append(("b", left, dec_id[(c, z, w)]))

    roots = [dec_id[(0, x, y)] for x, y in sup.get(0, ())]
    if not roots:
        return _empty(ag, idx)

    # reachability over all raw rules, then unit-closure
    seen = set(roots)
    queue = deque(roots)
    while queue:
        u = queue.popleft()
        for rule in raw[u]:
            for child in rule[1:] if rule[0] != "t" else ():
                if child not in seen:
                    seen.add(child)
                    queue.append(child)

    closed: dict[int, list[tuple]] = {}

    def closure_rules(u: int) -> list[tuple]:
        if u in closed:
            return closed[u]
        out: dict[tuple, None] = {}
        members = [u]
        visited = {u}
        k = 0
        while k < len(members):
            v = members[k]
            k += 1
            for rule in raw[v]:
                if rule[0] == "u":
                    if rule[1] not in visited:
                        visited.add(rule[1])
                        members.append(rule[1])
                else:
                    out[rule] = None
        closed[u] = list(out)
        return closed[u]

    new_id: dict[int, int] = {}
    order_out: list[int] = []
    for u in roots:
        if u not in new_id:
            new_id[u] = len(order_out)
            order_out.append(u)
    k = 0
    while k < len(order_out):
        u = order_out[k]
        k += 1
        for rule in closure_rules(u):
            if rule[0] == "b":
                for child in rule[1:]:
                    if child not in new_id:
                        new_id[child] = len(order_out)
                        order_out.append(child)

    nodes = []
    base_masks = []
    table = []
    for u in order_out:
        m, x, y = dec_key[u]
        base, i, j = ag.nodes[m]
        nodes.append(DecoratedNonTerminal(base, i, j, x, y))
        base_masks.append(masks[m])
    for u in order_out:
        lhs = new_id[u]
        node = nodes[lhs]
        for rule in closure_rules(u):
            if rule[0] == "t":
                table.append((lhs, DecoratedTerminal(node.x, rule[1], node.y)))
            else:
                table.append((lhs, (new_id[rule[1]], new_id[rule[2]])))
    return DecoratedGrammar(
        ag.document,
        idx,
        tuple(nodes),
        tuple(base_masks),
        tuple(table),
        tuple(new_id[u] for u in roots),
    )


def compute_stable(dg: DecoratedGrammar) -> frozenset:
    """Decorated non-terminals whose superscripts already hold all operations of their base."""
    return frozenset(node for node, ok in zip(dg.nodes, dg.stable_flags()) if ok)


def decorated_to_mapping(w: Sequence[DecoratedTerminal], variables: Sequence[str] | OpIndex) -> SpanMapping:
    """Read the mapping off a decorated word.

    An operation in the prefix set of letter ``i`` or the suffix set of letter
    ``i-1`` is placed at position ``i``; suffix operations of the last letter
    go to ``n+1``.
    """
    idx = variables if isinstance(variables, OpIndex) else OpIndex(tuple(variables))
    seen = 0
    where: dict[int, tuple[int, int]] = {}
    for t in w:
        for mask, rank, pos in ((t.x, 2 * t.i, t.i), (t.y, 2 * t.i + 1, t.i + 1)):
            if mask & seen:
                raise ValueError("operation repeated in decorated word")
            seen |= mask
            for b in range(2 * len(idx.variables)):
                if mask >> b & 1:
                    where[b] = (rank, pos)
    if seen != idx.full:
        raise ValueError("decorated word misses some operations")
    pairs = []
    for b, (rank, pos) in where.items():
        if b & 1 and where[b - 1][0] > rank:
            raise ValueError(f"variable {idx.variables[b >> 1]} closes before it opens")
        pairs.append((idx.op(b), pos))
    return SpanMapping(tuple(pairs))


def decorated_words(dg: DecoratedGrammar) -> Counter:
    """Every decorated word with the number of its parse trees (exhaustive, for tests).

    Unit-rule elimination can leave a left-hand side with larger outer
    superscripts than its children.  The surplus belongs to the outermost
    letters of the subtree, so while reading a tree top-down the prefix set
    travels to the leftmost leaf and the suffix set to the rightmost one.
    For leaves reached without surplus this is the terminal's own decoration.
    """
    memo: dict[tuple[int, int, int], Counter] = {}
    nodes = dg.nodes

    def words(m: int, x: int, y: int) -> Counter:
        key = (m, x, y)
        if key in memo:
            return memo[key]
        out: Counter = Counter()
        for r in dg.rules_of[m]:
            rhs = dg.rules[r][1]
            if isinstance(rhs, DecoratedTerminal):
                out[(DecoratedTerminal(x, rhs.i, y),)] += 1
            else:
                b, c = rhs
                right = words(c, nodes[c].x, y)
                for u, cu in words(b, x, nodes[b].y).items():
                    for v, cv in right.items():
                        out[u + v] += cu * cv
        memo[key] = out
        return out

    total: Counter = Counter()
    for s in dg.start:
        total.update(words(s, nodes[s].x, nodes[s].y))
    return total


__all__ = [
    "DecoratedGrammar",
    "DecoratedNonTerminal",
    "DecoratedTerminal",
    "compute_stable",
    "decorate",
    "decorated_to_mapping",
    "decorated_words",
]
