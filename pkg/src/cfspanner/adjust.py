"""Adjust a functional CNF grammar to one fixed document.

The adjusted grammar has non-terminals ``A[i,j]`` that derive exactly the
ref-words of ``A`` cleaning to the letters ``i..j`` of the document, and
``A[eps]`` that derive the operation-only ref-words of ``A``.  Its language
is the set of valid ref-words of the grammar that clean to the document.

The construction runs bottom-up over spans in increasing length, like CYK, so
only productive non-terminals are ever created.  A final reachability pass
from ``S[1,n]`` removes the rest of the useless ones.
"""

from __future__ import annotations

from dataclasses import dataclass

from .grammar import Terminal, VarOp
from .transforms import FunctionalGrammar


@dataclass(frozen=True)
class AdjustedGrammar:
    """Document-indexed grammar.

    ``nodes[m]`` is ``(base, i, j)``; ``i == j == 0`` marks the epsilon
    version of ``base``.  ``rules`` lists ``(lhs, rhs)`` with ``rhs`` either a
    one-element tuple holding a terminal or operation, or a pair of node ids.
    Node ``0`` is the start ``S[1,n]`` unless the grammar is empty.
    """

    document: str
    variables: tuple[str, ...]
    nodes: tuple[tuple[str, int, int], ...]
    rules: tuple[tuple[int, tuple], ...]
    instantiated: int = 0

    @property
    def is_empty_language(self) -> bool:
        return not self.nodes

    @property
    def start(self) -> int | None:
        return 0 if self.nodes else None

    @property
    def n(self) -> int:
        return len(self.document)

    def node_id(self, base: str, i: int = 0, j: int = 0) -> int:
        return self.nodes.index((base, i, j))

    def rules_of(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in self.nodes]
        for r, (lhs, _) in enumerate(self.rules):
            out[lhs].append(r)
        return out

    def node_name(self, m: int) -> str:
        base, i, j = self.nodes[m]
        return f"{base}[eps]" if i == 0 else f"{base}[{i},{j}]"

    def dump(self) -> str:
        lines = [f"# adjusted grammar for a document of length {self.n}"]
        for lhs, rhs in self.rules:
            if len(rhs) == 1:
                body = str(rhs[0])
            else:
                body = " ".join(self.node_name(m) for m in rhs)
            lines.append(f"{self.node_name(lhs)} -> {body}")
        return "\n".join(lines) + "\n"


def adjust(fg: FunctionalGrammar, d: str) -> AdjustedGrammar:
    """Build the adjusted grammar of ``fg`` for the nonempty document ``d``."""
    if not d:
        raise ValueError("adjust needs a nonempty document; the empty document "
                         "is handled by empty_doc_mapping")
    g = fg.grammar
    n = len(d)
    if g.is_empty_language:
        return AdjustedGrammar(d, g.vars, (), ())

    letter_rules: dict[str, list[str]] = {}
    op_rules: list[tuple[str, VarOp]] = []
    binary: list[tuple[str, str, str]] = []
    for p in g.productions:
        if len(p.rhs) == 1:
            s = p.rhs[0]
            if isinstance(s, Terminal):
                letter_rules.setdefault(s.char, []).append(p.lhs)
            else:
                op_rules.append((p.lhs, s))
        else:
            binary.append((p.lhs, p.rhs[0].name, p.rhs[1].name))

    keys: dict[tuple[str, int, int], int] = {}
    nodes: list[tuple[str, int, int]] = []

    def intern(key):
        m = keys.get(key)
        if m is None:
            m = keys[key] = len(nodes)
            nodes.append(key)
        return m

    rules: list[tuple[int, tuple]] = []

    # epsilon non-terminals
    eps: set[str] = set()
    for a, op in op_rules:
        eps.add(a)
        rules.append((intern((a, 0, 0)), (op,)))
    changed = True
    eps_rules_done: set[int] = set()
    while changed:
        changed = False
        for r, (a, b, c) in enumerate(binary):
            if r not in eps_rules_done and b in eps and c in eps:
                eps_rules_done.add(r)
                eps.add(a)
                changed = True
                rules.append((intern((a, 0, 0)), (intern((b, 0, 0)), intern((c, 0, 0)))))

    by_left: dict[str, list[tuple[str, str]]] = {}
    with_eps_right: dict[str, list[tuple[str, str]]] = {}
    with_eps_left: dict[str, list[tuple[str, str]]] = {}
    for a, b, c in binary:
        by_left.setdefault(b, []).append((c, a))
        if c in eps:
            with_eps_right.setdefault(b, []).append((c, a))
        if b in eps:
            with_eps_left.setdefault(c, []).append((b, a))

    # productive non-terminals per span, as insertion-ordered dicts
    span: dict[tuple[int, int], dict[str, None]] = {}
    for length in range(1, n + 1):
        for i in range(1, n - length + 2):
            j = i + length - 1
            here: dict[str, None] = {}
            span[(i, j)] = here
            queue: list[str] = []

            def found(a: str):
                if a not in here:
                    here[a] = None
                    queue.append(a)

            if length == 1:
                for a in letter_rules.get(d[i - 1], ()):
                    found(a)
                    rules.append((intern((a, i, i)), (Terminal(d[i - 1]),)))
            for mid in range(i, j):
                left, right = span[(i, mid)], span[(mid + 1, j)]
                if not left or not right:
                    continue
                for b in left:
                    for c, a in by_left.get(b, ()):
                        if c in right:
                            found(a)
                            rules.append((intern((a, i, j)),
                                          (intern((b, i, mid)), intern((c, mid + 1, j)))))
            # rules that keep the span and add an epsilon sibling
            q = 0
            while q < len(queue):
                b = queue[q]
                q += 1
                for c, a in with_eps_right.get(b, ()):
                    found(a)
                    rules.append((intern((a, i, j)), (intern((b, i, j)), intern((c, 0, 0)))))
                for c, a in with_eps_left.get(b, ()):
                    found(a)
                    rules.append((intern((a, i, j)), (intern((c, 0, 0)), intern((b, i, j)))))

    instantiated = len(rules)
    root = keys.get((g.start, 1, n))
    if root is None or g.start not in span[(1, n)]:
        return AdjustedGrammar(d, g.vars, (), (), instantiated)

    # keep what is reachable from the start, renumbering in discovery order
    by_lhs: list[list[int]] = [[] for _ in nodes]
    for r, (lhs, _) in enumerate(rules):
        by_lhs[lhs].append(r)
    new_id = {root: 0}
    order = [root]
    q = 0
    while q < len(order):
        m = order[q]
        q += 1
        for r in by_lhs[m]:
            rhs = rules[r][1]
            if len(rhs) == 2:
                for child in rhs:
                    if child not in new_id:
                        new_id[child] = len(order)
                        order.append(child)
    kept = []
    for m in order:
        for r in by_lhs[m]:
            rhs = rules[r][1]
            if len(rhs) == 2:
                rhs = (new_id[rhs[0]], new_id[rhs[1]])
            kept.append((new_id[m], rhs))
    return AdjustedGrammar(
        d, g.vars, tuple(nodes[m] for m in order), tuple(kept), instantiated
    )


def language_of(ag: AdjustedGrammar, length_bound: int, node: int | None = None) -> set[tuple]:
    """Every word the adjusted grammar derives (from ``node``, default the start).

    The language is finite: words of a functional grammar adjusted to a
    document of length ``n`` have length at most ``n + 2k``.
    """
    need = ag.n + 2 * len(ag.variables)
    if length_bound < need:
        raise ValueError(f"length bound {length_bound} is below |d| + 2k = {need}")
    if ag.is_empty_language:
        return set()
    by_lhs = ag.rules_of()
    memo: dict[int, frozenset] = {}

    def words(m: int) -> frozenset:
        if m in memo:
            return memo[m]
        out: set[tuple] = set()
        for r in by_lhs[m]:
            rhs = ag.rules[r][1]
            if len(rhs) == 1:
                out.add(rhs)
            else:
                right = words(rhs[1])
                for u in words(rhs[0]):
                    for v in right:
                        if len(u) + len(v) <= length_bound:
                            out.add(u + v)
        memo[m] = frozenset(out)
        return memo[m]

    return set(words(0 if node is None else node))


__all__ = ["AdjustedGrammar", "adjust", "language_of"]
