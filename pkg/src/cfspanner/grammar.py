"""Documents, spans, ref-words and extraction grammars.

An extraction grammar is a context-free grammar whose terminal alphabet is
extended with variable operations: ``{x`` opens variable ``x`` and ``x}``
closes it.  A ref-word is a word over that extended alphabet; erasing the
operations gives back a plain document, and the position of every operation
relative to the letters gives a span for each variable.

Positions are 1-based and spans are half-open, so ``[i, j)`` covers the
letters ``d[i-1:j-1]`` of the Python string ``d``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence, Union

MAX_VARIABLES = 15

_VAR_RE = re.compile(r"[a-z][a-zA-Z0-9_]*\Z")


class GrammarError(ValueError):
    """Raised for grammars that are structurally inconsistent."""


class GrammarSyntaxError(GrammarError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True, slots=True)
class Terminal:
    char: str

    def __str__(self) -> str:
        return f"'{self.char}'"


@dataclass(frozen=True, slots=True)
class VarOp:
    """Opening (``{x``) or closing (``x}``) operation of one variable."""

    var: str
    opening: bool

    def __str__(self) -> str:
        return "{" + self.var if self.opening else self.var + "}"

    def sort_key(self) -> tuple[str, int]:
        return (self.var, 0 if self.opening else 1)


def Open(var: str) -> VarOp:
    return VarOp(var, True)


def Close(var: str) -> VarOp:
    return VarOp(var, False)


@dataclass(frozen=True, slots=True)
class NonTerminal:
    name: str

    def __str__(self) -> str:
        return self.name


Symbol = Union[Terminal, VarOp, NonTerminal]
RefSymbol = Union[Terminal, VarOp]
RefWord = tuple  # tuple[RefSymbol, ...]


@dataclass(frozen=True, slots=True)
class Span:
    start: int
    end: int

    def __post_init__(self):
        if not 1 <= self.start <= self.end:
            raise ValueError(f"invalid span [{self.start},{self.end}>")

    def __iter__(self):
        return iter((self.start, self.end))

    def __len__(self) -> int:
        return self.end - self.start

    def __str__(self) -> str:
        return f"[{self.start},{self.end}>"


def _pair_key(pair: tuple[VarOp, int]) -> tuple:
    op, pos = pair
    return (pos, op.var, 0 if op.opening else 1)


@dataclass(frozen=True)
class SpanMapping:
    """Assignment of spans to variables.

    Stored as the sorted list of ``(operation, position)`` pairs, which is
    also the form the enumeration algorithm produces.  Use :meth:`from_spans`
    to build one from a ``{variable: (i, j)}`` dict.
    """

    pairs: tuple[tuple[VarOp, int], ...]
    _spans: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        pairs = tuple(sorted(self.pairs, key=_pair_key))
        object.__setattr__(self, "pairs", pairs)
        opens: dict[str, int] = {}
        closes: dict[str, int] = {}
        for op, pos in pairs:
            table = opens if op.opening else closes
            if op.var in table:
                raise ValueError(f"operation {op} appears twice")
            if pos < 1:
                raise ValueError(f"position {pos} out of range")
            table[op.var] = pos
        if opens.keys() != closes.keys():
            raise ValueError("every variable needs exactly one open and one close")
        spans = {}
        for var, start in opens.items():
            if closes[var] < start:
                raise ValueError(f"variable {var} closes before it opens")
            spans[var] = Span(start, closes[var])
        object.__setattr__(self, "_spans", dict(sorted(spans.items())))

    @classmethod
    def from_spans(cls, spans: Mapping[str, Sequence[int]]) -> "SpanMapping":
        pairs = []
        for var, (i, j) in spans.items():
            pairs.append((Open(var), i))
            pairs.append((Close(var), j))
        return cls(tuple(pairs))

    @property
    def spans(self) -> dict[str, Span]:
        return dict(self._spans)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(self._spans)

    def __getitem__(self, var: str) -> Span:
        return self._spans[var]

    def __len__(self) -> int:
        return len(self._spans)

    def as_dict(self) -> dict[str, tuple[int, int]]:
        return {v: (s.start, s.end) for v, s in self._spans.items()}

    def as_json(self) -> dict[str, list[int]]:
        return {v: [s.start, s.end] for v, s in self._spans.items()}

    def project(self, keep: Iterable[str]) -> "SpanMapping":
        keep = set(keep)
        return SpanMapping(tuple(p for p in self.pairs if p[0].var in keep))

    def sort_key(self) -> tuple:
        return tuple((v, s.start, s.end) for v, s in self._spans.items())

    def __str__(self) -> str:
        inner = ", ".join(f"{v}={s}" for v, s in self._spans.items())
        return "{" + inner + "}"


@dataclass(frozen=True, slots=True)
class Production:
    lhs: str
    rhs: tuple  # tuple[Symbol, ...]

    def __str__(self) -> str:
        body = " ".join(str(s) for s in self.rhs) if self.rhs else "eps"
        return f"{self.lhs} -> {body}"


@dataclass(frozen=True)
class ExtractionGrammar:
    """Context-free grammar over letters plus variable operations.

    ``vars`` keeps declaration order because operation bitmasks are laid out
    by variable index (bit ``2m`` opens the m-th variable, ``2m+1`` closes it).
    A grammar without productions is the empty-language marker.
    """

    vars: tuple[str, ...]
    nonterminals: frozenset
    terminals: frozenset
    productions: tuple[Production, ...]
    start: str
    declared_unambiguous: bool = False

    def __post_init__(self):
        if len(set(self.vars)) != len(self.vars):
            raise GrammarError("duplicate variable declaration")
        if self.start not in self.nonterminals:
            raise GrammarError(f"start symbol {self.start} is not a non-terminal")
        varset = set(self.vars)
        for p in self.productions:
            if p.lhs not in self.nonterminals:
                raise GrammarError(f"undeclared non-terminal {p.lhs}")
            for s in p.rhs:
                if isinstance(s, NonTerminal):
                    if s.name not in self.nonterminals:
                        raise GrammarError(f"undeclared non-terminal {s.name}")
                elif isinstance(s, VarOp):
                    if s.var not in varset:
                        raise GrammarError(f"undeclared variable {s.var}")
                elif isinstance(s, Terminal):
                    if s.char not in self.terminals:
                        raise GrammarError(f"undeclared terminal {s.char!r}")
                else:
                    raise GrammarError(f"unknown symbol {s!r}")

    @classmethod
    def build(
        cls,
        vars: Sequence[str],
        productions: Iterable[Production],
        start: str,
        declared_unambiguous: bool = False,
        extra_nonterminals: Iterable[str] = (),
    ) -> "ExtractionGrammar":
        """Build a grammar, inferring non-terminals and terminals from the rules."""
        productions = tuple(productions)
        nts = {start, *extra_nonterminals}
        terms = set()
        for p in productions:
            nts.add(p.lhs)
            for s in p.rhs:
                if isinstance(s, NonTerminal):
                    nts.add(s.name)
                elif isinstance(s, Terminal):
                    terms.add(s.char)
        return cls(
            tuple(vars),
            frozenset(nts),
            frozenset(terms),
            productions,
            start,
            declared_unambiguous,
        )

    @property
    def size(self) -> int:
        return sum(len(p.rhs) for p in self.productions)

    @property
    def k(self) -> int:
        return len(self.vars)

    @property
    def varops(self) -> tuple[VarOp, ...]:
        """All operations of the grammar's variables in bit order."""
        return tuple(op for v in self.vars for op in (Open(v), Close(v)))

    @property
    def is_empty_language(self) -> bool:
        return not any(p.lhs == self.start for p in self.productions)

    def rules_for(self, nt: str) -> list[Production]:
        return [p for p in self.productions if p.lhs == nt]

    def nonterminal_order(self) -> list[str]:
        """Non-terminals in first-appearance order (start first)."""
        seen = {self.start: None}
        for p in self.productions:
            seen.setdefault(p.lhs)
            for s in p.rhs:
                if isinstance(s, NonTerminal):
                    seen.setdefault(s.name)
        for nt in sorted(self.nonterminals):
            seen.setdefault(nt)
        return list(seen)

    def is_cnf(self) -> bool:
        for p in self.productions:
            if len(p.rhs) == 1:
                if isinstance(p.rhs[0], NonTerminal):
                    return False
            elif len(p.rhs) == 2:
                if not all(isinstance(s, NonTerminal) for s in p.rhs):
                    return False
            else:
                return False
        return True

    def __str__(self) -> str:
        return serialize_grammar(self)


class OpIndex:
    """Bit layout of variable operations for one variable tuple."""

    def __init__(self, variables: Sequence[str]):
        if len(variables) > MAX_VARIABLES:
            from .errors import ResourceLimitError

            raise ResourceLimitError(
                f"{len(variables)} variables exceed the engine limit of {MAX_VARIABLES}"
            )
        self.variables = tuple(variables)
        self.index = {v: m for m, v in enumerate(self.variables)}
        self.full = (1 << (2 * len(self.variables))) - 1
        self.opens = sum(1 << (2 * m) for m in range(len(self.variables)))

    def bit(self, op: VarOp) -> int:
        return 1 << (2 * self.index[op.var] + (0 if op.opening else 1))

    def op(self, bit_index: int) -> VarOp:
        return VarOp(self.variables[bit_index >> 1], not bit_index & 1)

    def mask(self, ops: Iterable[VarOp]) -> int:
        m = 0
        for op in ops:
            m |= self.bit(op)
        return m

    def ops(self, mask: int) -> frozenset:
        return frozenset(self.op(b) for b in iter_bits(mask))

    def order_ok(self, left: int, right: int) -> bool:
        """No variable is closed in ``left`` and opened in ``right``."""
        return not ((left >> 1) & right & self.opens)


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


# --------------------------------------------------------------------------
# ref-word semantics


def clean(r: Iterable[RefSymbol]) -> str:
    return "".join(s.char for s in r if isinstance(s, Terminal))


def count_ops(r: Iterable[RefSymbol]) -> int:
    return sum(1 for s in r if isinstance(s, VarOp))


def is_valid(r: Sequence[RefSymbol], variables: Iterable[str]) -> bool:
    variables = set(variables)
    opened: set[str] = set()
    closed: set[str] = set()
    for s in r:
        if isinstance(s, VarOp):
            if s.var not in variables:
                return False
            if s.opening:
                if s.var in opened:
                    return False
                opened.add(s.var)
            else:
                if s.var in closed or s.var not in opened:
                    return False
                closed.add(s.var)
        elif not isinstance(s, Terminal):
            return False
    return opened == variables and closed == variables


def ref_to_mapping(r: Sequence[RefSymbol], variables: Iterable[str]) -> SpanMapping:
    variables = tuple(variables)
    if not is_valid(r, variables):
        raise ValueError("ref-word is not valid for " + ", ".join(variables))
    pos = 1
    pairs = []
    for s in r:
        if isinstance(s, Terminal):
            pos += 1
        else:
            pairs.append((s, pos))
    return SpanMapping(tuple(pairs))


# --------------------------------------------------------------------------
# DSL

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<arrow>->)
  | (?P<bar>\|)
  | (?P<term>'(?P<char>.)')
  | (?P<open>\{(?P<ovar>[a-z][a-zA-Z0-9_]*))
  | (?P<close>(?P<cvar>[a-z][a-zA-Z0-9_]*)\})
  | (?P<eps>eps\b)
  | (?P<nt>[A-Z][A-Za-z0-9_%]*)
  | (?P<comment>\#.*)
    """,
    re.VERBOSE,
)

_HEADER_RE = re.compile(r"\s*(vars|start|unambiguous)\s*:(.*)\Z")


def _tokenize(line: str, lineno: int) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(line):
        m = _TOKEN_RE.match(line, pos)
        if m is None:
            raise GrammarSyntaxError(f"unexpected character {line[pos]!r}", lineno, pos + 1)
        kind = m.lastgroup
        if kind in ("char", "ovar", "cvar"):
            # lastgroup reports the innermost named group
            kind = {"char": "term", "ovar": "open", "cvar": "close"}[kind]
        if kind == "comment":
            break
        if kind != "ws":
            value = m.group("char") or m.group("ovar") or m.group("cvar") or m.group(0)
            tokens.append((kind, value, pos + 1))
        pos = m.end()
    return tokens


def _strip_comment(text: str) -> str:
    return text.split("#", 1)[0]


def parse_grammar(text: str) -> ExtractionGrammar:
    """Parse the ``.eg`` grammar format.

    Example::

        vars: x, y
        start: S
        S -> B {x 'a' A 'b' y} B
        A -> 'a' A 'b' | x} {y
        B -> 'a' B | 'b' B | eps
    """
    variables: list[str] | None = None
    start: str | None = None
    unambiguous = False
    raw_rules: list[tuple[str, list, int]] = []

    for lineno, line in enumerate(text.splitlines(), start=1):
        header = _HEADER_RE.match(line)
        if header and "->" not in _strip_comment(line):
            key, value = header.group(1), _strip_comment(header.group(2)).strip()
            col = line.index(key) + 1
            if key == "vars":
                if variables is not None:
                    raise GrammarSyntaxError("vars declared twice", lineno, col)
                variables = []
                for name in (v.strip() for v in value.split(",")) if value else ():
                    if not _VAR_RE.match(name):
                        raise GrammarSyntaxError(f"bad variable name {name!r}", lineno, col)
                    if name in variables:
                        raise GrammarSyntaxError(
                            f"duplicate variable declaration {name}", lineno, col
                        )
                    variables.append(name)
            elif key == "start":
                if start is not None:
                    raise GrammarSyntaxError("start declared twice", lineno, col)
                if not re.fullmatch(r"[A-Z][A-Za-z0-9_%]*", value):
                    raise GrammarSyntaxError(f"bad start symbol {value!r}", lineno, col)
                start = value
            else:
                if value.lower() not in ("true", "yes", "false", "no"):
                    raise GrammarSyntaxError(f"expected true/false, got {value!r}", lineno, col)
                unambiguous = value.lower() in ("true", "yes")
            continue

        tokens = _tokenize(line, lineno)
        if not tokens:
            continue
        if tokens[0][0] != "nt":
            raise GrammarSyntaxError("rule must start with a non-terminal", lineno, tokens[0][2])
        if len(tokens) < 2 or tokens[1][0] != "arrow":
            col = tokens[1][2] if len(tokens) > 1 else len(line) + 1
            raise GrammarSyntaxError("expected '->'", lineno, col)
        lhs = tokens[0][1]
        alt: list = []
        alts = [alt]
        for kind, value, col in tokens[2:]:
            if kind == "bar":
                alt = []
                alts.append(alt)
            elif kind == "arrow":
                raise GrammarSyntaxError("unexpected '->'", lineno, col)
            else:
                alt.append((kind, value, col))
        for alt in alts:
            if not alt:
                raise GrammarSyntaxError("empty alternative (write eps)", lineno, len(line) + 1)
            if any(kind == "eps" for kind, _, _ in alt) and len(alt) > 1:
                raise GrammarSyntaxError("eps must stand alone", lineno, alt[0][2])
            raw_rules.append((lhs, alt, lineno))

    if start is None:
        raise GrammarSyntaxError("missing 'start:' declaration", 1, 1)
    variables = variables or []
    declared_nts = {start} | {lhs for lhs, _, _ in raw_rules}
    varset = set(variables)
    productions = []
    for lhs, alt, lineno in raw_rules:
        rhs = []
        for kind, value, col in alt:
            if kind == "term":
                rhs.append(Terminal(value))
            elif kind in ("open", "close"):
                if value not in varset:
                    raise GrammarSyntaxError(f"undeclared variable {value}", lineno, col)
                rhs.append(VarOp(value, kind == "open"))
            elif kind == "nt":
                if value not in declared_nts:
                    raise GrammarSyntaxError(f"undeclared non-terminal {value}", lineno, col)
                rhs.append(NonTerminal(value))
        productions.append(Production(lhs, tuple(rhs)))
    return ExtractionGrammar.build(variables, productions, start, unambiguous)


def serialize_grammar(g: ExtractionGrammar) -> str:
    lines = [f"vars: {', '.join(g.vars)}".rstrip(), f"start: {g.start}"]
    if g.declared_unambiguous:
        lines.append("unambiguous: true")
    extra = sorted(g.nonterminals - {p.lhs for p in g.productions} - {g.start})
    if extra:
        # non-terminals without rules are unreferenced by the DSL, keep them visible
        lines.append("# rule-less non-terminals: " + " ".join(extra))
    current: str | None = None
    for p in g.productions:
        body = " ".join(str(s) for s in p.rhs) if p.rhs else "eps"
        if p.lhs == current:
            lines[-1] += " | " + body
        else:
            lines.append(f"{p.lhs} -> {body}")
            current = p.lhs
    return "\n".join(lines) + "\n"


def parse_refword(text: str) -> RefWord:
    """Parse a ref-word written with DSL tokens, e.g. ``"{x 'a' x} 'b'"``.

    Bare letters are accepted as a shorthand for quoted terminals, so
    ``"{x a a x} b"`` works too as long as each letter is its own token.
    """
    out = []
    for tok in text.split():
        m = re.fullmatch(r"'(.)'|\{([a-z][a-zA-Z0-9_]*)|([a-z][a-zA-Z0-9_]*)\}|(.)", tok)
        if m is None:
            raise ValueError(f"bad ref-word token {tok!r}")
        if m.group(1) is not None:
            out.append(Terminal(m.group(1)))
        elif m.group(2) is not None:
            out.append(Open(m.group(2)))
        elif m.group(3) is not None:
            out.append(Close(m.group(3)))
        else:
            out.append(Terminal(m.group(4)))
    return tuple(out)


def format_refword(r: Iterable[RefSymbol]) -> str:
    return " ".join(str(s) for s in r)
