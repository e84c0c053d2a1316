"""Bundled example grammars.

The main corpus holds grammars that are declared unambiguous and are used
for the oracle sweeps.  ``extra/`` holds grammars that are ambiguous or not
functional, kept for transform tests.
"""

from __future__ import annotations

from importlib import resources

from .grammar import ExtractionGrammar, parse_grammar

_PACKAGE = "cfspanner.grammars"


def corpus_names() -> list[str]:
    root = resources.files(_PACKAGE)
    return sorted(p.name[:-3] for p in root.iterdir() if p.name.endswith(".eg"))


def extra_names() -> list[str]:
    root = resources.files(_PACKAGE) / "extra"
    return sorted(p.name[:-3] for p in root.iterdir() if p.name.endswith(".eg"))


def grammar_text(name: str) -> str:
    root = resources.files(_PACKAGE)
    for path in (root / f"{name}.eg", root / "extra" / f"{name}.eg"):
        if path.is_file():
            return path.read_text(encoding="utf-8")
    raise KeyError(f"no bundled grammar named {name!r}")


def load_grammar(name: str) -> ExtractionGrammar:
    return parse_grammar(grammar_text(name))


def load_corpus() -> dict[str, ExtractionGrammar]:
    return {name: load_grammar(name) for name in corpus_names()}
