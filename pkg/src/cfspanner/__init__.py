"""Context-free document spanners: extraction grammars evaluated with constant delay."""

from .adjust import AdjustedGrammar, adjust, language_of
from .corpus import load_corpus, load_grammar
from .decorate import (
    DecoratedGrammar,
    DecoratedNonTerminal,
    DecoratedTerminal,
    compute_stable,
    decorate,
    decorated_to_mapping,
    decorated_words,
)
from .enumeration import (
    CompiledSpanner,
    JumpTable,
    apply_prod,
    compile_spanner,
    compute_jump,
    enumerate_mappings,
    mark_skippable,
    spanner_enumerate,
)
from .errors import NotFunctionalError, ResourceLimitError
from .grammar import (
    MAX_VARIABLES,
    Close,
    ExtractionGrammar,
    GrammarError,
    GrammarSyntaxError,
    NonTerminal,
    Open,
    Production,
    Span,
    SpanMapping,
    Terminal,
    VarOp,
    clean,
    count_ops,
    format_refword,
    is_valid,
    parse_grammar,
    parse_refword,
    ref_to_mapping,
    serialize_grammar,
)
from .oracle import accepted_refwords, cyk_accepts, naive_evaluate, valid_refwords
from .transforms import (
    FunctionalGrammar,
    VarOpSetTable,
    compute_varop_sets,
    empty_doc_mapping,
    functionalize,
    is_regular_form,
    project,
    remove_useless,
    to_cnf,
    union,
)

__version__ = "0.1.0"
