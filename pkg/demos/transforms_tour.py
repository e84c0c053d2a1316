"""Walk a grammar through the normal forms the engine uses internally.

    python3 demos/transforms_tour.py
"""

from cfspanner import (
    functionalize,
    load_grammar,
    naive_evaluate,
    project,
    serialize_grammar,
    to_cnf,
)
from cfspanner.transforms import compute_varop_sets

doc = "abab"
g = load_grammar("disjeqlen_original")
print("source grammar:\n" + serialize_grammar(g))

cnf = to_cnf(g)
print(f"CNF: {len(cnf.productions)} productions")

# The source grammar is not functional: A can close x and open y, or the reverse.
fg = functionalize(cnf)
table = compute_varop_sets(fg)
print(f"functional: {len(fg.grammar.productions)} productions")
for nt in sorted(table.masks)[:6]:
    ops = " ".join(sorted(str(op) for op in table.ops(nt))) or "-"
    print(f"  {nt:<8} emits {ops}")

before = naive_evaluate(g, doc)
after = naive_evaluate(fg, doc)
print(f"\non {doc!r}: {len(before)} mappings before, {len(after)} after, equal={before == after}")

only_x = project(g, ["x"])
print("projected onto x:", sorted(str(m) for m in naive_evaluate(only_x, doc)))
