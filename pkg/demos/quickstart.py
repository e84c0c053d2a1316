"""Extract pairs of spans with a small grammar and compare against brute force.

    python3 demos/quickstart.py
"""

from cfspanner import compile_spanner, naive_evaluate, parse_grammar

GRAMMAR = """\
vars: x, y
start: S
unambiguous: true
S -> B {x A 'b' y} B
A -> 'a' A 'b' | 'a' x} {y
B -> 'a' B | 'b' B | eps
"""


def main():
    g = parse_grammar(GRAMMAR)
    print(f"grammar with variables {g.vars} and {len(g.productions)} productions")

    # compile once, then evaluate on several documents
    spanner = compile_spanner(g)
    for doc in ["ab", "ababb", "aabb", "aaabbbab"]:
        run = spanner.run(doc)
        found = list(run)
        print(f"\n{doc!r}: {len(found)} mapping(s)")
        for m in found:
            pieces = ", ".join(f"{v}={doc[s.start - 1:s.end - 1]!r}" for v, s in m.spans.items())
            print(f"  {m}   {pieces}")
        assert set(found) == naive_evaluate(g, doc)

    print("\nall results agree with the brute-force evaluator")


if __name__ == "__main__":
    main()
