"""Show that the work between two outputs does not grow with the document.

Preprocessing (adjusting and decorating the grammar) grows polynomially with
the document length; the enumeration phase afterwards takes a bounded number
of steps per output.

    python3 demos/delay_profile.py
"""

from cfspanner import compile_spanner, load_grammar


def main():
    g = load_grammar("disjeqlen")
    spanner = compile_spanner(g)
    print(f"{'n':>4} {'outputs':>8} {'max delay':>10} {'mean delay':>11} {'adjust s':>9} {'jump s':>8}")
    for n in (4, 8, 16, 32, 64):
        doc = ("aabb" * n)[:n]
        run = spanner.run(doc)
        count = sum(1 for _ in run)
        delays = run.stats.delays
        print(f"{n:>4} {count:>8} {run.stats.max_delay:>10} {sum(delays) / len(delays):>11.2f} "
              f"{run.times.adjust:>9.3f} {run.times.jump:>8.3f}")


if __name__ == "__main__":
    main()
