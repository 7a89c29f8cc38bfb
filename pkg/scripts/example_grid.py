"""Full-opacity verdicts of the running example over a (p1, p2, delta) grid.

Prints one table per p1 value and compares every cell with the closed form.

    python scripts/example_grid.py [--step 1/2] [--max-delta 4]
"""
import argparse
from fractions import Fraction

from etop.opacity import grid_values, sweep
from etop.testsupport import running_example


def closed_form(p1, p2, d):
    return p1 == 0 and ((d <= 3 and 3 <= p2 <= d + 3) or (p2 < d and p2 == 3))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--step", default="1/2")
    ap.add_argument("--max-delta", default="4")
    args = ap.parse_args()
    p1s = [Fraction(0), Fraction(1, 2), Fraction(1)]
    p2s = grid_values(2, 4, Fraction(1, 2))
    deltas = grid_values(0, Fraction(args.max_delta), Fraction(args.step))
    report = sweep(running_example(), {"p1": p1s, "p2": p2s}, deltas, "full")
    mismatches = 0
    for p1 in p1s:
        print(f"\np1 = {p1}   (rows p2, columns delta; # = fully opaque, ! = differs from closed form)")
        print("        " + " ".join(f"{str(d):>4}" for d in deltas))
        for p2 in p2s:
            cells = []
            for d in deltas:
                row = report.lookup({"p1": p1, "p2": p2}, d)
                mark = "#" if row.opaque else "."
                if row.opaque != closed_form(p1, p2, d):
                    mark, mismatches = "!", mismatches + 1
                cells.append(f"{mark:>4}")
            print(f"{str(p2):>7} " + " ".join(cells))
    print(f"\n{len(report.rows)} cells, {mismatches} mismatches")
    return 1 if mismatches else 0


if __name__ == "__main__":
    raise SystemExit(main())
