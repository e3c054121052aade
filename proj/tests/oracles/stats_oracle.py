#!/usr/bin/env python3
"""Hand-calculation oracles for agreement and accuracy arithmetic.

Fleiss' kappa computed straight from the textbook definition with Fractions;
weighted scenario accuracy computed from the per-scenario counts.
"""
from fractions import Fraction


def fleiss(counts):
    """counts: list of per-item category count lists, constant rater total."""
    n = sum(counts[0])
    N = len(counts)
    k = len(counts[0])
    P_i = [Fraction(sum(c * c for c in row) - n, n * (n - 1)) for row in counts]
    P_bar = sum(P_i) / N
    p_j = [Fraction(sum(row[j] for row in counts), N * n) for j in range(k)]
    Pe = sum(p * p for p in p_j)
    return (P_bar - Pe) / (1 - Pe)


# 3 raters, binary labels (yes, no) over 6 items; worked by hand first:
#   items: [3,0] [2,1] [0,3] [1,2] [3,0] [0,3]
#   P_i = 1, 1/3, 1, 1/3, 1, 1 -> P_bar = 14/3 / 6 = 7/9
#   p_yes = 9/18 = 1/2 -> Pe = 1/2 -> kappa = (7/9 - 1/2)/(1/2) = 5/9
THREE_RATER = [[3, 0], [2, 1], [0, 3], [1, 2], [3, 0], [0, 3]]

# Classic 14-rater, 5-category, 10-item worked example.
FOURTEEN = [
    [0, 0, 0, 0, 14], [0, 2, 6, 4, 2], [0, 0, 3, 5, 6], [0, 3, 9, 2, 0],
    [2, 2, 8, 1, 1], [7, 7, 0, 0, 0], [3, 2, 6, 3, 0], [2, 5, 3, 2, 2],
    [6, 5, 2, 1, 0], [0, 2, 2, 3, 7],
]

if __name__ == "__main__":
    k3 = fleiss(THREE_RATER)
    print("three-rater kappa =", k3, float(k3))
    k14 = fleiss(FOURTEEN)
    print("fourteen-rater kappa =", k14, float(k14))

    sizes = [1606, 635, 135, 10]
    accs = [Fraction(918, 1000), Fraction(940, 1000), Fraction(963, 1000), Fraction(900, 1000)]
    weighted = sum(n * a for n, a in zip(sizes, accs)) / sum(sizes)
    print("weighted overall (exact rates) =", float(weighted) * 100)
    correct = [round(n * a) for n, a in zip(sizes, accs)]
    print("integer correct counts =", correct, "overall =",
          float(Fraction(sum(correct), sum(sizes))) * 100)
