"""Random instances of zero patterns for 3x3 matrices.

'*' must be non-zero, '.' is zero or non-zero at random, '0' is zero.
"""

import random

from siegelkit.exactmat import RationalMatrix, det

# pattern, expected segments, sequence expected for (i, j) = (3, 1) or None
GL3_CLASSES = {
    "upper triangular": (["* . .", "0 * .", "0 0 *"], [[1], [2], [3]], None),
    "lower 2x2 block": (["* . .", "0 . .", "0 * ."], [[1], [2, 3]], None),
    "upper 2x2 block": ([". . .", "* . .", "0 0 *"], [[1, 2], [3]], None),
    "corner non-zero": ([". . .", ". . .", "* . ."], [[1, 2, 3]], [(3, 1)]),
    "corner zero, subdiagonal non-zero": ([". . .", "* . .", "0 * ."], [[1, 2, 3]], [(3, 2), (2, 1)]),
}


def _nonzero(rng):
    return rng.choice([-1, 1]) * rng.randint(1, 9)


def instance(pattern, rng: random.Random) -> RationalMatrix:
    rows = [r.split() for r in pattern]
    while True:
        m = [[_nonzero(rng) if c == "*" else 0 if c == "0" else rng.choice([0, _nonzero(rng)])
              for c in row] for row in rows]
        # '*' marks the leading entry of its row, so everything to its left is zero
        for row, spec in zip(m, rows):
            if "*" in spec:
                for k in range(spec.index("*")):
                    row[k] = 0
        matrix = RationalMatrix(m)
        if det(matrix) != 0:
            return matrix


def random_sparse_invertible(rng: random.Random, n: int) -> RationalMatrix:
    """Entries zero with probability 1/2, otherwise small non-zero rationals."""
    while True:
        m = RationalMatrix([[0 if rng.random() < 0.5 else f"{_nonzero(rng)}/{rng.randint(1, 4)}"
                             for _ in range(n)] for _ in range(n)])
        if det(m) != 0:
            return m
