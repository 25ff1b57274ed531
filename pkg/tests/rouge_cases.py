"""Curated ROUGE pairs with hand-counted F1 values: (candidate, reference, R1, R2, RL).

Counts were done by hand from the clipped n-gram and LCS definitions; the
library is never used to produce these numbers.
"""

from fractions import Fraction as F

CASES = [
    ("the cat sat", "the cat sat down", F(6, 7), F(4, 5), F(6, 7)),
    ("a b c", "a b c", 1, 1, 1),
    ("a b c", "a c b", 1, 0, F(2, 3)),
    ("", "a", 0, 0, 0),
    ("a", "", 0, 0, 0),
    ("a a a", "a", F(1, 2), 0, F(1, 2)),
    ("a b", "c d", 0, 0, 0),
    ("a b c d", "b c", F(2, 3), F(1, 2), F(2, 3)),
    ("the cat the dog", "the dog the cat", 1, F(2, 3), F(1, 2)),
    ("a b c d e", "a x c y e", F(3, 5), 0, F(3, 5)),
    ("a b", "a b a b", F(2, 3), F(1, 2), F(2, 3)),
    ("x", "x", 1, 0, 1),
    ("a b c", "c b a", 1, 0, F(1, 3)),
    ("a b c d", "a b c d e f", F(4, 5), F(3, 4), F(4, 5)),
    ("b a n a n a", "a n a n a s", F(5, 6), F(4, 5), F(5, 6)),
    ("a b c", "d a b c e a b", F(3, 5), F(1, 2), F(3, 5)),
    ("a c e g", "a b c d e f g", F(8, 11), 0, F(8, 11)),
    ("a b a", "b a b", F(2, 3), 1, F(2, 3)),
    ("p q r s", "s r q p", 1, 0, F(1, 4)),
    ("a b c a b", "a b", F(4, 7), F(2, 5), F(4, 7)),
]
