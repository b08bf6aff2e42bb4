"""Segments of a matrix and chains of leading entries inside a segment.

Run: python demos/02_segments.py
"""

from siegelkit.exactmat import RationalMatrix
from siegelkit.segments import leading_entries, segment_partition, witnessing_sequence

examples = {
    "upper triangular": "2 1 5; 0 3 1; 0 0 1",
    "block {2,3}": "1 1 1; 0 0 1; 0 1 0",
    "corner entry (3,1) non-zero": "0 0 1; 0 1 0; 1 0 0",
    "corner zero, (2,1) and (3,2) non-zero": "1 1 1; 1 0 0; 0 1 0",
}

for name, text in examples.items():
    gamma = RationalMatrix.from_text(text)
    part = segment_partition(gamma)
    print(f"{name:40s} leading {[tuple(e) for e in leading_entries(gamma)]}  segments {part}")
    if part.same_segment(3, 1):
        chain = witnessing_sequence(gamma, 3, 1)
        print(f"{'':40s} chain linking 3 to 1: {[tuple(e) for e in chain]}")

print("\nThe last two matrices share the segment {1,2,3}, but only the first one")
print("links row 3 to column 1 with a single leading entry.")
