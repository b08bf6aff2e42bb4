import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from patterns import GL3_CLASSES, instance, random_sparse_invertible
from siegelkit.errors import NotSameSegment, SingularMatrix
from siegelkit.exactmat import RationalMatrix
from siegelkit.segments import (
    LeadingEntry,
    SegmentPartition,
    find_condition_sequence,
    in_block_diagonal,
    in_block_upper,
    interval_partitions,
    leading_entries,
    satisfies_condition,
    segment_partition,
    witnessing_sequence,
)


def M(text):
    return RationalMatrix.from_text(text)


def brute_force_partition(gamma):
    valid = [p for p in interval_partitions(gamma.n) if in_block_upper(gamma, p)]
    finest = max(len(p.starts) for p in valid)
    candidates = [p for p in valid if len(p.starts) == finest]
    assert len(candidates) == 1
    return candidates[0]


class TestLeadingEntries:
    def test_examples(self):
        assert leading_entries(RationalMatrix.identity(3)) == [(1, 1), (2, 2), (3, 3)]
        assert leading_entries(M("0 1 0; 1 0 0; 0 0 1")) == [(1, 2), (2, 1), (3, 3)]
        assert leading_entries(M("1 1 1; 1 0 0; 0 1 0")) == [(1, 1), (2, 1), (3, 2)]

    def test_zero_row(self):
        with pytest.raises(SingularMatrix):
            leading_entries(M("1 2; 0 0"))


class TestPartition:
    @pytest.mark.parametrize("text, blocks", [
        ("1 2 3; 0 4 5; 0 0 6", [[1], [2], [3]]),
        ("1 1 1; 0 0 1; 0 1 0", [[1], [2, 3]]),
        ("1 1 1; 1 0 0; 0 1 0", [[1, 2, 3]]),
    ])
    def test_examples(self, text, blocks):
        assert segment_partition(M(text)).blocks == blocks

    @given(st.integers(1, 5), st.integers(0, 2**32 - 1))
    def test_matches_brute_force(self, n, seed):
        gamma = random_sparse_invertible(random.Random(seed), n)
        assert segment_partition(gamma) == brute_force_partition(gamma)

    def test_partition_type(self):
        p = SegmentPartition.from_blocks([[1, 2], [3], [4, 5]])
        assert p.starts == (1, 3, 4) and p.segment_of(5) == 2 and str(p) == "{1,2}, {3}, {4,5}"
        assert p.same_segment(1, 2) and not p.same_segment(2, 3)
        with pytest.raises(ValueError):
            SegmentPartition(3, (2,))

    def test_interval_partition_count(self):
        assert len(list(interval_partitions(5))) == 16


class TestWitnessingSequence:
    def test_examples(self):
        assert witnessing_sequence(M("0 1; 1 0"), 2, 1) == [(2, 1)]
        assert witnessing_sequence(M("0 0 1; 0 1 0; 1 0 0"), 3, 1) == [(3, 1)]
        assert witnessing_sequence(M("1 1 1; 1 0 0; 0 1 0"), 3, 1) == [(3, 2), (2, 1)]

    def test_precondition(self):
        with pytest.raises(NotSameSegment):
            witnessing_sequence(M("1 1; 0 1"), 2, 1)
        with pytest.raises(NotSameSegment):
            witnessing_sequence(M("0 1; 1 0"), 1, 2)

    @given(st.integers(2, 5), st.integers(0, 2**32 - 1))
    def test_condition_and_distinct_rows(self, n, seed):
        gamma = random_sparse_invertible(random.Random(seed), n)
        part = segment_partition(gamma)
        lead = set(leading_entries(gamma))
        for i in range(1, n + 1):
            for j in range(1, i):
                if not part.same_segment(i, j):
                    with pytest.raises(NotSameSegment):
                        witnessing_sequence(gamma, i, j)
                    continue
                seq = witnessing_sequence(gamma, i, j)
                assert satisfies_condition(seq, i, j)
                assert set(seq) <= lead
                rows = [e.row for e in seq]
                assert len(set(rows)) == len(rows) and j not in rows

    @given(st.integers(2, 5), st.integers(0, 2**32 - 1))
    def test_converse(self, n, seed):
        gamma = random_sparse_invertible(random.Random(seed), n)
        part = segment_partition(gamma)
        for i in range(1, n + 1):
            for j in range(1, i):
                if find_condition_sequence(gamma, i, j) is not None:
                    assert part.same_segment(i, j)

    def test_condition_predicate(self):
        E = LeadingEntry
        assert satisfies_condition([E(3, 2), E(2, 1)], 3, 1)
        assert not satisfies_condition([E(3, 2)], 3, 1)
        assert not satisfies_condition([E(2, 1)], 3, 1)
        assert not satisfies_condition([], 2, 1)


class TestTable:
    @pytest.mark.parametrize("name", sorted(GL3_CLASSES))
    def test_gl3_classes(self, name):
        pattern, blocks, seq = GL3_CLASSES[name]
        rng = random.Random(name)
        for _ in range(25):
            gamma = instance(pattern, rng)
            assert segment_partition(gamma).blocks == blocks
            if seq is not None:
                assert witnessing_sequence(gamma, 3, 1) == seq


class TestBlockPredicates:
    def test_block_upper(self):
        two = SegmentPartition.from_blocks([[1], [2]])
        assert in_block_upper(RationalMatrix.identity(2), two)
        assert not in_block_upper(M("1 0; 1 1"), two)
        assert in_block_upper(M("1 0; 1 1"), SegmentPartition(2, (1,)))

    def test_block_diagonal(self):
        two = SegmentPartition.from_blocks([[1], [2]])
        assert in_block_diagonal(RationalMatrix.identity(2), two)
        assert not in_block_diagonal(M("1 1; 0 1"), two)
        assert in_block_diagonal(M("1 2 0; 3 4 0; 0 0 5"), SegmentPartition.from_blocks([[1, 2], [3]]))
        assert in_block_diagonal([[1, 1e-30], [0, 1]], two, tol=1e-20)
