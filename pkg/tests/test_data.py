import io

import numpy as np
import pytest

from onehash import (BinarySet, FormatError, PairSpec, intersect_stats,
                     parse_libsvm, parse_sets, write_libsvm, write_sets)


class TestBinarySet:
    def test_valid_construction(self):
        s = BinarySet(np.array([0, 3, 9]), 10)
        assert len(s) == 3
        assert s.dim == 10

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            BinarySet(np.array([0, 10]), 10)
        with pytest.raises(ValueError):
            BinarySet(np.array([-1, 2]), 10)

    def test_rejects_non_increasing(self):
        with pytest.raises(ValueError):
            BinarySet(np.array([3, 3]), 10)
        with pytest.raises(ValueError):
            BinarySet(np.array([5, 2]), 10)

    def test_from_iterable_sorts_and_dedups(self):
        s = BinarySet.from_iterable([7, 1, 7, 4], 8)
        assert s.indices.tolist() == [1, 4, 7]


class TestPairSpec:
    def test_derived_quantities(self):
        spec = PairSpec(4, 3, 1, 16)
        assert spec.f == 6
        assert spec.r == pytest.approx(1 / 6)

    def test_invalid_specs(self):
        with pytest.raises(ValueError):
            PairSpec(2, 3, 3, 16)   # a > min(f1, f2)
        with pytest.raises(ValueError):
            PairSpec(9, 9, 1, 16)   # union exceeds space

    def test_swap_symmetry(self):
        spec = PairSpec(5, 3, 2, 32)
        sw = spec.swapped()
        assert (sw.f1, sw.f2) == (3, 5)
        assert sw.f == spec.f and sw.a == spec.a and sw.r == spec.r


class TestIntersectStats:
    def test_worked_pair(self):
        s1 = BinarySet.from_iterable([2, 4, 7, 13], 16)
        s2 = BinarySet.from_iterable([0, 6, 13], 16)
        spec = intersect_stats(s1, s2)
        assert (spec.f1, spec.f2, spec.a) == (4, 3, 1)
        assert spec.r == pytest.approx(1 / 6)

    def test_identical_sets(self):
        s = BinarySet.from_iterable([1, 5, 6], 8)
        spec = intersect_stats(s, s)
        assert spec.a == spec.f1 == spec.f2 == 3
        assert spec.r == 1.0

    def test_disjoint_sets(self):
        s1 = BinarySet.from_iterable([0, 1], 8)
        s2 = BinarySet.from_iterable([4, 5], 8)
        assert intersect_stats(s1, s2).r == 0.0

    def test_dimension_mismatch(self):
        s1 = BinarySet.from_iterable([0], 8)
        s2 = BinarySet.from_iterable([0], 9)
        with pytest.raises(ValueError):
            intersect_stats(s1, s2)

    def test_symmetric(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            i1 = np.unique(rng.integers(0, 50, size=8))
            i2 = np.unique(rng.integers(0, 50, size=12))
            s1, s2 = BinarySet(i1, 50), BinarySet(i2, 50)
            fwd = intersect_stats(s1, s2)
            back = intersect_stats(s2, s1)
            assert (fwd.f1, fwd.f2) == (back.f2, back.f1)
            assert fwd.a == back.a and fwd.f == back.f and fwd.r == back.r


class TestLibsvm:
    def test_basic_parse(self):
        sets, labels = parse_libsvm("+1 1:1 3:1\n-1 2:1\n")
        assert sets[0].indices.tolist() == [0, 2]
        assert sets[1].indices.tolist() == [1]
        assert labels == [1, -1]

    def test_binarization(self):
        sets, _ = parse_libsvm("+1 5:0.7\n", treat_nonzero_as_one=True)
        assert sets[0].indices.tolist() == [4]

    def test_strict_mode_rejects_non_binary(self):
        with pytest.raises(FormatError):
            parse_libsvm("+1 5:0.7\n", treat_nonzero_as_one=False)

    def test_empty_lines_skipped(self):
        sets, labels = parse_libsvm("\n+1 1:1\n\n")
        assert len(sets) == 1 and labels == [1]

    def test_errors_carry_line_numbers(self):
        with pytest.raises(FormatError) as err:
            parse_libsvm("+1 1:1\n-1 3:1 2:1\n")
        assert err.value.line == 2
        with pytest.raises(FormatError) as err:
            parse_libsvm("+1 nonsense\n")
        assert err.value.line == 1

    def test_dim_inference_and_override(self):
        sets, _ = parse_libsvm("+1 8:1\n")
        assert sets[0].dim == 8
        sets, _ = parse_libsvm("+1 8:1\n", dim=100)
        assert sets[0].dim == 100

    def test_roundtrip_idempotent(self):
        text = "+1 1:1 4:1 9:1\n-1 2:1 4:1\n"
        sets, labels = parse_libsvm(text)
        once = write_libsvm(sets, labels)
        sets2, labels2 = parse_libsvm(once)
        assert write_libsvm(sets2, labels2) == once
        assert labels2 == labels
        assert all(a == b for a, b in zip(sets, sets2))


class TestPlainSets:
    def test_parse_and_write(self):
        text = "a: 0 2 5\nb: 1\n"
        sets, ids = parse_sets(text)
        assert ids == ["a", "b"]
        assert sets[0].indices.tolist() == [0, 2, 5]
        assert write_sets(sets, ids) == text

    def test_roundtrip_idempotent(self):
        text = "0: 3 1 3\n"  # unsorted + duplicate input is normalized
        sets, ids = parse_sets(text)
        once = write_sets(sets, ids)
        assert once == "0: 1 3\n"
        again, _ = parse_sets(once)
        assert again[0] == sets[0]

    def test_stream_input(self):
        sets, ids = parse_sets(io.StringIO("x: 7\n"), dim=32)
        assert sets[0].dim == 32 and ids == ["x"]
