import numpy as np
import pytest

from onehash import (BinarySet, Permutation, load_sketches, pad_dim,
                     save_sketches, sketch_fixed, sketch_kperm_minwise,
                     sketch_m_perm, sketch_variable)

# A hand-built permutation on D=16 realizing the documented worked
# example: three sets whose permuted images are {2,4,7,13}, {0,6,13}
# and {0,1,10,12}, sharing one element between sets 1-2 and 2-3.
WORKED_MAPPING = {0: 2, 1: 4, 2: 7, 3: 13,   # set 1 = {0,1,2,3}
                  4: 0, 5: 6,                # set 2 = {3,4,5}
                  6: 1, 7: 10, 8: 12}        # set 3 = {4,6,7,8}
WORKED_SETS = ([0, 1, 2, 3], [3, 4, 5], [4, 6, 7, 8])


def worked_permutation() -> Permutation:
    vec = [None] * 16
    for src, dst in WORKED_MAPPING.items():
        vec[src] = dst
    spare = sorted(set(range(16)) - set(WORKED_MAPPING.values()))
    for i in range(16):
        if vec[i] is None:
            vec[i] = spare.pop()
    return Permutation.from_vector(vec)


def worked_sets():
    return [BinarySet.from_iterable(s, 16) for s in WORKED_SETS]


def _bin_of(i: int, bin_seed: int, k: int) -> int:
    from onehash import _bits
    return int(_bits.hash2(bin_seed, i) % k)


class TestFixed:
    def test_worked_example_slots(self):
        perm = worked_permutation()
        s1, s2, s3 = worked_sets()
        assert sorted(perm.apply_array(s1.indices).tolist()) == [2, 4, 7, 13]
        assert sorted(perm.apply_array(s2.indices).tolist()) == [0, 6, 13]
        assert sorted(perm.apply_array(s3.indices).tolist()) == [0, 1, 10, 12]
        assert sketch_fixed(s1, perm, 4).slots == [2, 0, None, 1]
        assert sketch_fixed(s2, perm, 4).slots == [0, 2, None, 1]
        assert sketch_fixed(s3, perm, 4).slots == [0, None, 2, 0]

    def test_single_bin_never_empty(self):
        s = BinarySet.from_iterable([9, 3], 16)
        perm = Permutation.generate(5, 16)
        sk = sketch_fixed(s, perm, 1)
        assert sk.slots == [int(perm.apply_array(s.indices).min())]

    def test_empty_set_rejected(self):
        with pytest.raises(ValueError):
            sketch_fixed(BinarySet(np.array([], dtype=np.int64), 16),
                         Permutation.generate(0, 16), 4)

    def test_indivisible_k_rejected(self):
        s = BinarySet.from_iterable([1], 10)
        with pytest.raises(ValueError):
            sketch_fixed(s, Permutation.generate(0, 10), 4)
        # padding the space fixes it
        d_eff = pad_dim(10, 4)
        sk = sketch_fixed(s, Permutation.generate(0, d_eff), 4)
        assert sk.d_eff == 12

    def test_brute_force_bin_minima(self):
        rng = np.random.default_rng(77)
        for trial in range(25):
            d = int(rng.choice([16, 64, 256, 1024]))
            k = int(rng.choice([2, 4, 8, 16]))
            f = int(rng.integers(1, min(d, 40)))
            idx = np.sort(rng.choice(d, size=f, replace=False))
            s = BinarySet(idx, d)
            perm = Permutation.generate(trial, d)
            sk = sketch_fixed(s, perm, k)
            img = set(perm.apply_array(idx).tolist())
            cell = d // k
            for j in range(k):
                members = [v for v in img if j * cell <= v < (j + 1) * cell]
                if members:
                    assert sk.slots[j] == min(members) - j * cell
                else:
                    assert sk.slots[j] is None

    def test_slot_values_within_capacity(self):
        s = BinarySet.from_iterable(range(0, 100, 7), 128)
        sk = sketch_fixed(s, Permutation.generate(3, 128), 8)
        cap = 128 // 8
        assert all(v is None or 0 <= v < cap for v in sk.slots)


class TestVariable:
    def test_single_element_single_slot(self):
        s = BinarySet.from_iterable([11], 64)
        sk = sketch_variable(s, bin_seed=9, perm=Permutation.generate(1, 64),
                             k=8)
        assert sk.n_empty == 7
        assert sum(v is not None for v in sk.slots) == 1

    def test_shared_element_same_bin_same_value(self):
        # a shared element lands in the same bin with the same permuted
        # value in both sketches; make it the only element of its bin
        perm = Permutation.generate(4, 64)
        shared = 23
        a = sketch_variable(BinarySet.from_iterable([shared], 64), 3, perm, 8)
        partner = next(i for i in range(64)
                       if i != shared
                       and a.slots.index(perm.apply(shared)) !=
                       _bin_of(i, 3, 8))
        b = sketch_variable(BinarySet.from_iterable([shared, partner], 64),
                            3, perm, 8)
        j = a.slots.index(perm.apply(shared))
        assert b.slots[j] == a.slots[j] == perm.apply(shared)

    def test_empty_fraction_matches_binomial_rate(self):
        # lone set, f=20 into k=10 bins: Pr(slot empty) = (1 - 1/10)^20
        f, k = 20, 10
        s = BinarySet.from_iterable(range(f), 64)
        perm = Permutation.generate(0, 64)
        trials = 10_000
        empties = 0
        for seed in range(trials):
            empties += sketch_variable(s, seed, perm, k).n_empty
        p_hat = empties / (trials * k)
        p = (1 - 1 / k) ** f
        se = np.sqrt(p * (1 - p) / (trials * k))  # conservative: slots correlate
        assert abs(p_hat - p) < 4 * se + 0.003

    def test_raw_values_not_reindexed(self):
        s = BinarySet.from_iterable([50, 60], 64)
        perm = Permutation.from_vector(list(range(64)))
        sk = sketch_variable(s, 1, perm, 4)
        present = sorted(v for v in sk.slots if v is not None)
        assert present and all(v in (50, 60) for v in present)


class TestMPerm:
    def test_m1_identical_to_fixed(self):
        s = BinarySet.from_iterable([3, 17, 40, 41], 64)
        perm = Permutation.generate(12, 64)
        direct = sketch_fixed(s, perm, 8)
        hybrid = sketch_m_perm(s, [perm], 8)
        assert hybrid.slots == direct.slots

    def test_m_equals_k_is_classical_minwise(self):
        s = BinarySet.from_iterable([5, 9, 33], 64)
        perms = [Permutation.generate(j, 64) for j in range(4)]
        hybrid = sketch_m_perm(s, perms, 4)
        classical = sketch_kperm_minwise(s, perms)
        assert hybrid.n_empty == 0
        assert hybrid.values.tolist() == classical.values.tolist()

    def test_m_must_divide_k(self):
        s = BinarySet.from_iterable([1], 64)
        perms = [Permutation.generate(j, 64) for j in range(3)]
        with pytest.raises(ValueError):
            sketch_m_perm(s, perms, 8)

    def test_more_permutations_fewer_joint_empties(self):
        # one pair with a 6-element union at d = 2**12, k = 4
        d, k = 2**12, 4
        s1 = BinarySet.from_iterable([0, 1, 2, 3], d)
        s2 = BinarySet.from_iterable([3, 100, 200], d)
        rng = np.random.default_rng(2024)
        trials = 10_000
        joint = {1: 0, 2: 0}
        for _ in range(trials):
            perms = [Permutation.from_vector(rng.permutation(d))
                     for _ in range(2)]
            for m in (1, 2):
                a = sketch_m_perm(s1, perms[:m], k)
                b = sketch_m_perm(s2, perms[:m], k)
                joint[m] += int((~a.occupied & ~b.occupied).sum())
        assert joint[2] < joint[1]

    def test_mixed_dimensions_rejected(self):
        s = BinarySet.from_iterable([1], 32)
        perms = [Permutation.generate(0, 32), Permutation.generate(1, 64)]
        with pytest.raises(ValueError):
            sketch_m_perm(s, perms, 4)


class TestKPerm:
    def test_identical_sets_identical_vectors(self):
        perms = [Permutation.generate(j, 32) for j in range(5)]
        s = BinarySet.from_iterable([4, 9, 20], 32)
        v1 = sketch_kperm_minwise(s, perms)
        v2 = sketch_kperm_minwise(BinarySet.from_iterable([4, 9, 20], 32),
                                  perms)
        assert v1.values.tolist() == v2.values.tolist()

    def test_full_set_minimum_is_zero(self):
        s = BinarySet.from_iterable(range(16), 16)
        v = sketch_kperm_minwise(s, [Permutation.generate(3, 16)])
        assert v.values.tolist() == [0]

    def test_empty_set_rejected(self):
        with pytest.raises(ValueError):
            sketch_kperm_minwise(BinarySet(np.array([], dtype=np.int64), 16),
                                 [Permutation.generate(0, 16)])


class TestSerialization:
    def test_fixed_roundtrip(self, tmp_path):
        perm = Permutation.generate(8, 64)
        sets = [BinarySet.from_iterable([1, 5, 60], 64),
                BinarySet.from_iterable([2], 64)]
        sketches = [sketch_fixed(s, perm, 8) for s in sets]
        path = tmp_path / "sk.bin"
        save_sketches(path, sketches, b=4)
        loaded, b = load_sketches(path)
        assert b == 4
        for orig, back in zip(sketches, loaded):
            assert back.slots == orig.slots
            assert back.params() == orig.params()

    def test_variable_roundtrip(self, tmp_path):
        perm = Permutation.generate(8, 64)
        sk = sketch_variable(BinarySet.from_iterable([7, 9], 64), 5, perm, 4)
        path = tmp_path / "sk.bin"
        save_sketches(path, [sk])
        loaded, _ = load_sketches(path)
        assert loaded[0].slots == sk.slots
        assert loaded[0].seeds == sk.seeds

    def test_kperm_roundtrip(self, tmp_path):
        perms = [Permutation.generate(j, 32) for j in range(3)]
        v = sketch_kperm_minwise(BinarySet.from_iterable([4, 9], 32), perms)
        path = tmp_path / "mv.bin"
        save_sketches(path, [v])
        loaded, _ = load_sketches(path)
        assert loaded[0].values.tolist() == v.values.tolist()
        assert loaded[0].params() == v.params()

    def test_mixed_params_rejected(self, tmp_path):
        perm = Permutation.generate(8, 64)
        a = sketch_fixed(BinarySet.from_iterable([1], 64), perm, 8)
        b = sketch_fixed(BinarySet.from_iterable([1], 64), perm, 4)
        with pytest.raises(ValueError):
            save_sketches(tmp_path / "bad.bin", [a, b])
