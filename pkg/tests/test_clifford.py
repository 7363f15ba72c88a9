import numpy as np
import pytest

from cliffrb.clifford import (
    CliffordTableau,
    GateSequence,
    clifford_apply,
    clifford_compose,
    clifford_inverse,
    embed_tableau,
    enumerate_group,
    find_mapping,
    group_order,
    PRIMITIVE_TABLEAUX,
    sample_choice_counts,
    sample_uniform,
    sequence_to_tableau,
)
from cliffrb.pauli import (
    PauliOperator,
    enumerate_paulis,
    pauli_commutes,
)


def random_pauli(n, rng, nonidentity=False):
    while True:
        p = PauliOperator(n, int(rng.integers(0, 1 << n)),
                          int(rng.integers(0, 1 << n)))
        if not (nonidentity and p.is_identity()):
            return p


class TestApply:
    def test_gate_table_examples(self):
        h = PRIMITIVE_TABLEAUX["H"]
        assert str(clifford_apply(h, PauliOperator.from_string("X"))) == "+Z"
        cx = PRIMITIVE_TABLEAUX["CX"]
        assert str(clifford_apply(cx, PauliOperator.from_string("XI"))) == "+XX"
        g = CliffordTableau.from_image_strings(["YZ", "ZY"], ["ZI", "IZ"])
        assert str(clifford_apply(g, PauliOperator.from_string("XI"))) == "+YZ"

    def test_preserves_commutation(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            n = int(rng.integers(1, 6))
            c = sample_uniform(n, rng)
            p, q = random_pauli(n, rng), random_pauli(n, rng)
            assert pauli_commutes(p, q) == \
                pauli_commutes(clifford_apply(c, p), clifford_apply(c, q))

    def test_group_action_including_sign(self):
        rng = np.random.default_rng(9)
        for _ in range(60):
            n = int(rng.integers(1, 7))
            c, d = sample_uniform(n, rng), sample_uniform(n, rng)
            p = random_pauli(n, rng)
            assert clifford_apply(clifford_compose(c, d), p) == \
                clifford_apply(c, clifford_apply(d, p))


class TestComposeInverse:
    def test_h_squared_is_identity(self):
        h = PRIMITIVE_TABLEAUX["H"]
        assert clifford_compose(h, h).is_identity()

    def test_inverse_roundtrip(self):
        rng = np.random.default_rng(13)
        for _ in range(100):
            n = int(rng.integers(1, 7))
            c = sample_uniform(n, rng)
            assert clifford_compose(clifford_inverse(c), c).is_identity()
            assert clifford_compose(c, clifford_inverse(c)).is_identity()

    def test_identity_and_pauli_inverses(self):
        assert clifford_inverse(CliffordTableau.identity(3)).is_identity()
        x_as_clifford = PRIMITIVE_TABLEAUX["X"]
        assert clifford_inverse(x_as_clifford) == x_as_clifford

    def test_validation_rejects_bad_tableau(self):
        with pytest.raises(ValueError):
            CliffordTableau.from_image_strings(["X"], ["X"])


class TestGroupOrder:
    def test_table_values(self):
        assert group_order(1) == 24
        assert group_order(1, quotient=True) == 6
        assert group_order(2) == 11520
        assert group_order(2, quotient=True) == 720
        assert group_order(3, quotient=True) == 1451520

    def test_choice_count_product_identity(self):
        for n in range(1, 9):
            prod = 1
            for cx, cz in sample_choice_counts(n):
                prod *= cx * cz
            assert prod == group_order(n)


class TestEnumerate:
    def test_small_counts(self):
        assert len(enumerate_group(1)) == 24
        assert len(enumerate_group(1, quotient=True)) == 6
        assert len(enumerate_group(2, quotient=True)) == 720

    def test_all_distinct_and_contains_identity(self):
        group = enumerate_group(2, quotient=True)
        codes = {t.encode() for t in group}
        assert len(codes) == 720
        assert any(t.is_identity() for t in group)

    def test_closed_under_compose(self):
        group = enumerate_group(1)
        codes = {t.encode() for t in group}
        rng = np.random.default_rng(17)
        for _ in range(1000):
            a, b = rng.integers(0, len(group), size=2)
            assert clifford_compose(group[a], group[b]).encode() in codes

    def test_resource_guard(self):
        with pytest.raises(ValueError):
            enumerate_group(3, quotient=False)

    def test_one_transitivity(self):
        # |{C : C(P_i) = ±P_j}| is the same constant over all non-identity i, j
        for n in (1, 2):
            group = enumerate_group(n)
            paulis = [p for p in enumerate_paulis(n) if not p.is_identity()]
            index = {(p.x_mask, p.z_mask): k for k, p in enumerate(paulis)}
            counts = np.zeros((len(paulis), len(paulis)), dtype=int)
            for c in group:
                for k, p in enumerate(paulis):
                    q = clifford_apply(c, p)
                    counts[k, index[(q.x_mask, q.z_mask)]] += 1
            expected = len(group) // len(paulis)
            assert np.all(counts == expected)


class TestSampleUniform:
    def test_invariants_many_sizes(self):
        rng = np.random.default_rng(23)
        for n in range(1, 9):
            for _ in range(125):
                sample_uniform(n, rng).validate()

    def test_hits_whole_group_n1(self):
        rng = np.random.default_rng(29)
        codes = {t.encode() for t in enumerate_group(1)}
        seen = {sample_uniform(1, rng).encode() for _ in range(2000)}
        assert seen == codes


class TestFindMapping:
    def test_single_qubit_x_to_z(self):
        seq = find_mapping(PauliOperator.from_string("X"),
                           PauliOperator.from_string("Z"))
        t = sequence_to_tableau(seq)
        assert clifford_apply(t, PauliOperator.from_string("X")).representative() \
            == PauliOperator.from_string("Z")

    def test_fixed_point_gives_empty_sequence(self):
        z = PauliOperator.from_string("Z")
        assert len(find_mapping(z, z)) == 0

    def test_random_roundtrip(self):
        rng = np.random.default_rng(31)
        for _ in range(200):
            n = int(rng.integers(1, 7))
            p = random_pauli(n, rng, nonidentity=True)
            q = random_pauli(n, rng, nonidentity=True)
            seq = find_mapping(p, q)
            got = clifford_apply(sequence_to_tableau(seq), p)
            assert got.representative() == q.representative()
            # O(n) gate count: swap (3) + 2n one-qubit + n CZ is a safe cap
            assert len(seq) <= 3 * n + 3

    def test_identity_arguments_rejected(self):
        with pytest.raises(ValueError):
            find_mapping(PauliOperator.identity(2),
                         PauliOperator.from_string("XI"))


class TestEmbedAndSequences:
    def test_embed_matches_direct(self):
        cx = PRIMITIVE_TABLEAUX["CX"]
        big = embed_tableau(cx, (2, 0), 3)
        p = PauliOperator.from_string("IIX")  # X on qubit 2 (the control)
        assert str(clifford_apply(big, p)) == "+XIX"

    def test_sequence_roundtrip_json(self):
        seq = GateSequence(2, (("H", (0,)), ("CX", (0, 1))))
        assert GateSequence.from_json(seq.to_json()) == seq

    def test_tableau_json_roundtrip(self):
        rng = np.random.default_rng(37)
        for _ in range(20):
            c = sample_uniform(3, rng)
            assert CliffordTableau.from_json(c.to_json()) == c
