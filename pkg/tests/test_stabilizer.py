import numpy as np
import pytest

from nora_stabilizer.clifford import embed, random_symplectic
from nora_stabilizer.stabilizer import (
    RegionMask,
    StabilizerTableau,
    append_ancillas,
    apply_clifford,
    apply_local_clifford,
    bell_pairs,
    commuting_phase_defect,
    deserialize,
    empty,
    entropy,
    group_element,
    mutual_information,
    reduced_group_rank,
    row_weights,
    serialize,
    tensor,
    validate,
    zero_state,
)
from nora_stabilizer.utils import DimensionMismatchError, RegionError


def scrambled_state(n, d, rng, gates=30):
    tableau = zero_state(n, d)
    for _ in range(gates):
        sites = rng.choice(n, size=2, replace=False)
        tableau = apply_local_clifford(tableau, random_symplectic(2, d, rng), sites)
    return tableau


def test_zero_state():
    tableau = zero_state(4, 5)
    validate(tableau)
    assert tableau.is_pure
    assert row_weights(tableau) == [1, 1, 1, 1]
    assert entropy(tableau, [0, 2]) == 0


def test_bell_pairs():
    tableau = bell_pairs(2, 3)
    validate(tableau)
    assert tableau.n == 4
    assert entropy(tableau, [0]) == 1
    assert entropy(tableau, [0, 1]) == 2
    assert entropy(tableau, [0, 2]) == 0
    assert mutual_information(tableau, [0], [2]) == 2
    assert mutual_information(tableau, [0], [3]) == 0


def test_non_commuting_generators_are_rejected():
    tableau = StabilizerTableau(np.array([[1, 0, 0, 0], [0, 1, 0, 0]]), np.zeros(2), 3)
    with pytest.raises(ValueError, match="commute"):
        validate(tableau)


def test_dependent_generators_are_rejected():
    tableau = StabilizerTableau(np.array([[1, 0, 0, 0], [2, 0, 0, 0]]), np.zeros(2), 3)
    with pytest.raises(ValueError, match="independent"):
        validate(tableau)


def test_too_many_generators():
    tableau = StabilizerTableau(np.array([[1, 0], [2, 0]]), np.zeros(2), 3)
    with pytest.raises(ValueError):
        validate(tableau)


def test_phase_count_must_match():
    with pytest.raises(DimensionMismatchError):
        StabilizerTableau(np.array([[1, 0]]), np.zeros(2), 3)


def test_mixed_states():
    tableau = empty(3, 3)
    assert entropy(tableau, [0, 1]) == 2
    assert reduced_group_rank(tableau, [0, 1, 2]) == 0
    partial = append_ancillas(empty(2, 3), 2)
    assert partial.k_gen == 2
    assert entropy(partial, [0, 2]) == 1


def test_pure_state_entropy_is_symmetric(rng):
    tableau = scrambled_state(7, 3, rng)
    validate(tableau)
    for size in range(8):
        region = RegionMask.of(rng.choice(7, size=size, replace=False), 7)
        assert entropy(tableau, region) == entropy(tableau, region.complement)
        assert 0 <= entropy(tableau, region) <= min(size, 7 - size)


def test_local_clifford_matches_embedded_clifford(rng):
    tableau = scrambled_state(5, 5, rng)
    c = random_symplectic(2, 5, rng)
    local = apply_local_clifford(tableau, c, [3, 1])
    full = apply_clifford(tableau, embed(c, [3, 1], 5))
    assert local == full


def test_local_unitaries_leave_entropies_unchanged(rng):
    tableau = scrambled_state(6, 3, rng)
    region = [0, 1, 4]
    before = entropy(tableau, region)
    rotated = apply_local_clifford(tableau, random_symplectic(2, 3, rng), [0, 4])
    rotated = apply_local_clifford(rotated, random_symplectic(1, 3, rng), [5])
    assert entropy(rotated, region) == before
    assert commuting_phase_defect(rotated) == 0


def test_mutual_information_is_non_negative(rng):
    tableau = scrambled_state(6, 3, rng)
    for _ in range(10):
        sites = rng.permutation(6)
        assert mutual_information(tableau, sites[:2], sites[2:4]) >= 0


def test_overlapping_regions():
    with pytest.raises(RegionError):
        mutual_information(bell_pairs(1, 3), [0], [0, 1])


def test_region_mask():
    region = RegionMask.of([3, 1], 5)
    assert region.sites == (1, 3)
    assert region.complement.sites == (0, 2, 4)
    assert region.columns.tolist() == [2, 3, 6, 7]
    assert len(region.union(RegionMask.interval(0, 2, 5))) == 3
    with pytest.raises(RegionError):
        RegionMask.of([1, 1], 5)
    with pytest.raises(RegionError):
        RegionMask.of([5], 5)
    with pytest.raises(RegionError):
        region.union(RegionMask.of([0], 4))


def test_group_element():
    tableau = StabilizerTableau(np.array([[1, 0, 0, 0], [0, 0, 1, 0]]), np.array([1, 2]), 3)
    element = group_element(tableau, [2, 1])
    assert element.components.tolist() == [2, 0, 1, 0]
    assert element.phase_exp == (2 * 1 + 1 * 2) % 3


def test_tensor_and_ancillas():
    combined = tensor(bell_pairs(1, 3), zero_state(2, 3))
    validate(combined)
    assert combined.n == 4
    assert append_ancillas(bell_pairs(1, 3), 2) == combined
    with pytest.raises(ValueError):
        append_ancillas(combined, -1)
    with pytest.raises(DimensionMismatchError):
        tensor(zero_state(1, 3), zero_state(1, 5))


def test_serialization(rng):
    tableau = scrambled_state(4, 7, rng)
    text = serialize(tableau)
    assert text.startswith("# nora-stabilizer tableau n=4 d=7 rows=4")
    assert deserialize(text) == tableau


def test_deserialize_rejects_malformed_text():
    with pytest.raises(ValueError):
        deserialize("0 1 0\n")
    with pytest.raises(ValueError):
        deserialize("# nora-stabilizer tableau n=1 d=3 rows=2\n0 1 0\n")
