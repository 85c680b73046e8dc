import json
import math
from itertools import combinations_with_replacement

import numpy as np
import pytest

from artifact import groups
from artifact.errors import BadFusion, InvalidGroupData, MissingPowerMap, NonIntegral

ALL = groups.bundled_groups()


def test_bundle_contents():
    assert len(ALL) == 17
    assert {"cyclic_3", "symmetric_3", "dihedral_8"} <= set(ALL)


@pytest.mark.parametrize("name", ALL)
def test_character_tables_are_orthogonal(name):
    G = groups.load_group(name)
    T = G.chartable
    assert int(np.sum(G.degrees ** 2)) == G.order
    rows = (T * G.sizes) @ T.conj().T / G.order
    assert np.allclose(rows, np.eye(G.nclasses), atol=1e-12)
    # column orthogonality: sum_p chi_p(a) conj(chi_p(b)) = |C_G(a)| delta_ab
    cols = T.conj().T @ T
    assert np.allclose(cols, np.diag(G.order / G.sizes), atol=1e-10)
    assert groups.decompose(G.regular(), G) == list(G.degrees)


@pytest.mark.parametrize("name", ALL)
def test_subgroup_fusions_are_consistent(name):
    G = groups.load_group(name)
    for sub in G.subgroups:
        H, fusion = groups.subgroup(G, sub)
        groups.check_fusion(G, H, fusion)
    if "trivial" in G.subgroups:
        # inducing from the trivial subgroup gives the regular character
        H, fusion = groups.subgroup(G, "trivial")
        assert np.allclose(groups.induced_character(G, H, fusion, [1]), G.regular())


def test_fusion_errors():
    G = groups.load_group("symmetric_3")
    C3, fusion = groups.subgroup(G, "C3")
    with pytest.raises(BadFusion):
        groups.check_fusion(G, C3, fusion[:2])
    with pytest.raises(BadFusion):
        groups.check_fusion(G, C3, [1, 2, 2])
    with pytest.raises(BadFusion):
        # 3-cycles sent to transpositions break the power maps
        groups.check_fusion(G, C3, [0, 1, 1])
    with pytest.raises(KeyError):
        groups.subgroup(G, "C5")


def test_invalid_group_data(tmp_path):
    data = groups.load_group("cyclic_3").to_json()
    data["order"] = 4
    with pytest.raises(InvalidGroupData):
        groups.group_from_json(data)
    bad = groups.load_group("cyclic_3").to_json()
    bad["chartable"][1][1] = [5.0, 0.0]
    with pytest.raises(InvalidGroupData):
        groups.group_from_json(bad)
    with pytest.raises(InvalidGroupData):
        groups.group_from_json({"order": 1})
    with pytest.raises(InvalidGroupData):
        groups.load_group("no_such_group")
    f = tmp_path / "c2.json"
    f.write_text(json.dumps(groups.load_group("cyclic_2").to_json()))
    assert groups.load_group(f).order == 2


def test_missing_power_map():
    data = groups.load_group("cyclic_3").to_json()
    for c in data["classes"]:
        c["powermap"] = []
    G = groups.group_from_json(data)
    with pytest.raises(MissingPowerMap):
        groups.sym_power_character([3, 0, 0], G, 2)


def test_multiplicity_must_be_integral():
    G = groups.load_group("cyclic_3")
    with pytest.raises(NonIntegral):
        groups.mult([1.5, 0, 0], G.trivial(), G)


def test_symmetric_power_dimensions():
    G = groups.load_group("cyclic_4")
    chi = G.irr(0) + G.irr(1) + G.irr(3)
    for k in range(6):
        assert groups.sym_power_character(chi, G, k)[0] == pytest.approx(math.comb(k + 2, 2))
    with pytest.raises(ValueError):
        groups.sym_power_character(chi, G, -1)


# permutation representatives of the classes of S3 in file order: id, (12), (123)
S3_REPS = [(0, 1, 2), (1, 0, 2), (1, 2, 0)]


def _fixed_monomials(perm, d):
    count = 0
    for mono in combinations_with_replacement(range(3), d):
        if tuple(sorted(perm[i] for i in mono)) == mono:
            count += 1
    return count


def test_s3_permutation_representation_against_monomial_count():
    G = groups.load_group("symmetric_3")
    chi_v = [3, 1, 0]
    rep = groups.verify_g_sod_projective(G, chi_v, 3, maxdeg=4)
    assert np.array_equal(rep.hom[0], np.eye(3, dtype=int))
    for d in range(5):
        sym = np.array([_fixed_monomials(p, d) for p in S3_REPS], dtype=complex)
        assert np.allclose(groups.sym_power_character(chi_v, G, d), sym)
        want = np.array([[groups.mult(sym * G.irr(q), G.irr(p), G) for q in range(3)]
                         for p in range(3)])
        assert np.array_equal(rep.hom[d], want)


def test_induced_collection_and_rank():
    G = groups.load_group("symmetric_3")
    blocks = [groups.Block(1, "whole"), groups.Block(3, "C2_reflection"), groups.Block(2, "C3")]
    coll = groups.induced_collection(G, blocks)
    assert len(coll) == 3 + 2 + 3
    assert groups.block_rank_check(G, blocks, 8).ok
    assert not groups.block_rank_check(G, blocks, 9).ok
    # induced characters have degree [G:H] dim
    for obj in coll:
        H, _ = groups.subgroup(G, blocks[obj.block].subgroup)
        assert obj.character[0] == pytest.approx(G.order / H.order * H.degrees[obj.irrep])
    with pytest.raises(BadFusion):
        groups.induced_collection(G, [groups.Block(2, "C2_reflection")])
    with pytest.raises(ValueError):
        groups.induced_collection(G, [groups.Block(1, "whole", lift=False)])


def test_frobenius_reciprocity_random_class_functions():
    for name in ("dihedral_12", "cyclic_12"):
        G = groups.load_group(name)
        for sub in G.subgroups:
            H, fusion = groups.subgroup(G, sub)
            assert groups.frobenius_discrepancy(G, H, fusion, trials=20, seed=5) < 1e-12


def test_hom_report_checks_inputs():
    G = groups.load_group("cyclic_3")
    with pytest.raises(ValueError):
        groups.verify_g_sod_projective(G, [2, 0, 0], 3)
    with pytest.raises(ValueError):
        groups.verify_g_sod_projective(G, [3, 0, 0], 3, maxdeg=1)
    rep = groups.verify_g_sod_projective(G, [3, 0, 0], 3)
    assert rep.to_json()["hom0"]["1"] == [[1, 1, 1]] * 3
