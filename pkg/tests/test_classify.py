import itertools
import numpy as np
import pytest

from conftest import all_spreads, census, spread_classes
from spreadforge.classify import (ClassificationError, characteristic, characteristic_of_spread, equivalent,
                                  expected_group_order, group_generators, hyperbolic_model, orbit_and_stabilizer,
                                  orbitals, pair_geometry, random_group_element, relation_block_sizes,
                                  relation_names, spreads_through_pair, total_spreads, x_of_U)
from spreadforge.exactcover import enumerate_special_spreads
from spreadforge.spreads import SpecialSpread, quadrangle


@pytest.mark.parametrize("q", [3, 5, 7])
def test_hyperbolic_point_model_size(q):
    M = hyperbolic_model(q)
    assert M.num_points == len(quadrangle(q).pairs) == q * q * (q * q + 1) // 2
    assert sorted(M.point_of_pair) == list(range(M.num_points))


@pytest.mark.parametrize("q", [3, 5, 7])
def test_two_routes_to_the_hyperbolic_point(q):
    M = hyperbolic_model(q)
    for u in range(0, len(M.W.pairs), 7):
        assert M.P4.point_id(M.projection_of_pair(u)) == M.points[M.point_of_pair[u]]


@pytest.mark.parametrize("q", [3, 5, 7])
def test_relation_block_sizes(q):
    M = hyperbolic_model(q)
    rel = M.relation_table
    names = relation_names(q)
    expected = relation_block_sizes(q)
    for x in range(M.num_points):
        counts = np.bincount(rel[x], minlength=len(names) + 1)
        assert counts[0] == 1
        assert {n: int(c) for n, c in zip(names, counts[1:])} == expected
    assert sum(expected.values()) == M.num_points - 1


def test_block_size_values():
    assert relation_block_sizes(3) == {"tangent": 32, "external-perp": 12}
    assert relation_block_sizes(5) == {"tangent": 144, "secant-perp": 60, "external": 120}
    assert relation_block_sizes(7) == {"tangent": 384, "secant": 336, "external-perp": 168,
                                       "external-nonperp": 336}


@pytest.mark.parametrize("q", [3, 5])
def test_common_perp_size_separates_secant_from_external(q):
    M = hyperbolic_model(q)
    perps = [M.perp_set(x) for x in range(M.num_points)]
    for x, y in itertools.combinations(range(M.num_points), 2):
        kind = M.classify_pair(x, y)
        if kind == "tangent":
            continue
        size = len(perps[x] & perps[y])
        assert size == (q * (q + 1) // 2 if kind.startswith("secant") else q * (q - 1) // 2)


@pytest.mark.parametrize("q", [3, 5])
def test_common_isotropic_line_dichotomy(q):
    """Two elements of U_q share q+1 or 2q+1 isotropic lines; 2q+1 exactly for tangent pairs."""
    G = pair_geometry(q)
    W = quadrangle(q)
    M = hyperbolic_model(q)
    pairs = range(len(W.pairs)) if q == 3 else range(0, len(W.pairs), 5)
    for u1, u2 in itertools.combinations(pairs, 2):
        common = G.isotropic_lines(u1) & G.isotropic_lines(u2)
        c = common.bit_count()
        assert c in (q + 1, 2 * q + 1)
        tangent = M.classify_pair(x_of_U(q, u1), x_of_U(q, u2)) == "tangent"
        assert tangent == (c == 2 * q + 1)
        if c == q + 1:
            lines = [l for l in range(len(W.lines)) if common >> l & 1]
            for a, b in itertools.combinations(lines, 2):
                assert set(W.line_points[a]).isdisjoint(W.line_points[b])


@pytest.mark.parametrize("q", [3, 5])
def test_relation_routes_agree_pairwise(q):
    G = pair_geometry(q)
    M = hyperbolic_model(q)
    n = len(quadrangle(q).pairs)
    pairs = itertools.combinations(range(n), 2) if q == 3 else ((0, u) for u in range(1, n))
    for u1, u2 in pairs:
        assert G.relation(u1, u2) == M.classify_pair(x_of_U(q, u1), x_of_U(q, u2))


@pytest.mark.parametrize("q", [3, 5, 7])
def test_group_order(q):
    assert group_generators(q).order == expected_group_order(q)


def test_group_order_values():
    assert [expected_group_order(q) for q in (3, 5, 7)] == [51840, 9_360_000, 276_595_200]


@pytest.mark.parametrize("q", [3, 5, 7])
def test_orbitals_are_the_relations(q):
    M = hyperbolic_model(q)
    x0 = x_of_U(q, 0)
    labels = [{M.classify_pair(x0, x_of_U(q, u)) for u in orb} for orb in orbitals(q, 0)]
    assert all(len(s) == 1 for s in labels)
    assert sorted(s.pop() for s in labels) == sorted(relation_names(q))


@pytest.mark.parametrize("q", [3, 5])
def test_relations_are_group_invariant(q, rng):
    G = group_generators(q)
    rel = hyperbolic_model(q).relation_table
    for _ in range(100):
        g = random_group_element(G, rng, on="hyperbolic")
        assert np.array_equal(rel[np.ix_(g, g)], rel)


def test_characteristic_of_five_points():
    sol = all_spreads(3)[0]
    M = hyperbolic_model(3)
    assert characteristic(3, [M.point_of_pair[u] for u in sol]) == [0, 10]


@pytest.mark.parametrize("q", [3, 5])
def test_characteristic_is_a_class_invariant(q, rng):
    G = group_generators(q)
    perms = G.pair_perms()
    for c in spread_classes(q):
        s = SpecialSpread.from_pairs(q, c["representative"])
        g = random_group_element(G, rng)
        img = SpecialSpread.from_pairs(q, [int(g[u]) for u in s.pair_indices])
        assert characteristic_of_spread(img) == c["characteristic"]
        assert equivalent(s, img, G)
    assert len(perms) == len(G.matrices)


def test_classes_q3():
    (c,) = spread_classes(3)
    assert (c["orbit_size"], c["stabilizer_order"], c["found"]) == (27, 1920, 27)
    assert c["characteristic"] == [0, 10]


def test_classes_q5():
    rows = sorted((c["stabilizer_order"], c["orbit_size"], c["characteristic"]) for c in spread_classes(5))
    assert rows == [(1152, 8125, [0, 30, 48]), (1440, 6500, [0, 45, 33])]
    assert sum(c["found"] for c in spread_classes(5)) == 14625


def test_orbit_counting_identities_q5():
    rows = [(c["stabilizer_order"], c["characteristic"]) for c in spread_classes(5)]
    assert total_spreads(5, rows) == 14625
    through = spreads_through_pair(5, rows)
    assert through["tangent"] == 0
    counts = census(5)
    for rel, n in zip(counts["relations"], counts["counts"]):
        assert through[rel] == n


def test_identity_rejects_non_integral_rows():
    with pytest.raises(ClassificationError):
        spreads_through_pair(5, [(1441, [0, 45, 33])])
    with pytest.raises(ClassificationError):
        total_spreads(5, [(7, [0, 45, 33])])


def test_distinct_classes_are_not_equivalent():
    a, b = (SpecialSpread.from_pairs(5, c["representative"]) for c in spread_classes(5))
    assert not equivalent(a, b)


def test_q7_orbit_of_one_class():
    """Direct orbit computation agrees with the stabilizer order derived from fixed-pair counts."""
    target = [0, 84, 128, 88]
    c7 = census(7)
    j = c7["relations"].index("secant")
    (sols,) = enumerate_special_spreads(7, "fix_pair", reps=[c7["reps"][j]])
    M = hyperbolic_model(7)
    hits = [sol for sol in sols if characteristic(7, [M.point_of_pair[u] for u in sol]) == target]
    assert len(hits) == c7["by_rep"][tuple(target)][j] == 21
    rep = orbit_and_stabilizer(SpecialSpread.from_pairs(7, hits[0]), group_generators(7))
    assert rep.stabilizer_order == 5376
    assert rep.orbit_size == expected_group_order(7) // 5376
