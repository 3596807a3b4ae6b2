"""Acceptance criteria, one group of tests per criterion.

A summary line per criterion is printed at the end of the pytest run.
"""

import itertools
import time

import numpy as np
import pytest

from conftest import all_spreads, census, class_spread, spread_classes
from spreadforge.canon import canonical_form
from spreadforge.classify import (characteristic_of_spread, expected_group_order, hyperbolic_model,
                                  relation_block_sizes, relation_names, stabilizers_from_census, total_spreads,
                                  x_of_U, pair_geometry)
from spreadforge.ddg import (VertexPartition, default_balanced_assignment, enumerate_theorem2_graphs,
                             partial_complement, reconstruct, theorem1_graph, theorem2_graph, theorem3_graph,
                             theorem4_graph, verify_ddg)
from spreadforge.gf import GF, check_field_axioms
from spreadforge.projgeom import (SymplecticForm, klein_form, klein_inverse, klein_map, perp, quadric_count,
                                  quadric_points, space)
from spreadforge.spgraph import build_sp_graph, build_wd_eigenfunction, check_eigenfunction, srg_spectrum, verify_srg
from spreadforge.spreads import (SpecialSpread, build_symplectic_spread, construct_special_spread, quadrangle,
                                 verify_special_spread)

TABLE_Q7 = {
    384: [[0, 156, 96, 48]], 720: [[0, 45, 90, 165]], 288: [[0, 57, 48, 195]],
    512: [[0, 72, 108, 120], [0, 128, 116, 56]], 1920: [[0, 120, 140, 40]], 5376: [[0, 84, 128, 88]],
    96: [[0, 141, 62, 97]], 128: [[0, 132, 72, 96], [0, 128, 36, 136]], 160: [[0, 60, 100, 140]],
    2304: [[0, 96, 132, 72]], 100: [[0, 150, 50, 100]], 240: [[0, 120, 60, 120]],
}


def _elapsed(t0):
    return time.perf_counter() - t0


# -- 1 ---------------------------------------------------------------------------------

@pytest.mark.criterion(1, "SRG certification of Sp(4,3), Sp(4,5), Sp(4,7), Sp(6,3)")
def test_criterion_1_symplectic_graphs():
    t0 = time.perf_counter()
    cases = {(2, 3): (40, 12, 2, 4), (2, 5): (156, 30, 4, 6), (2, 7): (400, 56, 6, 8), (3, 3): (364, 120, 38, 40)}
    for (e, q), expected in cases.items():
        p = verify_srg(build_sp_graph(e, q))
        assert p.astuple() == expected
        spectrum = srg_spectrum(p)
        assert (spectrum.r, spectrum.s) == (q ** (e - 1) - 1, -q ** (e - 1) - 1)
    assert _elapsed(t0) < 10


# -- 2 ---------------------------------------------------------------------------------

@pytest.mark.criterion(2, "special spreads exist for q = 3, 5, 7 by construction")
def test_criterion_2_construction():
    t0 = time.perf_counter()
    for q in (3, 5, 7):
        s, _ = construct_special_spread(q)
        assert verify_special_spread(s)["valid"]
        assert len(s.lines) == q * q + 1
    assert _elapsed(t0) < 30


# -- 3 ---------------------------------------------------------------------------------

@pytest.mark.criterion(3, "census: 27 / 1 class, 14625 / 2 classes, 14 classes for q = 7")
def test_criterion_3_q3_and_q5():
    t0 = time.perf_counter()
    for q, n, k in [(3, 27, 1), (5, 14625, 2)]:
        assert len(all_spreads(q)) == n
        classes = spread_classes(q)
        assert len(classes) == k
        assert sum(c["found"] for c in classes) == n
        assert total_spreads(q, [(c["stabilizer_order"], c["characteristic"]) for c in classes]) == n
    assert _elapsed(t0) < 300


@pytest.mark.criterion(3, "census: 27 / 1 class, 14625 / 2 classes, 14 classes for q = 7")
def test_criterion_3_q7_fix_pair():
    c = census(7)
    assert len(c["characteristics"]) == 14
    assert sorted(c["relations"]) == sorted(relation_names(7)[1:])
    # every spread through a fixed pair is counted once per representative
    assert sum(c["characteristics"].values()) == sum(c["counts"])
    stabs = stabilizers_from_census(7, c)
    rows = [(h, list(ch)) for ch, h in stabs.items()]
    assert total_spreads(7, rows) == sum(expected_group_order(7) // h for h, _ in rows)


# -- 4 ---------------------------------------------------------------------------------

@pytest.mark.criterion(4, "stabilizer orders 1920 (q = 3), 1152 and 1440 (q = 5)")
def test_criterion_4_stabilizers():
    assert [c["stabilizer_order"] for c in spread_classes(3)] == [1920]
    assert sorted(c["stabilizer_order"] for c in spread_classes(5)) == [1152, 1440]
    for q in (3, 5):
        for c in spread_classes(q):
            assert c["orbit_size"] * c["stabilizer_order"] == expected_group_order(q)


# -- 5 ---------------------------------------------------------------------------------

def _class_rows(q):
    out = set()
    for c in spread_classes(q):
        s = class_spread(q, c["stabilizer_order"])
        ch = characteristic_of_spread(s)  # raises if the two routes disagree
        assert ch == c["characteristic"]
        out.add((c["stabilizer_order"], tuple(ch)))
    return out


@pytest.mark.criterion(5, "characteristics [0,10]; [0,48,30], [0,33,45]; the 14 q = 7 tuples")
def test_criterion_5_q3():
    assert _class_rows(3) == {(1920, (0, 10))}


@pytest.mark.criterion(5, "characteristics [0,10]; [0,48,30], [0,33,45]; the 14 q = 7 tuples")
def test_criterion_5_q5_target_tuples():
    assert _class_rows(5) == {(1152, (0, 48, 30)), (1440, (0, 33, 45))}


@pytest.mark.criterion(5, "characteristics [0,10]; [0,48,30], [0,33,45]; the 14 q = 7 tuples")
def test_criterion_5_q5_as_multisets():
    rows = _class_rows(5)
    assert {(h, tuple(sorted(ch))) for h, ch in rows} == {(1152, (0, 30, 48)), (1440, (0, 33, 45))}


@pytest.mark.criterion(5, "characteristics [0,10]; [0,48,30], [0,33,45]; the 14 q = 7 tuples")
def test_criterion_5_q7():
    c = census(7)
    stabs = stabilizers_from_census(7, c)
    got = {}
    for ch, h in stabs.items():
        got.setdefault(h, []).append(list(ch))
    assert {h: sorted(v) for h, v in got.items()} == {h: sorted(v) for h, v in TABLE_Q7.items()}


# -- 6 ---------------------------------------------------------------------------------

@pytest.mark.criterion(6, "divisible design graph tuples for the four families")
def test_criterion_6_ddg_tuples():
    t0 = time.perf_counter()
    s3, _ = construct_special_spread(3)
    s5, _ = construct_special_spread(5)
    assert verify_ddg(*theorem1_graph(3, s3)).astuple() == (40, 31, 22, 24, 10, 4)
    assert verify_ddg(*theorem1_graph(5, s5)).astuple() == (156, 131, 106, 110, 26, 6)
    assert verify_ddg(*theorem2_graph(3, s3, [0, 1, 1, 0, 1])).astuple() == (40, 23, 14, 12, 2, 20)
    r = build_symplectic_spread(2, 3)
    assert verify_ddg(*theorem3_graph(2, 3, r)).astuple() == (40, 9, 0, 2, 10, 4)
    assert verify_ddg(*theorem4_graph(2, 3, r, default_balanced_assignment(10))).astuple() == (40, 17, 8, 6, 2, 20)
    assert _elapsed(t0) < 60


# -- 7 ---------------------------------------------------------------------------------

@pytest.mark.criterion(7, "second-family isomorph counts: 1 for q = 3; 12 + 16 with union 26 for q = 5")
def test_criterion_7_isomorphs():
    t0 = time.perf_counter()
    (c3,) = spread_classes(3)
    assert enumerate_theorem2_graphs(3, class_spread(3, c3["stabilizer_order"]))["classes"] == 1
    forms = {}
    for c in spread_classes(5):
        res = enumerate_theorem2_graphs(5, class_spread(5, c["stabilizer_order"]))
        forms[c["stabilizer_order"]] = set(res["forms"])
    assert sorted(len(f) for f in forms.values()) == [12, 16]
    assert len(forms[1152] | forms[1440]) == 26
    assert _elapsed(t0) < 1800


# -- 8 ---------------------------------------------------------------------------------

@pytest.mark.criterion(8, "tight eigenfunctions with theta = -(q+1) and support 2(q+1)")
@pytest.mark.parametrize("q", [3, 4, 5, 7])
def test_criterion_8_wd_tightness(q):
    W = quadrangle(q)
    spectrum = srg_spectrum(verify_srg(W.graph))
    for p in W.pairs:
        f = build_wd_eigenfunction(W.graph, p.points_a, p.points_b)
        assert f.theta == -(q + 1) == spectrum.s
        assert len(f.support) == 2 * (q + 1) == -2 * spectrum.s
        assert set(f.values[v] for v in f.support) == {1, -1}
        assert check_eigenfunction(W.graph, f)


# -- 9 ---------------------------------------------------------------------------------

def _reconstructs(q, s):
    W = quadrangle(q)
    g, _ = theorem1_graph(q, s)
    out = reconstruct(g.complement(), q)
    iso = sorted(sum(1 << x for x in W.line_points[l]) for l in W.w_lines)
    spread = sorted(sum(1 << x for x in W.line_points[l]) for l in s.lines)
    return out["symplectic_lines"] == iso and out["hyperbolic_lines"] == spread


@pytest.mark.criterion(9, "reconstruction from the first-family graph; non-isomorphism for q = 5")
def test_criterion_9_reconstruction():
    assert all(_reconstructs(3, SpecialSpread.from_pairs(3, sol)) for sol in all_spreads(3))
    assert _reconstructs(5, class_spread(5, 1152))


@pytest.mark.criterion(9, "reconstruction from the first-family graph; non-isomorphism for q = 5")
def test_criterion_9_non_isomorphic():
    g1, _ = theorem1_graph(5, class_spread(5, 1152))
    g2, _ = theorem1_graph(5, class_spread(5, 1440))
    c1, c2 = canonical_form(g1), canonical_form(g2)
    assert c1 != c2
    # the certificate is label invariant
    perm = [int(x) for x in np.random.default_rng(7).permutation(g1.n)]
    assert canonical_form(g1.relabel(perm)) == c1


# -- 10 --------------------------------------------------------------------------------

@pytest.mark.criterion(10, "property suites")
def test_criterion_10_properties():
    t0 = time.perf_counter()
    for q in (2, 3, 4, 5, 7, 8, 9):
        assert check_field_axioms(GF(q))["triples_checked"] == q ** 3
    for q in (3, 5):
        F = GF(q)
        P = space(3, F)
        form = SymplecticForm.standard(2, F)
        for r in (1, 2, 3):
            for sub in P.subspaces(r):
                assert perp(perp(sub, form), form) == sub
        Q = klein_form(F)
        assert len(quadric_points(space(5, F), Q)) == quadric_count(5, q, "Hyperbolic")
        images = set()
        for l in P.lines():
            img = klein_map(l, F)
            assert klein_inverse(img, F) == l
            images.add(img)
        assert len(images) == len(P.lines())
    for q in (3, 5):
        W = quadrangle(q)
        for p in W.pairs:
            ma = sum(1 << x for x in p.points_a)
            mb = sum(1 << x for x in p.points_b)
            for x in range(W.n):
                if not (ma | mb) >> x & 1:
                    assert (W.graph.adj[x] & ma).bit_count() == (W.graph.adj[x] & mb).bit_count() == 1
    for q in (3, 5, 7):
        M = hyperbolic_model(q)
        names = relation_names(q)
        blocks = relation_block_sizes(q)
        counts = np.apply_along_axis(np.bincount, 1, M.relation_table, minlength=len(names) + 1)
        assert (counts[:, 1:] == np.array([blocks[n] for n in names])).all()
    G = pair_geometry(3)
    for u1, u2 in itertools.combinations(range(45), 2):
        c = (G.isotropic_lines(u1) & G.isotropic_lines(u2)).bit_count()
        tangent = hyperbolic_model(3).classify_pair(x_of_U(3, u1), x_of_U(3, u2)) == "tangent"
        assert c == (7 if tangent else 4)
    g = build_sp_graph(2, 3)
    rng = np.random.default_rng(11)
    for _ in range(20):
        part = VertexPartition(list(np.unique(rng.integers(0, 3, 40), return_inverse=True)[1]))
        assert partial_complement(partial_complement(g, part), part).adj == g.adj
    assert _elapsed(t0) < 120
