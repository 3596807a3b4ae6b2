import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spreadforge.gf import GF
from spreadforge.projgeom import SymplecticForm
from spreadforge.spgraph import (CertificationError, EigenFunction, Graph, SrgParams, build_sp_graph,
                                 build_wd_eigenfunction, check_eigenfunction, from_graph6, sp_graph_params,
                                 srg_spectrum, to_graph6, verify_srg)
from spreadforge.spreads import quadrangle


@pytest.mark.parametrize("e,q,expected", [(2, 3, (40, 12, 2, 4)), (2, 5, (156, 30, 4, 6)),
                                          (2, 4, (85, 20, 3, 5)), (3, 3, (364, 120, 38, 40))])
def test_symplectic_graph_parameters(e, q, expected):
    g = build_sp_graph(e, q)
    assert verify_srg(g).astuple() == expected == tuple(sp_graph_params(e, q))


@pytest.mark.parametrize("e,q", [(2, 3), (2, 5), (2, 4), (3, 3)])
def test_spectrum_formula_matches_numerics(e, q):
    g = build_sp_graph(e, q)
    rep = srg_spectrum(verify_srg(g))
    assert (rep.r, rep.s) == (q ** (e - 1) - 1, -q ** (e - 1) - 1)
    ev = np.rint(np.linalg.eigvalsh(g.to_matrix().astype(float))).astype(int)
    vals, mult = np.unique(ev, return_counts=True)
    got = dict(zip(vals.tolist(), mult.tolist()))
    assert got == {rep.s: rep.m_s, rep.r: rep.m_r, g.degree(0): 1}


def test_srg_rejects_non_srg():
    with pytest.raises(CertificationError):
        verify_srg(Graph.from_networkx(nx.path_graph(5)))
    petersen = Graph.from_networkx(nx.petersen_graph())
    assert verify_srg(petersen).astuple() == (10, 3, 0, 1)


def test_srg_params_algebra():
    p = SrgParams(40, 12, 2, 4)
    assert p.feasible() and p.complement().astuple() == (40, 27, 18, 18)
    with pytest.raises(ValueError):
        srg_spectrum(SrgParams(5, 2, 0, 1))  # pentagon: irrational eigenvalues


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 40), st.floats(0.05, 0.95), st.integers(0, 2 ** 16))
def test_graph6_roundtrip(n, p, seed):
    g = Graph.from_networkx(nx.gnp_random_graph(n, p, seed=seed))
    h = from_graph6(to_graph6(g))
    assert h.n == g.n and h.adj == g.adj


def test_graph6_matches_networkx():
    g = build_sp_graph(2, 3)
    ref = nx.to_graph6_bytes(g.to_networkx(), header=False).decode().strip()
    assert to_graph6(g) == ref


def test_graph_basic_operations():
    g = Graph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    assert g.complement().complement().adj == g.adj
    assert sorted(g.edges()) == [(0, 1), (1, 2), (2, 3)]
    assert g.common(0, 2) == 1
    h = g.relabel([3, 2, 1, 0])
    assert h.has_edge(3, 2) and not h.has_edge(0, 3)


def test_custom_form_gives_isomorphic_graph():
    F = GF(3)
    std = SymplecticForm.standard(2, F)
    # a different symplectic Gram matrix: swap coordinate blocks
    gram = [[0, 0, 1, 0], [0, 0, 0, 1], [F.neg(1), 0, 0, 0], [0, F.neg(1), 0, 0]]
    g1 = build_sp_graph(2, F, std)
    g2 = build_sp_graph(2, F, SymplecticForm(gram, F))
    assert verify_srg(g1) == verify_srg(g2)


@pytest.mark.parametrize("q", [3, 4, 5, 7])
def test_wd_eigenfunctions(q, rng):
    W = quadrangle(q)
    g = W.graph
    picks = range(len(W.pairs)) if q == 3 else rng.choice(len(W.pairs), 12, replace=False)
    for u in picks:
        p = W.pairs[int(u)]
        f = build_wd_eigenfunction(g, p.points_a, p.points_b)
        assert f.theta == -(q + 1)
        assert len(f.support) == 2 * (q + 1)
        assert check_eigenfunction(g, f)


def test_eigenfunction_negative_controls():
    W = quadrangle(3)
    g = W.graph
    iso = W.line_points[W.w_lines[0]]
    other = [x for x in range(g.n) if x not in iso][:4]
    with pytest.raises(ValueError):
        build_wd_eigenfunction(g, iso, other)
    vals = [0] * g.n
    vals[0], vals[1] = 1, -1
    assert not check_eigenfunction(g, EigenFunction(vals, -4))
