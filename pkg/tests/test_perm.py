import itertools
import math

import networkx as nx
import numpy as np
import pytest

from spreadforge.perm import StabilizerChain, compose, identity, inverse, is_identity, orbits, random_element


def _cycle(n, *cyc):
    p = list(range(n))
    for c in cyc:
        for a, b in zip(c, c[1:] + c[:1]):
            p[a] = b
    return np.array(p)


@pytest.mark.parametrize("n", [2, 3, 5, 7])
def test_symmetric_group_order(n):
    gens = [_cycle(n, (0, 1)), _cycle(n, tuple(range(n)))]
    assert StabilizerChain(gens, n).order == math.factorial(n)


@pytest.mark.parametrize("n", [4, 5, 6])
def test_alternating_group_order(n):
    gens = [_cycle(n, (i, i + 1, i + 2)) for i in range(n - 2)]
    ch = StabilizerChain(gens, n)
    assert ch.order == math.factorial(n) // 2
    assert ch.contains(_cycle(n, (0, 1, 2)))
    assert not ch.contains(_cycle(n, (0, 1)))


def test_petersen_automorphisms():
    g = nx.petersen_graph()
    gm = nx.algorithms.isomorphism.GraphMatcher(g, g)
    autos = [np.array([m[i] for i in range(10)]) for m in gm.isomorphisms_iter()]
    assert len(autos) == 120
    assert StabilizerChain(autos[::7], 10).order == 120


def test_dihedral_orbits_and_order():
    n = 8
    r = _cycle(n, tuple(range(n)))
    s = np.array([(-i) % n for i in range(n)])
    ch = StabilizerChain([r, s], n)
    assert ch.order == 16
    assert orbits([_cycle(n, (0, 2, 4, 6))], n) == [[0, 2, 4, 6], [1], [3], [5], [7]]


def test_group_operations(rng):
    gens = [_cycle(6, (0, 1)), _cycle(6, tuple(range(6)))]
    g = random_element(gens, rng)
    assert is_identity(compose(g, inverse(g)))
    assert is_identity(identity(6))
    assert StabilizerChain(gens, 6).contains(g)
