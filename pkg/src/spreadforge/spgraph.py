"""Symplectic graphs Sp(2e, q), exact SRG certification and eigenfunctions.

Graphs use one Python int per vertex as an adjacency bitset, so common
neighbour counts are ``(adj[u] & adj[v]).bit_count()``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .gf import GF, Field
from .projgeom import SymplecticForm, space


class CertificationError(AssertionError):
    """A structural check failed; ``witness`` names the offending vertices."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


def bits_from_bool(row) -> int:
    packed = np.packbits(np.asarray(row, dtype=bool), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def iter_bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


class Graph:
    """Simple undirected graph on vertices 0..n-1 with bitset rows."""

    def __init__(self, n: int, adj: list[int], labels=None):
        self.n = n
        self.adj = list(adj)
        self.labels = list(range(n)) if labels is None else list(labels)

    @classmethod
    def from_matrix(cls, m, labels=None) -> "Graph":
        m = np.asarray(m, dtype=bool)
        if (m != m.T).any() or m.diagonal().any():
            raise CertificationError("adjacency matrix must be symmetric with zero diagonal")
        return cls(len(m), [bits_from_bool(r) for r in m], labels)

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        adj = [0] * n
        for u, v in edges:
            if u == v:
                raise CertificationError("loops are not allowed", (u, v))
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        return cls(n, adj)

    def to_matrix(self) -> np.ndarray:
        m = np.zeros((self.n, self.n), dtype=bool)
        for u, row in enumerate(self.adj):
            for v in iter_bits(row):
                m[u, v] = True
        return m

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u] >> v & 1)

    def degree(self, v: int) -> int:
        return self.adj[v].bit_count()

    def neighbors(self, v: int) -> list[int]:
        return list(iter_bits(self.adj[v]))

    def edges(self):
        for u, row in enumerate(self.adj):
            for v in iter_bits(row >> (u + 1) << (u + 1)):
                yield u, v

    def common(self, u: int, v: int) -> int:
        return (self.adj[u] & self.adj[v]).bit_count()

    def complement(self) -> "Graph":
        full = (1 << self.n) - 1
        return Graph(self.n, [full & ~row & ~(1 << v) for v, row in enumerate(self.adj)], self.labels)

    def relabel(self, perm) -> "Graph":
        """Graph whose vertex perm[v] plays the role of v."""
        adj = [0] * self.n
        for u, row in enumerate(self.adj):
            pu = perm[u]
            acc = 0
            for v in iter_bits(row):
                acc |= 1 << perm[v]
            adj[pu] = acc
        return Graph(self.n, adj)

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and self.adj == other.adj

    def __hash__(self):
        return hash((self.n, tuple(self.adj)))

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges())
        return g

    @classmethod
    def from_networkx(cls, g: nx.Graph) -> "Graph":
        nodes = sorted(g.nodes())
        pos = {v: i for i, v in enumerate(nodes)}
        return cls.from_edges(len(nodes), ((pos[u], pos[v]) for u, v in g.edges()))


def to_graph6(g: Graph) -> str:
    return nx.to_graph6_bytes(g.to_networkx(), header=False).decode().strip()


def from_graph6(s: str) -> Graph:
    return Graph.from_networkx(nx.from_graph6_bytes(s.strip().encode()))


# -- construction -------------------------------------------------------------------

def sp_graph_params(e: int, q: int) -> tuple[int, int, int, int]:
    v = (q ** (2 * e) - 1) // (q - 1)
    k = q * (q ** (2 * e - 2) - 1) // (q - 1)
    lam = q * q * (q ** (2 * e - 4) - 1) // (q - 1) + q - 1
    return v, k, lam, k // q


def build_sp_graph(e: int, q_or_field, form: SymplecticForm | None = None) -> Graph:
    """Sp(2e, q): points of PG(2e-1, q), adjacent when orthogonal."""
    if e < 2:
        raise ValueError("e must be >= 2")
    F = q_or_field if isinstance(q_or_field, Field) else GF(q_or_field)
    P = space(2 * e - 1, F)
    form = form or SymplecticForm.standard(e, F)
    pts = P.points
    gp = F.matmul(pts, np.array(form.gram, dtype=np.int64).T)
    vals = F.matmul(pts, gp.T)
    m = vals == 0
    np.fill_diagonal(m, False)
    return Graph.from_matrix(m)


# -- SRG certification --------------------------------------------------------------

@dataclass(frozen=True)
class SrgParams:
    v: int
    k: int
    lam: int
    mu: int

    def feasible(self) -> bool:
        return self.k * (self.k - self.lam - 1) == (self.v - self.k - 1) * self.mu

    def complement(self) -> "SrgParams":
        v, k, lam, mu = self.v, self.k, self.lam, self.mu
        return SrgParams(v, v - k - 1, v - 2 * k + mu - 2, v + lam - 2 * k)

    def astuple(self):
        return (self.v, self.k, self.lam, self.mu)


def regular_degree(g: Graph) -> int:
    k = g.degree(0) if g.n else 0
    for v in range(g.n):
        if g.degree(v) != k:
            raise CertificationError(f"vertex {v} has degree {g.degree(v)}, vertex 0 has {k}", (0, v))
    return k


def verify_srg(g: Graph) -> SrgParams:
    """Brute-force common-neighbour audit over all vertex pairs."""
    k = regular_degree(g)
    lam = mu = None
    first = {}
    for u in range(g.n):
        au = g.adj[u]
        for v in range(u + 1, g.n):
            c = (au & g.adj[v]).bit_count()
            adjacent = au >> v & 1
            if adjacent:
                if lam is None:
                    lam, first[1] = c, (u, v)
                elif c != lam:
                    raise CertificationError(
                        f"adjacent pairs {first[1]} and {(u, v)} have {lam} and {c} common neighbours",
                        (first[1], (u, v)))
            else:
                if mu is None:
                    mu, first[0] = c, (u, v)
                elif c != mu:
                    raise CertificationError(
                        f"non-adjacent pairs {first[0]} and {(u, v)} have {mu} and {c} common neighbours",
                        (first[0], (u, v)))
    return SrgParams(g.n, k, lam if lam is not None else 0, mu if mu is not None else 0)


@dataclass(frozen=True)
class SpectrumReport:
    r: int
    s: int
    delta: int
    m_r: int
    m_s: int
    modified_matrix: tuple

    def to_json(self) -> dict:
        return {"r": self.r, "s": self.s, "delta": self.delta, "m_r": self.m_r, "m_s": self.m_s,
                "modified_matrix": [list(row) for row in self.modified_matrix]}


def srg_spectrum(p: SrgParams) -> SpectrumReport:
    """Eigenvalues and multiplicities of a primitive SRG with integral spectrum."""
    v, k, lam, mu = p.astuple()
    if mu == 0 or mu == k:
        raise ValueError(f"{p.astuple()} is imprimitive")
    d2 = (lam - mu) ** 2 + 4 * (k - mu)
    delta = math.isqrt(d2)
    if delta * delta != d2:
        raise ValueError(f"irrational eigenvalues: Delta^2 = {d2}")
    r2, s2 = lam - mu + delta, lam - mu - delta
    if r2 % 2 or s2 % 2:
        raise ValueError("non-integral eigenvalues")
    r, s = r2 // 2, s2 // 2
    num_r, num_s = -((v - 1) * s + k), (v - 1) * r + k
    if num_r % (r - s) or num_s % (r - s):
        raise ValueError("non-integral multiplicities")
    m_r, m_s = num_r // (r - s), num_s // (r - s)
    if 1 + m_r + m_s != v or k + m_r * r + m_s * s != 0:
        raise ValueError("trace identities fail")
    table = ((1, k, v - 1 - k), (m_r, r, -1 - r), (m_s, s, -1 - s))
    return SpectrumReport(r, s, delta, m_r, m_s, table)


# -- eigenfunctions -----------------------------------------------------------------

@dataclass
class EigenFunction:
    values: list
    theta: int
    support: list = field(init=False)

    def __post_init__(self):
        self.support = [i for i, x in enumerate(self.values) if x]


def check_eigenfunction(g: Graph, f: EigenFunction) -> bool:
    """theta * f(u) == sum of f over the neighbours of u, for every u."""
    vals = list(f.values)
    if len(vals) != g.n:
        raise ValueError("function length does not match the graph")
    if not any(vals):
        raise ValueError("the zero function is not an eigenfunction")
    for u in range(g.n):
        if sum(vals[w] for w in iter_bits(g.adj[u])) != f.theta * vals[u]:
            return False
    return True


def build_wd_eigenfunction(g: Graph, side_a, side_b) -> EigenFunction:
    """+1 on one line of an orthogonal hyperbolic pair, -1 on the other.

    side_a and side_b are the vertex sets of the two lines; they must be
    disjoint cocliques with every cross pair adjacent.
    """
    a, b = list(side_a), list(side_b)
    if len(a) != len(b) or set(a) & set(b):
        raise ValueError("the two sides must be disjoint and of equal size")
    for x in a:
        for y in b:
            if not g.has_edge(x, y):
                raise ValueError(f"pair is not orthogonal: {x} and {y} are not adjacent")
    for side in (a, b):
        for i, x in enumerate(side):
            for y in side[i + 1:]:
                if g.has_edge(x, y):
                    raise ValueError(f"{x} and {y} on the same side are adjacent")
    vals = [0] * g.n
    for x in a:
        vals[x] = 1
    for y in b:
        vals[y] = -1
    return EigenFunction(vals, -len(a))
