"""Divisible design graphs from special and symplectic spreads.

Four families: the complement of Sp(4,q) with the K_{q+1,q+1} edges of a
special spread removed; Sp(4,q) with its two halves complemented; Sp(2e,q)
with the spread cliques removed; and Sp(2e,q) with two unions of spread
cliques complemented.  Certification is an exhaustive common-neighbour
audit.  The module also reconstructs the geometry from the first family
and counts the second family up to isomorphism.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .canon import canonical_form
from .gf import GF
from .spgraph import CertificationError, Graph, build_sp_graph, iter_bits, regular_degree
from .spreads import SpecialSpread, SymplecticSpread, quadrangle, verify_special_spread, verify_symplectic_spread


@dataclass(frozen=True)
class DdgParams:
    v: int
    k: int
    lam1: int
    lam2: int
    m: int
    n: int

    @property
    def proper(self) -> bool:
        return self.m > 1 and self.n > 1 and self.lam1 != self.lam2

    def astuple(self):
        return (self.v, self.k, self.lam1, self.lam2, self.m, self.n)


class VertexPartition:
    """Class index per vertex."""

    def __init__(self, classes):
        self.classes = list(classes)
        ids = sorted(set(self.classes))
        if ids != list(range(len(ids))):
            raise ValueError("class ids must be 0..m-1")
        self.m = len(ids)
        self.members = [[] for _ in range(self.m)]
        for v, c in enumerate(self.classes):
            self.members[c].append(v)
        self.masks = [sum(1 << v for v in mem) for mem in self.members]

    @classmethod
    def from_blocks(cls, n: int, blocks) -> "VertexPartition":
        out = [-1] * n
        for i, b in enumerate(blocks):
            for v in b:
                if out[v] != -1:
                    raise ValueError(f"vertex {v} in two blocks")
                out[v] = i
        if -1 in out:
            raise ValueError(f"vertex {out.index(-1)} in no block")
        return cls(out)

    @property
    def sizes(self) -> list[int]:
        return [len(m) for m in self.members]


def partial_complement(g: Graph, part: VertexPartition) -> Graph:
    """Complement the edges between different classes; keep each class as is."""
    full = (1 << g.n) - 1
    adj = []
    for v, row in enumerate(g.adj):
        own = part.masks[part.classes[v]]
        adj.append((row & own) | (~row & full & ~own))
    return Graph(g.n, adj)


def complement_within(g: Graph, part: VertexPartition) -> Graph:
    """Complement each induced class subgraph; keep edges between classes."""
    adj = []
    for v, row in enumerate(g.adj):
        own = part.masks[part.classes[v]]
        adj.append((row & ~own) | (~row & own & ~(1 << v)))
    return Graph(g.n, adj)


# -- the four constructions ------------------------------------------------------

def _spread_partition(s: SpecialSpread) -> VertexPartition:
    W = quadrangle(s.q)
    return VertexPartition.from_blocks(W.n, [W.line_points[l] for l in s.lines])


def theorem1_graph(q: int, s: SpecialSpread, check: bool = True):
    """Complement of Sp(4,q) minus the edges of the K_{q+1,q+1} of each spread pair."""
    if check:
        try:
            verify_special_spread(s)
        except CertificationError as exc:
            raise ValueError(f"not a special spread: {exc}") from exc
    W = quadrangle(q)
    adj = list(W.graph.adj)
    for a, b in s.pairing:
        ma = sum(1 << x for x in W.line_points[a])
        mb = sum(1 << x for x in W.line_points[b])
        for x in W.line_points[a]:
            adj[x] &= ~mb
        for x in W.line_points[b]:
            adj[x] &= ~ma
    return Graph(W.n, adj).complement(), _spread_partition(s)


def side_partition(q: int, s: SpecialSpread, assignment) -> VertexPartition:
    """V1 gets the first line of pair i when assignment[i] is 0, the second otherwise."""
    W = quadrangle(q)
    pairs = list(s.pairing)
    if len(assignment) != len(pairs) or any(a not in (0, 1) for a in assignment):
        raise ValueError("assignment needs one bit per spread pair")
    cls = [0] * W.n
    for (a, b), bit in zip(pairs, assignment):
        first, second = (a, b) if bit == 0 else (b, a)
        for x in W.line_points[second]:
            cls[x] = 1
    return VertexPartition(cls)


def theorem2_graph(q: int, s: SpecialSpread, assignment, variant: str = "within"):
    """Sp(4,q) with the subgraphs on V1 and V2 complemented.

    variant "within" follows that description literally; "partial" is the
    partial complement of Sp(4,q) with respect to {V1, V2}.
    """
    W = quadrangle(q)
    part = side_partition(q, s, assignment)
    if variant == "within":
        return complement_within(W.graph, part), part
    if variant == "partial":
        return partial_complement(W.graph, part), part
    raise ValueError(f"unknown variant {variant!r}")


def _symplectic_partition(r: SymplecticSpread) -> VertexPartition:
    n = sum(len(m) for m in r.member_points)
    return VertexPartition.from_blocks(n, r.member_points)


def theorem3_graph(e: int, q: int, r: SymplecticSpread, check: bool = True):
    """Sp(2e,q) with the edges inside each spread clique removed."""
    g = build_sp_graph(e, GF(q))
    if check:
        try:
            verify_symplectic_spread(r, g)
        except CertificationError as exc:
            raise ValueError(f"not a symplectic spread: {exc}") from exc
    part = _symplectic_partition(r)
    adj = [row & ~part.masks[part.classes[v]] for v, row in enumerate(g.adj)]
    return Graph(g.n, adj), part


def balanced_clique_partition(r: SymplecticSpread, assignment) -> VertexPartition:
    if len(assignment) != len(r.member_points):
        raise ValueError("assignment needs one bit per spread member")
    if sum(assignment) * 2 != len(assignment):
        raise ValueError("each side must hold half of the spread members")
    n = sum(len(m) for m in r.member_points)
    cls = [0] * n
    for pts, bit in zip(r.member_points, assignment):
        for x in pts:
            cls[x] = bit
    return VertexPartition(cls)


def theorem4_graph(e: int, q: int, r: SymplecticSpread, assignment, variant: str = "within"):
    if q % 2 == 0:
        raise ValueError("q must be odd")
    g = build_sp_graph(e, GF(q))
    part = balanced_clique_partition(r, assignment)
    if variant == "within":
        return complement_within(g, part), part
    if variant == "partial":
        return partial_complement(g, part), part
    raise ValueError(f"unknown variant {variant!r}")


def default_balanced_assignment(count: int) -> list[int]:
    return [0] * (count // 2) + [1] * (count - count // 2)


# -- certification ---------------------------------------------------------------

def theorem1_params(q: int) -> tuple:
    return ((q * q + 1) * (q + 1), q ** 3 + q + 1, q ** 3 - q * q + q + 1, q ** 3 - q * q + 2 * q, q * q + 1, q + 1)


def theorem2_params(q: int) -> tuple:
    v = (q * q + 1) * (q + 1)
    return (v, (q ** 3 + q * q + 3 * q + 1) // 2, (q ** 3 - q * q + 3 * q + 1) // 2, q * q + q, 2, v // 2)


def theorem3_params(e: int, q: int) -> tuple:
    """Parameters with degree q^e (q^(e-1) - 1) / (q - 1)."""
    v = (q ** (2 * e) - 1) // (q - 1)
    return (v, q ** e * (q ** (e - 1) - 1) // (q - 1), q ** e * (q ** (e - 2) - 1) // (q - 1),
            (q ** (e - 1) - 1) ** 2 // (q - 1), q ** e + 1, (q ** e - 1) // (q - 1))


def theorem4_params(e: int, q: int) -> tuple:
    v = (q ** (2 * e) - 1) // (q - 1)
    h = v // 2
    return (v, h - q ** (e - 1), h - q ** (2 * e - 2) - q ** (e - 1), q ** (2 * e - 2) - q ** (e - 1), 2, h)


def verify_ddg(g: Graph, part: VertexPartition) -> DdgParams:
    """Exhaustive audit of degree and same-class / cross-class common neighbours."""
    sizes = part.sizes
    if len(set(sizes)) != 1:
        raise CertificationError(f"class sizes differ: {sorted(set(sizes))}", tuple(sizes))
    k = regular_degree(g)
    lam = {}
    cls = part.classes
    adj = g.adj
    for u in range(g.n):
        au = adj[u]
        cu = cls[u]
        for v in range(u + 1, g.n):
            c = (au & adj[v]).bit_count()
            same = cls[v] == cu
            if same not in lam:
                lam[same] = (c, (u, v))
            elif lam[same][0] != c:
                kind = "same-class" if same else "cross-class"
                raise CertificationError(
                    f"{kind} pairs {lam[same][1]} and {(u, v)} have {lam[same][0]} and {c} common neighbours",
                    (lam[same][1], (u, v), lam[same][0], c))
    lam1 = lam.get(True, (0,))[0]
    lam2 = lam.get(False, (0,))[0]
    return DdgParams(g.n, k, lam1, lam2, part.m, sizes[0])


@dataclass
class QuotientReport:
    matrix: list
    theta: int | None = None


def is_equitable(g: Graph, part: VertexPartition) -> QuotientReport:
    m = part.m
    q = [[None] * m for _ in range(m)]
    for v in range(g.n):
        i = part.classes[v]
        for j in range(m):
            c = (g.adj[v] & part.masks[j]).bit_count()
            if q[i][j] is None:
                q[i][j] = (c, v)
            elif q[i][j][0] != c:
                raise CertificationError(
                    f"vertices {q[i][j][1]} and {v} of class {i} have {q[i][j][0]} and {c} neighbours in class {j}",
                    (v, j, q[i][j][0], c))
    mat = [[c[0] for c in row] for row in q]
    theta = None
    if m == 2:
        # eigenvalues of the quotient are k and trace - k
        k = sum(mat[0])
        theta = mat[0][0] + mat[1][1] - k
    return QuotientReport(mat, theta)


# -- reconstruction ---------------------------------------------------------------

class ReconstructionError(RuntimeError):
    def __init__(self, stage: str, message: str, witness=None):
        super().__init__(f"{stage}: {message}")
        self.stage, self.witness = stage, witness


def _maximal_cliques(adj, vertices_mask: int) -> list[int]:
    """Bron-Kerbosch with pivoting on the subgraph induced by vertices_mask."""
    out = []

    def bk(r, p, x):
        if not p and not x:
            out.append(r)
            return
        pivot = next(iter_bits(p | x))
        for v in iter_bits(p & ~adj[pivot]):
            bk(r | (1 << v), p & adj[v], x & adj[v])
            p &= ~(1 << v)
            x |= 1 << v

    bk(0, vertices_mask, 0)
    return out


def _spread_classes(gbar: Graph, q: int) -> list[int]:
    """Classes of the divisible design: vertex pairs with lambda_1 common neighbours in the complement."""
    n = gbar.n
    full = (1 << n) - 1
    gam = [full & ~a & ~(1 << v) for v, a in enumerate(gbar.adj)]
    lam1 = theorem1_params(q)[2]
    cls_of = [-1] * n
    classes = []
    for u in range(n):
        if cls_of[u] >= 0:
            continue
        c = 1 << u
        for v in range(n):
            if v != u and (gam[u] & gam[v]).bit_count() == lam1:
                c |= 1 << v
        if c.bit_count() != q + 1:
            raise ReconstructionError("classes", f"vertex {u} has a class of size {c.bit_count()}", u)
        for v in iter_bits(c):
            if cls_of[v] >= 0:
                raise ReconstructionError("classes", f"classes through {v} overlap", v)
            cls_of[v] = len(classes)
        classes.append(c)
    return classes


def reconstruct(gbar: Graph, q: int) -> dict:
    """Recover the isotropic lines and the spread lines from the complement of a first-family graph.

    Removing the K_{q+1,q+1} edges also deletes edges inside each local
    graph of gbar (an isotropic line meeting a spread line meets its
    orthogonal partner too), so the design classes and their pairing are
    recovered first and the deleted edges restored.  The local graphs of
    the restored graph, taken on the gbar-neighbourhood of each vertex,
    are then q+1 cliques of size q-1.
    """
    n = gbar.n
    adj = gbar.adj
    classes = _spread_classes(gbar, q)
    cls_of = {}
    for i, c in enumerate(classes):
        for v in iter_bits(c):
            cls_of[v] = i
    partner = []
    for i, c in enumerate(classes):
        nb = 0
        for v in iter_bits(c):
            nb |= adj[v]
        silent = [j for j, d in enumerate(classes) if j != i and not (nb & d)]
        if len(silent) != 1:
            raise ReconstructionError("pairing", f"class {i} has {len(silent)} edge-free partner classes", i)
        partner.append(silent[0])
    if any(partner[partner[i]] != i for i in range(len(classes))):
        raise ReconstructionError("pairing", "partner map is not an involution")
    restored = list(adj)
    for i, c in enumerate(classes):
        for v in iter_bits(c):
            restored[v] |= classes[partner[i]]
    truncated = set()
    for y in range(n):
        cl = _maximal_cliques(restored, adj[y])
        sizes = sorted(c.bit_count() for c in cl)
        if sizes != [q - 1] * (q + 1):
            raise ReconstructionError("local cliques", f"vertex {y} has local cliques of sizes {sizes}", y)
        for c in cl:
            truncated.add(c | (1 << y))
    truncated = sorted(truncated)
    # |t1 & t2| == q - 1 merges truncated lines of the same isotropic line
    parent = list(range(len(truncated)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in itertools.combinations(range(len(truncated)), 2):
        if (truncated[i] & truncated[j]).bit_count() == q - 1:
            parent[find(i)] = find(j)
    groups = {}
    for i, t in enumerate(truncated):
        groups.setdefault(find(i), []).append(t)
    lines = []
    for grp in groups.values():
        union = 0
        for t in grp:
            union |= t
        if union.bit_count() != q + 1 or len(grp) != q + 1:
            raise ReconstructionError("merge", f"class of {len(grp)} truncated lines covers {union.bit_count()} points")
        lines.append(union)
    lines = sorted(set(lines))
    # T_u: vertices collinear with u in the recovered geometry but not adjacent in gbar
    collinear = [0] * n
    for l in lines:
        for x in iter_bits(l):
            collinear[x] |= l & ~(1 << x)
    hyper = set()
    for u in range(n):
        t = collinear[u] & ~adj[u]
        if t.bit_count() != q + 1:
            raise ReconstructionError("hyperbolic", f"vertex {u} has {t.bit_count()} missing neighbours", u)
        if t != classes[partner[cls_of[u]]]:
            raise ReconstructionError("hyperbolic", f"T_{u} differs from the partner of its design class", u)
        hyper.add(t)
    if hyper != set(classes):
        raise ReconstructionError("hyperbolic", "hyperbolic lines differ from the design classes")
    return {"symplectic_lines": sorted(lines), "hyperbolic_lines": sorted(hyper),
            "truncated_lines": len(truncated), "pairing": partner}


# -- isomorph counting ---------------------------------------------------------------

def _assignment_orbits(q: int, s: SpecialSpread, stab_point_perms) -> list[tuple]:
    """Representatives of side assignments up to the spread stabilizer and the global swap."""
    W = quadrangle(q)
    pairs = list(s.pairing)
    m = len(pairs)
    line_pos = {}
    for i, (a, b) in enumerate(pairs):
        line_pos[a] = (i, 0)
        line_pos[b] = (i, 1)
    # each stabilizer element permutes the 2m lines; express it as an action on bit vectors
    actions = []
    for g in stab_point_perms:
        act = []
        for i, (a, b) in enumerate(pairs):
            pts = W.line_points[a]
            img = W.line_through(int(g[pts[0]]), int(g[pts[1]]))
            act.append(line_pos[img])
        actions.append(act)

    def apply(bits, act):
        out = [0] * m
        for i, (j, side) in enumerate(act):
            # line "first of pair i" goes to line (j, side); pair i's V2 line is first iff bits[i]
            out[j] = bits[i] ^ side
        return tuple(out)

    def norm(bits):
        return bits if bits[0] == 0 else tuple(1 - b for b in bits)

    seen = set()
    reps = []
    for bits in itertools.product((0, 1), repeat=m - 1):
        start = (0,) + bits
        if start in seen:
            continue
        reps.append(start)
        stack = [start]
        seen.add(start)
        while stack:
            x = stack.pop()
            for act in actions:
                y = norm(apply(x, act))
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
    return reps


def spread_stabilizer_point_perms(s: SpecialSpread) -> list:
    """Generators of the stabilizer of s in the similitude group, acting on points of W(q)."""
    from .classify import group_generators
    from .perm import compose, inverse

    G = group_generators(s.q)
    pair_perms = [p.tolist() for p in G.pair_perms()]
    start = s.pair_mask

    def act(mask, perm):
        out = 0
        for i in iter_bits(mask):
            out |= 1 << perm[i]
        return out

    # BFS orbit recording a point-level transversal element for each orbit member
    trans = {start: np.arange(len(G.point_perms[0]))}
    queue = [start]
    W = quadrangle(s.q)
    lines = list(s.lines)
    line_idx = {l: i for i, l in enumerate(lines)}

    def line_action(h):
        return tuple(line_idx[W.line_through(int(h[W.line_points[l][0]]), int(h[W.line_points[l][1]]))]
                     for l in lines)

    gens, closure = [], {tuple(range(len(lines)))}
    while queue:
        x = queue.pop()
        tx = trans[x]
        for k, pp in enumerate(pair_perms):
            y = act(x, pp)
            ty = compose(tx, G.point_perms[k])
            if y not in trans:
                trans[y] = ty
                queue.append(y)
                continue
            h = compose(ty, inverse(trans[y]))
            a = line_action(h)
            if a in closure:
                continue
            gens.append(h)
            acts = [line_action(g) for g in gens]
            frontier = list(closure)
            while frontier:
                c = frontier.pop()
                for b in acts:
                    d = tuple(b[i] for i in c)
                    if d not in closure:
                        closure.add(d)
                        frontier.append(d)
    return gens


def enumerate_theorem2_graphs(q: int, s: SpecialSpread, use_stabilizer: bool = True) -> dict:
    """Isomorphism classes of second-family graphs over all side assignments of one spread."""
    m = len(s.pairing)
    if use_stabilizer:
        reps = _assignment_orbits(q, s, spread_stabilizer_point_perms(s))
    else:
        reps = [(0,) + b for b in itertools.product((0, 1), repeat=m - 1)]
    expected = theorem2_params(q)
    forms = {}
    for bits in reps:
        g, part = theorem2_graph(q, s, bits)
        p = verify_ddg(g, part)
        if p.astuple() != expected:
            raise CertificationError(f"assignment {bits} gives {p.astuple()}", bits)
        cf = canonical_form(g)
        forms.setdefault(cf, []).append(bits)
    return {"classes": len(forms), "assignments": len(reps), "forms": forms}
