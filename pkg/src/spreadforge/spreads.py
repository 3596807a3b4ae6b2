"""Symplectic spreads of PG(2e-1, q) and special spreads of PG(3, q).

Everything here is expressed in the fixed coordinates of the standard
symplectic form x1y2 - x2y1 + x3y4 - x4y3 (+ ...).  A special spread is
stored as its set of lines plus an explicit pairing; the pairing indexes
the orthogonal hyperbolic pairs (elements of U_q) in a stable order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .gf import GF, Field
from .projgeom import (
    GeometryError, QuadraticForm, Subspace, SymplecticForm, conic_point_class, is_totally_isotropic,
    klein_form, klein_inverse, klein_map, mat_inverse, mat_mul, nullspace, perp, points_on_quadric,
    quadric_type, rank, rref, space,
)
from .spgraph import CertificationError, Graph, build_sp_graph


# -- the quadrangle W(q) -----------------------------------------------------------

@dataclass(frozen=True)
class HyperbolicPair:
    """An element of U_q: two orthogonal hyperbolic lines."""

    index: int
    line_a: int
    line_b: int
    points_a: tuple
    points_b: tuple

    @property
    def points(self) -> tuple:
        return tuple(sorted(self.points_a + self.points_b))

    @property
    def mask(self) -> int:
        m = 0
        for x in self.points_a + self.points_b:
            m |= 1 << x
        return m


class SymplecticQuadrangle:
    """W(q): the points of PG(3, q) with the standard symplectic polarity."""

    def __init__(self, F: Field):
        self.F, self.q = F, F.q
        self.P = space(3, F)
        self.form = SymplecticForm.standard(2, F)
        self.n = self.P.num_points
        self.lines = self.P.lines()
        self.line_index = {l: i for i, l in enumerate(self.lines)}
        self.line_points = [tuple(self.P.points_of(l)) for l in self.lines]
        self.isotropic = [is_totally_isotropic(l, self.form) for l in self.lines]
        self.perp_line = [self.line_index[perp(l, self.form)] for l in self.lines]
        n = self.n
        self.line_of_pair = np.full((n, n), -1, dtype=np.int32)
        self.point_lines = [[] for _ in range(n)]
        for i, pts in enumerate(self.line_points):
            for a in pts:
                self.point_lines[a].append(i)
            idx = np.array(pts)
            self.line_of_pair[np.ix_(idx, idx)] = i
        np.fill_diagonal(self.line_of_pair, -1)
        self.graph: Graph = build_sp_graph(2, F, self.form)
        self.w_lines = [i for i, iso in enumerate(self.isotropic) if iso]
        pairs = []
        self.pair_of_line = {}
        for i in range(len(self.lines)):
            j = self.perp_line[i]
            if not self.isotropic[i] and i < j:
                hp = HyperbolicPair(len(pairs), i, j, self.line_points[i], self.line_points[j])
                self.pair_of_line[i] = self.pair_of_line[j] = hp.index
                pairs.append(hp)
        self.pairs: list[HyperbolicPair] = pairs
        self.pair_masks = [p.mask for p in pairs]

    def line_through(self, a: int, b: int) -> int:
        return int(self.line_of_pair[a, b])

    def klein_point(self, line: int) -> tuple:
        return klein_map(self.lines[line], self.F)


@lru_cache(maxsize=None)
def quadrangle(q: int) -> SymplecticQuadrangle:
    return SymplecticQuadrangle(GF(q))


def enumerate_U(q: int) -> list[HyperbolicPair]:
    """All unordered orthogonal hyperbolic pairs; q^2 (q^2 + 1) / 2 of them."""
    if q % 2 == 0:
        raise ValueError("special-spread machinery needs q odd")
    return quadrangle(q).pairs


# -- special spreads ---------------------------------------------------------------

@dataclass
class SpecialSpread:
    q: int
    lines: tuple
    pairing: tuple  # pairs (line id, line id) as stored, not recomputed

    @classmethod
    def from_pairs(cls, q: int, pair_indices) -> "SpecialSpread":
        W = quadrangle(q)
        ps = [W.pairs[i] for i in sorted(pair_indices)]
        lines = tuple(sorted(l for p in ps for l in (p.line_a, p.line_b)))
        return cls(q, lines, tuple((p.line_a, p.line_b) for p in ps))

    @classmethod
    def from_lines(cls, q: int, lines) -> "SpecialSpread":
        """Pairing by the symplectic polarity; lines without partner stay unpaired."""
        W = quadrangle(q)
        lines = tuple(sorted(lines))
        s = set(lines)
        pairing = tuple((l, W.perp_line[l]) for l in lines if l < W.perp_line[l] and W.perp_line[l] in s)
        return cls(q, lines, pairing)

    @property
    def pair_indices(self) -> tuple:
        W = quadrangle(self.q)
        return tuple(sorted(W.pair_of_line[a] for a, _ in self.pairing))

    @property
    def pair_mask(self) -> int:
        m = 0
        for i in self.pair_indices:
            m |= 1 << i
        return m

    def pairs(self) -> list[HyperbolicPair]:
        W = quadrangle(self.q)
        return [W.pairs[i] for i in self.pair_indices]

    def point_sets(self) -> list[tuple]:
        W = quadrangle(self.q)
        return [W.line_points[l] for l in self.lines]

    def to_json(self) -> dict:
        W = quadrangle(self.q)
        idx = {l: i for i, l in enumerate(self.lines)}
        return {
            "q": self.q,
            "form_gram": W.form.gram,
            "lines": [list(W.line_points[l]) for l in self.lines],
            "pairing": [[idx[a], idx[b]] for a, b in self.pairing],
        }

    @classmethod
    def from_json(cls, d: dict) -> "SpecialSpread":
        q = d["q"]
        W = quadrangle(q)
        lines = [W.line_through(pts[0], pts[1]) for pts in d["lines"]]
        if any(tuple(sorted(pts)) != W.line_points[l] for pts, l in zip(d["lines"], lines)):
            raise ValueError("spread file lists a point set that is not a line")
        pairing = tuple((lines[a], lines[b]) for a, b in d["pairing"])
        return cls(q, tuple(lines), pairing)


def _check_partition(point_sets, n: int, what: str):
    seen = {}
    for i, pts in enumerate(point_sets):
        for x in pts:
            if x in seen:
                raise CertificationError(f"point {x} lies in {what} {seen[x]} and {i}", (x, seen[x], i))
            seen[x] = i
    missing = [x for x in range(n) if x not in seen]
    if missing:
        raise CertificationError(f"point {missing[0]} is not covered", (missing[0],))


def verify_special_spread(s: SpecialSpread) -> dict:
    """Exhaustive certificate; raises CertificationError naming the violated clause."""
    q = s.q
    W = quadrangle(q)
    g = W.graph
    if len(s.lines) != q * q + 1:
        raise CertificationError(f"{len(s.lines)} lines, expected {q * q + 1}", (len(s.lines),))
    _check_partition([W.line_points[l] for l in s.lines], W.n, "line")
    for l in s.lines:
        if W.isotropic[l]:
            raise CertificationError(f"line {l} is totally isotropic", ("isotropic", l))
    partner = {}
    for a, b in s.pairing:
        for x in (a, b):
            if x in partner:
                raise CertificationError(f"line {x} is paired twice", ("pairing", x))
        partner[a], partner[b] = b, a
    if set(partner) != set(s.lines):
        raise CertificationError("pairing does not cover the spread", ("pairing",))
    spread_set = set(s.lines)
    for l in s.lines:
        if partner[l] != W.perp_line[l]:
            raise CertificationError(f"line {l} is paired with {partner[l]}, not with its polar line",
                                     ("orthogonality", l, partner[l]))
        pts = W.line_points[l]
        ortho = [m for m in spread_set if m != l and all(g.has_edge(x, y) for x in pts for y in W.line_points[m])]
        if ortho != [partner[l]]:
            raise CertificationError(f"line {l} has orthogonal partners {ortho}", ("partner", l, tuple(ortho)))
    full_mask = (1 << W.n) - 1
    for a, b in s.pairing:
        pa, pb = W.line_points[a], W.line_points[b]
        ma = sum(1 << x for x in pa)
        mb = sum(1 << x for x in pb)
        for x in pa:
            if g.adj[x] & ma or (g.adj[x] & mb) != mb:
                raise CertificationError(f"pair ({a},{b}) does not induce K_(q+1,q+1)", ("bipartite", x))
        for x in pb:
            if g.adj[x] & mb or (g.adj[x] & ma) != ma:
                raise CertificationError(f"pair ({a},{b}) does not induce K_(q+1,q+1)", ("bipartite", x))
        outside = full_mask & ~(ma | mb)
        for x in range(W.n):
            if outside >> x & 1:
                if (g.adj[x] & ma).bit_count() != 1 or (g.adj[x] & mb).bit_count() != 1:
                    raise CertificationError(f"vertex {x} does not see exactly one point on each line of ({a},{b})",
                                             ("paired-lines", x, a, b))
    return {"q": q, "lines": len(s.lines), "pairs": len(s.pairing), "valid": True}


# -- the explicit construction via an ovoid of the Klein quadric ---------------

@dataclass
class ConstructionTrace:
    """Intermediate objects of construct_special_spread, kept for auditing."""

    z: tuple
    beta: Subspace
    alpha: Subspace
    alpha_perp: Subspace
    polar_line: Subspace
    elliptic: list
    conic1: list
    conic2: list
    ovoid: list
    secants_through_z: int
    z_class: str
    candidates_tried: int


def _klein_pole(F: Field) -> tuple:
    """Point z of PG(5,q) whose polar hyperplane is p12 + p34 = 0."""
    return (1, 0, 0, 0, 0, 1)


def construct_special_spread(q: int, which: int = 0, budget: int = 10_000):
    """Build a special spread from the ovoid (Q^-(3,q) minus a conic) plus a conic.

    ``which`` selects the which-th elliptic solid through z in the search
    order, so different runs can exercise different solids.  Returns the
    spread and a ConstructionTrace.
    """
    if q % 2 == 0:
        raise ValueError("special spreads need q odd")
    F = GF(q)
    P5 = space(5, F)
    K = klein_form(F)
    z = _klein_pole(F)
    # the hyperplane z^perp; coordinates there are (p12, p13, p14, p23, p24), p34 = -p12
    H = perp(P5.span([z]), K)
    hbasis = [list(b) for b in H.basis]
    P4 = space(4, F)
    found = -1
    tried = 0
    beta = alpha = None
    for plane in P4.subspaces(3):
        tried += 1
        if tried > budget:
            break
        vecs = [[F.dot(c, col) for col in zip(*hbasis)] for c in plane.basis]
        b = P5.span([z] + vecs)
        if len(points_on_quadric(P5, K, b)) != q * q + 1:
            continue
        if quadric_type(K.restrict([list(r) for r in b.basis])) != "Elliptic":
            continue
        found += 1
        if found == which:
            beta, alpha = b, P5.span(vecs)
            break
    if beta is None:
        raise GeometryError(f"no elliptic solid through z within {budget} candidates")
    elliptic = points_on_quadric(P5, K, beta)
    conic1 = points_on_quadric(P5, K, alpha)
    alpha_perp = perp(alpha, K)
    conic2 = points_on_quadric(P5, K, alpha_perp)
    ovoid = sorted(set(elliptic) - set(conic1) | set(conic2))
    if len(ovoid) != q * q + 1:
        raise GeometryError(f"ovoid has {len(ovoid)} points")
    polar_line = Subspace.span(_intersect(alpha_perp, H, F), F)
    # z relative to the conic in alpha^perp, using coordinates of that plane
    ap = [list(r) for r in alpha_perp.basis]
    P2 = space(2, F)
    zc = _coords_in(ap, list(z), F)
    z_class = conic_point_class(P2, P2.point_id(zc), K.restrict(ap))
    zid = P5.point_id(z)
    ovoid_set = set(ovoid)
    secants = set()
    for y in ovoid:
        line = P5.line_through(zid, y)
        on = points_on_quadric(P5, K, line)
        if len(on) == 2 and set(on) <= ovoid_set:
            secants.add(line)
    W = quadrangle(q)
    lines = [W.line_index[klein_inverse(P5.coords[y], F)] for y in ovoid]
    spread = SpecialSpread.from_lines(q, lines)
    trace = ConstructionTrace(z, beta, alpha, alpha_perp, polar_line, elliptic, conic1, conic2, ovoid,
                              len(secants), z_class, tried)
    return spread, trace


def _intersect(a: Subspace, b: Subspace, F: Field) -> list:
    """Basis of the intersection of two subspaces (as vectors)."""
    ka = nullspace([list(r) for r in a.basis], F, len(a.basis[0]))
    kb = nullspace([list(r) for r in b.basis], F, len(b.basis[0]))
    return nullspace(ka + kb, F, len(a.basis[0]))


def _coords_in(basis, v, F: Field) -> list:
    """Coefficients c with sum c_i basis_i = v."""
    k = len(basis)
    aug = [[basis[i][j] for i in range(k)] + [v[j]] for j in range(len(v))]
    red = rref(aug, F)
    sol = [0] * k
    for row in red:
        piv = next(i for i, c in enumerate(row) if c)
        if piv == k:
            raise GeometryError("vector not in span")
        sol[piv] = row[k]
    return sol


# -- symplectic spreads --------------------------------------------------------------

def _poly_irreducible_over(F: Field, e: int) -> list:
    """Least monic irreducible polynomial of degree e over F (constant term first)."""

    def divides(d, f):
        r = list(f)
        while len(r) >= len(d):
            c = r[-1]
            if c:
                shift = len(r) - len(d)
                for i, x in enumerate(d):
                    r[shift + i] = F.sub(r[shift + i], F.mul(c, x))
            r.pop()
        return not any(r)

    for tail in itertools.product(range(F.q), repeat=e):
        f = list(reversed(tail)) + [1]
        ok = True
        for d in range(1, e // 2 + 1):
            for dt in itertools.product(range(F.q), repeat=d):
                if divides(list(reversed(dt)) + [1], f):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return f
    raise GeometryError("no irreducible polynomial")  # pragma: no cover


def _mult_matrix(m, f, F: Field) -> list:
    """Matrix (columns = images of 1, x, ..., x^(e-1)) of multiplication by m modulo f."""
    e = len(f) - 1
    cols = []
    cur = list(m)
    for _ in range(e):
        cols.append(cur)
        # multiply cur by x modulo f
        top = cur[-1]
        nxt = [0] + cur[:-1]
        nxt = [F.sub(a, F.mul(top, c)) for a, c in zip(nxt, f[:-1])]
        cur = nxt
    return [[cols[j][i] for j in range(e)] for i in range(e)]


def symplectic_basis(gram, F: Field) -> list:
    """Rows f1, g1, ..., fe, ge with B(fi, gi) = 1 and all other pairings zero."""
    n = len(gram)

    def B(u, v):
        return F.dot(u, [F.dot(row, v) for row in gram])

    pool = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    out = []
    while pool:
        f = pool[0]
        g = next((w for w in pool[1:] if B(f, w)), None)
        if g is None:
            raise GeometryError("form is degenerate")
        g = F.scale(F.inv(B(f, g)), g)
        out += [f, g]
        rest = []
        for w in pool:
            w2 = F.vadd(F.vadd(w, F.scale(F.neg(B(w, g)), f)), F.scale(B(w, f), g))
            rest.append(w2)
        pool = rref(rest, F)
    return out


@dataclass
class SymplecticSpread:
    e: int
    q: int
    members: list
    member_points: list
    base_change: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"e": self.e, "q": self.q, "members": [list(m) for m in self.member_points],
                "base_change": self.base_change}


def build_symplectic_spread(e: int, q: int) -> SymplecticSpread:
    """The field-model spread {(x, m x)} U {(0, y)} of GF(q^e)^2, in standard coordinates."""
    if e < 2:
        raise ValueError("e must be >= 2")
    F = GF(q)
    f = _poly_irreducible_over(F, e)
    n = 2 * e

    def trace(mat):
        t = 0
        for i in range(e):
            t = F.add(t, mat[i][i])
        return t

    # Tr(x^(i+j)) for the polynomial basis
    xpow = []
    cur = [1] + [0] * (e - 1)
    for _ in range(2 * e - 1):
        xpow.append(cur)
        cur = _mult_matrix(cur, f, F)
        cur = [row[1] for row in cur]
    tr = [[trace(_mult_matrix(xpow[i + j], f, F)) for j in range(e)] for i in range(e)]
    gram = [[0] * n for _ in range(n)]
    for i in range(e):
        for j in range(e):
            gram[i][e + j] = tr[i][j]
            gram[e + j][i] = F.neg(tr[i][j])
    C = symplectic_basis(gram, F)
    Cinv = mat_inverse(C, F)
    P = space(n - 1, F)
    members, member_points = [], []
    for m in itertools.product(range(F.q), repeat=e):
        M = _mult_matrix(list(m), f, F)
        rows = [[1 if k == i else 0 for k in range(e)] + [M[r][i] for r in range(e)] for i in range(e)]
        members.append(P.span(mat_mul(rows, Cinv, F)))
    rows = [[0] * e + [1 if k == i else 0 for k in range(e)] for i in range(e)]
    members.append(P.span(mat_mul(rows, Cinv, F)))
    member_points = [P.points_of(s) for s in members]
    return SymplecticSpread(e, q, members, member_points, Cinv)


def verify_symplectic_spread(s: SymplecticSpread, g: Graph | None = None) -> dict:
    e, q = s.e, s.q
    F = GF(q)
    form = SymplecticForm.standard(e, F)
    P = space(2 * e - 1, F)
    if len(s.members) != q ** e + 1:
        raise CertificationError(f"{len(s.members)} members, expected {q ** e + 1}", (len(s.members),))
    _check_partition(s.member_points, P.num_points, "member")
    size = (q ** e - 1) // (q - 1)
    g = g or build_sp_graph(e, F)
    for i, (m, pts) in enumerate(zip(s.members, s.member_points)):
        if m.rank != e or not is_totally_isotropic(m, form):
            raise CertificationError(f"member {i} is not a totally isotropic {e - 1}-space", ("isotropic", i))
        if len(pts) != size:
            raise CertificationError(f"member {i} has {len(pts)} points", ("size", i))
        mask = sum(1 << x for x in pts)
        for x in pts:
            if (g.adj[x] & mask).bit_count() != size - 1:
                raise CertificationError(f"member {i} is not a clique at vertex {x}", ("clique", i, x))
    return {"e": e, "q": q, "members": len(s.members), "clique_size": size, "valid": True}
