"""Classification of special spreads of W(q).

Each element U of U_q corresponds to a point x_U of PG(4, q) off the
parabolic quadric Q(4, q) of totally isotropic lines.  These hyperbolic
points, the relations between pairs of them, and the similitude group of
W(q) give two independent ways to separate spreads: group orbits (exact for
q <= 5) and characteristics (pair counts per relation).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .gf import GF, Field
from .perm import StabilizerChain, compose, inverse, orbit_transversal, orbits, random_element, set_orbit
from .projgeom import QuadraticForm, Subspace, klein_map, perp, space
from .spgraph import iter_bits
from .spreads import SpecialSpread, quadrangle


class ClassificationError(AssertionError):
    pass


# Plücker coordinates (p12, p13, p14, p23, p24, p34); hyperplane p12 + p34 = 0 uses the first five.
def _hyperplane_coords(p, F: Field) -> tuple:
    """Project a Klein-quadric point from z = (1,0,0,0,0,1) into p12 + p34 = 0."""
    half = F.inv(F.from_int(2))
    t = F.mul(F.add(p[0], p[5]), half)
    return (F.sub(p[0], t), p[1], p[2], p[3], p[4])


def relation_names(q: int) -> tuple:
    """Names of R1..R_i*; the split depends on q mod 4 and empty classes are dropped."""
    if q % 2 == 0:
        raise ValueError("q must be odd")
    if q % 4 == 3:
        names = ["tangent"]
        if q > 3:
            names.append("secant")
        names.append("external-perp")
        if q > 3:
            names.append("external-nonperp")
    else:
        names = ["tangent", "secant-perp"]
        if q > 5:
            names.append("secant-nonperp")
        names.append("external")
    return tuple(names)


def relation_block_sizes(q: int) -> dict:
    """Expected number of ordered pairs per relation, per point of P_q."""
    t = (q ** 3 - q) // 2
    out = {"tangent": (q - 1) * (q + 1) ** 2}
    if q % 4 == 1:
        out.update({"secant-perp": t, "secant-nonperp": t * (q - 5) // 2, "external": t * (q - 1) // 2})
    else:
        out.update({"secant": t * (q - 3) // 2, "external-perp": t, "external-nonperp": t * (q - 3) // 2})
    return {k: v for k, v in out.items() if k in relation_names(q)}


class HyperbolicPointModel:
    """P_q inside PG(4, q) together with the U_q <-> P_q dictionary."""

    def __init__(self, q: int):
        F = GF(q)
        self.F, self.q = F, q
        self.P4 = space(4, F)
        W = quadrangle(q)
        self.W = W
        base = QuadraticForm.from_terms(5, {(0, 0): F.neg(1), (1, 4): F.neg(1), (2, 3): 1}, F)
        probe = self._pole_of_pair(0, base)
        if not F.is_square(base(probe)):
            base = base.scaled(F.find_nonsquare())
        self.form = base
        vals = base.evaluate_many(self.P4.points)
        sq = np.array([False] + [F.is_square(a) for a in range(1, q)])
        self.points = [int(i) for i in np.nonzero((vals != 0) & sq[vals])[0]]
        self.num_points = len(self.points)
        self.index_of = {x: i for i, x in enumerate(self.points)}
        self.point_of_pair = [self.index_of[self.P4.point_id(self._pole_of_pair(u, base))] for u in range(len(W.pairs))]
        self.pair_of_point = [0] * self.num_points
        for u, x in enumerate(self.point_of_pair):
            self.pair_of_point[x] = u
        self.vectors = self.P4.points[self.points]
        self._build_lines()

    def _isotropic_lines_of_pair(self, u: int) -> list[int]:
        """The (q+1)^2 isotropic lines meeting both lines of U."""
        W = self.W
        p = W.pairs[u]
        return sorted(W.line_through(a, b) for a in p.points_a for b in p.points_b)

    def _pole_of_pair(self, u: int, form: QuadraticForm) -> tuple:
        F = self.F
        images = [_hyperplane_coords(klein_map(self.W.lines[l], F), F) for l in self._isotropic_lines_of_pair(u)]
        alpha = Subspace.span([list(v) for v in images], F)
        if alpha.rank != 4:
            raise ClassificationError(f"isotropic lines of pair {u} span rank {alpha.rank}, not a hyperplane")
        pole = perp(alpha, form)
        return self.P4.normalize(pole.basis[0])

    def projection_of_pair(self, u: int) -> tuple:
        """Second route to x_U: project the Klein image of one line of U from z."""
        F = self.F
        line = self.W.pairs[u].line_a
        return self.P4.normalize(_hyperplane_coords(klein_map(self.W.lines[line], F), F))

    def _build_lines(self):
        """Lines of the geometry on P_q: for each line m of Q(4,q), the points of P_q in m^perp.

        The lines of Q(4,q) are the Klein images of the pencils of isotropic
        lines through a point w of W(q), so lines are indexed by w.
        """
        F, W = self.F, self.W
        gram = np.array(self.form.bilinear_matrix, dtype=np.int64)
        bx = F.matmul(self.vectors, gram)
        self.lines = list(range(W.n))
        self.lines_through = [[] for _ in range(self.num_points)]
        for w in range(W.n):
            pencil = [l for l in W.point_lines[w] if W.isotropic[l]][:2]
            m = np.array([_hyperplane_coords(klein_map(W.lines[l], F), F) for l in pencil], dtype=np.int64)
            vals = F.matmul(bx, m.T)
            for x in np.nonzero((vals == 0).all(axis=1))[0]:
                self.lines_through[int(x)].append(w)

    # -- relations ----------------------------------------------------------------

    @property
    def relation_table(self) -> np.ndarray:
        """R-index (1..i*) for every ordered pair of P_q indices; 0 on the diagonal."""
        if getattr(self, "_rel", None) is None:
            self._rel = self._relations()
        return self._rel

    def _relations(self) -> np.ndarray:
        F, q = self.F, self.q
        gram = np.array(self.form.bilinear_matrix, dtype=np.int64)
        X = self.vectors
        B = F.matmul(F.matmul(X, gram), X.T)
        Qd = self.form.evaluate_many(X)
        four = F.from_int(4)
        prod = F.mul_t[F.mul_t[Qd[:, None], Qd[None, :]], four]
        D = F.sub_t[F.mul_t[B, B], prod]
        sq = np.array([False] + [F.is_square(a) for a in range(1, q)])
        tangent = D == 0
        secant = ~tangent & sq[D]
        orth = B == 0
        names = relation_names(q)
        rel = np.zeros(B.shape, dtype=np.int8)
        kind = {
            "tangent": tangent,
            "secant": secant & ~orth,
            "secant-perp": secant & orth,
            "secant-nonperp": secant & ~orth,
            "external": ~tangent & ~secant,
            "external-perp": ~tangent & ~secant & orth,
            "external-nonperp": ~tangent & ~secant & ~orth,
        }
        covered = np.zeros(B.shape, dtype=bool)
        for i, name in enumerate(names, start=1):
            m = kind[name]
            rel[m] = i
            covered |= m
        np.fill_diagonal(rel, 0)
        np.fill_diagonal(covered, True)
        if not covered.all():
            a, b = map(int, np.argwhere(~covered)[0])
            raise ClassificationError(f"pair ({a},{b}) falls outside the relation classes of q={q}")
        return rel

    def classify_pair(self, x: int, y: int) -> str:
        r = int(self.relation_table[x, y])
        return "identity" if r == 0 else relation_names(self.q)[r - 1]

    def perp_set(self, x: int) -> set:
        gram = np.array(self.form.bilinear_matrix, dtype=np.int64)
        v = self.F.matmul(self.vectors[x:x + 1], gram)
        vals = self.F.matmul(v, self.vectors.T)[0]
        return {int(y) for y in np.nonzero(vals == 0)[0] if y != x}


@lru_cache(maxsize=None)
def hyperbolic_model(q: int) -> HyperbolicPointModel:
    return HyperbolicPointModel(q)


def x_of_U(q: int, u: int) -> int:
    """Index into P_q of the hyperbolic point of U_q element u."""
    return hyperbolic_model(q).point_of_pair[u]


# -- characteristics ----------------------------------------------------------------

def characteristic(q: int, xs) -> list[int]:
    """Counts of unordered pairs of distinct points of xs in each relation R1..R_i*."""
    M = hyperbolic_model(q)
    xs = list(xs)
    rel = M.relation_table
    out = [0] * len(relation_names(q))
    for a, b in itertools.combinations(xs, 2):
        out[int(rel[a, b]) - 1] += 1
    return out


class PairGeometry:
    """U-level data of W(q) used by the second characteristic route."""

    def __init__(self, q: int):
        self.q = q
        W = quadrangle(q)
        self.W = W
        self.iso_mask = 0
        for l in W.w_lines:
            self.iso_mask |= 1 << l
        self._lu = {}
        self._trans = {}

    def isotropic_lines(self, u: int) -> int:
        """Bitmask (over line ids) of the isotropic lines meeting both lines of U."""
        m = self._lu.get(u)
        if m is None:
            p = self.W.pairs[u]
            m = 0
            for a in p.points_a:
                for b in p.points_b:
                    m |= 1 << self.W.line_through(a, b)
            self._lu[u] = m
        return m

    def transversals(self, l1: int, l2: int, l3: int) -> list[int]:
        """The q+1 lines meeting three mutually skew lines."""
        W = self.W
        P = W.P
        F = W.F
        out = []
        pts3 = set(W.line_points[l3])
        for a in W.line_points[l1]:
            plane = P.span([P.coords[a]] + [list(r) for r in W.lines[l2].basis])
            hit = pts3.intersection(P.points_of(plane))
            if len(hit) != 1:
                raise ClassificationError(f"lines {l1},{l2},{l3} are not mutually skew")
            out.append(W.line_through(a, hit.pop()))
        return out

    def singular_transversals(self, k: int, l: int) -> int:
        """Bitmask of the q+1 isotropic lines meeting two disjoint isotropic lines."""
        key = (k, l) if k < l else (l, k)
        m = self._trans.get(key)
        if m is None:
            W = self.W
            g = W.graph
            lmask = sum(1 << x for x in W.line_points[l])
            m = 0
            for a in W.line_points[k]:
                (b,) = list(iter_bits(g.adj[a] & lmask))
                m |= 1 << W.line_through(a, b)
            self._trans[key] = m
        return m

    def relation(self, u1: int, u2: int) -> str:
        """Relation between x_U1 and x_U2 decided from W(q) data only."""
        q, W = self.q, self.W
        common = self.isotropic_lines(u1) & self.isotropic_lines(u2)
        c = common.bit_count()
        if c == 2 * q + 1:
            kind = "tangent"
        elif c == q + 1:
            l1, l2, l3 = list(iter_bits(common))[:3]
            sing = sum(1 for t in self.transversals(l1, l2, l3) if W.isotropic[t])
            if sing == 2:
                kind = "secant"
            elif sing == 0:
                kind = "external"
            else:
                raise ClassificationError(f"{sing} singular transversals for pairs {u1},{u2}")
        else:
            raise ClassificationError(f"pairs {u1},{u2} share {c} isotropic lines")
        if kind == "tangent":
            return kind
        perp_ = self.in_perp(u1, u2)
        names = relation_names(q)
        for cand in (f"{kind}-perp" if perp_ else f"{kind}-nonperp", kind):
            if cand in names:
                return cand
        raise ClassificationError(f"relation {kind} (perp={perp_}) is not a class for q={q}")

    def in_perp(self, u1: int, u2: int) -> bool:
        lines1 = list(iter_bits(self.isotropic_lines(u1)))
        target = self.isotropic_lines(u2)
        W = self.W
        for i, k in enumerate(lines1):
            kp = set(W.line_points[k])
            for l in lines1[i + 1:]:
                if kp.isdisjoint(W.line_points[l]):
                    t = self.singular_transversals(k, l)
                    if t & target == t:
                        return True
        return False


@lru_cache(maxsize=None)
def pair_geometry(q: int) -> PairGeometry:
    return PairGeometry(q)


def characteristic_of_spread(s: SpecialSpread) -> list[int]:
    """Characteristic via the hyperbolic-point model, cross-checked against W(q)-only data."""
    q = s.q
    M = hyperbolic_model(q)
    us = s.pair_indices
    route_a = characteristic(q, [M.point_of_pair[u] for u in us])
    G = pair_geometry(q)
    names = relation_names(q)
    route_b = [0] * len(names)
    for u1, u2 in itertools.combinations(us, 2):
        route_b[names.index(G.relation(u1, u2))] += 1
    if route_a != route_b:
        raise ClassificationError(f"characteristic routes disagree: {route_a} vs {route_b}")
    return route_a


# -- the similitude group -----------------------------------------------------------

def _transvection(v, a, F: Field, gram) -> list:
    """Matrix of x -> x + a B(x, v) v acting on row vectors."""
    n = len(v)
    jv = [F.dot(row, v) for row in gram]
    return [[F.add(1 if i == j else 0, F.mul(a, F.mul(jv[i], v[j]))) for j in range(n)] for i in range(n)]


def _matrix_to_point_perm(mat, P) -> np.ndarray:
    img = P.F.matmul(P.points, np.array(mat, dtype=np.int64))
    ids = P.ids_of(img)
    return ids.astype(np.int64)


@dataclass
class SimilitudeGroup:
    q: int
    matrices: list
    point_perms: list
    chain: StabilizerChain

    @property
    def order(self) -> int:
        return self.chain.order

    def pair_perms(self) -> list:
        if getattr(self, "_pp", None) is None:
            W = quadrangle(self.q)
            out = []
            for g in self.point_perms:
                img = np.empty(len(W.pairs), dtype=np.int64)
                for p in W.pairs:
                    a, b = p.points_a[0], p.points_a[1]
                    img[p.index] = W.pair_of_line[W.line_through(int(g[a]), int(g[b]))]
                out.append(img)
            self._pp = out
        return self._pp

    def hyperbolic_point_perms(self) -> list:
        M = hyperbolic_model(self.q)
        return [np.array([M.point_of_pair[int(g[M.pair_of_point[x]])] for x in range(M.num_points)],
                         dtype=np.int64) for g in self.pair_perms()]


def expected_group_order(q: int) -> int:
    return q ** 4 * (q * q - 1) * (q ** 4 - 1)


@lru_cache(maxsize=None)
def group_generators(q: int) -> SimilitudeGroup:
    """Symplectic transvections plus one similitude scaling the form by a nonsquare."""
    F = GF(q)
    W = quadrangle(q)
    gram = W.form.gram
    prim = next(a for a in range(1, q) if len({F.pow(a, k) for k in range(q - 1)}) == q - 1)
    vecs = [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1), (1, 0, 1, 0), (0, 1, 0, 1), (1, 0, 0, 1)]
    mats = []
    scalars = [1] if F.k == 1 else [F.pow(prim, i) for i in range(F.k)]
    for v in vecs:
        for a in scalars:
            mats.append(_transvection(list(v), a, F, gram))
    nu = F.find_nonsquare()
    mats.append([[1, 0, 0, 0], [0, nu, 0, 0], [0, 0, 1, 0], [0, 0, 0, nu]])
    for m in mats:
        if not _is_similitude(m, gram, F):
            raise ClassificationError("generator does not preserve the form up to a scalar")
    perms = [_matrix_to_point_perm(m, W.P) for m in mats]
    chain = StabilizerChain(perms, W.n)
    return SimilitudeGroup(q, mats, perms, chain)


def _is_similitude(m, gram, F: Field) -> bool:
    n = len(m)
    mt = [[m[j][i] for j in range(n)] for i in range(n)]
    img = [[F.dot(row, col) for col in zip(*mt)] for row in [[F.dot(r, c) for c in zip(*gram)] for r in m]]
    lam = next(img[i][j] for i in range(n) for j in range(n) if gram[i][j])
    lam = F.div(lam, next(gram[i][j] for i in range(n) for j in range(n) if gram[i][j]))
    return lam != 0 and all(img[i][j] == F.mul(lam, gram[i][j]) for i in range(n) for j in range(n))


def act_on_mask(perm, mask: int) -> int:
    out = 0
    for i in iter_bits(mask):
        out |= 1 << int(perm[i])
    return out


def spread_mask(s: SpecialSpread) -> int:
    return s.pair_mask


@dataclass
class OrbitReport:
    orbit_size: int
    stabilizer_order: int
    orbit: set | None = None


def orbit_and_stabilizer(s, G: SimilitudeGroup, keep: bool = False, limit: int | None = 5_000_000) -> OrbitReport:
    """Orbit of a spread (as a set of U_q indices) by BFS; stabilizer order from orbit-stabilizer."""
    mask = s.pair_mask if isinstance(s, SpecialSpread) else int(s)
    perms = [p.tolist() for p in G.pair_perms()]

    def act(m, k):
        g = perms[k]
        out = 0
        for i in iter_bits(m):
            out |= 1 << g[i]
        return out

    seen = set_orbit(len(perms), mask, act, limit)
    size = len(seen)
    if G.order % size:
        raise ClassificationError(f"orbit size {size} does not divide the group order {G.order}")
    return OrbitReport(size, G.order // size, set(seen) if keep else None)


def equivalent(s1: SpecialSpread, s2: SpecialSpread, G: SimilitudeGroup | None = None) -> bool:
    """Orbit membership for q <= 5; characteristic comparison for larger q."""
    if s1.q != s2.q:
        raise ValueError("spreads over different fields")
    q = s1.q
    if q > 5:
        return characteristic_of_spread(s1) == characteristic_of_spread(s2)
    G = G or group_generators(q)
    rep = orbit_and_stabilizer(s1, G, keep=True)
    return s2.pair_mask in rep.orbit


def classify_spreads(q: int, spreads, G: SimilitudeGroup | None = None) -> list[dict]:
    """Split spreads (lists of U_q indices) into group orbits; q <= 5."""
    G = G or group_generators(q)
    remaining = {sum(1 << u for u in s) for s in spreads}
    classes = []
    for m in sorted(remaining):
        if m not in remaining:
            continue
        rep = orbit_and_stabilizer(m, G, keep=True)
        members = remaining & rep.orbit
        remaining -= rep.orbit
        spread = SpecialSpread.from_pairs(q, list(iter_bits(m)))
        classes.append({"representative": list(iter_bits(m)), "orbit_size": rep.orbit_size,
                        "stabilizer_order": rep.stabilizer_order, "found": len(members),
                        "characteristic": characteristic_of_spread(spread)})
    return classes


def pair_stabilizer_gens(G: SimilitudeGroup, u: int) -> list:
    """Schreier generators of the stabilizer of U_q element u, acting on U_q."""
    perms = G.pair_perms()
    trans = orbit_transversal(perms, u)
    out, seen = [], set()
    for b, t in trans.items():
        for s in perms:
            g = compose(compose(t, s), inverse(trans[int(s[b])]))
            key = g.tobytes()
            if key not in seen:
                seen.add(key)
                out.append(g)
    return out


def orbitals(q: int, u: int = 0) -> list[list[int]]:
    """Orbits of the stabilizer of u on the other elements of U_q."""
    G = group_generators(q)
    gens = pair_stabilizer_gens(G, u)
    n = len(quadrangle(q).pairs)
    return [o for o in orbits(gens, n) if o != [u]]


def disjoint_pair_representatives(q: int) -> list[tuple]:
    """(0, v) for one v in each stabilizer orbit of elements disjoint from element 0."""
    W = quadrangle(q)
    m0 = W.pair_masks[0]
    reps = []
    for o in orbitals(q, 0):
        v = o[0]
        if not W.pair_masks[v] & m0:
            reps.append((0, v))
    return reps


def random_group_element(G: SimilitudeGroup, rng, on: str = "pairs") -> np.ndarray:
    gens = {"pairs": G.pair_perms, "points": lambda: G.point_perms,
            "hyperbolic": G.hyperbolic_point_perms}[on]()
    return random_element(gens, rng)


# -- counting identities -------------------------------------------------------------

def spreads_through_pair(q: int, classes) -> dict:
    """Spreads containing a fixed pair of elements, per relation, from (stabilizer order, characteristic) rows.

    Every spread in a class of size |G|/|Stab| holds c_j pairs in relation
    j, and the group is transitive on each relation here, so double counting
    gives |G| / |Stab| * c_j / (number of pairs in relation j), summed over classes.
    """
    from fractions import Fraction

    order = expected_group_order(q)
    names = relation_names(q)
    blocks = relation_block_sizes(q)
    n_points = hyperbolic_model(q).num_points
    out = {}
    for j, name in enumerate(names):
        pairs = n_points * blocks[name] // 2
        total = sum(Fraction(order, stab) * ch[j] for stab, ch in classes) / pairs
        if total.denominator != 1:
            raise ClassificationError(f"non-integral count {total} for relation {name}")
        out[name] = int(total)
    return out


def total_spreads(q: int, classes) -> int:
    """Orbit-stabilizer total over classes given as (stabilizer order, characteristic) rows."""
    order = expected_group_order(q)
    if any(order % stab for stab, _ in classes):
        raise ClassificationError("a stabilizer order does not divide the group order")
    return sum(order // stab for stab, _ in classes)


def characteristic_census(q: int, reps=None) -> dict:
    """Enumerate spreads through each disjoint-pair representative and tally characteristics.

    The hyperbolic-point route is used for every spread; the first spread
    of each characteristic is also run through the W(q)-only route.

    Returns {"reps": [...], "counts": [...], "relations": [...],
    "characteristics": {tuple: number of spreads seen}}.
    """
    from .exactcover import enumerate_special_spreads

    reps = disjoint_pair_representatives(q) if reps is None else reps
    per_rep = enumerate_special_spreads(q, "fix_pair", reps=reps)
    M = hyperbolic_model(q)
    by_rep = {}
    for i, sols in enumerate(per_rep):
        for sol in sols:
            ch = tuple(characteristic(q, [M.point_of_pair[u] for u in sol]))
            if ch not in by_rep:
                # first spread with this characteristic: confirm with the W(q)-only route
                characteristic_of_spread(SpecialSpread.from_pairs(q, sol))
                by_rep[ch] = [0] * len(reps)
            by_rep[ch][i] += 1
    relations = [M.classify_pair(x_of_U(q, a), x_of_U(q, b)) for a, b in reps]
    return {"reps": [tuple(r) for r in reps], "counts": [len(s) for s in per_rep],
            "relations": relations, "characteristics": {ch: sum(c) for ch, c in by_rep.items()},
            "by_rep": by_rep}


def stabilizers_from_census(q: int, census: dict) -> dict:
    """Stabilizer order of each class from how often it passes through each fixed pair.

    A class with characteristic c and stabilizer H meets a fixed pair of
    relation j in n_j = |G| c_j / (|H| N_j) spreads, N_j being the number of
    pairs in relation j.  Every relation with c_j > 0 must give the same |H|.
    """
    order = expected_group_order(q)
    names = relation_names(q)
    blocks = relation_block_sizes(q)
    n_points = hyperbolic_model(q).num_points
    out = {}
    for ch, counts in census["by_rep"].items():
        orders = set()
        for rel, n in zip(census["relations"], counts):
            j = names.index(rel)
            pairs = n_points * blocks[rel] // 2
            num = order * ch[j]
            if n == 0 or num % (pairs * n):
                raise ClassificationError(f"characteristic {list(ch)}: {n} spreads through a {rel} pair "
                                          "is not consistent with a transitive group")
            orders.add(num // (pairs * n))
        if len(orders) != 1:
            raise ClassificationError(f"characteristic {list(ch)} gives stabilizer orders {sorted(orders)}")
        out[ch] = orders.pop()
    return out
