"""Projective spaces PG(n, q), subspaces, polarities, quadrics and the Klein map.

Points are interned once per (n, q): every point has a dense integer id given
by the lexicographic order of its normalised coordinates (first nonzero
coordinate equal to 1).  Subspaces are stored by their reduced row echelon
basis, which makes them hashable and directly comparable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .gf import GF, Field, FieldError


class GeometryError(ValueError):
    """Degenerate input or an inconsistency in a geometric computation."""


# -- linear algebra over GF(q) on small python matrices -----------------------

def rref(rows, F: Field) -> list[list[int]]:
    """Reduced row echelon form, zero rows dropped."""
    m = [list(r) for r in rows]
    if not m:
        return []
    ncols = len(m[0])
    out_row = 0
    for col in range(ncols):
        piv = next((i for i in range(out_row, len(m)) if m[i][col]), None)
        if piv is None:
            continue
        m[out_row], m[piv] = m[piv], m[out_row]
        inv = F._inv[m[out_row][col]]
        m[out_row] = F.scale(inv, m[out_row])
        prow = m[out_row]
        for i in range(len(m)):
            if i != out_row and m[i][col]:
                f = F._neg[m[i][col]]
                mf = F._mul[f]
                add = F._add
                m[i] = [add[a][mf[b]] for a, b in zip(m[i], prow)]
        out_row += 1
        if out_row == len(m):
            break
    return [r for r in m[:out_row]]


def rank(rows, F: Field) -> int:
    return len(rref(rows, F))


def nullspace(rows, F: Field, ncols: int) -> list[list[int]]:
    """Basis (in RREF) of {x : r . x = 0 for every row r}."""
    r = rref(rows, F) if rows else []
    pivots = []
    for row in r:
        pivots.append(next(i for i, c in enumerate(row) if c))
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [0] * ncols
        v[f] = 1
        for row, pc in zip(r, pivots):
            v[pc] = F._neg[row[f]]
        basis.append(v)
    return rref(basis, F) if basis else []


def det(mat, F: Field) -> int:
    m = [list(r) for r in mat]
    n = len(m)
    d = 1
    for col in range(n):
        piv = next((i for i in range(col, n) if m[i][col]), None)
        if piv is None:
            return 0
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            d = F.neg(d)
        d = F.mul(d, m[col][col])
        inv = F.inv(m[col][col])
        for i in range(col + 1, n):
            if m[i][col]:
                f = F.neg(F.mul(m[i][col], inv))
                m[i] = [F.add(a, F.mul(f, b)) for a, b in zip(m[i], m[col])]
    return d


def mat_inverse(mat, F: Field) -> list[list[int]]:
    n = len(mat)
    aug = [list(r) + [1 if i == j else 0 for j in range(n)] for i, r in enumerate(mat)]
    red = rref(aug, F)
    if len(red) < n or any(red[i][i] != 1 for i in range(n)):
        raise GeometryError("matrix is singular")
    return [r[n:] for r in red]


def mat_mul(a, b, F: Field) -> list[list[int]]:
    bt = list(zip(*b))
    return [[F.dot(r, c) for c in bt] for r in a]


def transpose(a):
    return [list(r) for r in zip(*a)]


# -- subspaces ----------------------------------------------------------------

@dataclass(frozen=True)
class Subspace:
    """Projective subspace given by its RREF basis."""

    basis: tuple

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def projdim(self) -> int:
        return len(self.basis) - 1

    @classmethod
    def span(cls, vectors, F: Field) -> "Subspace":
        return cls(tuple(tuple(r) for r in rref(vectors, F)))

    def contains_vector(self, v, F: Field) -> bool:
        return rank(list(self.basis) + [list(v)], F) == self.rank


class ProjectiveSpace:
    """PG(n, q) with an interned point list."""

    def __init__(self, n: int, F: Field):
        if n < 1:
            raise GeometryError("n must be >= 1")
        self.n, self.F, self.dim = n, F, n + 1
        q = F.q
        self.q = q
        pts = [v for v in itertools.product(range(q), repeat=self.dim)
               if next((c for c in v if c), 0) == 1]
        self.points = np.array(pts, dtype=np.int64)
        self.num_points = len(pts)
        self._weights = q ** np.arange(self.dim - 1, -1, -1, dtype=np.int64)
        self._index = np.full(q ** self.dim, -1, dtype=np.int64)
        self._index[self.points @ self._weights] = np.arange(self.num_points)
        self.coords = [tuple(p) for p in pts]
        self._line_cache = None

    def __repr__(self):
        return f"PG({self.n},{self.q})"

    def normalize(self, v) -> tuple:
        F = self.F
        lead = next((c for c in v if c), None)
        if lead is None:
            raise GeometryError("zero vector is not a point")
        return tuple(F.scale(F.inv(lead), v))

    def point_id(self, v) -> int:
        return int(self._index[np.dot(self.normalize(v), self._weights)])

    def ids_of(self, vecs: np.ndarray) -> np.ndarray:
        """Vectorised normalisation + lookup; zero rows map to -1."""
        F = self.F
        vecs = np.asarray(vecs, dtype=np.int64)
        nz = vecs != 0
        lead_pos = nz.argmax(axis=1)
        lead = vecs[np.arange(len(vecs)), lead_pos]
        zero = ~nz.any(axis=1)
        lead = np.where(zero, 1, lead)
        normed = F.mul_t[F.inv_t[lead][:, None], vecs]
        ids = self._index[normed @ self._weights]
        return np.where(zero, -1, ids)

    def span(self, vectors) -> Subspace:
        return Subspace.span([list(v) for v in vectors], self.F)

    def points_of(self, s: Subspace) -> list[int]:
        if s.rank == 0:
            return []
        if s.rank == 1:
            return [self.point_id(s.basis[0])]
        coeffs = _space(s.rank - 1, self.F).points
        vecs = self.F.matmul(coeffs, np.array(s.basis, dtype=np.int64))
        return sorted(self.ids_of(vecs).tolist())

    def line_through(self, a: int, b: int) -> Subspace:
        if a == b:
            raise GeometryError("a line needs two distinct points")
        return self.span([self.coords[a], self.coords[b]])

    def subspaces(self, rank_: int) -> list[Subspace]:
        """All subspaces of vector dimension rank_, in a fixed order."""
        out = []
        q, d = self.q, self.dim
        for pivots in itertools.combinations(range(d), rank_):
            free = [[c for c in range(p + 1, d) if c not in pivots] for p in pivots]
            slots = [(r, c) for r, cols in enumerate(free) for c in cols]
            for vals in itertools.product(range(q), repeat=len(slots)):
                rows = [[0] * d for _ in range(rank_)]
                for r, p in enumerate(pivots):
                    rows[r][p] = 1
                for (r, c), x in zip(slots, vals):
                    rows[r][c] = x
                out.append(Subspace(tuple(tuple(r) for r in rows)))
        return out

    def lines(self) -> list[Subspace]:
        if self._line_cache is None:
            self._line_cache = self.subspaces(2)
        return self._line_cache


@lru_cache(maxsize=None)
def _space(n: int, F: Field) -> ProjectiveSpace:
    return ProjectiveSpace(n, F)


def space(n: int, q_or_field) -> ProjectiveSpace:
    """Cached PG(n, q)."""
    F = q_or_field if isinstance(q_or_field, Field) else GF(q_or_field)
    return _space(n, F)


def gaussian_binomial(n: int, k: int, q: int) -> int:
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


# -- forms ----------------------------------------------------------------------

class SymplecticForm:
    """Alternating bilinear form B(x, y) = x G y^T."""

    def __init__(self, gram, F: Field):
        self.F = F
        self.gram = [list(r) for r in gram]
        n = len(self.gram)
        for i in range(n):
            if self.gram[i][i]:
                raise GeometryError("symplectic Gram matrix must have zero diagonal")
            for j in range(n):
                if self.gram[i][j] != F.neg(self.gram[j][i]):
                    raise GeometryError("symplectic Gram matrix must be skew")
        self.nonsingular = det(self.gram, F) != 0

    @classmethod
    def standard(cls, e: int, F: Field) -> "SymplecticForm":
        """x1y2 - x2y1 + x3y4 - x4y3 + ..."""
        g = [[0] * (2 * e) for _ in range(2 * e)]
        for i in range(e):
            g[2 * i][2 * i + 1] = 1
            g[2 * i + 1][2 * i] = F.neg(1)
        return cls(g, F)

    @property
    def bilinear_matrix(self):
        return self.gram

    def __call__(self, u, v) -> int:
        F = self.F
        return F.dot(u, [F.dot(row, v) for row in self.gram])


class QuadraticForm:
    """Q(v) = sum_{i<=j} a_ij v_i v_j with an upper triangular coefficient matrix."""

    def __init__(self, coeffs, F: Field):
        self.F = F
        n = len(coeffs)
        self.coeffs = [[coeffs[i][j] if j >= i else 0 for j in range(n)] for i in range(n)]
        self.n = n
        m = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                if i == j:
                    m[i][i] = F.add(self.coeffs[i][i], self.coeffs[i][i])
                else:
                    m[i][j] = self.coeffs[min(i, j)][max(i, j)]
        self.bilinear_matrix = m
        self._c = np.array(self.coeffs, dtype=np.int64)

    @classmethod
    def from_terms(cls, n: int, terms: dict, F: Field) -> "QuadraticForm":
        """terms maps (i, j) -> coefficient (0-based, i <= j)."""
        c = [[0] * n for _ in range(n)]
        for (i, j), a in terms.items():
            i, j = min(i, j), max(i, j)
            c[i][j] = F.add(c[i][j], a)
        return cls(c, F)

    def __call__(self, v) -> int:
        F = self.F
        acc = 0
        for i in range(self.n):
            if v[i]:
                row = self.coeffs[i]
                s = 0
                for j in range(i, self.n):
                    if row[j] and v[j]:
                        s = F._add[s][F._mul[row[j]][v[j]]]
                if s:
                    acc = F._add[acc][F._mul[v[i]][s]]
        return acc

    def evaluate_many(self, vecs: np.ndarray) -> np.ndarray:
        F = self.F
        vecs = np.asarray(vecs, dtype=np.int64)
        acc = np.zeros(len(vecs), dtype=np.int64)
        for i in range(self.n):
            for j in range(i, self.n):
                a = self.coeffs[i][j]
                if a:
                    term = F.mul_t[a, F.mul_t[vecs[:, i], vecs[:, j]]]
                    acc = F.add_t[acc, term]
        return acc

    def bilinear(self, u, v) -> int:
        F = self.F
        return F.dot(u, [F.dot(row, v) for row in self.bilinear_matrix])

    def scaled(self, c: int) -> "QuadraticForm":
        F = self.F
        return QuadraticForm([[F.mul(c, a) for a in row] for row in self.coeffs], F)

    def restrict(self, basis) -> "QuadraticForm":
        """The form in the coordinates of the given basis vectors."""
        F = self.F
        k = len(basis)
        c = [[0] * k for _ in range(k)]
        for i in range(k):
            c[i][i] = self(basis[i])
            for j in range(i + 1, k):
                c[i][j] = self.bilinear(basis[i], basis[j])
        return QuadraticForm(c, F)

    def radical(self) -> list[list[int]]:
        return nullspace(self.bilinear_matrix, self.F, self.n)

    @property
    def nonsingular(self) -> bool:
        rad = self.radical()
        if not rad:
            return True
        if self.F.q % 2:
            return False
        # even q: the radical has dimension 1 for a parabolic form; it must avoid Q
        return all(self(v) != 0 for v in _vectors_of_span(rad, self.F))


def _vectors_of_span(basis, F: Field):
    for coeffs in itertools.product(range(F.q), repeat=len(basis)):
        if any(coeffs):
            v = [0] * len(basis[0])
            for c, b in zip(coeffs, basis):
                v = F.vadd(v, F.scale(c, b))
            yield v


def _gram(form) -> list[list[int]]:
    return form.bilinear_matrix


def perp(s: Subspace, form) -> Subspace:
    """Polar subspace of s under a nonsingular symplectic or orthogonal form."""
    F = form.F
    g = _gram(form)
    if rank(g, F) != len(g):
        raise GeometryError("form is singular")
    rows = [[F.dot(b, col) for col in zip(*g)] for b in s.basis]
    if not rows:
        return Subspace(tuple(tuple(r) for r in rref(np.eye(len(g), dtype=int).tolist(), F)))
    return Subspace(tuple(tuple(r) for r in nullspace(rows, F, len(g))))


def is_totally_isotropic(s: Subspace, form: SymplecticForm) -> bool:
    b = s.basis
    return all(form(b[i], b[j]) == 0 for i in range(len(b)) for j in range(i + 1, len(b)))


def quadric_points(P: ProjectiveSpace, form: QuadraticForm) -> np.ndarray:
    return np.nonzero(form.evaluate_many(P.points) == 0)[0]


def quadric_count(n: int, q: int, kind: str) -> int:
    """Number of points of a nonsingular quadric of PG(n, q)."""
    if n % 2 == 0:
        return (q ** n - 1) // (q - 1)
    m = (n + 1) // 2
    if kind == "Hyperbolic":
        return (q ** m - 1) * (q ** (m - 1) + 1) // (q - 1)
    return (q ** m + 1) * (q ** (m - 1) - 1) // (q - 1)


def quadric_type(form: QuadraticForm, n: int | None = None) -> str:
    """Parabolic / Hyperbolic / Elliptic / Conic / Singular, decided by point count."""
    n = form.n - 1 if n is None else n
    if n != form.n - 1:
        raise GeometryError("form size does not match the ambient dimension")
    if not form.nonsingular:
        return "Singular"
    P = space(n, form.F)
    count = len(quadric_points(P, form))
    q = form.F.q
    if n % 2 == 0:
        if count != quadric_count(n, q, "Parabolic"):
            raise GeometryError(f"nonsingular quadric of PG({n},{q}) has {count} points")
        return "Conic" if n == 2 else "Parabolic"
    for kind in ("Hyperbolic", "Elliptic"):
        if count == quadric_count(n, q, kind):
            return kind
    raise GeometryError(f"nonsingular quadric of PG({n},{q}) has {count} points")


def section_type(form: QuadraticForm, s: Subspace) -> str:
    """Type of the quadric induced on the subspace s."""
    return quadric_type(form.restrict([list(b) for b in s.basis]))


def points_on_quadric(P: ProjectiveSpace, form: QuadraticForm, s: Subspace) -> list[int]:
    pts = P.points_of(s)
    vals = form.evaluate_many(P.points[pts])
    return [p for p, v in zip(pts, vals) if v == 0]


def line_class(P: ProjectiveSpace, line: Subspace, form: QuadraticForm) -> str:
    if line.rank != 2:
        raise GeometryError("not a line")
    k = len(points_on_quadric(P, form, line))
    if k in (1, P.q + 1):
        return "Tangent"
    if k == 2:
        return "Secant"
    if k == 0:
        return "External"
    raise GeometryError(f"line meets a quadric in {k} points")


def conic_point_class(P: ProjectiveSpace, x: int, conic: QuadraticForm) -> str:
    if P.n != 2:
        raise GeometryError("conic_point_class works in PG(2,q)")
    if P.q % 2 == 0:
        raise GeometryError("q must be odd")
    v = P.coords[x]
    if conic(v) == 0:
        return "On"
    polar = perp(P.span([v]), conic)
    k = len(points_on_quadric(P, conic, polar))
    if k == 0:
        return "Interior"
    if k == 2:
        return "Exterior"
    raise GeometryError("polar line of an off-conic point is tangent")


def elliptic_coefficients(F: Field) -> tuple[int, int]:
    """Lex-least (a, b) with X^2 + aX + b irreducible."""
    for a in range(F.q):
        for b in range(F.q):
            if all(F.add(F.add(F.mul(x, x), F.mul(a, x)), b) for x in range(F.q)):
                return a, b
    raise FieldError("no irreducible quadratic")  # pragma: no cover


# -- Klein correspondence ---------------------------------------------------------

PLUCKER_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


def klein_form(F: Field) -> QuadraticForm:
    """p12 p34 - p13 p24 + p14 p23 in the coordinate order of PLUCKER_PAIRS."""
    return QuadraticForm.from_terms(6, {(0, 5): 1, (1, 4): F.neg(1), (2, 3): 1}, F)


def plucker(u, v, F: Field) -> list[int]:
    return [F.sub(F.mul(u[i], v[j]), F.mul(u[j], v[i])) for i, j in PLUCKER_PAIRS]


def klein_map(line: Subspace, F: Field) -> tuple:
    if line.rank != 2 or len(line.basis[0]) != 4:
        raise GeometryError("klein_map takes a line of PG(3,q)")
    p = plucker(line.basis[0], line.basis[1], F)
    return space(5, F).normalize(p)


def klein_inverse(p, F: Field) -> Subspace:
    if klein_form(F)(p) != 0:
        raise GeometryError("point is not on the Klein quadric")
    m = [[0] * 4 for _ in range(4)]
    for (i, j), c in zip(PLUCKER_PAIRS, p):
        m[i][j] = c
        m[j][i] = F.neg(c)
    # the columns of the skew Plucker matrix span the line
    s = Subspace.span(transpose(m), F)
    if s.rank != 2:
        raise GeometryError("degenerate Plucker vector")
    return s
