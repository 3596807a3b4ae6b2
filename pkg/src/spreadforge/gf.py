"""Exact arithmetic in GF(p^k) via dense lookup tables.

Elements are plain integers in ``range(q)``.  The integer encodes the
coefficient vector of the element base p, constant term first, so 0 is the
zero element and 1 is the identity.  All arithmetic goes through
precomputed tables, which also makes vectorised numpy evaluation cheap
(``field.mul_t[a, b]`` works elementwise on arrays).
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np


class FieldError(ValueError):
    """Raised for domain errors such as inverting zero."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def prime_power(q: int) -> tuple[int, int]:
    """Return (p, k) with q = p**k, or raise FieldError."""
    if q < 2:
        raise FieldError(f"{q} is not a prime power")
    p = next(d for d in range(2, q + 1) if q % d == 0)
    k, m = 0, q
    while m % p == 0:
        m //= p
        k += 1
    if m != 1:
        raise FieldError(f"{q} is not a prime power")
    return p, k


# -- polynomials over GF(p), coefficient lists constant term first ----------

def _poly_trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a, m, p):
    a = _poly_trim([c % p for c in a])
    m = _poly_trim(m)
    inv_lead = pow(m[-1], p - 2, p)
    while len(a) >= len(m):
        f = a[-1] * inv_lead % p
        shift = len(a) - len(m)
        for i, c in enumerate(m):
            a[shift + i] = (a[shift + i] - f * c) % p
        a = _poly_trim(a)
    return a


def _poly_mul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return out


def _poly_gcd(a, b, p):
    a, b = _poly_trim(a), _poly_trim(b)
    while b:
        a, b = b, _poly_mod(a, b, p)
    return a


def _poly_powmod(base, e, m, p):
    result = [1]
    base = _poly_mod(base, m, p)
    while e:
        if e & 1:
            result = _poly_mod(_poly_mul(result, base, p), m, p)
        base = _poly_mod(_poly_mul(base, base, p), m, p)
        e >>= 1
    return result


def is_irreducible(poly, p: int) -> bool:
    """Rabin-style test: x^(p^k) = x mod f and gcd(x^(p^(k/r)) - x, f) = 1."""
    f = _poly_trim(poly)
    k = len(f) - 1
    if k < 1:
        return False
    if k == 1:
        return True
    if k <= 3:
        # a reducible poly of degree <= 3 has a linear factor
        return all(sum(c * pow(x, i, p) for i, c in enumerate(f)) % p for x in range(p))

    def frob(n):
        r = _poly_powmod([0, 1], p ** n, f, p)
        r = r + [0] * (2 - len(r)) if len(r) < 2 else r
        r[1] = (r[1] - 1) % p
        return _poly_trim(r)

    if frob(k):
        return False
    for r in {d for d in range(2, k + 1) if k % d == 0 and is_prime(d)}:
        g = _poly_gcd(f, frob(k // r), p)
        if len(g) > 1:
            return False
    return True


def find_irreducible(p: int, k: int) -> list[int]:
    """Least monic irreducible degree-k polynomial over GF(p).

    Candidates are ordered by their coefficient vector read from the x^(k-1)
    term down to the constant term.  Returns coefficients constant term first.
    """
    if k < 1:
        raise FieldError("degree must be >= 1")
    for tail in itertools.product(range(p), repeat=k):
        poly = list(reversed(tail)) + [1]
        if is_irreducible(poly, p):
            return poly
    raise FieldError(f"no irreducible polynomial of degree {k} over GF({p})")  # pragma: no cover


class Field:
    """The finite field GF(p^k) with precomputed operation tables."""

    def __init__(self, p: int, k: int = 1, modulus: list[int] | None = None):
        if not is_prime(p):
            raise FieldError(f"characteristic {p} is not prime")
        if k < 1:
            raise FieldError("extension degree must be >= 1")
        self.p, self.k = p, k
        self.q = p ** k
        if k == 1:
            self.modulus = [0, 1]
        else:
            self.modulus = list(modulus) if modulus is not None else find_irreducible(p, k)
            if len(self.modulus) != k + 1 or self.modulus[-1] != 1:
                raise FieldError("modulus must be monic of degree k")
            if not is_irreducible(self.modulus, p):
                raise FieldError(f"modulus {self.modulus} is reducible over GF({p})")
        self._build_tables()

    def _build_tables(self):
        q, p, k = self.q, self.p, self.k
        vecs = np.array([[(a // p ** i) % p for i in range(k)] for a in range(q)], dtype=np.int64)
        weights = p ** np.arange(k, dtype=np.int64)
        add = ((vecs[:, None, :] + vecs[None, :, :]) % p) @ weights
        neg = ((-vecs) % p) @ weights
        mul = np.zeros((q, q), dtype=np.int64)
        for a in range(q):
            for b in range(a, q):
                prod = _poly_mod(_poly_mul(list(vecs[a]), list(vecs[b]), p), self.modulus, p) if k > 1 \
                    else [(a * b) % p]
                prod = prod + [0] * (k - len(prod))
                mul[a, b] = mul[b, a] = sum(int(c) * p ** i for i, c in enumerate(prod))
        inv = np.zeros(q, dtype=np.int64)
        for a in range(1, q):
            (b,) = np.nonzero(mul[a] == 1)[0]
            inv[a] = b
        self.add_t, self.mul_t, self.neg_t, self.inv_t = add, mul, neg, inv
        self.sub_t = add[:, neg]
        # python-level copies are much faster for scalar lookups
        self._add = add.tolist()
        self._mul = mul.tolist()
        self._neg = neg.tolist()
        self._inv = inv.tolist()
        self._sub = self.sub_t.tolist()
        self.elements = list(range(q))

    def __repr__(self):
        return f"GF({self.q})"

    def __eq__(self, other):
        return isinstance(other, Field) and (self.p, self.k, self.modulus) == (other.p, other.k, other.modulus)

    def __hash__(self):
        return hash((self.p, self.k, tuple(self.modulus)))

    # scalar arithmetic
    def add(self, a: int, b: int) -> int:
        return self._add[a][b]

    def sub(self, a: int, b: int) -> int:
        return self._sub[a][b]

    def neg(self, a: int) -> int:
        return self._neg[a]

    def mul(self, a: int, b: int) -> int:
        return self._mul[a][b]

    def inv(self, a: int) -> int:
        if a == 0:
            raise FieldError("inverse of zero")
        return self._inv[a]

    def div(self, a: int, b: int) -> int:
        return self._mul[a][self.inv(b)]

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self.inv(a), -e
        r = 1
        while e:
            if e & 1:
                r = self._mul[r][a]
            a = self._mul[a][a]
            e >>= 1
        return r

    def from_int(self, n: int) -> int:
        """Image of the integer n in the prime subfield."""
        return n % self.p

    def is_square(self, a: int) -> bool:
        """Euler criterion; zero is rejected."""
        if self.q % 2 == 0:
            raise FieldError("square classes are only used for odd q")
        if a == 0:
            raise FieldError("zero is neither a square nor a nonsquare here")
        return self.pow(a, (self.q - 1) // 2) == 1

    def find_nonsquare(self) -> int:
        if self.q % 2 == 0:
            raise FieldError("q must be odd")
        return next(a for a in range(1, self.q) if not self.is_square(a))

    def frobenius(self, a: int) -> int:
        return self.pow(a, self.p)

    # vector helpers (python lists of ints)
    def dot(self, u, v) -> int:
        acc = 0
        add, mul = self._add, self._mul
        for x, y in zip(u, v):
            if x and y:
                acc = add[acc][mul[x][y]]
        return acc

    def scale(self, c: int, v) -> list[int]:
        m = self._mul[c]
        return [m[x] for x in v]

    def vadd(self, u, v) -> list[int]:
        add = self._add
        return [add[x][y] for x, y in zip(u, v)]

    # numpy helpers
    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Matrix product over the field of integer arrays."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.k == 1:
            return (a @ b) % self.p
        out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
        for t in range(a.shape[1]):
            out = self.add_t[out, self.mul_t[a[:, t][:, None], b[t, :][None, :]]]
        return out

    def to_json(self) -> dict:
        return {"p": self.p, "k": self.k, "modulus": list(self.modulus)}


@lru_cache(maxsize=None)
def GF(q: int) -> Field:
    """Cached field of order q with the default (lex-least) modulus."""
    p, k = prime_power(q)
    return Field(p, k)


def check_field_axioms(F: Field) -> dict:
    """Exhaustive table audit; raises FieldError naming the first failing triple."""
    q = F.q
    a = np.arange(q)
    A, M = F.add_t, F.mul_t
    checks = {
        "add commutative": (A == A.T),
        "mul commutative": (M == M.T),
        "add identity": (A[0] == a),
        "mul identity": (M[1] == a),
        "additive inverse": (A[a, F.neg_t] == 0),
    }
    for name, ok in checks.items():
        if not ok.all():
            bad = np.argwhere(~np.atleast_2d(ok))[0].tolist()
            raise FieldError(f"{name} fails at {bad}")
    if any(F.mul(x, F.inv(x)) != 1 for x in range(1, q)):
        raise FieldError("multiplicative inverse table is wrong")
    # associativity and distributivity over all triples
    assoc_add = A[A[:, :, None], a[None, None, :]] == A[a[:, None, None], A[None, :, :]]
    assoc_mul = M[M[:, :, None], a[None, None, :]] == M[a[:, None, None], M[None, :, :]]
    distrib = M[a[:, None, None], A[None, :, :]] == A[M[:, :, None], M[:, None, :]]
    for name, ok in (("add associative", assoc_add), ("mul associative", assoc_mul),
                     ("distributive", distrib)):
        if not ok.all():
            raise FieldError(f"{name} fails at {np.argwhere(~ok)[0].tolist()}")
    # the unit group must be cyclic
    if not any(len({F.pow(g, e) for e in range(q - 1)}) == q - 1 for g in range(1, q)):
        raise FieldError("no primitive element")
    return {"q": q, "p": F.p, "k": F.k, "modulus": list(F.modulus), "triples_checked": q ** 3}
