"""Permutation groups on small domains: orbits, Schreier-Sims, orbit BFS.

Permutations are numpy int arrays with ``p[x]`` the image of x.
``compose(a, b)`` applies a first, then b.
"""

from __future__ import annotations

from collections import deque

import numpy as np


def identity(n: int) -> np.ndarray:
    return np.arange(n, dtype=np.int64)


def compose(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return b[a]


def inverse(a: np.ndarray) -> np.ndarray:
    out = np.empty_like(a)
    out[a] = np.arange(len(a))
    return out


def is_identity(a: np.ndarray) -> bool:
    return bool((a == np.arange(len(a))).all())


def orbits(gens, n: int) -> list[list[int]]:
    """Orbits of the group generated by gens, each sorted, listed by least element."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for g in gens:
        for x, y in enumerate(g.tolist()):
            rx, ry = find(x), find(int(y))
            if rx != ry:
                parent[max(rx, ry)] = min(rx, ry)
    groups = {}
    for x in range(n):
        groups.setdefault(find(x), []).append(x)
    return [groups[k] for k in sorted(groups)]


def orbit_transversal(gens, point: int) -> dict:
    """Map each orbit point b to a group element sending point to b."""
    n = len(gens[0])
    trans = {point: identity(n)}
    queue = deque([point])
    while queue:
        b = queue.popleft()
        u = trans[b]
        for s in gens:
            c = int(s[b])
            if c not in trans:
                trans[c] = compose(u, s)
                queue.append(c)
    return trans


class _Level:
    def __init__(self, base: int):
        self.base = base
        self.gens: list = []
        self.trans: dict = {}

    def rebuild(self, n: int):
        self.trans = orbit_transversal(self.gens, self.base) if self.gens else {self.base: identity(n)}


class StabilizerChain:
    """Deterministic Schreier-Sims; ``order`` is exact."""

    def __init__(self, gens, n: int | None = None):
        gens = [np.asarray(g, dtype=np.int64) for g in gens]
        self.n = n if n is not None else len(gens[0])
        self.levels: list[_Level] = []
        for g in gens:
            if not is_identity(g):
                self._add_strong(g, 0)
        self._complete()

    def sift(self, g, start: int = 0):
        for i in range(start, len(self.levels)):
            lvl = self.levels[i]
            b = int(g[lvl.base])
            u = lvl.trans.get(b)
            if u is None:
                return g, i
            g = compose(g, inverse(u))
        return g, len(self.levels)

    def _add_strong(self, h, depth: int):
        """h fixes the base points of levels < depth; it joins the generators of levels <= depth."""
        if depth == len(self.levels):
            moved = int(np.nonzero(h != np.arange(self.n))[0][0])
            self.levels.append(_Level(moved))
        for i in range(depth + 1):
            lvl = self.levels[i]
            lvl.gens.append(h)
            lvl.rebuild(self.n)

    def _complete(self):
        changed = True
        while changed:
            changed = False
            for i in range(len(self.levels) - 1, -1, -1):
                lvl = self.levels[i]
                for beta, u in list(lvl.trans.items()):
                    for s in list(lvl.gens):
                        img = int(s[beta])
                        g = compose(compose(u, s), inverse(lvl.trans[img]))
                        h, j = self.sift(g, i + 1)
                        if not is_identity(h):
                            self._add_strong(h, j)
                            changed = True
                            break
                    if changed:
                        break
                if changed:
                    break

    @property
    def base(self) -> list[int]:
        return [lvl.base for lvl in self.levels]

    @property
    def orbit_lengths(self) -> list[int]:
        return [len(lvl.trans) for lvl in self.levels]

    @property
    def order(self) -> int:
        out = 1
        for k in self.orbit_lengths:
            out *= k
        return out

    def contains(self, g) -> bool:
        h, j = self.sift(np.asarray(g, dtype=np.int64))
        return j == len(self.levels) and is_identity(h)


def random_element(gens, rng, length: int = 30) -> np.ndarray:
    g = identity(len(gens[0]))
    for _ in range(length):
        g = compose(g, gens[int(rng.integers(len(gens)))])
    return g


def set_orbit(gens_on_bits, start: int, act, limit: int | None = None):
    """BFS orbit of a hashable object under ``act(obj, generator_index)``.

    Returns (orbit dict obj -> (parent, generator index)) so that words for
    orbit elements can be recovered.  Raises MemoryError past ``limit``.
    """
    seen = {start: None}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for k in range(gens_on_bits):
            y = act(x, k)
            if y not in seen:
                seen[y] = (x, k)
                if limit is not None and len(seen) > limit:
                    raise MemoryError(f"orbit exceeds {limit} elements")
                queue.append(y)
    return seen
