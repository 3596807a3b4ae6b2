"""Canonical labeling by individualization and refinement.

The search keeps the leaf maximizing (refinement traces along the path,
relabeled adjacency).  Everything that steers the search depends only on
cell positions, sizes and neighbour counts, so the result is invariant
under relabeling the input.  Subtrees are pruned by trace comparison and
by orbits of automorphisms found at equivalent leaves.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .spgraph import Graph, iter_bits


class CanonBudgetError(RuntimeError):
    def __init__(self, message: str, report: dict):
        super().__init__(message)
        self.report = report


def _mask(vs) -> int:
    m = 0
    for v in vs:
        m |= 1 << v
    return m


def refine(adj, cells: list, queue_starts) -> tuple:
    """Equitable refinement of an ordered partition, in place.

    ``cells`` is a list of vertex lists in position order.  Returns the new
    cell list and the trace of the splits performed.
    """
    starts = []
    pos = 0
    by_start = {}
    for c in cells:
        by_start[pos] = c
        starts.append(pos)
        pos += len(c)
    queue = deque(queue_starts)
    queued = set(queue)
    trace = []
    while queue:
        s = queue.popleft()
        queued.discard(s)
        wmask = _mask(by_start[s])
        for cs in sorted(by_start):
            cell = by_start[cs]
            if len(cell) == 1:
                continue
            counts = [(adj[v] & wmask).bit_count() for v in cell]
            if min(counts) == max(counts):
                continue
            groups = {}
            for v, k in zip(cell, counts):
                groups.setdefault(k, []).append(v)
            keys = sorted(groups)
            frags = [groups[k] for k in keys]
            trace.append((0, s, cs, tuple(keys), tuple(len(f) for f in frags)))
            p = cs
            new_starts = []
            for f in frags:
                by_start[p] = f
                new_starts.append(p)
                p += len(f)
            if cs in queued:
                for ns in new_starts[1:]:
                    queue.append(ns)
                    queued.add(ns)
            else:
                big = max(range(len(frags)), key=lambda i: (len(frags[i]), -i))
                for i, ns in enumerate(new_starts):
                    if i != big:
                        queue.append(ns)
                        queued.add(ns)
    out = [by_start[k] for k in sorted(by_start)]
    trace.append((1, len(out)))
    return out, tuple(trace)


@dataclass
class CanonicalForm:
    n: int
    certificate: tuple
    labeling: list  # labeling[v] = canonical position of v
    automorphisms: list
    nodes: int

    def __eq__(self, other):
        return isinstance(other, CanonicalForm) and (self.n, self.certificate) == (other.n, other.certificate)

    def __hash__(self):
        return hash((self.n, self.certificate))


def _relabeled(adj, order) -> tuple:
    pos = {v: i for i, v in enumerate(order)}
    rows = [0] * len(order)
    for v, row in enumerate(adj):
        m = 0
        for w in iter_bits(row):
            m |= 1 << pos[w]
        rows[pos[v]] = m
    return tuple(rows)


def canonical_form(g: Graph, colors=None, node_budget: int = 200_000) -> CanonicalForm:
    """Canonical labeling of g (optionally vertex-coloured with sortable colours)."""
    n = g.n
    adj = g.adj
    if n == 0:
        return CanonicalForm(0, (), [], [], 0)
    if colors is None:
        cells = [list(range(n))]
    else:
        groups = {}
        for v in range(n):
            groups.setdefault(colors[v], []).append(v)
        cells = [groups[k] for k in sorted(groups)]
    color_key = tuple((k, len(groups[k])) for k in sorted(groups)) if colors is not None else (n,)
    starts, p = [], 0
    for c in cells:
        starts.append(p)
        p += len(c)
    root, root_trace = refine(adj, cells, starts)
    state = {"best": None, "first": None, "nodes": 0}
    autos: list = []

    def leaf(traces, order, fixed):
        """Record the leaf; on an automorphism return the depth to jump back to."""
        cert = _relabeled(adj, order)
        key = (traces, cert)
        jump = None
        for ref in (state["first"], state["best"]):
            if ref is not None and ref[0] == key:
                gamma = [0] * n
                ref_order = ref[1]
                for i, v in enumerate(order):
                    gamma[v] = ref_order[i]
                if any(gamma[v] != v for v in range(n)):
                    autos.append(gamma)
                    # the subtree below the common ancestor is an image of one already searched
                    jump = next((i for i, (a, b) in enumerate(zip(fixed, ref[2])) if a != b), len(fixed))
                break
        if state["first"] is None:
            state["first"] = (key, order, fixed)
        if state["best"] is None or key > state["best"][0]:
            state["best"] = (key, order, fixed)
        return jump

    def orbit_rep(fixed, w, explored):
        """True if w is in the orbit of an explored vertex under automorphisms fixing `fixed`."""
        gens = [a for a in autos if all(a[f] == f for f in fixed)]
        if not gens or not explored:
            return False
        seen = {w}
        stack = [w]
        while stack:
            x = stack.pop()
            for a in gens:
                y = a[x]
                if y not in seen:
                    if y in explored:
                        return True
                    seen.add(y)
                    stack.append(y)
        return False

    def search(cells, fixed, traces):
        state["nodes"] += 1
        if state["nodes"] > node_budget:
            raise CanonBudgetError("canonical form node budget exceeded",
                                   {"nodes": state["nodes"], "depth": len(fixed),
                                    "cells": [len(c) for c in cells]})
        if len(cells) == n:
            return leaf(traces, [c[0] for c in cells], fixed)
        best = state["best"]
        if best is not None:
            d = len(traces)
            if traces < best[0][0][:d]:
                return None
        ti = min((i for i, c in enumerate(cells) if len(c) > 1), key=lambda i: (len(cells[i]), i))
        target = cells[ti]
        start = sum(len(c) for c in cells[:ti])
        explored = set()
        for w in list(target):
            if orbit_rep(fixed, w, explored):
                continue
            explored.add(w)
            child = cells[:ti] + [[w], [x for x in target if x != w]] + cells[ti + 1:]
            child, tr = refine(adj, child, [start])
            jump = search(child, fixed + [w], traces + (tr,))
            if jump is not None and jump < len(fixed):
                return jump
        return None

    search(root, [], (color_key, root_trace))
    (traces, cert), order, _ = state["best"]
    labeling = [0] * n
    for i, v in enumerate(order):
        labeling[v] = i
    return CanonicalForm(n, (traces[0],) + (cert,), labeling, autos, state["nodes"])


def isomorphic(g1: Graph, g2: Graph) -> bool:
    return g1.n == g2.n and canonical_form(g1) == canonical_form(g2)


def brute_force_canonical(g: Graph) -> tuple:
    """Lexicographically largest relabeled adjacency over all n! orders (small n only)."""
    import itertools

    if g.n > 9:
        raise ValueError("brute force is limited to 9 vertices")
    return max(_relabeled(g.adj, list(order)) for order in itertools.permutations(range(g.n)))
