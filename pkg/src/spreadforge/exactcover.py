"""Exact cover by bitset Algorithm X, and special-spread enumeration on top of it.

Rows and columns are held as Python-int bitsets.  The search always
branches on the uncovered column with the fewest live rows (ties to the
lowest index), so the order of emitted solutions is deterministic and a
checkpoint is just the list of branch positions along the current path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .spgraph import iter_bits
from .spreads import SpecialSpread, quadrangle


class InstanceError(ValueError):
    pass


@dataclass
class ExactCoverInstance:
    n_cols: int
    rows: list
    row_tags: list = field(default_factory=list)

    def __post_init__(self):
        self.rows = [list(r) for r in self.rows]
        if not self.row_tags:
            self.row_tags = list(range(len(self.rows)))
        if len(self.row_tags) != len(self.rows):
            raise InstanceError("one tag per row is required")
        for i, r in enumerate(self.rows):
            if any(b <= a for a, b in zip(r, r[1:])):
                raise InstanceError(f"row {i} is not strictly increasing")
            if r and (r[0] < 0 or r[-1] >= self.n_cols):
                raise InstanceError(f"row {i} has a column out of range")

    def uncovered_columns(self) -> list[int]:
        seen = set()
        for r in self.rows:
            seen.update(r)
        return [c for c in range(self.n_cols) if c not in seen]

    def to_text(self) -> str:
        lines = [f"{self.n_cols} {len(self.rows)}"]
        lines += [" ".join(map(str, r)) for r in self.rows]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExactCoverInstance":
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        n_cols, n_rows = map(int, lines[0].split())
        rows = [list(map(int, ln.split())) for ln in lines[1:]]
        if len(rows) != n_rows:
            raise InstanceError(f"header announces {n_rows} rows, found {len(rows)}")
        return cls(n_cols, rows)


@dataclass
class Checkpoint:
    positions: list
    emitted: int

    def to_json(self) -> dict:
        return {"positions": self.positions, "emitted": self.emitted}

    @classmethod
    def from_json(cls, d: dict) -> "Checkpoint":
        return cls(list(d["positions"]), int(d["emitted"]))


class _Tables:
    def __init__(self, inst: ExactCoverInstance):
        self.n_cols = inst.n_cols
        self.row_cols = [sum(1 << c for c in r) for r in inst.rows]
        col_rows = [0] * inst.n_cols
        for i, r in enumerate(inst.rows):
            for c in r:
                col_rows[c] |= 1 << i
        self.col_rows = col_rows
        self.conflict = []
        for r in inst.rows:
            m = 0
            for c in r:
                m |= col_rows[c]
            self.conflict.append(m)

    def choose(self, uncovered: int, live: int):
        """Return (column, candidate rows) or None when some column is dead."""
        best, best_n = -1, None
        col_rows = self.col_rows
        for c in iter_bits(uncovered):
            n = (col_rows[c] & live).bit_count()
            if best_n is None or n < best_n:
                best, best_n = c, n
                if n <= 1:
                    break
        if best_n == 0:
            return None
        return best, list(iter_bits(col_rows[best] & live))


def solve_all(inst: ExactCoverInstance, forced_rows=(), max_solutions: int | None = None,
              resume: Checkpoint | None = None, on_checkpoint=None, checkpoint_every: int = 1000):
    """Yield every exact cover (as a sorted list of row indices) extending forced_rows."""
    T = _Tables(inst)
    uncovered = (1 << inst.n_cols) - 1
    live = (1 << len(inst.rows)) - 1
    forced = list(forced_rows)
    for r in forced:
        if not (live >> r & 1):
            return
        uncovered &= ~T.row_cols[r]
        live &= ~T.conflict[r]
    if uncovered == 0:
        if resume is None:
            yield sorted(forced)
        return
    emitted = 0 if resume is None else resume.emitted
    # frame: [uncovered, live, candidates, next index]
    first = T.choose(uncovered, live)
    if first is None:
        return
    stack = [[uncovered, live, first[1], 0]]
    if resume is not None:
        for depth, pos in enumerate(resume.positions):
            fr = stack[-1]
            fr[3] = pos + 1
            if depth == len(resume.positions) - 1:
                break
            r = fr[2][pos]
            u, l = fr[0] & ~T.row_cols[r], fr[1] & ~T.conflict[r]
            nxt = T.choose(u, l)
            if nxt is None:
                raise InstanceError("checkpoint does not match this instance")
            stack.append([u, l, nxt[1], 0])
    while stack:
        fr = stack[-1]
        if fr[3] >= len(fr[2]):
            stack.pop()
            continue
        r = fr[2][fr[3]]
        fr[3] += 1
        u = fr[0] & ~T.row_cols[r]
        if u == 0:
            emitted += 1
            yield sorted(forced + [f[2][f[3] - 1] for f in stack])
            if on_checkpoint is not None and emitted % checkpoint_every == 0:
                on_checkpoint(Checkpoint([f[3] - 1 for f in stack], emitted))
            if max_solutions is not None and emitted >= max_solutions:
                return
            continue
        l = fr[1] & ~T.conflict[r]
        nxt = T.choose(u, l)
        if nxt is not None:
            stack.append([u, l, nxt[1], 0])


def count_solutions(inst: ExactCoverInstance, forced_rows=()) -> int:
    return sum(1 for _ in solve_all(inst, forced_rows))


# -- special spreads ------------------------------------------------------------------

def build_spread_instance(q: int, pairs=None) -> ExactCoverInstance:
    """Columns are the points of W(q); rows are the point sets of the elements of U_q."""
    W = quadrangle(q)
    pairs = W.pairs if pairs is None else pairs
    return ExactCoverInstance(W.n, [list(p.points) for p in pairs], [p.index for p in pairs])


def build_dual_instance(q: int) -> ExactCoverInstance:
    """Ovoids of the hyperbolic-point geometry: rows are hyperbolic points, columns its lines.

    Row tags are the indices of the corresponding elements of U_q, so
    solutions of both instances can be compared directly.
    """
    from .classify import hyperbolic_model

    M = hyperbolic_model(q)
    rows = [sorted(M.lines_through[x]) for x in range(M.num_points)]
    return ExactCoverInstance(len(M.lines), rows, [M.pair_of_point[x] for x in range(M.num_points)])


def solutions_to_spreads(q: int, inst: ExactCoverInstance, sols) -> list[SpecialSpread]:
    return [SpecialSpread.from_pairs(q, [inst.row_tags[r] for r in s]) for s in sols]


def enumerate_special_spreads(q: int, mode: str = "full", reps=None, max_solutions: int | None = None,
                              resume: Checkpoint | None = None, on_checkpoint=None):
    """Special spreads of W(q) as lists of U_q indices.

    mode "full": every spread.  "fix_one": spreads through U_q element 0.
    "fix_pair": for each (i, j) in reps, spreads through both elements, in order.
    Returns a list of tuples of U_q indices (fix_pair returns one list per representative).
    """
    inst = build_spread_instance(q)
    if mode == "full":
        return [tuple(s) for s in solve_all(inst, (), max_solutions, resume, on_checkpoint)]
    if mode == "fix_one":
        return [tuple(s) for s in solve_all(inst, (0,), max_solutions, resume, on_checkpoint)]
    if mode == "fix_pair":
        if reps is None:
            from .classify import disjoint_pair_representatives
            reps = disjoint_pair_representatives(q)
        return [[tuple(s) for s in solve_all(inst, tuple(rp), max_solutions)] for rp in reps]
    raise ValueError(f"unknown mode {mode!r}")


def total_from_fixed(q: int, n_fixed: int) -> int:
    """Double counting: spreads through one fixed element, scaled by |U_q| / pairs per spread."""
    num = n_fixed * (q * q * (q * q + 1) // 2)
    den = (q * q + 1) // 2
    if num % den:
        raise ArithmeticError("fixed count is not consistent with a transitive group")
    return num // den


def write_jsonl(path, spreads) -> None:
    with open(path, "w") as fh:
        for s in spreads:
            fh.write(json.dumps(list(s)) + "\n")
