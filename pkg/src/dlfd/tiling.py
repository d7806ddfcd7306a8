"""Torus tiling problems and their encoding as DLFD terminologies.

A tiling problem ``(T, H, V)`` is solved on a ``w x h`` torus when every cell's
right neighbour is an ``H``-successor and every cell's upper neighbour is a
``V``-successor (indices wrap around).

``reduce_to_terminology`` builds the terminology whose finite models with a
nonempty ``X & T_<t0>`` correspond to tilings.  ``build_torus_witness`` turns
a tiling with even sides into such a model, laid out as a checkerboard:

* cells ``(i, j)`` with ``i + j`` even are ``X``, the others ``Y``;
* every cell side is an edge object; its ``f`` points to the ``X`` cell on one
  side and ``g`` to the ``Y`` cell on the other;
* edges are typed ``A``..``D`` by the side of the ``X`` cell they lie on;
* every grid vertex is a corner object; an edge's ``h`` and ``i`` point to
  its two end corners.

Which side of a cell carries which edge type, and which end an ``h`` arrow
picks, is the :class:`Orientation` record.  ``calibrate_orientation``
searches that space with the model checker; ``ORIENTATION`` is the frozen
result.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Optional

from .finder import SearchBounds, SearchOutcome, ModelFound, refute_bounded
from .interp import FiniteInterpretation, build_interpretation, check_terminology, eval_d, satisfies
from .syntax import (
    All,
    And,
    Axiom,
    Bot,
    Concept,
    Or,
    Pfd,
    Plain,
    Prim,
    Terminology,
    desugar_asymmetric_pfds,
    union_name,
)

EDGE_TYPES = ("A", "B", "C", "D")
X_FEATURES = {"A": "a", "B": "b", "C": "c", "D": "d"}
Y_FEATURES = {"A": "a'", "B": "b'", "C": "c'", "D": "d'"}
FEATURES = ("a", "b", "c", "d", "a'", "b'", "c'", "d'", "f", "g", "h", "i")
SIDES = ("bottom", "right", "top", "left")
OPPOSITE = {"bottom": "top", "top": "bottom", "left": "right", "right": "left"}

# (edge type with the shared f/g object, partner type, agreeing path, implied path)
SQUARE_PFDS = (
    ("A", "B", "f", "h"), ("B", "C", "f", "i"), ("C", "D", "f", "h"), ("D", "A", "f", "i"),
    ("A", "B", "h", "f"), ("B", "C", "i", "f"), ("C", "D", "h", "f"), ("D", "A", "i", "f"),
    ("A", "B", "g", "i"), ("B", "C", "g", "h"), ("C", "D", "g", "i"), ("D", "A", "g", "h"),
    ("A", "B", "i", "g"), ("B", "C", "h", "g"), ("C", "D", "i", "g"), ("D", "A", "h", "g"),
)

# (edge type, feature to the tile being read, feature to the constrained tile, relation)
ADJACENCY = (("A", "g", "f", "V"), ("C", "f", "g", "V"), ("B", "f", "g", "H"), ("D", "g", "f", "H"))

DIRECT, DESUGARED = "direct", "desugared"
MODES = (DIRECT, DESUGARED)


class TilingError(ValueError):
    pass


@dataclass(frozen=True)
class TilingProblem:
    tiles: tuple
    horiz: frozenset = frozenset()
    vert: frozenset = frozenset()

    def __post_init__(self):
        tiles = tuple(self.tiles)
        if not tiles:
            raise TilingError("a tiling problem needs at least one tile")
        if len(set(tiles)) != len(tiles):
            raise TilingError("duplicate tile identifiers")
        for t in tiles:
            try:
                Prim(tile_concept(t))
            except ValueError:
                raise TilingError(f"tile id {t!r} does not give a valid concept name") from None
        object.__setattr__(self, "tiles", tiles)
        for rel in ("horiz", "vert"):
            pairs = frozenset(tuple(p) for p in getattr(self, rel))
            for p in pairs:
                if len(p) != 2 or not set(p) <= set(tiles):
                    raise TilingError(f"{rel} pair {p!r} mentions an undeclared tile")
            object.__setattr__(self, rel, pairs)

    def check_tile(self, t) -> None:
        if t not in self.tiles:
            raise TilingError(f"undeclared tile {t!r}")

    def successors(self, t, relation: str) -> list:
        rel = self.horiz if relation == "H" else self.vert
        return [s for s in self.tiles if (t, s) in rel]


@dataclass(frozen=True)
class TorusTiling:
    """Tiles on ``Z_w x Z_h``; ``rows[j][i]`` is the tile at column ``i``, row ``j``."""

    width: int
    height: int
    rows: tuple

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.rows)
        if self.width < 1 or self.height < 1:
            raise TilingError("torus dimensions must be positive")
        if len(rows) != self.height or any(len(r) != self.width for r in rows):
            raise TilingError("grid shape does not match the torus dimensions")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def from_rows(cls, rows) -> "TorusTiling":
        rows = [list(r) for r in rows]
        return cls(len(rows[0]), len(rows), rows)

    def at(self, i: int, j: int):
        return self.rows[j % self.height][i % self.width]

    def to_dict(self) -> dict:
        return {"width": self.width, "height": self.height, "rows": [list(r) for r in self.rows]}


def tile_concept(t) -> str:
    return f"T_{t}"


def load_problem(path) -> tuple:
    """Read a ``.tiles`` JSON file; returns ``(problem, t0)``."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return problem_from_dict(data)


def problem_from_dict(data) -> tuple:
    if not isinstance(data, dict) or "tiles" not in data:
        raise TilingError("tiling file must be an object with a 'tiles' list")
    u = TilingProblem(tuple(data["tiles"]), data.get("H", ()), data.get("V", ()))
    t0 = data.get("t0", u.tiles[0])
    u.check_tile(t0)
    return u, t0


# --------------------------------------------------------------------------
# Tiling


def check_torus_tiling(u: TilingProblem, s: TorusTiling) -> bool:
    for row in s.rows:
        for t in row:
            u.check_tile(t)
    for j in range(s.height):
        for i in range(s.width):
            t = s.at(i, j)
            if (t, s.at(i + 1, j)) not in u.horiz or (t, s.at(i, j + 1)) not in u.vert:
                return False
    return True


def solve_torus(u: TilingProblem, t0, w: int, h: int) -> Optional[TorusTiling]:
    """Lexicographically least valid ``w x h`` torus tiling with ``t(0,0) = t0``.

    Cells are filled row by row, bottom row first, trying tiles in declaration
    order, so the first solution found is the least one in that order.
    """
    u.check_tile(t0)
    if w < 1 or h < 1:
        raise TilingError("torus dimensions must be positive")
    grid = [[None] * w for _ in range(h)]
    cells = [(i, j) for j in range(h) for i in range(w)]

    def fits(i, j, t):
        if i > 0 and (grid[j][i - 1], t) not in u.horiz:
            return False
        if j > 0 and (grid[j - 1][i], t) not in u.vert:
            return False
        if i == w - 1 and (t, grid[j][0]) not in u.horiz:
            return False
        if j == h - 1 and (t, grid[0][i]) not in u.vert:
            return False
        return True

    def place(k):
        if k == len(cells):
            return True
        i, j = cells[k]
        for t in ([t0] if k == 0 else u.tiles):
            # the wrap checks against column/row 0 need those cells placed first
            grid[j][i] = t
            if fits(i, j, t) and place(k + 1):
                return True
        grid[j][i] = None
        return False

    return TorusTiling(w, h, grid) if place(0) else None


def solve_torus_upto(u: TilingProblem, t0, max_dim: int) -> Optional[TorusTiling]:
    """First tiling over all ``1 <= w, h <= max_dim`` by increasing area, then width."""
    if max_dim < 1:
        raise TilingError("max_dim must be positive")
    dims = sorted(itertools.product(range(1, max_dim + 1), repeat=2), key=lambda d: (d[0] * d[1], d[0]))
    for w, h in dims:
        s = solve_torus(u, t0, w, h)
        if s is not None:
            return s
    return None


def double_tiling(s: TorusTiling) -> TorusTiling:
    w, h = 2 * s.width, 2 * s.height
    return TorusTiling(w, h, [[s.at(i, j) for i in range(w)] for j in range(h)])


# --------------------------------------------------------------------------
# Reduction


def _all(f, c):
    return All(f, c)


def _union(concepts) -> Concept:
    concepts = list(concepts)
    if not concepts:
        return Bot()
    acc = concepts[0]
    for c in concepts[1:]:
        acc = Or(acc, c)
    return acc


def reduce_to_terminology(u: TilingProblem, t0, mode: str = DIRECT) -> tuple:
    """The terminology for ``u`` and the goal ``X & T_<t0>``.

    Axiom order: edge disjointness, cell/edge typing and injectivity, the
    sixteen square-forming PFDs (symmetrized through union concepts in
    ``desugared`` mode), extension axioms, adjacency rules, tile disjointness.
    """
    u.check_tile(t0)
    if mode not in MODES:
        raise ValueError(f"unknown reduction mode {mode!r}")
    P = {name: Prim(name) for name in ("A", "B", "C", "D", "X", "Y")}
    X, Y = P["X"], P["Y"]
    out = []

    for p, q in itertools.combinations(EDGE_TYPES, 2):
        out.append(Axiom(And(P[p], P[q]), Bot()))

    def typing(feats):
        a, b, c, d = (_all(feats[e], P[e]) for e in EDGE_TYPES)
        return And(And(a, b), And(c, d))

    out.append(Axiom(X, typing(X_FEATURES)))
    out.append(Axiom(Y, typing(Y_FEATURES)))
    for cell, feats in ((X, X_FEATURES), (Y, Y_FEATURES)):
        for e in EDGE_TYPES:
            out.append(Axiom(cell, Pfd(cell, [(feats[e],)], ())))
    for e in EDGE_TYPES:
        out.append(Axiom(P[e], And(_all("f", X), _all("g", Y))))
    for feat in ("f", "g"):
        for e in EDGE_TYPES:
            out.append(Axiom(P[e], Pfd(P[e], [(feat,)], ())))

    squares = Terminology(
        Axiom(P[l], Pfd(P[r], [(agree,)], (implied,))) for l, r, agree, implied in SQUARE_PFDS
    )
    if mode == DESUGARED:
        squares = desugar_asymmetric_pfds(squares)
    out.extend(squares.axioms)

    out.append(Axiom(P["A"], _all("g", Y)))
    out.append(Axiom(P["B"], _all("g", Y)))
    out.append(Axiom(P["C"], _all("f", X)))
    out.append(Axiom(P["D"], _all("f", X)))

    for edge, read, constrained, rel in ADJACENCY:
        for t in u.tiles:
            succ = [Prim(tile_concept(s)) for s in u.successors(t, rel)]
            lhs = And(P[edge], _all(read, Prim(tile_concept(t))))
            out.append(Axiom(lhs, _all(constrained, _union(succ))))

    for s, t in itertools.combinations(u.tiles, 2):
        out.append(Axiom(And(Prim(tile_concept(s)), Prim(tile_concept(t))), Bot()))

    return Terminology(out), And(X, Prim(tile_concept(t0)))


def union_concepts(t: Terminology) -> dict:
    """Union concepts introduced by symmetrization, mapped to their two members."""
    members: dict = {}
    for a in t.axioms:
        if isinstance(a.lhs, Prim) and isinstance(a.rhs, Plain) and isinstance(a.rhs.concept, Prim):
            target = a.rhs.concept.name
            if target.startswith("_u_"):
                members.setdefault(target, []).append(a.lhs.name)
    return members


# --------------------------------------------------------------------------
# Witness


@dataclass(frozen=True)
class Orientation:
    """Geometry of the witness.

    ``x_side[e]`` is the side of an ``X`` cell holding its type-``e`` edge; a
    ``Y`` cell holds that edge on the opposite side.  ``h_high[e]`` says
    whether ``h`` of a type-``e`` edge points to its right/top end (True) or
    its left/bottom end (False); ``i`` points to the other end.
    """

    x_side: tuple  # sides for A, B, C, D
    h_high: tuple  # bools for A, B, C, D

    def side(self, e: str) -> str:
        return self.x_side[EDGE_TYPES.index(e)]

    def h_is_high(self, e: str) -> bool:
        return self.h_high[EDGE_TYPES.index(e)]


ORIENTATION = Orientation(("bottom", "right", "top", "left"), (True, False, False, True))


class _Layout:
    """Element numbering: cells, horizontal edges, vertical edges, corners."""

    def __init__(self, w: int, h: int):
        self.w, self.h = w, h
        self.size = 4 * w * h

    def _idx(self, i, j):
        return (j % self.h) * self.w + (i % self.w)

    def cell(self, i, j):
        return self._idx(i, j)

    def hedge(self, i, j):  # bottom side of cell (i, j)
        return self.w * self.h + self._idx(i, j)

    def vedge(self, i, j):  # left side of cell (i, j)
        return 2 * self.w * self.h + self._idx(i, j)

    def corner(self, i, j):  # bottom-left vertex of cell (i, j)
        return 3 * self.w * self.h + self._idx(i, j)

    def side_edge(self, i, j, side):
        if side == "bottom":
            return self.hedge(i, j), "h", (i, j)
        if side == "top":
            return self.hedge(i, j + 1), "h", (i, j + 1)
        if side == "left":
            return self.vedge(i, j), "v", (i, j)
        return self.vedge(i + 1, j), "v", (i + 1, j)

    def ends(self, kind, i, j):
        """(low, high) corners of an edge: left/right for horizontal, bottom/top for vertical."""
        if kind == "h":
            return self.corner(i, j), self.corner(i + 1, j)
        return self.corner(i, j), self.corner(i, j + 1)


def build_torus_witness(u: TilingProblem, s: TorusTiling, mode: str = DIRECT,
                        orientation: Orientation = ORIENTATION) -> FiniteInterpretation:
    """Finite model of the reduction of ``u`` built from the tiling ``s``.

    Both sides of ``s`` must be even (apply :func:`double_tiling` first).  In
    ``desugared`` mode the union concepts of the symmetrized PFDs are added.
    """
    if s.width % 2 or s.height % 2:
        raise TilingError("witness construction needs even torus dimensions; double the tiling first")
    if not check_torus_tiling(u, s):
        raise TilingError("not a valid tiling for this problem")
    w, h = s.width, s.height
    L = _Layout(w, h)
    feats = {f: list(range(L.size)) for f in FEATURES}
    concepts = {name: set() for name in ("A", "B", "C", "D", "X", "Y")}
    for t in u.tiles:
        concepts[tile_concept(t)] = set()
    type_of_side = {orientation.side(e): e for e in EDGE_TYPES}

    for j in range(h):
        for i in range(w):
            c = L.cell(i, j)
            concepts[tile_concept(s.at(i, j))].add(c)
            is_x = (i + j) % 2 == 0
            concepts["X" if is_x else "Y"].add(c)
            for side in SIDES:
                edge, kind, pos = L.side_edge(i, j, side)
                # an edge on side s of a Y cell is on the opposite side of its X neighbour
                e = type_of_side[side if is_x else OPPOSITE[side]]
                feats[(X_FEATURES if is_x else Y_FEATURES)[e]][c] = edge
                concepts[e].add(edge)
                feats["f" if is_x else "g"][edge] = c
                low, high = L.ends(kind, *pos)
                hi = orientation.h_is_high(e)
                feats["h"][edge] = high if hi else low
                feats["i"][edge] = low if hi else high

    if mode == DESUGARED:
        for l, r, _, _ in SQUARE_PFDS:
            concepts[union_name(l, r)] = concepts[l] | concepts[r]
    elif mode != DIRECT:
        raise ValueError(f"unknown reduction mode {mode!r}")
    return build_interpretation(L.size, feats, concepts)


def calibrate_orientation(u: TilingProblem = None, s: TorusTiling = None) -> list:
    """Every orientation whose witness satisfies the reduction in both modes.

    Defaults to the one-tile problem on a 2 x 2 torus.
    """
    if u is None:
        u = TilingProblem(("t",), {("t", "t")}, {("t", "t")})
    if s is None:
        s = double_tiling(solve_torus(u, u.tiles[0], 1, 1))
    t0 = s.at(0, 0)
    theories = {m: reduce_to_terminology(u, t0, m)[0] for m in MODES}
    passing = []
    for sides in itertools.permutations(SIDES):
        for highs in itertools.product((False, True), repeat=4):
            o = Orientation(sides, highs)
            if all(satisfies(build_torus_witness(u, s, m, o), theories[m]) for m in MODES):
                passing.append(o)
    return passing


# --------------------------------------------------------------------------
# End-to-end


@dataclass
class ReductionReport:
    branch: str  # "positive", "countermodel-only" or "bounded-negative"
    tiling: Optional[TorusTiling] = None
    witness: Optional[FiniteInterpretation] = None
    witness_checks: dict = field(default_factory=dict)
    goal_nonempty: Optional[bool] = None
    max_dim: int = 0
    search: Optional[SearchOutcome] = None

    def to_dict(self, timings: bool = False) -> dict:
        d = {"branch": self.branch, "max_dim": self.max_dim}
        if self.tiling is not None:
            d["tiling"] = self.tiling.to_dict()
        if self.witness is not None:
            d["witness_size"] = self.witness.n
            d["witness_checks"] = dict(self.witness_checks)
            d["goal_nonempty"] = self.goal_nonempty
        else:
            d["tiler"] = f"no torus tiling with sides up to {self.max_dim} (bounded evidence only)"
        if self.search is not None:
            d["finder"] = self.search.to_dict(timings)
        return d


def verify_reduction_instance(u: TilingProblem, t0, max_dim: int,
                              bounds: SearchBounds = SearchBounds()) -> ReductionReport:
    """Run both sides of the tiling/finite-model correspondence and report what each found.

    A tiling yields a witness that is model-checked against both reduction
    modes.  Without a tiling up to ``max_dim`` the finder looks for a
    countermodel to ``X & T_<t0> <= Bot``.  Negative results of either side are
    bounded and reported as such; the two bounds are unrelated.
    """
    s = solve_torus_upto(u, t0, max_dim)
    if s is not None:
        even = s if s.width % 2 == 0 and s.height % 2 == 0 else double_tiling(s)
        checks = {}
        goal_ok = True
        witness = None
        for mode in MODES:
            t, goal = reduce_to_terminology(u, t0, mode)
            wm = build_torus_witness(u, even, mode)
            checks[mode] = check_terminology(wm, t).ok
            goal_ok = goal_ok and bool(eval_d(wm, goal))
            if mode == DIRECT:
                witness = wm
        return ReductionReport("positive", s, witness, checks, goal_ok, max_dim)
    t, goal = reduce_to_terminology(u, t0, DIRECT)
    outcome = refute_bounded(t, Axiom(goal, Bot()), bounds)
    branch = "countermodel-only" if isinstance(outcome, ModelFound) else "bounded-negative"
    return ReductionReport(branch, max_dim=max_dim, search=outcome)
