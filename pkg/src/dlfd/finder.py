"""Bounded finite-model search.

``find_model`` compiles "a model of T of size n with a nonempty goal" to CNF
and hands it to a SAT solver:

* feature tables are one-hot: ``F[f][x][y]`` holds iff ``f(x) = y``;
* every D-subconcept gets one variable per element (Tseitin);
* path values of length > 1 are composed one step at a time;
* PFD agreement on a path is an auxiliary ``eq[p][x][y]`` variable.

Axioms only need the ``lhs -> rhs`` direction, so a PFD on a right-hand side
becomes the clauses ``lhs(x) & over(y) & eq_1(x,y) & ... -> eq(x,y)`` directly.
A PFD that must be *refuted* (the goal of ``refute_bounded``) is encoded as a
full equivalence instead.

The goal is pinned at element 0.  Any model with a nonempty goal can be
renamed so that element 0 is in the goal, so this keeps exact-size
completeness.

``enumerate_all`` is the independent brute-force oracle; it shares nothing
with the encoder except the evaluator in :mod:`dlfd.interp`.

Absence of a model up to a bound is only bounded evidence.  Finite
implication for this logic is undecidable, so no bound turns a negative
search into a proof.
"""
from __future__ import annotations

import itertools
import os
import time
from dataclasses import dataclass, field
from typing import Optional

from pysat.solvers import Solver

from .interp import (
    FiniteInterpretation,
    build_interpretation,
    check_terminology,
    eval_d,
    eval_concept,
    is_finite_countermodel,
)
from .syntax import (
    All,
    And,
    Axiom,
    Bot,
    Concept,
    Not,
    Or,
    Pfd,
    Plain,
    Prim,
    Signature,
    Terminology,
    Top,
    has_pfd,
    rhs_conjuncts,
    signature_of,
)

SOLVER_NAME = "glucose4"
NODE_LIMIT_ENV = "DLFD_NODE_LIMIT"
DEFAULT_CEILING = 10**8
BOUNDED_NOTE = (
    "no model found within the searched sizes; this is bounded evidence only, "
    "not a proof of finite unsatisfiability"
)


class ResourceLimitExceeded(RuntimeError):
    def __init__(self, size: int, nodes: int):
        super().__init__(f"search budget exhausted at size {size} after {nodes} conflicts")
        self.size = size
        self.nodes = nodes


class CeilingExceeded(ValueError):
    """``enumerate_all`` refused a search space above its ceiling."""


class VerificationError(AssertionError):
    """The solver produced an assignment that the evaluator rejects."""


@dataclass(frozen=True)
class SearchBounds:
    min_size: int = 1
    max_size: int = 12
    per_size_node_limit: Optional[int] = None

    def __post_init__(self):
        if self.min_size < 1 or self.max_size < 1:
            raise ValueError("search sizes must be positive")
        if self.min_size > self.max_size:
            raise ValueError(f"min_size {self.min_size} > max_size {self.max_size}")
        if self.per_size_node_limit is not None and self.per_size_node_limit < 1:
            raise ValueError("node limit must be positive")

    @classmethod
    def from_env(cls, min_size: int = 1, max_size: int = 12) -> "SearchBounds":
        raw = os.environ.get(NODE_LIMIT_ENV)
        return cls(min_size, max_size, int(raw) if raw else None)


@dataclass
class SearchOutcome:
    sizes_searched: list = field(default_factory=list)
    nodes: int = 0
    elapsed: float = 0.0

    kind = "outcome"

    def to_dict(self, timings: bool = False) -> dict:
        d = {"outcome": self.kind, "sizes_searched": list(self.sizes_searched), "nodes": self.nodes}
        if timings:
            d["wall_time"] = round(self.elapsed, 6)
        return d


@dataclass
class ModelFound(SearchOutcome):
    model: FiniteInterpretation = None
    size: int = 0

    kind = "model-found"

    def to_dict(self, timings: bool = False) -> dict:
        d = super().to_dict(timings)
        d["size"] = self.size
        return d


@dataclass
class NoModelUpTo(SearchOutcome):
    max_size: int = 0

    kind = "no-model-up-to"

    def to_dict(self, timings: bool = False) -> dict:
        d = super().to_dict(timings)
        d["max_size"] = self.max_size
        d["note"] = BOUNDED_NOTE
        return d


@dataclass
class ResourceLimit(SearchOutcome):
    size: int = 0

    kind = "resource-limit"

    def to_dict(self, timings: bool = False) -> dict:
        d = super().to_dict(timings)
        d["size"] = self.size
        return d


# --------------------------------------------------------------------------
# CNF construction


class _Cnf:
    """Clause store with constant folding; literals are ints or Python bools."""

    def __init__(self):
        self.nvars = 0
        self.clauses = []

    def var(self) -> int:
        self.nvars += 1
        return self.nvars

    def add(self, lits) -> None:
        out = []
        for lit in lits:
            if lit is True:
                return
            if lit is not False:
                out.append(lit)
        self.clauses.append(out)

    @staticmethod
    def neg(lit):
        return (not lit) if isinstance(lit, bool) else -lit

    def and_gate(self, lits):
        lits = [x for x in lits if x is not True]
        if any(x is False for x in lits):
            return False
        lits = list(dict.fromkeys(lits))
        if not lits:
            return True
        if len(lits) == 1:
            return lits[0]
        v = self.var()
        for x in lits:
            self.add([-v, x])
        self.add([v] + [-x for x in lits])
        return v

    def or_gate(self, lits):
        return self.neg(self.and_gate([self.neg(x) for x in lits]))


class _Encoder:
    def __init__(self, sig: Signature, n: int):
        self.n = n
        self.concepts = sorted(sig.concepts)
        self.features = sorted(sig.features)
        self.cnf = _Cnf()
        cnf = self.cnf
        self.feat = {}
        for f in self.features:
            rows = []
            for x in range(n):
                row = [cnf.var() for _ in range(n)]
                cnf.add(row)
                for y1, y2 in itertools.combinations(row, 2):
                    cnf.add([-y1, -y2])
                rows.append(row)
            self.feat[f] = rows
        self.conc = {c: [cnf.var() for _ in range(n)] for c in self.concepts}
        self._d = {}
        self._path = {}
        self._eq = {}
        self._pfd = {}

    # -- D-concepts ------------------------------------------------------

    def d(self, c: Concept) -> list:
        """Per-element literals for a D-concept (full equivalence)."""
        got = self._d.get(c)
        if got is not None:
            return got
        cnf, n = self.cnf, self.n
        if isinstance(c, Prim):
            out = self.conc[c.name]
        elif isinstance(c, Top):
            out = [True] * n
        elif isinstance(c, Bot):
            out = [False] * n
        elif isinstance(c, Not):
            out = [cnf.neg(x) for x in self.d(c.arg)]
        elif isinstance(c, And):
            l, r = self.d(c.left), self.d(c.right)
            out = [cnf.and_gate([l[x], r[x]]) for x in range(n)]
        elif isinstance(c, Or):
            l, r = self.d(c.left), self.d(c.right)
            out = [cnf.or_gate([l[x], r[x]]) for x in range(n)]
        elif isinstance(c, All):
            inner = self.d(c.arg)
            table = self.feat[c.feature]
            out = []
            for x in range(n):
                if all(v is True for v in inner) or all(v is False for v in inner):
                    out.append(inner[0])
                    continue
                v = cnf.var()
                # f(x) = y  ->  (v <-> inner(y))
                for y in range(n):
                    cnf.add([-table[x][y], -v, inner[y]])
                    cnf.add([-table[x][y], v, cnf.neg(inner[y])])
                out.append(v)
        else:
            raise TypeError(f"not a concept: {c!r}")
        self._d[c] = out
        return out

    # -- paths -------------------------------------------------------------

    def path(self, p: tuple) -> list:
        """``path(p)[x][z]`` holds iff the value of ``p`` at ``x`` is ``z``."""
        got = self._path.get(p)
        if got is not None:
            return got
        n, cnf = self.n, self.cnf
        if not p:
            out = [[x == z for z in range(n)] for x in range(n)]
        elif len(p) == 1:
            out = self.feat[p[0]]
        else:
            first, rest = self.feat[p[0]], self.path(p[1:])
            out = [[cnf.var() for _ in range(n)] for _ in range(n)]
            for x in range(n):
                for w in range(n):
                    for z in range(n):
                        cnf.add([-first[x][w], cnf.neg(rest[w][z]), out[x][z]])
                        cnf.add([-first[x][w], rest[w][z], -out[x][z]])
        self._path[p] = out
        return out

    def eq(self, p: tuple, x: int, y: int):
        """Literal for "p has the same value at x and y"."""
        if x == y:
            return True
        if not p:
            return False
        if x > y:
            x, y = y, x
        key = (p, x, y)
        got = self._eq.get(key)
        if got is not None:
            return got
        cnf, pv = self.cnf, self.path(p)
        v = cnf.var()
        for z in range(self.n):
            cnf.add([cnf.neg(pv[x][z]), cnf.neg(pv[y][z]), v])
            cnf.add([-v, cnf.neg(pv[x][z]), pv[y][z]])
        self._eq[key] = v
        return v

    # -- PFDs --------------------------------------------------------------

    def premise(self, pfd: Pfd, x: int, y: int) -> list:
        """Literals whose conjunction says y can exclude x from ``pfd``."""
        over = self.d(pfd.over)
        return [over[y]] + [self.eq(p, x, y) for p in dict.fromkeys(pfd.lhs)]

    def require_pfd(self, guard, pfd: Pfd) -> None:
        """Clauses for ``guard(x) -> x in pfd`` (positive occurrence only)."""
        cnf = self.cnf
        for x in range(self.n):
            if guard[x] is False:
                continue
            for y in range(self.n):
                if x == y:
                    continue
                cnf.add([cnf.neg(guard[x])]
                        + [cnf.neg(l) for l in self.premise(pfd, x, y)]
                        + [self.eq(pfd.rhs, x, y)])

    def pfd_at(self, pfd: Pfd, x: int):
        """Literal for ``x in pfd`` (full equivalence, for negative occurrences)."""
        key = (pfd, x)
        got = self._pfd.get(key)
        if got is None:
            cnf = self.cnf
            excluders = [
                cnf.and_gate(self.premise(pfd, x, y) + [cnf.neg(self.eq(pfd.rhs, x, y))])
                for y in range(self.n) if y != x
            ]
            got = self._pfd[key] = cnf.neg(cnf.or_gate(excluders))
        return got

    def rhs_at(self, e, x: int):
        if isinstance(e, Plain):
            return self.d(e.concept)[x]
        if isinstance(e, Pfd):
            return self.pfd_at(e, x)
        return self.cnf.and_gate([self.rhs_at(e.left, x), self.rhs_at(e.right, x)])

    # -- axioms ------------------------------------------------------------

    def axiom(self, a: Axiom) -> None:
        cnf = self.cnf
        guard = self.d(a.lhs)
        for part in rhs_conjuncts(a.rhs):
            if isinstance(part, Pfd):
                self.require_pfd(guard, part)
            else:
                rhs = self.d(part.concept)
                for x in range(self.n):
                    cnf.add([cnf.neg(guard[x]), rhs[x]])

    def decode(self, model: list) -> FiniteInterpretation:
        true = {v for v in model if v > 0}
        feats = {
            f: [next(y for y, v in enumerate(row) if v in true) for row in rows]
            for f, rows in self.feat.items()
        }
        concs = {c: [x for x, v in enumerate(vs) if v in true] for c, vs in self.conc.items()}
        return build_interpretation(self.n, feats, concs)


def _search_signature(t: Terminology, *extra) -> Signature:
    sig = signature_of(t)
    for e in extra:
        sig = sig.union(signature_of(e))
    return sig


def _node_limit(limit: Optional[int]) -> Optional[int]:
    if limit is not None:
        return limit
    raw = os.environ.get(NODE_LIMIT_ENV)
    return int(raw) if raw else None


def _solve(enc: _Encoder, node_limit: Optional[int], stats: dict) -> Optional[list]:
    with Solver(name=SOLVER_NAME, bootstrap_with=enc.cnf.clauses) as s:
        if node_limit is None:
            sat = s.solve()
        else:
            s.conf_budget(node_limit)
            sat = s.solve_limited()
        stats["nodes"] = stats.get("nodes", 0) + int(s.accum_stats().get("conflicts", 0))
        if sat is None:
            raise ResourceLimitExceeded(enc.n, stats["nodes"])
        return s.get_model() if sat else None


def _find(t: Terminology, n: int, sig: Signature, goal_at_zero, node_limit, stats):
    enc = _Encoder(sig, n)
    for a in t.axioms:
        enc.axiom(a)
    # element 0 carries the goal; every model can be renamed to make it so
    enc.cnf.add([goal_at_zero(enc)])
    model = _solve(enc, node_limit, stats)
    return None if model is None else enc.decode(model)


def find_model(t: Terminology, goal: Concept, n: int, node_limit: Optional[int] = None,
               stats: Optional[dict] = None) -> Optional[FiniteInterpretation]:
    """A model of ``t`` with exactly ``n`` elements and a nonempty ``goal``, or ``None``.

    Raises :class:`ResourceLimitExceeded` when the solver's conflict budget
    (``node_limit`` or ``$DLFD_NODE_LIMIT``) runs out; that is not a "no".
    """
    if n < 1:
        raise ValueError("domain size must be positive")
    stats = {} if stats is None else stats
    sig = _search_signature(t, goal)
    model = _find(t, n, sig, lambda enc: enc.d(goal)[0], _node_limit(node_limit), stats)
    if model is None:
        return None
    if not check_terminology(model, t).ok or not eval_d(model, goal):
        raise VerificationError("solver model rejected by the evaluator")
    return model


def _iterate(bounds: SearchBounds, attempt) -> SearchOutcome:
    stats: dict = {}
    sizes = []
    start = time.perf_counter()
    try:
        for n in range(bounds.min_size, bounds.max_size + 1):
            sizes.append(n)
            model = attempt(n, stats)
            if model is not None:
                return ModelFound(sizes, stats.get("nodes", 0), time.perf_counter() - start,
                                  model=model, size=n)
    except ResourceLimitExceeded as exc:
        return ResourceLimit(sizes, exc.nodes, time.perf_counter() - start, size=exc.size)
    return NoModelUpTo(sizes, stats.get("nodes", 0), time.perf_counter() - start,
                       max_size=bounds.max_size)


def find_model_iter(t: Terminology, goal: Concept, bounds: SearchBounds = SearchBounds()) -> SearchOutcome:
    """Try sizes ``min_size..max_size`` in order; the first model wins."""
    limit = _node_limit(bounds.per_size_node_limit)
    return _iterate(bounds, lambda n, stats: find_model(t, goal, n, limit, stats))


def find_countermodel(t: Terminology, a: Axiom, n: int, node_limit: Optional[int] = None,
                      stats: Optional[dict] = None) -> Optional[FiniteInterpretation]:
    """A size-``n`` model of ``t`` containing an element of ``lhs(a)`` outside ``rhs(a)``."""
    stats = {} if stats is None else stats
    sig = _search_signature(t, a)
    if isinstance(a.rhs, Plain) and isinstance(a.rhs.concept, Bot):
        model = _find(t, n, sig, lambda enc: enc.d(a.lhs)[0], _node_limit(node_limit), stats)
    elif not has_pfd(a.rhs):
        goal = And(a.lhs, Not(_plain_concept(a.rhs)))
        model = _find(t, n, sig, lambda enc: enc.d(goal)[0], _node_limit(node_limit), stats)
    else:
        def goal_at_zero(enc):
            return enc.cnf.and_gate([enc.d(a.lhs)[0], enc.cnf.neg(enc.rhs_at(a.rhs, 0))])

        model = _find(t, n, sig, goal_at_zero, _node_limit(node_limit), stats)
    if model is None:
        return None
    if not is_finite_countermodel(model, t, a):
        raise VerificationError("solver countermodel rejected by the evaluator")
    return model


def _plain_concept(e) -> Concept:
    if isinstance(e, Plain):
        return e.concept
    return And(_plain_concept(e.left), _plain_concept(e.right))


def refute_bounded(t: Terminology, a: Axiom, bounds: SearchBounds = SearchBounds()) -> SearchOutcome:
    """Search for a finite countermodel to ``t |= a`` within ``bounds``."""
    limit = _node_limit(bounds.per_size_node_limit)
    return _iterate(bounds, lambda n, stats: find_countermodel(t, a, n, limit, stats))


# --------------------------------------------------------------------------
# Brute-force oracle


def candidate_count(sig: Signature, n: int) -> int:
    return (n**n) ** len(sig.features) * 2 ** (n * len(sig.concepts))


def enumerate_all(t: Terminology, goal: Concept, n: int, ceiling: int = DEFAULT_CEILING,
                  signature: Optional[Signature] = None) -> list:
    """Every size-``n`` model of ``t`` with a nonempty goal, in canonical order.

    Candidates are ordered lexicographically by (feature tables in sorted
    feature order, then concept extents as bit masks in sorted concept
    order).  ``signature`` may widen the vocabulary beyond ``t`` and ``goal``.
    """
    sig = _search_signature(t, goal)
    if signature is not None:
        sig = sig.union(signature)
    count = candidate_count(sig, n)
    if count > ceiling:
        raise CeilingExceeded(f"{count} candidate interpretations exceed the ceiling {ceiling}")
    features = sorted(sig.features)
    concepts = sorted(sig.concepts)
    tables = list(itertools.product(range(n), repeat=n))
    extents = [frozenset(x for x in range(n) if mask >> (n - 1 - x) & 1) for mask in range(2**n)]
    found = []
    for ftabs in itertools.product(tables, repeat=len(features)):
        feats = dict(zip(features, ftabs))
        for exts in itertools.product(extents, repeat=len(concepts)):
            # tables are in range by construction; skip re-validation
            i = FiniteInterpretation(n, feats, dict(zip(concepts, exts)))
            if not eval_d(i, goal):
                continue
            if all(not (eval_d(i, a.lhs) - eval_concept(i, a.rhs)) for a in t.axioms):
                found.append(i)
    return found
