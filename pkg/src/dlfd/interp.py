"""Finite interpretations and an exact evaluator for DLFD descriptions.

Elements are the integers ``0..n-1``.  Features are total tables, concepts are
frozensets.  The PFD clause is evaluated by its definition: ``x`` is in
``fd(D : p1..pk -> p)`` iff every ``y`` in ``D`` agreeing with ``x`` on all
``pi`` also agrees on ``p``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, Optional

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
    RhsAnd,
    Terminology,
    Top,
    path_to_str,
    rhs_conjuncts,
    signature_of,
)


class InterpretationError(ValueError):
    """An interpretation payload is not a valid finite interpretation."""


class UnknownNameError(KeyError):
    """A description mentions a feature or concept the interpretation lacks."""

    def __str__(self):
        return self.args[0] if self.args else "unknown name"


@dataclass(frozen=True, eq=False)
class FiniteInterpretation:
    n: int
    features: Mapping[str, tuple]
    concepts: Mapping[str, frozenset]

    @property
    def domain(self) -> range:
        return range(self.n)

    def __eq__(self, other):
        if not isinstance(other, FiniteInterpretation):
            return NotImplemented
        return (
            self.n == other.n
            and dict(self.features) == dict(other.features)
            and dict(self.concepts) == dict(other.concepts)
        )

    def __hash__(self):
        return hash((self.n, tuple(sorted(self.features.items())),
                     tuple(sorted((k, tuple(sorted(v))) for k, v in self.concepts.items()))))

    def feature(self, f: str) -> tuple:
        try:
            return self.features[f]
        except KeyError:
            raise UnknownNameError(f"unknown feature {f!r}") from None

    def concept(self, c: str) -> frozenset:
        try:
            return self.concepts[c]
        except KeyError:
            raise UnknownNameError(f"unknown concept {c!r}") from None

    def with_concepts(self, extra: Mapping[str, frozenset]) -> "FiniteInterpretation":
        merged = dict(self.concepts)
        merged.update({k: frozenset(v) for k, v in extra.items()})
        return build_interpretation(self.n, self.features, merged)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "features": {f: list(self.features[f]) for f in sorted(self.features)},
            "concepts": {c: sorted(self.concepts[c]) for c in sorted(self.concepts)},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True) + "\n"


def build_interpretation(n: int, features: Mapping = None, concepts: Mapping = None) -> FiniteInterpretation:
    """Validate and freeze an interpretation of size ``n``.

    Every feature table must be total: length exactly ``n`` with entries in
    ``0..n-1``.  Concept extents must be subsets of the domain.
    """
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise InterpretationError(f"domain size must be a positive integer, got {n!r}")
    feats = {}
    for f, table in (features or {}).items():
        table = tuple(table)
        if len(table) != n:
            raise InterpretationError(f"feature {f!r}: table length {len(table)} != {n}")
        for x, v in enumerate(table):
            if isinstance(v, bool) or not isinstance(v, int) or not 0 <= v < n:
                raise InterpretationError(f"feature {f!r}: entry {v!r} at {x} out of range")
        feats[f] = table
    concs = {}
    for c, ext in (concepts or {}).items():
        ext = frozenset(ext)
        for x in ext:
            if isinstance(x, bool) or not isinstance(x, int) or not 0 <= x < n:
                raise InterpretationError(f"concept {c!r}: element {x!r} out of range")
        concs[c] = ext
    return FiniteInterpretation(n, MappingProxyType(feats), MappingProxyType(concs))


def interpretation_from_dict(data: Mapping) -> FiniteInterpretation:
    if not isinstance(data, Mapping) or "n" not in data:
        raise InterpretationError("model must be an object with an 'n' field")
    feats = data.get("features", {})
    concs = data.get("concepts", {})
    if not isinstance(feats, Mapping) or not isinstance(concs, Mapping):
        raise InterpretationError("'features' and 'concepts' must be objects")
    for c, ext in concs.items():
        if not isinstance(ext, list) or len(set(ext)) != len(ext):
            raise InterpretationError(f"concept {c!r}: extent must be a list without duplicates")
    return build_interpretation(data["n"], feats, concs)


def load_interpretation(path) -> FiniteInterpretation:
    with open(path, encoding="utf-8") as fh:
        return interpretation_from_dict(json.load(fh))


def dump_interpretation(i: FiniteInterpretation, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(i.to_json())


def complete_concepts(i: FiniteInterpretation, t, default_empty: bool = False) -> FiniteInterpretation:
    """Check that ``i`` covers the signature of ``t``.

    Missing features are always an error.  Missing concepts are an error
    unless ``default_empty`` is set, in which case they get the empty extent.
    """
    sig = signature_of(t)
    missing_f = sorted(sig.features - set(i.features))
    if missing_f:
        raise UnknownNameError(f"model lacks feature(s): {', '.join(missing_f)}")
    missing_c = sorted(sig.concepts - set(i.concepts))
    if not missing_c:
        return i
    if not default_empty:
        raise UnknownNameError(f"model lacks concept(s): {', '.join(missing_c)}")
    return i.with_concepts({c: frozenset() for c in missing_c})


# --------------------------------------------------------------------------
# Evaluation


def eval_path(i: FiniteInterpretation, p, x: int) -> int:
    for f in p:
        x = i.feature(f)[x]
    return x


def path_table(i: FiniteInterpretation, p) -> tuple:
    """Value of path ``p`` at every element."""
    table = tuple(range(i.n))
    for f in p:
        step = i.feature(f)
        table = tuple(step[v] for v in table)
    return table


def eval_d(i: FiniteInterpretation, c: Concept) -> frozenset:
    if isinstance(c, Prim):
        return i.concept(c.name)
    if isinstance(c, And):
        return eval_d(i, c.left) & eval_d(i, c.right)
    if isinstance(c, Not):
        return frozenset(i.domain) - eval_d(i, c.arg)
    if isinstance(c, All):
        inner = eval_d(i, c.arg)
        table = i.feature(c.feature)
        return frozenset(x for x in i.domain if table[x] in inner)
    if isinstance(c, Or):
        return eval_d(i, c.left) | eval_d(i, c.right)
    if isinstance(c, Top):
        return frozenset(i.domain)
    if isinstance(c, Bot):
        return frozenset()
    raise TypeError(f"not a concept: {c!r}")


def pfd_violation(i: FiniteInterpretation, pfd: Pfd, x: int) -> Optional[int]:
    """Least ``y`` in the quantified concept that excludes ``x`` from ``pfd``, if any."""
    over = eval_d(i, pfd.over)
    lhs = [path_table(i, p) for p in pfd.lhs]
    rhs = path_table(i, pfd.rhs)
    for y in sorted(over):
        if all(t[x] == t[y] for t in lhs) and rhs[x] != rhs[y]:
            return y
    return None


def eval_pfd(i: FiniteInterpretation, pfd: Pfd) -> frozenset:
    over = sorted(eval_d(i, pfd.over))
    lhs = [path_table(i, p) for p in pfd.lhs]
    rhs = path_table(i, pfd.rhs)
    return frozenset(
        x
        for x in i.domain
        if all(rhs[x] == rhs[y] for y in over if all(t[x] == t[y] for t in lhs))
    )


def eval_concept(i: FiniteInterpretation, e) -> frozenset:
    """Extension of a D-concept or an E-level right-hand side."""
    if isinstance(e, Concept):
        return eval_d(i, e)
    if isinstance(e, Plain):
        return eval_d(i, e.concept)
    if isinstance(e, Pfd):
        return eval_pfd(i, e)
    if isinstance(e, RhsAnd):
        return eval_concept(i, e.left) & eval_concept(i, e.right)
    raise TypeError(f"not a description: {e!r}")


# --------------------------------------------------------------------------
# Checking


@dataclass(frozen=True)
class ViolationWitness:
    """Why an axiom fails: the least offending element, and for a PFD the partner."""

    axiom_index: int
    kind: str  # "simple" or "pfd"
    x: int
    y: Optional[int] = None
    pfd: Optional[Pfd] = None
    agreeing: tuple = ()  # (path, shared value) for each left-hand path
    disagreeing: tuple = ()  # (path, value at x, value at y)

    def replay(self, i: FiniteInterpretation, a: Axiom) -> bool:
        """Re-derive the violation from scratch."""
        if self.x not in eval_d(i, a.lhs) or self.x in eval_concept(i, a.rhs):
            return False
        if self.kind == "simple":
            return True
        if self.y not in eval_d(i, self.pfd.over):
            return False
        agree = all(eval_path(i, p, self.x) == eval_path(i, p, self.y) for p in self.pfd.lhs)
        return agree and eval_path(i, self.pfd.rhs, self.x) != eval_path(i, self.pfd.rhs, self.y)

    def to_dict(self) -> dict:
        d = {"axiom": self.axiom_index, "kind": self.kind, "x": self.x}
        if self.kind == "pfd":
            d["y"] = self.y
            d["agreeing"] = [[path_to_str(p), v] for p, v in self.agreeing]
            p, vx, vy = self.disagreeing
            d["disagreeing"] = [path_to_str(p), vx, vy]
        return d

    def describe(self) -> str:
        if self.kind == "simple":
            return f"element {self.x} is in the left-hand side but not the right-hand side"
        p, vx, vy = self.disagreeing
        agree = ", ".join(f"{path_to_str(q)}={v}" for q, v in self.agreeing)
        return (f"elements {self.x},{self.y} agree on {agree} "
                f"but {path_to_str(p)} gives {vx} vs {vy}")


def _witness(i: FiniteInterpretation, index: int, a: Axiom, x: int) -> ViolationWitness:
    for part in rhs_conjuncts(a.rhs):
        if isinstance(part, Plain):
            if x not in eval_d(i, part.concept):
                return ViolationWitness(index, "simple", x)
        else:
            y = pfd_violation(i, part, x)
            if y is not None:
                agreeing = tuple((p, eval_path(i, p, x)) for p in part.lhs)
                bad = (part.rhs, eval_path(i, part.rhs, x), eval_path(i, part.rhs, y))
                return ViolationWitness(index, "pfd", x, y, part, agreeing, bad)
    raise AssertionError("element excluded from the right-hand side by no conjunct")


def check_axiom(i: FiniteInterpretation, a: Axiom, index: int = 0) -> Optional[ViolationWitness]:
    """``None`` if ``i`` satisfies ``a``, otherwise the lexicographically least witness."""
    bad = eval_d(i, a.lhs) - eval_concept(i, a.rhs)
    if not bad:
        return None
    return _witness(i, index, a, min(bad))


@dataclass(frozen=True)
class CheckReport:
    statuses: tuple  # per axiom: None when satisfied, else a ViolationWitness

    @property
    def ok(self) -> bool:
        return all(s is None for s in self.statuses)

    @property
    def violations(self) -> list:
        return [s for s in self.statuses if s is not None]

    def to_dict(self) -> dict:
        return {
            "satisfied": self.ok,
            "axioms": [
                {"index": k, "status": "satisfied"} if s is None
                else {"index": k, "status": "violated", "witness": s.to_dict()}
                for k, s in enumerate(self.statuses)
            ],
        }


def check_terminology(i: FiniteInterpretation, t: Terminology,
                      default_empty_concepts: bool = False) -> CheckReport:
    i = complete_concepts(i, t, default_empty_concepts)
    return CheckReport(tuple(check_axiom(i, a, k) for k, a in enumerate(t.axioms)))


def satisfies(i: FiniteInterpretation, t: Terminology) -> bool:
    """Short-circuiting version of ``check_terminology(i, t).ok``."""
    for a in t.axioms:
        if not eval_d(i, a.lhs) <= eval_concept(i, a.rhs):
            return False
    return True


def is_finite_countermodel(i: FiniteInterpretation, t: Terminology, a: Axiom) -> bool:
    """True iff ``i`` is a model of ``t`` that violates ``a``."""
    if not check_terminology(i, t).ok:
        return False
    complete_concepts(i, Terminology([a]))
    return check_axiom(i, a) is not None


def to_dot(i: FiniteInterpretation, hide_selfloops: bool = False) -> str:
    """Graphviz rendering: one node per element, one labeled edge per feature value."""
    lines = ["digraph model {"]
    for x in i.domain:
        labels = [c for c in sorted(i.concepts) if x in i.concepts[c]]
        text = f"{x}: {', '.join(labels)}" if labels else str(x)
        lines.append(f'  n{x} [label="{text}"];')
    for f in sorted(i.features):
        for x, y in enumerate(i.features[f]):
            if hide_selfloops and x == y:
                continue
            lines.append(f'  n{x} -> n{y} [label="{f}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
