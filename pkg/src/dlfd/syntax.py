"""Abstract syntax for DLFD terminologies and the syntactic transformations on it.

Two concept grammars are kept apart structurally:

* ``Concept`` nodes (``Prim``, ``And``, ``Not``, ``All`` plus the sugar forms
  ``Or``, ``Top``, ``Bot``) may appear anywhere.
* ``RhsConcept`` nodes (``Plain``, ``RhsAnd``, ``Pfd``) only appear on the
  right of an inclusion.  ``Not`` and ``All`` take a ``Concept`` so a path
  functional dependency can never end up under them.

Path expressions are plain tuples of feature names; the empty tuple is ``id``.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterator

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")

RESERVED_FEATURES = frozenset({"id", "all", "fd"})
RESERVED_CONCEPTS = frozenset({"Top", "Bot", "all", "fd", "id"})

Path = tuple  # tuple[str, ...]; () is the identity path


def check_feature_name(name: str) -> str:
    if not isinstance(name, str) or not NAME_RE.match(name) or name in RESERVED_FEATURES:
        raise ValueError(f"invalid feature name: {name!r}")
    return name


def check_concept_name(name: str) -> str:
    if not isinstance(name, str) or not NAME_RE.match(name) or name in RESERVED_CONCEPTS:
        raise ValueError(f"invalid concept name: {name!r}")
    return name


def make_path(steps) -> Path:
    """Normalize a path given as a tuple/list of features or a dotted string."""
    if isinstance(steps, str):
        steps = () if steps in ("", "id") else tuple(steps.split("."))
    steps = tuple(steps)
    for f in steps:
        check_feature_name(f)
    return steps


def path_to_str(p: Path) -> str:
    return ".".join(p) if p else "id"


# --------------------------------------------------------------------------
# D-grammar


class Concept:
    """Base class of left-hand-side (D-grammar) concept descriptions."""

    __slots__ = ()

    def __and__(self, other: "Concept") -> "And":
        return And(self, other)

    def __or__(self, other: "Concept") -> "Or":
        return Or(self, other)

    def __invert__(self) -> "Not":
        return Not(self)


@dataclass(frozen=True)
class Prim(Concept):
    name: str

    def __post_init__(self):
        check_concept_name(self.name)


@dataclass(frozen=True)
class And(Concept):
    left: Concept
    right: Concept


@dataclass(frozen=True)
class Not(Concept):
    arg: Concept


@dataclass(frozen=True)
class All(Concept):
    feature: str
    arg: Concept

    def __post_init__(self):
        check_feature_name(self.feature)


@dataclass(frozen=True)
class Or(Concept):
    left: Concept
    right: Concept


@dataclass(frozen=True)
class Top(Concept):
    pass


@dataclass(frozen=True)
class Bot(Concept):
    pass


SUGAR = (Or, Top, Bot)


def is_sugared(c: Concept) -> bool:
    return any(isinstance(n, SUGAR) for n in iter_concept(c))


def iter_concept(c: Concept) -> Iterator[Concept]:
    """Pre-order traversal of a D-concept."""
    stack = [c]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, (And, Or)):
            stack.append(node.right)
            stack.append(node.left)
        elif isinstance(node, (Not, All)):
            stack.append(node.arg)


def concept_depth(c: Concept) -> int:
    if isinstance(c, (And, Or)):
        return 1 + max(concept_depth(c.left), concept_depth(c.right))
    if isinstance(c, (Not, All)):
        return 1 + concept_depth(c.arg)
    return 0


# --------------------------------------------------------------------------
# E-grammar


class RhsConcept:
    """Base class of right-hand-side (E-grammar) descriptions."""

    __slots__ = ()


@dataclass(frozen=True)
class Plain(RhsConcept):
    concept: Concept


@dataclass(frozen=True)
class Pfd(RhsConcept):
    """``fd(over : lhs_1, ..., lhs_k -> rhs)``."""

    over: Concept
    lhs: tuple
    rhs: Path

    def __post_init__(self):
        lhs = tuple(make_path(p) for p in self.lhs)
        if not lhs:
            raise ValueError("a path functional dependency needs at least one left-hand path")
        object.__setattr__(self, "lhs", lhs)
        object.__setattr__(self, "rhs", make_path(self.rhs))


@dataclass(frozen=True)
class RhsAnd(RhsConcept):
    """Conjunction at the E level.

    Only built when at least one side carries a PFD; a PFD-free conjunction is
    ``Plain(And(...))``.  Keeping a single encoding makes parse/render exact.
    """

    left: RhsConcept
    right: RhsConcept

    def __post_init__(self):
        if isinstance(self.left, Plain) and isinstance(self.right, Plain):
            raise ValueError("PFD-free conjunction must be written as Plain(And(...))")


def as_rhs(e) -> RhsConcept:
    return Plain(e) if isinstance(e, Concept) else e


def conj(*parts) -> RhsConcept:
    """Left-folded conjunction, merging adjacent PFD-free parts into ``Plain``."""
    if not parts:
        raise ValueError("empty conjunction")
    acc = as_rhs(parts[0])
    for p in parts[1:]:
        p = as_rhs(p)
        if isinstance(acc, Plain) and isinstance(p, Plain):
            acc = Plain(And(acc.concept, p.concept))
        else:
            acc = RhsAnd(acc, p)
    return acc


def iter_rhs(e: RhsConcept) -> Iterator[RhsConcept]:
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, RhsAnd):
            stack.append(node.right)
            stack.append(node.left)


def rhs_conjuncts(e: RhsConcept) -> list:
    """Leaves (``Plain`` and ``Pfd`` nodes) of an E-level conjunction, in order."""
    return [n for n in iter_rhs(e) if not isinstance(n, RhsAnd)]


def has_pfd(e: RhsConcept) -> bool:
    return any(isinstance(n, Pfd) for n in iter_rhs(e))


# --------------------------------------------------------------------------
# Axioms and terminologies


@dataclass(frozen=True)
class Axiom:
    lhs: Concept
    rhs: RhsConcept

    def __post_init__(self):
        if not isinstance(self.lhs, Concept):
            raise TypeError("axiom left-hand side must be a D-concept")
        object.__setattr__(self, "rhs", as_rhs(self.rhs))


@dataclass(frozen=True)
class Terminology:
    axioms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "axioms", tuple(self.axioms))

    def __len__(self):
        return len(self.axioms)

    def __iter__(self):
        return iter(self.axioms)

    def __getitem__(self, i):
        return self.axioms[i]


@dataclass(frozen=True)
class Signature:
    concepts: frozenset = field(default_factory=frozenset)
    features: frozenset = field(default_factory=frozenset)
    max_path_len: int = 0

    def union(self, other: "Signature") -> "Signature":
        return Signature(
            self.concepts | other.concepts,
            self.features | other.features,
            max(self.max_path_len, other.max_path_len),
        )


class ConstraintKind(enum.Enum):
    PFD = "pfd"
    SIMPLE = "simple"


def classify_axiom(a: Axiom) -> ConstraintKind:
    return ConstraintKind.PFD if has_pfd(a.rhs) else ConstraintKind.SIMPLE


# --------------------------------------------------------------------------
# Signatures


def _collect_concept(c: Concept, concepts: set, features: set) -> None:
    for n in iter_concept(c):
        if isinstance(n, Prim):
            concepts.add(n.name)
        elif isinstance(n, All):
            features.add(n.feature)


def _collect_rhs(e: RhsConcept, concepts: set, features: set) -> int:
    longest = 0
    for n in iter_rhs(e):
        if isinstance(n, Plain):
            _collect_concept(n.concept, concepts, features)
        elif isinstance(n, Pfd):
            _collect_concept(n.over, concepts, features)
            for p in n.lhs + (n.rhs,):
                features.update(p)
                longest = max(longest, len(p))
    return longest


def signature_of(t) -> Signature:
    """Names occurring in a terminology, axiom, or (rhs) concept."""
    concepts: set = set()
    features: set = set()
    longest = 0
    if isinstance(t, Terminology):
        items = [(a.lhs, a.rhs) for a in t.axioms]
    elif isinstance(t, Axiom):
        items = [(t.lhs, t.rhs)]
    elif isinstance(t, Concept):
        items = [(t, None)]
    elif isinstance(t, RhsConcept):
        items = [(None, t)]
    else:
        raise TypeError(f"cannot take the signature of {type(t).__name__}")
    for lhs, rhs in items:
        if lhs is not None:
            _collect_concept(lhs, concepts, features)
        if rhs is not None:
            longest = max(longest, _collect_rhs(rhs, concepts, features))
    return Signature(frozenset(concepts), frozenset(features), longest)


# --------------------------------------------------------------------------
# Sugar elimination

FRESH_ANCHOR = "_c0"


def desugar_concept(c: Concept, anchor: str | None = None) -> Concept:
    """Rewrite ``Or``/``Top``/``Bot`` with the core constructors.

    ``Top`` and ``Bot`` become ``~(P & ~P)`` and ``P & ~P`` for the anchor
    name ``P``.  Without an explicit anchor the least concept name of ``c`` is
    used, or ``_c0`` when ``c`` mentions none.
    """
    if anchor is None:
        names = sorted(n.name for n in iter_concept(c) if isinstance(n, Prim))
        anchor = names[0] if names else FRESH_ANCHOR
    p = Prim(anchor)
    bot = And(p, Not(p))

    def go(n: Concept) -> Concept:
        if isinstance(n, Prim):
            return n
        if isinstance(n, And):
            return And(go(n.left), go(n.right))
        if isinstance(n, Not):
            return Not(go(n.arg))
        if isinstance(n, All):
            return All(n.feature, go(n.arg))
        if isinstance(n, Or):
            return Not(And(Not(go(n.left)), Not(go(n.right))))
        if isinstance(n, Top):
            return Not(bot)
        if isinstance(n, Bot):
            return bot
        raise TypeError(f"not a concept: {n!r}")

    return go(c)


def desugar_rhs(e: RhsConcept, anchor: str | None = None) -> RhsConcept:
    if isinstance(e, Plain):
        return Plain(desugar_concept(e.concept, anchor))
    if isinstance(e, Pfd):
        return Pfd(desugar_concept(e.over, anchor), e.lhs, e.rhs)
    return RhsAnd(desugar_rhs(e.left, anchor), desugar_rhs(e.right, anchor))


def terminology_anchor(t: Terminology) -> str:
    names = sorted(signature_of(t).concepts)
    return names[0] if names else FRESH_ANCHOR


def desugar_terminology(t: Terminology) -> Terminology:
    anchor = terminology_anchor(t)
    return Terminology(
        Axiom(desugar_concept(a.lhs, anchor), desugar_rhs(a.rhs, anchor)) for a in t.axioms
    )


# --------------------------------------------------------------------------
# Asymmetric PFDs


def union_name(a: str, b: str) -> str:
    x, y = sorted((a, b))
    return f"_u_{x}_{y}"


def desugar_asymmetric_pfds(t: Terminology) -> Terminology:
    """Replace ``L <= fd(D : ps -> p)`` (``L != D``, both primitive) by a shared union.

    Each unordered pair ``{L, D}`` gets one union concept ``U``; the two
    subsumptions ``L <= U`` and ``D <= U`` are emitted where the pair first
    occurs and every PFD on the pair becomes ``U <= fd(U : ps -> p)``.
    """
    out = []
    seen = set()
    for a in t.axioms:
        rhs = a.rhs
        if (
            isinstance(rhs, Pfd)
            and isinstance(a.lhs, Prim)
            and isinstance(rhs.over, Prim)
            and a.lhs.name != rhs.over.name
        ):
            u = union_name(a.lhs.name, rhs.over.name)
            if u not in seen:
                seen.add(u)
                out.append(Axiom(a.lhs, Plain(Prim(u))))
                out.append(Axiom(rhs.over, Plain(Prim(u))))
            out.append(Axiom(Prim(u), Pfd(Prim(u), rhs.lhs, rhs.rhs)))
        else:
            out.append(a)
    return Terminology(out)


def non_primitive_pfds(t: Terminology) -> list:
    """Indices of axioms whose top-level PFD cannot be symmetrized (non-primitive sides)."""
    return [
        k
        for k, a in enumerate(t.axioms)
        if isinstance(a.rhs, Pfd) and not (isinstance(a.lhs, Prim) and isinstance(a.rhs.over, Prim))
    ]

