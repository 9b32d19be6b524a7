"""Term syntax trees, their metrics, printing, and the two desugarings.

A term denotes a nonnegative real for every graph and assignment of its
free variables to vertices.  Aggregations bind one fresh variable each:

    sum v . body     max v . body     min v . body     mean v . body
    lmean a~v . body   (average of body over the neighbors of anchor a)

Local means keep their anchor variable free; only `v` is bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .connectives import Connective, Registry
from .errors import InputError

SUM, MAX, MIN, MEAN = "sum", "max", "min", "mean"
AGG_KINDS = (SUM, MAX, MIN, MEAN)


@dataclass(frozen=True)
class Const:
    value: float

    def __post_init__(self):
        if not (self.value >= 0):
            raise InputError(f"constants must be >= 0, got {self.value}")


@dataclass(frozen=True)
class Edge:
    x: str
    y: str


@dataclass(frozen=True)
class Eq:
    x: str
    y: str


@dataclass(frozen=True)
class Apply:
    conn: Connective
    args: tuple["Term", ...]

    def __post_init__(self):
        if len(self.args) != self.conn.arity:
            raise InputError(
                f"{self.conn.name} expects {self.conn.arity} arguments, "
                f"got {len(self.args)}"
            )


@dataclass(frozen=True)
class Agg:
    kind: str
    var: str
    body: "Term"

    def __post_init__(self):
        if self.kind not in AGG_KINDS:
            raise InputError(f"unknown aggregation kind {self.kind!r}")


@dataclass(frozen=True)
class LMean:
    anchor: str
    var: str
    body: "Term"

    def __post_init__(self):
        if self.anchor == self.var:
            raise InputError("lmean anchor and bound variable must differ")


Term = Union[Const, Edge, Eq, Apply, Agg, LMean]


@dataclass(frozen=True)
class TermMetrics:
    free_vars: tuple[str, ...]
    depth: int
    width: int


def _free_walk(t: Term, bound: frozenset[str], seen: dict[str, None]) -> None:
    if isinstance(t, Const):
        return
    if isinstance(t, (Edge, Eq)):
        for v in (t.x, t.y):
            if v not in bound:
                seen.setdefault(v, None)
        return
    if isinstance(t, Apply):
        for a in t.args:
            _free_walk(a, bound, seen)
        return
    if isinstance(t, Agg):
        _free_walk(t.body, bound | {t.var}, seen)
        return
    if isinstance(t, LMean):
        if t.anchor not in bound:
            seen.setdefault(t.anchor, None)
        _free_walk(t.body, bound | {t.var}, seen)
        return
    raise InputError(f"not a term: {t!r}")


def free_vars(t: Term) -> tuple[str, ...]:
    """Free variables in order of first use."""
    seen: dict[str, None] = {}
    _free_walk(t, frozenset(), seen)
    return tuple(seen)


def _depth(t: Term) -> int:
    if isinstance(t, (Const, Edge, Eq)):
        return 0
    if isinstance(t, Apply):
        return max((_depth(a) for a in t.args), default=0)
    return 1 + _depth(t.body)


def all_vars(t: Term) -> set[str]:
    if isinstance(t, Const):
        return set()
    if isinstance(t, (Edge, Eq)):
        return {t.x, t.y}
    if isinstance(t, Apply):
        out: set[str] = set()
        for a in t.args:
            out |= all_vars(a)
        return out
    if isinstance(t, Agg):
        return {t.var} | all_vars(t.body)
    if isinstance(t, LMean):
        return {t.anchor, t.var} | all_vars(t.body)
    raise InputError(f"not a term: {t!r}")


def metrics(t: Term) -> TermMetrics:
    """Free variables (first-use order), aggregation depth, variable width."""
    return TermMetrics(free_vars(t), _depth(t), len(all_vars(t)))


def validate(t: Term, scope: frozenset[str] = frozenset()) -> None:
    """Reject shadowing and malformed binders (parser output is pre-checked;
    call this on hand-built trees)."""
    if isinstance(t, (Const, Edge, Eq)):
        return
    if isinstance(t, Apply):
        for a in t.args:
            validate(a, scope)
        return
    if isinstance(t, Agg):
        if t.var in scope:
            raise InputError(f"variable {t.var!r} shadows an enclosing binder")
        validate(t.body, scope | {t.var})
        return
    if isinstance(t, LMean):
        if t.var in scope:
            raise InputError(f"variable {t.var!r} shadows an enclosing binder")
        validate(t.body, scope | {t.var})
        return
    raise InputError(f"not a term: {t!r}")


def _fmt_number(v: float) -> str:
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def print_term(t: Term) -> str:
    """Render to the concrete syntax (parses back to an equal tree)."""
    if isinstance(t, Const):
        return _fmt_number(t.value)
    if isinstance(t, Edge):
        return f"E({t.x}, {t.y})"
    if isinstance(t, Eq):
        return f"eq({t.x}, {t.y})"
    if isinstance(t, Apply):
        inner = ", ".join(print_term(a) for a in t.args)
        return f"{t.conn.name}({inner})"
    if isinstance(t, Agg):
        return f"{t.kind} {t.var} . {print_term(t.body)}"
    if isinstance(t, LMean):
        return f"lmean {t.anchor}~{t.var} . {print_term(t.body)}"
    raise InputError(f"not a term: {t!r}")


class _FreshNames:
    def __init__(self, taken: set[str]):
        self.taken = set(taken)
        self.counter = 0

    def new(self) -> str:
        while True:
            self.counter += 1
            name = f"_m{self.counter}"
            if name not in self.taken:
                self.taken.add(name)
                return name


def desugar_min(t: Term, registry: Registry) -> Term:
    """Replace every `min v . b` using the zero-gate construction.

    min v.b == mul(indz(max v. indz(b)), inv(max v. inv(b))): the first
    factor handles "some b is zero", the second inverts the max of the
    inverses; together they reproduce the minimum on every graph.
    """
    mul = registry.get("mul", 2)
    inv = registry.get("inv")
    zgate = registry.get("indz")

    def walk(node: Term) -> Term:
        if isinstance(node, (Const, Edge, Eq)):
            return node
        if isinstance(node, Apply):
            return Apply(node.conn, tuple(walk(a) for a in node.args))
        if isinstance(node, LMean):
            return LMean(node.anchor, node.var, walk(node.body))
        if isinstance(node, Agg):
            body = walk(node.body)
            if node.kind != MIN:
                return Agg(node.kind, node.var, body)
            left = Apply(zgate, (Agg(MAX, node.var, Apply(zgate, (body,))),))
            right = Apply(inv, (Agg(MAX, node.var, Apply(inv, (body,))),))
            return Apply(mul, (left, right))
        raise InputError(f"not a term: {node!r}")

    return walk(t)


def desugar_means(t: Term, registry: Registry) -> Term:
    """Replace mean and lmean by sums against inverted counts.

    mean v.b        ->  sum v . mul(inv(sum w . 1), b)
    lmean a~v.b     ->  sum v . mul(inv(sum w . E(a, w)), mul(E(a, v), b))

    The inverse maps 0 to 0, so an anchor without neighbors still yields 0.
    """
    mul = registry.get("mul", 2)
    inv = registry.get("inv")
    fresh = _FreshNames(all_vars(t))

    def walk(node: Term) -> Term:
        if isinstance(node, (Const, Edge, Eq)):
            return node
        if isinstance(node, Apply):
            return Apply(node.conn, tuple(walk(a) for a in node.args))
        if isinstance(node, Agg):
            body = walk(node.body)
            if node.kind != MEAN:
                return Agg(node.kind, node.var, body)
            w = fresh.new()
            count = Agg(SUM, w, Const(1.0))
            return Agg(SUM, node.var, Apply(mul, (Apply(inv, (count,)), body)))
        if isinstance(node, LMean):
            body = walk(node.body)
            w = fresh.new()
            degree = Agg(SUM, w, Edge(node.anchor, w))
            gated = Apply(mul, (Edge(node.anchor, node.var), body))
            return Agg(
                SUM, node.var, Apply(mul, (Apply(inv, (degree,)), gated))
            )
        raise InputError(f"not a term: {node!r}")

    return walk(t)
