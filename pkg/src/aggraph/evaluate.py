"""Term evaluation on concrete graphs.

`eval_term` is the production evaluator: compensated summation, plus a
sound domain restriction for aggregates whose body is forced to zero off
the neighborhood of an already-bound vertex (products of edge indicators
and similar).  That pruning never changes a value, only skips vertices
whose body value is provably 0, and `eval_reference` exists to prove it:
a deliberately plain quadratic-loop evaluator used as the oracle in tests.

Worst case, evaluation visits n**depth body evaluations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import EvaluationError, InputError
from .graphs import Graph
from .terms import (
    Agg, Apply, Const, Edge, Eq, LMean, MAX, MEAN, MIN, SUM, Term, free_vars,
)


@dataclass(frozen=True)
class Environment:
    """A graph plus vertices for the term's free variables, in metrics order."""

    graph: Graph
    assignment: tuple[int, ...] = ()


def eval_term(t: Term, env: Environment, *, cache: bool = False) -> float:
    fv = free_vars(t)
    if len(fv) != len(env.assignment):
        raise InputError(
            f"term has free variables {list(fv)}, assignment has "
            f"{len(env.assignment)} entries"
        )
    n = env.graph.n
    if n == 0:
        raise InputError("evaluation needs a graph with at least one vertex")
    for v in env.assignment:
        if not (0 <= v < n):
            raise InputError(f"assigned vertex {v} out of range for n={n}")
    ev = _Evaluator(env.graph, cache)
    return ev.run(t, dict(zip(fv, env.assignment)))


class _Evaluator:
    def __init__(self, graph: Graph, cache: bool):
        self.g = graph
        self.cache: dict | None = {} if cache else None
        self._vars: dict[int, frozenset[str]] = {}

    def vars_of(self, t: Term) -> frozenset[str]:
        got = self._vars.get(id(t))
        if got is None:
            if isinstance(t, Const):
                got = frozenset()
            elif isinstance(t, (Edge, Eq)):
                got = frozenset((t.x, t.y))
            elif isinstance(t, Apply):
                got = frozenset().union(*(self.vars_of(a) for a in t.args))
            elif isinstance(t, Agg):
                got = self.vars_of(t.body) | {t.var}
            else:
                got = self.vars_of(t.body) | {t.anchor, t.var}
            self._vars[id(t)] = got
        return got

    def run(self, t: Term, bind: dict[str, int]) -> float:
        if isinstance(t, Const):
            return t.value
        if isinstance(t, Edge):
            return 1.0 if self.g.has_edge(self._lookup(t.x, bind),
                                          self._lookup(t.y, bind)) else 0.0
        if isinstance(t, Eq):
            return 1.0 if self._lookup(t.x, bind) == self._lookup(t.y, bind) else 0.0
        if isinstance(t, Apply):
            if t.conn.zero_forcing:
                vals = []
                for a in t.args:
                    v = self.run(a, bind)
                    if v == 0.0:
                        return 0.0
                    vals.append(v)
                return t.conn.eval(vals)
            return t.conn.eval([self.run(a, bind) for a in t.args])
        if isinstance(t, Agg):
            return self._agg(t, bind)
        if isinstance(t, LMean):
            anchor = self._lookup(t.anchor, bind)
            neigh = self.g.neighbors(anchor)
            if not neigh:
                return 0.0
            total = math.fsum(self._bound_run(t.body, bind, t.var, v)
                              for v in sorted(neigh))
            return total / len(neigh)
        raise EvaluationError(f"not a term: {t!r}")

    def _lookup(self, name: str, bind: dict[str, int]) -> int:
        try:
            return bind[name]
        except KeyError:
            raise EvaluationError(f"variable {name!r} is not bound") from None

    def _bound_run(self, body: Term, bind: dict[str, int], var: str, v: int) -> float:
        bind[var] = v
        try:
            return self.run(body, bind)
        finally:
            del bind[var]

    def _agg(self, t: Agg, bind: dict[str, int]) -> float:
        n = self.g.n
        if n == 0:
            raise EvaluationError("cannot aggregate over an empty vertex set")

        if self.cache is not None:
            key_vars = sorted(self.vars_of(t) & bind.keys())
            key = (id(t), tuple(bind[x] for x in key_vars))
            hit = self.cache.get(key)
            if hit is not None:
                return hit

        val = self._agg_raw(t, bind)
        if self.cache is not None:
            self.cache[key] = val
        return val

    def _agg_raw(self, t: Agg, bind: dict[str, int]) -> float:
        n = self.g.n
        body, var, kind = t.body, t.var, t.kind

        quick = self._edge_eq_peephole(body, var, bind, kind)
        if quick is None:
            quick = self._forced_product_peephole(body, var, bind, kind)
        if quick is not None:
            return quick

        domain = self._restricted_domain(body, var, bind)
        if domain is not None and self._hoisted_zero(body, var, bind):
            domain = set()

        if kind == SUM or kind == MEAN:
            if domain is None:
                total = math.fsum(self._bound_run(body, bind, var, v)
                                  for v in range(n))
            else:
                total = math.fsum(self._bound_run(body, bind, var, v)
                                  for v in sorted(domain))
            return total / n if kind == MEAN else total
        if kind == MAX:
            if domain is None:
                return max(self._bound_run(body, bind, var, v) for v in range(n))
            best = 0.0  # vertices outside the domain contribute 0
            for v in sorted(domain):
                val = self._bound_run(body, bind, var, v)
                if val > best:
                    best = val
            return best
        if kind == MIN:
            if domain is None:
                return min(self._bound_run(body, bind, var, v) for v in range(n))
            if len(domain) < n:
                return 0.0  # some vertex off the domain gives a 0 body
            return min(self._bound_run(body, bind, var, v) for v in sorted(domain))
        raise EvaluationError(f"unknown aggregation {kind!r}")

    def _edge_eq_peephole(self, body, var, bind, kind):
        """Aggregates of a bare edge or equality atom come straight from
        degrees, avoiding adjacency set construction on large graphs."""
        n = self.g.n
        if isinstance(body, Edge):
            if body.x == var and body.y == var:
                return {SUM: 0.0, MEAN: 0.0, MAX: 0.0, MIN: 0.0}[kind]
            other = None
            if body.x == var and body.y != var:
                other = body.y
            elif body.y == var and body.x != var:
                other = body.x
            if other is None or other not in bind:
                return None
            deg = self.g.degree(bind[other])
            if kind == SUM:
                return float(deg)
            if kind == MEAN:
                return deg / n
            if kind == MAX:
                return 1.0 if deg > 0 else 0.0
            return 0.0  # E(x, x) = 0 shows up for v = x, so the min is 0
        if isinstance(body, Eq):
            if body.x == var and body.y == var:
                return {SUM: float(n), MEAN: 1.0, MAX: 1.0, MIN: 1.0}[kind]
            other = None
            if body.x == var and body.y != var:
                other = body.y
            elif body.y == var and body.x != var:
                other = body.x
            if other is None or other not in bind:
                return None
            if kind == SUM:
                return 1.0
            if kind == MEAN:
                return 1.0 / n
            if kind == MAX:
                return 1.0
            return 1.0 if n == 1 else 0.0
        return None

    def _forced_product_peephole(self, body, var, bind, kind):
        """Zero-forcing application over atoms of the bound variable.

        When every var-dependent argument is an edge/equality atom against
        an already-bound vertex, the body takes one common value on the
        intersection of the atom constraint sets and 0 off it, so the
        aggregate reduces to one connective evaluation and a set count.
        """
        if not (isinstance(body, Apply) and body.conn.zero_forcing):
            return None
        n = self.g.n
        template: list[float] = []
        constraints: list = []
        for a in body.args:
            if var not in self.vars_of(a):
                v = self.run(a, bind)
                if v == 0.0:
                    return {SUM: 0.0, MEAN: 0.0, MAX: 0.0, MIN: 0.0}[kind]
                template.append(v)
            elif isinstance(a, Edge):
                if a.x == var and a.y == var:
                    return {SUM: 0.0, MEAN: 0.0, MAX: 0.0, MIN: 0.0}[kind]
                other = a.y if a.x == var else a.x
                if other not in bind:
                    return None
                constraints.append(self.g.neighbors(bind[other]))
                template.append(1.0)
            elif isinstance(a, Eq):
                if a.x == var and a.y == var:
                    template.append(1.0)
                    continue
                other = a.y if a.x == var else a.x
                if other not in bind:
                    return None
                constraints.append({bind[other]})
                template.append(1.0)
            else:
                return None
        if constraints:
            hits = set(constraints[0])
            for c in constraints[1:]:
                hits &= c
            count = len(hits)
        else:
            count = n
        value = body.conn.eval(template) if count else 0.0
        if kind == SUM:
            return count * value
        if kind == MEAN:
            return count * value / n
        if kind == MAX:
            return value if count else 0.0
        return value if count == n else 0.0

    def _restricted_domain(self, body, var, bind) -> set[int] | None:
        """Vertices where the body can be nonzero, or None for "all"."""
        constraints: list[set[int]] = []
        empty = False

        def collect(node):
            nonlocal empty
            if isinstance(node, Edge):
                if node.x == var and node.y == var:
                    empty = True
                elif node.x == var and node.y in bind:
                    constraints.append(self.g.neighbors(bind[node.y]))
                elif node.y == var and node.x in bind:
                    constraints.append(self.g.neighbors(bind[node.x]))
            elif isinstance(node, Eq):
                if node.x == var and node.y in bind:
                    constraints.append({bind[node.y]})
                elif node.y == var and node.x in bind:
                    constraints.append({bind[node.x]})
            elif isinstance(node, Apply) and node.conn.zero_forcing:
                for a in node.args:
                    collect(a)
            elif isinstance(node, Agg):
                # An all-zero body makes every aggregate kind 0, so a
                # forced atom below a binder still restricts, unless the
                # binder shadows the variable.
                if node.var != var:
                    collect(node.body)
            elif isinstance(node, LMean):
                if node.var != var and node.anchor != var:
                    collect(node.body)

        collect(body)
        if empty:
            return set()
        if not constraints:
            return None
        out = set(constraints[0])
        for c in constraints[1:]:
            out &= c
        return out

    def _hoisted_zero(self, body, var, bind) -> bool:
        """For a zero-forcing application, a var-free argument that is 0
        zeroes the whole aggregate; check those once, not per vertex."""
        if not (isinstance(body, Apply) and body.conn.zero_forcing):
            return False
        for a in body.args:
            if var not in self.vars_of(a) and self.run(a, bind) == 0.0:
                return True
        return False


def eval_reference(t: Term, env: Environment) -> float:
    """Straight-line reference evaluator: no pruning, no peepholes.

    Visits every vertex for every binder.  Only useful on small graphs;
    exists so the production evaluator has an independent oracle.
    """
    fv = free_vars(t)
    if len(fv) != len(env.assignment):
        raise InputError("assignment does not match the term's free variables")
    g = env.graph
    if g.n == 0:
        raise InputError("evaluation needs a graph with at least one vertex")
    for v in env.assignment:
        if not (0 <= v < g.n):
            raise InputError(f"assigned vertex {v} out of range")

    def go(node: Term, scope: tuple[tuple[str, int], ...]) -> float:
        def find(name: str) -> int:
            for k, v in reversed(scope):
                if k == name:
                    return v
            raise EvaluationError(f"variable {name!r} is not bound")

        if isinstance(node, Const):
            return node.value
        if isinstance(node, Edge):
            return 1.0 if g.has_edge(find(node.x), find(node.y)) else 0.0
        if isinstance(node, Eq):
            return 1.0 if find(node.x) == find(node.y) else 0.0
        if isinstance(node, Apply):
            return node.conn.eval([go(a, scope) for a in node.args])
        if isinstance(node, Agg):
            if g.n == 0:
                raise EvaluationError("cannot aggregate over an empty vertex set")
            vals = [go(node.body, scope + ((node.var, v),)) for v in range(g.n)]
            if node.kind == SUM:
                return sum(vals)
            if node.kind == MEAN:
                return sum(vals) / g.n
            if node.kind == MAX:
                return max(vals)
            if node.kind == MIN:
                return min(vals)
        if isinstance(node, LMean):
            a = find(node.anchor)
            vals = [go(node.body, scope + ((node.var, v),))
                    for v in range(g.n) if g.has_edge(a, v)]
            if not vals:
                return 0.0
            return sum(vals) / len(vals)
        raise EvaluationError(f"not a term: {node!r}")

    return go(t, tuple(zip(fv, env.assignment)))
