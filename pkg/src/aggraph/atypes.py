"""Equality-pattern graph types of vertex tuples, dense regime.

A tuple is abstracted to which positions coincide plus the induced
adjacency among its distinct entries.  Positions pin everything: classes
are numbered by first occurrence and the class graph lives on the class
indices, so two abstractions are interchangeable exactly when they are
equal as values.  The one-vertex extension weights defined here are the
conditional limits the dense aggregation rules sum against.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .errors import InputError
from .graphs import Graph


def _class_count(pattern: tuple[int, ...]) -> int:
    top = -1
    for i, c in enumerate(pattern):
        if c < 0 or c > top + 1:
            raise InputError(
                f"equality pattern {pattern} is not numbered by first "
                f"occurrence at position {i}"
            )
        top = max(top, c)
    return top + 1


@dataclass(frozen=True)
class AtomicType:
    """Coincidence pattern of a tuple plus the wiring of its classes.

    equality_pattern[i] is the class of position i, classes numbered by
    first occurrence; class_graph is a Graph on the classes.
    """

    equality_pattern: tuple[int, ...]
    class_graph: Graph

    def __post_init__(self):
        count = _class_count(self.equality_pattern)
        if count != self.class_graph.n:
            raise InputError(
                f"pattern names {count} classes but the class graph has "
                f"{self.class_graph.n} vertices"
            )

    @property
    def arity(self) -> int:
        return len(self.equality_pattern)

    @property
    def class_count(self) -> int:
        return self.class_graph.n

    def position_class(self, i: int) -> int:
        if not (0 <= i < self.arity):
            raise InputError(f"position {i} out of range")
        return self.equality_pattern[i]

    def __repr__(self) -> str:
        edges = sorted(self.class_graph.edges())
        return f"AtomicType({list(self.equality_pattern)}, edges={edges})"


EMPTY_TYPE = AtomicType((), Graph(0))


def atomic_type(g: Graph, u: Sequence[int]) -> AtomicType:
    """The type of the tuple u inside g.  Repeated entries are allowed."""
    pattern: list[int] = []
    reps: list[int] = []
    index: dict[int, int] = {}
    for v in u:
        v = int(v)
        if not (0 <= v < g.n):
            raise InputError(f"tuple entry {v} out of range for n={g.n}")
        if v not in index:
            index[v] = len(reps)
            reps.append(v)
        pattern.append(index[v])
    edges = [
        (i, j)
        for i in range(len(reps))
        for j in range(i + 1, len(reps))
        if g.has_edge(reps[i], reps[j])
    ]
    return AtomicType(tuple(pattern), Graph(len(reps), edges))


def out_extensions(t0: AtomicType) -> Iterator[tuple[AtomicType, frozenset[int]]]:
    """All types extending t0 by one new distinct vertex.

    Yields (extension type, S) where S is the class subset the new vertex
    is joined to; there are exactly 2**class_count of them.
    """
    c = t0.class_count
    pattern = t0.equality_pattern + (c,)
    for bits in range(1 << c):
        joined = [i for i in range(c) if bits >> i & 1]
        yield (
            AtomicType(pattern, t0.class_graph.with_vertex(joined)),
            frozenset(joined),
        )


def in_extension(t0: AtomicType, position: int) -> AtomicType:
    """The type of the tuple with the entry at `position` repeated last."""
    cls = t0.position_class(position)
    return AtomicType(t0.equality_pattern + (cls,), t0.class_graph)


def extension_percentages(t0: AtomicType, p: float) -> dict[AtomicType, Fraction]:
    """Limiting vertex share of each one-vertex extension of t0.

    A fresh vertex joins each class independently with probability p, so
    the extension adjacent to exactly the class subset S carries weight
    p^|S| * (1-p)^(count-|S|).  Weights are exact rationals (p converts
    binary-exactly) and sum to exactly 1.
    """
    if not (0.0 < p < 1.0):
        raise InputError(f"edge probability must be in (0,1), got {p}")
    pf = Fraction(p)
    c = t0.class_count
    out: dict[AtomicType, Fraction] = {}
    for t, joined in out_extensions(t0):
        out[t] = pf ** len(joined) * (1 - pf) ** (c - len(joined))
    return out
