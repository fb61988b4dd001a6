"""Event hypergraphs: a finite vertex set with one measurable constraint per
n-subset, evaluated against realized arrays through index maps."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping

from .errors import ArityError, DomainError, InjectivityError
from .measure import FULL, SetExpr, ValueSpace, check_space_compatible, contains
from .representation import RealizedArray

Edge = tuple[str, ...]


def _canon_edge(edge) -> Edge:
    return tuple(sorted(str(v) for v in edge))


@dataclass(frozen=True)
class EventHypergraph:
    """Vertex labels, arity, value space, and one constraint per n-subset.

    The trivial constraint is stored explicitly as FULL so that "every edge
    has a constraint" stays checkable.
    """

    vertices: tuple[str, ...]
    arity: int
    space: ValueSpace
    constraints: Mapping[Edge, SetExpr] = field(repr=False)

    def __post_init__(self):
        verts = tuple(sorted(str(v) for v in self.vertices))
        if len(set(verts)) != len(verts):
            raise DomainError("vertex labels must be distinct")
        if self.arity < 1 or len(verts) < self.arity:
            raise ArityError(
                f"need at least {self.arity} vertices, got {len(verts)}"
            )
        cons = {_canon_edge(e): b for e, b in self.constraints.items()}
        expected = set(itertools.combinations(verts, self.arity))
        if set(cons) != expected:
            missing = expected - set(cons)
            extra = set(cons) - expected
            raise DomainError(
                f"constraints must cover every {self.arity}-subset exactly; "
                f"missing {sorted(missing)}, extraneous {sorted(extra)}"
            )
        for b in cons.values():
            check_space_compatible(b, self.space)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "constraints", cons)

    @classmethod
    def build(
        cls,
        vertices,
        arity: int,
        space: ValueSpace,
        constraints: Mapping | None = None,
        default: SetExpr = FULL,
    ) -> "EventHypergraph":
        """Constraints for unlisted edges default to FULL."""
        verts = tuple(sorted(str(v) for v in vertices))
        cons = {_canon_edge(e): b for e, b in (constraints or {}).items()}
        full_map = {
            e: cons.get(e, default)
            for e in itertools.combinations(verts, arity)
        }
        return cls(verts, arity, space, full_map)

    def edges(self):
        return itertools.combinations(self.vertices, self.arity)

    def constraint(self, edge) -> SetExpr:
        return self.constraints[_canon_edge(edge)]


def check_index_map(h: EventHypergraph, f: Mapping[str, int]) -> None:
    missing = [v for v in h.vertices if v not in f]
    if missing:
        raise DomainError(f"index map is missing vertices {missing}")


def is_injective(h: EventHypergraph, f: Mapping[str, int]) -> bool:
    images = [f[v] for v in h.vertices]
    return len(set(images)) == len(images)


def evaluate_event(
    h: EventHypergraph, f: Mapping[str, int], array: RealizedArray
) -> bool:
    """True iff every edge's array value satisfies its constraint under f.

    This implements the injective case only; uniform (possibly non-injective)
    maps are handled by the sampling estimators.
    """
    check_index_map(h, f)
    if array.arity != h.arity:
        raise ArityError(
            f"array arity {array.arity} differs from event arity {h.arity}"
        )
    if not is_injective(h, f):
        raise InjectivityError("index map must be injective here")
    for v in h.vertices:
        if not 1 <= f[v] <= array.size:
            raise DomainError(f"index {f[v]} out of range 1..{array.size}")
    for e in h.edges():
        value = array[tuple(f[v] for v in e)]
        if not contains(h.constraints[e], value):
            return False
    return True


def relabel(h: EventHypergraph, pi: Mapping[str, str]) -> EventHypergraph:
    """Push constraints forward along a bijection of the vertex set."""
    if sorted(pi) != list(h.vertices) or sorted(pi.values()) != list(h.vertices):
        raise DomainError("relabeling must be a bijection of the vertex set")
    new_cons = {
        _canon_edge(pi[v] for v in e): b for e, b in h.constraints.items()
    }
    return EventHypergraph(h.vertices, h.arity, h.space, new_cons)
