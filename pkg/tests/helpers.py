"""Shared fixtures: standard event shapes, the non-exchangeable parity
fixture, and an independent measure oracle."""

from __future__ import annotations

import itertools
import string

import numpy as np

import exarray as xa
from exarray import measure as me


def vertex_labels(count: int) -> list[str]:
    return list(string.ascii_lowercase[:count])


def single_edge_event(n: int, constraint, space) -> xa.EventHypergraph:
    verts = vertex_labels(n)
    return xa.EventHypergraph.build(verts, n, space, {tuple(verts): constraint})


def cluster_event(n: int, constraint, space) -> xa.EventHypergraph:
    """All n-subsets of n+1 vertices constrained (the triangle for n=2)."""
    verts = vertex_labels(n + 1)
    cons = {e: constraint for e in itertools.combinations(verts, n)}
    return xa.EventHypergraph.build(verts, n, space, cons)


def two_disjoint_event(n: int, constraint, space) -> xa.EventHypergraph:
    """Two disjoint constrained n-edges on 2n vertices, Full elsewhere."""
    verts = vertex_labels(2 * n)
    cons = {tuple(verts[:n]): constraint, tuple(verts[n:]): constraint}
    return xa.EventHypergraph.build(verts, n, space, cons)


EDGE_HIT = xa.DiscreteSubset({1})


def binary_edge_event() -> xa.EventHypergraph:
    return single_edge_event(2, EDGE_HIT, xa.Discrete(2))


def triangle_event() -> xa.EventHypergraph:
    return cluster_event(2, EDGE_HIT, xa.Discrete(2))


class MinIndexParitySource(xa.ArraySource):
    """Deliberately non-exchangeable fixture: value 1 iff the edge's smallest
    index is even.  Ignores the seed entirely."""

    def __init__(self, arity: int = 2):
        self.arity = arity
        self.space = xa.Discrete(2)

    def values_fixed_edges(self, seeds, edges):
        vals = (np.min(edges, axis=1) % 2 == 0).astype(np.int64)
        n = len(np.atleast_1d(seeds))
        return np.broadcast_to(vals, (n, len(edges)))

    def values_rowwise_edges(self, seeds, edges):
        return (np.min(edges, axis=2) % 2 == 0).astype(np.int64)


def measure_oracle(expr, mu) -> float:
    """Independent measure computation for continuous distributions: split the
    line at every breakpoint and probe each open piece's midpoint with the
    pointwise `contains` recursion (no interval normal form involved)."""

    def breakpoints(e) -> set[float]:
        if isinstance(e, (me.ClosedInterval, me.OpenInterval)):
            return {e.lo, e.hi}
        if isinstance(e, me.Union) or isinstance(e, me.Intersection):
            out = set()
            for p in e.parts:
                out |= breakpoints(p)
            return out
        if isinstance(e, me.Complement):
            return breakpoints(e.inner)
        return set()

    if isinstance(mu, me.UniformOnUnitInterval):
        support = (0.0, 1.0)
        knot_xs = set()
    else:
        knot_xs = {x for x, _ in mu.knots}
        support = (mu.knots[0][0], mu.knots[-1][0])
    cuts = sorted(
        {support[0], support[1]}
        | {b for b in breakpoints(expr) if support[0] <= b <= support[1]}
        | knot_xs
    )
    total = 0.0
    for lo, hi in zip(cuts, cuts[1:]):
        if xa.contains(expr, (lo + hi) / 2.0):
            total += mu.cdf(hi) - mu.cdf(lo)
    return total


def random_set_expr(rng: np.random.Generator, depth: int = 3):
    """Random real-space set expression for property tests."""
    if depth == 0 or rng.random() < 0.35:
        kind = rng.integers(0, 4)
        a, b = np.sort(rng.random(2))
        if kind == 0:
            return xa.ClosedInterval(float(a), float(b))
        if kind == 1:
            return xa.OpenInterval(float(a), float(b))
        if kind == 2:
            return xa.FULL
        return xa.EMPTY
    kind = rng.integers(0, 3)
    if kind == 0:
        return xa.Union(tuple(random_set_expr(rng, depth - 1) for _ in range(2)))
    if kind == 1:
        return xa.Intersection(tuple(random_set_expr(rng, depth - 1) for _ in range(2)))
    return xa.Complement(random_set_expr(rng, depth - 1))
