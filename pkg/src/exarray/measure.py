"""Value spaces, measurable-set descriptors, exact measures, and compact-class
inner approximation.

Sets are finite expression trees over interval / discrete leaves.  On the real
spaces every expression normalizes exactly to a disjoint sorted list of
intervals whose endpoints carry open/closed bookkeeping, so measures under the
analytic reference distributions are computed by interval arithmetic rather
than numerical integration; single points carry zero mass under continuous
distributions.  The compact class is fixed to finite unions of closed
intervals (real spaces) and arbitrary subsets (finite discrete spaces).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, SpaceMismatchError, UnsupportedError

# ---------------------------------------------------------------------------
# Value spaces
# ---------------------------------------------------------------------------


class ValueSpace:
    """Base class for the supported value spaces."""

    def __contains__(self, x) -> bool:  # pragma: no cover - overridden
        raise NotImplementedError


@dataclass(frozen=True)
class RealLine(ValueSpace):
    def __contains__(self, x) -> bool:
        return isinstance(x, (int, float)) and math.isfinite(float(x))


@dataclass(frozen=True)
class UnitInterval(ValueSpace):
    def __contains__(self, x) -> bool:
        return isinstance(x, (int, float)) and 0.0 <= float(x) <= 1.0


@dataclass(frozen=True)
class Discrete(ValueSpace):
    """Finite space with points {0, ..., size-1}."""

    size: int

    def __post_init__(self):
        if self.size < 1:
            raise DomainError(f"discrete space needs at least one point, got {self.size}")

    def __contains__(self, x) -> bool:
        return float(x) == int(x) and 0 <= int(x) < self.size


REAL_LINE = RealLine()
UNIT_INTERVAL = UnitInterval()


# ---------------------------------------------------------------------------
# Set expressions
# ---------------------------------------------------------------------------


class SetExpr:
    """Measurable-set descriptor; build with the leaf/node constructors below."""


@dataclass(frozen=True)
class ClosedInterval(SetExpr):
    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo <= self.hi):
            raise DomainError(f"closed interval needs lo <= hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class OpenInterval(SetExpr):
    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo <= self.hi):
            raise DomainError(f"open interval needs lo <= hi, got ({self.lo}, {self.hi})")


@dataclass(frozen=True)
class DiscreteSubset(SetExpr):
    points: frozenset[int]

    def __init__(self, points: Iterable[int]):
        object.__setattr__(self, "points", frozenset(int(p) for p in points))


@dataclass(frozen=True)
class _Full(SetExpr):
    pass


@dataclass(frozen=True)
class _Empty(SetExpr):
    pass


FULL = _Full()
EMPTY = _Empty()


@dataclass(frozen=True)
class Union(SetExpr):
    parts: tuple[SetExpr, ...]

    def __init__(self, *parts: SetExpr):
        if len(parts) == 1 and isinstance(parts[0], (tuple, list)):
            parts = tuple(parts[0])
        object.__setattr__(self, "parts", tuple(parts))


@dataclass(frozen=True)
class Intersection(SetExpr):
    parts: tuple[SetExpr, ...]

    def __init__(self, *parts: SetExpr):
        if len(parts) == 1 and isinstance(parts[0], (tuple, list)):
            parts = tuple(parts[0])
        object.__setattr__(self, "parts", tuple(parts))


@dataclass(frozen=True)
class Complement(SetExpr):
    inner: SetExpr


def contains(expr: SetExpr, x) -> bool:
    """Point membership with standard set-theoretic semantics.

    Complement is the pointwise logical negation, so no ambient space is
    needed as long as ``x`` lies in the value space of the expression.
    """
    if isinstance(expr, _Full):
        return True
    if isinstance(expr, _Empty):
        return False
    if isinstance(expr, ClosedInterval):
        _need_real(x)
        return expr.lo <= float(x) <= expr.hi
    if isinstance(expr, OpenInterval):
        _need_real(x)
        return expr.lo < float(x) < expr.hi
    if isinstance(expr, DiscreteSubset):
        if float(x) != int(x):
            raise SpaceMismatchError(f"{x!r} is not a point of a discrete space")
        return int(x) in expr.points
    if isinstance(expr, Union):
        return any(contains(p, x) for p in expr.parts)
    if isinstance(expr, Intersection):
        return all(contains(p, x) for p in expr.parts)
    if isinstance(expr, Complement):
        return not contains(expr.inner, x)
    raise TypeError(f"not a SetExpr: {expr!r}")


def indicator(expr: SetExpr, values: np.ndarray) -> np.ndarray:
    """Vectorized membership of ``values`` (boolean array), matching `contains`."""
    values = np.asarray(values)
    if isinstance(expr, _Full):
        return np.ones(values.shape, dtype=bool)
    if isinstance(expr, _Empty):
        return np.zeros(values.shape, dtype=bool)
    if isinstance(expr, ClosedInterval):
        return (values >= expr.lo) & (values <= expr.hi)
    if isinstance(expr, OpenInterval):
        return (values > expr.lo) & (values < expr.hi)
    if isinstance(expr, DiscreteSubset):
        return np.isin(values, sorted(expr.points))
    if isinstance(expr, Union):
        out = np.zeros(values.shape, dtype=bool)
        for p in expr.parts:
            out |= indicator(p, values)
        return out
    if isinstance(expr, Intersection):
        out = np.ones(values.shape, dtype=bool)
        for p in expr.parts:
            out &= indicator(p, values)
        return out
    if isinstance(expr, Complement):
        return ~indicator(expr.inner, values)
    raise TypeError(f"not a SetExpr: {expr!r}")


def _need_real(x):
    if isinstance(x, bool) or not isinstance(x, (int, float, np.integer, np.floating)):
        raise SpaceMismatchError(f"{x!r} is not a point of a real value space")


def check_space_compatible(expr: SetExpr, space: ValueSpace) -> None:
    """Raise `SpaceMismatchError` if a leaf cannot describe sets of ``space``."""
    if isinstance(expr, (ClosedInterval, OpenInterval)) and isinstance(space, Discrete):
        raise SpaceMismatchError("interval leaf in a discrete value space")
    if isinstance(expr, DiscreteSubset) and not isinstance(space, Discrete):
        raise SpaceMismatchError("discrete subset leaf in a real value space")
    if isinstance(expr, (Union, Intersection)):
        for p in expr.parts:
            check_space_compatible(p, space)
    if isinstance(expr, Complement):
        check_space_compatible(expr.inner, space)


# ---------------------------------------------------------------------------
# Exact normal form on real spaces
#
# An endpoint is a "cut" (x, e) with e in {-1, 0, +1}: (x, 0) is the point x
# itself, (x, -1) sits just below it, (x, +1) just above.  An interval is a
# pair of cuts (lo, hi), nonempty iff lo <= hi lexicographically.  Closed
# [a, b] = ((a, 0), (b, 0)); open (a, b) = ((a, +1), (b, -1)).
# ---------------------------------------------------------------------------

Cut = tuple[float, int]
CutInterval = tuple[Cut, Cut]


def _space_box(space: ValueSpace) -> CutInterval:
    if isinstance(space, UnitInterval):
        return ((0.0, 0), (1.0, 0))
    if isinstance(space, RealLine):
        return ((-math.inf, 1), (math.inf, -1))
    raise SpaceMismatchError(f"no interval box for {space!r}")


def _merge(intervals: list[CutInterval]) -> list[CutInterval]:
    """Sort and merge overlapping or exactly adjacent cut intervals."""
    ivs = sorted(i for i in intervals if i[0] <= i[1])
    out: list[CutInterval] = []
    for lo, hi in ivs:
        if out:
            plo, phi = out[-1]
            # adjacency: hi cut and next lo cut touch with no gap between
            if lo <= phi or (lo[0] == phi[0] and lo[1] <= phi[1] + 1):
                if hi > phi:
                    out[-1] = (plo, hi)
                continue
        out.append((lo, hi))
    return out


def _intersect_two(a: list[CutInterval], b: list[CutInterval]) -> list[CutInterval]:
    out: list[CutInterval] = []
    i = j = 0
    while i < len(a) and j < len(b):
        lo = max(a[i][0], b[j][0])
        hi = min(a[i][1], b[j][1])
        if lo <= hi:
            out.append((lo, hi))
        if a[i][1] < b[j][1]:
            i += 1
        else:
            j += 1
    return out


def _complement(intervals: list[CutInterval], box: CutInterval) -> list[CutInterval]:
    out: list[CutInterval] = []
    cursor = box[0]
    for lo, hi in intervals:
        before = (lo[0], lo[1] - 1)  # just below lo
        if cursor <= before:
            out.append((cursor, before))
        nxt = (hi[0], hi[1] + 1)  # just above hi
        cursor = max(cursor, nxt)
    if cursor <= box[1]:
        out.append((cursor, box[1]))
    return [i for i in out if i[0] <= i[1]]


def normalize(expr: SetExpr, space: ValueSpace) -> list[CutInterval]:
    """Disjoint sorted cut intervals equal to ``expr`` within ``space``."""
    box = _space_box(space)

    def go(e: SetExpr) -> list[CutInterval]:
        if isinstance(e, _Full):
            return [box]
        if isinstance(e, _Empty):
            return []
        if isinstance(e, ClosedInterval):
            return _intersect_two([((e.lo, 0), (e.hi, 0))], [box])
        if isinstance(e, OpenInterval):
            return _intersect_two([((e.lo, 1), (e.hi, -1))], [box])
        if isinstance(e, DiscreteSubset):
            raise SpaceMismatchError("discrete subset leaf in a real value space")
        if isinstance(e, Union):
            acc: list[CutInterval] = []
            for p in e.parts:
                acc += go(p)
            return _merge(acc)
        if isinstance(e, Intersection):
            acc = [box]
            for p in e.parts:
                acc = _intersect_two(acc, go(p))
            return acc
        if isinstance(e, Complement):
            return _complement(go(e.inner), box)
        raise TypeError(f"not a SetExpr: {e!r}")

    return _merge(go(expr))


def normalize_discrete(expr: SetExpr, space: Discrete) -> frozenset[int]:
    """The subset of {0..m-1} equal to ``expr`` on a discrete space."""
    full = frozenset(range(space.size))

    def go(e: SetExpr) -> frozenset[int]:
        if isinstance(e, _Full):
            return full
        if isinstance(e, _Empty):
            return frozenset()
        if isinstance(e, DiscreteSubset):
            return e.points & full
        if isinstance(e, (ClosedInterval, OpenInterval)):
            raise SpaceMismatchError("interval leaf in a discrete value space")
        if isinstance(e, Union):
            out: frozenset[int] = frozenset()
            for p in e.parts:
                out |= go(p)
            return out
        if isinstance(e, Intersection):
            out = full
            for p in e.parts:
                out &= go(p)
            return out
        if isinstance(e, Complement):
            return full - go(e.inner)
        raise TypeError(f"not a SetExpr: {e!r}")

    return go(expr)


# ---------------------------------------------------------------------------
# Reference distributions
# ---------------------------------------------------------------------------


class ReferenceDistribution:
    """Base class; each distribution knows its value space."""

    space: ValueSpace


@dataclass(frozen=True)
class UniformOnUnitInterval(ReferenceDistribution):
    space: ValueSpace = UNIT_INTERVAL

    def cdf(self, x: float) -> float:
        return min(1.0, max(0.0, x))


@dataclass(frozen=True)
class PiecewiseLinearCdf(ReferenceDistribution):
    """Continuous distribution given by CDF knots ((x_0, 0), ..., (x_k, 1))."""

    knots: tuple[tuple[float, float], ...]
    space: ValueSpace = REAL_LINE

    def __post_init__(self):
        object.__setattr__(
            self, "knots", tuple((float(x), float(f)) for x, f in self.knots)
        )
        xs = [x for x, _ in self.knots]
        fs = [f for _, f in self.knots]
        if len(xs) < 2 or any(a >= b for a, b in zip(xs, xs[1:])):
            raise DomainError("CDF knots need strictly increasing abscissae")
        if any(a > b for a, b in zip(fs, fs[1:])):
            raise DomainError("CDF values must be nondecreasing")
        if abs(fs[0]) > 1e-12 or abs(fs[-1] - 1.0) > 1e-12:
            raise DomainError("CDF must run from 0 to 1 (within 1e-12)")

    def cdf(self, x: float) -> float:
        xs = [k for k, _ in self.knots]
        fs = [f for _, f in self.knots]
        if x <= xs[0]:
            return 0.0
        if x >= xs[-1]:
            return 1.0
        return float(np.interp(x, xs, fs))


@dataclass(frozen=True)
class DiscretePmf(ReferenceDistribution):
    weights: tuple[float, ...]

    def __init__(self, weights: Sequence[float]):
        w = tuple(float(v) for v in weights)
        if any(v < 0 for v in w):
            raise DomainError("pmf weights must be nonnegative")
        if abs(sum(w) - 1.0) > 1e-12:
            raise DomainError(f"pmf weights sum to {sum(w)}, expected 1 within 1e-12")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "space", Discrete(len(w)))


@dataclass(frozen=True)
class EmpiricalSample(ReferenceDistribution):
    values: tuple[float, ...]
    space: ValueSpace = REAL_LINE

    def __init__(self, values: Sequence[float], space: ValueSpace = REAL_LINE):
        if len(values) == 0:
            raise DomainError("empirical sample must be nonempty")
        object.__setattr__(self, "values", tuple(float(v) for v in values))
        object.__setattr__(self, "space", space)


def _is_continuous(mu: ReferenceDistribution) -> bool:
    return isinstance(mu, (UniformOnUnitInterval, PiecewiseLinearCdf))


def measure_of(expr: SetExpr, mu: ReferenceDistribution) -> float:
    """Exact probability of ``expr`` under ``mu``.

    Continuous distributions measure the normalized disjoint-interval form via
    CDF differences; discrete pmfs sum point weights; empirical samples count.
    """
    if isinstance(mu, EmpiricalSample):
        try:
            hits = sum(1 for v in mu.values if contains(expr, v))
        except SpaceMismatchError as e:
            raise UnsupportedError(f"empirical measure unsupported for {expr!r}: {e}")
        return hits / len(mu.values)
    if isinstance(mu, DiscretePmf):
        pts = normalize_discrete(expr, mu.space)
        return float(sum(mu.weights[p] for p in pts))
    if _is_continuous(mu):
        total = 0.0
        for (lo, _), (hi, _) in normalize(expr, mu.space):
            total += mu.cdf(hi) - mu.cdf(lo)
        return min(1.0, max(0.0, total))
    raise UnsupportedError(f"unknown distribution {mu!r}")


# ---------------------------------------------------------------------------
# Inner approximation by the compact class
# ---------------------------------------------------------------------------


def _shrink_up(mu, lo: float, hi: float, budget: float) -> float:
    """Largest point p in (lo, hi] with cdf(p) - cdf(lo) <= budget, found by
    bisection from the feasible side (the returned loss never exceeds budget)."""
    base = mu.cdf(lo)
    feasible = lo
    hi_bound = hi
    for _ in range(200):
        mid = 0.5 * (feasible + hi_bound)
        if mid <= feasible or mid >= hi_bound:
            break
        if mu.cdf(mid) - base <= budget:
            feasible = mid
        else:
            hi_bound = mid
    if feasible == lo:
        # strict interiority for an open endpoint: one ulp inward
        feasible = math.nextafter(lo, hi)
        if feasible > hi or mu.cdf(feasible) - base > budget:
            return math.nan
    return feasible


def _shrink_down(mu, lo: float, hi: float, budget: float) -> float:
    base = mu.cdf(hi)
    feasible = hi
    lo_bound = lo
    for _ in range(200):
        mid = 0.5 * (lo_bound + feasible)
        if mid <= lo_bound or mid >= feasible:
            break
        if base - mu.cdf(mid) <= budget:
            feasible = mid
        else:
            lo_bound = mid
    if feasible == hi:
        feasible = math.nextafter(hi, lo)
        if feasible < lo or base - mu.cdf(feasible) > budget:
            return math.nan
    return feasible


def _closed_subset_of(lo: float, hi: float, nf: list[CutInterval]) -> bool:
    return any(ilo <= (lo, 0) and (hi, 0) <= ihi for ilo, ihi in nf)


def inner_approx(expr: SetExpr, mu: ReferenceDistribution, eps: float) -> SetExpr:
    """A compact-class subset K of ``expr`` with measure deficit at most ``eps``.

    On discrete spaces every set is already compact-class, so K is the set
    itself and the deficit is zero.  On real spaces K is a finite union of
    closed intervals: closed components pass through unchanged and open
    endpoints are pulled inward, splitting the eps budget equally over all
    open endpoints via bisection on the CDF.
    """
    if eps <= 0:
        raise DomainError(f"eps must be positive, got {eps}")
    if isinstance(mu, EmpiricalSample):
        raise UnsupportedError("inner approximation needs an analytic distribution")
    if isinstance(mu, DiscretePmf):
        return DiscreteSubset(normalize_discrete(expr, mu.space))

    nf = normalize(expr, mu.space)
    if not nf:
        return EMPTY
    # Clip to the support hull so unbounded components get finite, mass-equal
    # endpoints; the clipped form is cut-wise inside nf, so containment holds.
    if isinstance(mu, PiecewiseLinearCdf):
        support: CutInterval = ((mu.knots[0][0], 0), (mu.knots[-1][0], 0))
    else:
        support = _space_box(UNIT_INTERVAL)
    clipped = _intersect_two(nf, [support])
    if not clipped:
        return EMPTY
    n_open = sum((lo[1] != 0) + (hi[1] != 0) for lo, hi in clipped)
    budget = eps / n_open if n_open else 0.0

    pieces: list[ClosedInterval] = []
    for lo, hi in clipped:
        open_ends = (lo[1] != 0) + (hi[1] != 0)
        if open_ends and mu.cdf(hi[0]) - mu.cdf(lo[0]) <= open_ends * budget:
            continue  # dropping the whole component stays within its budget
        p = lo[0] if lo[1] == 0 else _shrink_up(mu, lo[0], hi[0], budget)
        q = hi[0] if hi[1] == 0 else _shrink_down(mu, lo[0], hi[0], budget)
        if math.isnan(p) or math.isnan(q) or p > q:
            continue
        pieces.append(ClosedInterval(p, q))

    for piece in pieces:  # symbolic containment is part of the contract
        if not _closed_subset_of(piece.lo, piece.hi, nf):
            raise AssertionError(f"inner approximation escaped the target set: {piece}")

    if not pieces:
        return EMPTY
    if len(pieces) == 1:
        return pieces[0]
    return Union(tuple(pieces))


# ---------------------------------------------------------------------------
# Finite-intersection-property validator for the compact class
# ---------------------------------------------------------------------------


def compactness_check(
    family: Sequence[SetExpr], space: ValueSpace = REAL_LINE
) -> bool:
    """Check the finite intersection property on a family of compact-class sets.

    Returns True iff every subfamily whose members pairwise intersect also has
    a nonempty joint intersection.  Since intersections only shrink as a
    subfamily grows, it suffices to check the maximal cliques of the pairwise
    intersection graph.  Subfamilies containing a disjoint pair are vacuously
    fine.
    """
    import networkx as nx

    if isinstance(space, Discrete):
        forms = [normalize_discrete(e, space) for e in family]

        def inter(items):
            out = forms[items[0]]
            for i in items[1:]:
                out = out & forms[i]
            return bool(out)

    else:
        forms = [normalize(e, space) for e in family]

        def inter(items):
            out = forms[items[0]]
            for i in items[1:]:
                out = _intersect_two(out, forms[i])
            return bool(out)

    n = len(forms)
    g = nx.Graph()
    g.add_nodes_from(range(n))
    for i in range(n):
        for j in range(i + 1, n):
            if inter([i, j]):
                g.add_edge(i, j)
    for clique in nx.find_cliques(g):
        if not inter(sorted(clique)):
            return False
    return True
