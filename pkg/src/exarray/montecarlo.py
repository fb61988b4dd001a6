"""Monte Carlo estimators of event-hypergraph probabilities and the
structural diagnostics built on them.

Two sampling modes are implemented.  *Direct* sampling draws a fresh latent
hierarchy per replicate over the canonical injective placement of the event's
vertices and evaluates the event there.  *Empirical* sampling draws a uniform
(possibly non-injective) placement into {1..M} per replicate and counts the
event as holding only when the placement is injective and every constraint
holds; the conditional-on-injective estimate divides by the exact injectivity
probability rather than resampling, so small M never biases a rejection loop.

Every replicate is a pure function of (master seed, replicate index): counts
are associative sums and the reports are bit-identical for any worker count
or execution order.  Comparisons use a z-statistic with consistency threshold
4, which keeps the family-wise false-alarm rate of a ~50-assertion acceptance
run below 1%.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .errors import ArityError, DomainError, InjectivityError
from .events import EventHypergraph, check_index_map, is_injective
from .latent import SubsetKey, child_seed, child_seeds, fingerprints, seed_states, uniforms_from
from .measure import indicator
from .representation import RealizedArray, RhoSpec, _check_valid, edge_values_for

Z99 = 2.5758293035489004  # two-sided 0.99 normal quantile
CONSISTENCY_THRESHOLD = 4.0

_CHUNK = 1 << 15

# Stream tags for replicate-seed derivation (domain separation between uses).
_DIRECT = 0x01
_EMP_ARRAY = 0x02
_EMP_MAP = 0x03
_PAIR = 0x04
_ONARRAY_MAP = 0x05
_SM_ARRAY = 0x06
_SM_MAP = 0x07
_CONV_ROW = 0x08
_SM_BLOCK = 0x09
_DISSOC = 0x0A


# ---------------------------------------------------------------------------
# Array sources
# ---------------------------------------------------------------------------


class ArraySource:
    """Anything that can produce array values at requested edges per seed.

    ``values_fixed_edges(seeds (N,), edges (m, n)) -> (N, m)`` and
    ``values_rowwise_edges(seeds (N,), edges (N, m, n)) -> (N, m)``; rows of
    ``edges`` are sorted index tuples.  Implemented by `RepresentationSource`
    and by test fixtures emulating non-representable arrays.
    """

    arity: int

    def values_fixed_edges(self, seeds, edges):  # pragma: no cover - abstract
        raise NotImplementedError

    def values_rowwise_edges(self, seeds, edges):  # pragma: no cover - abstract
        raise NotImplementedError


class RepresentationSource(ArraySource):
    """Adapter that realizes representation values on demand.

    ``overrides`` pins selected latents to constants (test hook for
    conditioning on the global latent, for instance).
    """

    def __init__(self, rho: RhoSpec, overrides: Mapping[SubsetKey, float] | None = None):
        _check_valid(rho)
        self.rho = rho
        self.arity = rho.arity
        self.space = rho.output
        self.overrides = dict(overrides) if overrides else None

    def values_fixed_edges(self, seeds, edges):
        return edge_values_for(self.rho, seeds, edges, self.overrides)

    def values_rowwise_edges(self, seeds, edges):
        return edge_values_for(self.rho, seeds, edges, self.overrides)


def _as_source(rho_or_source) -> ArraySource:
    if isinstance(rho_or_source, RhoSpec):
        return RepresentationSource(rho_or_source)
    if isinstance(rho_or_source, ArraySource):
        return rho_or_source
    raise TypeError(f"expected RhoSpec or ArraySource, got {type(rho_or_source)!r}")


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EstimateReport:
    """Point estimate with binomial standard error and clipped 0.99 interval."""

    estimate: float
    stderr: float
    ci99: tuple[float, float]
    replicates: int
    seed: int
    mode: str
    index_bound: int | None = None
    successes: int | None = None

    def to_dict(self) -> dict:
        d = {
            "estimate": self.estimate,
            "stderr": self.stderr,
            "ci99": list(self.ci99),
            "replicates": self.replicates,
            "seed": self.seed,
            "mode": self.mode,
        }
        if self.index_bound is not None:
            d["index_bound"] = self.index_bound
        if self.successes is not None:
            d["successes"] = self.successes
        return d


def _make_report(successes: int, n: int, seed: int, mode: str, index_bound=None) -> EstimateReport:
    p = successes / n
    se = math.sqrt(p * (1.0 - p) / n)
    ci = (max(0.0, p - Z99 * se), min(1.0, p + Z99 * se))
    return EstimateReport(p, se, ci, n, int(seed), mode, index_bound, int(successes))


def conditional_on_injective(report: EstimateReport, set_size: int) -> EstimateReport:
    """Divide an empirical estimate by the exact injectivity probability."""
    if report.index_bound is None:
        raise DomainError("report has no index bound to correct against")
    inj = injectivity_probability(set_size, report.index_bound)
    if inj == 0.0:
        raise DomainError("injectivity probability is zero; nothing to condition on")
    p = min(1.0, report.estimate / inj)
    se = report.stderr / inj
    ci = (max(0.0, p - Z99 * se), min(1.0, p + Z99 * se))
    return EstimateReport(
        p, se, ci, report.replicates, report.seed,
        "conditional-on-injective", report.index_bound, report.successes,
    )


@dataclass(frozen=True)
class TestReport:
    """Two estimates and the z-statistic of their comparison.

    Paired comparisons (same replicates under both arms) use the empirical
    variance of the per-replicate difference; the product comparison in the
    dissociation test uses the delta-method variance.  ``stderr_diff`` is the
    standard error actually used for ``statistic``.
    """

    statistic: float
    first: EstimateReport
    second: EstimateReport
    stderr_diff: float
    paired: bool
    threshold: float = CONSISTENCY_THRESHOLD
    verdict: str = field(init=False)

    def __post_init__(self):
        verdict = "consistent" if abs(self.statistic) <= self.threshold else "inconsistent"
        object.__setattr__(self, "verdict", verdict)

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "first": self.first.to_dict(),
            "second": self.second.to_dict(),
            "stderr_diff": self.stderr_diff,
            "paired": self.paired,
            "threshold": self.threshold,
            "verdict": self.verdict,
        }


def _z(diff: float, se: float) -> float:
    if diff == 0.0:
        return 0.0
    if se == 0.0:
        return math.inf if diff > 0 else -math.inf
    return diff / se


# ---------------------------------------------------------------------------
# Shared machinery
# ---------------------------------------------------------------------------


def _edge_index_rows(event: EventHypergraph, f: Mapping[str, int]) -> np.ndarray:
    """Sorted index tuples of every hyperedge under the map f, shape (m, n)."""
    rows = [sorted(int(f[v]) for v in e) for e in event.edges()]
    return np.array(rows, dtype=np.int64)


def _constraints_in_order(event: EventHypergraph):
    return [event.constraints[e] for e in event.edges()]


def _event_mask(values: np.ndarray, constraints, col0: int = 0) -> np.ndarray:
    ok = np.ones(values.shape[0], dtype=bool)
    for j, b in enumerate(constraints):
        ok &= indicator(b, values[:, col0 + j])
    return ok


def _run_sharded(total: int, workers: int, worker_fn):
    """Apply worker_fn(lo, hi) over contiguous shards; sum tuple results."""
    workers = max(1, int(workers))
    if workers == 1 or total < 2 * workers:
        return worker_fn(0, total)
    bounds = [round(total * w / workers) for w in range(workers + 1)]
    spans = [(bounds[i], bounds[i + 1]) for i in range(workers) if bounds[i] < bounds[i + 1]]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        parts = list(ex.map(lambda sp: worker_fn(*sp), spans))
    out = list(parts[0])
    for part in parts[1:]:
        for i, v in enumerate(part):
            out[i] = out[i] + v
    return tuple(out)


def _uniform_indices(map_seeds: np.ndarray, slots: int, bound: int) -> np.ndarray:
    """Uniform indices in {1..bound}, one per slot, shape (len(seeds), slots)."""
    fps = fingerprints(np.arange(1, slots + 1, dtype=np.int64)[:, None])
    u = uniforms_from(seed_states(map_seeds)[:, None], fps)
    return (u * bound).astype(np.int64) + 1


def _injective_rows(idx: np.ndarray) -> np.ndarray:
    """Boolean mask of rows whose entries are pairwise distinct."""
    if idx.shape[-1] <= 1:
        return np.ones(idx.shape[:-1], dtype=bool)
    s = np.sort(idx, axis=-1)
    return np.all(s[..., 1:] != s[..., :-1], axis=-1)


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------


def estimate_direct(
    rho_or_source, event: EventHypergraph, replicates: int, seed: int, *, workers: int = 1
) -> EstimateReport:
    """Estimate the event probability under fresh latent hierarchies.

    Each replicate places the (sorted) vertices of the event at indices
    1..|S|, realizes exactly the edges the event constrains, and checks every
    constraint.
    """
    source = _as_source(rho_or_source)
    if source.arity != event.arity:
        raise ArityError(
            f"source arity {source.arity} differs from event arity {event.arity}"
        )
    if replicates < 1:
        raise DomainError("need at least one replicate")
    f = {v: i + 1 for i, v in enumerate(event.vertices)}
    edges = _edge_index_rows(event, f)
    constraints = _constraints_in_order(event)

    def worker(lo: int, hi: int):
        count = 0
        for start in range(lo, hi, _CHUNK):
            stop = min(start + _CHUNK, hi)
            seeds = child_seeds(seed, _DIRECT, start, stop)
            values = source.values_fixed_edges(seeds, edges)
            count += int(_event_mask(np.asarray(values), constraints).sum())
        return (count,)

    (successes,) = _run_sharded(replicates, workers, worker)
    return _make_report(successes, replicates, seed, "direct")


def estimate_empirical(
    rho_or_source,
    event: EventHypergraph,
    index_bound: int,
    replicates: int,
    seed: int,
    *,
    reuse_array: bool = False,
    workers: int = 1,
) -> EstimateReport:
    """Estimate via uniform placements into a size-M array.

    Per replicate: realize an array of size M (fresh per replicate, or one
    shared array when ``reuse_array``), draw f uniformly over all M^|S| maps,
    and count success only when f is injective and every constraint holds.
    """
    source = _as_source(rho_or_source)
    if source.arity != event.arity:
        raise ArityError(
            f"source arity {source.arity} differs from event arity {event.arity}"
        )
    if index_bound < 1:
        raise DomainError(f"index bound must be >= 1, got {index_bound}")
    if replicates < 1:
        raise DomainError("need at least one replicate")
    s = len(event.vertices)
    positions = {v: i for i, v in enumerate(event.vertices)}
    edge_pos = [
        np.array([positions[v] for v in e], dtype=np.int64) for e in event.edges()
    ]
    constraints = _constraints_in_order(event)
    shared = child_seed(seed, _EMP_ARRAY, 0) if reuse_array else None

    def worker(lo: int, hi: int):
        count = 0
        for start in range(lo, hi, _CHUNK):
            stop = min(start + _CHUNK, hi)
            c = stop - start
            map_seeds = child_seeds(seed, _EMP_MAP, start, stop)
            fidx = _uniform_indices(map_seeds, s, index_bound)
            inj = _injective_rows(fidx)
            if shared is not None:
                arr_seeds = np.full(c, shared, dtype=np.uint64)
            else:
                arr_seeds = child_seeds(seed, _EMP_ARRAY, start, stop)
            edges = np.stack(
                [np.sort(fidx[:, pos], axis=1) for pos in edge_pos], axis=1
            )
            values = np.asarray(source.values_rowwise_edges(arr_seeds, edges))
            ok = _event_mask(values, constraints) & inj
            count += int(ok.sum())
        return (count,)

    (successes,) = _run_sharded(replicates, workers, worker)
    return _make_report(successes, replicates, seed, "empirical", index_bound)


def estimate_on_array(
    array: RealizedArray,
    event: EventHypergraph,
    replicates: int,
    seed: int,
    *,
    workers: int = 1,
) -> EstimateReport:
    """Empirical sampling against one already-realized array (fixed omega)."""
    if array.arity != event.arity:
        raise ArityError(
            f"array arity {array.arity} differs from event arity {event.arity}"
        )
    if replicates < 1:
        raise DomainError("need at least one replicate")
    s = len(event.vertices)
    k, n = array.size, array.arity
    positions = {v: i for i, v in enumerate(event.vertices)}
    edge_pos = [
        np.array([positions[v] for v in e], dtype=np.int64) for e in event.edges()
    ]
    constraints = _constraints_in_order(event)

    def lookup(edges: np.ndarray) -> np.ndarray:
        if n == 2:
            i, j = edges[..., 0], edges[..., 1]
            rank = (i - 1) * k - (i * (i - 1)) // 2 + (j - i - 1)
            return array.values[rank]
        flat = edges.reshape(-1, n)
        from .representation import _edge_rank

        ranks = np.array([_edge_rank(tuple(r), k, n) for r in flat], dtype=np.int64)
        return array.values[ranks].reshape(edges.shape[:-1])

    def worker(lo: int, hi: int):
        count = 0
        for start in range(lo, hi, _CHUNK):
            stop = min(start + _CHUNK, hi)
            map_seeds = child_seeds(seed, _ONARRAY_MAP, start, stop)
            fidx = _uniform_indices(map_seeds, s, k)
            inj = _injective_rows(fidx)
            edges = np.stack(
                [np.sort(fidx[:, pos], axis=1) for pos in edge_pos], axis=1
            )
            values = lookup(edges)
            ok = _event_mask(values, constraints) & inj
            count += int(ok.sum())
        return (count,)

    (successes,) = _run_sharded(replicates, workers, worker)
    return _make_report(successes, replicates, seed, "empirical-fixed", k)


def injectivity_probability_exact(set_size: int, index_bound: int) -> Fraction:
    """P(uniform map from an s-set into {1..M} is injective), exactly."""
    if set_size < 0 or index_bound < 1:
        raise DomainError("need set_size >= 0 and index_bound >= 1")
    out = Fraction(1)
    for i in range(set_size):
        out *= Fraction(index_bound - i, index_bound)
        if out == 0:
            break
    return max(out, Fraction(0))


def injectivity_probability(set_size: int, index_bound: int) -> float:
    return float(injectivity_probability_exact(set_size, index_bound))


# ---------------------------------------------------------------------------
# Convergence harness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceRow:
    index_bound: int
    empirical: EstimateReport
    injectivity: float
    corrected: float
    corrected_stderr: float
    z_identity: float
    degenerate: bool

    def to_dict(self) -> dict:
        return {
            "index_bound": self.index_bound,
            "estimate": self.empirical.estimate,
            "stderr": self.empirical.stderr,
            "injectivity": self.injectivity,
            "corrected": self.corrected,
            "corrected_stderr": self.corrected_stderr,
            "z_identity": self.z_identity,
            "degenerate": self.degenerate,
        }


@dataclass(frozen=True)
class ConvergenceReport:
    rows: tuple[ConvergenceRow, ...]
    direct: EstimateReport
    seed: int

    CSV_COLUMNS = (
        "index_bound", "estimate", "stderr", "injectivity",
        "corrected", "corrected_stderr", "direct", "direct_stderr",
        "z_identity", "degenerate",
    )

    def to_rows(self) -> list[dict]:
        out = []
        for r in self.rows:
            d = r.to_dict()
            d["direct"] = self.direct.estimate
            d["direct_stderr"] = self.direct.stderr
            out.append(d)
        return out

    def to_dict(self) -> dict:
        return {
            "rows": [r.to_dict() for r in self.rows],
            "direct": self.direct.to_dict(),
            "seed": self.seed,
        }


def convergence_harness(
    rho_or_source,
    event: EventHypergraph,
    schedule: Sequence[int],
    replicates: int,
    seed: int,
    *,
    workers: int = 1,
) -> ConvergenceReport:
    """Empirical estimates along an index-bound schedule, with the identity
    check p_M ~= inj(|S|, M) * p_direct reported per row."""
    if not schedule:
        raise DomainError("schedule must be nonempty")
    source = _as_source(rho_or_source)
    s = len(event.vertices)
    direct = estimate_direct(source, event, replicates, child_seed(seed, _CONV_ROW, 0), workers=workers)
    rows = []
    for i, m in enumerate(schedule):
        emp = estimate_empirical(
            source, event, int(m), replicates,
            child_seed(seed, _CONV_ROW, i + 1), workers=workers,
        )
        inj = injectivity_probability(s, int(m))
        degenerate = inj == 0.0
        corrected = min(1.0, emp.estimate / inj) if inj > 0 else math.nan
        corrected_se = emp.stderr / inj if inj > 0 else math.nan
        diff = emp.estimate - inj * direct.estimate
        se = math.sqrt(emp.stderr**2 + (inj * direct.stderr) ** 2)
        rows.append(
            ConvergenceRow(int(m), emp, inj, corrected, corrected_se, _z(diff, se), degenerate)
        )
    return ConvergenceReport(tuple(rows), direct, int(seed))


# ---------------------------------------------------------------------------
# Structure tests
# ---------------------------------------------------------------------------


def exchangeability_test(
    rho_or_source,
    event: EventHypergraph,
    map1: Mapping[str, int],
    map2: Mapping[str, int],
    replicates: int,
    seed: int,
    *,
    workers: int = 1,
) -> TestReport:
    """Compare the event frequency under two injective placements evaluated on
    the same replicates; the z-statistic uses the paired difference."""
    source = _as_source(rho_or_source)
    check_index_map(event, map1)
    check_index_map(event, map2)
    if not is_injective(event, map1) or not is_injective(event, map2):
        raise InjectivityError("both index maps must be injective")
    if replicates < 1:
        raise DomainError("need at least one replicate")
    edges1 = _edge_index_rows(event, map1)
    edges2 = _edge_index_rows(event, map2)
    edges = np.concatenate([edges1, edges2], axis=0)
    constraints = _constraints_in_order(event)
    m = len(edges1)

    def worker(lo: int, hi: int):
        c1 = c2 = c12 = 0
        for start in range(lo, hi, _CHUNK):
            stop = min(start + _CHUNK, hi)
            seeds = child_seeds(seed, _PAIR, start, stop)
            values = np.asarray(source.values_fixed_edges(seeds, edges))
            ok1 = _event_mask(values, constraints, col0=0)
            ok2 = _event_mask(values, constraints, col0=m)
            c1 += int(ok1.sum())
            c2 += int(ok2.sum())
            c12 += int((ok1 & ok2).sum())
        return (c1, c2, c12)

    n1, n2, n12 = _run_sharded(replicates, workers, worker)
    r1 = _make_report(n1, replicates, seed, "direct")
    r2 = _make_report(n2, replicates, seed, "direct")
    p1, p2, p12 = n1 / replicates, n2 / replicates, n12 / replicates
    diff = p1 - p2
    var_d = max(0.0, p1 + p2 - 2.0 * p12 - diff * diff)
    se = math.sqrt(var_d / replicates)
    return TestReport(_z(diff, se), r1, r2, se, paired=True)


def dissociation_test(
    rho_or_source,
    event1: EventHypergraph,
    event2: EventHypergraph,
    map1: Mapping[str, int],
    map2: Mapping[str, int],
    replicates: int,
    seed: int,
    *,
    workers: int = 1,
) -> TestReport:
    """Test P(A and B) against P(A)P(B) for events placed on disjoint index
    ranges; the standard error of the difference comes from the delta method."""
    source = _as_source(rho_or_source)
    check_index_map(event1, map1)
    check_index_map(event2, map2)
    range1 = {map1[v] for v in event1.vertices}
    range2 = {map2[v] for v in event2.vertices}
    if range1 & range2:
        raise DomainError(f"index ranges overlap on {sorted(range1 & range2)}")
    if event1.arity != event2.arity:
        raise ArityError("events must share one arity")
    if source.arity != event1.arity:
        raise ArityError("source arity differs from event arity")
    if replicates < 1:
        raise DomainError("need at least one replicate")
    edges1 = _edge_index_rows(event1, map1)
    edges2 = _edge_index_rows(event2, map2)
    edges = np.concatenate([edges1, edges2], axis=0)
    cons1 = _constraints_in_order(event1)
    cons2 = _constraints_in_order(event2)
    m = len(edges1)

    def worker(lo: int, hi: int):
        ca = cb = cab = 0
        for start in range(lo, hi, _CHUNK):
            stop = min(start + _CHUNK, hi)
            seeds = child_seeds(seed, _DISSOC, start, stop)
            values = np.asarray(source.values_fixed_edges(seeds, edges))
            ok_a = _event_mask(values, cons1, col0=0)
            ok_b = _event_mask(values, cons2, col0=m)
            ca += int(ok_a.sum())
            cb += int(ok_b.sum())
            cab += int((ok_a & ok_b).sum())
        return (ca, cb, cab)

    na, nb, nab = _run_sharded(replicates, workers, worker)
    n = replicates
    pa, pb, pab = na / n, nb / n, nab / n
    joint = _make_report(nab, n, seed, "direct")
    prod_se = math.sqrt((pa * pb * (1 - pb) + pb * pa * (1 - pa)) / n)
    product = EstimateReport(
        pa * pb,
        prod_se,
        (max(0.0, pa * pb - Z99 * prod_se), min(1.0, pa * pb + Z99 * prod_se)),
        n,
        int(seed),
        "product",
    )
    diff = pab - pa * pb
    # influence function of pab - pa*pb; x == x*y == x*z for binary indicators
    e_w2 = pab * (1 + 2 * pa * pb - 2 * pa - 2 * pb) + pb * pb * pa + pa * pa * pb
    e_w = pab - 2 * pa * pb
    var_w = max(0.0, e_w2 - e_w * e_w)
    se = math.sqrt(var_w / n)
    return TestReport(_z(diff, se), joint, product, se, paired=True)


# ---------------------------------------------------------------------------
# Second-moment diagnostic
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SecondMomentReport:
    """Block-resampling dispersion diagnostic within and across realizations.

    ``within_ratio`` compares the average within-realization variance of block
    estimates to the sampling prediction p(1-p)/draws; ``across_over_within``
    compares the variance of per-realization means to what the within-block
    dispersion alone would produce.  Both tend to 1 for dissociated sources as
    the array grows; strong global mixing drives ``across_over_within`` up.
    """

    index_bound: int
    blocks: int
    draws_per_block: int
    realizations: int
    mean_estimate: float
    within_variance: float
    sampling_prediction: float
    within_ratio: float
    across_variance: float
    across_over_within: float
    degenerate: bool
    seed: int

    def to_dict(self) -> dict:
        return {
            "index_bound": self.index_bound,
            "blocks": self.blocks,
            "draws_per_block": self.draws_per_block,
            "realizations": self.realizations,
            "mean_estimate": self.mean_estimate,
            "within_variance": self.within_variance,
            "sampling_prediction": self.sampling_prediction,
            "within_ratio": self.within_ratio,
            "across_variance": self.across_variance,
            "across_over_within": self.across_over_within,
            "degenerate": self.degenerate,
            "seed": self.seed,
        }


def second_moment_diag(
    rho_or_source,
    event: EventHypergraph,
    index_bound: int,
    blocks: int,
    realizations: int,
    seed: int,
    *,
    draws_per_block: int = 64,
    workers: int = 1,
) -> SecondMomentReport:
    """Partition {1..M} into index-disjoint blocks, estimate the event
    frequency per block inside each realization, and compare dispersions."""
    source = _as_source(rho_or_source)
    if source.arity != event.arity:
        raise ArityError("source arity differs from event arity")
    if index_bound % blocks != 0:
        raise DomainError(f"index bound {index_bound} not divisible by {blocks} blocks")
    s = len(event.vertices)
    block_size = index_bound // blocks
    if block_size < s:
        raise DomainError(
            f"block size {block_size} is below the event's vertex count {s}"
        )
    if realizations < 1:
        raise DomainError("need at least one realization")
    positions = {v: i for i, v in enumerate(event.vertices)}
    edge_pos = [
        np.array([positions[v] for v in e], dtype=np.int64) for e in event.edges()
    ]
    constraints = _constraints_in_order(event)
    t = draws_per_block

    estimates = np.zeros((realizations, blocks), dtype=np.float64)
    fps = fingerprints(np.arange(1, t * s + 1, dtype=np.int64)[:, None]).reshape(t, s)

    def fill(lo: int, hi: int):
        arr_seeds = child_seeds(seed, _SM_ARRAY, lo, hi)
        c = hi - lo
        for b in range(blocks):
            block_master = child_seed(seed, _SM_BLOCK, b)
            map_seeds = child_seeds(block_master, _SM_MAP, lo, hi)
            u = uniforms_from(seed_states(map_seeds)[:, None, None], fps[None, :, :])
            idx = (u * block_size).astype(np.int64) + 1 + b * block_size
            inj = _injective_rows(idx)
            edges = np.stack(
                [np.sort(idx[:, :, pos], axis=2) for pos in edge_pos], axis=2
            )
            flat_edges = edges.reshape(c * t, len(edge_pos), event.arity)
            flat_seeds = np.repeat(arr_seeds, t)
            values = np.asarray(
                source.values_rowwise_edges(flat_seeds, flat_edges)
            ).reshape(c, t, len(edge_pos))
            ok = np.ones((c, t), dtype=bool)
            for j, bexpr in enumerate(constraints):
                ok &= indicator(bexpr, values[:, :, j])
            ok &= inj
            n_inj = inj.sum(axis=1)
            succ = ok.sum(axis=1)
            est = np.where(n_inj > 0, succ / np.maximum(n_inj, 1), 0.0)
            estimates[lo:hi, b] = est
        return (0,)

    _run_sharded(realizations, workers, fill)

    mean_estimate = float(estimates.mean())
    degenerate = blocks < 2
    if degenerate:
        return SecondMomentReport(
            index_bound, blocks, t, realizations, mean_estimate,
            math.nan, math.nan, math.nan, math.nan, math.nan, True, int(seed),
        )
    within = float(np.mean(np.var(estimates, axis=1, ddof=1)))
    pbar = mean_estimate
    inj_p = injectivity_probability(s, block_size)
    prediction = pbar * (1.0 - pbar) / (t * inj_p) if inj_p > 0 else math.nan
    within_ratio = within / prediction if prediction and prediction > 0 else math.nan
    realization_means = estimates.mean(axis=1)
    across = float(np.var(realization_means, ddof=1)) if realizations > 1 else math.nan
    expected_across = within / blocks
    across_over_within = across / expected_across if expected_across > 0 else math.nan
    return SecondMomentReport(
        index_bound, blocks, t, realizations, mean_estimate,
        within, prediction, within_ratio, across, across_over_within,
        False, int(seed),
    )
