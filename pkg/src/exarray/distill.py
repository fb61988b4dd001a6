"""Constructive recovery of a step-function representation from one realized
binary arity-2 array: degree-sort the vertices, partition into contiguous
groups, and read off block densities.  Closing the loop, the recovered step
function should reproduce the source array's event densities."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ArityError, DomainError
from .events import EventHypergraph
from .measure import Discrete
from .montecarlo import TestReport, _z, conditional_on_injective, estimate_direct, estimate_on_array
from .representation import RealizedArray, RhoSpec, step_graphon
from .latent import child_seed

_RESAMPLE_DIRECT = 0x31
_RESAMPLE_SOURCE = 0x32


@dataclass(frozen=True)
class BlockEstimate:
    """Symmetric matrix of estimated block densities plus the vertex grouping.

    ``assignment[v-1]`` is the group of vertex v; groups are contiguous runs
    of the degree-sorted vertex order (descending degree, ties by index).
    """

    block_count: int
    matrix: np.ndarray = field(repr=False)
    assignment: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "block_count": self.block_count,
            "matrix": [[float(x) for x in row] for row in self.matrix],
            "assignment": [int(b) for b in self.assignment],
        }

    def to_rho(self) -> RhoSpec:
        return step_graphon([[float(x) for x in row] for row in self.matrix])


def estimate_block_rho(array: RealizedArray, block_count: int) -> BlockEstimate:
    """Recover a block density matrix from a binary arity-2 array.

    Vertices are sorted by descending degree (ties by vertex index) and split
    into ``block_count`` contiguous groups of near-equal size, any remainder
    spread over the leading groups.  Entry (a, b) is the edge density between
    groups a and b; diagonal entries use unordered within-group pairs.
    """
    if array.arity != 2:
        raise ArityError("block recovery is defined for arity-2 arrays")
    if not isinstance(array.space, Discrete) or array.space.size != 2:
        raise DomainError("block recovery needs binary array values")
    k = array.size
    if block_count < 1 or k < 2 * block_count:
        raise DomainError(
            f"need index bound >= 2 * blocks, got {k} with {block_count} blocks"
        )
    adj = array.adjacency().astype(np.float64)
    degrees = adj.sum(axis=0)
    order = np.lexsort((np.arange(k), -degrees))
    sizes = np.full(block_count, k // block_count, dtype=np.int64)
    sizes[: k % block_count] += 1
    bounds = np.concatenate([[0], np.cumsum(sizes)])

    assignment = np.empty(k, dtype=np.int64)
    for g in range(block_count):
        assignment[order[bounds[g] : bounds[g + 1]]] = g

    matrix = np.zeros((block_count, block_count), dtype=np.float64)
    groups = [order[bounds[g] : bounds[g + 1]] for g in range(block_count)]
    for a in range(block_count):
        for b in range(a, block_count):
            sub = adj[np.ix_(groups[a], groups[b])]
            if a == b:
                pairs = sizes[a] * (sizes[a] - 1) / 2
                density = sub[np.triu_indices(sizes[a], k=1)].sum() / pairs if pairs else 0.0
            else:
                density = sub.mean()
            matrix[a, b] = matrix[b, a] = density
    return BlockEstimate(block_count, matrix, assignment)


def resample_and_compare(
    estimate: BlockEstimate,
    event: EventHypergraph,
    array: RealizedArray,
    replicates: int,
    seed: int,
    *,
    workers: int = 1,
) -> TestReport:
    """Check that the recovered step function reproduces the source array's
    event density: direct estimate under the rebuilt spec versus the
    injectivity-corrected sampling estimate on the array itself."""
    rebuilt = estimate.to_rho()
    direct = estimate_direct(
        rebuilt, event, replicates, child_seed(seed, _RESAMPLE_DIRECT), workers=workers
    )
    raw = estimate_on_array(
        array, event, replicates, child_seed(seed, _RESAMPLE_SOURCE), workers=workers
    )
    on_source = conditional_on_injective(raw, len(event.vertices))
    diff = direct.estimate - on_source.estimate
    se = (direct.stderr**2 + on_source.stderr**2) ** 0.5
    return TestReport(_z(diff, se), direct, on_source, se, paired=False)
