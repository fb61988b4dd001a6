"""Representation functions and realization of exchangeable arrays.

A `RhoSpec` turns the latents of one edge into an array value: value at edge
e = body({xi[sigma]}_{sigma subset of e}), with latents entering in canonical
sorted order.  Bodies are either one of the built-in families below or an
expression tree over the symbols ``xi[sigma]`` for sigma a subset of the
positions {1..n}.  Bodies must be invariant under relabeling of the positions;
asymmetric expressions are rejected by `validate_spec` rather than
symmetrized.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    ArityError,
    DomainError,
    IncompleteAssignmentError,
    SpecValidationError,
)
from .latent import LatentAssignment, SubsetKey, fingerprints, seed_states, uniforms_from
from .measure import Discrete, UNIT_INTERVAL, ValueSpace

EMPTY_SET: frozenset[int] = frozenset()

# Environment passed to bodies: position subset -> latent value(s).
Env = Mapping[frozenset, "np.ndarray | float"]


# ---------------------------------------------------------------------------
# Expression trees
# ---------------------------------------------------------------------------


class Expr:
    """Node of a representation-body expression tree."""

    def evaluate(self, env: Env):  # pragma: no cover - overridden
        raise NotImplementedError

    def symbols(self) -> set[frozenset]:  # pragma: no cover - overridden
        raise NotImplementedError


@dataclass(frozen=True)
class Xi(Expr):
    """The latent attached to a subset of edge positions (1-based)."""

    sigma: frozenset[int]

    def __init__(self, positions: Iterable[int]):
        object.__setattr__(self, "sigma", frozenset(int(p) for p in positions))

    def evaluate(self, env: Env):
        try:
            return env[self.sigma]
        except KeyError:
            raise IncompleteAssignmentError(
                f"no latent for position subset {sorted(self.sigma)}"
            )

    def symbols(self):
        return {self.sigma}


@dataclass(frozen=True)
class Const(Expr):
    value: float

    def evaluate(self, env: Env):
        return self.value

    def symbols(self):
        return set()


def _nary(op):
    @dataclass(frozen=True)
    class Node(Expr):
        args: tuple[Expr, ...]

        def __init__(self, *args):
            if len(args) == 1 and isinstance(args[0], (tuple, list)):
                args = tuple(args[0])
            if len(args) < 2:
                raise DomainError("need at least two operands")
            object.__setattr__(self, "args", tuple(args))

        def evaluate(self, env: Env):
            vals = [a.evaluate(env) for a in self.args]
            out = vals[0]
            for v in vals[1:]:
                out = op(out, v)
            return out

        def symbols(self):
            out: set[frozenset] = set()
            for a in self.args:
                out |= a.symbols()
            return out

    return Node


Sum = _nary(np.add)
Prod = _nary(np.multiply)
MinOf = _nary(np.minimum)
MaxOf = _nary(np.maximum)
for _cls, _name in ((Sum, "Sum"), (Prod, "Prod"), (MinOf, "MinOf"), (MaxOf, "MaxOf")):
    _cls.__name__ = _cls.__qualname__ = _name


@dataclass(frozen=True)
class Diff(Expr):
    left: Expr
    right: Expr

    def evaluate(self, env: Env):
        return np.subtract(self.left.evaluate(env), self.right.evaluate(env))

    def symbols(self):
        return self.left.symbols() | self.right.symbols()


@dataclass(frozen=True)
class Less(Expr):
    """0/1 indicator of left < right."""

    left: Expr
    right: Expr

    def evaluate(self, env: Env):
        return np.less(self.left.evaluate(env), self.right.evaluate(env)).astype(np.int64)

    def symbols(self):
        return self.left.symbols() | self.right.symbols()


@dataclass(frozen=True)
class LessEq(Expr):
    left: Expr
    right: Expr

    def evaluate(self, env: Env):
        return np.less_equal(self.left.evaluate(env), self.right.evaluate(env)).astype(np.int64)

    def symbols(self):
        return self.left.symbols() | self.right.symbols()


@dataclass(frozen=True)
class StepTable(Expr):
    """Piecewise-constant lookup: values[j] on [breaks[j-1], breaks[j])."""

    arg: Expr
    breaks: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != len(self.breaks) + 1:
            raise DomainError("step table needs len(values) == len(breaks) + 1")
        if any(a >= b for a, b in zip(self.breaks, self.breaks[1:])):
            raise DomainError("step breaks must be strictly increasing")

    def evaluate(self, env: Env):
        x = self.arg.evaluate(env)
        idx = np.searchsorted(np.asarray(self.breaks), x, side="right")
        return np.asarray(self.values)[idx]

    def symbols(self):
        return self.arg.symbols()


# ---------------------------------------------------------------------------
# Built-in families
# ---------------------------------------------------------------------------


class Family:
    """A named representation body with a fixed arity and output space."""

    arity: int
    dissociated: bool
    output: ValueSpace

    def needed_subsets(self) -> set[frozenset]:  # pragma: no cover - overridden
        raise NotImplementedError

    def evaluate(self, env: Env):  # pragma: no cover - overridden
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantGraphon(Family):
    """Erdos-Renyi edge rule: 1 iff the pair latent falls below p."""

    p: float
    arity: int = field(default=2, init=False)
    dissociated: bool = field(default=True, init=False)

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"edge probability must be in [0,1], got {self.p}")
        object.__setattr__(self, "output", Discrete(2))

    def needed_subsets(self):
        return {frozenset({1, 2})}

    def evaluate(self, env: Env):
        return np.less(env[frozenset({1, 2})], self.p).astype(np.int64)


@dataclass(frozen=True)
class ProductGraphon(Family):
    """W(x, y) = x*y: edge present iff the pair latent falls below x_i * x_j."""

    arity: int = field(default=2, init=False)
    dissociated: bool = field(default=True, init=False)

    def __post_init__(self):
        object.__setattr__(self, "output", Discrete(2))

    def needed_subsets(self):
        return {frozenset({1}), frozenset({2}), frozenset({1, 2})}

    def evaluate(self, env: Env):
        prod = np.multiply(env[frozenset({1})], env[frozenset({2})])
        return np.less(env[frozenset({1, 2})], prod).astype(np.int64)


@dataclass(frozen=True)
class StepGraphon(Family):
    """Block-constant graphon: vertex i's block is floor(B * x_i), edge rule
    compares the pair latent to the symmetric block matrix."""

    matrix: tuple[tuple[float, ...], ...]
    arity: int = field(default=2, init=False)
    dissociated: bool = field(default=True, init=False)

    def __init__(self, matrix):
        m = tuple(tuple(float(v) for v in row) for row in matrix)
        b = len(m)
        if b == 0 or any(len(row) != b for row in m):
            raise DomainError("block matrix must be square and nonempty")
        for i in range(b):
            for j in range(b):
                if not 0.0 <= m[i][j] <= 1.0:
                    raise DomainError("block probabilities must be in [0,1]")
                if m[i][j] != m[j][i]:
                    raise SpecValidationError("block matrix must be symmetric")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "output", Discrete(2))

    @property
    def blocks(self) -> int:
        return len(self.matrix)

    def needed_subsets(self):
        return {frozenset({1}), frozenset({2}), frozenset({1, 2})}

    def evaluate(self, env: Env):
        b = self.blocks
        b1 = np.floor(np.multiply(env[frozenset({1})], b)).astype(np.int64)
        b2 = np.floor(np.multiply(env[frozenset({2})], b)).astype(np.int64)
        p = np.asarray(self.matrix)[b1, b2]
        return np.less(env[frozenset({1, 2})], p).astype(np.int64)


@dataclass(frozen=True)
class CoinMixture(Family):
    """Two-stage coin: the global latent picks a component by weight, the
    vertex latent flips that component's coin.  Not dissociated."""

    probs: tuple[float, ...]
    weights: tuple[float, ...]
    arity: int = field(default=1, init=False)
    dissociated: bool = field(default=False, init=False)

    def __init__(self, probs, weights):
        p = tuple(float(v) for v in probs)
        w = tuple(float(v) for v in weights)
        if len(p) != len(w) or not p:
            raise DomainError("probs and weights must be equal-length and nonempty")
        if any(not 0.0 <= v <= 1.0 for v in p):
            raise DomainError("component probabilities must be in [0,1]")
        if any(v < 0 for v in w) or abs(sum(w) - 1.0) > 1e-12:
            raise DomainError("weights must be nonnegative and sum to 1")
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "output", Discrete(2))

    def needed_subsets(self):
        return {EMPTY_SET, frozenset({1})}

    def evaluate(self, env: Env):
        cum = np.cumsum(self.weights)
        comp = np.searchsorted(cum, env[EMPTY_SET], side="right")
        comp = np.minimum(comp, len(self.probs) - 1)
        q = np.asarray(self.probs)[comp]
        return np.less(env[frozenset({1})], q).astype(np.int64)


@dataclass(frozen=True)
class IdentityLatent(Family):
    """Passes the top-level edge latent through; output is the unit interval."""

    arity: int = 2
    dissociated: bool = field(default=True, init=False)

    def __post_init__(self):
        if self.arity < 1:
            raise ArityError(f"arity must be positive, got {self.arity}")
        object.__setattr__(self, "output", UNIT_INTERVAL)

    def needed_subsets(self):
        return {frozenset(range(1, self.arity + 1))}

    def evaluate(self, env: Env):
        return env[frozenset(range(1, self.arity + 1))]


@dataclass(frozen=True)
class ExpressionBody(Family):
    """User-defined body: an expression tree plus explicit metadata."""

    expr: Expr
    arity: int
    dissociated: bool
    output: ValueSpace

    def needed_subsets(self):
        return set(self.expr.symbols())

    def evaluate(self, env: Env):
        return self.expr.evaluate(env)


# ---------------------------------------------------------------------------
# RhoSpec
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RhoSpec:
    """A representation function: arity, dissociation flag, output space, body.

    Construction is permissive so that `validate_spec` can report on broken
    specs; the realization and estimation entry points re-validate and refuse
    invalid ones.
    """

    arity: int
    dissociated: bool
    output: ValueSpace
    body: Family

    def needed_subsets(self) -> set[frozenset]:
        return self.body.needed_subsets()


def constant_graphon(p: float) -> RhoSpec:
    fam = ConstantGraphon(p)
    return RhoSpec(2, True, fam.output, fam)


def product_graphon() -> RhoSpec:
    fam = ProductGraphon()
    return RhoSpec(2, True, fam.output, fam)


def step_graphon(matrix) -> RhoSpec:
    fam = StepGraphon(matrix)
    return RhoSpec(2, True, fam.output, fam)


def coin_mixture(probs, weights) -> RhoSpec:
    fam = CoinMixture(probs, weights)
    return RhoSpec(1, False, fam.output, fam)


def identity_latent(arity: int = 2) -> RhoSpec:
    fam = IdentityLatent(arity)
    return RhoSpec(arity, True, fam.output, fam)


def expression_rho(
    expr: Expr, arity: int, dissociated: bool, output: ValueSpace
) -> RhoSpec:
    return RhoSpec(arity, dissociated, output, ExpressionBody(expr, arity, dissociated, output))


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    dissociated: bool
    findings: tuple[str, ...]


_SYMMETRY_TRIALS = 100
_SYMMETRY_RTOL = 1e-9
_SYMMETRY_SEED = 0xD15A


def validate_spec(rho: RhoSpec) -> ValidationReport:
    """Check symbol scope, global-latent usage versus the dissociated flag,
    and relabeling symmetry (brute force over all n! relabelings on random
    latent assignments).  Findings are reported, not raised."""
    findings: list[str] = []
    n = rho.arity
    positions = frozenset(range(1, n + 1))
    needed = rho.needed_subsets()

    for sigma in needed:
        if not sigma <= positions:
            findings.append(
                f"body references xi[{sorted(sigma)}] outside positions 1..{n}"
            )
    if rho.dissociated and EMPTY_SET in needed:
        findings.append("dissociated spec references the global latent xi[{}]")
    if rho.body.arity != n:
        findings.append(
            f"body arity {rho.body.arity} disagrees with spec arity {n}"
        )

    if not findings and n <= 6:
        all_subsets = [
            frozenset(c)
            for r in range(n + 1)
            for c in itertools.combinations(range(1, n + 1), r)
        ]
        rng = np.random.default_rng(_SYMMETRY_SEED)
        perms = list(itertools.permutations(range(1, n + 1)))
        for _ in range(_SYMMETRY_TRIALS):
            env = {s: float(rng.random()) for s in all_subsets}
            base = None
            for perm in perms:
                relabeled = {
                    s: env[frozenset(perm[p - 1] for p in s)] for s in all_subsets
                }
                val = float(np.asarray(rho.body.evaluate(relabeled)))
                if base is None:
                    base = val
                elif not math.isclose(base, val, rel_tol=_SYMMETRY_RTOL, abs_tol=1e-12):
                    findings.append(
                        "body is not invariant under relabeling of positions "
                        f"(permutation {perm})"
                    )
                    break
            else:
                continue
            break

    return ValidationReport(not findings, rho.dissociated, tuple(findings))


def _check_valid(rho: RhoSpec) -> None:
    report = validate_spec(rho)
    if not report.valid:
        raise SpecValidationError("; ".join(report.findings))


# ---------------------------------------------------------------------------
# Evaluation and realization
# ---------------------------------------------------------------------------


def _env_from_assignment(rho: RhoSpec, latents: LatentAssignment) -> Env:
    """Map the body's position subsets to values from an edge's latent family."""
    sizes = [k.size for k in latents.keys()]
    n = max(sizes) if sizes else 0
    if n != rho.arity:
        raise ArityError(
            f"latent family covers an edge of size {n}, spec arity is {rho.arity}"
        )
    edge = ()
    for k in latents.keys():
        if k.size == n:
            edge = k.indices
            break
    env: dict[frozenset, float] = {}
    for sigma in rho.needed_subsets():
        key = SubsetKey(tuple(sorted(edge[p - 1] for p in sigma)), max(1, n))
        if key not in latents:
            raise IncompleteAssignmentError(
                f"assignment is missing the latent for {key.indices}"
            )
        env[sigma] = latents[key]
    return env


def eval_rho(rho: RhoSpec, latents: LatentAssignment):
    """Value of the representation at one edge, from that edge's latents."""
    if rho.dissociated and EMPTY_SET in rho.needed_subsets():
        raise SpecValidationError("dissociated spec references the global latent")
    value = rho.body.evaluate(_env_from_assignment(rho, latents))
    value = np.asarray(value)
    if isinstance(rho.output, Discrete):
        out = int(value)
        if not 0 <= out < rho.output.size:
            raise SpecValidationError(
                f"value {out} escapes the discrete output space of size {rho.output.size}"
            )
        return out
    return float(value)


def _edge_rank(edge: tuple[int, ...], k: int, n: int) -> int:
    """Lexicographic rank of a sorted 1-based n-subset of {1..k}."""
    rank = 0
    prev = 0
    for j, c in enumerate(edge):
        for v in range(prev + 1, c):
            rank += math.comb(k - v, n - j - 1)
        prev = c
    return rank


@dataclass(frozen=True)
class RealizedArray:
    """One sample of the exchangeable array on indices {1..size}.

    Values are stored flat over the lexicographically ordered n-subsets; use
    item access with any ordering of the indices.
    """

    arity: int
    size: int
    values: np.ndarray = field(repr=False)
    seed: int
    space: ValueSpace

    def __getitem__(self, edge) -> float | int:
        e = tuple(sorted(int(i) for i in edge))
        if len(e) != self.arity or len(set(e)) != self.arity:
            raise ArityError(f"edge {edge!r} is not a {self.arity}-subset")
        if e[0] < 1 or e[-1] > self.size:
            raise DomainError(f"edge {edge!r} is out of range 1..{self.size}")
        v = self.values[_edge_rank(e, self.size, self.arity)]
        return int(v) if isinstance(self.space, Discrete) else float(v)

    def edges(self):
        return itertools.combinations(range(1, self.size + 1), self.arity)

    def adjacency(self) -> np.ndarray:
        """Dense symmetric matrix (zero diagonal); arity-2 arrays only."""
        if self.arity != 2:
            raise ArityError("adjacency is defined for arity-2 arrays only")
        mat = np.zeros((self.size, self.size), dtype=self.values.dtype)
        iu = np.triu_indices(self.size, k=1)
        mat[iu] = self.values
        mat[(iu[1], iu[0])] = self.values
        return mat


def edge_values_for(
    rho: RhoSpec,
    seeds: np.ndarray,
    edges: np.ndarray,
    overrides: Mapping[SubsetKey, float] | None = None,
) -> np.ndarray:
    """Array values for many (seed, edge) pairs at once.

    ``seeds`` has shape (N,) or (); ``edges`` has shape (m, n) or (N, m, n)
    with rows sorted ascending.  Result broadcasts to (N, m).  This is the
    vectorized core shared by realization and the Monte Carlo engine; it is
    bit-identical to `eval_rho` on `latent_family` values.  ``overrides``
    pins chosen latents to constants (a test hook for conditioning).
    """
    seeds = np.asarray(seeds, dtype=np.uint64)
    edges = np.asarray(edges, dtype=np.int64)
    per_row = edges.ndim == 3
    states = seed_states(seeds)
    if seeds.ndim == 1:
        states = states[:, None]
    env: dict[frozenset, np.ndarray] = {}
    for sigma in rho.needed_subsets():
        cols = np.array(sorted(sigma), dtype=np.int64) - 1
        if per_row:
            idx = edges[:, :, cols] if cols.size else edges[:, :, :0]
            if cols.size:
                flat = idx.reshape(-1, cols.size)
                fps = fingerprints(flat).reshape(idx.shape[0], idx.shape[1])
            else:
                fp0 = fingerprints(np.empty((1, 0), dtype=np.int64))[0]
                fps = np.full(edges.shape[:2], fp0, dtype=np.uint64)
        else:
            idx = edges[:, cols] if cols.size else edges[:, :0]
            fps = fingerprints(idx)
        vals = uniforms_from(states, fps)
        if overrides:
            for key, pinned in overrides.items():
                if key.size == len(sigma):
                    mask = np.all(idx == np.array(key.indices), axis=-1)
                    if vals.ndim > mask.ndim:
                        mask = mask[None, :]
                    vals = np.where(mask, pinned, vals)
        env[sigma] = vals
    out = rho.body.evaluate(env)
    return np.asarray(out)


def realize_array(rho: RhoSpec, seed: int, size: int) -> RealizedArray:
    """Realize the array on {1..size}: one value per n-subset, with shared
    lower-order latents across overlapping edges."""
    _check_valid(rho)
    n = rho.arity
    if size < n:
        raise DomainError(f"index bound {size} is below the arity {n}")
    edges = np.array(
        list(itertools.combinations(range(1, size + 1), n)), dtype=np.int64
    )
    values = np.empty(len(edges), dtype=np.float64)
    chunk = 1 << 18
    for start in range(0, len(edges), chunk):
        block = edges[start : start + chunk]
        vals = edge_values_for(rho, np.uint64(seed), block)
        values[start : start + chunk] = np.asarray(vals, dtype=np.float64).reshape(-1)
    if isinstance(rho.output, Discrete):
        values = values.astype(np.int64)
    return RealizedArray(n, size, values, int(seed), rho.output)
