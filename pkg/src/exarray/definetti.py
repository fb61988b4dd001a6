"""The arity-1 specialization: finite mixtures of coins, their closed-form
moments, and empirical recovery of the mixing weights from limiting
frequencies of long realized sequences."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError
from .latent import child_seeds, fingerprints, seed_states, uniforms_from
from .representation import CoinMixture, RhoSpec, coin_mixture

_HIST_ARRAY = 0x21


@dataclass(frozen=True)
class MixtureSpec:
    """Finite mixing distribution: components (q_j, w_j) with weights summing to 1."""

    probs: tuple[float, ...]
    weights: tuple[float, ...]

    def __init__(self, components: Sequence[tuple[float, float]]):
        probs = tuple(float(q) for q, _ in components)
        weights = tuple(float(w) for _, w in components)
        if not probs:
            raise DomainError("mixture needs at least one component")
        if any(not 0.0 <= q <= 1.0 for q in probs):
            raise DomainError("success probabilities must lie in [0,1]")
        if any(w < 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-12:
            raise DomainError("weights must be nonnegative and sum to 1 within 1e-12")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "weights", weights)

    def to_rho(self) -> RhoSpec:
        return coin_mixture(self.probs, self.weights)

    @classmethod
    def from_rho(cls, rho: RhoSpec) -> "MixtureSpec":
        if not isinstance(rho.body, CoinMixture):
            raise DomainError("spec body is not a coin mixture")
        return cls(list(zip(rho.body.probs, rho.body.weights)))


def mixture_moment(mixture: MixtureSpec, k: int) -> float:
    """P(k designated variables are all 1) = sum_j w_j q_j^k."""
    if k < 0:
        raise DomainError(f"moment order must be nonnegative, got {k}")
    return float(sum(w * q**k for q, w in zip(mixture.probs, mixture.weights)))


def uniform_mixture_moment(k: int) -> float:
    """Moment of the uniform mixing distribution: integral of p^k dp = 1/(k+1)."""
    if k < 0:
        raise DomainError(f"moment order must be nonnegative, got {k}")
    return 1.0 / (k + 1)


def discretized_uniform(atoms: int = 100) -> MixtureSpec:
    """Midpoint discretization of the uniform mixing distribution.

    Moment error against 1/(k+1) is at most k/(24*atoms^2).
    """
    if atoms < 1:
        raise DomainError("need at least one atom")
    return MixtureSpec([((j + 0.5) / atoms, 1.0 / atoms) for j in range(atoms)])


@dataclass(frozen=True)
class FrequencyHistogram:
    """Histogram of per-replicate empirical success frequencies."""

    bin_edges: tuple[float, ...]
    masses: tuple[float, ...]
    sequence_length: int
    replicates: int
    seed: int

    def mass_in(self, lo: float, hi: float) -> float:
        """Total mass of bins entirely inside [lo, hi] (up to float dust)."""
        total = 0.0
        for i, m in enumerate(self.masses):
            if self.bin_edges[i] >= lo - 1e-12 and self.bin_edges[i + 1] <= hi + 1e-12:
                total += m
        return total

    def to_rows(self) -> list[dict]:
        return [
            {"bin_left": self.bin_edges[i], "bin_right": self.bin_edges[i + 1], "mass": m}
            for i, m in enumerate(self.masses)
        ]

    def to_dict(self) -> dict:
        return {
            "bin_edges": list(self.bin_edges),
            "masses": list(self.masses),
            "sequence_length": self.sequence_length,
            "replicates": self.replicates,
            "seed": self.seed,
        }


def frequency_limit_histogram(
    rho: RhoSpec,
    sequence_length: int,
    replicates: int,
    seed: int,
    bins: Sequence[float] | int = 20,
) -> FrequencyHistogram:
    """Realize X_1..X_L per replicate and histogram the empirical means.

    As L grows the mass near each component probability converges to that
    component's weight.  Bin edges are fixed by the caller (an integer asks
    for that many equal bins on [0, 1]); no adaptive binning.
    """
    if sequence_length < 1:
        raise DomainError("sequence length must be >= 1")
    if replicates < 1:
        raise DomainError("need at least one replicate")
    if not isinstance(rho.body, CoinMixture):
        raise DomainError("frequency histogram is defined for coin-mixture specs")
    if isinstance(bins, int):
        edges = np.linspace(0.0, 1.0, bins + 1)
    else:
        edges = np.asarray([float(b) for b in bins])
        if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
            raise DomainError("bin edges must be increasing and at least two")

    probs = np.asarray(rho.body.probs)
    cum = np.cumsum(rho.body.weights)
    fps_single = fingerprints(
        np.arange(1, sequence_length + 1, dtype=np.int64)[:, None]
    )
    fp_empty = fingerprints(np.empty((1, 0), dtype=np.int64))[0]

    counts = np.zeros(len(edges) - 1, dtype=np.int64)
    chunk = max(1, 2_000_000 // sequence_length)
    for start in range(0, replicates, chunk):
        stop = min(start + chunk, replicates)
        states = seed_states(child_seeds(seed, _HIST_ARRAY, start, stop))
        xi_empty = uniforms_from(states, fp_empty)
        comp = np.minimum(np.searchsorted(cum, xi_empty, side="right"), len(probs) - 1)
        q = probs[comp]
        singles = uniforms_from(states[:, None], fps_single[None, :])
        means = (singles < q[:, None]).mean(axis=1)
        c, _ = np.histogram(means, bins=edges)
        counts += c

    masses = counts / replicates
    return FrequencyHistogram(
        tuple(float(e) for e in edges),
        tuple(float(m) for m in masses),
        sequence_length,
        replicates,
        int(seed),
    )
