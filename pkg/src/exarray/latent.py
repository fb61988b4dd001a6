"""Deterministic source of i.i.d.-uniform latent variables indexed by finite index sets.

Every latent is a pure function of ``(seed, key)`` where the key is a canonical
(strictly increasing) tuple of non-negative integers.  There is no stream state:
two overlapping edges automatically agree on the latents of their shared
subsets, and evaluation order or worker count cannot change any value.

The construction is a counter-based keyed mixer: the seed and the key material
(subset size, then each index) are absorbed into a 64-bit state through a
splitmix64-style finalizer, and the top 53 bits of the final state become a
uniform double in [0, 1).  Python's built-in ``hash`` is salted per process, so
it is unusable here; this mixer is stable across runs, platforms and processes.

A NumPy path (`seed_states` / `fingerprints` / `uniforms_from`) produces
bit-identical values for whole arrays of seeds or keys at once; the scalar and
vector paths are interchangeable and are cross-checked in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import ArityError, CanonicalizationError

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX_1 = 0xBF58476D1CE4E5B9
_MIX_2 = 0x94D049BB133111EB

# Domain-separation tags so that seeds, key levels and derived streams can
# never alias each other.
_SEED_TAG = 0x243F6A8885A308D3
_LEVEL_TAG = 0x13198A2E03707344
_STREAM_TAG = 0xA4093822299F31D0

_U = np.uint64
_INV_2_53 = 2.0 ** -53


def _mix64(z: int) -> int:
    """splitmix64 finalizer on a 64-bit integer (pure-Python path)."""
    z = (z + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * _MIX_1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX_2) & _MASK64
    return z ^ (z >> 31)


def _mix64_vec(z: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer, elementwise on uint64 arrays."""
    with np.errstate(over="ignore"):
        z = z + _U(_GOLDEN)
        z = (z ^ (z >> _U(30))) * _U(_MIX_1)
        z = (z ^ (z >> _U(27))) * _U(_MIX_2)
        return z ^ (z >> _U(31))


@dataclass(frozen=True)
class SubsetKey:
    """Canonical identifier of one latent: a strictly increasing index tuple.

    ``arity`` is the arity bound of the surrounding family; it validates
    ``len(indices) <= arity`` but is not key material — the latent value
    depends on the index set alone.
    """

    indices: tuple[int, ...]
    arity: int = 0  # 0 means "default to max(1, len(indices))"

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        if self.arity == 0:
            object.__setattr__(self, "arity", max(1, len(idx)))
        if self.arity < 1:
            raise ArityError(f"arity bound must be positive, got {self.arity}")
        for i in idx:
            if i < 0:
                raise CanonicalizationError(f"negative index {i} in {idx}")
        if any(a >= b for a, b in zip(idx, idx[1:])):
            raise CanonicalizationError(
                f"indices must be strictly increasing, got {idx}"
            )
        if len(idx) > self.arity:
            raise ArityError(
                f"key has {len(idx)} indices, exceeds arity bound {self.arity}"
            )

    @classmethod
    def from_indices(cls, indices: Iterable[int], arity: int = 0) -> "SubsetKey":
        """Build a key from any iterable of indices, with set semantics
        (duplicates collapse, order is irrelevant)."""
        return cls(tuple(sorted(set(int(i) for i in indices))), arity)

    @property
    def size(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)


def _as_key(key) -> SubsetKey:
    if isinstance(key, SubsetKey):
        return key
    return SubsetKey(tuple(int(i) for i in key))


def key_fingerprint(key: SubsetKey | Iterable[int]) -> int:
    """64-bit fingerprint of a canonical key: absorbs |sigma| then each index."""
    key = _as_key(key)
    h = _mix64(_LEVEL_TAG ^ len(key.indices))
    for i in key.indices:
        h = _mix64(h ^ i)
    return h


def seed_state(seed: int) -> int:
    """Pre-mixed seed half of the latent computation."""
    return _mix64((int(seed) & _MASK64) ^ _SEED_TAG)


def latent(seed: int, key: SubsetKey | Iterable[int]) -> float:
    """The uniform [0, 1) latent attached to ``key`` under ``seed``.

    Pure function of its arguments; 53 bits of output entropy.  Raises
    `CanonicalizationError` if the key is unsorted or has duplicates (use
    `SubsetKey.from_indices` for set semantics).
    """
    h = _mix64(seed_state(seed) ^ key_fingerprint(key))
    return (h >> 11) * _INV_2_53


def child_seed(seed: int, *words: int) -> int:
    """Derive a 64-bit stream seed from ``seed`` and integer words.

    Uses the same keyed mixing as `latent`; replicate seeds in the Monte
    Carlo engine are ``child_seed(master, stream_tag, replicate_index)``.
    """
    h = _mix64((int(seed) & _MASK64) ^ _STREAM_TAG)
    for w in words:
        h = _mix64(h ^ (int(w) & _MASK64))
    return h


@dataclass(frozen=True)
class LatentAssignment:
    """Latents for every subset of one edge, keyed by `SubsetKey`."""

    seed: int
    values: Mapping[SubsetKey, float] = field(repr=False)

    def __getitem__(self, key) -> float:
        return self.values[_as_key(key)]

    def __contains__(self, key) -> bool:
        return _as_key(key) in self.values

    def __len__(self) -> int:
        return len(self.values)

    def keys(self):
        return self.values.keys()


def _subsets(indices: tuple[int, ...]) -> list[tuple[int, ...]]:
    out: list[tuple[int, ...]] = [()]
    for i in indices:
        out += [s + (i,) for s in out]
    return out


def latent_family(seed: int, edge: SubsetKey | Iterable[int]) -> LatentAssignment:
    """Latents for all 2^n subsets of ``edge`` (including the empty set).

    ``edge`` must have exactly ``arity`` indices.  Families of overlapping
    edges agree on shared subsets because each value depends only on its key.
    """
    edge = _as_key(edge)
    if edge.size != edge.arity:
        raise ArityError(
            f"edge {edge.indices} has {edge.size} indices, expected {edge.arity}"
        )
    values = {
        SubsetKey(s, edge.arity): latent(seed, SubsetKey(s, edge.arity))
        for s in _subsets(edge.indices)
    }
    return LatentAssignment(seed=int(seed), values=values)


# ---------------------------------------------------------------------------
# Vectorized path (bit-identical to the scalar functions above)
# ---------------------------------------------------------------------------

def seed_states(seeds: np.ndarray) -> np.ndarray:
    """Vectorized `seed_state` over a uint64 array of seeds."""
    return _mix64_vec(np.asarray(seeds, dtype=np.uint64) ^ _U(_SEED_TAG))


def child_seeds(seed: int, word: int, start: int, stop: int) -> np.ndarray:
    """``child_seed(seed, word, r)`` for r in [start, stop), as a uint64 array."""
    h0 = _mix64(_mix64((int(seed) & _MASK64) ^ _STREAM_TAG) ^ (int(word) & _MASK64))
    return _mix64_vec(_U(h0) ^ np.arange(start, stop, dtype=np.uint64))


def fingerprints(index_rows: np.ndarray) -> np.ndarray:
    """`key_fingerprint` for each row of a (rows, level) matrix of sorted indices.

    A (0-column) matrix fingerprints the empty key for every row.
    """
    index_rows = np.asarray(index_rows, dtype=np.uint64)
    if index_rows.ndim != 2:
        raise ValueError("index_rows must be 2-dimensional")
    level = index_rows.shape[1]
    h = np.full(index_rows.shape[0], _mix64(_LEVEL_TAG ^ level), dtype=np.uint64)
    for col in range(level):
        h = _mix64_vec(h ^ index_rows[:, col])
    return h


def uniforms_from(states: np.ndarray, fps: np.ndarray) -> np.ndarray:
    """Uniform [0, 1) latents from pre-mixed seed states and key fingerprints.

    Standard NumPy broadcasting applies, so states of shape (N, 1) against
    fingerprints of shape (m,) yield an (N, m) block of latents.
    """
    h = _mix64_vec(np.asarray(states, dtype=np.uint64) ^ np.asarray(fps, dtype=np.uint64))
    return (h >> _U(11)).astype(np.float64) * _INV_2_53
