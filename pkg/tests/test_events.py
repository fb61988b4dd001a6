import itertools

import numpy as np
import pytest

import exarray as xa
from exarray.errors import ArityError, DomainError, InjectivityError
from exarray.representation import RealizedArray

from helpers import EDGE_HIT, binary_edge_event, triangle_event


def manual_array(size, values, arity=2):
    return RealizedArray(
        arity, size, np.asarray(values, dtype=np.int64), seed=0, space=xa.Discrete(2)
    )


class TestConstruction:
    def test_every_edge_needs_constraint(self):
        with pytest.raises(DomainError):
            xa.EventHypergraph(
                ("a", "b", "c"), 2, xa.Discrete(2), {("a", "b"): xa.FULL}
            )

    def test_build_fills_full(self):
        h = xa.EventHypergraph.build(["a", "b", "c"], 2, xa.Discrete(2))
        assert all(b == xa.FULL for b in h.constraints.values())
        assert len(h.constraints) == 3

    def test_edges_canonicalized(self):
        h = xa.EventHypergraph.build(
            ["b", "a"], 2, xa.Discrete(2), {("b", "a"): EDGE_HIT}
        )
        assert h.constraint(("a", "b")) == EDGE_HIT


class TestEvaluateEvent:
    def test_all_full_true(self):
        h = xa.EventHypergraph.build(["a", "b", "c"], 2, xa.Discrete(2))
        arr = manual_array(3, [0, 0, 0])
        assert xa.evaluate_event(h, {"a": 1, "b": 2, "c": 3}, arr)

    def test_triangle_on_complete_graph(self):
        arr = manual_array(3, [1, 1, 1])
        assert xa.evaluate_event(triangle_event(), {"a": 1, "b": 2, "c": 3}, arr)

    def test_triangle_one_missing_edge(self):
        arr = manual_array(3, [1, 1, 0])  # edges (1,2), (1,3), (2,3)
        assert not xa.evaluate_event(triangle_event(), {"a": 1, "b": 2, "c": 3}, arr)

    def test_non_injective_rejected(self):
        arr = manual_array(3, [1, 1, 1])
        with pytest.raises(InjectivityError):
            xa.evaluate_event(triangle_event(), {"a": 1, "b": 1, "c": 3}, arr)

    def test_out_of_range_rejected(self):
        arr = manual_array(3, [1, 1, 1])
        with pytest.raises(DomainError):
            xa.evaluate_event(triangle_event(), {"a": 1, "b": 2, "c": 9}, arr)

    def test_arity_mismatch(self):
        arr = manual_array(3, [1, 1, 1])
        h = xa.EventHypergraph.build(["a"], 1, xa.Discrete(2), {("a",): EDGE_HIT})
        with pytest.raises(ArityError):
            xa.evaluate_event(h, {"a": 1}, arr)


class TestRelabel:
    def test_identity(self):
        h = triangle_event()
        assert xa.relabel(h, {"a": "a", "b": "b", "c": "c"}) == h

    def test_swap_symmetric_triangle(self):
        h = triangle_event()
        assert xa.relabel(h, {"a": "b", "b": "a", "c": "c"}) == h

    def test_non_bijective_rejected(self):
        with pytest.raises(DomainError):
            xa.relabel(triangle_event(), {"a": "a", "b": "a", "c": "c"})

    def test_relabel_evaluation_identity(self):
        # evaluate_event(relabel(H, pi), f, A) == evaluate_event(H, f o pi, A)
        rng = np.random.default_rng(13)
        verts = ["a", "b", "c"]
        pool = [EDGE_HIT, xa.FULL, xa.DiscreteSubset({0}), xa.Complement(EDGE_HIT)]
        for _ in range(100):
            cons = {
                e: pool[rng.integers(len(pool))]
                for e in itertools.combinations(verts, 2)
            }
            h = xa.EventHypergraph.build(verts, 2, xa.Discrete(2), cons)
            perm = rng.permutation(verts)
            pi = dict(zip(verts, perm))
            arr = manual_array(5, rng.integers(0, 2, size=10))
            idx = rng.permutation(np.arange(1, 6))[:3]
            f = dict(zip(verts, (int(i) for i in idx)))
            f_pi = {v: f[pi[v]] for v in verts}
            assert xa.evaluate_event(xa.relabel(h, pi), f, arr) == xa.evaluate_event(
                h, f_pi, arr
            )


class TestMonotonicity:
    def test_superset_constraint_never_flips_true_to_false(self):
        rng = np.random.default_rng(29)
        verts = ["a", "b", "c"]
        for _ in range(100):
            cons = {
                e: xa.DiscreteSubset(
                    {int(v) for v in rng.integers(0, 2, size=rng.integers(1, 3))}
                )
                for e in itertools.combinations(verts, 2)
            }
            h = xa.EventHypergraph.build(verts, 2, xa.Discrete(2), cons)
            arr = manual_array(4, rng.integers(0, 2, size=6))
            f = {"a": 1, "b": 2, "c": 3}
            before = xa.evaluate_event(h, f, arr)
            target = ("a", "b")
            widened = dict(h.constraints)
            widened[target] = xa.Union(h.constraint(target), xa.DiscreteSubset({0, 1}))
            h2 = xa.EventHypergraph(h.vertices, 2, h.space, widened)
            after = xa.evaluate_event(h2, f, arr)
            assert after or not before


class TestPushforwardFrequency:
    def test_single_edge_matches_pushforward(self):
        # identity-latent spec: P(value in [0.2, 0.7]) is exactly 0.5
        event = xa.EventHypergraph.build(
            ["a", "b"], 2, xa.UNIT_INTERVAL, {("a", "b"): xa.ClosedInterval(0.2, 0.7)}
        )
        rep = xa.estimate_direct(xa.identity_latent(2), event, 10**5, 61)
        assert abs(rep.estimate - 0.5) <= 4 * rep.stderr

    def test_single_edge_binary_pushforward(self):
        rep = xa.estimate_direct(xa.constant_graphon(0.3), binary_edge_event(), 10**5, 62)
        assert abs(rep.estimate - 0.3) <= 4 * rep.stderr
