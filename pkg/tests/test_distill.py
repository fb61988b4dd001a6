import numpy as np
import pytest

import exarray as xa
from exarray.errors import ArityError, DomainError
from exarray.representation import RealizedArray

from helpers import binary_edge_event

SEPARATED = [[0.9, 0.1], [0.1, 0.1]]  # block degrees 0.5k vs 0.1k


def max_error_up_to_permutation(matrix, truth):
    truth = np.asarray(truth)
    b = truth.shape[0]
    best = np.inf
    import itertools

    for perm in itertools.permutations(range(b)):
        p = np.array(perm)
        best = min(best, np.abs(matrix[np.ix_(p, p)] - truth).max())
    return best


def permute_array(array: RealizedArray, perm: np.ndarray) -> RealizedArray:
    adj = array.adjacency()
    adj2 = adj[np.ix_(perm, perm)]
    iu = np.triu_indices(array.size, k=1)
    return RealizedArray(2, array.size, adj2[iu], seed=array.seed, space=array.space)


class TestBlockRecovery:
    def test_two_block_step_graphon(self):
        # calibrated: 50-run median max-entry error ~ 0.02 at k=1000
        arr = xa.realize_array(xa.step_graphon(SEPARATED), 20260809, 1000)
        est = xa.estimate_block_rho(arr, 2)
        assert max_error_up_to_permutation(est.matrix, SEPARATED) <= 0.05

    def test_constant_graphon_homogeneous(self):
        arr = xa.realize_array(xa.constant_graphon(0.3), 501, 500)
        est = xa.estimate_block_rho(arr, 3)
        assert np.abs(est.matrix - 0.3).max() <= 0.05

    def test_complete_array_all_ones(self):
        arr = xa.realize_array(xa.constant_graphon(1.0), 1, 12)
        est = xa.estimate_block_rho(arr, 6)  # blocks of size 2
        assert (est.matrix == 1.0).all()

    def test_matrix_shape_and_bounds(self):
        arr = xa.realize_array(xa.product_graphon(), 3, 60)
        est = xa.estimate_block_rho(arr, 4)
        assert est.matrix.shape == (4, 4)
        assert (est.matrix == est.matrix.T).all()
        assert ((est.matrix >= 0) & (est.matrix <= 1)).all()
        assert len(est.assignment) == 60 and set(est.assignment) == {0, 1, 2, 3}

    def test_group_sizes_near_equal(self):
        arr = xa.realize_array(xa.constant_graphon(0.5), 9, 11)
        est = xa.estimate_block_rho(arr, 3)
        sizes = np.bincount(est.assignment)
        assert sorted(sizes.tolist()) == [3, 4, 4]

    def test_label_permutation_invariance(self):
        rng = np.random.default_rng(7)
        arr = xa.realize_array(xa.step_graphon(SEPARATED), 88, 200)
        est = xa.estimate_block_rho(arr, 2)
        perm = rng.permutation(200)
        est2 = xa.estimate_block_rho(permute_array(arr, perm), 2)
        entries1 = np.sort(est.matrix.ravel())
        entries2 = np.sort(est2.matrix.ravel())
        assert np.abs(entries1 - entries2).max() <= 1e-12

    def test_too_few_vertices(self):
        arr = xa.realize_array(xa.constant_graphon(0.5), 1, 5)
        with pytest.raises(DomainError):
            xa.estimate_block_rho(arr, 3)

    def test_non_binary_rejected(self):
        arr = xa.realize_array(xa.identity_latent(2), 1, 10)
        with pytest.raises(DomainError):
            xa.estimate_block_rho(arr, 2)

    def test_arity_one_rejected(self):
        arr = xa.realize_array(xa.coin_mixture([0.5], [1.0]), 1, 10)
        with pytest.raises(ArityError):
            xa.estimate_block_rho(arr, 2)


class TestResampleAndCompare:
    def test_constant_graphon_loop_closes(self):
        arr = xa.realize_array(xa.constant_graphon(0.3), 401, 500)
        est = xa.estimate_block_rho(arr, 2)
        rep = xa.resample_and_compare(est, binary_edge_event(), arr, 2000, 403)
        assert rep.verdict == "consistent"

    def test_step_graphon_loop_closes(self):
        arr = xa.realize_array(xa.step_graphon(SEPARATED), 20260809, 1000)
        est = xa.estimate_block_rho(arr, 2)
        rep = xa.resample_and_compare(est, binary_edge_event(), arr, 2 * 10**4, 405)
        assert rep.verdict == "consistent"

    def test_all_full_event_exact(self):
        arr = xa.realize_array(xa.constant_graphon(0.5), 11, 100)
        est = xa.estimate_block_rho(arr, 2)
        full = xa.EventHypergraph.build(["a", "b"], 2, xa.Discrete(2))
        rep = xa.resample_and_compare(est, full, arr, 10**4, 407)
        assert rep.first.estimate == 1.0
        assert rep.second.estimate == pytest.approx(1.0, abs=4 * max(rep.second.stderr, 1e-12))
        assert rep.verdict == "consistent"

    def test_serialization_roundtrip(self):
        arr = xa.realize_array(xa.step_graphon(SEPARATED), 3, 50)
        est = xa.estimate_block_rho(arr, 2)
        d = est.to_dict()
        assert d["block_count"] == 2
        assert len(d["matrix"]) == 2 and len(d["assignment"]) == 50
        rho = est.to_rho()
        assert xa.validate_spec(rho).valid
