import itertools
from collections import Counter

import numpy as np
import pytest

from conftest import rel_close, shallow_unitary
from shallowboson.cp_permanent import reset_table_stats, table_stats
from shallowboson.errors import CapacityError, CollisionError, DegenerateDistributionError, DomainError
from shallowboson.fock import exact_distribution, marginal_pmf_A, standard_input
from shallowboson.harness.stats import empirical, tvd
from shallowboson.linalg import ComplexMatrix
from shallowboson.photonics import haar_unitary
from shallowboson.samplers import (
    MarginalWeights,
    cc_a_weights,
    cc_b_expected_marginal,
    cc_b_weights,
    cc_c_weights,
    collision_free_distribution,
    draw_from_weights,
    prepare_base,
    sample_cc_a,
    sample_cc_b,
    sample_cc_c,
    sample_shallow,
    sample_stream,
    shallow_marginal_weights,
    shallow_prepare,
)
from shallowboson.treedec import graph_of, linear_banded_decomposition, validate


def law(sampler, u, n, count, seed=0):
    rng = np.random.default_rng(seed)
    return empirical(sampler(u, n, rng).occupation for _ in range(count))


class TestDraw:
    def test_point_mass(self, rng):
        assert {draw_from_weights([0, 1, 0], rng) for _ in range(100)} == {1}

    def test_fair_coin(self):
        rng = np.random.default_rng(1)
        hits = sum(draw_from_weights([1, 1], rng) for _ in range(100_000))
        assert abs(hits / 100_000 - 0.5) < 0.01

    def test_frequencies(self):
        rng = np.random.default_rng(2)
        counts = Counter(draw_from_weights([2, 1, 1], rng) for _ in range(100_000))
        freq = [counts[i] / 100_000 for i in range(3)]
        assert np.allclose(freq, [0.5, 0.25, 0.25], atol=0.01)

    def test_support_mapping(self, rng):
        w = MarginalWeights(np.array([4, 9]), np.array([0.0, 3.0]))
        assert draw_from_weights(w, rng) == 9
        assert w.dense(10)[9] == 3.0

    def test_all_zero(self, rng):
        with pytest.raises(DegenerateDistributionError):
            draw_from_weights([0, 0], rng)
        with pytest.raises(DegenerateDistributionError):
            draw_from_weights([], rng)


class TestDenseWeights:
    def test_cc_a_first_photon(self, rng):
        u = haar_unitary(5, rng).data
        w = cc_a_weights(u, [], 3)
        assert np.allclose(w, (np.abs(u[:, :3]) ** 2).sum(axis=1))

    def test_cc_a_weights_are_marginals(self, rng):
        u = haar_unitary(5, rng).data
        prefix = [3, 0]
        w = cc_a_weights(u, prefix, 3)
        # proportional to the marginal of prefix + candidate
        ratios = [w[i] / marginal_pmf_A(u, prefix + [i], 3) for i in range(5)]
        assert np.allclose(ratios, ratios[0])

    def test_cc_c_matches_cc_b(self, rng):
        u = haar_unitary(7, rng).data
        for prefix in ([], [2], [2, 2], [6, 0, 4]):
            alpha = rng.permutation(4)
            assert np.allclose(cc_c_weights(u, prefix, alpha), cc_b_weights(u, prefix, alpha), rtol=1e-12, atol=1e-15)


class TestDenseSamplers:
    def test_occupations_well_formed(self, rng):
        u = haar_unitary(6, rng)
        for fn in (sample_cc_a, sample_cc_b, sample_cc_c):
            s = fn(u, 2, rng)
            assert sum(s.occupation) == 2 and len(s.occupation) == 6
            assert len(s.r) == 2

    def test_alpha_is_permutation(self, rng):
        s = sample_cc_c(haar_unitary(6, rng), 4, rng)
        assert sorted(s.alpha) == [0, 1, 2, 3]

    def test_caps(self, rng):
        with pytest.raises(CapacityError):
            sample_cc_a(np.eye(8), 7, rng)
        with pytest.raises(CapacityError):
            sample_cc_c(np.eye(30), 26, rng)
        with pytest.raises(DomainError):
            sample_cc_b(np.eye(3), 4, rng)

    def test_single_photon_law(self):
        u = haar_unitary(4, np.random.default_rng(4))
        exact = {occ: p for occ, p in exact_distribution(u, standard_input(1, 4)).items()}
        for fn in (sample_cc_a, sample_cc_b):
            assert tvd(law(fn, u, 1, 20_000), exact) < 0.02

    def test_cc_a_two_photons(self):
        u = haar_unitary(4, np.random.default_rng(9))
        exact = exact_distribution(u, standard_input(2, 4))
        assert tvd(law(sample_cc_a, u, 2, 200_000), exact) < 0.03

    def test_collision_free_mode_never_repeats(self, rng):
        u = haar_unitary(4, rng)
        for _ in range(200):
            assert max(sample_cc_c(u, 3, rng, collision_free=True).occupation) == 1


class TestExpectations:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_cc_b_average_is_marginal(self, rng, n):
        u = haar_unitary(5, rng).data
        for k in range(1, n + 1):
            for prefix in itertools.product(range(5), repeat=k):
                assert rel_close(cc_b_expected_marginal(u, prefix, n), marginal_pmf_A(u, prefix, n), 1e-12)

    def test_collision_free_distribution_normalized(self, rng):
        u = shallow_unitary(8, 2, 3)
        d = collision_free_distribution(u, 3)
        assert sum(d.values()) == pytest.approx(1)
        assert all(max(o) == 1 for o in d)


class TestShallow:
    def setup_method(self):
        self.u = shallow_unitary(12, 2, 21)

    def test_needs_structure(self, rng):
        with pytest.raises(DomainError):
            prepare_base(ComplexMatrix(self.u.data), 3)
        with pytest.raises(DomainError):
            sample_shallow(haar_unitary(4, rng), 2, rng)

    def test_identity_alpha_full_width(self):
        u = shallow_unitary(8, 2, 5)
        prep = shallow_prepare(u, 8)
        T = linear_banded_decomposition(u)
        assert prep.tree.rho == T.rho and prep.tree.kappa == T.kappa

    def test_prepared_path_is_valid_for_permuted_columns(self):
        alpha = (2, 0, 3, 1)
        prep = shallow_prepare(self.u, 4, alpha)
        keep = sorted(prep.tree.all_rows())
        cols = list(alpha)  # column label i is input column alpha[i]
        v = ComplexMatrix(self.u.data[np.ix_(keep, cols)], row_labels=keep,
                          structure=self.u.structure[np.ix_(keep, cols)])
        assert validate(prep.tree, graph_of(v)) is None
        for i, a in enumerate(alpha):
            assert prep.tree.kappa[a] == (i,)

    def test_first_photon_weights(self):
        prep = shallow_prepare(self.u, 4, alpha=(2, 0, 3, 1))
        w = shallow_marginal_weights(prep, [])
        node = prep.alpha[0]  # column label 0 lives in node alpha[0]
        assert np.allclose(w.dense(12), np.abs(self.u.data[:, node]) ** 2)
        assert set(w.support) <= set(prep.base.support_rows[node])

    def test_matches_dense_weights(self):
        rng = np.random.default_rng(0)
        for trial in range(10):
            u = shallow_unitary(10, 1 + trial % 3, trial)
            n = 4
            alpha = tuple(int(a) for a in rng.permutation(n))
            prep = shallow_prepare(u, n, alpha)
            prefix = []
            for k in range(n):
                got = shallow_marginal_weights(prep, prefix).dense(10)
                dense = cc_b_weights(u, prefix, alpha)
                dense[prefix] = 0.0
                assert np.allclose(got, dense, rtol=1e-9, atol=1e-12 * dense.max())
                prefix.append(int(np.argmax(got)))

    def test_four_k_minus_two_tables(self):
        prep = shallow_prepare(self.u, 4, alpha=(1, 3, 0, 2))
        prefix = []
        for k in range(1, 5):
            reset_table_stats()
            w = shallow_marginal_weights(prep, prefix)
            assert table_stats()["total"] == 4 * k - 2
            prefix.append(int(w.support[np.argmax(w.weights)]))

    def test_collision_rejected(self):
        prep = shallow_prepare(self.u, 3)
        with pytest.raises(CollisionError):
            shallow_marginal_weights(prep, [1, 1])

    def test_unreachable_prefix(self):
        prep = shallow_prepare(self.u, 3)
        with pytest.raises(DegenerateDistributionError):
            shallow_marginal_weights(prep, [11])

    def test_sample_well_formed(self, rng):
        s = sample_shallow(self.u, 3, rng)
        assert sum(s.occupation) == 3 and max(s.occupation) == 1
        assert sorted(s.alpha) == [0, 1, 2]

    def test_small_law(self):
        u = shallow_unitary(6, 2, 2)
        exact = collision_free_distribution(u, 2)
        observed = empirical(s.occupation for _, s in sample_stream("shallow", u, 2, 30_000, seed=0))
        assert tvd(observed, exact) < 0.03


class TestStreams:
    @pytest.mark.parametrize("algorithm", ["cc-a", "cc-b", "cc-c", "shallow"])
    def test_reproducible(self, algorithm):
        u = shallow_unitary(8, 2, 1)
        a = list(sample_stream(algorithm, u, 3, 20, seed=5))
        b = list(sample_stream(algorithm, u, 3, 20, seed=5))
        assert a == b
        assert [i for i, _ in a] == list(range(20))

    def test_seeds_differ(self):
        u = haar_unitary(8, 0)
        a = [s.r for _, s in sample_stream("cc-c", u, 3, 20, seed=1)]
        b = [s.r for _, s in sample_stream("cc-c", u, 3, 20, seed=2)]
        assert a != b

    def test_unknown_algorithm(self):
        with pytest.raises(ValueError):
            list(sample_stream("cc-z", np.eye(3), 1, 1, 0))
