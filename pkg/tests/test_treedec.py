import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import PERFECT_MATCHINGS_3, banded_matrix, rel_close, shallow_unitary
from shallowboson.cp_permanent import permanent_from_tree
from shallowboson.errors import DomainError, RedundancyError
from shallowboson.linalg import ComplexMatrix, bandwidths_of, per_naive, per_rect, submatrix
from shallowboson.treedec import (
    BipartiteGraph,
    TreeDecomposition,
    graph_of,
    is_redundant,
    linear_banded_decomposition,
    permute_columns,
    prune_redundant,
    remove_redundant,
    replace_with_dummy,
    restrict,
    treewidth,
    validate,
)

# 3x3 pattern with a four-node branching decomposition
BRANCH_MASK = np.array([[1, 1, 0], [0, 0, 1], [1, 1, 1]], dtype=bool)


def branching_tree(drop=()):
    rho = {1: {2}, 2: {2}, 3: {1}, 4: {0}}
    kappa = {1: {0, 1}, 2: {2}, 3: {2}, 4: {0, 1}}
    parent = {1: None, 2: 1, 3: 2, 4: 1}
    for t in drop:
        for d in (rho, kappa, parent):
            d.pop(t)
    return TreeDecomposition(rho, kappa, parent)


def staircase_tree():
    """Three-node path over a 4x3 staircase: rows {0,1},{1,2},{2,3} with columns 0,1,2."""
    return TreeDecomposition(
        {0: {0, 1}, 1: {1, 2}, 2: {2, 3}},
        {0: {0}, 1: {1}, 2: {2}},
        {0: None, 1: 0, 2: 1},
    )


def path_tree(k):
    return TreeDecomposition(
        {t: {t, t + 1, t + 2} for t in range(k)},
        {t: {t} for t in range(k)},
        {t: (t - 1 if t else None) for t in range(k)},
    )


def shape(T):
    """Parent map with the dummy written as 'd'."""
    name = lambda t: "d" if t is not None and t < 0 else t  # noqa: E731
    return {name(t): name(p) for t, p in T.parent.items()}


class TestConstruction:
    def test_needs_single_root(self):
        with pytest.raises(DomainError):
            TreeDecomposition({0: set(), 1: set()}, {}, {0: None, 1: None})

    def test_rejects_cycle(self):
        with pytest.raises(DomainError):
            TreeDecomposition({0: set(), 1: set(), 2: set()}, {}, {0: None, 1: 2, 2: 1})

    def test_unknown_parent(self):
        with pytest.raises(DomainError):
            TreeDecomposition({0: set(), 1: set()}, {}, {0: None, 1: 7})

    def test_postorder_children_first(self):
        order = branching_tree().postorder()
        assert order == [3, 2, 4, 1]

    def test_dump(self):
        lines = staircase_tree().dump().splitlines()
        assert lines[0] == "0: rho=[0, 1] kappa=[0] parent=-"
        assert lines[-1] == "2: rho=[2, 3] kappa=[2] parent=1"


class TestGraph:
    def test_diagonal(self):
        g = graph_of(ComplexMatrix(np.eye(3)))
        assert set(g.edges) == {(0, 0), (1, 1), (2, 2)}

    def test_matching_matrix(self):
        g = graph_of(ComplexMatrix(PERFECT_MATCHINGS_3))
        assert len(g.edges) == 7
        assert (2, 0) not in g.edges

    def test_copied_rows_become_positions(self):
        v = submatrix(ComplexMatrix(np.ones((3, 3))), (0, 0, 2), (0, 1, 2))
        g = graph_of(v)
        assert g.rows == frozenset({0, 1, 2})
        assert len(g.edges) == 9

    def test_undeclared_vertex(self):
        with pytest.raises(DomainError):
            BipartiteGraph(frozenset({0}), frozenset({0}), {(1, 0): 1})


class TestValidate:
    def test_branching_example_valid(self):
        assert validate(branching_tree(), graph_of(ComplexMatrix(BRANCH_MASK))) is None

    def test_missing_edge(self):
        T = TreeDecomposition(
            {1: {2}, 2: {2}, 4: {0}, 3: set()}, {1: {0, 1}, 2: {2}, 4: {0, 1}}, {1: None, 2: 1, 4: 1, 3: 2}
        )
        v = validate(T, graph_of(ComplexMatrix(BRANCH_MASK)))
        assert v.axiom == "T1"  # row 1 now sits nowhere
        T = T.with_changes(rho={**T.rho, 3: (1,)}, check=True)
        v = validate(T, graph_of(ComplexMatrix(BRANCH_MASK)))
        assert v.axiom == "T2"
        assert v.witness == (1, 2)

    def test_disconnected_label(self):
        T = TreeDecomposition({0: {0}, 1: set(), 2: {0}}, {0: {0}, 1: {1}, 2: {1}}, {0: None, 1: 0, 2: 1})
        g = BipartiteGraph(frozenset({0}), frozenset({0, 1}), {(0, 0): 1, (0, 1): 1})
        v = validate(T, g)
        assert v.axiom == "T3" and v.witness == ("row", 0)

    def test_uncovered_vertex(self):
        g = BipartiteGraph(frozenset({0, 5}), frozenset({0}), {(0, 0): 1})
        T = TreeDecomposition({0: {0}}, {0: {0}}, {0: None})
        v = validate(T, g)
        assert v.axiom == "T1" and v.witness == ("row", 5)


class TestTreewidth:
    def test_single_node(self):
        assert treewidth(TreeDecomposition({0: {0, 1}}, {0: {0}}, {0: None})) == 2

    def test_branching_example(self):
        assert treewidth(branching_tree()) == 2

    @pytest.mark.parametrize("depth", [1, 2, 3])
    def test_shallow_circuit(self, depth):
        u = shallow_unitary(12, depth, depth)
        T = linear_banded_decomposition(u)
        assert treewidth(T) <= 2 * depth
        assert treewidth(T) == bandwidths_of(u).width


class TestLinearDecomposition:
    def test_band_column_contents(self):
        mask = np.zeros((6, 7), dtype=bool)
        i, j = np.indices(mask.shape)
        mask[(i - j <= 1) & (j - i <= 2)] = True
        T = linear_banded_decomposition(mask)
        assert T.rho[2] == (0, 1, 2, 3)
        assert T.kappa[2] == (2,)
        assert T.path_order() == list(range(7))

    def test_diagonal(self):
        T = linear_banded_decomposition(np.eye(4, dtype=bool))
        assert all(T.rho[t] == (t,) and T.kappa[t] == (t,) for t in T.rho)
        assert treewidth(T) == 1

    def test_circuit_valid(self):
        u = shallow_unitary(8, 2, 1)
        T = linear_banded_decomposition(u)
        assert validate(T, graph_of(u)) is None
        assert treewidth(T) <= 4

    def test_rows_stay_connected_for_gapped_rows(self):
        mask = np.array([[1, 0, 1], [0, 1, 0], [0, 0, 1]], dtype=bool)
        T = linear_banded_decomposition(mask)
        assert T.rho[1] == (0, 1)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 8), st.integers(0, 3), st.integers(0, 3), st.integers(0, 2**32 - 1))
    def test_valid_for_any_band(self, n, lower, upper, seed):
        m = banded_matrix(np.random.default_rng(seed), n, lower, upper)
        assert validate(linear_banded_decomposition(m), graph_of(m)) is None


class TestPermuteColumns:
    def test_identity(self):
        T = staircase_tree()
        assert permute_columns(T, [0, 1, 2]).kappa == T.kappa

    def test_column_sits_in_its_image_node(self):
        alpha = [2, 0, 1]
        T = permute_columns(staircase_tree(), alpha)
        for i, a in enumerate(alpha):
            assert T.kappa[a] == (i,)
        assert T.rho == staircase_tree().rho

    def test_swap_valid_for_swapped_matrix(self, rng):
        m = banded_matrix(rng, 5, 1, 1)
        alpha = [0, 3, 2, 1, 4]
        swapped = ComplexMatrix(m.data[:, alpha], structure=m.structure[:, alpha])
        T = permute_columns(linear_banded_decomposition(m), alpha)
        assert validate(T, graph_of(swapped)) is None
        assert rel_close(permanent_from_tree(T, swapped), per_naive(swapped), 1e-10)

    def test_not_a_bijection(self):
        with pytest.raises(DomainError):
            permute_columns(staircase_tree(), [0, 0, 1])


class TestRestrict:
    def test_everything(self):
        T = staircase_tree()
        R = restrict(T, range(4), range(3))
        assert R.rho == T.rho and R.kappa == T.kappa

    def test_row_restriction(self):
        R = restrict(staircase_tree(), {1, 3}, {0, 1, 2})
        assert R.rho == {0: (1,), 1: (1,), 2: (3,)}
        assert R.kappa == staircase_tree().kappa

    def test_column_removal_leaves_row_only_node(self):
        R = restrict(staircase_tree(), range(4), {0, 2})
        assert R.kappa[1] == ()
        assert R.rho[1] == (1, 2)
        assert is_redundant(R, 1)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 7), st.integers(0, 2), st.integers(0, 2), st.data())
    def test_restriction_represents_submatrix(self, n, lower, upper, data):
        m = banded_matrix(np.random.default_rng(data.draw(st.integers(0, 10**6))), n, lower, upper)
        T = linear_banded_decomposition(m)
        size = data.draw(st.integers(0, n))
        rows = sorted(data.draw(st.sets(st.integers(0, n - 1), min_size=size, max_size=size)))
        cols = sorted(data.draw(st.sets(st.integers(0, n - 1), min_size=size, max_size=size)))
        R = restrict(T, rows, cols)
        assert treewidth(R) <= min(treewidth(T), max(len(rows) + len(cols) - 1, 0))
        sub = submatrix(m, rows, cols)
        got = permanent_from_tree(R, sub) if rows else 1
        assert abs(got - per_rect(sub)) <= 1e-10 * max(1.0, abs(per_rect(sub)))


class TestRedundancy:
    def test_splice_middle(self):
        R = restrict(staircase_tree(), range(4), {0, 2})
        S = remove_redundant(R, 1)
        assert sorted(S.rho) == [0, 2]
        assert S.parent[2] == 0

    def test_remove_root(self):
        T = TreeDecomposition({0: {1}, 1: {1}}, {1: {0}}, {0: None, 1: 0})
        S = remove_redundant(T, 0)
        assert S.root == 1 and S.parent[1] is None

    def test_empty_node_between_blocks(self, rng):
        a = np.zeros((4, 4), complex)
        a[:2, :2] = rng.standard_normal((2, 2))
        a[2:, 2:] = rng.standard_normal((2, 2))
        m = ComplexMatrix(a)
        T = TreeDecomposition(
            {0: {0, 1}, 1: set(), 2: {2, 3}}, {0: {0, 1}, 1: set(), 2: {2, 3}}, {0: None, 1: 0, 2: 1}
        )
        S = remove_redundant(T, 1)
        expected = per_naive(a[:2, :2]) * per_naive(a[2:, 2:])
        assert rel_close(permanent_from_tree(S, m), expected, 1e-12)
        assert rel_close(permanent_from_tree(T, m), expected, 1e-12)

    def test_unique_row_refused(self):
        T = TreeDecomposition({0: {0}, 1: {5}}, {0: {0}}, {0: None, 1: 0})
        with pytest.raises(RedundancyError):
            remove_redundant(T, 1)

    def test_node_with_columns_refused(self):
        with pytest.raises(RedundancyError):
            remove_redundant(staircase_tree(), 1)

    def test_prune_keeps_permanent(self, rng):
        m = banded_matrix(rng, 6, 1, 1)
        cols = [0, 1, 4, 5]
        rows = [0, 1, 4, 5]
        R = restrict(linear_banded_decomposition(m), rows, cols)
        P = prune_redundant(R)
        assert all(P.kappa[t] for t in P.rho)
        sub = submatrix(m, rows, cols)
        assert rel_close(permanent_from_tree(P, sub), per_naive(sub), 1e-12)


class TestDummy:
    def test_head_at_start(self):
        D = replace_with_dummy(path_tree(5), 0)
        assert D.root < 0 and D.kappa[D.root] == ()
        assert D.rho[D.root] == ()
        assert shape(D) == {"d": None, 1: "d", 2: 1, 3: 2, 4: 3}

    def test_head_in_middle(self):
        D = replace_with_dummy(path_tree(5), 2)
        assert shape(D) == {"d": None, 1: "d", 0: 1, 3: "d", 4: 3}
        assert D.rho[D.root] == (3,)  # shared by nodes 1 and 3

    def test_head_at_end(self):
        D = replace_with_dummy(path_tree(4), 3)
        assert shape(D) == {"d": None, 2: "d", 1: 2, 0: 1}
        assert D.rho[D.root] == ()

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            replace_with_dummy(path_tree(3), 3)

    def test_fresh_ids(self):
        a = replace_with_dummy(path_tree(3), 1).root
        b = replace_with_dummy(path_tree(3), 1).root
        assert a != b and a < 0 and b < 0

    @pytest.mark.parametrize("j", range(5))
    def test_represents_column_deleted_matrix(self, rng, j):
        m = banded_matrix(rng, 6, 1, 1, n_cols=5)
        rows = [1, 2, 3, 4]
        T = prune_redundant(restrict(linear_banded_decomposition(m), rows, range(5)))
        D = replace_with_dummy(T, j)
        cols = [c for c in range(5) if c != j]
        sub = submatrix(m, rows, cols)
        assert validate(D, graph_of(sub)) is None
        assert rel_close(permanent_from_tree(D, sub), per_naive(sub.data), 1e-12)
