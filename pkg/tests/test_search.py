from itertools import product

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given, settings

from liftproof.cnf import CnfFormula, gen_random_tcnf
from liftproof.lifting import ParityParams, TensorParams, lift_gap, lift_parity, lift_tensor
from liftproof.search import (
    BlockIntervalQuery, ConsistentSystem, DepthCapExceeded, DepthOracle, InconsistentOracleError,
    Leaf, NoFalsifiedClauseError, SearchProblem, TreeVerificationError, VarQuery,
    binary_search_tree, dt_eval, exact_decision_depth, first_falsified, graft, halving_subsets,
    lifted_search_tree_parity, lifted_search_tree_tensor, parse_tree, tree_labels,
    verify_search_tree, write_tree
)
from liftproof.utils import ceil_log2, enumerate_assignments


def test_first_falsified(php21):
    assert first_falsified(php21, (1, 1)) == 3
    assert first_falsified(php21, (0, 0)) == 1
    with pytest.raises(NoFalsifiedClauseError):
        first_falsified(CnfFormula(1, [(1,)]), (1,))


def test_dt_eval():
    assert dt_eval(Leaf(7), (0, 1)) == 7
    tree = VarQuery(1, Leaf(0), Leaf(1))
    assert [dt_eval(tree, (b,)) for b in (0, 1)] == [0, 1]
    interval = BlockIntervalQuery(1, 1, 1, 2, [2, 3], Leaf('yes'), Leaf('no'))
    assert dt_eval(interval, (0, 0, 1)) == 'yes'
    assert dt_eval(interval, (1, 0, 0)) == 'no'


def test_tree_labels_agrees_with_dt_eval(php32):
    tree = DepthOracle().optimal_tree(SearchProblem(php32))
    matrix = enumerate_assignments(php32.num_vars)
    labels = tree_labels(tree, matrix)
    assert [dt_eval(tree, row) for row in matrix] == labels.tolist()


def test_exact_depth_examples(php21):
    assert exact_decision_depth([1, 1, 1, 1]) == 0
    assert exact_decision_depth([0, 1, 1, 0]) == 2
    assert exact_decision_depth([0, 0, 0, 1]) == 2
    assert exact_decision_depth([0, 1, 0, 1]) == 1
    assert exact_decision_depth(SearchProblem(php21)) == 2


def test_depth_caps():
    with pytest.raises(DepthCapExceeded):
        exact_decision_depth([0] * 2 ** 5, {'max_function_vars': 4})
    with pytest.raises(DepthCapExceeded):
        exact_decision_depth(gen_random_tcnf(2, 15, 3, 0))


def test_search_problem_rejects_satisfiable():
    with pytest.raises(ValueError):
        SearchProblem(CnfFormula(2, [(1, 2)]))


@given(st.lists(st.integers(0, 1), min_size=8, max_size=8), st.integers(1, 3), st.integers(0, 1))
@settings(max_examples=60, deadline=None)
def test_depth_monotone_under_restriction(table, var, value):
    oracle = DepthOracle()
    assert oracle.depth(table, {var: value}) <= oracle.depth(table)


@given(st.lists(st.integers(0, 2), min_size=8, max_size=8))
@settings(max_examples=60, deadline=None)
def test_optimal_tree_computes_function(table):
    oracle = DepthOracle()
    tree = oracle.optimal_tree(table)
    assert tree.height == oracle.depth(table)
    matrix = enumerate_assignments(3)
    assert tree_labels(tree, matrix).tolist() == table


def test_optimal_tree_solves_search(small_unsat):
    tree = DepthOracle().optimal_tree(SearchProblem(small_unsat))
    assert verify_search_tree(tree, small_unsat)


def test_consistent_system_is_monotone(php32):
    system = ConsistentSystem(php32)
    table = system.f_star_table()
    for row, alpha in enumerate(enumerate_assignments(php32.num_vars)):
        assert table[row] == system.f_star(tuple(alpha))
    small, large = {1, 4}, {1, 2, 4, 7}
    assert np.all(system.truth_table(small) <= system.truth_table(large))
    assert system.f_S(large, (1,) * php32.num_vars) == int(system.f_star((1,) * 6) in large)


def test_halving_subsets():
    assert halving_subsets(1) == []
    assert halving_subsets(3) == [(1, 2), (1, 1)]
    assert len(halving_subsets(9)) == 8


def test_binary_search_tree_single_clause():
    formula = CnfFormula(1, [()])
    tree = binary_search_tree(formula)
    assert isinstance(tree, Leaf) and tree.label == 1


def test_binary_search_tree_php21(php21):
    tree = binary_search_tree(php21)
    assert verify_search_tree(tree, php21)
    for alpha in product((0, 1), repeat=2):
        assert dt_eval(tree, alpha) in php21.falsified(alpha)


def test_binary_search_tree_height_bound(small_unsat, php32):
    for formula in (small_unsat, php32):
        oracle = DepthOracle()
        system = ConsistentSystem(formula)
        worst = max(
            [oracle.depth(system.truth_table(range(lo, mid + 1)))
             for lo, mid in halving_subsets(formula.num_clauses)] + [0]
        )
        tree = binary_search_tree(formula, depth_oracle=oracle)
        assert tree.height <= worst * ceil_log2(formula.num_clauses)


def test_binary_search_tree_detects_bad_oracle(php21):
    wrong = {(1, 2): Leaf(1), (1, 1): Leaf(1)}
    with pytest.raises(InconsistentOracleError):
        binary_search_tree(php21, oracle_trees=wrong)


def test_verify_reports_corrupted_leaf(php21):
    tree = DepthOracle().optimal_tree(SearchProblem(php21))
    assert verify_search_tree(tree, php21)
    bad = graft(VarQuery(1, Leaf(0), Leaf(1)), Leaf(2), Leaf(3))
    check = verify_search_tree(bad, php21)
    assert not check
    alpha = check.counterexample
    assert dt_eval(bad, alpha) not in php21.falsified(alpha)


def test_tree_text_round_trip(php32):
    tree = binary_search_tree(php32)
    again = parse_tree(write_tree(tree))
    matrix = enumerate_assignments(php32.num_vars)
    assert tree_labels(again, matrix).tolist() == tree_labels(tree, matrix).tolist()
    assert write_tree(again) == write_tree(tree)


def test_parity_identity_case():
    base = CnfFormula(1, [(1,), (-1,)])
    tree = DepthOracle().optimal_tree(SearchProblem(base))
    assert tree.height == 1
    lifted = lift_parity(base, ParityParams(1, 1))
    lifted_tree = lifted_search_tree_parity(tree, lifted)
    assert lifted_tree.height == 2
    assert verify_search_tree(lifted_tree, lifted.formula)


@pytest.mark.parametrize('k, a', [(1, 1), (2, 1), (1, 2)])
def test_parity_lifted_tree(small_unsat, k, a):
    tree = DepthOracle().optimal_tree(SearchProblem(small_unsat))
    lifted = lift_parity(small_unsat, ParityParams(k, a))
    if lifted.num_vars > 20:
        pytest.skip('lifted formula too large to enumerate')
    lifted_tree = lifted_search_tree_parity(tree, lifted)
    assert lifted_tree.height <= (k * a + 1) * tree.height
    assert verify_search_tree(lifted_tree, lifted.formula)


def test_gap_lifted_tree(php21):
    tree = DepthOracle().optimal_tree(SearchProblem(php21))
    lifted = lift_gap(php21)
    assert verify_search_tree(lifted_search_tree_parity(tree, lifted), lifted.formula)


@pytest.mark.parametrize('k, ell', [(1, 2), (2, 2), (1, 3), (1, 4)])
def test_tensor_lifted_tree(php21, k, ell):
    tree = DepthOracle().optimal_tree(SearchProblem(php21))
    lifted = lift_tensor(php21, TensorParams(k, ell))
    lifted_tree = lifted_search_tree_tensor(tree, lifted)
    assert lifted_tree.height <= tree.height * (k * ceil_log2(ell) + 1)
    assert verify_search_tree(lifted_tree, lifted.formula, lifted.selector_valid_mask)


def test_tensor_per_variable_cost():
    base = CnfFormula(1, [(1,), (-1,)])
    tree = VarQuery(1, Leaf(1), Leaf(2))
    for k, ell in ((2, 2), (1, 4)):
        lifted = lift_tensor(base, TensorParams(k, ell))
        assert lifted_search_tree_tensor(tree, lifted).height == 3


def test_tensor_total_tree(php21):
    tree = DepthOracle().optimal_tree(SearchProblem(php21))
    lifted = lift_tensor(php21, TensorParams(1, 2))
    lifted_tree = lifted_search_tree_tensor(tree, lifted, total=True)
    assert verify_search_tree(lifted_tree, lifted.formula)


def test_lifted_tree_rejects_incomplete_base_tree(php21):
    lifted = lift_parity(php21, ParityParams(1, 1))
    with pytest.raises(TreeVerificationError):
        lifted_search_tree_parity(VarQuery(1, Leaf(1), Leaf(3)), lifted)


def test_lifted_tree_text_round_trip(php21):
    tree = DepthOracle().optimal_tree(SearchProblem(php21))
    lifted = lift_tensor(php21, TensorParams(2, 2))
    lifted_tree = lifted_search_tree_tensor(tree, lifted)
    again = parse_tree(write_tree(lifted_tree), lifted)
    assert verify_search_tree(again, lifted.formula, lifted.selector_valid_mask)
    assert again.height == lifted_tree.height
