from itertools import combinations, product

import numpy as np
import pytest

from liftproof.cnf import CnfFormula, gen_random_tcnf
from liftproof.lifting import (
    InvalidSelectorError, LiftFactory, ParityParams, Star, TensorParams, TypeI, TypeII,
    TypeIII, decode, encode_valid, lift_gap, lift_parity, lift_tensor, parse_provenance,
    psi_parity, psi_tensor, write_provenance
)
from liftproof.utils import enumerate_assignments


SATISFIABLE = CnfFormula(3, [(1, -2), (2, 3), (-1, -3)])


def test_psi_tensor():
    assert psi_tensor((0, 1), (2,)) == 1
    indicator = [0, 1, 0, 0]
    assert psi_tensor(indicator, (1, 2)) == 1
    assert psi_tensor(indicator, (2, 1)) == 0
    assert all(psi_tensor([1] * 9, y) == 1 for y in product((1, 2, 3), repeat=2))
    with pytest.raises(ValueError):
        psi_tensor(indicator, (3, 1))


def test_psi_parity():
    assert psi_parity((0, 1), ((1,), (0,))) == 1
    assert psi_parity((0, 1), ((1,), (1,))) == 0
    x = (0, 1, 1, 0)
    for y in product((0, 1), repeat=4):
        ys = (y[:2], y[2:])
        index = 2 * (y[0] ^ y[2]) + (y[1] ^ y[3])
        assert psi_parity(x, ys) == x[index]
        assert psi_parity(x, (ys[0], (1 - y[2], y[3]))) == x[index ^ 2]
    with pytest.raises(ValueError):
        psi_parity(x, ((1,), (0,)))


def test_tensor_counts():
    base = CnfFormula(2, [(1, 2), (-1, 2)])
    lifted = lift_tensor(base, TensorParams(2, 2))
    assert lifted.num_vars == 2 * (2 ** 2 + 2 * 2)
    tags = lifted.provenance
    assert sum(isinstance(t, TypeI) for t in tags) == 4
    assert sum(isinstance(t, TypeII) for t in tags) == 4
    assert sum(isinstance(t, TypeIII) for t in tags) == 32
    assert lifted.formula.num_clauses == 40
    # (I) first, then (II), then (III).
    kinds = [type(t).__name__ for t in tags]
    assert kinds == sorted(kinds, key=['TypeI', 'TypeII', 'TypeIII'].index)
    assert all(lifted.formula.clause(j).width == 2 * 2 + 2 for j in range(9, 41))


@pytest.mark.parametrize('k, ell', [(1, 2), (2, 2), (1, 3), (2, 3)])
def test_tensor_var_count(k, ell):
    base = gen_random_tcnf(2, 3, 4, k + ell)
    assert lift_tensor(base, TensorParams(k, ell)).num_vars == 3 * (ell ** k + k * ell)


def test_tensor_block_layout():
    lifted = lift_tensor(CnfFormula(2, [(1, 2)]), TensorParams(2, 2))
    x_range, y_range = lifted.block_map()[1]
    assert list(x_range) == [9, 10, 11, 12]
    assert list(y_range) == [13, 14, 15, 16]
    assert lifted.x_var(2, (1, 2)) == 10
    assert lifted.y_var(2, 2, 1) == 15


def test_parity_example_clauses():
    base = CnfFormula(1, [(1,)])
    lifted = lift_parity(base, ParityParams(1, 1))
    assert lifted.num_vars == 3
    assert [c.literals for c in lifted.formula.clauses] == [(3, 1), (-3, 2)]
    lifted2 = lift_parity(base, ParityParams(2, 1))
    assert lifted2.num_vars == 4
    assert lifted2.formula.num_clauses == 4


@pytest.mark.parametrize('k, a', [(1, 1), (2, 1), (1, 2)])
def test_parity_counts(k, a):
    base = gen_random_tcnf(2, 3, 3, 10 * k + a)
    lifted = lift_parity(base, ParityParams(k, a))
    assert lifted.num_vars == 3 * (2 ** a + k * a)
    per_tuple = {}
    for tag in lifted.provenance:
        assert isinstance(tag, Star)
        per_tuple[(tag.source, tag.cells)] = per_tuple.get((tag.source, tag.cells), 0) + 1
    assert set(per_tuple.values()) == {2 ** (2 * (k - 1) * a)}
    assert lifted.formula.num_clauses <= base.num_clauses * 2 ** (2 * k * a + 2 * a)
    assert all(c.width == 2 * k * a + 2 for c in lifted.formula.clauses)


@pytest.mark.parametrize('config', [
    {'type': 'tensor', 'k': 1, 'ell': 2},
    {'type': 'tensor', 'k': 2, 'ell': 2},
    {'type': 'parity', 'k': 2, 'a': 1},
    {'type': 'gap'},
])
def test_lift_preserves_unsatisfiability(php21, config):
    lifted = LiftFactory.lift(php21, config)
    assert lifted.num_vars <= 20
    assert not lifted.formula.is_satisfiable()


def test_lift_small_corpus_unsatisfiable(small_unsat):
    lifted = lift_tensor(small_unsat, TensorParams(1, 2))
    assert not lifted.formula.is_satisfiable()
    lifted = lift_parity(small_unsat, ParityParams(1, 1))
    assert not lifted.formula.is_satisfiable()


def test_lift_factory_rejects_unknown_type(php21):
    with pytest.raises(ValueError):
        LiftFactory.lift(php21, {'type': 'xor'})
    with pytest.raises(ValueError):
        LiftFactory()


def test_lift_rejects_empty_clause():
    with pytest.raises(ValueError):
        lift_tensor(CnfFormula(1, [()]), TensorParams(1, 2))


@pytest.mark.parametrize('config', [
    {'type': 'tensor', 'k': 2, 'ell': 2},
    {'type': 'parity', 'k': 2, 'a': 1},
    {'type': 'gap'},
])
def test_encode_decode_round_trip(config):
    lifted = LiftFactory.lift(SATISFIABLE, config)
    params = lifted.params
    if lifted.mode == 'tensor':
        choices = [params.selector_bits(cell) for cell in params.cells()]
    else:
        choices = list(product((0, 1), repeat=params.y_size))
    for alpha in product((0, 1), repeat=3):
        for y in product(choices, repeat=3):
            beta = encode_valid(lifted, alpha, y)
            assert decode(lifted, beta) == alpha
            assert lifted.formula.evaluate(beta) == SATISFIABLE.evaluate(alpha)


def test_encode_all_zero_sets_every_x_cell_to_zero():
    lifted = lift_tensor(SATISFIABLE, TensorParams(2, 3))
    beta = encode_valid(lifted, (0, 0, 0))
    for x_range, _ in lifted.block_map():
        assert all(beta[v - 1] == 0 for v in x_range)
    beta = encode_valid(lifted, (1, 0, 1))
    assert all(beta[v - 1] == 1 for v in lifted.block_map()[2][0])


def test_encode_rejects_invalid_tensor_selector():
    lifted = lift_tensor(SATISFIABLE, TensorParams(1, 2))
    with pytest.raises(InvalidSelectorError):
        encode_valid(lifted, (0, 0, 0), [(1, 1), (1, 0), (0, 1)])


def test_decode_parity_example():
    lifted = lift_parity(CnfFormula(1, [(1,)]), ParityParams(2, 1))
    assert decode(lifted, (1, 0, 1, 1)) == (1,)
    assert decode(lifted, (1, 0, 0, 1)) == (0,)


def test_decode_tensor_zero_selector():
    lifted = lift_tensor(CnfFormula(1, [(1,)]), TensorParams(1, 2))
    with pytest.raises(InvalidSelectorError):
        decode(lifted, (1, 1, 0, 0))


def test_selector_valid_mask(php21):
    lifted = lift_tensor(php21, TensorParams(1, 2))
    matrix = enumerate_assignments(lifted.num_vars)
    mask = lifted.selector_valid_mask(matrix)
    expected = [lifted.is_selector_valid(tuple(row)) for row in matrix]
    assert mask.tolist() == expected
    assert mask.sum() == 2 ** 4 * 2 * 2


@pytest.mark.parametrize('config', [
    {'type': 'tensor', 'k': 2, 'ell': 2},
    {'type': 'parity', 'k': 2, 'a': 1},
])
def test_provenance_regenerates_formula(config):
    lifted = LiftFactory.lift(gen_random_tcnf(2, 3, 3, 4), config)
    tags = parse_provenance(write_provenance(lifted))
    assert tags == list(lifted.provenance)
    clauses = [lifted.clause_from_tag(tag) for tag in tags]
    assert tuple(clauses) == lifted.formula.clauses
    assert all(lifted.index_of(tag) == j for j, tag in enumerate(tags, start=1))


def test_gap_lift_maxsat_offset(small_unsat):
    lifted = lift_gap(small_unsat)
    matrix = enumerate_assignments(lifted.num_vars)
    lifted_best = int(lifted.formula.satisfied_counts(matrix).max())
    base_best = int(small_unsat.satisfied_counts(enumerate_assignments(small_unsat.num_vars)).max())
    assert lifted_best == lifted.lifted_maxsat_offset() + base_best


WIDTH_TWO_CLAUSES = [
    (sa * u, sb * v) for u, v in combinations((1, 2, 3), 2) for sa in (1, -1) for sb in (1, -1)
]


@pytest.mark.slow
@pytest.mark.parametrize('config', [
    {'type': 'tensor', 'k': 1, 'ell': 2},
    {'type': 'parity', 'k': 1, 'a': 1},
])
def test_lift_is_equisatisfiable_on_width_two_formulas(config):
    unsatisfiable = 0
    for chosen in product((False, True), repeat=len(WIDTH_TWO_CLAUSES)):
        clauses = [c for c, keep in zip(WIDTH_TWO_CLAUSES, chosen) if keep]
        base = CnfFormula(3, clauses)
        lifted = LiftFactory.lift(base, config)
        satisfiable = base.is_satisfiable()
        assert lifted.formula.is_satisfiable() == satisfiable, clauses
        unsatisfiable += not satisfiable
    assert unsatisfiable > 0


@pytest.mark.parametrize('seed', range(20))
def test_lift_is_equisatisfiable_on_random_formulas(seed):
    base = gen_random_tcnf(2, 4, 6 + seed % 8, seed)
    for config in ({'type': 'tensor', 'k': 1, 'ell': 2}, {'type': 'parity', 'k': 1, 'a': 1}):
        lifted = LiftFactory.lift(base, config)
        assert lifted.formula.is_satisfiable() == base.is_satisfiable()


@pytest.mark.parametrize('config', [
    {'type': 'tensor', 'k': 1, 'ell': 2},
    {'type': 'parity', 'k': 2, 'a': 1},
    {'type': 'gap'},
])
@pytest.mark.parametrize('seed', [0, 1, 2])
def test_falsified_lifted_clause_decodes_to_falsified_source(config, seed):
    base = gen_random_tcnf(2, 3, 4, seed)
    lifted = LiftFactory.lift(base, config)
    matrix = enumerate_assignments(lifted.num_vars)
    matrix = matrix[lifted.selector_valid_mask(matrix)]
    falsified = lifted.formula.falsified_matrix(matrix)
    for j, tag in enumerate(lifted.provenance):
        if not isinstance(tag, (TypeIII, Star)):
            continue
        for row in matrix[falsified[:, j]]:
            alpha = np.array([decode(lifted, tuple(row))], dtype=np.uint8)
            assert base.falsified_matrix(alpha)[0, tag.source - 1], (tag, tuple(row))
