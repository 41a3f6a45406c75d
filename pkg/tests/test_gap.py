import pytest

from liftproof.cnf import CnfFormula, gen_random_tcnf
from liftproof.gap import (
    GapExperiment, brute_maxsat, build_maxsat_lp, expected_satisfied_fraction, gap_experiment,
    local_search_maxsat, maxsat_witness, random_assignment_fraction
)
from liftproof.lifting import lift_gap
from liftproof.simplex import solve_lp


def test_lp_layout():
    formula = CnfFormula(2, [(1, -2), (2,)])
    lp = build_maxsat_lp(formula)
    assert lp.num_vars == 4
    assert lp.names == ('x1', 'x2', 'z1', 'z2')
    assert lp.constraints[0] == ({0: 1, 1: -1, 2: -1}, '>=', -1)
    assert lp.constraints[1] == ({1: 1, 3: -1}, '>=', 0)
    assert lp.objective == {2: 1, 3: 1}
    assert all(bounds == (0, 1) for bounds in lp.bounds)


def test_lp_value_of_contradiction():
    formula = CnfFormula(1, [(1,), (-1,)])
    lp = build_maxsat_lp(formula)
    assert maxsat_witness(lp, formula) is None
    assert solve_lp(lp).objective == pytest.approx(1)


def test_witness_reaches_clause_count():
    formula = gen_random_tcnf(3, 6, 30, seed=2)
    lp = build_maxsat_lp(formula)
    witness = maxsat_witness(lp, formula)
    assert witness.method == 'witness'
    assert witness.objective == 30
    assert solve_lp(lp).objective == pytest.approx(30)


def test_brute_maxsat(php21, small_unsat):
    assert brute_maxsat(php21) == 2
    assert brute_maxsat(small_unsat) == small_unsat.num_clauses - 1
    assert brute_maxsat(CnfFormula(2, [(1, 2), (-1,)])) == 2


def test_local_search_is_a_lower_bound():
    formula = gen_random_tcnf(3, 10, 80, seed=5)
    exact = brute_maxsat(formula)
    found = local_search_maxsat(formula, restarts=16, seed=1)
    assert found <= exact
    assert found >= 0.9 * exact


def test_random_fraction():
    formula = gen_random_tcnf(3, 8, 200, seed=1)
    first = random_assignment_fraction(formula, trials=5000, seed=3)
    assert first == random_assignment_fraction(formula, trials=5000, seed=3)
    assert first == pytest.approx(7 / 8, abs=0.01)
    assert expected_satisfied_fraction(formula) == pytest.approx(7 / 8)
    lifted = lift_gap(formula)
    assert expected_satisfied_fraction(lifted.formula) == pytest.approx(63 / 64)
    with pytest.raises(AssertionError):
        random_assignment_fraction(formula, trials=0, seed=0)


def test_gap_experiment_shortcuts():
    config = {'trials': 2000, 'lp_method': 'witness', 'integral_method': 'lifted_exact'}
    report = gap_experiment(3, 8, 25, seed=1, config=config)
    assert report.base_clause_count == 200
    assert report.clause_count == 1600
    assert report.lp_optimum == 1600
    assert report.lp_method == 'witness'
    assert report.integral_method == 'lifted_exact'
    assert report.exact
    base = gen_random_tcnf(3, 8, 200, 1)
    assert report.integral_optimum == 1400 + brute_maxsat(base)
    assert report.gap == pytest.approx(1600 / report.integral_optimum)
    assert report.gap > 1
    assert report.random_fraction > 0.95


@pytest.mark.slow
@pytest.mark.parametrize('seed', [1, 2, 3, 4, 5])
def test_gap_experiment_defaults(seed):
    report = gap_experiment(3, 8, 25, seed=seed, config={'trials': 2000})
    assert report.lp_method == 'simplex'
    assert report.lp_optimum == pytest.approx(report.clause_count, abs=1e-6)
    assert report.integral_method == 'brute'
    assert report.exact
    assert report.integral_optimum < report.clause_count
    base = gen_random_tcnf(3, 8, 200, seed)
    assert report.integral_optimum == 1400 + brute_maxsat(base)
    assert report.gap >= 1 / (1 - 1 / 2 ** 6 + 0.05)
    assert report.gap > 1


def test_auto_methods_follow_size_limits():
    common = {'t': 3, 'n': 4, 'delta': 2, 'trials': 100}
    small = GapExperiment(common).run(2)
    assert (small.lp_method, small.integral_method) == ('simplex', 'brute')
    limited = GapExperiment({
        **common, 'simplex_max_constraints': 10, 'brute_force_cap': 6,
    }).run(2)
    assert (limited.lp_method, limited.integral_method) == ('witness', 'lifted_exact')
    assert limited.lp_optimum == pytest.approx(small.lp_optimum)
    assert limited.integral_optimum == small.integral_optimum


def test_integral_methods_agree():
    common = {'t': 3, 'n': 4, 'delta': 3, 'trials': 500}
    exact = GapExperiment({**common, 'integral_method': 'lifted_exact'}).run(4)
    brute = GapExperiment({**common, 'integral_method': 'brute'}).run(4)
    searched = GapExperiment({**common, 'integral_method': 'local_search'}).run(4)
    assert exact.integral_optimum == brute.integral_optimum
    assert searched.integral_optimum <= brute.integral_optimum
    assert not searched.exact


def test_simplex_matches_witness():
    common = {'t': 3, 'n': 4, 'delta': 2, 'trials': 100}
    witness = GapExperiment({**common, 'lp_method': 'witness'}).run(7)
    simplex = GapExperiment({**common, 'lp_method': 'simplex'}).run(7)
    assert simplex.lp_method == 'simplex'
    assert simplex.lp_optimum == pytest.approx(witness.lp_optimum)
    assert simplex.clause_count == 64


def test_unknown_methods():
    with pytest.raises(ValueError):
        GapExperiment({'n': 4, 'delta': 2, 'integral_method': 'guess'}).run(0)
    with pytest.raises(ValueError):
        GapExperiment({'n': 4, 'delta': 2, 'lp_method': 'guess'}).run(0)


def test_report_record():
    report = GapExperiment({'n': 4, 'delta': 2, 'trials': 100}).run(3)
    record = report.to_record()
    assert record.startswith('gap t=3 n=4 delta=2 seed=3 base_clause_count=8 clause_count=64 ')
    assert 'exact=1' in record
    assert set(report.to_dict()) == set(report.FIELDS)
