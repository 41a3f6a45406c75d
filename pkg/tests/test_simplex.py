from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy.optimize import linprog

from liftproof.simplex import LinearProgram, SimplexIterationLimit, SimplexSolver, solve_lp


def scipy_optimum(lp):
    n = lp.num_vars
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for coeffs, sense, rhs in lp.constraints:
        row = np.zeros(n)
        for j, c in coeffs.items():
            row[j] = c
        if sense == '<=':
            a_ub.append(row)
            b_ub.append(rhs)
        elif sense == '>=':
            a_ub.append(-row)
            b_ub.append(-rhs)
        else:
            a_eq.append(row)
            b_eq.append(rhs)
    cost = np.zeros(n)
    for j, c in lp.objective.items():
        cost[j] = -c if lp.maximize else c
    result = linprog(
        cost,
        A_ub=np.array(a_ub) if a_ub else None, b_ub=b_ub or None,
        A_eq=np.array(a_eq) if a_eq else None, b_eq=b_eq or None,
        bounds=list(lp.bounds), method='highs',
    )
    if result.status != 0:
        return {2: 'infeasible', 3: 'unbounded'}.get(result.status), None
    value = -result.fun if lp.maximize else result.fun
    return 'optimal', value + lp.objective_constant


def test_textbook_example():
    lp = LinearProgram(maximize=True)
    a = lp.add_variable('a', upper=None)
    b = lp.add_variable('b', upper=None)
    lp.add_constraint({a: 1, b: 1}, '<=', 4)
    lp.add_constraint({a: 1, b: 3}, '<=', 6)
    lp.set_objective({a: 3, b: 2})
    solution = solve_lp(lp)
    assert solution.optimal
    assert solution.objective == pytest.approx(12)
    assert solution.values == pytest.approx((4, 0))


def test_exact_arithmetic():
    lp = LinearProgram(maximize=True)
    a = lp.add_variable('a', upper=None)
    b = lp.add_variable('b', upper=None)
    lp.add_constraint({a: 3, b: 1}, '<=', 1)
    lp.add_constraint({a: 1, b: 3}, '<=', 1)
    lp.set_objective({a: 1, b: 1})
    solution = SimplexSolver({'exact': True}).solve(lp)
    assert solution.objective == Fraction(1, 2)
    assert solution.values == (Fraction(1, 4), Fraction(1, 4))


def test_greater_equal_needs_phase_one():
    lp = LinearProgram(maximize=False)
    a = lp.add_variable('a', upper=None)
    b = lp.add_variable('b', upper=None)
    lp.add_constraint({a: 1, b: 1}, '>=', 2)
    lp.add_constraint({a: 1, b: -1}, '==', 1)
    lp.set_objective({a: 2, b: 1})
    solution = solve_lp(lp)
    assert solution.optimal
    assert solution.values == pytest.approx((1.5, 0.5))
    assert solution.objective == pytest.approx(3.5)


def test_infeasible():
    lp = LinearProgram()
    a = lp.add_variable('a')
    lp.add_constraint({a: 1}, '>=', 2)
    assert solve_lp(lp).status == 'infeasible'


def test_unbounded():
    lp = LinearProgram()
    a = lp.add_variable('a', upper=None)
    b = lp.add_variable('b', upper=None)
    lp.add_constraint({a: 1, b: -1}, '<=', 1)
    lp.set_objective({a: 1})
    assert solve_lp(lp).status == 'unbounded'


def test_free_and_upper_bounded_variables():
    lp = LinearProgram(maximize=False)
    a = lp.add_variable('a', lower=None, upper=None)
    b = lp.add_variable('b', lower=None, upper=3)
    lp.add_constraint({a: 1}, '>=', -5)
    lp.add_constraint({a: 1, b: 1}, '>=', -4)
    lp.set_objective({a: 1, b: -1})
    solution = solve_lp(lp)
    assert solution.objective == pytest.approx(-8)
    assert solution.values == pytest.approx((-5, 3))


def test_degenerate_cycling_example_terminates():
    # Beale's example cycles under the largest-coefficient rule.
    lp = LinearProgram(maximize=True)
    v = [lp.add_variable(upper=None) for _ in range(4)]
    lp.add_constraint({v[0]: 0.25, v[1]: -60, v[2]: -0.04, v[3]: 9}, '<=', 0)
    lp.add_constraint({v[0]: 0.5, v[1]: -90, v[2]: -0.02, v[3]: 3}, '<=', 0)
    lp.add_constraint({v[2]: 1}, '<=', 1)
    lp.set_objective({v[0]: 0.75, v[1]: -150, v[2]: 0.02, v[3]: -6})
    solution = SimplexSolver({'max_pivots': 50}).solve(lp)
    assert solution.objective == pytest.approx(0.05)


def test_pivot_limit():
    lp = LinearProgram(maximize=True)
    a = lp.add_variable('a')
    b = lp.add_variable('b')
    lp.set_objective({a: 1, b: 1})
    with pytest.raises(SimplexIterationLimit):
        SimplexSolver({'max_pivots': 0}).solve(lp)


def test_feasibility_helpers():
    lp = LinearProgram()
    a = lp.add_variable('a')
    lp.add_constraint({a: 2}, '<=', 1)
    assert lp.is_feasible([0.5])
    assert lp.violations([0.75]) == [0]
    assert lp.violations([1.5]) == [('bound', 0), 0]
    with pytest.raises(ValueError):
        lp.add_constraint({a: 1}, '<', 1)


@st.composite
def box_programs(draw):
    n = draw(st.integers(1, 4))
    m = draw(st.integers(0, 4))
    coef = st.integers(-3, 3)
    lp = LinearProgram(maximize=draw(st.booleans()))
    for _ in range(n):
        lp.add_variable(upper=draw(st.sampled_from([1, 2, None])))
    for _ in range(m):
        lp.add_constraint(
            {j: draw(coef) for j in range(n)},
            draw(st.sampled_from(['<=', '>=', '=='])),
            draw(st.integers(-2, 4)),
        )
    lp.set_objective({j: draw(coef) for j in range(n)})
    return lp


@settings(max_examples=150, deadline=None)
@given(box_programs())
def test_matches_scipy(lp):
    expected_status, expected = scipy_optimum(lp)
    assume(expected_status is not None)
    solution = solve_lp(lp)
    assert solution.status == expected_status
    if solution.optimal:
        assert float(solution.objective) == pytest.approx(expected, abs=1e-6)
        assert lp.is_feasible(solution.values, tolerance=1e-6)
        exact = SimplexSolver({'exact': True}).solve(lp)
        assert float(exact.objective) == pytest.approx(expected, abs=1e-9)
