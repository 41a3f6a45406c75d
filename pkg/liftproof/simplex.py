from fractions import Fraction

import numpy as np
import absl.logging as logging
from ml_collections import ConfigDict


class SimplexIterationLimit(RuntimeError):
    pass


class LinearProgram(object):
    """ Linear program over bounded or free variables.

        Constraints are `sum coef * x_j  sense  rhs` with sense one of
        '<=', '>=', '=='. Variables default to the box [0, 1]; a bound of None
        means unbounded in that direction.
    """

    def __init__(self, maximize=True):
        self.maximize = maximize
        self._names = []
        self._lower = []
        self._upper = []
        self._constraints = []
        self._objective = {}
        self.objective_constant = 0

    @property
    def num_vars(self):
        return len(self._names)

    @property
    def names(self):
        return tuple(self._names)

    @property
    def bounds(self):
        return tuple(zip(self._lower, self._upper))

    @property
    def constraints(self):
        return tuple(self._constraints)

    @property
    def objective(self):
        return dict(self._objective)

    def add_variable(self, name=None, lower=0, upper=1):
        if lower is not None and upper is not None:
            assert lower <= upper, ('empty variable range', name, lower, upper)
        self._names.append(name or f'v{len(self._names)}')
        self._lower.append(lower)
        self._upper.append(upper)
        return len(self._names) - 1

    def add_constraint(self, coeffs, sense, rhs):
        if sense not in ('<=', '>=', '=='):
            raise ValueError(f'Unknown constraint sense: {sense}')
        coeffs = {int(j): c for j, c in dict(coeffs).items() if c != 0}
        for j in coeffs:
            assert 0 <= j < self.num_vars, ('constraint uses an unknown variable', j)
        self._constraints.append((coeffs, sense, rhs))
        return len(self._constraints) - 1

    def set_objective(self, coeffs, constant=0):
        self._objective = {int(j): c for j, c in dict(coeffs).items() if c != 0}
        self.objective_constant = constant

    def evaluate_objective(self, values):
        return self.objective_constant + sum(c * values[j] for j, c in self._objective.items())

    def violations(self, values, tolerance=1e-9):
        """ Indices of violated constraints; bounds are reported as ('bound', j). """
        bad = []
        for j, (lo, hi) in enumerate(self.bounds):
            if (lo is not None and values[j] < lo - tolerance) or (
                    hi is not None and values[j] > hi + tolerance):
                bad.append(('bound', j))
        for r, (coeffs, sense, rhs) in enumerate(self._constraints):
            lhs = sum(c * values[j] for j, c in coeffs.items())
            if sense == '<=' and lhs > rhs + tolerance:
                bad.append(r)
            elif sense == '>=' and lhs < rhs - tolerance:
                bad.append(r)
            elif sense == '==' and abs(lhs - rhs) > tolerance:
                bad.append(r)
        return bad

    def is_feasible(self, values, tolerance=1e-9):
        return not self.violations(values, tolerance)

    def __repr__(self):
        return f'LinearProgram(vars={self.num_vars}, constraints={len(self._constraints)})'


class LpSolution(object):

    def __init__(self, status, values=None, objective=None, method='simplex'):
        assert status in ('optimal', 'infeasible', 'unbounded'), ('unknown LP status', status)
        self.status = status
        self.values = None if values is None else tuple(values)
        self.objective = objective
        self.method = method

    @property
    def optimal(self):
        return self.status == 'optimal'

    def __repr__(self):
        return f'LpSolution({self.status}, objective={self.objective}, method={self.method})'


class SimplexSolver(object):
    """ Dense two-phase tableau simplex with Bland's rule.

        With `exact` the tableau holds Fractions and the tolerance is zero;
        otherwise float64 with `tolerance`.
    """

    @staticmethod
    def get_default_config(updates=None):
        config = ConfigDict()
        config.tolerance = 1e-9
        config.exact = False
        config.max_pivots = 100000
        if updates is not None:
            config.update(ConfigDict(updates).copy_and_resolve_references())
        return config

    def __init__(self, config=None):
        self.config = self.get_default_config(config)
        self.tolerance = 0 if self.config.exact else self.config.tolerance

    def _number(self, value):
        if self.config.exact:
            return Fraction(value)
        return float(value)

    def _standard_form(self, lp):
        """ max c.u s.t. A u <= b, u >= 0, with x = offset + M u. """
        columns = []
        for j, (lo, hi) in enumerate(lp.bounds):
            if lo is not None:
                columns.append((j, 1, lo))
            elif hi is not None:
                columns.append((j, -1, hi))
            else:
                columns.extend([(j, 1, 0), (j, -1, 0)])
        position = {}
        for col, (j, sign, _) in enumerate(columns):
            position.setdefault(j, []).append((col, sign))
        offset = [0] * lp.num_vars
        for j, sign, base in columns:
            if base:
                offset[j] = base

        rows, rhs = [], []

        def add_row(coeffs, bound):
            row = [self._number(0)] * len(columns)
            shift = 0
            for j, c in coeffs.items():
                shift += c * offset[j]
                for col, sign in position[j]:
                    row[col] += self._number(c * sign)
            rows.append(row)
            rhs.append(self._number(bound - shift))

        for coeffs, sense, bound in lp.constraints:
            if sense in ('<=', '=='):
                add_row(coeffs, bound)
            if sense in ('>=', '=='):
                add_row({j: -c for j, c in coeffs.items()}, -bound)
        for j, (lo, hi) in enumerate(lp.bounds):
            if lo is not None and hi is not None:
                add_row({j: 1}, hi)

        sign = 1 if lp.maximize else -1
        cost = [self._number(0)] * len(columns)
        for j, c in lp.objective.items():
            for col, s in position[j]:
                cost[col] += self._number(sign * c * s)
        return columns, offset, rows, rhs, cost

    def _pivot(self, tableau, basis, r, c):
        tableau[r] = tableau[r] / tableau[r, c]
        column = tableau[:, c].copy()
        column[r] = 0
        rows = np.flatnonzero(column)
        tableau[rows] = tableau[rows] - np.outer(column[rows], tableau[r])
        basis[r] = c

    def _iterate(self, tableau, basis, allowed):
        """ Runs Bland's rule on the objective row (last row, z_j - c_j form). """
        pivots = 0
        tol = self.tolerance
        while True:
            objective = tableau[-1, :-1]
            entering = next((j for j in allowed if objective[j] < -tol), None)
            if entering is None:
                return 'optimal'
            best, leaving = None, None
            for i in range(tableau.shape[0] - 1):
                a = tableau[i, entering]
                if a > tol:
                    ratio = tableau[i, -1] / a
                    if best is None or ratio < best - tol or (
                            abs(ratio - best) <= tol and basis[i] < basis[leaving]):
                        best, leaving = ratio, i
            if leaving is None:
                return 'unbounded'
            self._pivot(tableau, basis, leaving, entering)
            pivots += 1
            if pivots > self.config.max_pivots:
                raise SimplexIterationLimit(f'simplex exceeded {self.config.max_pivots} pivots')

    def _objective_row(self, tableau, basis, cost):
        row = np.array([-c for c in cost] + [self._number(0)], dtype=tableau.dtype)
        for i, b in enumerate(basis):
            if cost[b] != 0:
                row = row + cost[b] * tableau[i]
        return row

    def solve(self, lp):
        columns, offset, rows, rhs, cost = self._standard_form(lp)
        n, m = len(columns), len(rows)
        dtype = object if self.config.exact else np.float64
        flips = [b < 0 for b in rhs]
        artificial = [i for i in range(m) if flips[i]]
        width = n + m + len(artificial)
        tableau = np.zeros((m + 1, width + 1), dtype=dtype)
        if self.config.exact:
            tableau[:] = Fraction(0)
        basis = [0] * m
        for i in range(m):
            sign = -1 if flips[i] else 1
            for j in range(n):
                tableau[i, j] = sign * rows[i][j]
            tableau[i, n + i] = self._number(sign)
            tableau[i, -1] = sign * rhs[i]
            basis[i] = n + i
        for k, i in enumerate(artificial):
            tableau[i, n + m + k] = self._number(1)
            basis[i] = n + m + k

        if artificial:
            phase_one = [self._number(0)] * (n + m) + [self._number(-1)] * len(artificial)
            tableau[-1] = self._objective_row(tableau, basis, phase_one)
            self._iterate(tableau, basis, range(width))
            if tableau[-1, -1] < -self.tolerance * max(1, m):
                logging.info('LP infeasible (phase one value %s).', tableau[-1, -1])
                return LpSolution('infeasible')
            keep = []
            for i in range(m):
                if basis[i] >= n + m:
                    col = next(
                        (j for j in range(n + m) if abs(tableau[i, j]) > self.tolerance), None
                    )
                    if col is None:
                        continue
                    self._pivot(tableau, basis, i, col)
                keep.append(i)
            tableau = np.concatenate(
                [tableau[keep][:, :n + m], tableau[keep][:, -1:]], axis=1
            )
            tableau = np.concatenate([tableau, np.zeros((1, n + m + 1), dtype=dtype)], axis=0)
            basis = [basis[i] for i in keep]

        full_cost = list(cost) + [self._number(0)] * m
        tableau[-1] = self._objective_row(tableau, basis, full_cost)
        status = self._iterate(tableau, basis, range(n + m))
        if status == 'unbounded':
            return LpSolution('unbounded')

        u = [self._number(0)] * (n + m)
        for i, b in enumerate(basis):
            u[b] = tableau[i, -1]
        values = [self._number(v) for v in offset]
        for col, (j, sign, _) in enumerate(columns):
            values[j] += sign * u[col]
        if not self.config.exact:
            values = [float(v) for v in values]
        return LpSolution('optimal', values, lp.evaluate_objective(values))


def solve_lp(lp, config=None):
    return SimplexSolver(config).solve(lp)
