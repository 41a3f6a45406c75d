from fractions import Fraction
from itertools import combinations

import numpy as np
from ml_collections import ConfigDict

from liftproof.simplex import LinearProgram, SimplexSolver
from liftproof.utils import enumerate_assignments


class ApproxDegree(object):
    """ epsilon-approximate degree of a +-1 valued function by exact LPs, one per degree. """

    @staticmethod
    def get_default_config(updates=None):
        config = ConfigDict()
        config.max_vars = 4
        if updates is not None:
            config.update(ConfigDict(updates).copy_and_resolve_references())
        return config

    def __init__(self, config=None):
        self.config = self.get_default_config(config)
        self.solver = SimplexSolver({'exact': True})

    @staticmethod
    def _num_vars(table):
        n = max(len(table) - 1, 0).bit_length()
        if 1 << n != len(table):
            raise ValueError(f'Truth table length {len(table)} is not a power of two.')
        return n

    def best_error(self, table, degree):
        """ min over multilinear p of degree <= d of max_x |f(x) - p(x)|, as a Fraction. """
        n = self._num_vars(table)
        points = enumerate_assignments(n)
        monomials = [s for d in range(degree + 1) for s in combinations(range(n), d)]
        lp = LinearProgram(maximize=False)
        coefs = [lp.add_variable(f'c{s}', lower=None, upper=None) for s in monomials]
        error = lp.add_variable('error', lower=0, upper=None)
        for row, value in zip(points, table):
            terms = {coefs[k]: 1 for k, s in enumerate(monomials) if all(row[v] for v in s)}
            lp.add_constraint({**terms, error: -1}, '<=', int(value))
            lp.add_constraint({**{j: -1 for j in terms}, error: -1}, '<=', -int(value))
        lp.set_objective({error: 1})
        solution = self.solver.solve(lp)
        assert solution.optimal, ('approximation LPs are always feasible and bounded', solution)
        return Fraction(solution.objective)

    def degree(self, table, epsilon):
        table = [int(v) for v in np.asarray(table).tolist()]
        if any(v not in (-1, 1) for v in table):
            raise ValueError('approx_degree expects a +-1 valued truth table')
        n = self._num_vars(table)
        if n > self.config.max_vars:
            raise ValueError(f'function has {n} variables, cap is {self.config.max_vars}')
        epsilon = Fraction(epsilon).limit_denominator(10 ** 6)
        assert 0 <= epsilon < 1, ('epsilon must lie in [0, 1)', epsilon)
        for d in range(n + 1):
            if self.best_error(table, d) <= epsilon:
                return d
        return n


def approx_degree(table, epsilon, config=None):
    return ApproxDegree(config).degree(table, epsilon)


def to_sign_table(table):
    """ Maps a 0/1 truth table to +-1 with 0 -> +1 and 1 -> -1. """
    return [1 - 2 * int(v) for v in table]
