import numpy as np
import absl.logging as logging
from ml_collections import ConfigDict

from liftproof.cnf import gen_random_tcnf
from liftproof.lifting import lift_gap
from liftproof.simplex import LinearProgram, LpSolution, SimplexSolver, solve_lp
from liftproof.utils import ENUMERATION_CAP, iter_assignment_blocks, make_rng


TRIAL_CHUNK = 4096


def build_maxsat_lp(formula):
    """ max sum z_i s.t. (1 - z_i) + sum l' >= 1 for every clause, all variables in [0, 1].

        Variables 0..n-1 are x_1..x_n, variables n..n+m-1 are z_1..z_m.
    """
    lp = LinearProgram(maximize=True)
    for v in range(1, formula.num_vars + 1):
        lp.add_variable(f'x{v}')
    for j in range(1, formula.num_clauses + 1):
        lp.add_variable(f'z{j}')
    for j, clause in enumerate(formula.clauses):
        coeffs = {formula.num_vars + j: -1}
        negatives = 0
        for lit in clause:
            coeffs[abs(lit) - 1] = coeffs.get(abs(lit) - 1, 0) + (1 if lit > 0 else -1)
            negatives += lit < 0
        lp.add_constraint(coeffs, '>=', -negatives)
    lp.set_objective({formula.num_vars + j: 1 for j in range(formula.num_clauses)})
    return lp


def maxsat_witness(lp, formula):
    """ The all-halves point with z = 1, if feasible. Its value m meets the bound sum z_i <= m. """
    values = [0.5] * formula.num_vars + [1.0] * formula.num_clauses
    if not lp.is_feasible(values):
        return None
    return LpSolution('optimal', values, lp.evaluate_objective(values), method='witness')


def brute_maxsat(formula, cap=ENUMERATION_CAP):
    best = 0
    for _, block in iter_assignment_blocks(formula.num_vars, cap):
        best = max(best, int(formula.satisfied_counts(block).max()))
        if best == formula.num_clauses:
            break
    return best


def local_search_maxsat(formula, restarts=32, flips=2000, seed=0):
    """ Steepest-ascent flipping from random starts; a lower bound on the optimum. """
    rng = make_rng(seed)
    n = formula.num_vars
    best = 0
    for _ in range(restarts):
        alpha = rng.integers(0, 2, size=n, dtype=np.uint8)
        score = int(formula.satisfied_counts(alpha[None, :])[0])
        for _ in range(flips):
            neighbours = np.repeat(alpha[None, :], n, axis=0)
            neighbours[np.arange(n), np.arange(n)] ^= 1
            scores = formula.satisfied_counts(neighbours)
            top = int(scores.max())
            if top <= score:
                break
            choice = rng.choice(np.flatnonzero(scores == top))
            alpha, score = neighbours[choice], top
        best = max(best, score)
        if best == formula.num_clauses:
            break
    return best


def random_assignment_fraction(formula, trials, seed):
    assert trials >= 1, ('need at least one trial', trials)
    rng = make_rng(seed)
    satisfied, done = 0, 0
    while done < trials:
        size = min(TRIAL_CHUNK, trials - done)
        block = rng.integers(0, 2, size=(size, formula.num_vars), dtype=np.uint8)
        satisfied += int(formula.satisfied_counts(block).sum())
        done += size
    return satisfied / (trials * formula.num_clauses)


def expected_satisfied_fraction(formula):
    widths = np.array([clause.width for clause in formula.clauses], dtype=np.float64)
    return float(np.mean(1.0 - 0.5 ** widths))


class GapReport(object):
    """ Outcome of one integrality-gap run. gap = lp_optimum / integral_optimum. """

    FIELDS = (
        't', 'n', 'delta', 'seed', 'base_clause_count', 'clause_count', 'lp_optimum',
        'lp_method', 'integral_optimum', 'integral_method', 'exact', 'gap',
        'random_fraction', 'expected_fraction',
    )

    def __init__(self, **fields):
        missing = set(self.FIELDS) - set(fields)
        assert not missing, ('missing report fields', sorted(missing))
        for name in self.FIELDS:
            setattr(self, name, fields[name])

    def to_dict(self):
        return {name: getattr(self, name) for name in self.FIELDS}

    def to_record(self):
        parts = []
        for name, value in self.to_dict().items():
            if isinstance(value, float):
                value = f'{value:.6f}'
            elif isinstance(value, bool):
                value = int(value)
            parts.append(f'{name}={value}')
        return 'gap ' + ' '.join(parts)

    def __repr__(self):
        return f'GapReport({self.to_record()})'


class GapExperiment(object):
    """ LP relaxation against the integral MAX-SAT optimum of gap-mode lifted random t-CNFs. """

    @staticmethod
    def get_default_config(updates=None):
        config = ConfigDict()
        config.t = 3
        config.n = 8
        config.delta = 25
        config.brute_force_cap = ENUMERATION_CAP
        config.integral_method = 'auto'
        config.lp_method = 'auto'
        config.simplex_max_constraints = 2000
        config.trials = 10000
        config.restarts = 32
        config.flips = 2000
        config.simplex = SimplexSolver.get_default_config()
        if updates is not None:
            config.update(ConfigDict(updates).copy_and_resolve_references())
        return config

    def __init__(self, config=None):
        self.config = self.get_default_config(config)

    def base_formula(self, seed):
        config = self.config
        return gen_random_tcnf(config.t, config.n, config.delta * config.n, seed)

    def lp_optimum(self, formula):
        method = self.config.lp_method
        lp = build_maxsat_lp(formula)
        if method == 'auto':
            if len(lp.constraints) <= self.config.simplex_max_constraints:
                method = 'simplex'
            else:
                method = 'witness'
                logging.info(
                    '%d constraints exceed the simplex limit, trying the all-halves point',
                    len(lp.constraints),
                )
        if method == 'witness':
            solution = maxsat_witness(lp, formula)
            if solution is not None:
                return solution
            if self.config.lp_method == 'witness':
                raise ValueError('all-halves point is infeasible; use lp_method=simplex')
        elif method != 'simplex':
            raise ValueError(f'Unknown LP method: {method}')
        solution = solve_lp(lp, self.config.simplex)
        assert solution.optimal, ('MAX-SAT relaxations are bounded and feasible', solution)
        return solution

    def integral_optimum(self, lifted, seed):
        """ Returns (value, method, exact). """
        config = self.config
        method = config.integral_method
        formula = lifted.formula
        if method == 'auto':
            if formula.num_vars <= config.brute_force_cap:
                method = 'brute'
            elif lifted.base_vars <= config.brute_force_cap:
                method = 'lifted_exact'
            else:
                method = 'local_search'
        if method == 'brute':
            return brute_maxsat(formula, config.brute_force_cap), method, True
        elif method == 'lifted_exact':
            offset = lifted.lifted_maxsat_offset()
            return offset + brute_maxsat(lifted.base, config.brute_force_cap), method, True
        elif method == 'local_search':
            value = local_search_maxsat(formula, config.restarts, config.flips, seed)
            return value, method, False
        else:
            raise ValueError(f'Unknown integral method: {method}')

    def run(self, seed):
        config = self.config
        base = self.base_formula(seed)
        lifted = lift_gap(base)
        formula = lifted.formula
        lp = self.lp_optimum(formula)
        integral, method, exact = self.integral_optimum(lifted, seed)
        gap = float(lp.objective) / integral if integral else float('inf')
        report = GapReport(
            t=config.t, n=config.n, delta=config.delta, seed=seed,
            base_clause_count=base.num_clauses,
            clause_count=formula.num_clauses,
            lp_optimum=float(lp.objective),
            lp_method=lp.method,
            integral_optimum=integral,
            integral_method=method,
            exact=exact,
            gap=gap,
            random_fraction=random_assignment_fraction(formula, config.trials, seed),
            expected_fraction=expected_satisfied_fraction(formula),
        )
        logging.info('%s', report.to_record())
        return report


def gap_experiment(t, n, delta, seed, config=None):
    config = GapExperiment.get_default_config(config)
    config.t, config.n, config.delta = t, n, delta
    return GapExperiment(config).run(seed)
