from collections import namedtuple
from itertools import combinations, product

import numpy as np
import absl.logging as logging

from liftproof.cnf import gen_php
from liftproof.lifting import TypeI, TypeII, TypeIII
from liftproof.polynomial import Monomial, Polynomial, polynomial_sum
from liftproof.search import halving_split
from liftproof.utils import CheckResult, make_rng


VarBound = namedtuple('VarBound', ['var', 'upper'])
ClauseAxiom = namedtuple('ClauseAxiom', ['index'])
LinComb = namedtuple('LinComb', ['terms'])
Division = namedtuple('Division', ['premise', 'divisor'])
MultLow = namedtuple('MultLow', ['premise', 'var'])
MultHigh = namedtuple('MultHigh', ['premise', 'var'])

# One proof line: `polynomial >= 0` together with the rule that produced it.
CpInequality = namedtuple('CpInequality', ['polynomial', 'justification'])


class MissingPremiseError(ValueError):
    pass


class UnsupportedProofError(ValueError):
    pass


class CpFormatError(ValueError):

    def __init__(self, message, line_number):
        super().__init__(f'line {line_number}: {message}')
        self.line_number = line_number


def translate_clause(clause):
    """ l'_1 + ... + l'_t - 1 >= 0 with l' = x for x and 1 - x for -x. """
    return polynomial_sum(Polynomial.literal(lit) for lit in clause) - 1


def premises_of(justification):
    if isinstance(justification, LinComb):
        return [index for index, _ in justification.terms]
    if isinstance(justification, (Division, MultLow, MultHigh)):
        return [justification.premise]
    return []


def var_bound_polynomial(var, upper):
    return 1 - Polynomial.variable(var) if upper else Polynomial.variable(var)


def lincomb_polynomial(polynomials, multipliers):
    return polynomial_sum(p * int(c) for p, c in zip(polynomials, multipliers))


def division_polynomial(polynomial, divisor):
    """ q/c + floor(b/c) for p = q + b, or None unless c divides every coefficient of q. """
    quotient = polynomial.non_constant().exact_divide(divisor)
    if quotient is None:
        return None
    return quotient + polynomial.constant_term // divisor


class CpProof(object):
    """ CP(k) derivation: every line is an inequality `p >= 0` with deg p <= k. """

    def __init__(self, k, lines=()):
        self.k = k
        self._lines = list(lines)

    @property
    def lines(self):
        return tuple(self._lines)

    def line(self, index):
        return self._lines[index - 1]

    def polynomial(self, index):
        return self._lines[index - 1].polynomial

    def append(self, polynomial, justification):
        self._lines.append(CpInequality(polynomial, justification))
        return len(self._lines)

    def clause_axiom(self, formula, index):
        return self.append(translate_clause(formula.clause(index)), ClauseAxiom(index))

    def var_bound(self, var, upper=False):
        return self.append(var_bound_polynomial(var, upper), VarBound(var, bool(upper)))

    def lincomb(self, terms):
        terms = tuple((int(index), int(coef)) for index, coef in terms)
        if len(terms) == 1 and terms[0][1] == 1:
            return terms[0][0]
        polynomial = lincomb_polynomial(
            [self.polynomial(index) for index, _ in terms], [coef for _, coef in terms]
        )
        return self.append(polynomial, LinComb(terms))

    def divide(self, premise, divisor):
        polynomial = division_polynomial(self.polynomial(premise), divisor)
        assert polynomial is not None, ('divisor does not divide the premise', premise, divisor)
        return self.append(polynomial, Division(premise, divisor))

    def mult_low(self, premise, var):
        polynomial = Polynomial.variable(var) * self.polynomial(premise)
        return self.append(polynomial, MultLow(premise, var))

    def mult_high(self, premise, var):
        p = self.polynomial(premise)
        return self.append(p - Polynomial.variable(var) * p, MultHigh(premise, var))

    def mult_literal(self, premise, lit):
        """ g*p >= 0 for the literal polynomial g of `lit`. """
        if lit > 0:
            return self.mult_low(premise, lit)
        return self.mult_high(premise, -lit)

    def mult_complement(self, premise, lit):
        """ p - g*p >= 0 for the literal polynomial g of `lit`. """
        if lit > 0:
            return self.mult_high(premise, lit)
        return self.mult_low(premise, -lit)

    def literal_bound(self, lit):
        return self.var_bound(abs(lit), upper=lit < 0)

    def is_refutation(self):
        return len(self._lines) > 0 and self._lines[-1].polynomial == Polynomial.constant(-1)

    def __len__(self):
        return len(self._lines)

    def __repr__(self):
        return f'CpProof(k={self.k}, lines={len(self._lines)})'


def check_cpk(formula, proof, require_refutation=True):
    """ Recomputes every conclusion from its premises and compares. """
    if len(proof) == 0:
        return CheckResult.failure(0, 'empty proof')
    for j, (polynomial, how) in enumerate(proof.lines, start=1):
        premises = premises_of(how)
        if any(not (isinstance(p, int) and 1 <= p < j) for p in premises):
            return CheckResult.failure(j, 'premises must precede the line')
        if isinstance(how, VarBound):
            if not 1 <= how.var <= formula.num_vars:
                return CheckResult.failure(j, f'variable {how.var} out of range')
            expected = var_bound_polynomial(how.var, how.upper)
        elif isinstance(how, ClauseAxiom):
            if not 1 <= how.index <= formula.num_clauses:
                return CheckResult.failure(j, f'clause index {how.index} out of range')
            expected = translate_clause(formula.clause(how.index))
        elif isinstance(how, LinComb):
            if not how.terms:
                return CheckResult.failure(j, 'empty linear combination')
            coefs = [coef for _, coef in how.terms]
            if any(isinstance(c, bool) or not isinstance(c, int) or c < 0 for c in coefs):
                return CheckResult.failure(j, 'multipliers must be non-negative integers')
            expected = lincomb_polynomial([proof.polynomial(p) for p in premises], coefs)
        elif isinstance(how, Division):
            if not isinstance(how.divisor, int) or how.divisor < 1:
                return CheckResult.failure(j, f'invalid divisor {how.divisor}')
            expected = division_polynomial(proof.polynomial(how.premise), how.divisor)
            if expected is None:
                return CheckResult.failure(
                    j, f'divisor {how.divisor} does not divide the coefficients of line {how.premise}'
                )
        elif isinstance(how, (MultLow, MultHigh)):
            premise = proof.polynomial(how.premise)
            if premise.degree > proof.k - 1:
                return CheckResult.failure(
                    j, f'premise degree {premise.degree} exceeds k-1 = {proof.k - 1}'
                )
            if not 1 <= how.var <= formula.num_vars:
                return CheckResult.failure(j, f'variable {how.var} out of range')
            product = Polynomial.variable(how.var) * premise
            expected = product if isinstance(how, MultLow) else premise - product
        else:
            return CheckResult.failure(j, f'unknown justification {how!r}')
        if polynomial != expected:
            return CheckResult.failure(j, f'conclusion should be {expected.format()}')
        if polynomial.degree > proof.k:
            return CheckResult.failure(j, f'degree {polynomial.degree} exceeds k = {proof.k}')
    if require_refutation and not proof.is_refutation():
        return CheckResult.failure(len(proof), 'last line is not -1 >= 0')
    return CheckResult.success()


def line_ranks(proof):
    ranks = []
    for _, how in proof.lines:
        premises = premises_of(how)
        ranks.append(1 + max(ranks[p - 1] for p in premises) if premises else 0)
    return ranks


def cpk_rank(proof, line=None):
    """ Longest justification path ending at `line`, or anywhere in the proof. """
    ranks = line_ranks(proof)
    if line is not None:
        return ranks[line - 1]
    return max(ranks, default=0)


def pairwise_to_sum(proof, items, pair, bound=None):
    """ Derives 1 - sum(items) >= 0 from pairwise bounds by balanced merging.

        pair(a, b), a < b, returns the line of 1 - items[a] - items[b] >= 0;
        bound(a) returns 1 - items[a] >= 0 and is needed only for one item.
    """
    items = list(items)
    if not items:
        raise MissingPremiseError('pairwise_to_sum needs at least one item')
    pair_lines = {}

    def pair_line(a, b):
        if (a, b) not in pair_lines:
            index = pair(a, b)
            if index is None or proof.polynomial(index) != 1 - items[a] - items[b]:
                raise MissingPremiseError(f'no pairwise bound for items {a} and {b}')
            pair_lines[(a, b)] = index
        return pair_lines[(a, b)]

    def merge(lo, hi):
        if lo == hi:
            index = bound(lo) if bound is not None else None
            if index is None or proof.polynomial(index) != 1 - items[lo]:
                raise MissingPremiseError(f'no upper bound for item {lo}')
            return index
        mid = halving_split(lo, hi)
        left, right = range(lo, mid + 1), range(mid + 1, hi + 1)
        size_a, size_b = len(left), len(right)
        line_a = merge(lo, mid) if size_a > 1 else None
        line_b = merge(mid + 1, hi) if size_b > 1 else None
        rows = []
        for b in right:
            if size_a == 1:
                rows.append(pair_line(lo, b))
                continue
            terms = [(pair_line(a, b), 1) for a in left] + [(line_a, size_a - 1)]
            rows.append(proof.divide(proof.lincomb(terms), size_a))
        if size_b == 1:
            return rows[0]
        terms = [(row, 1) for row in rows] + [(line_b, size_b - 1)]
        return proof.divide(proof.lincomb(terms), size_b)

    return merge(0, len(items) - 1)


def cp_php_refutation(graph):
    """ CP refutation of G-PHP: per-hole pairwise merges, then one linear combination. """
    formula = gen_php(graph)
    proof = CpProof(1)
    for u in range(1, graph.u_count + 1):
        if formula.clause(u).is_empty():
            proof.clause_axiom(formula, u)
            return proof
    hole_clauses = {
        frozenset(clause.variables): j
        for j, clause in enumerate(formula.clauses, start=1) if j > graph.u_count
    }
    terms = [(proof.clause_axiom(formula, u), 1) for u in range(1, graph.u_count + 1)]
    for v in range(1, graph.v_count + 1):
        edges = [graph.edge_var(u, v) for u in graph.pigeons_of(v)]
        if not edges:
            continue
        items = [Polynomial.variable(e) for e in edges]
        line = pairwise_to_sum(
            proof, items,
            lambda a, b: proof.clause_axiom(formula, hole_clauses[frozenset((edges[a], edges[b]))]),
            lambda a: proof.var_bound(edges[a], upper=True),
        )
        terms.append((line, 1))
    total = proof.lincomb(terms)
    constant = proof.polynomial(total).constant_term
    assert proof.polynomial(total).is_constant() and constant <= -1, (
        'pigeon and hole sums must cancel', proof.polynomial(total).format(),
    )
    if constant < -1:
        proof.divide(total, -constant)
    elif total != len(proof):
        proof.append(proof.polynomial(total), proof.line(total).justification)
    return proof


class LiftedPolyBundle(object):
    """ The polynomials y_{i,c} = prod_p y_{i,p,c_p}, z_{i,c} = x_{i,c} y_{i,c} and e_i. """

    def __init__(self, lifted):
        assert lifted.mode == 'tensor', ('polynomial bundle needs a tensor lift', lifted.mode)
        self.lifted = lifted
        self.kappa = lifted.params.k
        self.ell = lifted.params.ell

    @property
    def degree(self):
        return self.kappa + 1

    def cells(self):
        return self.lifted.cells()

    def y_vars(self, i, cell):
        return [self.lifted.y_var(i, p, a) for p, a in enumerate(cell, start=1)]

    def y_poly(self, i, cell):
        return Polynomial.monomial(self.y_vars(i, cell))

    def z_poly(self, i, cell):
        return Polynomial.monomial(self.y_vars(i, cell) + [self.lifted.x_var(i, cell)])

    def e_poly(self, i):
        return polynomial_sum(self.z_poly(i, cell) for cell in self.cells())

    def substitution(self):
        return {i: self.e_poly(i) for i in range(1, self.lifted.base_vars + 1)}

    def i_prime_polynomial(self, i):
        return polynomial_sum(self.y_poly(i, c) for c in self.cells()) - 1

    def ii_prime_polynomial(self, i, cell, other):
        return 1 - self.y_poly(i, cell) - self.y_poly(i, other)

    def iii_prime_polynomial(self, source, cells):
        """ (t - 1) - sum_j y_{i_j,c^j} * w_j, where w_j = x for a negative literal, 1 - x else. """
        clause = self.lifted.base.clause(source)
        total = Polynomial.constant(clause.width - 1)
        for lit, cell in zip(clause, cells):
            x = self.lifted.x_var(abs(lit), cell)
            w = Polynomial.literal(x if lit < 0 else -x)
            total = total - self.y_poly(abs(lit), cell) * w
        return total


class LiftedAxioms(object):
    """ Memoised derivations of the degree-(kappa+1) consequences of a tensor lift.

        Lines are appended to `proof` on first request and reused afterwards.
    """

    def __init__(self, proof, lifted):
        self.proof = proof
        self.lifted = lifted
        self.bundle = LiftedPolyBundle(lifted)
        assert proof.k >= self.bundle.degree, ('proof degree below kappa+1', proof.k)
        self._memo = {}

    def _cached(self, key, build):
        if key not in self._memo:
            self._memo[key] = build()
        return self._memo[key]

    def _axiom(self, tag):
        return self._cached(('axiom', tag), lambda: self.proof.clause_axiom(
            self.lifted.formula, self.lifted.index_of(tag)
        ))

    def product_nonneg(self, factors):
        """ prod g >= 0 over literal polynomials g, by a chain of multiplications. """
        factors = tuple(factors)

        def build():
            if len(factors) == 1:
                return self.proof.literal_bound(factors[0])
            return self.proof.mult_literal(self.product_nonneg(factors[:-1]), factors[-1])

        return self._cached(('product', factors), build)

    def dominance_pieces(self, first, others):
        """ Lines g_0 g_1..g_r - g_0 g_1..g_{r+1} >= 0 whose sum telescopes to g_0 - prod g. """
        others = tuple(others)
        pieces = []
        for r in range(len(others)):
            prefix = self.product_nonneg((first,) + others[:r])
            pieces.append(self._cached(
                ('complement', (first,) + others[:r], others[r]),
                lambda: self.proof.mult_complement(prefix, others[r]),
            ))
        return pieces

    def factor_dominates(self, first, others):
        """ g_0 - g_0 g_1 ... g_r >= 0. """
        others = tuple(others)
        return self._cached(('dominates', first, others), lambda: self.proof.lincomb(
            [(piece, 1) for piece in self.dominance_pieces(first, others)]
        ))

    def y_nonneg(self, i, cell):
        return self.product_nonneg(self.bundle.y_vars(i, cell))

    def z_nonneg(self, i, cell):
        return self.product_nonneg(self.bundle.y_vars(i, cell) + [self.lifted.x_var(i, cell)])

    def z_below_y(self, i, cell):
        """ y_{i,c} - z_{i,c} >= 0. """
        return self._cached(('z_below_y', i, cell), lambda: self.proof.mult_high(
            self.y_nonneg(i, cell), self.lifted.x_var(i, cell)
        ))

    def y_below_coord(self, i, cell, p):
        """ y_{i,p,c_p} - y_{i,c} >= 0; None when kappa = 1 (the two coincide). """
        variables = self.bundle.y_vars(i, cell)
        if len(variables) == 1:
            return None
        first = variables[p - 1]
        return self.factor_dominates(first, [v for v in variables if v != first])

    def y_upper(self, i, cell):
        def build():
            top = self.proof.var_bound(self.bundle.y_vars(i, cell)[0], upper=True)
            below = self.y_below_coord(i, cell, 1)
            if below is None:
                return top
            return self.proof.lincomb([(top, 1), (below, 1)])
        return self._cached(('y_upper', i, cell), build)

    def e_nonneg(self, i):
        return self._cached(('e_nonneg', i), lambda: self.proof.lincomb(
            [(self.z_nonneg(i, cell), 1) for cell in self.bundle.cells()]
        ))

    def i_prime(self, i):
        """ sum_c y_{i,c} - 1 >= 0 by multiplying out the (I) clauses of block i. """
        ell, kappa = self.bundle.ell, self.bundle.kappa

        def scaled(p, prefix):
            # prod_{q <= len(prefix)} y_{i,q,prefix_q} * (sum_a y_{i,p,a} - 1) >= 0
            if not prefix:
                return self._axiom(TypeI(i, p))
            return self._cached(('scaled', i, p, prefix), lambda: self.proof.mult_literal(
                scaled(p, prefix[:-1]), self.lifted.y_var(i, len(prefix), prefix[-1])
            ))

        def build():
            line = self._axiom(TypeI(i, 1))
            for p in range(2, kappa + 1):
                terms = [(line, 1)] + [
                    (scaled(p, prefix), 1)
                    for prefix in product(range(1, ell + 1), repeat=p - 1)
                ]
                line = self.proof.lincomb(terms)
            return line

        return self._cached(('i_prime', i), build)

    def ii_prime(self, i, cell, other):
        """ 1 - y_{i,c} - y_{i,c'} >= 0 for c != c'. """
        cell, other = min(cell, other), max(cell, other)
        assert cell != other, ('(II\') needs two different cells', cell)

        def build():
            p = next(q for q in range(1, len(cell) + 1) if cell[q - 1] != other[q - 1])
            a, a2 = sorted((cell[p - 1], other[p - 1]))
            axiom = self._axiom(TypeII(i, p, a, a2))
            below = [self.y_below_coord(i, c, p) for c in (cell, other)]
            if below[0] is None:
                return axiom
            return self.proof.lincomb([(axiom, 1), (below[0], 1), (below[1], 1)])

        return self._cached(('ii_prime', i, cell, other), build)

    def _iii_factors(self, lit, cell):
        x = self.lifted.x_var(abs(lit), cell)
        return self.bundle.y_vars(abs(lit), cell) + [x if lit < 0 else -x]

    def iii_prime(self, source, cells):
        """ (t - 1) - sum_j y_{i_j,c^j} w_j >= 0 from the (III) clause for (source, cells).

            For a unit source the translated clause is kappa - sum g >= 0 over the
            kappa + 1 factors g of y w; multiplying it by the y factors one at a
            time leaves -y w, in rank kappa. Wider sources add the telescoping
            pieces showing that each factor dominates its product to the
            translated clause and divide the sum by kappa + 1, in rank kappa + 2.
        """
        cells = tuple(cells)

        def build():
            clause = self.lifted.base.clause(source)
            axiom = self._axiom(TypeIII(source, cells))
            if clause.width == 1:
                line = axiom
                for g in self._iii_factors(clause.literals[0], cells[0])[:-1]:
                    line = self.proof.mult_literal(line, g)
                return line
            terms = [(axiom, 1)]
            for lit, cell in zip(clause, cells):
                factors = self._iii_factors(lit, cell)
                for f in factors:
                    pieces = self.dominance_pieces(f, [g for g in factors if g != f])
                    terms.extend((piece, 1) for piece in pieces)
            return self.proof.divide(self.proof.lincomb(terms), self.bundle.degree)

        return self._cached(('iii_prime', source, cells), build)

    def same_block_pair(self, i, cell, other):
        """ 1 - z_{i,c} - z_{i,c'} >= 0. """
        return self._cached(('z_pair', i, cell, other), lambda: self.proof.lincomb([
            (self.ii_prime(i, cell, other), 1),
            (self.z_below_y(i, cell), 1),
            (self.z_below_y(i, other), 1),
        ]))

    def z_upper(self, i, cell):
        return self._cached(('z_upper', i, cell), lambda: self.proof.lincomb([
            (self.y_upper(i, cell), 1), (self.z_below_y(i, cell), 1)
        ]))

    def e_upper(self, i):
        """ 1 - e_i >= 0 by merging the pairwise bounds on z_{i,c}. """
        cells = self.bundle.cells()
        return self._cached(('e_upper', i), lambda: pairwise_to_sum(
            self.proof,
            [self.bundle.z_poly(i, c) for c in cells],
            lambda a, b: self.same_block_pair(i, cells[a], cells[b]),
            lambda a: self.z_upper(i, cells[a]),
        ))


def derive_lifted_axioms(proof, lifted):
    """ Derives every (I'), (II'), (III') inequality and the y/e bounds of a tensor lift. """
    axioms = LiftedAxioms(proof, lifted)
    cells = axioms.bundle.cells()
    for i in range(1, lifted.base_vars + 1):
        axioms.i_prime(i)
        axioms.e_nonneg(i)
        for cell in cells:
            axioms.y_nonneg(i, cell)
            axioms.y_upper(i, cell)
        for cell, other in combinations(cells, 2):
            axioms.ii_prime(i, cell, other)
    for source, clause in enumerate(lifted.base.clauses, start=1):
        for cell_tuple in product(cells, repeat=clause.width):
            axioms.iii_prime(source, cell_tuple)
    logging.info('Derived lifted axioms: %d lines, rank %d.', len(proof), cpk_rank(proof))
    return axioms


def derive_e_upper(axioms, i):
    return axioms.e_upper(i)


def derive_p_type(axioms, source):
    """ sum_j e_{i_j} - 1 >= 0 for an all-positive base clause.

        Step r sums the current inequalities over the cells of literal r, adds
        (I') and (L-1) copies of every z_{i_r,c} >= 0, then divides by L = ell^kappa.
        A unit clause needs only the sum.
    """
    clause = axioms.lifted.base.clause(source)
    assert all(lit > 0 for lit in clause), ('P-type clauses are all positive', clause)
    proof, cells = axioms.proof, axioms.bundle.cells()
    size = len(cells)
    width = clause.width
    current = {
        tuple(cell_tuple): axioms.iii_prime(source, cell_tuple)
        for cell_tuple in product(cells, repeat=width)
    }
    for r, lit in enumerate(clause):
        i = abs(lit)
        following = {}
        for rest in product(cells, repeat=width - r - 1):
            terms = [(current[(cell,) + rest], 1) for cell in cells]
            terms.append((axioms.i_prime(i), 1))
            if width == 1:
                following[rest] = proof.lincomb(terms)
                continue
            terms.extend((axioms.z_nonneg(i, cell), size - 1) for cell in cells)
            following[rest] = proof.divide(proof.lincomb(terms), size)
        current = following
    return current[()]


def derive_h_type(axioms, source):
    """ 1 - e_a - e_b >= 0 for a base clause (-e_a v -e_b). """
    clause = axioms.lifted.base.clause(source)
    assert clause.width == 2 and all(lit < 0 for lit in clause), (
        'H-type clauses have two negative literals', clause,
    )
    cells = axioms.bundle.cells()
    size = len(cells)
    blocks = [abs(lit) for lit in clause]
    items = [(i, cell) for i in blocks for cell in cells]

    def pair(a, b):
        (i, cell), (i2, cell2) = items[a], items[b]
        if i == i2:
            return axioms.same_block_pair(i, cell, cell2)
        return axioms.iii_prime(source, (cell, cell2))

    assert len(items) == 2 * size
    return pairwise_to_sum(
        axioms.proof, [axioms.bundle.z_poly(i, cell) for i, cell in items], pair,
        lambda a: axioms.z_upper(*items[a]),
    )


def lift_cp_refutation(base_proof, lifted):
    """ Lifted CP(kappa+1) refutation: e_i -> e_i polynomial in every base line.

        Axiom uses are replaced by derived P-type, H-type and bound segments; linear
        combinations and divisions carry over with the same multipliers.
    """
    bundle = LiftedPolyBundle(lifted)
    proof = CpProof(bundle.degree)
    axioms = LiftedAxioms(proof, lifted)
    mapping = bundle.substitution()
    index = {}
    for j, (polynomial, how) in enumerate(base_proof.lines, start=1):
        if isinstance(how, ClauseAxiom):
            clause = lifted.base.clause(how.index)
            if clause.width > 0 and all(lit > 0 for lit in clause):
                line = derive_p_type(axioms, how.index)
            elif clause.width == 2 and all(lit < 0 for lit in clause):
                line = derive_h_type(axioms, how.index)
            else:
                raise UnsupportedProofError(f'cannot lift axiom for clause {clause.literals}')
        elif isinstance(how, VarBound):
            line = derive_e_upper(axioms, how.var) if how.upper else axioms.e_nonneg(how.var)
        elif isinstance(how, LinComb):
            terms = [(index[p], coef) for p, coef in how.terms]
            line = proof.append(
                lincomb_polynomial([proof.polynomial(p) for p, _ in terms], [c for _, c in terms]),
                LinComb(tuple(terms)),
            )
        elif isinstance(how, Division):
            line = proof.divide(index[how.premise], how.divisor)
        else:
            raise UnsupportedProofError(f'base line {j} uses {type(how).__name__}')
        assert proof.polynomial(line) == polynomial.substitute(mapping), (
            'lifted line does not match the substituted base line', j,
        )
        index[j] = line
    final = index[len(base_proof)]
    if final != len(proof):
        proof.append(proof.polynomial(final), proof.line(final).justification)
    logging.info(
        'Lifted CP refutation: %d lines, rank %d (base rank %d).',
        len(proof), cpk_rank(proof), cpk_rank(base_proof),
    )
    return proof


def soundness_violations(proof, trials=1000, seed=0, num_vars=None):
    """ Lines whose premises hold on a random 0/1 point while the conclusion fails. """
    if num_vars is None:
        num_vars = max((v for line in proof.lines for v in line.polynomial.variables()), default=0)
    rng = make_rng(seed)
    matrix = rng.integers(0, 2, size=(trials, max(num_vars, 1)), dtype=np.uint8)
    values = {}
    violations = []
    for j, (polynomial, how) in enumerate(proof.lines, start=1):
        values[j] = polynomial.evaluate_matrix(matrix)
        premises = premises_of(how)
        if not premises:
            continue
        holds = np.ones(trials, dtype=bool)
        for p in premises:
            holds &= values[p] >= 0
        bad = np.flatnonzero(holds & (values[j] < 0))
        if bad.size:
            violations.append((j, tuple(int(b) for b in matrix[bad[0]])))
    return violations


def mutate_proof(proof, seed=0, kind=None):
    """ Returns (kind, corrupted copy). Kinds: coefficient, negative_multiplier, divisor,
        mult_rule. """
    rng = make_rng(seed)
    lines = list(proof.lines)
    lincombs = [j for j, line in enumerate(lines) if isinstance(line.justification, LinComb)]
    divisions = [
        j for j, line in enumerate(lines)
        if isinstance(line.justification, Division)
        and not lines[line.justification.premise - 1].polynomial.non_constant().is_zero()
    ]
    mults = [
        j for j, line in enumerate(lines)
        if isinstance(line.justification, (MultLow, MultHigh))
        and not lines[line.justification.premise - 1].polynomial.is_zero()
    ]
    if kind is None:
        kinds = ['coefficient']
        if lincombs:
            kinds.append('negative_multiplier')
        if divisions:
            kinds.append('divisor')
        if mults:
            kinds.append('mult_rule')
        kind = kinds[int(rng.integers(len(kinds)))]
    if kind == 'coefficient':
        j = int(rng.integers(len(lines)))
        polynomial, how = lines[j]
        terms = polynomial.terms
        monos = list(terms) or [Monomial()]
        mono = monos[int(rng.integers(len(monos)))]
        terms[mono] = terms.get(mono, 0) + (1 if rng.integers(2) else -1)
        lines[j] = CpInequality(Polynomial(terms), how)
    elif kind == 'negative_multiplier':
        j = lincombs[int(rng.integers(len(lincombs)))]
        polynomial, how = lines[j]
        terms = list(how.terms)
        t = int(rng.integers(len(terms)))
        terms[t] = (terms[t][0], -terms[t][1] - 1)
        lines[j] = CpInequality(polynomial, LinComb(tuple(terms)))
    elif kind == 'divisor':
        j = divisions[int(rng.integers(len(divisions)))]
        polynomial, how = lines[j]
        lines[j] = CpInequality(polynomial, Division(how.premise, how.divisor + 1))
    elif kind == 'mult_rule':
        j = mults[int(rng.integers(len(mults)))]
        polynomial, how = lines[j]
        swapped = MultHigh if isinstance(how, MultLow) else MultLow
        lines[j] = CpInequality(polynomial, swapped(how.premise, how.var))
    else:
        raise ValueError(f'Unknown mutation kind: {kind}')
    return kind, CpProof(proof.k, lines)


_TAGS = {VarBound: 'B', ClauseAxiom: 'A', LinComb: 'L', Division: 'D', MultLow: 'ML', MultHigh: 'MH'}


def write_cpk(proof):
    rows = [f'cpk {proof.k} {len(proof)}']
    for polynomial, how in proof.lines:
        if isinstance(how, VarBound):
            fields = [how.var, 'hi' if how.upper else 'lo']
        elif isinstance(how, ClauseAxiom):
            fields = [how.index]
        elif isinstance(how, LinComb):
            fields = [len(how.terms)] + [x for term in how.terms for x in term]
        elif isinstance(how, Division):
            fields = [how.premise, how.divisor]
        else:
            fields = [how.premise, how.var]
        head = ' '.join([_TAGS[type(how)]] + [str(f) for f in fields])
        rows.append(f'{head} : {polynomial.format()}')
    return ('\n'.join(rows) + '\n').encode('ascii')


def parse_cpk(text):
    if isinstance(text, bytes):
        text = text.decode('ascii')
    rows = [(n, line) for n, line in enumerate(text.splitlines(), start=1) if line.strip()]
    if not rows:
        raise CpFormatError('missing "cpk <k> <num_lines>" header', 1)
    number, header = rows[0]
    fields = header.split()
    if len(fields) != 3 or fields[0] != 'cpk':
        raise CpFormatError('missing "cpk <k> <num_lines>" header', number)
    proof = CpProof(int(fields[1]))
    declared = int(fields[2])
    for number, raw in rows[1:]:
        head, sep, body = raw.partition(':')
        fields = head.split()
        if not sep or not fields:
            raise CpFormatError(f'malformed line {raw!r}', number)
        try:
            tag, values = fields[0], fields[1:]
            if tag == 'B':
                how = VarBound(int(values[0]), values[1] == 'hi')
            elif tag == 'A':
                how = ClauseAxiom(int(values[0]))
            elif tag == 'L':
                count = int(values[0])
                numbers = [int(v) for v in values[1:]]
                if len(numbers) != 2 * count:
                    raise CpFormatError('linear combination term count mismatch', number)
                how = LinComb(tuple(zip(numbers[0::2], numbers[1::2])))
            elif tag == 'D':
                how = Division(int(values[0]), int(values[1]))
            elif tag in ('ML', 'MH'):
                rule = MultLow if tag == 'ML' else MultHigh
                how = rule(int(values[0]), int(values[1]))
            else:
                raise CpFormatError(f'unknown rule tag {tag!r}', number)
            polynomial = Polynomial.parse(body)
        except (IndexError, ValueError) as error:
            if isinstance(error, CpFormatError):
                raise
            raise CpFormatError(str(error) or 'malformed line', number)
        proof.append(polynomial, how)
    if len(proof) != declared:
        raise CpFormatError(f'header declares {declared} lines, found {len(proof)}', number)
    return proof
