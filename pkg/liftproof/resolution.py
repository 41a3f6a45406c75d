from collections import namedtuple

import absl.logging as logging

from liftproof.cnf import Clause
from liftproof.lifting import lift_parity
from liftproof.search import (
    BlockIntervalQuery, Leaf, TreeVerificationError, VarQuery, lifted_search_tree_parity
)
from liftproof.utils import CheckResult


Axiom = namedtuple('Axiom', ['index'])
Resolvent = namedtuple('Resolvent', ['parent1', 'parent2', 'pivot'])
ProofLine = namedtuple('ProofLine', ['clause', 'justification'])


class NotTreeLikeError(ValueError):
    pass


class RankBoundError(ValueError):
    pass


class ResolutionFormatError(ValueError):

    def __init__(self, message, line_number):
        super().__init__(f'line {line_number}: {message}')
        self.line_number = line_number


class ResolutionProof(object):
    """ Resolution proof as a list of justified clauses. Line indices are 1-based. """

    def __init__(self, lines=()):
        self._lines = list(lines)

    @property
    def lines(self):
        return tuple(self._lines)

    def line(self, index):
        return self._lines[index - 1]

    def append(self, clause, justification):
        if not isinstance(clause, Clause):
            clause = Clause(clause)
        self._lines.append(ProofLine(clause, justification))
        return len(self._lines)

    def axiom(self, formula, index):
        return self.append(formula.clause(index), Axiom(index))

    def resolve(self, parent1, parent2, pivot):
        """ Appends the resolvent of two earlier lines on `pivot`. """
        clause = resolvent_literals(self.line(parent1).clause, self.line(parent2).clause, pivot)
        assert clause is not None, ('parents do not resolve on the pivot', parent1, parent2, pivot)
        return self.append(clause, Resolvent(parent1, parent2, pivot))

    def is_refutation(self):
        return len(self._lines) > 0 and self._lines[-1].clause.is_empty()

    def __len__(self):
        return len(self._lines)

    def __repr__(self):
        return f'ResolutionProof(lines={len(self._lines)})'


def resolvent_literals(clause1, clause2, pivot):
    """ (A ∨ B) from (A ∨ x) and (B ∨ ¬x), in either parent order.

        Returns None if the parents do not clash on the pivot or the result is
        tautological. Duplicate literals are merged.
    """
    pivot = abs(pivot)
    set1, set2 = clause1.literal_set, clause2.literal_set
    if pivot in set1 and -pivot in set2:
        rest1, rest2 = set1 - {pivot}, set2 - {-pivot}
    elif -pivot in set1 and pivot in set2:
        rest1, rest2 = set1 - {-pivot}, set2 - {pivot}
    else:
        return None
    literals = list(dict.fromkeys(
        [lit for lit in clause1 if lit in rest1] + [lit for lit in clause2 if lit in rest2]
    ))
    if any(-lit in rest1 | rest2 for lit in literals):
        return None
    return Clause(literals)


def check_resolution(formula, proof, require_refutation=True):
    if len(proof) == 0:
        return CheckResult.failure(0, 'empty proof')
    for j, (clause, how) in enumerate(proof.lines, start=1):
        if isinstance(how, Axiom):
            if not 1 <= how.index <= formula.num_clauses:
                return CheckResult.failure(j, f'axiom index {how.index} out of range')
            if not clause.same_literals(formula.clause(how.index)):
                return CheckResult.failure(j, f'clause differs from input clause {how.index}')
        elif isinstance(how, Resolvent):
            if not (1 <= how.parent1 < j and 1 <= how.parent2 < j):
                return CheckResult.failure(j, 'parents must precede the resolvent')
            expected = resolvent_literals(
                proof.line(how.parent1).clause, proof.line(how.parent2).clause, how.pivot
            )
            if expected is None:
                return CheckResult.failure(
                    j, f'lines {how.parent1} and {how.parent2} do not resolve on x{abs(how.pivot)}'
                )
            if not clause.same_literals(expected):
                return CheckResult.failure(j, f'resolvent should be {sorted(expected.literal_set)}')
        else:
            return CheckResult.failure(j, f'unknown justification {how!r}')
    if require_refutation and not proof.is_refutation():
        return CheckResult.failure(len(proof), 'last line is not the empty clause')
    return CheckResult.success()


def line_ranks(proof):
    ranks = []
    for clause, how in proof.lines:
        if isinstance(how, Resolvent):
            ranks.append(1 + max(ranks[how.parent1 - 1], ranks[how.parent2 - 1]))
        else:
            ranks.append(0)
    return ranks


def proof_rank(proof):
    return max(line_ranks(proof), default=0)


def is_tree_like(proof):
    """ Every derived line is used at most once. Axiom lines may be shared. """
    used = set()
    for clause, how in proof.lines:
        if isinstance(how, Resolvent):
            for parent in (how.parent1, how.parent2):
                if isinstance(proof.line(parent).justification, Resolvent):
                    if parent in used:
                        return False
                    used.add(parent)
    return True


def tree_expand(proof):
    """ Copies shared derived lines once per use, rooted at the last line. """
    out = ResolutionProof()
    axioms = {}

    def copy(j):
        clause, how = proof.line(j)
        if isinstance(how, Axiom):
            if how.index not in axioms:
                axioms[how.index] = out.append(clause, how)
            return axioms[how.index]
        p1, p2 = copy(how.parent1), copy(how.parent2)
        return out.append(clause, Resolvent(p1, p2, how.pivot))

    if len(proof):
        copy(len(proof))
    return out


def dt_to_resolution(tree, formula):
    """ Tree-like refutation whose lines are the clauses falsified along each tree path.

        Each leaf becomes the axiom it names, each query resolves its children on
        the queried variable. A child clause without the pivot is reused as is, so
        rank(P) <= height(T).
    """
    proof = ResolutionProof()
    axioms = {}

    def convert(node, path):
        if isinstance(node, Leaf):
            label = node.label
            if not (isinstance(label, int) and 1 <= label <= formula.num_clauses):
                raise TreeVerificationError(f'leaf label {label!r} is not a clause index')
            if not formula.clause(label).falsified_by_partial(path):
                raise TreeVerificationError(
                    f'clause {label} is not falsified on the path {sorted(path.items())}'
                )
            if label not in axioms:
                axioms[label] = proof.axiom(formula, label)
            return axioms[label]
        if isinstance(node, BlockIntervalQuery):
            raise TreeVerificationError('interval queries have no resolution counterpart')
        v = node.var
        if v in path:
            return convert(node.child1 if path[v] else node.child0, path)
        line0 = convert(node.child0, {**path, v: 0})
        if v not in proof.line(line0).clause.literal_set:
            return line0
        line1 = convert(node.child1, {**path, v: 1})
        if -v not in proof.line(line1).clause.literal_set:
            return line1
        return proof.resolve(line0, line1, v)

    root = convert(tree, {})
    if root != len(proof):
        # A memoised axiom can sit earlier in the proof; restate it last.
        clause, how = proof.line(root)
        proof.append(clause, how)
    assert proof.is_refutation(), 'root clause of a verified search tree is empty'
    return proof


def resolution_to_dt(proof):
    """ Search tree from a tree-like refutation: each resolvent queries its pivot. """
    if not is_tree_like(proof):
        raise NotTreeLikeError('resolution_to_dt needs a tree-like proof')

    def build(j, path):
        clause, how = proof.line(j)
        if isinstance(how, Axiom):
            return Leaf(how.index)
        v = abs(how.pivot)
        if v in proof.line(how.parent1).clause.literal_set:
            positive, negative = how.parent1, how.parent2
        else:
            positive, negative = how.parent2, how.parent1
        if v in path:
            return build(negative if path[v] else positive, path)
        return VarQuery(
            v, build(positive, {**path, v: 0}), build(negative, {**path, v: 1})
        )

    return build(len(proof), {})


def _falsified(clause, alpha):
    return not clause.evaluate(alpha)


def refutation_guided_search(proof, alpha):
    """ Walks from the empty clause to a falsified input clause, trying parent1 first. """
    j = len(proof)
    while True:
        clause, how = proof.line(j)
        if isinstance(how, Axiom):
            return how.index
        if _falsified(proof.line(how.parent1).clause, alpha):
            j = how.parent1
        else:
            assert _falsified(proof.line(how.parent2).clause, alpha), (
                'unsound step: neither parent is falsified', j,
            )
            j = how.parent2


def separator_guided_search(proof, alpha):
    """ Falsified input clause found with O(log S) clause evaluations.

        Keeps a falsified root and a set of pruned (satisfied) lines. Each round
        evaluates a line whose live subtree holds at most 2/3 of the live lines,
        then either moves the root to it or prunes it.

        Returns (clause index, number of evaluations).
    """
    if not is_tree_like(proof):
        raise NotTreeLikeError('separator_guided_search needs a tree-like proof')
    root = len(proof)
    pruned = set()
    evaluations = 0

    def parents(j):
        how = proof.line(j).justification
        if isinstance(how, Axiom):
            return []
        return [p for p in (how.parent1, how.parent2) if p not in pruned]

    def live_sizes(j, sizes):
        sizes[j] = 1 + sum(live_sizes(p, sizes) for p in parents(j))
        return sizes[j]

    while True:
        how = proof.line(root).justification
        if isinstance(how, Axiom):
            return how.index, evaluations
        sizes = {}
        total = live_sizes(root, sizes)
        candidates = parents(root)
        assert candidates, ('unsound proof: every parent of a falsified line is satisfied', root)
        node = max(candidates, key=lambda p: sizes[p])
        while 3 * sizes[node] > 2 * total and parents(node):
            node = max(parents(node), key=lambda p: sizes[p])
        evaluations += 1
        if _falsified(proof.line(node).clause, alpha):
            root = node
        else:
            pruned.add(node)


def lift_refutation_parity(formula, tree, params, lifted=None):
    """ Resolution refutation of the parity lift, through the lifted search tree. """
    if lifted is None:
        lifted = lift_parity(formula, params)
    lifted_tree = lifted_search_tree_parity(tree, lifted, params)
    proof = dt_to_resolution(lifted_tree, lifted.formula)
    check = check_resolution(lifted.formula, proof)
    if not check:
        raise TreeVerificationError(f'lifted refutation failed its check: {check!r}')
    bound = (params.k * params.a + 1) * tree.height
    if proof_rank(proof) > bound:
        raise RankBoundError(
            f'lifted rank {proof_rank(proof)} exceeds (ka+1)*height = {bound}'
        )
    logging.info(
        'Lifted refutation: %d lines, rank %d (bound %d).', len(proof), proof_rank(proof), bound
    )
    return proof


def write_resolution(proof):
    rows = []
    for clause, how in proof.lines:
        literals = ' '.join(str(lit) for lit in clause)
        if isinstance(how, Axiom):
            head = f'A {how.index}'
        else:
            head = f'R {how.parent1} {how.parent2} {abs(how.pivot)}'
        rows.append(f'{head} {literals} 0' if literals else f'{head} 0')
    return ('\n'.join(rows) + '\n').encode('ascii')


def parse_resolution(text):
    if isinstance(text, bytes):
        text = text.decode('ascii')
    proof = ResolutionProof()
    for number, raw in enumerate(text.splitlines(), start=1):
        fields = raw.split()
        if not fields or fields[0] == 'c':
            continue
        try:
            values = [int(f) for f in fields[1:]]
        except ValueError:
            raise ResolutionFormatError(f'non-integer field in {raw!r}', number)
        if not values or values[-1] != 0:
            raise ResolutionFormatError('line must end with 0', number)
        if fields[0] == 'A' and len(values) >= 2:
            how, literals = Axiom(values[0]), values[1:-1]
        elif fields[0] == 'R' and len(values) >= 4:
            how, literals = Resolvent(values[0], values[1], values[2]), values[3:-1]
        else:
            raise ResolutionFormatError(f'unknown or short proof line {raw!r}', number)
        literals = list(dict.fromkeys(literals))
        if 0 in literals:
            raise ResolutionFormatError('literal 0 inside a clause', number)
        try:
            proof.append(Clause(literals), how)
        except ValueError as error:
            raise ResolutionFormatError(str(error), number)
    return proof

