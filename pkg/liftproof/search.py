import numpy as np
import absl.logging as logging
from ml_collections import ConfigDict

from liftproof.cnf import CnfFormula
from liftproof.lifting import TypeI, TypeII
from liftproof.utils import (
    CheckResult, ENUMERATION_CAP, enumerate_assignments, iter_assignment_blocks
)


class NoFalsifiedClauseError(ValueError):
    pass


class DepthCapExceeded(ValueError):
    pass


class TreeVerificationError(ValueError):
    pass


class InconsistentOracleError(TreeVerificationError):
    pass


class Leaf(object):

    def __init__(self, label):
        self.label = label
        self.height = 0

    def __repr__(self):
        return f'Leaf({self.label!r})'


class VarQuery(object):

    def __init__(self, var, child0, child1):
        self.var = var
        self.child0 = child0
        self.child1 = child1
        self.height = 1 + max(child0.height, child1.height)

    def __repr__(self):
        return f'VarQuery(x{self.var})'


class BlockIntervalQuery(object):
    """ Answers yes iff some y_{block,coord,a} = 1 for a in [lo, hi].

        `variables` lists the concrete y variables so that evaluation does not
        need the lifted layout.
    """

    def __init__(self, block, coord, lo, hi, variables, yes, no):
        self.block = block
        self.coord = coord
        self.lo = lo
        self.hi = hi
        self.variables = tuple(variables)
        self.yes = yes
        self.no = no
        self.height = 1 + max(yes.height, no.height)

    def __repr__(self):
        return f'BlockIntervalQuery(i={self.block}, p={self.coord}, [{self.lo}, {self.hi}])'


def dt_eval(tree, alpha):
    node = tree
    while not isinstance(node, Leaf):
        if isinstance(node, VarQuery):
            node = node.child1 if alpha[node.var - 1] else node.child0
        else:
            hit = any(alpha[v - 1] for v in node.variables)
            node = node.yes if hit else node.no
    return node.label


def tree_labels(tree, matrix):
    """ Leaf labels reached by every row of an assignment matrix. """
    out = np.empty(matrix.shape[0], dtype=object)

    def walk(node, rows):
        if rows.size == 0:
            return
        if isinstance(node, Leaf):
            out[rows] = node.label
        elif isinstance(node, VarQuery):
            column = matrix[rows, node.var - 1]
            walk(node.child0, rows[column == 0])
            walk(node.child1, rows[column == 1])
        else:
            columns = [v - 1 for v in node.variables]
            hit = matrix[np.ix_(rows, columns)].any(axis=1)
            walk(node.yes, rows[hit])
            walk(node.no, rows[~hit])

    walk(tree, np.arange(matrix.shape[0]))
    return out


def tree_nodes(tree):
    """ Distinct nodes reachable from the root, root first. Shared subtrees appear once. """
    order, seen, stack = [], set(), [tree]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        order.append(node)
        if isinstance(node, VarQuery):
            stack.extend([node.child1, node.child0])
        elif isinstance(node, BlockIntervalQuery):
            stack.extend([node.no, node.yes])
    return order


def graft(tree, on_one, on_zero):
    """ Replaces the 1-leaves of a boolean tree by `on_one` and the 0-leaves by `on_zero`. """
    memo = {}

    def rebuild(node):
        if id(node) in memo:
            return memo[id(node)]
        if isinstance(node, Leaf):
            result = on_one if int(node.label) else on_zero
        elif isinstance(node, VarQuery):
            result = VarQuery(node.var, rebuild(node.child0), rebuild(node.child1))
        else:
            result = BlockIntervalQuery(
                node.block, node.coord, node.lo, node.hi, node.variables,
                rebuild(node.yes), rebuild(node.no),
            )
        memo[id(node)] = result
        return result

    return rebuild(tree)


def write_tree(tree):
    nodes = tree_nodes(tree)
    index = {id(node): k for k, node in enumerate(nodes)}
    lines = []
    for node in nodes:
        if isinstance(node, Leaf):
            lines.append(f'L {node.label}')
        elif isinstance(node, VarQuery):
            lines.append(f'V {node.var} {index[id(node.child0)]} {index[id(node.child1)]}')
        else:
            lines.append(
                f'B {node.block} {node.coord} {node.lo} {node.hi} '
                f'{index[id(node.yes)]} {index[id(node.no)]}'
            )
    return ('\n'.join(lines) + '\n').encode('ascii')


def parse_tree(text, lifted=None):
    if isinstance(text, bytes):
        text = text.decode('ascii')
    rows = [line.split() for line in text.splitlines() if line.strip()]
    built = [None] * len(rows)

    def build(k):
        if built[k] is not None:
            return built[k]
        fields = rows[k]
        if fields[0] == 'L':
            node = Leaf(int(fields[1]))
        elif fields[0] == 'V':
            node = VarQuery(int(fields[1]), build(int(fields[2])), build(int(fields[3])))
        elif fields[0] == 'B':
            assert lifted is not None, 'interval nodes need the lifted formula to resolve y variables'
            i, p, lo, hi = (int(f) for f in fields[1:5])
            variables = [lifted.y_var(i, p, a) for a in range(lo, hi + 1)]
            node = BlockIntervalQuery(
                i, p, lo, hi, variables, build(int(fields[5])), build(int(fields[6]))
            )
        else:
            raise ValueError(f'Unknown tree line: {" ".join(fields)!r}')
        built[k] = node
        return node

    # Built from the end; children mostly follow their parents, which keeps recursion shallow.
    for k in reversed(range(len(rows))):
        build(k)
    return built[0]


def first_falsified(formula, alpha):
    for j, clause in enumerate(formula.clauses, start=1):
        if not clause.evaluate(alpha):
            return j
    raise NoFalsifiedClauseError('no falsified clause: the assignment satisfies the formula')


class SearchProblem(object):
    """ F_search: given an assignment, name a falsified clause. """

    def __init__(self, formula, assume_unsatisfiable=False):
        self.formula = formula
        if not assume_unsatisfiable and formula.num_vars <= ENUMERATION_CAP:
            witness = formula.find_satisfying()
            if witness is not None:
                raise ValueError(f'Formula is satisfiable (witness {witness}); no search problem.')


class ConsistentSystem(object):
    """ The system {f_S} induced by the first-falsified rule f*. """

    def __init__(self, formula):
        self.formula = formula
        self._table = None

    def f_star(self, alpha):
        return first_falsified(self.formula, alpha)

    def f_S(self, subset, alpha):
        return int(self.f_star(alpha) in set(subset))

    def f_star_table(self):
        if self._table is None:
            matrix = enumerate_assignments(self.formula.num_vars)
            falsified = self.formula.falsified_matrix(matrix)
            if not falsified.any(axis=1).all():
                raise NoFalsifiedClauseError('formula is satisfiable; f* is undefined somewhere')
            self._table = falsified.argmax(axis=1) + 1
        return self._table

    def truth_table(self, subset):
        return np.isin(self.f_star_table(), list(subset)).astype(np.int64)


class DepthOracle(object):
    """ Exact decision-tree depth by memoised minimax over restrictions. """

    @staticmethod
    def get_default_config(updates=None):
        config = ConfigDict()
        config.max_function_vars = 16
        config.max_search_vars = 14
        if updates is not None:
            config.update(ConfigDict(updates).copy_and_resolve_references())
        return config

    def __init__(self, config=None):
        self.config = self.get_default_config(config)

    def _normalize(self, problem):
        if isinstance(problem, SearchProblem):
            problem = problem.formula
        if isinstance(problem, CnfFormula):
            n = problem.num_vars
            if n > self.config.max_search_vars:
                raise DepthCapExceeded(
                    f'search problem has {n} variables, cap is {self.config.max_search_vars}'
                )
            falsified = problem.falsified_matrix(enumerate_assignments(n))
            masks = [
                sum(1 << j for j in np.flatnonzero(row)) for row in falsified
            ]
            if not all(masks):
                raise ValueError('Formula is satisfiable; F_search is not total.')
            labels = list(range(1, problem.num_clauses + 1))
            return n, masks, labels
        table = list(np.asarray(problem).tolist())
        n = max(len(table) - 1, 0).bit_length()
        if 1 << n != len(table):
            raise ValueError(f'Truth table length {len(table)} is not a power of two.')
        if n > self.config.max_function_vars:
            raise DepthCapExceeded(
                f'function has {n} variables, cap is {self.config.max_function_vars}'
            )
        labels = sorted(set(table))
        position = {label: k for k, label in enumerate(labels)}
        return n, [1 << position[value] for value in table], labels

    def _solve(self, problem, restriction):
        n, masks, labels = self._normalize(problem)
        full = (1 << n) - 1
        admissible_memo, depth_memo = {}, {}

        def admissible(fixed, values):
            if fixed == full:
                return masks[values]
            key = (fixed, values)
            if key not in admissible_memo:
                free = (~fixed) & full
                bit = free & -free
                admissible_memo[key] = (
                    admissible(fixed | bit, values) & admissible(fixed | bit, values | bit)
                )
            return admissible_memo[key]

        def depth(fixed, values):
            key = (fixed, values)
            if key in depth_memo:
                return depth_memo[key][0]
            if admissible(fixed, values):
                depth_memo[key] = (0, None)
                return 0
            best, best_var = None, None
            for v in range(n):
                bit = 1 << v
                if fixed & bit:
                    continue
                cost = 1 + max(depth(fixed | bit, values), depth(fixed | bit, values | bit))
                if best is None or cost < best:
                    best, best_var = cost, v
                    if best == 1:
                        break
            depth_memo[key] = (best, best_var)
            return best

        fixed = values = 0
        for var, value in (restriction or {}).items():
            fixed |= 1 << (var - 1)
            if value:
                values |= 1 << (var - 1)
        result = depth(fixed, values)

        def build(fixed, values):
            mask = admissible(fixed, values)
            if mask:
                return Leaf(labels[(mask & -mask).bit_length() - 1])
            _, v = depth_memo[(fixed, values)]
            bit = 1 << v
            return VarQuery(v + 1, build(fixed | bit, values), build(fixed | bit, values | bit))

        return result, build(fixed, values)

    def depth(self, problem, restriction=None):
        return self._solve(problem, restriction)[0]

    def optimal_tree(self, problem, restriction=None):
        return self._solve(problem, restriction)[1]


def exact_decision_depth(problem, config=None):
    return DepthOracle(config).depth(problem)


def halving_split(lo, hi):
    """ Left-biased split of [lo, hi]: the left half gets the ceiling. """
    return lo + (hi - lo + 2) // 2 - 1


def halving_subsets(num_clauses):
    subsets = []

    def visit(lo, hi):
        if lo == hi:
            return
        mid = halving_split(lo, hi)
        subsets.append((lo, mid))
        visit(lo, mid)
        visit(mid + 1, hi)

    visit(1, num_clauses)
    return subsets


def binary_search_tree(formula, oracle_trees=None, depth_oracle=None):
    """ F_search tree by binary search over clause intervals, querying f_S trees.

        oracle_trees maps (lo, mid) to a tree computing f_S for S = [lo, mid];
        missing entries are filled with optimal trees from the depth oracle.
    """
    system = ConsistentSystem(formula)
    oracle_trees = dict(oracle_trees or {})
    depth_oracle = depth_oracle or DepthOracle()

    def build(lo, hi):
        if lo == hi:
            return Leaf(lo)
        mid = halving_split(lo, hi)
        if (lo, mid) not in oracle_trees:
            oracle_trees[(lo, mid)] = depth_oracle.optimal_tree(
                system.truth_table(range(lo, mid + 1))
            )
        return graft(oracle_trees[(lo, mid)], build(lo, mid), build(mid + 1, hi))

    tree = build(1, formula.num_clauses)
    check = verify_search_tree(tree, formula)
    if not check:
        raise InconsistentOracleError(
            f'composed tree answers clause {check.line} on {check.counterexample}, '
            'which is not falsified'
        )
    return tree


def verify_search_tree(tree, formula, domain=None, cap=ENUMERATION_CAP):
    """ Checks that every in-domain assignment reaches a leaf naming a falsified clause.

        `domain` is an optional callable mapping an assignment matrix to a row mask.
    """
    for offset, block in iter_assignment_blocks(formula.num_vars, cap):
        rows = np.arange(block.shape[0])
        if domain is not None:
            rows = rows[domain(block)]
        if rows.size == 0:
            continue
        labels = tree_labels(tree, block[rows])
        for label in set(labels.tolist()):
            chosen = rows[labels == label]
            if not isinstance(label, (int, np.integer)) or not 1 <= label <= formula.num_clauses:
                return CheckResult.failure(
                    label, 'leaf label is not a clause index',
                    tuple(int(b) for b in block[chosen[0]]),
                )
            bad = chosen[~formula.clause(label).falsified_rows(block[chosen])]
            if bad.size:
                return CheckResult.failure(
                    label, 'leaf clause is satisfied',
                    tuple(int(b) for b in block[bad[0]]),
                )
    return CheckResult.success()


def _leaf_clause_context(lifted, label, context):
    clause = lifted.base.clause(label)
    missing = [abs(lit) for lit in clause if abs(lit) not in context]
    if missing:
        raise TreeVerificationError(
            f'leaf for clause {label} is reached without querying variables {missing}'
        )
    return clause


def lifted_search_tree_parity(tree, lifted, params=None):
    """ G_search tree for a parity (or gap-mode) lift from an F_search tree.

        Each base query of e_i reads all of Y_i and then the selected x_{i,c}.
    """
    assert lifted.mode in ('parity', 'gap'), ('pattern-selected lift required', lifted.mode)
    assert params is None or params == lifted.params, ('params disagree with the lift', params)
    params = lifted.params

    def lift_node(node, context):
        if isinstance(node, Leaf):
            clause = _leaf_clause_context(lifted, node.label, context)
            cells = tuple(context[abs(lit)][0] for lit in clause)
            patterns = tuple(context[abs(lit)][1] for lit in clause)
            return Leaf(lifted.star_index(node.label, cells, patterns))
        assert isinstance(node, VarQuery), 'base trees may only query variables'
        i = node.var
        if i in context:
            return lift_node(node.child1 if context[i][2] else node.child0, context)
        return read_selector(i, lifted.y_vars(i), (), node, context)

    def read_selector(i, yvars, bits, node, context):
        if len(bits) == len(yvars):
            cell = params.cell_of_bits(bits)
            zero, one = dict(context), dict(context)
            zero[i], one[i] = (cell, bits, 0), (cell, bits, 1)
            return VarQuery(
                lifted.x_var(i, cell), lift_node(node.child0, zero), lift_node(node.child1, one)
            )
        return VarQuery(
            yvars[len(bits)],
            read_selector(i, yvars, bits + (0,), node, context),
            read_selector(i, yvars, bits + (1,), node, context),
        )

    return lift_node(tree, {})


def lifted_search_tree_tensor(tree, lifted, params=None, total=False):
    """ G_search tree for a tensor lift, locating each selector by binary search.

        Correct on selector-valid assignments. With total=True a scan of every
        Y_{i,p} block is prepended, answering the violated (I)/(II) clause.
    """
    assert lifted.mode == 'tensor', ('tensor lift required', lifted.mode)
    assert params is None or params == lifted.params, ('params disagree with the lift', params)
    params = lifted.params

    def lift_node(node, context):
        if isinstance(node, Leaf):
            clause = _leaf_clause_context(lifted, node.label, context)
            cells = tuple(context[abs(lit)][0] for lit in clause)
            return Leaf(lifted.type3_index(node.label, cells))
        assert isinstance(node, VarQuery), 'base trees may only query variables'
        i = node.var
        if i in context:
            return lift_node(node.child1 if context[i][1] else node.child0, context)
        return locate(i, 1, 1, params.ell, (), node, context)

    def locate(i, p, lo, hi, coords, node, context):
        if lo == hi:
            coords = coords + (lo,)
            if p < params.k:
                return locate(i, p + 1, 1, params.ell, coords, node, context)
            zero, one = dict(context), dict(context)
            zero[i], one[i] = (coords, 0), (coords, 1)
            return VarQuery(
                lifted.x_var(i, coords), lift_node(node.child0, zero), lift_node(node.child1, one)
            )
        mid = halving_split(lo, hi)
        variables = [lifted.y_var(i, p, a) for a in range(lo, mid + 1)]
        return BlockIntervalQuery(
            i, p, lo, mid, variables,
            locate(i, p, lo, mid, coords, node, context),
            locate(i, p, mid + 1, hi, coords, node, context),
        )

    lifted_tree = lift_node(tree, {})
    if not total:
        return lifted_tree

    def scan_block(i, p, cont):
        def step(a, first):
            if a > params.ell:
                return cont if first else Leaf(lifted.index_of(TypeI(i, p)))
            if first:
                on_one = Leaf(lifted.index_of(TypeII(i, p, first, a)))
            else:
                on_one = step(a + 1, a)
            return VarQuery(lifted.y_var(i, p, a), step(a + 1, first), on_one)
        return step(1, None)

    for i in reversed(range(1, lifted.base_vars + 1)):
        for p in reversed(range(1, params.k + 1)):
            lifted_tree = scan_block(i, p, lifted_tree)
    logging.info('Prepended selector scan; tree height is now %d.', lifted_tree.height)
    return lifted_tree
