import math
import re
from itertools import combinations

import numpy as np
import absl.logging as logging
from ml_collections import ConfigDict

from liftproof.utils import (
    ENUMERATION_CAP, make_rng, iter_assignment_blocks
)


PROBLEM_LINE = re.compile(r'^p\s+cnf\s+(\d+)\s+(\d+)\s*$')


class DimacsError(ValueError):

    def __init__(self, message, line_number):
        super().__init__(f'line {line_number}: {message}')
        self.line_number = line_number


def lit_var(lit):
    return abs(lit)


def lit_sign(lit):
    """ Polarity bit: 1 for a positive literal, 0 for a negated one. """
    return 1 if lit > 0 else 0


def make_literal(var, sign):
    assert var >= 1, ('variable indices start at 1', var)
    return var if sign else -var


class Clause(object):
    """ Ordered disjunction of literals in signed-integer (DIMACS) form.

        A literal is `v` for x_v and `-v` for its negation. No variable may
        occur twice, with either polarity.
    """

    def __init__(self, literals=()):
        literals = tuple(int(lit) for lit in literals)
        seen = set()
        for lit in literals:
            if lit == 0:
                raise ValueError('Literal 0 is not a valid literal.')
            if abs(lit) in seen:
                raise ValueError(f'Variable {abs(lit)} appears twice in clause {literals}.')
            seen.add(abs(lit))
        self._literals = literals

    @property
    def literals(self):
        return self._literals

    @property
    def width(self):
        return len(self._literals)

    @property
    def variables(self):
        return tuple(abs(lit) for lit in self._literals)

    @property
    def literal_set(self):
        return frozenset(self._literals)

    def is_empty(self):
        return len(self._literals) == 0

    def same_literals(self, other):
        return self.literal_set == other.literal_set

    def evaluate(self, alpha):
        return int(any(alpha[abs(lit) - 1] == lit_sign(lit) for lit in self._literals))

    def falsified_by_partial(self, path):
        """ True iff every literal is falsified by the partial assignment `path`. """
        return all(
            abs(lit) in path and path[abs(lit)] != lit_sign(lit) for lit in self._literals
        )

    def falsified_rows(self, matrix):
        rows = np.ones(matrix.shape[0], dtype=bool)
        for lit in self._literals:
            rows &= matrix[:, abs(lit) - 1] != lit_sign(lit)
        return rows

    def __iter__(self):
        return iter(self._literals)

    def __len__(self):
        return len(self._literals)

    def __eq__(self, other):
        return isinstance(other, Clause) and self._literals == other._literals

    def __hash__(self):
        return hash(self._literals)

    def __repr__(self):
        return f'Clause{self._literals}'


def eval_clause(clause, alpha):
    return clause.evaluate(alpha)


class CnfFormula(object):
    """ Indexed clause list over variables 1..num_vars; clause indices are 1-based. """

    def __init__(self, num_vars, clauses):
        self._num_vars = int(num_vars)
        self._clauses = tuple(c if isinstance(c, Clause) else Clause(c) for c in clauses)
        for index, clause in enumerate(self._clauses, start=1):
            for var in clause.variables:
                if var > self._num_vars:
                    raise ValueError(
                        f'Clause {index} uses variable {var} beyond num_vars={self._num_vars}.'
                    )

    @property
    def num_vars(self):
        return self._num_vars

    @property
    def clauses(self):
        return self._clauses

    @property
    def num_clauses(self):
        return len(self._clauses)

    @property
    def max_width(self):
        return max((c.width for c in self._clauses), default=0)

    def clause(self, index):
        assert 1 <= index <= len(self._clauses), ('clause index out of range', index)
        return self._clauses[index - 1]

    def evaluate(self, alpha):
        return all(c.evaluate(alpha) for c in self._clauses)

    def falsified(self, alpha):
        return [j for j, c in enumerate(self._clauses, start=1) if not c.evaluate(alpha)]

    def count_satisfied(self, alpha):
        return sum(c.evaluate(alpha) for c in self._clauses)

    def falsified_matrix(self, matrix):
        """ Boolean (rows, num_clauses) array: entry [r, j-1] iff row r falsifies clause j. """
        out = np.zeros((matrix.shape[0], len(self._clauses)), dtype=bool)
        for j, clause in enumerate(self._clauses):
            out[:, j] = clause.falsified_rows(matrix)
        return out

    def satisfied_counts(self, matrix):
        counts = np.zeros(matrix.shape[0], dtype=np.int64)
        for clause in self._clauses:
            counts += ~clause.falsified_rows(matrix)
        return counts

    def find_satisfying(self, cap=ENUMERATION_CAP):
        for offset, block in iter_assignment_blocks(self._num_vars, cap):
            ok = np.ones(block.shape[0], dtype=bool)
            for clause in self._clauses:
                ok &= ~clause.falsified_rows(block)
                if not ok.any():
                    break
            hits = np.flatnonzero(ok)
            if hits.size:
                return tuple(int(b) for b in block[hits[0]])
        return None

    def is_satisfiable(self, cap=ENUMERATION_CAP):
        return self.find_satisfying(cap) is not None

    def __len__(self):
        return len(self._clauses)

    def __eq__(self, other):
        return (
            isinstance(other, CnfFormula)
            and self._num_vars == other._num_vars
            and self._clauses == other._clauses
        )

    def __hash__(self):
        return hash((self._num_vars, self._clauses))

    def __repr__(self):
        return f'CnfFormula(num_vars={self._num_vars}, clauses={len(self._clauses)})'


def parse_dimacs(text):
    if isinstance(text, bytes):
        text = text.decode('ascii')
    num_vars = num_clauses = None
    clauses = []
    current = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('c'):
            continue
        if line.startswith('%'):
            break
        if line.startswith('p'):
            match = PROBLEM_LINE.match(line)
            if match is None or num_vars is not None:
                raise DimacsError(f'malformed problem line {line!r}', line_number)
            num_vars, num_clauses = int(match.group(1)), int(match.group(2))
            continue
        if num_vars is None:
            raise DimacsError('clause data before the problem line', line_number)
        for token in line.split():
            try:
                lit = int(token)
            except ValueError:
                raise DimacsError(f'invalid literal {token!r}', line_number) from None
            if lit == 0:
                try:
                    clauses.append(Clause(current))
                except ValueError as e:
                    raise DimacsError(str(e), line_number) from None
                current = []
            elif abs(lit) > num_vars:
                raise DimacsError(f'literal {lit} out of range 1..{num_vars}', line_number)
            else:
                current.append(lit)
    if num_vars is None:
        raise DimacsError('missing problem line', 0)
    if current:
        raise DimacsError('last clause is not terminated by 0', len(text.splitlines()))
    if len(clauses) != num_clauses:
        raise DimacsError(
            f'problem line declares {num_clauses} clauses, found {len(clauses)}',
            len(text.splitlines()),
        )
    return CnfFormula(num_vars, clauses)


def write_dimacs(formula):
    lines = [f'p cnf {formula.num_vars} {formula.num_clauses}']
    for clause in formula.clauses:
        lines.append(' '.join([str(lit) for lit in clause] + ['0']))
    return ('\n'.join(lines) + '\n').encode('ascii')


class BipartiteGraph(object):
    """ Pigeons U = 1..u_count, holes V = 1..v_count.

        Edges are kept sorted by (u, v); edge number j (1-based) in that order
        is the G-PHP variable e_(u,v).
    """

    def __init__(self, u_count, v_count, edges):
        self._u_count = int(u_count)
        self._v_count = int(v_count)
        edges = [(int(u), int(v)) for u, v in edges]
        if len(set(edges)) != len(edges):
            raise ValueError('Duplicate edge in bipartite graph.')
        for u, v in edges:
            if not (1 <= u <= self._u_count and 1 <= v <= self._v_count):
                raise ValueError(f'Edge {(u, v)} out of range.')
        self._edges = tuple(sorted(edges))
        self._edge_var = {edge: j for j, edge in enumerate(self._edges, start=1)}

    @property
    def u_count(self):
        return self._u_count

    @property
    def v_count(self):
        return self._v_count

    @property
    def edges(self):
        return self._edges

    @property
    def num_edges(self):
        return len(self._edges)

    def edge_var(self, u, v):
        return self._edge_var[(u, v)]

    def holes_of(self, u):
        return [v for (w, v) in self._edges if w == u]

    def pigeons_of(self, v):
        return [u for (u, w) in self._edges if w == v]

    def hole_degree(self, v):
        return len(self.pigeons_of(v))

    def __eq__(self, other):
        return (
            isinstance(other, BipartiteGraph)
            and (self._u_count, self._v_count, self._edges)
            == (other._u_count, other._v_count, other._edges)
        )

    def __repr__(self):
        return f'BipartiteGraph(|U|={self._u_count}, |V|={self._v_count}, |E|={len(self._edges)})'


def load_edge_list(text):
    if isinstance(text, bytes):
        text = text.decode('ascii')
    rows = [line.split() for line in text.splitlines() if line.strip()]
    if not rows or len(rows[0]) != 2:
        raise ValueError('Edge list must start with "u_count v_count".')
    u_count, v_count = int(rows[0][0]), int(rows[0][1])
    edges = []
    for row in rows[1:]:
        if len(row) != 2:
            raise ValueError(f'Malformed edge line: {" ".join(row)!r}')
        edges.append((int(row[0]), int(row[1])))
    return BipartiteGraph(u_count, v_count, edges)


def write_edge_list(graph):
    lines = [f'{graph.u_count} {graph.v_count}']
    lines.extend(f'{u} {v}' for u, v in graph.edges)
    return ('\n'.join(lines) + '\n').encode('ascii')


def complete_bipartite(n):
    assert n >= 2, ('need at least two pigeons', n)
    return BipartiteGraph(n, n - 1, [(u, v) for u in range(1, n + 1) for v in range(1, n)])


def gen_bipartite(n, d, seed):
    if n < 2 or d < 1:
        raise ValueError(f'gen_bipartite needs n >= 2 and d >= 1, got n={n}, d={d}.')
    rng = make_rng(seed)
    degree = min(d, n - 1)
    edges = []
    for u in range(1, n + 1):
        holes = rng.choice(n - 1, size=degree, replace=False) + 1
        edges.extend((u, int(v)) for v in holes)
    return BipartiteGraph(n, n - 1, edges)


class GraphFactory(object):
    """ Builds the pigeon/hole graph behind a G-PHP instance. """

    @staticmethod
    def get_default_config(updates=None):
        config = ConfigDict()
        config.type = 'random'
        config.pigeons = 3
        config.degree = 5
        config.seed = 0
        config.path = ''
        if updates is not None:
            config.update(ConfigDict(updates).copy_and_resolve_references())
        return config

    @classmethod
    def build(cls, config):
        config = cls.get_default_config(config)
        if config.type == 'random':
            return gen_bipartite(config.pigeons, config.degree, config.seed)
        elif config.type == 'complete':
            return complete_bipartite(config.pigeons)
        elif config.type == 'file':
            assert config.path != '', 'path must be specified for file graphs'
            with open(config.path, 'rb') as fin:
                return load_edge_list(fin.read())
        else:
            raise ValueError(f'Unknown graph type: {config.type}')

    def __init__(self):
        raise ValueError('GraphFactory is a static class and should not be instantiated.')


def gen_php(graph):
    if graph.u_count != graph.v_count + 1:
        raise ValueError(
            f'G-PHP needs |U| = |V| + 1, got |U|={graph.u_count}, |V|={graph.v_count}.'
        )
    clauses = []
    for u in range(1, graph.u_count + 1):
        holes = graph.holes_of(u)
        if not holes:
            logging.warning('Pigeon %d has no holes; emitting an empty pigeon clause.', u)
        clauses.append(Clause([graph.edge_var(u, v) for v in holes]))
    for v in range(1, graph.v_count + 1):
        for u, w in combinations(graph.pigeons_of(v), 2):
            clauses.append(Clause([-graph.edge_var(u, v), -graph.edge_var(w, v)]))
    return CnfFormula(graph.num_edges, clauses)


def universe_size(t, n):
    return 2 ** t * math.comb(n, t)


def gen_random_tcnf(t, n, m, seed):
    """ m clauses drawn uniformly, with replacement, from all width-t clauses on n variables. """
    if t > n:
        raise ValueError(f'Clause width t={t} exceeds the variable count n={n}.')
    rng = make_rng(seed)
    clauses = []
    for _ in range(m):
        variables = np.sort(rng.choice(n, size=t, replace=False)) + 1
        signs = rng.integers(0, 2, size=t)
        clauses.append(Clause([make_literal(int(v), int(s)) for v, s in zip(variables, signs)]))
    return CnfFormula(n, clauses)


def php_2_1():
    """ Two pigeons, one hole: (e1), (e2), (-e1 v -e2). """
    return gen_php(complete_bipartite(2))
