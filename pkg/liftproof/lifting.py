from collections import namedtuple
from itertools import combinations, product

import numpy as np
from ml_collections import ConfigDict

from liftproof.cnf import Clause, CnfFormula, lit_sign, make_literal


TypeI = namedtuple('TypeI', ['i', 'p'])
TypeII = namedtuple('TypeII', ['i', 'p', 'a', 'a2'])
TypeIII = namedtuple('TypeIII', ['source', 'cells'])
Star = namedtuple('Star', ['source', 'cells', 'patterns'])


class InvalidSelectorError(ValueError):
    pass


def psi_tensor(x, y):
    """ Tensor selector: the bit of x at cell y, row-major over [ell]^k. """
    k = len(y)
    ell = int(round(len(x) ** (1.0 / k)))
    if ell ** k != len(x):
        raise ValueError(f'x has {len(x)} entries, which is not ell^{k}.')
    if any(not 1 <= c <= ell for c in y):
        raise ValueError(f'cell {tuple(y)} out of range for ell={ell}.')
    return int(x[np.ravel_multi_index(tuple(c - 1 for c in y), (ell,) * k)])


def psi_parity(x, y):
    """ Parity selector: the bit of x indexed by the XOR of the k a-bit vectors in y. """
    ys = np.asarray(y, dtype=np.int64)
    if ys.ndim != 2 or (1 << ys.shape[1]) != len(x):
        raise ValueError(f'y must hold a-bit vectors with 2^a = {len(x)}.')
    return int(x[bits_to_index(np.bitwise_xor.reduce(ys, axis=0))])


def bits_to_index(bits):
    index = 0
    for bit in bits:
        index = (index << 1) | int(bit)
    return index


class TensorParams(object):
    mode = 'tensor'

    def __init__(self, k, ell):
        assert k >= 1 and ell >= 2, ('tensor lift needs k >= 1 and ell >= 2', k, ell)
        self.k = k
        self.ell = ell

    @property
    def x_size(self):
        return self.ell ** self.k

    @property
    def y_size(self):
        return self.k * self.ell

    @property
    def block_size(self):
        return self.x_size + self.y_size

    def cells(self):
        return list(product(range(1, self.ell + 1), repeat=self.k))

    def cell_rank(self, cell):
        return int(np.ravel_multi_index(tuple(c - 1 for c in cell), (self.ell,) * self.k))

    def y_var(self, i, p, a):
        return (i - 1) * self.block_size + self.x_size + (p - 1) * self.ell + a

    def selector_bits(self, cell):
        """ One-hot Y_i bits (in y_vars order) that select `cell`. """
        if len(cell) != self.k or any(not 1 <= c <= self.ell for c in cell):
            raise InvalidSelectorError(f'cell {tuple(cell)} out of range')
        return tuple(
            int(cell[p] == a) for p in range(self.k) for a in range(1, self.ell + 1)
        )

    def cell_of_bits(self, bits):
        cell = []
        for p in range(self.k):
            ones = [a + 1 for a in range(self.ell) if bits[p * self.ell + a]]
            if len(ones) != 1:
                return None
            cell.append(ones[0])
        return tuple(cell)

    def __eq__(self, other):
        return isinstance(other, TensorParams) and (self.k, self.ell) == (other.k, other.ell)

    def __repr__(self):
        return f'TensorParams(k={self.k}, ell={self.ell})'


class ParityParams(object):
    mode = 'parity'

    def __init__(self, k, a):
        assert k >= 1 and a >= 1, ('parity lift needs k >= 1 and a >= 1', k, a)
        self.k = k
        self.a = a

    @property
    def x_size(self):
        return 2 ** self.a

    @property
    def y_size(self):
        return self.k * self.a

    @property
    def block_size(self):
        return self.x_size + self.y_size

    def cells(self):
        return list(product((0, 1), repeat=self.a))

    def cell_rank(self, cell):
        return bits_to_index(cell)

    def y_var(self, i, p, b):
        return (i - 1) * self.block_size + self.x_size + (p - 1) * self.a + b

    def cell_of_bits(self, bits):
        chunks = np.asarray(bits, dtype=np.int64).reshape(self.k, self.a)
        return tuple(int(b) for b in np.bitwise_xor.reduce(chunks, axis=0))

    def __eq__(self, other):
        return isinstance(other, ParityParams) and (self.k, self.a) == (other.k, other.a)

    def __repr__(self):
        return f'ParityParams(k={self.k}, a={self.a})'


class GapParams(object):
    """ Simplified Lift^T_{1,2}: one selector bit per block, no exactly-one clauses.

        y_i = 0 selects cell (1,), y_i = 1 selects cell (2,).
    """
    mode = 'gap'
    k = 1
    ell = 2

    @property
    def x_size(self):
        return 2

    @property
    def y_size(self):
        return 1

    @property
    def block_size(self):
        return 3

    def cells(self):
        return [(1,), (2,)]

    def cell_rank(self, cell):
        return cell[0] - 1

    def y_var(self, i, p=1, a=1):
        return (i - 1) * 3 + 3

    def cell_of_bits(self, bits):
        return (int(bits[0]) + 1,)

    def __eq__(self, other):
        return isinstance(other, GapParams)

    def __repr__(self):
        return 'GapParams()'


def lifted_var_count(params, m):
    return m * params.block_size


class LiftedFormula(object):
    """ A lifted CNF together with its block layout and per-clause provenance.

        Block i (1-based) occupies variables (i-1)*B+1 .. i*B where
        B = |X_i| + |Y_i|; X_i comes first in cell order, then Y_i.
    """

    def __init__(self, base, params, clauses, provenance):
        self._base = base
        self._params = params
        self._formula = CnfFormula(lifted_var_count(params, base.num_vars), clauses)
        self._provenance = tuple(provenance)
        assert len(self._provenance) == self._formula.num_clauses, (
            'every lifted clause needs exactly one provenance tag',
            len(self._provenance), self._formula.num_clauses,
        )
        self._type3_index = {}
        self._star_index = {}
        self._tag_index = {tag: index for index, tag in enumerate(self._provenance, start=1)}
        for index, tag in enumerate(self._provenance, start=1):
            if isinstance(tag, TypeIII):
                self._type3_index[(tag.source, tag.cells)] = index
            elif isinstance(tag, Star):
                self._star_index[(tag.source, tag.cells, tag.patterns)] = index
        self._patterns = None

    @property
    def formula(self):
        return self._formula

    @property
    def base(self):
        return self._base

    @property
    def base_vars(self):
        return self._base.num_vars

    @property
    def params(self):
        return self._params

    @property
    def mode(self):
        return self._params.mode

    @property
    def provenance(self):
        return self._provenance

    @property
    def num_vars(self):
        return self._formula.num_vars

    def block_map(self):
        """ For each base variable i: (X_i variable range, Y_i variable range). """
        out = []
        size = self._params.block_size
        for i in range(1, self.base_vars + 1):
            start = (i - 1) * size + 1
            out.append((
                range(start, start + self._params.x_size),
                range(start + self._params.x_size, start + size),
            ))
        return out

    def x_var(self, i, cell):
        return (i - 1) * self._params.block_size + self._params.cell_rank(cell) + 1

    def y_var(self, i, p, a):
        return self._params.y_var(i, p, a)

    def y_vars(self, i):
        start = (i - 1) * self._params.block_size + self._params.x_size + 1
        return list(range(start, start + self._params.y_size))

    def cells(self):
        return self._params.cells()

    def selected_cell(self, i, beta):
        return self._params.cell_of_bits([beta[v - 1] for v in self.y_vars(i)])

    def is_selector_valid(self, beta):
        return all(self.selected_cell(i, beta) is not None for i in range(1, self.base_vars + 1))

    def selector_valid_mask(self, matrix):
        mask = np.ones(matrix.shape[0], dtype=bool)
        if self.mode != 'tensor':
            return mask
        for i in range(1, self.base_vars + 1):
            for p in range(1, self._params.k + 1):
                columns = [self.y_var(i, p, a) - 1 for a in range(1, self._params.ell + 1)]
                mask &= matrix[:, columns].sum(axis=1) == 1
        return mask

    def patterns(self, i):
        """ Map cell -> selecting Y_i bit patterns, lexicographic. Parity and gap lifts only. """
        assert self.mode != 'tensor', 'tensor selectors are decoded by intervals, not patterns'
        if self._patterns is None:
            table = {cell: [] for cell in self._params.cells()}
            for bits in product((0, 1), repeat=self._params.y_size):
                table[self._params.cell_of_bits(bits)].append(bits)
            self._patterns = {cell: tuple(bits) for cell, bits in table.items()}
        return self._patterns

    def index_of(self, tag):
        return self._tag_index[tag]

    def type3_index(self, source, cells):
        return self._type3_index[(source, tuple(cells))]

    def star_index(self, source, cells, patterns):
        return self._star_index[(source, tuple(cells), tuple(patterns))]

    def clause_from_tag(self, tag):
        base_clause = self._base.clause(tag.source) if hasattr(tag, 'source') else None
        if isinstance(tag, TypeI):
            return _type1_clause(self, tag.i, tag.p)
        elif isinstance(tag, TypeII):
            return _type2_clause(self, tag.i, tag.p, tag.a, tag.a2)
        elif isinstance(tag, TypeIII):
            return _type3_clause(self, base_clause, tag.cells)
        elif isinstance(tag, Star):
            return _star_clause(self, base_clause, tag.cells, tag.patterns)
        raise ValueError(f'Unknown provenance tag: {tag!r}')

    def lifted_maxsat_offset(self):
        """ Lifted clauses that every assignment satisfies through a selector literal.

            For parity and gap lifts exactly one lifted clause per base clause has
            all of its selector literals falsified, so
            maxsat(G) = offset + maxsat(F).
        """
        assert self.mode != 'tensor', 'offset only holds for pattern-selected lifts'
        counts = {}
        for tag in self._provenance:
            counts[tag.source] = counts.get(tag.source, 0) + 1
        return sum(count - 1 for count in counts.values())


def _type1_clause(lifted, i, p):
    return Clause([lifted.y_var(i, p, a) for a in range(1, lifted.params.ell + 1)])


def _type2_clause(lifted, i, p, a, a2):
    return Clause([-lifted.y_var(i, p, a), -lifted.y_var(i, p, a2)])


def _type3_clause(lifted, base_clause, cells):
    literals = []
    for lit, cell in zip(base_clause, cells):
        i = abs(lit)
        literals.extend(-lifted.y_var(i, p, cell[p - 1]) for p in range(1, lifted.params.k + 1))
    for lit, cell in zip(base_clause, cells):
        literals.append(make_literal(lifted.x_var(abs(lit), cell), lit_sign(lit)))
    return Clause(literals)


def _star_clause(lifted, base_clause, cells, patterns):
    literals = []
    for lit, bits in zip(base_clause, patterns):
        for var, bit in zip(lifted.y_vars(abs(lit)), bits):
            literals.append(-var if bit else var)
    for lit, cell in zip(base_clause, cells):
        literals.append(make_literal(lifted.x_var(abs(lit), cell), lit_sign(lit)))
    return Clause(literals)


def _check_no_empty(formula):
    for j, clause in enumerate(formula.clauses, start=1):
        if clause.is_empty():
            raise ValueError(f'Cannot lift a formula with an empty clause (clause {j}).')


def lift_tensor(formula, params):
    _check_no_empty(formula)
    shell = LiftedFormula(CnfFormula(formula.num_vars, []), params, [], [])
    clauses, tags = [], []
    for i in range(1, formula.num_vars + 1):
        for p in range(1, params.k + 1):
            clauses.append(_type1_clause(shell, i, p))
            tags.append(TypeI(i, p))
    for i in range(1, formula.num_vars + 1):
        for p in range(1, params.k + 1):
            for a, a2 in combinations(range(1, params.ell + 1), 2):
                clauses.append(_type2_clause(shell, i, p, a, a2))
                tags.append(TypeII(i, p, a, a2))
    cells = params.cells()
    for j, clause in enumerate(formula.clauses, start=1):
        for cell_tuple in product(cells, repeat=clause.width):
            clauses.append(_type3_clause(shell, clause, cell_tuple))
            tags.append(TypeIII(j, cell_tuple))
    return LiftedFormula(formula, params, clauses, tags)


def _lift_by_patterns(formula, params):
    _check_no_empty(formula)
    shell = LiftedFormula(CnfFormula(formula.num_vars, []), params, [], [])
    table = shell.patterns(1)
    clauses, tags = [], []
    for j, clause in enumerate(formula.clauses, start=1):
        for cell_tuple in product(params.cells(), repeat=clause.width):
            for pattern_tuple in product(*[table[cell] for cell in cell_tuple]):
                clauses.append(_star_clause(shell, clause, cell_tuple, pattern_tuple))
                tags.append(Star(j, cell_tuple, pattern_tuple))
    return LiftedFormula(formula, params, clauses, tags)


def lift_parity(formula, params):
    return _lift_by_patterns(formula, params)


def lift_gap(formula):
    return _lift_by_patterns(formula, GapParams())


class LiftFactory(object):

    @staticmethod
    def get_default_config(updates=None):
        config = ConfigDict()
        config.type = 'tensor'
        config.k = 2
        config.ell = 2
        config.a = 1
        if updates is not None:
            config.update(ConfigDict(updates).copy_and_resolve_references())
        return config

    @classmethod
    def lift(cls, formula, config):
        config = cls.get_default_config(config)
        if config.type == 'tensor':
            return lift_tensor(formula, TensorParams(config.k, config.ell))
        elif config.type == 'parity':
            return lift_parity(formula, ParityParams(config.k, config.a))
        elif config.type == 'gap':
            return lift_gap(formula)
        else:
            raise ValueError(f'Unknown lift type: {config.type}')

    def __init__(self):
        raise ValueError('LiftFactory is a static class and should not be instantiated.')


def encode_valid(lifted, alpha, y_choice=None):
    """ Canonical valid encoding of a base assignment.

        Every cell of X_i is set to alpha(e_i). y_choice[i-1] gives the raw Y_i
        bits (in y_vars order); tensor lifts require them to be one-hot per
        coordinate. Without y_choice, cell (1, ..., 1) resp. all-zero bits.
    """
    params = lifted.params
    beta = [0] * lifted.num_vars
    for i in range(1, lifted.base_vars + 1):
        value = int(alpha[i - 1])
        for cell in params.cells():
            beta[lifted.x_var(i, cell) - 1] = value
        if y_choice is None:
            if lifted.mode == 'tensor':
                bits = params.selector_bits((1,) * params.k)
            else:
                bits = (0,) * params.y_size
        else:
            bits = tuple(int(b) for b in y_choice[i - 1])
        if len(bits) != params.y_size or any(b not in (0, 1) for b in bits):
            raise InvalidSelectorError(f'block {i}: selector bits {bits} have the wrong shape')
        if params.cell_of_bits(bits) is None:
            raise InvalidSelectorError(f'block {i}: selector bits {bits} are not one-hot')
        for var, bit in zip(lifted.y_vars(i), bits):
            beta[var - 1] = bit
    return tuple(beta)


def decode(lifted, beta):
    alpha = []
    for i in range(1, lifted.base_vars + 1):
        cell = lifted.selected_cell(i, beta)
        if cell is None:
            raise InvalidSelectorError(f'invalid selector in block {i}')
        alpha.append(int(beta[lifted.x_var(i, cell) - 1]))
    return tuple(alpha)


def _format_cell(cell):
    return '.'.join(str(c) for c in cell)


def _parse_cell(text):
    return tuple(int(c) for c in text.split('.'))


def write_provenance(lifted):
    lines = []
    for tag in lifted.provenance:
        if isinstance(tag, TypeI):
            lines.append(f'I {tag.i} {tag.p}')
        elif isinstance(tag, TypeII):
            lines.append(f'II {tag.i} {tag.p} {tag.a} {tag.a2}')
        elif isinstance(tag, TypeIII):
            lines.append(' '.join(['III', str(tag.source)] + [_format_cell(c) for c in tag.cells]))
        else:
            cells = [_format_cell(c) for c in tag.cells]
            patterns = [''.join(str(b) for b in bits) for bits in tag.patterns]
            lines.append(' '.join(['S', str(tag.source)] + cells + ['|'] + patterns))
    return ('\n'.join(lines) + '\n').encode('ascii')


def parse_provenance(text):
    if isinstance(text, bytes):
        text = text.decode('ascii')
    tags = []
    for line in text.splitlines():
        fields = line.split()
        if not fields:
            continue
        kind = fields[0]
        if kind == 'I':
            tags.append(TypeI(int(fields[1]), int(fields[2])))
        elif kind == 'II':
            tags.append(TypeII(*[int(f) for f in fields[1:5]]))
        elif kind == 'III':
            tags.append(TypeIII(int(fields[1]), tuple(_parse_cell(c) for c in fields[2:])))
        elif kind == 'S':
            bar = fields.index('|')
            cells = tuple(_parse_cell(c) for c in fields[2:bar])
            patterns = tuple(tuple(int(b) for b in bits) for bits in fields[bar + 1:])
            tags.append(Star(int(fields[1]), cells, patterns))
        else:
            raise ValueError(f'Unknown provenance line: {line!r}')
    return tags
