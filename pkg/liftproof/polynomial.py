import numpy as np


class Monomial(tuple):
    """ Multilinear monomial: a sorted tuple of distinct variable indices.

        The empty monomial is the constant 1. x*x = x is applied on construction.
    """

    def __new__(cls, variables=()):
        return super().__new__(cls, sorted(set(int(v) for v in variables)))

    @property
    def degree(self):
        return len(self)

    def __mul__(self, other):
        return Monomial(tuple(self) + tuple(other))

    def format(self):
        return '*'.join(f'x{v}' for v in self)


class Polynomial(object):
    """ Integer multilinear polynomial. Zero coefficients are never stored. """

    def __init__(self, terms=None):
        merged = {}
        for mono, coef in (terms or {}).items():
            mono = mono if isinstance(mono, Monomial) else Monomial(mono)
            merged[mono] = merged.get(mono, 0) + int(coef)
        self._terms = {
            mono: coef for mono, coef in sorted(merged.items(), key=_term_order) if coef != 0
        }

    @classmethod
    def constant(cls, value):
        return cls({Monomial(): value})

    @classmethod
    def variable(cls, var, coef=1):
        return cls({Monomial((var,)): coef})

    @classmethod
    def monomial(cls, variables, coef=1):
        return cls({Monomial(variables): coef})

    @classmethod
    def literal(cls, lit):
        """ x for a positive literal, 1 - x for a negative one. """
        if lit > 0:
            return cls.variable(lit)
        return cls({Monomial(): 1, Monomial((-lit,)): -1})

    @property
    def terms(self):
        return dict(self._terms)

    @property
    def degree(self):
        return max((mono.degree for mono in self._terms), default=0)

    @property
    def constant_term(self):
        return self._terms.get(Monomial(), 0)

    def non_constant(self):
        return Polynomial({m: c for m, c in self._terms.items() if m.degree > 0})

    def is_constant(self):
        return all(mono.degree == 0 for mono in self._terms)

    def is_zero(self):
        return not self._terms

    def variables(self):
        return sorted({v for mono in self._terms for v in mono})

    def __add__(self, other):
        if isinstance(other, int):
            other = Polynomial.constant(other)
        terms = dict(self._terms)
        for mono, coef in other._terms.items():
            terms[mono] = terms.get(mono, 0) + coef
        return Polynomial(terms)

    def __radd__(self, other):
        return self + other

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other if isinstance(other, Polynomial) else -int(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            return Polynomial({m: c * int(other) for m, c in self._terms.items()})
        terms = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                mono = m1 * m2
                terms[mono] = terms.get(mono, 0) + c1 * c2
        return Polynomial(terms)

    def __rmul__(self, other):
        return self * other

    def exact_divide(self, divisor):
        """ Term-wise division; None unless every coefficient is a multiple of divisor. """
        if any(coef % divisor for coef in self._terms.values()):
            return None
        return Polynomial({m: c // divisor for m, c in self._terms.items()})

    def substitute(self, mapping):
        """ Replaces each variable v in `mapping` by the polynomial mapping[v]. """
        out = Polynomial()
        for mono, coef in self._terms.items():
            term = Polynomial.constant(coef)
            kept = [v for v in mono if v not in mapping]
            term = term * Polynomial.monomial(kept)
            for v in mono:
                if v in mapping:
                    term = term * mapping[v]
            out = out + term
        return out

    def evaluate(self, alpha):
        total = 0
        for mono, coef in self._terms.items():
            if all(alpha[v - 1] for v in mono):
                total += coef
        return total

    def evaluate_matrix(self, matrix):
        """ Values on every row of a 0/1 assignment matrix, as int64. """
        out = np.zeros(matrix.shape[0], dtype=np.int64)
        for mono, coef in self._terms.items():
            if mono:
                out += coef * matrix[:, [v - 1 for v in mono]].all(axis=1)
            else:
                out += coef
        return out

    def format(self):
        parts = [f'{coef} {mono.format()}' for mono, coef in self._terms.items() if mono]
        parts.append(str(self.constant_term))
        return '; '.join(parts)

    @classmethod
    def parse(cls, text):
        terms = {}
        for part in text.split(';'):
            fields = part.split()
            if not fields:
                continue
            if len(fields) == 1:
                mono = Monomial()
            elif len(fields) == 2:
                mono = Monomial(int(v.lstrip('x')) for v in fields[1].split('*'))
            else:
                raise ValueError(f'Malformed polynomial term {part.strip()!r}')
            terms[mono] = terms.get(mono, 0) + int(fields[0])
        return cls(terms)

    def __eq__(self, other):
        if isinstance(other, int):
            other = Polynomial.constant(other)
        return isinstance(other, Polynomial) and self._terms == other._terms

    def __hash__(self):
        return hash(tuple(self._terms.items()))

    def __repr__(self):
        return f'Polynomial({self.format()})'


def _term_order(item):
    mono = item[0]
    return (mono.degree == 0, mono.degree, tuple(mono))


def polynomial_sum(polynomials):
    return sum(polynomials, Polynomial())
