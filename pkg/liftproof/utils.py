import numpy as np


ENUMERATION_CAP = 26
BLOCK_BITS = 18


class EnumerationCapExceeded(ValueError):
    pass


def make_rng(seed):
    """ Seeded generator used for every random choice in the package.

        PCG64 is fixed explicitly so that identical seeds give identical
        streams across numpy versions.
    """
    return np.random.Generator(np.random.PCG64(seed))


def ceil_log2(n):
    assert n >= 1, ('ceil_log2 expects a positive integer', n)
    return int(n - 1).bit_length()


def check_enumeration_cap(n, cap=ENUMERATION_CAP):
    if n > cap:
        raise EnumerationCapExceeded(
            f'Refusing to enumerate 2^{n} assignments (cap is 2^{cap}).'
        )


def assignment_block(n, start, stop):
    """ Rows start..stop-1 of the full assignment matrix over n variables.

        Column v-1 holds bit v-1 of the row index, so x1 is the least
        significant bit. Truth tables in this package share the convention.
    """
    index = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(n, dtype=np.int64)
    return ((index[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def enumerate_assignments(n, cap=ENUMERATION_CAP):
    check_enumeration_cap(n, cap)
    return assignment_block(n, 0, 1 << n)


def iter_assignment_blocks(n, cap=ENUMERATION_CAP, block_bits=BLOCK_BITS):
    """ Yields (offset, matrix) pairs that together cover all 2^n assignments. """
    check_enumeration_cap(n, cap)
    total = 1 << n
    step = 1 << min(n, block_bits)
    for start in range(0, total, step):
        yield start, assignment_block(n, start, min(total, start + step))


def assignment_index(alpha):
    return sum(int(bit) << v for v, bit in enumerate(alpha))


class CheckResult(object):
    """ Outcome of a proof or tree check; truthy iff the check passed. """

    def __init__(self, ok, line=None, reason='', counterexample=None):
        self._ok = bool(ok)
        self._line = line
        self._reason = reason
        self._counterexample = counterexample

    @classmethod
    def success(cls):
        return cls(True)

    @classmethod
    def failure(cls, line, reason, counterexample=None):
        return cls(False, line, reason, counterexample)

    def __bool__(self):
        return self._ok

    def __repr__(self):
        if self._ok:
            return 'CheckResult(ok)'
        return f'CheckResult(failed at line {self._line}: {self._reason})'

    @property
    def ok(self):
        return self._ok

    @property
    def line(self):
        return self._line

    @property
    def reason(self):
        return self._reason

    @property
    def counterexample(self):
        return self._counterexample
