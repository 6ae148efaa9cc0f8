"""Exact rational helpers: Fraction arrays, rank and linear solves over Q."""

from fractions import Fraction
from math import lcm

import numpy as np
from sympy import QQ
from sympy.polys.matrices import DomainMatrix


def is_exact(arr):
    return np.asarray(arr).dtype == object


def to_fraction_array(arr):
    """Convert ints, Fractions, decimal strings to an object array of Fractions.

    Floats are converted through ``Fraction(repr(x))`` so that 0.1 becomes 1/10
    rather than its binary expansion.
    """
    a = np.asarray(arr, dtype=object)
    out = np.empty(a.shape, dtype=object)
    for idx, x in np.ndenumerate(a):
        if isinstance(x, Fraction):
            out[idx] = x
        elif isinstance(x, (float, np.floating)):
            out[idx] = Fraction(repr(float(x)))
        elif isinstance(x, (int, np.integer)):
            out[idx] = Fraction(int(x))
        else:
            out[idx] = Fraction(str(x))
    return out


def to_float_array(arr):
    return np.asarray(arr, dtype=float) if not is_exact(arr) else np.vectorize(float, otypes=[float])(arr)


def zeros_like_mode(shape, exact):
    if exact:
        out = np.empty(shape, dtype=object)
        out.fill(Fraction(0))
        return out
    return np.zeros(shape)


def scale(arr, c):
    """Multiply by a rational constant without leaving exact mode."""
    if is_exact(arr):
        return arr * Fraction(c)
    return arr * float(Fraction(c))


def integer_rows(mat):
    """Scale each row of a rational matrix by the lcm of its denominators."""
    m = np.asarray(mat, dtype=object)
    out = np.empty(m.shape, dtype=object)
    for r in range(m.shape[0]):
        row = [Fraction(x) for x in m[r]]
        d = lcm(*[x.denominator for x in row]) if row else 1
        out[r] = [int(x * d) for x in row]
    return out


def _domain_matrix(mat):
    m = np.asarray(mat, dtype=object)
    rows, cols = m.shape
    data = {}
    for (r, c), x in np.ndenumerate(m):
        x = Fraction(x)
        if x:
            data.setdefault(r, {})[c] = QQ(x.numerator, x.denominator)
    return DomainMatrix(data, (rows, cols), QQ)


def exact_rank(mat):
    """Rank over Q of a matrix with integer or Fraction entries."""
    m = np.asarray(mat, dtype=object)
    if m.size == 0:
        return 0
    return int(_domain_matrix(m).rank())


def exact_inverse(mat):
    m = _domain_matrix(mat)
    inv = m.inv().to_Matrix()
    out = np.empty(inv.shape, dtype=object)
    for r in range(inv.shape[0]):
        for c in range(inv.shape[1]):
            x = inv[r, c]
            out[r, c] = Fraction(int(x.p), int(x.q))
    return out


def exact_solve_rows(basis_rows, target_row):
    """Coefficients c with ``sum_r c[r] * basis_rows[r] == target_row`` exactly.

    Returns None when ``target_row`` is not in the span. The basis rows must be
    linearly independent. The Gram system is square and exact, so the answer is
    checked by substitution rather than trusted.
    """
    B = np.asarray(basis_rows, dtype=object)
    t = np.asarray(target_row, dtype=object)
    gram = B.dot(B.T)
    rhs = B.dot(t)
    ginv = exact_inverse(gram)
    coef = ginv.dot(rhs)
    if np.any(coef.dot(B) - t != 0):
        return None
    return [Fraction(c) for c in coef]
