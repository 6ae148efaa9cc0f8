"""Koszul maps between the spaces S^p V (x) Lambda^q V.

An element of S^p V (x) Lambda^q V is stored as a tensor of order p + q whose
first p slots are symmetric and whose last q slots are antisymmetric.

With averaged products, the maps act component-wise as

* ``A_{p,q} t = p (-1)^(q-1) Alt_{slots p-1 .. p+q-2}(t)`` and
* ``B_{p,q} t = -q Sym_{slots 0 .. p-1}(t)``,

i.e. A moves the last symmetric slot into the wedge, appended at the end, and B
moves the first wedge slot into the symmetric part with alternating signs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial, lcm

import numpy as np

from . import _exact
from .linear import SympSpace, Tensor, perm_sum, standard_space, zero_tensor


class KoszulSignatureError(ValueError):
    pass


@dataclass(frozen=True)
class KoszulSlot:
    """The space S^p V (x) Lambda^q V."""

    p: int
    q: int

    def dim(self, n: int) -> int:
        return space_dim(n, self.p, self.q)

    def __str__(self):
        return f"S^{self.p}V(x)L^{self.q}V"


def space_dim(n: int, p: int, q: int) -> int:
    m = 2 * n
    return comb(m + p - 1, p) * comb(m, q)


def _signature(t: Tensor):
    if t.signature is None:
        raise KoszulSignatureError("a (p, q) signature is required")
    return t.signature


def koszul_A(t: Tensor) -> Tensor:
    """A_{p,q}: S^p V (x) Lambda^{q-1} V -> S^{p-1} V (x) Lambda^q V.

    ``t`` carries signature ``(p, q-1)``; the result has signature ``(p-1, q)``.
    For p = 0 the target space is zero and an all-zero tensor is returned.
    """
    p, qm1 = _signature(t)
    q = qm1 + 1
    if p == 0:
        return zero_tensor(t.space, t.order)
    slots = list(range(p - 1, p + q - 1))
    coeff = Fraction(p * (-1) ** (q - 1), factorial(q))
    comps = _exact.scale(perm_sum(t.components, slots, True), coeff)
    return Tensor(t.space, comps, (p - 1, q))


def koszul_B(t: Tensor) -> Tensor:
    """B_{p,q}: S^{p-1} V (x) Lambda^q V -> S^p V (x) Lambda^{q-1} V.

    ``t`` carries signature ``(p-1, q)``; for q = 0 the zero tensor is returned.
    """
    pm1, q = _signature(t)
    p = pm1 + 1
    if q == 0:
        return zero_tensor(t.space, t.order)
    slots = list(range(p))
    coeff = Fraction(-q, factorial(p))
    comps = _exact.scale(perm_sum(t.components, slots, False), coeff)
    return Tensor(t.space, comps, (p, q - 1))


def homotopy_defect(t: Tensor) -> Tensor:
    """A B t - B A t - (-1)^q (p+q) t for t of signature (p, q); zero when the identity holds."""
    p, q = _signature(t)
    total = zero_tensor(t.space, t.order)
    if q >= 1:
        total = total + koszul_A(koszul_B(t)).with_signature(None)
    if p >= 1:
        total = total - koszul_B(koszul_A(t)).with_signature(None)
    return total - t.with_signature(None) * ((-1) ** q * (p + q))


# -- bases and materialized matrices ----------------------------------------

def basis_indices(n: int, p: int, q: int):
    """Canonical basis labels: nondecreasing I of length p, increasing J of length q."""
    m = 2 * n
    sym = list(itertools.combinations_with_replacement(range(m), p))
    alt = list(itertools.combinations(range(m), q))
    return [(I, J) for I in sym for J in alt]


def _basis_component_array(n, I, J):
    """Integer tensor Sym_sum(e_I) (x) Alt_sum(e_J); a nonzero multiple of the basis element."""
    m = 2 * n
    k = len(I) + len(J)
    arr = np.zeros((m,) * k, dtype=np.int64)
    arr[tuple(I) + tuple(J)] = 1
    if len(I) > 1:
        arr = perm_sum(arr, range(len(I)), False)
    if len(J) > 1:
        arr = perm_sum(arr, range(len(I), k), True)
    return arr


def _int_A(arr, p, q):
    # p (-1)^(q-1) q! Alt = scaled A; the scale is a nonzero constant, so ranks agree
    return p * (-1) ** (q - 1) * perm_sum(arr, range(p - 1, p + q - 1), True)


def koszul_matrix(n: int, p: int, q: int) -> np.ndarray:
    """Integer matrix of a nonzero multiple of A_{p,q} in the canonical bases.

    Columns are indexed by the basis of S^p V (x) Lambda^{q-1} V, rows by the
    canonical component positions of S^{p-1} V (x) Lambda^q V. Reading the
    component at a canonical position is injective on the target space, so the
    rank of this matrix equals the rank of A_{p,q}.
    """
    src = basis_indices(n, p, q - 1)
    tgt = basis_indices(n, p - 1, q)
    mat = np.zeros((len(tgt), len(src)), dtype=object)
    if p == 0 or not src or not tgt:
        return mat
    for c, (I, J) in enumerate(src):
        image = _int_A(_basis_component_array(n, I, J), p, q)
        for r, (I2, J2) in enumerate(tgt):
            mat[r, c] = int(image[tuple(I2) + tuple(J2)])
    return mat


@dataclass
class ExactnessStage:
    source: str
    target: str
    source_dim: int
    target_dim: int
    rank: int


@dataclass
class ExactnessReport:
    l: int
    n: int
    stages: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.checks)

    def to_json(self) -> dict:
        return {
            "l": self.l,
            "n": self.n,
            "stages": [vars(s) for s in self.stages],
            "checks": [{"check": name, "pass": ok} for name, ok in self.checks],
            "pass": self.passed,
        }


def verify_exactness(l: int, n: int) -> ExactnessReport:
    """Certify exactness of 0 -> S^l V -> ... -> Lambda^l V -> 0 by exact ranks.

    The composite of consecutive maps is checked to vanish exactly, so image is
    contained in kernel; equality then follows from
    rank(A_in) + rank(A_out) = dim(middle).
    """
    if l not in (3, 4):
        raise ValueError("l must be 3 or 4")
    if n not in (1, 2, 3):
        raise ValueError("n must be 1, 2 or 3")
    report = ExactnessReport(l, n)
    mats = []
    for k in range(1, l + 1):
        p, q = l - k + 1, k
        mat = koszul_matrix(n, p, q)
        mats.append(mat)
        report.stages.append(ExactnessStage(
            source=str(KoszulSlot(p, q - 1)), target=str(KoszulSlot(p - 1, q)),
            source_dim=space_dim(n, p, q - 1), target_dim=space_dim(n, p - 1, q),
            rank=_exact.exact_rank(mat)))
    stages = report.stages
    for k in range(len(stages) - 1):
        zero = _composite_vanishes(n, l - k, k + 1)
        report.checks.append((f"A_{l - k - 1},{k + 2} o A_{l - k},{k + 1} = 0", zero))
    report.checks.append(("injective at S^l", stages[0].rank == stages[0].source_dim))
    for k in range(len(stages) - 1):
        mid = stages[k].target_dim
        report.checks.append((f"exact at {stages[k].target}",
                              stages[k].rank + stages[k + 1].rank == mid))
    report.checks.append(("surjective onto Lambda^l", stages[-1].rank == stages[-1].target_dim))
    return report


def _composite_vanishes(n, p, q):
    """A_{p-1,q+1} A_{p,q} = 0 on every canonical basis element, in integers."""
    for I, J in basis_indices(n, p, q - 1):
        arr = _int_A(_basis_component_array(n, I, J), p, q)
        if p - 1 >= 1 and np.any(_int_A(arr, p - 1, q + 1) != 0):
            return False
    return True


def check_homotopy_on_basis(n: int, p: int, q: int) -> bool:
    """A B - B A = (-1)^q (p+q) Id on every basis element of S^p V (x) Lambda^q V.

    Works on integer multiples of the basis elements with the normalizing
    factors kept aside as Fractions, so the check is exact and linear
    extension covers the whole space.
    """
    c_ab = Fraction(-q * (p + 1) * (-1) ** (q - 1), factorial(p + 1) * factorial(q)) if q >= 1 else 0
    c_ba = Fraction(-(q + 1) * p * (-1) ** q, factorial(p) * factorial(q + 1)) if p >= 1 else 0
    c_id = (-1) ** q * (p + q)
    den = lcm(c_ab.denominator if q >= 1 else 1, c_ba.denominator if p >= 1 else 1)
    k = p + q
    for I, J in basis_indices(n, p, q):
        t = _basis_component_array(n, I, J)
        total = -(c_id * den) * t
        if q >= 1:
            x = perm_sum(perm_sum(t, range(p + 1), False), range(p, k), True)
            total = total + int(c_ab * den) * x
        if p >= 1:
            y = perm_sum(perm_sum(t, range(p - 1, k), True), range(p), False)
            total = total - int(c_ba * den) * y
        if np.any(total != 0):
            return False
    return True


def random_koszul_element(space: SympSpace, p: int, q: int, rng) -> Tensor:
    from .linear import random_tensor
    return random_tensor(space, p + q, rng, (p, q))


def check_homotopy(n: int, p: int, q: int, rng, exact: bool = True) -> bool:
    space = standard_space(n, exact=exact)
    t = random_koszul_element(space, p, q, rng)
    return homotopy_defect(t).is_zero(1e-10)
