"""Sp-equivariant projectors on S^2V (x) V and the splitting of torsion-like tensors.

S^2V (x) V is stored as order-3 tensors symmetric in slots 0, 1; V (x) Lambda^2 V
as order-3 tensors antisymmetric in slots 1, 2. All maps are written with
``omega`` and ``omega_inv`` only, so they work in any basis, not just the
standard one.

    S^2V (x) V     = S^3V (+) A' (+) V          (pi, eta, xi . phi)
    V (x) Lambda^2V = A' (+) V (+) T' (+) V      (decompose_torsion)
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _exact
from .koszul import basis_indices, koszul_A, koszul_B
from .linear import (SympSpace, Tensor, antisymmetrize, perm_sum, symmetrize,
                     zero_tensor)


class DecompositionError(ValueError):
    pass


def _einsum(spec, *ops, exact):
    out = np.einsum(spec, *ops)
    return np.asarray(out, dtype=object if exact else float)


def _require_s2v(t: Tensor) -> Tensor:
    if t.order != 3:
        raise DecompositionError("expected an order-3 tensor in S^2V (x) V")
    try:
        return t.with_signature((2, 1))
    except ValueError as exc:
        raise DecompositionError("tensor is not symmetric in its first two slots") from exc


def _require_vl2(t: Tensor) -> Tensor:
    if t.order != 3:
        raise DecompositionError("expected an order-3 tensor in V (x) Lambda^2 V")
    try:
        return t.with_signature((1, 2))
    except ValueError as exc:
        raise DecompositionError("tensor is not antisymmetric in its last two slots") from exc


def _require_vector(v: Tensor) -> Tensor:
    if v.order != 1:
        raise DecompositionError("expected a vector")
    return v.with_signature((1, 0))


def _frac(num, den=1):
    return Fraction(num, den)


def phi(t: Tensor) -> Tensor:
    """phi(u1 u2 (x) v) = omega(u1, v) u2 + omega(u2, v) u1."""
    t = _require_s2v(t)
    comps = _einsum("ac,abc->b", t.space.omega, t.components, exact=t.exact)
    return Tensor(t.space, _exact.scale(comps, 2), (1, 0))


def xi(v: Tensor) -> Tensor:
    """Right inverse of phi: xi(v) = -B_{2,2}(v (x) omega) / (2n+1)."""
    v = _require_vector(v)
    n = v.space.n
    b = koszul_B(vector_wedge_omega(v))
    return Tensor(v.space, _exact.scale(b.components, _frac(-1, 2 * n + 1)), (2, 1))


def xi_standard_basis(v: Tensor) -> Tensor:
    """xi written out in a symplectic basis: sum_i e_i v (x) e_{i+n} - e_{i+n} v (x) e_i, over 2n+1.

    Only meaningful when ``v.space`` has the standard omega; used as an
    independent check of ``xi``.
    """
    v = _require_vector(v)
    sp, n = v.space, v.space.n
    comps = sp.zeros(3)
    for i in range(n):
        ei, ein = sp.basis_vector(i), sp.basis_vector(i + n)
        for a, b in ((ei, ein), (ein, ei)):
            sym = (np.multiply.outer(a, v.components) + np.multiply.outer(v.components, a))
            term = np.multiply.outer(_exact.scale(sym, _frac(1, 2)), b)
            comps = comps + term if a is ei else comps - term
    return Tensor(sp, _exact.scale(comps, _frac(1, 2 * n + 1)), (2, 1))


def pi(t: Tensor) -> Tensor:
    """Left inverse of A_1: pi = -B_{3,1} / 3, i.e. pi(u1 u2 (x) v) = u1 u2 v / 3."""
    t = _require_s2v(t)
    return Tensor(t.space, _exact.scale(koszul_B(t.with_signature((2, 1))).components, _frac(-1, 3)), (3, 0))


def a1(s: Tensor) -> Tensor:
    """A_1 = A_{3,1}: S^3 V -> S^2 V (x) V."""
    return koszul_A(s.with_signature((3, 0)))


def a2(t: Tensor) -> Tensor:
    """A_2 = A_{2,2}: S^2 V (x) V -> V (x) Lambda^2 V."""
    return koszul_A(_require_s2v(t))


def a3(t: Tensor) -> Tensor:
    """A_3 = A_{1,3}: V (x) Lambda^2 V -> Lambda^3 V (total antisymmetrization)."""
    return koszul_A(_require_vl2(t))


def eta(t: Tensor) -> Tensor:
    """Projection onto A' = ker phi n ker pi: eta = Id - A_1 pi - xi phi."""
    t = _require_s2v(t)
    out = t.components - a1(pi(t)).components - xi(phi(t)).components
    return Tensor(t.space, out, (2, 1))


def chi(t: Tensor) -> Tensor:
    """chi(u1 u2 (x) v) = v u2 (x) u1 + v u1 (x) u2; satisfies chi^2 - chi - 2 = 0."""
    t = _require_s2v(t)
    swapped = np.swapaxes(t.components, 0, 2)
    return Tensor(t.space, perm_sum(swapped, (0, 1), False), (2, 1))


def c_map(t: Tensor) -> Tensor:
    """C(v (x) u ^ w) = omega(u, w) v + omega(v, u) w - omega(v, w) u."""
    t = _require_vl2(t)
    w = t.space.omega
    first = _einsum("bd,cbd->c", w, t.components, exact=t.exact)
    second = _einsum("ab,abc->c", w, t.components, exact=t.exact)
    return Tensor(t.space, first + _exact.scale(second, 2), (1, 0))


def vector_wedge_omega(v: Tensor) -> Tensor:
    """The tensor v (x) omega in V (x) Lambda^2 V."""
    v = _require_vector(v)
    return Tensor(v.space, np.multiply.outer(v.components, v.space.omega_bivector()), (1, 2))


def c_squared(f: Tensor) -> Tensor:
    """C applied twice on Lambda^3 V, reading C(f) back in as Alt(C(f) (x) omega)."""
    f = _require_vl2(f)
    return c_map(lambda3_part(vector_wedge_omega(c_map(f))))


def lambda3_part(t: Tensor) -> Tensor:
    """Projection of V (x) Lambda^2 V onto the totally antisymmetric tensors."""
    t = _require_vl2(t)
    return antisymmetrize(t, (0, 1, 2)).with_signature((1, 2))


def a2_section(k: Tensor) -> Tensor:
    """x in ker(pi) with A_2(x) = k, for k in ker A_3.

    On ker A_3 the homotopy identity reads A_2 B_{2,2} = 3 Id, so B_{2,2}/3 is a
    right inverse; subtracting A_1 pi then lands in ker pi without changing
    the image under A_2 (A_2 A_1 = 0).
    """
    k = _require_vl2(k)
    x = koszul_B(k)
    x = Tensor(k.space, _exact.scale(x.components, _frac(1, 3)), (2, 1))
    return Tensor(k.space, x.components - a1(pi(x)).components, (2, 1))


@dataclass(frozen=True)
class TorsionDecomposition:
    input: Tensor
    part_Aprime: Tensor
    part_vec_sym: Tensor
    part_Tprime: Tensor
    part_vec_form: Tensor
    recombination_residual: float
    degenerate: bool = False

    def parts(self) -> dict:
        return {
            "Aprime": self.part_Aprime,
            "vec_sym": self.part_vec_sym,
            "Tprime": self.part_Tprime,
            "vec_form": self.part_vec_form,
        }


def decompose_torsion(t: Tensor) -> TorsionDecomposition:
    """Split t in V (x) Lambda^2 V into its A', V (ker A_3 side), T' and V (v (x) omega) parts.

    The v (x) omega part is read off from C, which kills ker A_3 and T' and acts
    as (n-1) on v (x) omega. For n = 1, Lambda^3 V = 0 and both form-side parts
    are zero; the result is flagged ``degenerate``.
    """
    t = _require_vl2(t)
    sp, n = t.space, t.space.n
    if n == 1:
        vec_form = zero_tensor(sp, 3, (1, 2))
        tprime = zero_tensor(sp, 3, (1, 2))
    else:
        w = c_map(t)
        w = Tensor(sp, _exact.scale(w.components, _frac(1, n - 1)), (1, 0))
        vec_form = vector_wedge_omega(w)
        tprime = Tensor(sp, lambda3_part(t).components - lambda3_part(vec_form).components, (1, 2))
    kernel_part = Tensor(sp, t.components - tprime.components - vec_form.components, (1, 2))
    x = a2_section(kernel_part)
    vec_sym = a2(xi(phi(x)))
    aprime = Tensor(sp, kernel_part.components - vec_sym.components, (1, 2))
    total = aprime.components + vec_sym.components + tprime.components + vec_form.components
    resid = Tensor(sp, t.components - total).max_abs()
    return TorsionDecomposition(t, aprime, vec_sym.with_signature((1, 2)), tprime, vec_form,
                                resid, degenerate=(n == 1))


# -- materialized projectors and rank census --------------------------------

def _basis_tensors(space: SympSpace, p: int, q: int, signature):
    """Averaged basis elements e_I (x) e_J of S^p V (x) Lambda^q V."""
    out = []
    for I, J in basis_indices(space.n, p, q):
        comps = space.zeros(p + q)
        comps[tuple(I) + tuple(J)] = Fraction(1) if space.exact else 1.0
        t = Tensor(space, comps)
        if p > 1:
            t = symmetrize(t, range(p))
        if q > 1:
            t = antisymmetrize(t, range(p, p + q))
        out.append(t.with_signature(signature))
    return out


def operator_matrix(fn, space: SympSpace, p: int, q: int) -> np.ndarray:
    """Matrix (full components x basis) of a linear map on S^p V (x) Lambda^q V."""
    cols = [np.asarray(fn(b).components).reshape(-1) for b in _basis_tensors(space, p, q, (p, q))]
    return np.stack(cols, axis=1)


def matrix_rank(mat: np.ndarray, exact: bool) -> int:
    if exact:
        nz = [r for r in range(mat.shape[0]) if np.any(mat[r] != 0)]
        return _exact.exact_rank(_exact.integer_rows(mat[nz])) if nz else 0
    return int(np.linalg.matrix_rank(mat, tol=1e-9))


def operator_rank(fn, space: SympSpace, p: int, q: int) -> int:
    return matrix_rank(operator_matrix(fn, space, p, q), space.exact)


def projector_ranks(space: SympSpace) -> dict:
    """Ranks of the projectors on S^2V (x) V and of the four torsion parts."""
    s2v = {
        "A1pi": operator_rank(lambda t: a1(pi(t)), space, 2, 1),
        "xiphi": operator_rank(lambda t: xi(phi(t)), space, 2, 1),
        "eta": operator_rank(eta, space, 2, 1),
    }
    decomps = [decompose_torsion(b).parts() for b in _basis_tensors(space, 1, 2, (1, 2))]
    parts = {}
    for name in ("Aprime", "vec_sym", "Tprime", "vec_form"):
        mat = np.stack([np.asarray(d[name].components).reshape(-1) for d in decomps], axis=1)
        parts[name] = matrix_rank(mat, space.exact)
    return {"S2V_V": s2v, "V_L2V": parts}


def expected_dimensions(n: int) -> dict:
    """Dimension formulas for the irreducible pieces."""
    m = 2 * n
    return {
        "S3V": (m + 2) * (m + 1) * m // 6,
        "V": m,
        "Aprime": (8 * (n ** 3 - n)) // 3,
        "Tprime": (2 * n * (2 * n * n - 3 * n - 2)) // 3 if n > 1 else 0,
        "S2V_V": 2 * n * n * (2 * n + 1),
        "V_L2V": m * m * (m - 1) // 2,
    }
