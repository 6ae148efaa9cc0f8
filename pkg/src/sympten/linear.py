"""Symplectic vector spaces, dense tensors and the action of Sp(2n, R).

Components are stored as dense numpy arrays. Two arithmetic modes coexist:
float64 arrays, and object arrays of ``fractions.Fraction`` for exact work.
Every function here preserves the mode of its input.

Conventions
-----------
* ``omega[i, j] = omega(e_i, e_j)``; ``omega_inv`` is its matrix inverse, so
  ``omega[i, j] * omega_inv[j, q] = delta[i, q]``.
* Slot indices in the Python API are 0-based. The JSON format is 1-based.
* Symmetric and exterior products are normalized by averaging, e.g.
  ``u ^ v = (u (x) v - v (x) u) / 2``. With this normalization the Koszul
  homotopy constant is exactly ``(-1)**q * (p + q)``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.linalg import expm

from . import _exact

FLOAT_TOL = 1e-9
LETTERS = "abcdefghijklmnopqrstuvwxyz"


class SignatureError(ValueError):
    """Tensor components do not have the declared slot symmetry."""


def _freeze(arr):
    arr = np.array(arr, dtype=object if _exact.is_exact(arr) else float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class SympSpace:
    """A real symplectic vector space of dimension 2n with a chosen basis."""

    n: int
    omega: np.ndarray
    omega_inv: np.ndarray
    basis: str = "standard"

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("half-dimension n must be >= 1")
        m = 2 * self.n
        if self.omega.shape != (m, m) or self.omega_inv.shape != (m, m):
            raise ValueError(f"omega must be {m}x{m}")
        object.__setattr__(self, "omega", _freeze(self.omega))
        object.__setattr__(self, "omega_inv", _freeze(self.omega_inv))
        prod = self.omega.dot(self.omega_inv) - np.eye(m, dtype=int)
        if self.exact:
            if np.any(self.omega + self.omega.T != 0) or np.any(prod != 0):
                raise ValueError("omega must be antisymmetric with omega.omega_inv = I")
        elif (np.abs(self.omega + self.omega.T).max() > FLOAT_TOL
              or np.abs(prod).max() > 1e-8):
            raise ValueError("omega must be antisymmetric with omega.omega_inv = I")

    @classmethod
    def from_omega(cls, omega, exact: Optional[bool] = None) -> "SympSpace":
        """Build a space from an arbitrary non-degenerate antisymmetric matrix."""
        omega = np.asarray(omega)
        if exact is None:
            exact = _exact.is_exact(omega)
        if omega.ndim != 2 or omega.shape[0] != omega.shape[1] or omega.shape[0] % 2:
            raise ValueError("omega must be a square matrix of even size")
        if exact:
            omega = _exact.to_fraction_array(omega)
            inv = _exact.exact_inverse(omega)
        else:
            omega = np.asarray(omega, dtype=float)
            inv = np.linalg.inv(omega)
        return cls(omega.shape[0] // 2, omega, inv, basis="custom")

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def exact(self) -> bool:
        return _exact.is_exact(self.omega)

    def as_exact(self) -> "SympSpace":
        if self.exact:
            return self
        return SympSpace(self.n, _exact.to_fraction_array(self.omega),
                         _exact.to_fraction_array(self.omega_inv), self.basis)

    def as_float(self) -> "SympSpace":
        if not self.exact:
            return self
        return SympSpace(self.n, _exact.to_float_array(self.omega),
                         _exact.to_float_array(self.omega_inv), self.basis)

    def omega_bivector(self) -> np.ndarray:
        """Components of omega viewed in Lambda^2 V.

        In a symplectic basis this is ``sum_i e_i ^ e_{i+n}``; the basis-free
        expression is ``-omega_inv / 2``.
        """
        return _exact.scale(self.omega_inv, Fraction(-1, 2))

    def pair(self, u, v):
        """omega(u, v) for component vectors u, v."""
        return np.asarray(u).dot(self.omega).dot(np.asarray(v))

    def zeros(self, order: int) -> np.ndarray:
        return _exact.zeros_like_mode((self.dim,) * order, self.exact)

    def basis_vector(self, i: int) -> np.ndarray:
        v = self.zeros(1)
        v[i] = 1 if not self.exact else Fraction(1)
        return v

    def same_as(self, other: "SympSpace") -> bool:
        if self is other:
            return True
        if self.n != other.n:
            return False
        a = _exact.to_float_array(self.omega)
        b = _exact.to_float_array(other.omega)
        return bool(np.allclose(a, b, atol=1e-12))


def standard_space(n: int, exact: bool = False) -> SympSpace:
    """The space R^{2n} with omega(e_i, e_{j+n}) = delta_ij."""
    if n < 1:
        raise ValueError("n must be >= 1")
    m = 2 * n
    omega = np.zeros((m, m), dtype=int)
    omega[:n, n:] = np.eye(n, dtype=int)
    omega[n:, :n] = -np.eye(n, dtype=int)
    if exact:
        omega = _exact.to_fraction_array(omega)
        return SympSpace(n, omega, -omega)
    omega = omega.astype(float)
    return SympSpace(n, omega, -omega)


def _parity(perm: Sequence[int]) -> int:
    inversions = sum(1 for a, b in itertools.combinations(perm, 2) if a > b)
    return -1 if inversions % 2 else 1


def perm_sum(arr: np.ndarray, slots: Sequence[int], signed: bool) -> np.ndarray:
    """Unnormalized sum of ``arr`` over all permutations of ``slots``."""
    slots = list(slots)
    out = None
    for perm in itertools.permutations(range(len(slots))):
        axes = list(range(arr.ndim))
        for src, dst in zip(slots, perm):
            axes[src] = slots[dst]
        term = np.transpose(arr, axes)
        if signed and _parity(perm) < 0:
            term = -term
        out = term if out is None else out + term
    return out


def _check_slots(order, slots):
    slots = list(slots)
    if not slots:
        raise ValueError("slot set is empty")
    if len(set(slots)) != len(slots) or min(slots) < 0 or max(slots) >= order:
        raise ValueError(f"invalid slots {slots} for order {order}")
    return slots


def _has_symmetry(arr, slots, signed, exact):
    for a, b in zip(slots, slots[1:]):
        swapped = np.swapaxes(arr, a, b)
        diff = arr + swapped if signed else arr - swapped
        if exact:
            if np.any(diff != 0):
                return False
        else:
            scale = max(1.0, float(np.abs(arr).max())) if arr.size else 1.0
            if diff.size and np.abs(diff).max() > FLOAT_TOL * scale:
                return False
    return True


@dataclass(frozen=True, eq=False)
class Tensor:
    """Dense order-k tensor over a symplectic space.

    ``signature=(p, q)`` declares slots ``0..p-1`` symmetric and the remaining
    ``q`` slots antisymmetric; ``None`` declares nothing. The declaration is
    checked against the components on construction.
    """

    space: SympSpace
    components: np.ndarray
    signature: Optional[tuple] = None

    def __post_init__(self):
        comps = np.asarray(self.components)
        if self.space.exact:
            if comps.dtype != object:
                comps = _exact.to_fraction_array(comps)
        else:
            comps = _exact.to_float_array(comps)
        if comps.ndim and comps.shape != (self.space.dim,) * comps.ndim:
            raise ValueError(f"components shape {comps.shape} does not match dimension {self.space.dim}")
        object.__setattr__(self, "components", _freeze(comps))
        sig = self.signature
        if sig is not None:
            sig = tuple(int(s) for s in sig)
            if sig == (0, 0) and comps.ndim:
                sig = None
        object.__setattr__(self, "signature", sig)
        if sig is not None:
            p, q = sig
            if p < 0 or q < 0 or p + q != comps.ndim:
                raise SignatureError(f"signature {sig} does not fit order {comps.ndim}")
            exact = comps.dtype == object
            if not _has_symmetry(comps, range(p), False, exact):
                raise SignatureError(f"components not symmetric in slots 0..{p - 1}")
            if not _has_symmetry(comps, range(p, p + q), True, exact):
                raise SignatureError(f"components not antisymmetric in slots {p}..{p + q - 1}")

    @property
    def order(self) -> int:
        return self.components.ndim

    @property
    def exact(self) -> bool:
        return self.components.dtype == object

    def with_signature(self, signature) -> "Tensor":
        return Tensor(self.space, self.components, signature)

    def _combine(self, other, op):
        if not isinstance(other, Tensor):
            return NotImplemented
        if other.order != self.order or not self.space.same_as(other.space):
            raise ValueError("tensors live in different spaces")
        sig = self.signature if self.signature == other.signature else None
        return Tensor(self.space, op(self.components, other.components), sig)

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __neg__(self):
        return Tensor(self.space, -self.components, self.signature)

    def __mul__(self, c):
        return Tensor(self.space, _exact.scale(self.components, c)
                      if isinstance(c, (int, Fraction)) else self.components * c,
                      self.signature)

    __rmul__ = __mul__

    def max_abs(self) -> float:
        if self.components.size == 0:
            return 0.0
        return float(np.max(np.abs(_exact.to_float_array(self.components))))

    def is_zero(self, tol: float = FLOAT_TOL) -> bool:
        if self.exact:
            return not np.any(self.components != 0)
        return self.max_abs() <= tol

    def equals(self, other: "Tensor", tol: float = FLOAT_TOL) -> bool:
        return (self - other).is_zero(tol)

    def as_float(self) -> "Tensor":
        return Tensor(self.space.as_float(), _exact.to_float_array(self.components), self.signature)

    def as_exact(self) -> "Tensor":
        return Tensor(self.space.as_exact(), _exact.to_fraction_array(self.components), self.signature)


def tensor(space: SympSpace, components, signature=None) -> Tensor:
    return Tensor(space, np.asarray(components, dtype=object if space.exact else float), signature)


def zero_tensor(space: SympSpace, order: int, signature=None) -> Tensor:
    return Tensor(space, space.zeros(order), signature)


def basis_tensor(space: SympSpace, idx: Sequence[int]) -> Tensor:
    """The tensor e_{idx[0]} (x) ... (x) e_{idx[-1]} (0-based indices)."""
    comps = space.zeros(len(idx))
    comps[tuple(idx)] = Fraction(1) if space.exact else 1.0
    return Tensor(space, comps)


def outer(*tensors: Tensor) -> Tensor:
    comps = tensors[0].components
    for t in tensors[1:]:
        comps = np.multiply.outer(comps, t.components)
    return Tensor(tensors[0].space, comps)


def _infer_signature(t: Tensor, comps, slots, signed):
    order = comps.ndim
    if sorted(slots) == list(range(order)):
        return (0, order) if signed else (order, 0)
    if t.signature is not None:
        p, q = t.signature
        if _has_symmetry(comps, range(p), False, t.exact) and \
                _has_symmetry(comps, range(p, p + q), True, t.exact):
            return t.signature
    return None


def symmetrize(t: Tensor, slots: Iterable[int]) -> Tensor:
    """Average of ``t`` over all permutations of ``slots``."""
    slots = _check_slots(t.order, slots)
    comps = _exact.scale(perm_sum(t.components, slots, False), Fraction(1, factorial(len(slots))))
    return Tensor(t.space, comps, _infer_signature(t, comps, slots, False))


def antisymmetrize(t: Tensor, slots: Iterable[int]) -> Tensor:
    """Signed average of ``t`` over all permutations of ``slots``."""
    slots = _check_slots(t.order, slots)
    comps = _exact.scale(perm_sum(t.components, slots, True), Fraction(1, factorial(len(slots))))
    return Tensor(t.space, comps, _infer_signature(t, comps, slots, True))


def contract_omega(t: Tensor, slot_a: int, slot_b: int, mode: str = "raise") -> Tensor:
    """Contract two slots against omega_{ij} ("lower") or omega^{ij} ("raise").

    The result has order ``t.order - 2`` and no declared signature.
    """
    if slot_a == slot_b or not (0 <= slot_a < t.order and 0 <= slot_b < t.order):
        raise ValueError(f"invalid slot pair ({slot_a}, {slot_b}) for order {t.order}")
    if mode == "lower":
        mat = t.space.omega
    elif mode == "raise":
        mat = t.space.omega_inv
    else:
        raise ValueError(f"mode must be 'lower' or 'raise', got {mode!r}")
    idx = LETTERS[:t.order]
    out = "".join(c for k, c in enumerate(idx) if k not in (slot_a, slot_b))
    comps = np.einsum(f"{idx},{idx[slot_a]}{idx[slot_b]}->{out}", t.components, mat)
    return Tensor(t.space, np.asarray(comps, dtype=object if t.exact else float))


@dataclass(frozen=True, eq=False)
class SympMap:
    """An element g of Sp(V, omega), acting on vectors by v -> g v."""

    space: SympSpace
    matrix: np.ndarray
    tol: float = field(default=FLOAT_TOL)

    def __post_init__(self):
        g = np.asarray(self.matrix)
        if self.space.exact and g.dtype != object:
            g = _exact.to_fraction_array(g)
        elif not self.space.exact:
            g = _exact.to_float_array(g)
        if g.shape != (self.space.dim, self.space.dim):
            raise ValueError("matrix has the wrong dimension")
        object.__setattr__(self, "matrix", _freeze(g))
        if not is_symplectic(self.space, g, self.tol):
            raise ValueError("matrix is not symplectic: g^T omega g != omega")

    def inverse(self) -> "SympMap":
        # g^{-1} = omega^{-1} g^T omega for g in Sp
        w, wi = self.space.omega, self.space.omega_inv
        return SympMap(self.space, wi.dot(self.matrix.T).dot(w), self.tol)

    def __matmul__(self, other: "SympMap") -> "SympMap":
        return SympMap(self.space, self.matrix.dot(other.matrix), max(self.tol, other.tol))


def is_symplectic(space: SympSpace, g, tol: float = FLOAT_TOL) -> bool:
    g = np.asarray(g)
    resid = g.T.dot(space.omega).dot(g) - space.omega
    if _exact.is_exact(resid):
        return not np.any(resid != 0)
    return float(np.abs(resid).max()) < tol


def identity_map(space: SympSpace) -> SympMap:
    g = np.eye(space.dim, dtype=int)
    return SympMap(space, _exact.to_fraction_array(g) if space.exact else g.astype(float))


def random_symplectic(space: SympSpace, seed: int, scale: float = 0.5) -> SympMap:
    """Deterministic pseudo-random element of Sp(V, omega).

    Float mode exponentiates ``omega^{-1} S`` with S random symmetric, which lies
    in sp(2n). Exact mode multiplies symplectic transvections
    ``x -> x + c omega(v, x) v`` with small integer v and c.
    """
    rng = np.random.default_rng(seed)
    m = space.dim
    if space.exact:
        g = _exact.to_fraction_array(np.eye(m, dtype=int))
        for _ in range(2 * m):
            v = rng.integers(-2, 3, size=m)
            if not v.any():
                continue
            v = _exact.to_fraction_array(v)
            c = Fraction(int(rng.choice([-2, -1, 1, 2])), int(rng.integers(1, 3)))
            tau = _exact.to_fraction_array(np.eye(m, dtype=int)) + c * np.outer(v, v.dot(space.omega))
            g = tau.dot(g)
        return SympMap(space, g)
    s = rng.standard_normal((m, m))
    s = (s + s.T) / 2
    s *= scale / max(1.0, np.linalg.norm(s, 2))
    return SympMap(space, expm(space.omega_inv.dot(s)))


def act(g: SympMap, t: Tensor, covariant: bool = False) -> Tensor:
    """Apply g to every slot of t: (g.t)_{j..} = g_{j i} ... t_{i..}.

    With ``covariant=True`` the slots are treated as dual-vector slots and
    transform by g^{-T}, so that e.g. omega_{ij} is fixed.
    """
    if g.space.dim != t.space.dim:
        raise ValueError("dimension mismatch between map and tensor")
    mat = g.inverse().matrix.T if covariant else g.matrix
    comps = t.components
    for k in range(t.order):
        comps = np.moveaxis(np.tensordot(mat, comps, axes=([1], [k])), 0, k)
    if not t.exact:
        comps = np.asarray(comps, dtype=float)
    return Tensor(t.space, comps, t.signature)


def random_tensor(space: SympSpace, order: int, rng, signature=None) -> Tensor:
    """Random tensor, projected onto the slot symmetry of ``signature``.

    Exact spaces get small random integers before projection.
    """
    shape = (space.dim,) * order
    if space.exact:
        comps = _exact.to_fraction_array(rng.integers(-3, 4, size=shape))
    else:
        comps = rng.standard_normal(shape)
    t = Tensor(space, comps)
    if signature is not None:
        p, q = signature
        if p > 1:
            t = symmetrize(t, range(p))
        if q > 1:
            t = antisymmetrize(t, range(p, p + q))
        t = t.with_signature((p, q))
    return t


# -- JSON (sparse COO, 1-based) ---------------------------------------------

def _format_value(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    return repr(float(x))


def tensor_to_json(t: Tensor) -> dict:
    """Sparse COO document with 1-based indices and string values."""
    entries = []
    for idx, val in np.ndenumerate(t.components):
        if val != 0:
            entries.append({"idx": [i + 1 for i in idx], "val": _format_value(val)})
    return {
        "n": t.space.n,
        "order": t.order,
        "signature": list(t.signature) if t.signature is not None else [0, 0],
        "entries": entries,
    }


def tensor_from_json(doc, exact: bool = True, space: Optional[SympSpace] = None) -> Tensor:
    """Parse the sparse COO format; values are parsed exactly when ``exact``."""
    if isinstance(doc, (str, bytes)):
        doc = json.loads(doc)
    try:
        n = int(doc["n"])
        order = int(doc["order"])
        entries = doc.get("entries", [])
        signature = doc.get("signature", [0, 0])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed tensor document: {exc}") from exc
    if space is None:
        space = standard_space(n, exact=exact)
    elif space.n != n:
        raise ValueError("tensor document does not match the given space")
    comps = space.zeros(order)
    for e in entries:
        idx = tuple(int(i) - 1 for i in e["idx"])
        if len(idx) != order or min(idx, default=0) < 0 or max(idx, default=0) >= space.dim:
            raise ValueError(f"entry index {e['idx']} out of range")
        comps[idx] = Fraction(str(e["val"])) if space.exact else float(Fraction(str(e["val"])))
    return Tensor(space, comps, tuple(signature))
