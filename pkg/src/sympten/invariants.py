"""Quadratic symplectic traces of order-3 tensors.

A quadratic trace contracts the six indices of ``Q_{ijk} Q_{pql}`` in three
pairs against ``omega^{..}``. Positions are labelled ``i j k p q l`` (0..5), a
pairing is written like ``"ij kp ql"`` and the order inside a pair fixes the
orientation (``omega^{ab} = -omega^{ba}``).

Classification is done exactly: each pairing is turned into the integer matrix
of its bilinear form on V(x)V(x)V, symmetrized (only the symmetric part is seen
by ``Q (x) Q``), and the span of those forms is measured by exact rank.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Optional

import numpy as np

from . import _exact
from .linear import FLOAT_TOL, Tensor, standard_space

POSITIONS = "ijkpql"

# Labels as in the classification list.
R_PAIRINGS = {
    "r1": "ik jp ql",
    "r2": "ij kp ql",
    "r3": "ik jl pq",
    "r4": "iq jl kp",
}

# Alternate labelling of the traces; the four survivors map to r1..r4 above as
# r_2 -> r1, r2' -> r2, r3 -> r3, r7 -> r4.
ALT_PAIRINGS = {
    "r_1": "ik jq pl", "r_2": "ik jp ql", "r_3": "ik jl pq",
    "r_4": "ip jl kq", "r_5": "ip jq kl", "r_6": "iq jp kl",
    "r_7": "iq jl kp", "r_8": "il jp kq", "r_9": "il jq kp",
    "r_1'": "ij kq pl", "r_2'": "ij kp ql", "r_3'": "ij kl pq",
    "r_2''": "jk ip ql",
}

# Linear relations among the alternate labels: name -> (coefficient, other name or None for 0).
ALT_REDUCTIONS = {
    "r_1": (0, None), "r_4": (0, None), "r_5": (0, None), "r_6": (0, None),
    "r_9": (0, None), "r_8": (-1, "r_7"), "r_1'": (-1, "r_3"), "r_3'": (0, None),
    "r_2''": (0, None),
}

ALT_TO_BASIS = {"r_2": "r1", "r_2'": "r2", "r_3": "r3", "r_7": "r4"}


class PairingError(ValueError):
    pass


@dataclass(frozen=True)
class TracePairing:
    """A perfect matching of the six index positions, with orientations."""

    pairs: tuple
    canonical_name: Optional[str] = None

    def __post_init__(self):
        pairs = tuple(tuple(int(x) for x in pr) for pr in self.pairs)
        flat = sorted(x for pr in pairs for x in pr)
        if len(pairs) != 3 or any(len(pr) != 2 for pr in pairs) or flat != list(range(6)):
            raise PairingError(f"not a perfect matching of 6 positions: {self.pairs}")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def parse(cls, text: str, name: Optional[str] = None) -> "TracePairing":
        try:
            pairs = tuple((POSITIONS.index(w[0]), POSITIONS.index(w[1])) for w in text.split())
        except (ValueError, IndexError) as exc:
            raise PairingError(f"cannot parse pairing {text!r}") from exc
        if any(len(w) != 2 for w in text.split()):
            raise PairingError(f"cannot parse pairing {text!r}")
        return cls(pairs, name)

    def canonical(self) -> tuple:
        """(sign, pairing) with every pair lower-position-first, pairs sorted."""
        sign = 1
        pairs = []
        for a, b in self.pairs:
            if a > b:
                sign = -sign
                a, b = b, a
            pairs.append((a, b))
        return sign, TracePairing(tuple(sorted(pairs)), self.canonical_name)

    def einsum_spec(self) -> str:
        return "ijk,pql," + ",".join(POSITIONS[a] + POSITIONS[b] for a, b in self.pairs) + "->"

    def __str__(self):
        return " ".join(POSITIONS[a] + POSITIONS[b] for a, b in self.pairs)


def all_matchings() -> list:
    """The 15 canonical matchings, lexicographic on position pairs."""
    def rec(pos):
        if not pos:
            yield ()
            return
        a = pos[0]
        for i in range(1, len(pos)):
            rest = pos[1:i] + pos[i + 1:]
            for tail in rec(rest):
                yield ((a, pos[i]),) + tail
    out = [TracePairing(m) for m in rec(tuple(range(6)))]
    names = {TracePairing.parse(v).canonical()[1].pairs: k for k, v in R_PAIRINGS.items()}
    return [TracePairing(m.pairs, names.get(m.pairs)) for m in out]


def _pairing(p) -> TracePairing:
    if isinstance(p, TracePairing):
        return p
    if isinstance(p, str):
        if p in R_PAIRINGS:
            return TracePairing.parse(R_PAIRINGS[p], p)
        if p in ALT_PAIRINGS:
            return TracePairing.parse(ALT_PAIRINGS[p], p)
        return TracePairing.parse(p)
    return TracePairing(tuple(p))


def eval_trace(Q: Tensor, pairing) -> object:
    """sum Q_{ijk} Q_{pql} omega^{..} omega^{..} omega^{..} wired by ``pairing``.

    Returns a Fraction for exact tensors and a float otherwise.
    """
    if Q.order != 3:
        raise ValueError("quadratic traces are defined on order-3 tensors")
    pr = _pairing(pairing)
    w = Q.space.omega_inv
    if not Q.exact:
        return float(np.einsum(pr.einsum_spec(), Q.components, Q.components, w, w, w, optimize=True))
    # clear denominators and contract Python ints; much faster than Fractions
    q, dq = _integer_scaled(Q.components)
    wi, dw = _integer_scaled(w)
    val = np.einsum(pr.einsum_spec(), q, q, wi, wi, wi, optimize=True)
    return Fraction(int(val), dq * dq * dw ** 3)


def _integer_scaled(arr):
    """(integer object array, d) with arr = result / d."""
    flat = np.asarray(arr).reshape(-1)
    d = lcm(*[Fraction(x).denominator for x in flat]) if flat.size else 1
    ints = np.array([int(Fraction(x) * d) for x in flat], dtype=object).reshape(np.shape(arr))
    return ints, d


def r_invariants(Q: Tensor) -> tuple:
    return tuple(eval_trace(Q, name) for name in ("r1", "r2", "r3", "r4"))


class SkewnessError(ValueError):
    pass


def raise_last_index(Q: Tensor) -> np.ndarray:
    """Q^h_{ij} with Q_{ijk} = Q^h_{ij} omega_{hk}; returned with h last."""
    out = np.einsum("ijk,kh->ijh", Q.components, Q.space.omega_inv)
    return np.asarray(out, dtype=object if Q.exact else float)


def mixed_index_form(Q: Tensor):
    """Q^p_{ij} Q^q_{qp} omega^{ij}; equals r(Q) when Q is skew in its first two slots."""
    up = raise_last_index(Q)
    val = np.einsum("ijp,qpq,ij->", up, up, Q.space.omega_inv)
    return Fraction(val) if Q.exact else float(val)


def unique_invariant(Q: Tensor, skew_in_first_two: bool = False):
    """r(Q) = Q_{ijk} Q_{pql} omega^{ij} omega^{kp} omega^{ql}.

    With ``skew_in_first_two`` the skewness Q_{ijk} = -Q_{jik} is validated and
    the mixed-index form is computed as a second path; disagreement raises.
    """
    r = eval_trace(Q, "r2")
    if skew_in_first_two:
        sym = Q.components + np.swapaxes(Q.components, 0, 1)
        if Q.exact:
            bad = np.any(sym != 0)
        else:
            bad = np.abs(sym).max() > FLOAT_TOL * max(1.0, Q.max_abs())
        if bad:
            raise SkewnessError("Q is not skew-symmetric in its first two slots")
        other = mixed_index_form(Q)
        if Q.exact:
            ok = other == r
        else:
            ok = abs(other - r) <= 1e-9 * max(1.0, abs(r))
        if not ok:
            raise ArithmeticError(f"r(Q) = {r} disagrees with the mixed-index form {other}")
    return r


# -- exact classification ----------------------------------------------------

def _int_omega_inv(n):
    return _exact.to_float_array(standard_space(n).omega_inv).astype(np.int64)


def form_matrix(n: int, pairing) -> np.ndarray:
    """Integer matrix of 2 x (symmetrized bilinear form) of a pairing on V^{(x)3}."""
    pr = _pairing(pairing)
    m = 2 * n
    w = _int_omega_inv(n)
    spec = ",".join(POSITIONS[a] + POSITIONS[b] for a, b in pr.pairs) + "->" + POSITIONS
    F = np.einsum(spec, w, w, w).reshape(m ** 3, m ** 3)
    return F + F.T


def _slot_operator(n, perms_signs):
    """Matrix on V^{(x)3} of sum_sigma sign * (permutation of tensor slots)."""
    m = 2 * n
    N = m ** 3
    out = np.zeros((N, N), dtype=np.int64)
    eye = np.eye(N, dtype=np.int64).reshape((m,) * 3 + (N,))
    for perm, sign in perms_signs:
        out += sign * np.transpose(eye, perm + (3,)).reshape(N, N)
    return out


def pair_symmetrizer(n, a, b, signed=False):
    swap = [0, 1, 2]
    swap[a], swap[b] = swap[b], swap[a]
    return _slot_operator(n, [((0, 1, 2), 1), (tuple(swap), -1 if signed else 1)])


def total_antisymmetrizer(n):
    from .linear import _parity
    return _slot_operator(n, [(p, _parity(p)) for p in itertools.permutations(range(3))])


def _restrict(F, P):
    return P.T.dot(F).dot(P)


def _rank(rows):
    rows = [np.asarray(r, dtype=np.int64).reshape(-1) for r in rows]
    if not rows:
        return 0
    M = np.stack(rows)
    gram = M.dot(M.T)  # rank(M) = rank(M M^T) over the reals
    return _exact.exact_rank(_exact.to_fraction_array(gram))


def _coefficients(basis_rows, row):
    """Exact c with sum c_r basis_r == row, or None; basis rows independent, integer."""
    B = np.stack([np.asarray(r, dtype=np.int64).reshape(-1) for r in basis_rows])
    t = np.asarray(row, dtype=np.int64).reshape(-1)
    gram = _exact.to_fraction_array(B.dot(B.T))
    rhs = _exact.to_fraction_array(B.dot(t))
    coef = list(_exact.exact_inverse(gram).dot(rhs))
    d = lcm(*[c.denominator for c in coef])
    num = np.array([int(c * d) for c in coef], dtype=np.int64)
    if not np.array_equal(num.dot(B), d * t):
        return None
    return coef


def classify_traces(n: int) -> dict:
    """Exact classification of all quadratic symplectic traces for a given n.

    For n > 1 every matching is expressed in the basis r1..r4; for n = 1 the
    span collapses and every matching (and r2, r3, r4) is expressed through r1.
    """
    if n not in (1, 2, 3):
        raise ValueError("classify_traces supports n in {1, 2, 3}")
    matchings = all_matchings()
    forms = {str(m): form_matrix(n, m) for m in matchings}
    r_forms = [form_matrix(n, R_PAIRINGS[k]) for k in ("r1", "r2", "r3", "r4")]
    rank_all = _rank(forms.values())
    rank_r = _rank(r_forms)
    if n > 1:
        basis_names, basis = ["r1", "r2", "r3", "r4"], r_forms
    else:
        basis_names, basis = ["r1"], r_forms[:1]
    table = {}
    for name, F in forms.items():
        coef = _coefficients(basis, F)
        table[name] = None if coef is None else [str(c) for c in coef]
    report = {
        "n": n,
        "matchings": len(matchings),
        "span_rank": rank_all,
        "r_rank": rank_r,
        "basis": basis_names,
        "table": table,
    }
    if n == 1:
        rel = {}
        for k, F in zip(("r2", "r3", "r4"), r_forms[1:]):
            coef = _coefficients(basis, F)
            rel[k] = str(coef[0]) if coef else None
        report["relations"] = rel
        report["r1_nonzero"] = bool(np.any(r_forms[0] != 0))
    report["alt_reductions"] = alt_reduction_checks(n)
    return report


def alt_reduction_checks(n: int) -> dict:
    """Check each vanishing / sign relation among the alternate-label traces exactly."""
    out = {}
    for name, (c, other) in ALT_REDUCTIONS.items():
        F = form_matrix(n, ALT_PAIRINGS[name])
        target = np.zeros_like(F) if other is None else c * form_matrix(n, ALT_PAIRINGS[other])
        out[name] = bool(np.array_equal(F, target))
    return out


def vanishing_checks(n: int) -> dict:
    """Exact statements about restricted spans of the 15 traces.

    * sym_pair_*: Q symmetric in a slot pair kills every trace.
    * skew_pair_*: for n = 1, Q skew in a slot pair kills every trace.
    * skew01_rank: span rank on tensors skew in slots 0,1 (1 when n > 1).
    * skew01_multiples: each trace as a multiple of r(Q) on that subspace.
    * total_skew_r: r(Q) on totally antisymmetric Q (must be 0).
    """
    forms = {str(m): form_matrix(n, m) for m in all_matchings()}
    out = {}
    for a, b in ((0, 1), (0, 2), (1, 2)):
        P = pair_symmetrizer(n, a, b)
        out[f"sym_pair_{a}{b}"] = all(not np.any(_restrict(F, P)) for F in forms.values())
        S = pair_symmetrizer(n, a, b, signed=True)
        out[f"skew_pair_{a}{b}_zero"] = all(not np.any(_restrict(F, S)) for F in forms.values())
    S01 = pair_symmetrizer(n, 0, 1, signed=True)
    restricted = {k: _restrict(F, S01) for k, F in forms.items()}
    out["skew01_rank"] = _rank(restricted.values())
    r_res = _restrict(form_matrix(n, R_PAIRINGS["r2"]), S01)
    mult = {}
    if np.any(r_res):
        for k, F in restricted.items():
            coef = _coefficients([r_res], F)
            mult[k] = None if coef is None else str(coef[0])
    out["skew01_multiples"] = mult
    out["total_skew_r"] = not np.any(_restrict(form_matrix(n, R_PAIRINGS["r2"]), total_antisymmetrizer(n)))
    return out


# -- separating examples -------------------------------------------------------

def sparse_tensor(n: int, entries: dict, exact: bool = True) -> Tensor:
    """Tensor from {(i, j, k) 1-based: value}."""
    sp = standard_space(n, exact=exact)
    comps = sp.zeros(3)
    for idx, val in entries.items():
        comps[tuple(i - 1 for i in idx)] = Fraction(val) if exact else float(val)
    return Tensor(sp, comps)


REFERENCE_EXAMPLES = {
    # reference example, the invariant it is meant to isolate
    "1_113+1_324": ({(1, 1, 3): 1, (3, 2, 4): 1}, "r1"),
    "1_113+1_243": ({(1, 1, 3): 1, (2, 4, 3): 1}, "r3"),
    "1_122+1_434": ({(1, 2, 2): 1, (4, 3, 4): 1}, "r4"),
    "1_132-1_312+1_431-1_341": ({(1, 3, 2): 1, (3, 1, 2): -1, (4, 3, 1): 1, (3, 4, 1): -1}, "r2"),
}


def reference_examples(n: int = 2) -> dict:
    out = {}
    for label, (entries, target) in REFERENCE_EXAMPLES.items():
        vals = r_invariants(sparse_tensor(n, entries))
        others = [v for k, v in zip(("r1", "r2", "r3", "r4"), vals) if k != target]
        out[label] = {
            "target": target,
            "values": dict(zip(("r1", "r2", "r3", "r4"), [str(v) for v in vals])),
            "separates": all(v == 0 for v in others) and vals[int(target[1]) - 1] != 0,
        }
    return out


def find_separating_examples(n: int = 2) -> dict:
    """Brute force: first Q = 1_a + 1_b isolating each of r1..r4 (1-based labels).

    Uses the integer form matrices, r(Q) = q^T F q / 2, so all pairs are
    scored at once; each hit is re-evaluated by direct contraction.
    """
    m = 2 * n
    N = m ** 3
    forms = [form_matrix(n, R_PAIRINGS[k]) for k in ("r1", "r2", "r3", "r4")]
    diag = [np.diag(F) for F in forms]
    a_idx, b_idx = np.triu_indices(N, k=1)
    # value on e_a + e_b, times 2
    vals = np.stack([d[a_idx] + d[b_idx] + 2 * F[a_idx, b_idx] for F, d in zip(forms, diag)])
    nonzero = vals != 0
    found = {}
    labels = list(itertools.product(range(1, m + 1), repeat=3))
    for k, key in enumerate(("r1", "r2", "r3", "r4")):
        hits = np.flatnonzero(nonzero[k] & (nonzero.sum(axis=0) == 1))
        if not hits.size:
            continue
        h = hits[0]
        a, b = labels[a_idx[h]], labels[b_idx[h]]
        value = Fraction(int(vals[k, h]), 2)
        direct = eval_trace(sparse_tensor(n, {a: 1, b: 1}), R_PAIRINGS[key])
        if direct != value:
            raise ArithmeticError(f"form-matrix and direct evaluation disagree for {key}")
        found[key] = {"Q": f"1_{''.join(map(str, a))}+1_{''.join(map(str, b))}", "value": str(value)}
    return found
