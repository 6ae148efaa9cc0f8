"""Linear connections on a chart with a non-degenerate 2-form.

Index conventions (all 0-based arrays):

* ``gamma[i, j, k] = Gamma^k_{ij}``, so that nabla_{d_i} d_j = Gamma^k_{ij} d_k;
* ``torsion[i, j, k] = T^k_{ij} = Gamma^k_{ij} - Gamma^k_{ji}``;
* ``lowered[i, j, k] = T_{ijk} = T^h_{ij} omega_{hk}``;
* ``omega^{ij}`` is the matrix inverse, omega_{ij} omega^{jq} = delta_i^q;
* endomorphism-valued 1-forms A are stored like gamma: ``A[i, j, h] = A^h_{ij}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .chart import Chart, ChartError, Field
from .decomposition import decompose_torsion
from .linear import SympMap, SympSpace, Tensor

INVARIANT_RTOL = 1e-9


class ConnectionLabError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Connection:
    """Christoffel symbols x -> Gamma^k_{ij}(x) on a chart."""

    chart: Chart
    gamma: Callable
    label: str = ""
    meta: dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return self.chart.dim

    def christoffel(self, x) -> np.ndarray:
        x = self.chart.check_point(x)
        g = np.asarray(self.gamma(x), dtype=float)
        if g.shape != (self.dim,) * 3:
            raise ConnectionLabError("gamma must return a (2n, 2n, 2n) array")
        return g

    def torsion(self, x) -> np.ndarray:
        g = self.christoffel(x)
        return g - np.swapaxes(g, 0, 1)

    def lowered_torsion(self, x) -> np.ndarray:
        return np.einsum("ijh,hk->ijk", self.torsion(x), self.chart.omega_at(x))

    def plus(self, diff: Callable, label: str, chart: Optional[Chart] = None) -> "Connection":
        """Connection with Gamma + diff(x), optionally re-homed on another chart."""
        base = self.gamma
        return Connection(chart or self.chart, lambda x: np.asarray(base(x)) + diff(x), label)


def flat_connection(chart: Chart) -> Connection:
    """The coordinate connection Gamma = 0; torsion-free on any chart."""
    m = chart.dim
    return Connection(chart, lambda x: np.zeros((m, m, m)), "flat")


def connection_from_config(chart: Chart, gamma_spec: dict) -> Connection:
    """Gamma from {"i,j,k": expr} (1-based), meaning Gamma^k_{ij}; missing entries are zero."""
    m = chart.dim
    exprs = np.full((m, m, m), "0", dtype=object)
    for key, text in gamma_spec.items():
        try:
            i, j, k = (int(s) - 1 for s in str(key).split(","))
        except ValueError as exc:
            raise ChartError(f"bad gamma key {key!r}") from exc
        if not all(0 <= a < m for a in (i, j, k)):
            raise ChartError(f"gamma index {key!r} out of range")
        exprs[i, j, k] = text
    fld = Field.from_exprs(exprs, m)
    return Connection(chart, fld.value, "config")


def chart_connection(doc: dict) -> Connection:
    """Chart plus connection from a config; without a "gamma" entry the flat connection is used."""
    chart = Chart.from_config(doc)
    if doc.get("gamma"):
        return connection_from_config(chart, doc["gamma"])
    return flat_connection(chart)


def random_affine_connection(chart: Chart, seed: int, scale: float = 0.5) -> Connection:
    """Gamma(x) = C0 + sum_i x_i C_i with seeded Gaussian coefficients."""
    rng = np.random.default_rng(seed)
    m = chart.dim
    coeffs = scale * rng.standard_normal((m + 1, m, m, m))
    return Connection(chart, lambda x: coeffs[0] + np.tensordot(x, coeffs[1:], axes=1),
                      f"random[{seed}]")


def random_almost_symplectic(chart: Chart, seed: int, scale: float = 0.5) -> Connection:
    return make_almost_symplectic(random_affine_connection(chart, seed, scale))


# -- covariant derivative of omega and the existence construction -----------

def nabla_omega(c: Connection, x) -> np.ndarray:
    """(nabla omega)_{i;jk} = d_i omega_{jk} - Gamma^h_{ij} omega_{hk} - Gamma^h_{ik} omega_{jh}."""
    g = c.christoffel(x)
    w = c.chart.omega_at(x)
    dw = c.chart.d_omega_partials(x)
    return dw - np.einsum("ijh,hk->ijk", g, w) - np.einsum("ikh,jh->ijk", g, w)


def _raise_last(lowered, w_inv):
    # X_{ijk} -> X^h_{ij} with X^h_{ij} omega_{hk} = X_{ijk}
    return np.einsum("ijk,kh->ijh", lowered, w_inv)


def _lower_last(up, w):
    return np.einsum("ijh,hk->ijk", up, w)


def existence_correction(c0: Connection, x) -> np.ndarray:
    """A^h_{ij} with omega(A_X Y, Z) = 1/2 (nabla~_X omega)(Y, Z)."""
    return 0.5 * _raise_last(nabla_omega(c0, x), c0.chart.omega_inv_at(x))


def make_almost_symplectic(c0: Connection) -> Connection:
    """nabla~ + A, with A solved pointwise so that the result preserves omega."""
    out = c0.plus(lambda x: existence_correction(c0, x), f"as({c0.label})")
    out.meta["base"] = c0
    return out


def max_over(points, fn) -> float:
    return float(max(np.abs(fn(x)).max() for x in points))


def is_torsion_free(c: Connection, points, tol: float = 1e-12) -> bool:
    return max_over(points, c.torsion) <= tol


def d_omega(chart: Chart, x, partials: Optional[np.ndarray] = None) -> np.ndarray:
    """(d omega)_{ijk} = d_i omega_{jk} - d_j omega_{ik} + d_k omega_{ij}."""
    dw = chart.d_omega_partials(x) if partials is None else partials
    return dw - np.transpose(dw, (1, 0, 2)) + np.transpose(dw, (1, 2, 0))


def d_omega_fd(chart: Chart, x) -> np.ndarray:
    """d omega from Richardson-extrapolated central differences, independent of the chart's supply."""
    fd = chart.omega.with_derivatives("fd", richardson=True)
    return d_omega(chart, x, fd.partials(chart.check_point(x)))


def tondeur_correction(A_up: np.ndarray, w: np.ndarray, w_inv: np.ndarray,
                       a: float = 2 / 3, b: float = 1 / 3) -> np.ndarray:
    """B^h_{ij} from omega(B_X Y, Z) = a[..] + b[..] with A~_{ijk} = A^h_{ij} omega_{hk}."""
    At = _lower_last(A_up, w)
    Bt = (a * (np.transpose(At, (1, 0, 2)) + np.transpose(At, (1, 2, 0)))
          + b * (np.transpose(At, (2, 0, 1)) + np.transpose(At, (2, 1, 0))))
    return _raise_last(Bt, w_inv)


def tondeur(c0: Optional[Connection] = None, chart: Optional[Chart] = None,
            lattice: int = 3, seed: int = 42, tol: float = 1e-10) -> Connection:
    """Almost symplectic connection whose lowered torsion is d omega / 3.

    ``c0`` must be torsion-free; by default the flat coordinate connection of
    ``chart`` is used.
    """
    if c0 is None:
        if chart is None:
            raise ValueError("give a torsion-free connection or a chart")
        c0 = flat_connection(chart)
    pts = c0.chart.lattice(lattice, seed=seed)
    if not is_torsion_free(c0, pts, tol):
        raise ConnectionLabError("tondeur needs a torsion-free starting connection")

    def correction(x):
        w, wi = c0.chart.omega_at(x), c0.chart.omega_inv_at(x)
        A = existence_correction(c0, x)
        return A + tondeur_correction(A, w, wi)

    out = c0.plus(correction, f"tondeur({c0.label})")
    out.meta["base"] = c0
    return out


def tondeur_report(c: Connection, lattice: int = 3, seed: int = 42) -> dict:
    """Residuals of nabla omega = 0 and T_{ijk} = d omega_{ijk} / 3 on the lattice."""
    pts = c.chart.lattice(lattice, seed=seed)
    nab = max_over(pts, lambda x: nabla_omega(c, x))
    res = max_over(pts, lambda x: c.lowered_torsion(x) - d_omega_fd(c.chart, x) / 3)
    skew = max_over(pts, lambda x: c.lowered_torsion(x) + np.transpose(c.lowered_torsion(x), (2, 1, 0)))
    tors = max_over(pts, c.lowered_torsion)
    return {"points": len(pts), "max_nabla_omega": nab, "max_torsion_minus_domega_over_3": res,
            "max_torsion": tors, "max_skew_defect": skew}


# -- the quadratic invariant ------------------------------------------------

def invariant_from_lowered(T: np.ndarray, w_inv: np.ndarray) -> float:
    """T_{ijk} T_{pql} omega^{ij} omega^{kp} omega^{ql}."""
    return float(np.einsum("ijk,pql,ij,kp,ql->", T, T, w_inv, w_inv, w_inv, optimize=True))


@dataclass
class InvariantValues:
    value: float
    mixed: float
    rho: float
    scale: float

    def agree(self, rtol: float = INVARIANT_RTOL) -> bool:
        ref = max(abs(self.value), 1e-300)
        return (abs(self.mixed - self.value) <= rtol * max(ref, self.scale * 1e-3)
                and abs(self.rho - self.value) <= rtol * max(ref, self.scale * 1e-3))


def invariant_forms(T_up: np.ndarray, w: np.ndarray, w_inv: np.ndarray) -> InvariantValues:
    """t from the defining contraction, the mixed-index form and -rho_{ij} omega^{ij}.

    ``scale`` is the same contraction taken with absolute values, a natural
    magnitude for judging cancellation.
    """
    T = _lower_last(T_up, w)
    t = invariant_from_lowered(T, w_inv)
    cor = float(np.einsum("ijp,qpq,ij->", T_up, T_up, w_inv))
    rho = np.einsum("ijp,pqq->ij", T_up, T_up)
    t_rho = float(-np.einsum("ij,ij->", rho, w_inv))
    a, ai = np.abs(T), np.abs(w_inv)
    scale = float(np.einsum("ijk,pql,ij,kp,ql->", a, a, ai, ai, ai, optimize=True))
    return InvariantValues(t, cor, t_rho, scale)


def torsion_invariant(c: Connection, x, check: bool = True, rtol: float = INVARIANT_RTOL) -> float:
    """t(x) for the torsion of c, with omega taken from c's chart.

    With ``check`` the two alternative contractions are evaluated too and a
    disagreement beyond ``rtol`` raises ArithmeticError.
    """
    w = c.chart.omega_at(x)
    vals = invariant_forms(c.torsion(x), w, np.linalg.inv(w))
    if check and not vals.agree(rtol):
        raise ArithmeticError(f"invariant forms disagree: {vals}")
    return vals.value


def torsion_invariant_forms(c: Connection, x) -> InvariantValues:
    w = c.chart.omega_at(x)
    return invariant_forms(c.torsion(x), w, np.linalg.inv(w))


# -- variation along a ray --------------------------------------------------

def is_valid_direction(A_up: np.ndarray, w: np.ndarray, tol: float = 1e-10) -> bool:
    """omega(A_X Y, Z) must be symmetric in Y, Z."""
    At = _lower_last(A_up, w)
    return float(np.abs(At - np.swapaxes(At, 1, 2)).max()) <= tol * max(1.0, np.abs(At).max())


def random_direction(w_inv: np.ndarray, rng) -> np.ndarray:
    """A^h_{ij} with A~_{ijk} random and symmetric in (j, k)."""
    m = w_inv.shape[0]
    S = rng.standard_normal((m, m, m))
    S = (S + np.swapaxes(S, 1, 2)) / 2
    return _raise_last(S, w_inv)


def _direction_at(A, x):
    return np.asarray(A(x) if callable(A) else A, dtype=float)


def invariant_variation(c: Connection, A, x) -> float:
    """d/ds t(nabla + sA) at s = 0 via the closed formula.

    ``A`` is an array A^h_{ij} (as ``A[i, j, h]``) or a callable of x.
    """
    w = c.chart.omega_at(x)
    A_up = _direction_at(A, x)
    if not is_valid_direction(A_up, w):
        raise ConnectionLabError("direction is not almost symplectic: omega(A_X Y, Z) not symmetric in Y, Z")
    wi = np.linalg.inv(w)
    At = _lower_last(A_up, w)
    T = c.lowered_torsion(x)
    return float(np.einsum("ijk,pql,ij,kp,ql->", 2 * At, T, wi, wi, wi, optimize=True)
                 - np.einsum("qpl,ijk,ij,kp,ql->", At, T, wi, wi, wi, optimize=True))


def invariant_variation_fd(c: Connection, A, x, s: float = 1e-4) -> float:
    """Symmetric difference (t(nabla + sA) - t(nabla - sA)) / 2s."""
    A_up = _direction_at(A, x)
    plus = c.plus(lambda y: s * A_up, "plus")
    minus = c.plus(lambda y: -s * A_up, "minus")
    return (torsion_invariant(plus, x, check=False) - torsion_invariant(minus, x, check=False)) / (2 * s)


# -- gauge transformations and push-forward ---------------------------------

def gauge_transform(c: Connection, g: Field, lattice: int = 3, seed: int = 42,
                    tol: float = 1e-8, validate: bool = True) -> Connection:
    """nabla'_X Y = nabla_X Y - (nabla_X g) g^{-1} Y for a field g(x) of symplectic maps.

    ``g.value(x)[a, b] = g^a_b``. Pointwise symplecticity is checked on the
    lattice; with ``validate`` the output is also checked to preserve omega
    whenever the input does.
    """
    chart = c.chart
    m = chart.dim
    if g.shape != (m, m):
        raise ConnectionLabError(f"g must be a {m}x{m} matrix field")
    pts = chart.lattice(lattice, seed=seed)
    for x in pts:
        gx, w = g.value(x), chart.omega_at(x)
        if np.abs(gx.T @ w @ gx - w).max() > tol * max(1.0, np.abs(w).max()):
            raise ConnectionLabError(f"g is not symplectic at {x.tolist()}")

    def diff(x):
        G = c.christoffel(x)
        gx = g.value(x)
        dg = g.partials(x)
        # (nabla_i g)^a_b = d_i g^a_b + Gamma^a_{ic} g^c_b - g^a_c Gamma^c_{ib}
        ng = dg + np.einsum("ica,cb->iab", G, gx) - np.einsum("ac,ibc->iab", gx, G)
        M = np.einsum("iac,cb->iab", ng, np.linalg.inv(gx))
        return -np.transpose(M, (0, 2, 1))

    out = c.plus(diff, f"gauge({c.label})")
    if validate and max_over(pts, lambda x: nabla_omega(c, x)) <= tol:
        res = max_over(pts, lambda x: nabla_omega(out, x))
        if res > 1e-6:
            raise ArithmeticError(f"gauge transform broke nabla omega = 0 (residual {res:.3g})")
    return out


def shear_gauge(n: int, seed: int, scale: float = 0.3) -> Field:
    """Polynomial field g(x) = [[I, S], [0, I]] [[I, 0], [R, I]] with S(x), R(x) symmetric.

    Symplectic for the standard omega at every x; derivatives are analytic.
    """
    rng = np.random.default_rng(seed)
    m = 2 * n

    def sym_poly():
        out = [[None] * n for _ in range(n)]
        for a in range(n):
            for b in range(a, n):
                c0, c1 = scale * rng.standard_normal(2)
                i, j = rng.integers(1, m + 1, size=2)
                out[a][b] = out[b][a] = f"({c0:.6f} + {c1:.6f}*x{i}*x{j})"
        return out

    S, R = sym_poly(), sym_poly()
    g = [["0"] * m for _ in range(m)]
    for a in range(n):
        for b in range(n):
            sr = " + ".join(f"{S[a][c]}*{R[c][b]}" for c in range(n))
            g[a][b] = f"{int(a == b)} + {sr}"
            g[a][b + n] = S[a][b]
            g[a + n][b] = R[a][b]
            g[a + n][b + n] = str(int(a == b))
    return Field.from_exprs(g, m)


def pushforward_connection(c: Connection, g) -> Connection:
    """(phi.nabla) for phi(x) = g x with g constant; Gamma'(y) = g . Gamma(g^{-1} y)."""
    mat = np.asarray(g.matrix if isinstance(g, SympMap) else g, dtype=float)
    inv = np.linalg.inv(mat)

    def gamma(y):
        G = c.christoffel(inv @ y)
        return np.einsum("kc,abc,ai,bj->ijk", mat, G, inv, inv)

    return Connection(c.chart, gamma, f"push({c.label})")


def _check_symplectomorphism(chart: Chart, mat: np.ndarray, x, tol: float):
    y = mat @ x
    if not chart.contains(y):
        raise ChartError(f"image point {y.tolist()} is outside the chart domain")
    lhs = mat.T @ chart.omega_at(y) @ mat
    if np.abs(lhs - chart.omega_at(x)).max() > tol:
        raise ConnectionLabError("x -> g x does not preserve omega at the sample point")
    return y


def pushforward_invariant_check(c: Connection, g, points, tol: float = 1e-9) -> dict:
    """Compare t of phi.nabla at phi(x) with t of nabla at x, and T^{phi.nabla} with phi.T."""
    mat = np.asarray(g.matrix if isinstance(g, SympMap) else g, dtype=float)
    inv = np.linalg.inv(mat)
    pushed = pushforward_connection(c, mat)
    worst_t, worst_T, rows = 0.0, 0.0, []
    for x in np.atleast_2d(points):
        y = _check_symplectomorphism(c.chart, mat, x, tol)
        t0 = torsion_invariant(c, x)
        t1 = torsion_invariant(pushed, y)
        T_expected = np.einsum("kc,abc,ai,bj->ijk", mat, c.torsion(x), inv, inv)
        worst_t = max(worst_t, abs(t1 - t0))
        worst_T = max(worst_T, float(np.abs(pushed.torsion(y) - T_expected).max()))
        rows.append({"x": x.tolist(), "t": t0, "t_pushed": t1})
    return {"max_invariant_difference": worst_t, "max_torsion_difference": worst_T, "samples": rows}


# -- conformal class ----------------------------------------------------------

def symplectic_gradient(chart: Chart, f: Field, x) -> np.ndarray:
    """grad f with omega(grad f, X) = X(f), i.e. grad f = -omega^{-1} df."""
    return -chart.omega_inv_at(x) @ f.partials(chart.check_point(x))


def conformal_difference(chart: Chart, f: Field, x) -> np.ndarray:
    """A^f[i, j, k] for nabla^f = nabla + A^f: X(f)Y + Y(f)X + omega(X, Y) grad f."""
    m = chart.dim
    df = f.partials(chart.check_point(x))
    eye = np.eye(m)
    G = symplectic_gradient(chart, f, x)
    return (np.einsum("i,jk->ijk", df, eye) + np.einsum("j,ik->ijk", df, eye)
            + np.einsum("ij,k->ijk", chart.omega_at(x), G))


def conformal_connection(c: Connection, f: Field, lattice: int = 3, seed: int = 42,
                         tol: float = 1e-8, validate: bool = True) -> Connection:
    """nabla^f on the chart with omega' = e^{2f} omega.

    With ``validate``, if c preserves omega on the lattice the result is
    checked to preserve omega'.
    """
    chart = c.chart
    new_chart = chart.conformal(f)
    out = c.plus(lambda x: conformal_difference(chart, f, x), f"conf({c.label})", chart=new_chart)
    out.meta.update(base=c, f=f)
    if validate:
        pts = chart.lattice(lattice, seed=seed)
        if max_over(pts, lambda x: nabla_omega(c, x)) <= tol:
            res = max_over(pts, lambda x: nabla_omega(out, x) / np.abs(new_chart.omega_at(x)).max())
            if res > tol:
                raise ArithmeticError(f"nabla^f (e^(2f) omega) != 0 (residual {res:.3g})")
    return out


def conformal_leibniz_check(chart: Chart, f1: Field, f2: Field, x) -> dict:
    """A^{f1 f2} against f1 A^{f2} + f2 A^{f1} at x."""
    lhs = conformal_difference(chart, f1 * f2, x)
    rhs = f1.value(x) * conformal_difference(chart, f2, x) + f2.value(x) * conformal_difference(chart, f1, x)
    return {"max_difference": float(np.abs(lhs - rhs).max()), "scale": float(np.abs(lhs).max())}


# -- vectorial torsion ------------------------------------------------------

def vectorial_torsion_tensor(space: SympSpace, A, W) -> np.ndarray:
    """T^k_{ij} of T(X, Y) = omega(X, Y) A + omega(X, W) Y - omega(Y, W) X, as ``[i, j, k]``."""
    w = np.asarray(space.omega, dtype=float)
    A = np.asarray(A, dtype=float)
    W = np.asarray(W, dtype=float)
    eye = np.eye(space.dim)
    xw = w @ W
    return (np.einsum("ij,k->ijk", w, A) + np.einsum("i,jk->ijk", xw, eye)
            - np.einsum("j,ik->ijk", xw, eye))


def vectorial_contraction(space: SympSpace, A, W, check: bool = True) -> float:
    """Quadratic invariant of the torsion above; equals 2(2n^2 - n - 1) omega(A, W)."""
    w = np.asarray(space.omega, dtype=float)
    wi = np.asarray(space.omega_inv, dtype=float)
    T = _lower_last(vectorial_torsion_tensor(space, A, W), w)
    val = invariant_from_lowered(T, wi)
    if check:
        n = space.n
        expected = 2 * (2 * n * n - n - 1) * float(np.asarray(A, float) @ w @ np.asarray(W, float))
        if abs(val - expected) > 1e-9 * max(1.0, abs(expected)):
            raise ArithmeticError(f"contraction {val} != 2(2n^2-n-1) omega(A, W) = {expected}")
    return val


def is_totally_skew(T_lowered: np.ndarray, tol: float = 1e-12) -> bool:
    scale = max(1.0, float(np.abs(T_lowered).max()))
    for perm in ((1, 0, 2), (0, 2, 1), (2, 1, 0)):
        if np.abs(T_lowered + np.transpose(T_lowered, perm)).max() > tol * scale:
            return False
    return True


def vectorial_difference(chart: Chart, U: Field, x) -> np.ndarray:
    """E^h_{ij} with omega(E_X Y, Z) = 1/2 (omega(X, Y) omega(U, Z) + omega(U, Y) omega(X, Z))."""
    w = chart.omega_at(x)
    u = U.value(x)
    u_low = u @ w
    eye = np.eye(chart.dim)
    return 0.5 * np.einsum("ij,h->ijh", w, u) + 0.5 * np.einsum("j,ih->ijh", u_low, eye)


def vectorial_connection(c: Connection, U: Field, f: Field, lattice: int = 3, seed: int = 42,
                         tol: float = 1e-8) -> Connection:
    """nabla^{U,f}: nabla^f plus the U-term; almost symplectic for omega' = e^{2f} omega.

    Requires c torsion-free with nabla omega = 0 and d omega = 0 on the lattice.
    """
    chart = c.chart
    pts = chart.lattice(lattice, seed=seed)
    if not is_torsion_free(c, pts, tol):
        raise ConnectionLabError("vectorial_connection needs a torsion-free connection")
    if max_over(pts, lambda x: nabla_omega(c, x)) > tol:
        raise ConnectionLabError("vectorial_connection needs nabla omega = 0")
    if max_over(pts, lambda x: d_omega(chart, x)) > tol:
        raise ConnectionLabError("vectorial_connection needs a closed omega")
    conf = conformal_connection(c, f, lattice, seed, tol)
    out = conf.plus(lambda x: vectorial_difference(chart, U, x), f"vect({c.label})")
    out.meta.update(base=c, f=f, U=U)
    res = max_over(pts, lambda x: nabla_omega(out, x) / np.abs(out.chart.omega_at(x)).max())
    if res > 1e-6:
        raise ArithmeticError(f"nabla^(U,f) does not preserve e^(2f) omega (residual {res:.3g})")
    return out


def vectorial_torsion_expected(chart: Chart, U: Field, f: Field, x) -> np.ndarray:
    """omega(X, Y)(2 grad f + U) + 1/2 omega(U, Y) X - 1/2 omega(U, X) Y, with omega the base form."""
    w = chart.omega_at(x)
    u = U.value(x)
    G = symplectic_gradient(chart, f, x)
    u_low = u @ w
    eye = np.eye(chart.dim)
    return (np.einsum("ij,k->ijk", w, 2 * G + u) + 0.5 * np.einsum("j,ik->ijk", u_low, eye)
            - 0.5 * np.einsum("i,jk->ijk", u_low, eye))


def vectorial_invariant_expected(chart: Chart, U: Field, f: Field, x) -> float:
    """2 e^{-2f} (2n^2 - n - 1) U(f)."""
    n = chart.n
    return float(2 * np.exp(-2 * f.value(x)) * (2 * n * n - n - 1) * (U.value(x) @ f.partials(x)))


# -- torsion as a tensor in V (x) Lambda^2 V --------------------------------

def torsion_tensor(c: Connection, x) -> Tensor:
    """T at x as an element of V (x) Lambda^2 V: t[k, a, b] = T^k_{ij} omega^{ia} omega^{jb}."""
    space = c.chart.space_at(x)
    wi = np.asarray(space.omega_inv, dtype=float)
    comps = np.einsum("ijk,ia,jb->kab", c.torsion(x), wi, wi)
    comps = (comps - np.swapaxes(comps, 1, 2)) / 2
    return Tensor(space, comps, (1, 2))


def torsion_parts(c: Connection, x) -> dict:
    """Norms of the four irreducible parts of the torsion at x."""
    dec = decompose_torsion(torsion_tensor(c, x))
    out = {k: v.max_abs() for k, v in dec.parts().items()}
    out["residual"] = dec.recombination_residual
    out["degenerate"] = dec.degenerate
    return out
