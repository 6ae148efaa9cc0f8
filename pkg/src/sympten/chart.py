"""Coordinate charts carrying a non-degenerate 2-form, and the fields that live on them.

A :class:`Field` is a smooth array-valued map on R^{2n}. Fields built from
expression strings differentiate analytically; fields built from Python
callables (or configured with ``derivatives="fd"``) use central differences.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import expr as ex
from .linear import SympSpace

FD_STEP = 1e-5


class ChartError(ValueError):
    pass


class Field:
    """Array-valued map x -> F(x) of a fixed shape on R^dim.

    Parameters
    ----------
    shape : tuple
        Shape of F(x).
    dim : int
        Number of coordinates.
    nodes : object ndarray of expression nodes, optional
        Gives analytic partials when ``derivatives == "analytic"``.
    func : callable, optional
        Used when no nodes are given; partials come from central differences.
    derivatives : {"analytic", "fd"}
    h : float
        Finite-difference step.
    richardson : bool
        Combine steps h and h/2 to cancel the O(h^2) error term.
    """

    def __init__(self, shape, dim: int, nodes=None, func: Optional[Callable] = None,
                 derivatives: str = "analytic", h: float = FD_STEP, richardson: bool = False):
        if (nodes is None) == (func is None):
            raise ValueError("give exactly one of nodes or func")
        if derivatives not in ("analytic", "fd"):
            raise ValueError("derivatives must be 'analytic' or 'fd'")
        self.shape = tuple(shape)
        self.dim = dim
        self.nodes = None
        if nodes is not None:
            nodes = np.asarray(nodes, dtype=object).reshape(self.shape)
            self.nodes = nodes
        self.func = func
        self.derivatives = derivatives if nodes is not None else "fd"
        self.h = h
        self.richardson = richardson
        self._grad = None

    # constructors

    @classmethod
    def from_exprs(cls, exprs, dim: int, shape=None, derivatives: str = "analytic") -> "Field":
        arr = np.empty(np.shape(exprs) if shape is None else shape, dtype=object)
        flat = np.asarray(exprs, dtype=object).reshape(-1)
        for k, e in enumerate(flat):
            arr.reshape(-1)[k] = e if isinstance(e, ex.Node) else ex.parse(e, dim)
        return cls(arr.shape, dim, nodes=arr, derivatives=derivatives)

    @classmethod
    def constant(cls, value, dim: int) -> "Field":
        value = np.asarray(value, dtype=float)
        nodes = np.empty(value.shape, dtype=object)
        for idx, v in np.ndenumerate(value):
            nodes[idx] = ex.Const(float(v))
        return cls(value.shape, dim, nodes=nodes)

    @classmethod
    def from_callable(cls, func: Callable, shape, dim: int, h: float = FD_STEP,
                      richardson: bool = False) -> "Field":
        return cls(shape, dim, func=func, h=h, richardson=richardson)

    @property
    def analytic(self) -> bool:
        return self.derivatives == "analytic"

    def with_derivatives(self, derivatives: str, richardson: bool = False) -> "Field":
        """Same field, other derivative supply."""
        if self.nodes is None:
            if derivatives == "analytic":
                raise ValueError("callable fields have no analytic partials")
            return Field(self.shape, self.dim, func=self.func, h=self.h, richardson=richardson)
        return Field(self.shape, self.dim, nodes=self.nodes, derivatives=derivatives,
                     h=self.h, richardson=richardson)

    # evaluation

    def value(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.nodes is None:
            return np.asarray(self.func(x), dtype=float).reshape(self.shape)
        out = np.empty(self.shape, dtype=float)
        for idx, node in np.ndenumerate(self.nodes):
            out[idx] = node.eval(x)
        return out

    __call__ = value

    def _gradient_nodes(self):
        if self._grad is None:
            grad = np.empty((self.dim,) + self.shape, dtype=object)
            for idx, node in np.ndenumerate(self.nodes):
                for i in range(self.dim):
                    grad[(i,) + idx] = node.diff(i)
            self._grad = grad
        return self._grad

    def _central(self, x, h):
        out = np.empty((self.dim,) + self.shape)
        for i in range(self.dim):
            e = np.zeros(self.dim)
            e[i] = h
            out[i] = (self.value(x + e) - self.value(x - e)) / (2 * h)
        return out

    def partials(self, x) -> np.ndarray:
        """Array D with D[i, ...] = d/dx_i F(x)."""
        x = np.asarray(x, dtype=float)
        if self.analytic:
            grad = self._gradient_nodes()
            out = np.empty(grad.shape)
            for idx, node in np.ndenumerate(grad):
                out[idx] = node.eval(x)
            return out
        d1 = self._central(x, self.h)
        if not self.richardson:
            return d1
        d2 = self._central(x, self.h / 2)
        return (4 * d2 - d1) / 3

    # algebra (stays analytic when both sides are)

    def _combine(self, other, node_op, num_op):
        if not isinstance(other, Field):
            other = Field.constant(np.broadcast_to(np.asarray(other, dtype=float), self.shape), self.dim)
        if self.nodes is not None and other.nodes is not None and self.analytic and other.analytic:
            a, b = np.broadcast_arrays(self.nodes, other.nodes)
            out = np.empty(a.shape, dtype=object)
            for idx in np.ndindex(a.shape):
                out[idx] = node_op(a[idx], b[idx])
            return Field(out.shape, self.dim, nodes=out)
        shape = np.broadcast_shapes(self.shape, other.shape)
        return Field.from_callable(lambda x: num_op(self.value(x), other.value(x)), shape, self.dim,
                                   h=self.h, richardson=self.richardson or other.richardson)

    def __add__(self, other):
        return self._combine(other, ex.add, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, lambda a, b: ex.add(a, ex.neg(b)), np.subtract)

    def __mul__(self, other):
        return self._combine(other, ex.mul, np.multiply)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def exp(self) -> "Field":
        if self.nodes is not None and self.analytic:
            out = np.empty(self.shape, dtype=object)
            for idx, node in np.ndenumerate(self.nodes):
                out[idx] = ex.Func("exp", node)
            return Field(self.shape, self.dim, nodes=out)
        return Field.from_callable(lambda x: np.exp(self.value(x)), self.shape, self.dim,
                                   h=self.h, richardson=self.richardson)

    def sources(self):
        """Expression strings (nested lists), or None for callable fields."""
        if self.nodes is None:
            return None
        return np.vectorize(ex.to_source, otypes=[object])(self.nodes).tolist()


def scalar_field(text, dim: int) -> Field:
    """Scalar field from an expression string such as ``"x1*x2 + sin(x3)"``."""
    return Field.from_exprs(np.array(ex.parse(text, dim), dtype=object).reshape(()), dim, shape=())


def vector_field(texts: Sequence, dim: int) -> Field:
    if len(texts) != dim:
        raise ValueError(f"need {dim} components")
    return Field.from_exprs(list(texts), dim)


def _omega_nodes(spec, m: int):
    """Antisymmetric matrix of nodes from a dict {"i,j": expr}, upper-triangular rows, or a full matrix."""
    nodes = np.empty((m, m), dtype=object)
    nodes[...] = ex.ZERO
    if isinstance(spec, dict):
        for key, text in spec.items():
            i, j = (int(s) - 1 for s in str(key).split(","))
            if not (0 <= i < m and 0 <= j < m) or i == j:
                raise ChartError(f"bad omega index {key!r}")
            node = ex.parse(text, m)
            nodes[i, j] = node
            nodes[j, i] = ex.neg(node)
        return nodes
    rows = list(spec)
    if len(rows) == m and all(len(r) == m for r in rows):
        for i in range(m):
            for j in range(m):
                nodes[i, j] = ex.parse(rows[i][j], m)
        for i in range(m):
            for j in range(i, m):
                a, b = nodes[i, j], nodes[j, i]
                if i == j and not (isinstance(a, ex.Const) and a.value == 0):
                    raise ChartError("omega must have zero diagonal")
                if i != j and str(ex.neg(a)) != str(b):
                    raise ChartError(f"omega entries ({i + 1},{j + 1}) and ({j + 1},{i + 1}) are not opposite")
        return nodes
    if len(rows) == m - 1 and all(len(r) == m - 1 - i for i, r in enumerate(rows)):
        for i, row in enumerate(rows):
            for off, text in enumerate(row):
                j = i + 1 + off
                node = ex.parse(text, m)
                nodes[i, j] = node
                nodes[j, i] = ex.neg(node)
        return nodes
    raise ChartError("omega must be a dict, a list of upper-triangular rows, or a full matrix")


@dataclass(frozen=True, eq=False)
class Chart:
    """Box-shaped coordinate domain in R^{2n} with a 2-form omega(x)."""

    n: int
    domain: tuple
    omega: Field
    name: str = ""
    config: Optional[dict] = field(default=None, repr=False)

    def __post_init__(self):
        m = 2 * self.n
        dom = tuple((float(lo), float(hi)) for lo, hi in self.domain)
        if len(dom) != m or any(lo >= hi for lo, hi in dom):
            raise ChartError(f"domain must be {m} intervals [lo, hi] with lo < hi")
        if self.omega.shape != (m, m) or self.omega.dim != m:
            raise ChartError(f"omega must be a {m}x{m} field over {m} coordinates")
        object.__setattr__(self, "domain", dom)

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def analytic(self) -> bool:
        return self.omega.analytic

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return x.shape == (self.dim,) and all(lo <= v <= hi for v, (lo, hi) in zip(x, self.domain))

    def check_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.contains(x):
            raise ChartError(f"point {x.tolist()} is outside the chart domain")
        return x

    def omega_at(self, x) -> np.ndarray:
        return self.omega.value(self.check_point(x))

    def omega_inv_at(self, x) -> np.ndarray:
        return np.linalg.inv(self.omega_at(x))

    def d_omega_partials(self, x) -> np.ndarray:
        """D[i, j, k] = d_i omega_{jk}."""
        return self.omega.partials(self.check_point(x))

    def space_at(self, x) -> SympSpace:
        return SympSpace.from_omega(self.omega_at(x), exact=False)

    def lattice(self, k: int = 3, n_random: int = 16, seed: int = 42) -> np.ndarray:
        """k^{2n} interior grid points plus ``n_random`` seeded uniform points."""
        axes = [lo + (hi - lo) * (np.arange(k) + 1) / (k + 1) for lo, hi in self.domain]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)
        rng = np.random.default_rng(seed)
        lo = np.array([d[0] for d in self.domain])
        hi = np.array([d[1] for d in self.domain])
        extra = lo + (hi - lo) * rng.random((n_random, self.dim))
        return np.vstack([grid, extra])

    def validate(self, k: int = 3, n_random: int = 16, seed: int = 42, tol: float = 1e-12) -> dict:
        """Check omega(x) is antisymmetric and invertible on the validation lattice."""
        worst_asym, worst_cond = 0.0, 0.0
        for x in self.lattice(k, n_random, seed):
            w = self.omega.value(x)
            scale = max(1.0, np.abs(w).max())
            asym = np.abs(w + w.T).max() / scale
            cond = np.linalg.cond(w)
            if asym > tol:
                raise ChartError(f"omega is not antisymmetric at {x.tolist()}")
            if not np.isfinite(cond) or cond > 1e12:
                raise ChartError(f"omega is degenerate at {x.tolist()}")
            worst_asym = max(worst_asym, asym)
            worst_cond = max(worst_cond, cond)
        return {"points": int(k ** self.dim + n_random), "max_antisymmetry": worst_asym,
                "max_condition": worst_cond}

    def conformal(self, f: Field) -> "Chart":
        """Same domain with omega replaced by e^{2f} omega."""
        return Chart(self.n, self.domain, (f * 2.0).exp() * self.omega, name=f"{self.name}^conformal")

    # configs

    @classmethod
    def from_config(cls, doc: dict) -> "Chart":
        try:
            n = int(doc["n"])
            m = 2 * n
            domain = doc.get("domain", [[-1.0, 1.0]] * m)
            derivs = doc.get("derivatives", "analytic")
            nodes = _omega_nodes(doc["omega"], m)
        except ex.ExprError as exc:
            raise ChartError(f"expression error: {exc}") from exc
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, ChartError):
                raise
            raise ChartError(f"malformed chart config: {exc!r}") from exc
        if derivs not in ("analytic", "fd"):
            raise ChartError("derivatives must be 'analytic' or 'fd'")
        omega = Field((m, m), m, nodes=nodes, derivatives=derivs)
        return cls(n, tuple(tuple(d) for d in domain), omega, name=doc.get("name", ""), config=doc)

    @classmethod
    def load(cls, path) -> "Chart":
        path = Path(path)
        try:
            doc = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ChartError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
        return cls.from_config(doc)

    def to_config(self) -> dict:
        m = self.dim
        src = self.omega.sources()
        if src is None:
            raise ChartError("charts with callable omega cannot be serialized")
        return {
            "name": self.name,
            "n": self.n,
            "domain": [list(d) for d in self.domain],
            "omega": {f"{i + 1},{j + 1}": src[i][j] for i in range(m) for j in range(i + 1, m)
                      if src[i][j] != "0.0"},
            "derivatives": self.omega.derivatives,
        }


def shipped_charts() -> list:
    return sorted(p.name for p in resources.files("sympten.charts").iterdir() if p.name.endswith(".json"))


def load_shipped(name: str) -> Chart:
    """Load one of the chart configs bundled with the package, e.g. ``"nonclosed_n2"``."""
    if not name.endswith(".json"):
        name += ".json"
    res = resources.files("sympten.charts").joinpath(name)
    if not res.is_file():
        raise ChartError(f"no shipped chart named {name!r}; have {shipped_charts()}")
    return Chart.from_config(json.loads(res.read_text()))
