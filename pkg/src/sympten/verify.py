"""Verification suites: each check records its value and the tolerance it was judged at."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import connections as cn
from . import decomposition as dc
from . import invariants as inv
from .chart import Chart, Field, load_shipped, scalar_field, vector_field
from .koszul import check_homotopy_on_basis, homotopy_defect, verify_exactness
from .linear import (Tensor, act, antisymmetrize, random_symplectic, random_tensor,
                     standard_space)

SUITES = ("koszul", "projectors", "invariants", "connections")


@dataclass
class Check:
    name: str
    passed: bool
    value: object = None
    tol: object = 0

    def to_json(self) -> dict:
        val = self.value
        if isinstance(val, Fraction):
            val = str(val)
        elif isinstance(val, (np.floating, np.integer, np.bool_)):
            val = val.item()
        return {"name": self.name, "pass": bool(self.passed), "value": val, "tol": self.tol}


@dataclass
class SuiteReport:
    suite: str
    n_list: list
    mode: str
    checks: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name, passed, value=None, tol=0):
        self.checks.append(Check(name, bool(passed), value, tol))

    def to_json(self) -> dict:
        return {"suite": self.suite, "n": list(self.n_list), "mode": self.mode,
                "pass": self.passed, "seconds": round(self.seconds, 3),
                "checks": [c.to_json() for c in self.checks]}


def _deviation(a: Tensor, b: Tensor) -> object:
    """Exact difference norm (Fraction) in rational mode, float otherwise."""
    d = np.asarray(a.components - b.components).reshape(-1)
    if a.exact:
        return max((abs(x) for x in d), default=Fraction(0))
    return float(np.abs(d).max()) if d.size else 0.0


def _ok(dev, exact, tol):
    return dev == 0 if exact else dev <= tol


# -- koszul -------------------------------------------------------------------

def suite_koszul(n_list, mode="rational", tol=1e-10, seed=42) -> SuiteReport:
    rep = SuiteReport("koszul", n_list, mode)
    rng = np.random.default_rng(seed)
    for n in n_list:
        for l in (3, 4):
            r = verify_exactness(l, n)
            ranks = [s.rank for s in r.stages]
            rep.add(f"exactness l={l} n={n} ranks={ranks}", r.passed, ranks)
            for p in range(l + 1):
                q = l - p
                if mode == "rational":
                    rep.add(f"homotopy on basis p={p} q={q} n={n}", check_homotopy_on_basis(n, p, q), 0)
                else:
                    sp = standard_space(n)
                    t = random_tensor(sp, l, rng, (p, q))
                    dev = homotopy_defect(t).max_abs()
                    rep.add(f"homotopy random p={p} q={q} n={n}", dev <= tol, dev, tol)
    return rep


# -- projectors ---------------------------------------------------------------

def _identity_checks(rep, n, exact, tol):
    sp = standard_space(n, exact=exact)
    basis = dc._basis_tensors
    s3 = basis(sp, 3, 0, (3, 0))
    vec = basis(sp, 1, 0, (1, 0))
    s2v = basis(sp, 2, 1, (2, 1))
    l3 = [antisymmetrize(t, (0, 1, 2)).with_signature((1, 2)) for t in basis(sp, 1, 2, (1, 2))]

    def worst(pairs):
        devs = [_deviation(a, b) for a, b in pairs]
        return max(devs) if devs else 0

    zero1 = lambda t: Tensor(sp, sp.zeros(1))
    zero3s = Tensor(sp, sp.zeros(3))
    checks = {
        "pi A1 = Id": [(dc.pi(dc.a1(s)), s) for s in s3],
        "phi xi = Id": [(dc.phi(dc.xi(v)), v) for v in vec],
        "pi xi = 0": [(dc.pi(dc.xi(v)), Tensor(sp, sp.zeros(3))) for v in vec],
        "phi A1 = 0": [(dc.phi(dc.a1(s)), zero1(s)) for s in s3],
        "eta^2 = eta": [(dc.eta(dc.eta(t)), dc.eta(t)) for t in s2v],
        "chi^2 - chi - 2 = 0": [(dc.chi(dc.chi(t)) - dc.chi(t) - t * 2, zero3s) for t in s2v],
        "C A2 = 0": [(dc.c_map(dc.a2(t)), zero1(t)) for t in s2v],
        "C^2 = (n-1) C on Lambda^3": [(dc.c_squared(f), dc.c_map(f) * (n - 1)) for f in l3],
    }
    for name, pairs in checks.items():
        dev = worst(pairs)
        rep.add(f"{name} (n={n})", _ok(dev, exact, tol), dev, 0 if exact else tol)


def _rank_checks(rep, n, exact):
    sp = standard_space(n, exact=exact)
    ranks = dc.projector_ranks(sp)
    dims = dc.expected_dimensions(n)
    v = ranks["V_L2V"]
    rep.add(f"rank eta = 8/3 (n^3 - n) (n={n})", ranks["S2V_V"]["eta"] == dims["Aprime"],
            ranks["S2V_V"]["eta"], 0)
    rep.add(f"rank A1 pi = dim S^3 V (n={n})", ranks["S2V_V"]["A1pi"] == dims["S3V"], ranks["S2V_V"]["A1pi"], 0)
    rep.add(f"rank xi phi = 2n (n={n})", ranks["S2V_V"]["xiphi"] == dims["V"], ranks["S2V_V"]["xiphi"], 0)
    rep.add(f"rank A' part (n={n})", v["Aprime"] == dims["Aprime"], v["Aprime"], 0)
    rep.add(f"rank T' part = 2/3 n(2n^2-3n-2) (n={n})", v["Tprime"] == dims["Tprime"], v["Tprime"], 0)
    want_vec = dims["V"] if n > 1 else 0
    rep.add(f"rank v (x) omega part (n={n})", v["vec_form"] == want_vec, v["vec_form"], 0)
    rep.add(f"rank vectorial kernel part (n={n})", v["vec_sym"] == dims["V"], v["vec_sym"], 0)
    rep.add(f"ranks sum to dim V (x) Lambda^2 V (n={n})", sum(v.values()) == dims["V_L2V"],
            sum(v.values()), 0)


def _equivariance_checks(rep, n, exact, tol, seed, n_maps=20):
    sp = standard_space(n, exact=exact)
    rng = np.random.default_rng(seed + n)
    maps = {
        "A1": (dc.a1, (3, 0)), "pi": (dc.pi, (2, 1)), "phi": (dc.phi, (2, 1)),
        "xi": (dc.xi, (1, 0)), "eta": (dc.eta, (2, 1)), "chi": (dc.chi, (2, 1)),
        "A2": (dc.a2, (2, 1)), "C": (dc.c_map, (1, 2)),
    }
    parts = ("Aprime", "vec_sym", "Tprime", "vec_form")
    worst = {k: 0 for k in list(maps) + list(parts)}
    for k in range(n_maps):
        g = random_symplectic(sp, seed=seed * 1000 + 17 * n + k)
        for name, (fn, sig) in maps.items():
            t = random_tensor(sp, sum(sig), rng, sig)
            lhs = fn(act(g, t).with_signature(sig))
            rhs = act(g, fn(t))
            worst[name] = max(worst[name], _deviation(lhs, rhs))
        t = random_tensor(sp, 3, rng, (1, 2))
        d1 = dc.decompose_torsion(act(g, t)).parts()
        d0 = dc.decompose_torsion(t).parts()
        for p in parts:
            worst[p] = max(worst[p], _deviation(d1[p], act(g, d0[p])))
    for name, dev in worst.items():
        rep.add(f"Sp-equivariance {name} ({n_maps} maps, n={n})", _ok(dev, exact, tol), dev,
                0 if exact else tol)


def suite_projectors(n_list, mode="rational", tol=1e-8, seed=42) -> SuiteReport:
    rep = SuiteReport("projectors", n_list, mode)
    exact = mode == "rational"
    for n in n_list:
        _identity_checks(rep, n, exact, tol)
        _rank_checks(rep, n, exact)
        # equivariance of every map on 20 random group elements, in both modes
        _equivariance_checks(rep, n, exact, tol, seed)
        for label, t in _sample_torsions(n, exact, seed):
            d = dc.decompose_torsion(t)
            rep.add(f"decomposition recombines ({label}, n={n})",
                    d.recombination_residual == 0 if exact else d.recombination_residual <= 1e-12,
                    d.recombination_residual, 0 if exact else 1e-12)
    return rep


def _sample_torsions(n, exact, seed):
    sp = standard_space(n, exact=exact)
    rng = np.random.default_rng(seed)
    yield "random", random_tensor(sp, 3, rng, (1, 2))
    v = Tensor(sp, sp.basis_vector(0), (1, 0))
    yield "v (x) omega", dc.vector_wedge_omega(v)


# -- invariants -----------------------------------------------------------------

def suite_invariants(n_list, mode="rational", tol=1e-8, seed=42) -> SuiteReport:
    rep = SuiteReport("invariants", n_list, mode)
    exact = mode == "rational"
    for n in n_list:
        cls = inv.classify_traces(n)
        rep.add(f"15 matchings (n={n})", cls["matchings"] == 15, cls["matchings"], 0)
        want = 4 if n > 1 else 1
        rep.add(f"span rank = {want} (n={n})", cls["span_rank"] == want, cls["span_rank"], 0)
        rep.add(f"every matching in span of basis (n={n})",
                all(v is not None for v in cls["table"].values()), None, 0)
        if n == 1:
            rel = cls["relations"]
            ok = rel == {"r2": "1", "r3": "-1", "r4": "1"} and cls["r1_nonzero"]
            rep.add("collapse r1 = r2 = -r3 = r4 (n=1)", ok, rel, 0)
        else:
            rep.add(f"r1..r4 independent (n={n})", cls["r_rank"] == 4, cls["r_rank"], 0)
        rep.add(f"alternate-label reductions (n={n})", all(cls["alt_reductions"].values()),
                cls["alt_reductions"], 0)
        van = inv.vanishing_checks(n)
        rep.add(f"symmetric pair kills all traces (n={n})",
                all(van[f"sym_pair_{a}{b}"] for a, b in ((0, 1), (0, 2), (1, 2))), None, 0)
        rep.add(f"totally antisymmetric Q: r(Q) = 0 (n={n})", van["total_skew_r"], None, 0)
        if n > 1:
            rep.add(f"skew-in-ij Q: every trace a multiple of r(Q) (n={n})",
                    van["skew01_rank"] == 1 and all(v is not None for v in van["skew01_multiples"].values()),
                    van["skew01_rank"], 0)
        else:
            rep.add("skew pair kills all traces (n=1)",
                    all(van[f"skew_pair_{a}{b}_zero"] for a, b in ((0, 1), (0, 2), (1, 2))), None, 0)
        _mixed_form_checks(rep, n, exact, tol, seed)
        _invariance_checks(rep, n, exact, tol, seed)
        if n == 2:
            _example_checks(rep)
    return rep


def _mixed_form_checks(rep, n, exact, tol, seed):
    sp = standard_space(n, exact=exact)
    rng = np.random.default_rng(seed)
    worst = 0
    for _ in range(5):
        Q = antisymmetrize(random_tensor(sp, 3, rng), (0, 1))
        r = inv.eval_trace(Q, "r2")
        worst = max(worst, abs(inv.mixed_index_form(Q) - r))
    rep.add(f"mixed-index and direct paths agree (n={n})", _ok(worst, exact, tol), worst, 0 if exact else tol)


def _invariance_checks(rep, n, exact, tol, seed, n_maps=20):
    sp = standard_space(n, exact=exact)
    rng = np.random.default_rng(seed + 7 * n)
    Q = random_tensor(sp, 3, rng)
    base = inv.r_invariants(Q)
    worst = 0
    for k in range(n_maps):
        g = random_symplectic(sp, seed=seed * 1000 + 31 * n + k)
        vals = inv.r_invariants(act(g, Q, covariant=True))
        worst = max([worst] + [abs(a - b) for a, b in zip(vals, base)])
    if not exact:
        worst = worst / max(1.0, max(abs(b) for b in base))
    rep.add(f"Sp-invariance of r1..r4 ({n_maps} maps, n={n})", _ok(worst, exact, tol), worst,
            0 if exact else tol)


def _example_checks(rep):
    ex = inv.reference_examples(2)
    skew = ex["1_132-1_312+1_431-1_341"]
    rep.add("skew example: r2 (= r_2') = 2", skew["values"]["r2"] == "2", skew["values"]["r2"], 0)
    first = ex["1_113+1_324"]
    rep.add("1_113+1_324 isolates r1 with |value| = 1",
            first["separates"] and abs(Fraction(first["values"]["r1"])) == 1, first["values"]["r1"], 0)
    rep.add("1_122+1_434 isolates r4", ex["1_122+1_434"]["separates"], ex["1_122+1_434"]["values"]["r4"], 0)
    found = inv.find_separating_examples(2)
    rep.add("oracle finds separating examples for r1..r4", sorted(found) == ["r1", "r2", "r3", "r4"],
            {k: v["Q"] for k, v in found.items()}, 0)


# -- connections ------------------------------------------------------------------

def standard_chart(n: int, half_width: float = 1.0) -> Chart:
    m = 2 * n
    w = np.asarray(standard_space(n).omega, dtype=float)
    return Chart(n, tuple((-half_width, half_width) for _ in range(m)), Field.constant(w, m),
                 name=f"standard_n{n}")


def _charts_for(n):
    """(non-closed or None, closed, constant) charts for a given n."""
    if n == 2:
        return load_shipped("nonclosed_n2"), load_shipped("closed_n2"), load_shipped("constant_n2")
    if n == 3:
        return load_shipped("nonclosed_n3"), standard_chart(3, 0.5), standard_chart(3, 0.5)
    return None, load_shipped("constant_n1"), load_shipped("constant_n1")


def _sample_fields(n):
    m = 2 * n
    f = scalar_field(" + ".join(f"0.{k + 1}*x{k + 1}*x{(k + 1) % m + 1}" for k in range(m)) + " + 0.2*sin(x1)", m)
    g = scalar_field(f"0.3*x{m} - 0.1*x1^2 + 0.05*exp(x2)", m)
    U = vector_field([f"0.5 + 0.1*x{(k + 2) % m + 1}" if k % 2 else f"x{k + 1}^2 - 0.3" for k in range(m)], m)
    return f, g, U


def suite_connections(n_list, mode="float", tol=1e-6, seed=42, lattice=3) -> SuiteReport:
    rep = SuiteReport("connections", n_list, "float")
    for n in n_list:
        nonclosed, closed, const = _charts_for(n)
        for ch in {c.name: c for c in (nonclosed, closed, const) if c is not None}.values():
            info = ch.validate(lattice, seed=seed)
            rep.add(f"chart {ch.name} valid", True, info["max_condition"], 1e12)
        _tondeur_checks(rep, n, nonclosed, const, tol, seed, lattice)
        _invariant_checks(rep, n, nonclosed or closed, closed, tol, seed, lattice)
        _group_checks(rep, n, const, tol, seed, lattice)
        _conformal_checks(rep, n, closed, const, tol, seed, lattice)
    return rep


def _tondeur_checks(rep, n, nonclosed, const, tol, seed, lattice):
    if nonclosed is not None:
        c = cn.tondeur(chart=nonclosed, lattice=lattice, seed=seed)
        r = cn.tondeur_report(c, lattice, seed)
        rep.add(f"tondeur {nonclosed.name}: max |nabla omega|", r["max_nabla_omega"] < tol,
                r["max_nabla_omega"], tol)
        rep.add(f"tondeur {nonclosed.name}: max |T - d omega/3|",
                r["max_torsion_minus_domega_over_3"] < tol, r["max_torsion_minus_domega_over_3"], tol)
        rep.add(f"tondeur {nonclosed.name}: lowered torsion totally skew", r["max_skew_defect"] < 1e-12,
                r["max_skew_defect"], 1e-12)
        again = cn.make_almost_symplectic(c)
        pts = nonclosed.lattice(lattice, seed=seed)
        idem = cn.max_over(pts, lambda x: again.christoffel(x) - c.christoffel(x))
        rep.add(f"make_almost_symplectic idempotent ({nonclosed.name})", idem < tol, idem, tol)
    c = cn.tondeur(chart=const, lattice=lattice, seed=seed)
    r = cn.tondeur_report(c, lattice, seed)
    rep.add(f"tondeur {const.name}: torsion", r["max_torsion"] < 1e-10, r["max_torsion"], 1e-10)


def _sample_points(chart, count, seed):
    return chart.lattice(1, n_random=count, seed=seed)[1:]


def _invariant_checks(rep, n, chart, closed, tol, seed, lattice):
    worst = 0.0
    for s in range(5):
        c = cn.random_almost_symplectic(chart, seed + s)
        for x in _sample_points(chart, 6, seed + s):
            v = cn.torsion_invariant_forms(c, x)
            # relative to |t|, floored by the absolute-value contraction (t can vanish identically)
            ref = max(abs(v.value), v.scale)
            worst = max(worst, abs(v.mixed - v.value) / ref, abs(v.rho - v.value) / ref)
    rep.add(f"t triple agreement, relative ({chart.name})", worst < 1e-9, worst, 1e-9)
    zero = 0.0
    pts = closed.lattice(lattice, seed=seed)
    for s in range(3):
        c = cn.random_almost_symplectic(closed, seed + 100 + s)
        zero = max(zero, max(abs(cn.torsion_invariant(c, x)) for x in pts))
    rep.add(f"t = 0 on closed chart {closed.name}", zero < 1e-8, zero, 1e-8)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for s in range(10):
        c = cn.random_almost_symplectic(chart, seed + 200 + s)
        x = _sample_points(chart, 1, seed + 300 + s)[0]
        A = cn.random_direction(chart.omega_inv_at(x), rng)
        a, b = cn.invariant_variation(c, A, x), cn.invariant_variation_fd(c, A, x)
        # floor: the difference quotient carries ~1e-12 roundoff when t vanishes identically (n = 1)
        worst = max(worst, abs(a - b) / max(abs(a), 1e-6))
    rep.add(f"variation formula vs finite difference ({chart.name})", worst < 1e-5, worst, 1e-5)


def _group_checks(rep, n, const, tol, seed, lattice):
    c = cn.random_almost_symplectic(const, seed)
    sp = const.space_at(np.zeros(const.dim))
    worst_t, worst_T = 0.0, 0.0
    for k in range(5):
        g = random_symplectic(sp, seed + k, scale=0.3)
        pts = [x for x in _sample_points(const, 8, seed + k) * 0.4
               if const.contains(g.matrix @ x)]
        r = cn.pushforward_invariant_check(c, g, pts)
        worst_t = max(worst_t, r["max_invariant_difference"])
        worst_T = max(worst_T, r["max_torsion_difference"])
    rep.add(f"t of pushed connection at phi(x) = t at x ({const.name})", worst_t < tol, worst_t, tol)
    rep.add(f"T of pushed connection = phi . T ({const.name})", worst_T < 1e-10, worst_T, 1e-10)
    if const.name.startswith(("constant", "standard")) and np.allclose(sp.omega, standard_space(n).omega):
        worst = 0.0
        for k in range(3):
            out = cn.gauge_transform(c, cn.shear_gauge(n, seed + k), lattice=lattice, seed=seed)
            worst = max(worst, cn.max_over(const.lattice(lattice, seed=seed), lambda x: cn.nabla_omega(out, x)))
        rep.add(f"gauge transform keeps nabla omega = 0 ({const.name})", worst < tol, worst, tol)


def _conformal_checks(rep, n, closed, const, tol, seed, lattice):
    f, g, U = _sample_fields(n)
    c = cn.random_almost_symplectic(const, seed)
    pts = _sample_points(const, 8, seed) * 0.5
    c_fg = cn.conformal_connection(cn.conformal_connection(c, f), g)
    c_sum = cn.conformal_connection(c, f + g)
    trans = max(np.abs(c_fg.christoffel(x) - c_sum.christoffel(x)).max() for x in pts)
    rep.add(f"conformal transitivity (n={n})", trans < 1e-12, trans, 1e-12)
    cf = cn.conformal_connection(c, f)
    tor = max(np.abs(cf.torsion(x) - c.torsion(x)
                     - 2 * np.einsum("ij,k->ijk", const.omega_at(x), cn.symplectic_gradient(const, f, x))).max()
              for x in pts)
    rep.add(f"T^f = T + 2 omega grad f (n={n})", tor < 1e-12, tor, 1e-12)
    lei = max(cn.conformal_leibniz_check(const, f, g, x)["max_difference"] for x in pts)
    rep.add(f"Leibniz rule for A^f (n={n})", lei < 1e-8, lei, 1e-8)
    base = cn.tondeur(chart=closed, lattice=lattice, seed=seed)
    v = cn.vectorial_connection(base, U, f, lattice=lattice, seed=seed)
    cpts = _sample_points(closed, 8, seed + 1)
    dev_T = max(np.abs(v.torsion(x) - cn.vectorial_torsion_expected(closed, U, f, x)).max() for x in cpts)
    rep.add(f"vectorial torsion formula ({closed.name})", dev_T < 1e-10, dev_T, 1e-10)
    dev_t = max(abs(cn.torsion_invariant(v, x) - cn.vectorial_invariant_expected(closed, U, f, x))
                for x in cpts)
    rep.add(f"t of nabla^(U,f) = 2 e^(-2f) (2n^2-n-1) U(f) ({closed.name})", dev_t < tol, dev_t, tol)
    parts = [cn.torsion_parts(v, x) for x in cpts]
    bad = max(max(p["Aprime"], p["Tprime"]) for p in parts)
    rep.add(f"vectorial torsion has no A' or T' part ({closed.name})", bad < 1e-10, bad, 1e-10)
    sp = standard_space(n)
    e = np.eye(2 * n)
    worst = 0.0
    for i in range(2 * n):
        for j in range(2 * n):
            val = cn.vectorial_contraction(sp, e[i], e[j], check=False)
            want = 2 * (2 * n * n - n - 1) * float(sp.omega[i, j])
            worst = max(worst, abs(val - want))
    rep.add(f"vectorial contraction = 2(2n^2-n-1) omega(A, W) on basis (n={n})", worst < 1e-12, worst, 1e-12)
    rng = np.random.default_rng(seed)
    A = rng.standard_normal(2 * n)
    skew = cn.is_totally_skew(np.einsum("ijh,hk->ijk", cn.vectorial_torsion_tensor(sp, A, -A), sp.omega))
    rep.add(f"W = -A gives totally skew torsion (n={n})", skew, skew, 0)


# -- driver -----------------------------------------------------------------------

_RUNNERS = {"koszul": suite_koszul, "projectors": suite_projectors,
            "invariants": suite_invariants, "connections": suite_connections}


def run_suite(suite: str, n_list, mode=None, tol=None, seed=42, lattice=3) -> list:
    """Run one suite (or "all") and return a list of SuiteReports."""
    if suite == "all":
        names = SUITES
    elif suite in _RUNNERS:
        names = (suite,)
    else:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES + ('all',))}")
    for n in n_list:
        if n not in (1, 2, 3):
            raise ValueError("exhaustive suites support n in {1, 2, 3}")
    out = []
    for name in names:
        t0 = time.perf_counter()
        if name == "connections":
            rep = suite_connections(n_list, tol=tol or 1e-6, seed=seed, lattice=lattice)
        else:
            m = mode or "rational"
            kwargs = {"mode": m, "seed": seed}
            if tol is not None:
                kwargs["tol"] = tol
            rep = _RUNNERS[name](n_list, **kwargs)
        rep.seconds = time.perf_counter() - t0
        out.append(rep)
    return out
