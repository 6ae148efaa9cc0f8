"""Acceptance criteria, each at its stated tolerance; one PASS/FAIL line per criterion."""

from fractions import Fraction

import numpy as np

from sympten import connections as cn
from sympten import decomposition as dc
from sympten import invariants as inv
from sympten.chart import load_shipped, scalar_field, vector_field
from sympten.koszul import check_homotopy_on_basis, verify_exactness
from sympten.linear import (Tensor, act, antisymmetrize, random_symplectic, random_tensor,
                            standard_space, symmetrize)
from sympten.verify import standard_chart


def _dev(a, b):
    d = np.asarray(a.components - b.components).reshape(-1)
    if a.exact:
        return max((abs(x) for x in d), default=Fraction(0))
    return float(np.abs(d).max()) if d.size else 0.0


def _finish(record, number, title, failures, detail=""):
    ok = not failures
    record(number, title, ok, detail if ok else "; ".join(failures))
    assert ok, failures


def test_criterion_01_koszul_exactness(record_criterion):
    failures = []
    for n in (1, 2, 3):
        for l in (3, 4):
            rep = verify_exactness(l, n)
            if not rep.passed:
                failures.append(f"exactness l={l} n={n}: {[c for c, ok in rep.checks if not ok]}")
            for p in range(l + 1):
                if not check_homotopy_on_basis(n, p, l - p):
                    failures.append(f"homotopy n={n} p={p} q={l - p}")
    _finish(record_criterion, 1, "Koszul exactness l=3,4 n=1,2,3 and exact homotopy", failures)


def test_criterion_02_projector_identities(record_criterion):
    failures = []
    for n in (1, 2, 3):
        sp = standard_space(n, exact=True)
        basis = dc._basis_tensors
        s3 = basis(sp, 3, 0, (3, 0))
        vec = basis(sp, 1, 0, (1, 0))
        s2v = basis(sp, 2, 1, (2, 1))
        l3 = [antisymmetrize(t, (0, 1, 2)).with_signature((1, 2)) for t in basis(sp, 1, 2, (1, 2))]
        zero3, zero1 = Tensor(sp, sp.zeros(3)), Tensor(sp, sp.zeros(1))
        identities = {
            "pi A1 = Id": [(dc.pi(dc.a1(s)), s) for s in s3],
            "phi xi = Id": [(dc.phi(dc.xi(v)), v) for v in vec],
            "pi xi = 0": [(dc.pi(dc.xi(v)), zero3) for v in vec],
            "phi A1 = 0": [(dc.phi(dc.a1(s)), zero1) for s in s3],
            "eta^2 = eta": [(dc.eta(dc.eta(t)), dc.eta(t)) for t in s2v],
            "chi^2 - chi - 2 = 0": [(dc.chi(dc.chi(t)) - dc.chi(t) - t * 2, zero3) for t in s2v],
            "C A2 = 0": [(dc.c_map(dc.a2(t)), zero1) for t in s2v],
            "C^2 = (n-1) C": [(dc.c_squared(f), dc.c_map(f) * (n - 1)) for f in l3],
        }
        for name, pairs in identities.items():
            worst = max(_dev(a, b) for a, b in pairs)
            if worst != 0:
                failures.append(f"{name} n={n}: {worst}")
    _finish(record_criterion, 2, "projector identities, rational-exact, n=1,2,3", failures)


def test_criterion_03_dimension_census(record_criterion):
    failures = []
    want_eta = {1: 0, 2: 16, 3: 64}
    want_tp = {1: 0, 2: 0, 3: 14}
    seen = []
    for n in (1, 2, 3):
        ranks = dc.projector_ranks(standard_space(n, exact=True))
        parts = ranks["V_L2V"]
        total = 2 * n * (2 * n) * (2 * n - 1) // 2
        seen.append((ranks["S2V_V"]["eta"], parts["Tprime"], sum(parts.values())))
        if ranks["S2V_V"]["eta"] != want_eta[n]:
            failures.append(f"rank eta n={n}: {ranks['S2V_V']['eta']}")
        if parts["Tprime"] != want_tp[n]:
            failures.append(f"rank T' n={n}: {parts['Tprime']}")
        if sum(parts.values()) != total:
            failures.append(f"part ranks n={n} sum {sum(parts.values())} != {total}")
    _finish(record_criterion, 3, "dimension census (eta, T', total)", failures, f"(eta, T', sum) = {seen}")


def test_criterion_04_invariant_classification(record_criterion):
    failures = []
    for n in (2, 3):
        cls = inv.classify_traces(n)
        if cls["span_rank"] != 4 or cls["r_rank"] != 4 or any(v is None for v in cls["table"].values()):
            failures.append(f"n={n}: span {cls['span_rank']}, r-rank {cls['r_rank']}")
    cls1 = inv.classify_traces(1)
    if cls1["span_rank"] != 1 or cls1["relations"] != {"r2": "1", "r3": "-1", "r4": "1"}:
        failures.append(f"n=1 collapse: {cls1['span_rank']}, {cls1.get('relations')}")
    q1 = inv.sparse_tensor(2, {(1, 1, 3): 1, (3, 2, 4): 1})
    alt_r2 = inv.eval_trace(q1, "r_2")
    if alt_r2 != 1:
        failures.append(f"r_2(1_113+1_324) = {alt_r2}, expected 1 (sign convention conflict, see ledger)")
    q2 = inv.sparse_tensor(2, {(1, 3, 2): 1, (3, 1, 2): -1, (4, 3, 1): 1, (3, 4, 1): -1})
    r2p = inv.eval_trace(q2, "r_2'")
    if r2p != 2:
        failures.append(f"r_2'(skew example) = {r2p}, expected 2")
    found = inv.find_separating_examples(2)
    if sorted(found) != ["r1", "r2", "r3", "r4"]:
        failures.append(f"oracle found separating examples only for {sorted(found)}")
    _finish(record_criterion, 4, "invariant classification and separating examples", failures,
            f"r_2 = {alt_r2}, r_2' = {r2p}")


def test_criterion_05_vanishing(record_criterion):
    failures = []
    rng = np.random.default_rng(5)
    for n in (1, 2, 3):
        sp = standard_space(n, exact=True)
        van = inv.vanishing_checks(n)
        if not all(van[f"sym_pair_{a}{b}"] for a, b in ((0, 1), (0, 2), (1, 2))):
            failures.append(f"symmetric pair n={n}")
        if not van["total_skew_r"]:
            failures.append(f"total skew n={n}")
        if n > 1 and (van["skew01_rank"] != 1 or any(v is None for v in van["skew01_multiples"].values())):
            failures.append(f"skew-in-ij proportionality n={n}")
        if n == 1 and not van["skew_pair_01_zero"]:
            failures.append("skew-in-ij n=1 should vanish")
        # direct evaluation on sample tensors
        Qs = symmetrize(random_tensor(sp, 3, rng), (0, 2))
        if any(inv.eval_trace(Qs, m) != 0 for m in inv.all_matchings()):
            failures.append(f"direct symmetric pair n={n}")
        Qa = antisymmetrize(random_tensor(sp, 3, rng), (0, 1, 2))
        if inv.unique_invariant(Qa) != 0:
            failures.append(f"direct total skew n={n}")
        Qk = antisymmetrize(random_tensor(sp, 3, rng), (0, 1))
        if inv.mixed_index_form(Qk) != inv.unique_invariant(Qk, skew_in_first_two=True):
            failures.append(f"mixed-index paths n={n}")
    _finish(record_criterion, 5, "vanishing statements and mixed-index paths, exact", failures)


def _projector_equivariance(n, exact, n_maps=20, seed=6):
    sp = standard_space(n, exact=exact)
    rng = np.random.default_rng(seed + n)
    maps = {"A1": (dc.a1, (3, 0)), "pi": (dc.pi, (2, 1)), "phi": (dc.phi, (2, 1)), "xi": (dc.xi, (1, 0)),
            "eta": (dc.eta, (2, 1)), "chi": (dc.chi, (2, 1)), "A2": (dc.a2, (2, 1)), "C": (dc.c_map, (1, 2))}
    worst = 0
    for k in range(n_maps):
        g = random_symplectic(sp, seed=1000 * seed + 10 * n + k)
        for fn, sig in maps.values():
            t = random_tensor(sp, sum(sig), rng, sig)
            worst = max(worst, _dev(fn(act(g, t).with_signature(sig)), act(g, fn(t))))
        t = random_tensor(sp, 3, rng, (1, 2))
        d1, d0 = dc.decompose_torsion(act(g, t)).parts(), dc.decompose_torsion(t).parts()
        for name in d0:
            worst = max(worst, _dev(d1[name], act(g, d0[name])))
    return worst


def _invariant_invariance(n, exact, n_maps=20, seed=6):
    sp = standard_space(n, exact=exact)
    Q = random_tensor(sp, 3, np.random.default_rng(seed * 7 + n))
    base = inv.r_invariants(Q)
    scale = 1 if exact else max(1.0, max(abs(b) for b in base))
    worst = 0
    for k in range(n_maps):
        g = random_symplectic(sp, seed=2000 * seed + 10 * n + k)
        vals = inv.r_invariants(act(g, Q, covariant=True))
        worst = max([worst] + [abs(a - b) / scale for a, b in zip(vals, base)])
    return worst


def test_criterion_06_equivariance(record_criterion):
    failures = []
    detail = []
    for n in (1, 2, 3):
        for exact in (False, True):
            p = _projector_equivariance(n, exact)
            r = _invariant_invariance(n, exact)
            ok_p = p == 0 if exact else p < 1e-8
            ok_r = r == 0 if exact else r < 1e-8
            if not exact:
                detail.append(f"n={n}: {max(p, r):.1e}")
            if not ok_p:
                failures.append(f"projectors n={n} exact={exact}: {p}")
            if not ok_r:
                failures.append(f"invariants n={n} exact={exact}: {r}")
    _finish(record_criterion, 6, "Sp-equivariance, 20 maps per n, float < 1e-8 and exact", failures,
            "float max " + ", ".join(detail))


def test_criterion_07_tondeur(record_criterion):
    failures = []
    chart = load_shipped("nonclosed_n2")
    c = cn.tondeur(chart=chart)
    rep = cn.tondeur_report(c)
    if not rep["max_nabla_omega"] < 1e-6:
        failures.append(f"nabla omega {rep['max_nabla_omega']}")
    if not rep["max_torsion_minus_domega_over_3"] < 1e-6:
        failures.append(f"T - d omega/3 {rep['max_torsion_minus_domega_over_3']}")
    const = load_shipped("constant_n2")
    rc = cn.tondeur_report(cn.tondeur(chart=const))
    if not rc["max_torsion"] < 1e-10:
        failures.append(f"constant chart torsion {rc['max_torsion']}")
    _finish(record_criterion, 7, "Tondeur connection on shipped non-closed and constant charts", failures,
            f"nabla omega {rep['max_nabla_omega']:.1e}, T - d omega/3 {rep['max_torsion_minus_domega_over_3']:.1e}, "
            f"constant T {rc['max_torsion']:.1e}")


def test_criterion_08_triple_agreement(record_criterion):
    failures = []
    worst = 0.0
    for name in ("nonclosed_n2", "nonclosed_n3"):
        chart = load_shipped(name)
        for seed in range(5):
            c = cn.random_almost_symplectic(chart, seed)
            for x in chart.lattice(1, n_random=6, seed=seed)[1:]:
                v = cn.torsion_invariant_forms(c, x)
                ref = max(abs(v.value), v.scale)
                worst = max(worst, abs(v.mixed - v.value) / ref, abs(v.rho - v.value) / ref)
    if not worst < 1e-9:
        failures.append(f"triple agreement {worst}")
    zero = 0.0
    for closed in (load_shipped("closed_n2"), standard_chart(3, 0.5)):
        for seed in range(3):
            c = cn.make_almost_symplectic(cn.random_affine_connection(closed, 50 + seed))
            for x in closed.lattice(2, seed=seed):
                zero = max(zero, abs(cn.torsion_invariant(c, x)))
    if not zero < 1e-8:
        failures.append(f"closed chart t {zero}")
    _finish(record_criterion, 8, "t triple agreement and t = 0 on closed charts", failures,
            f"relative {worst:.1e}, closed max |t| {zero:.1e}")


def test_criterion_09_variation_formula(record_criterion):
    chart = load_shipped("nonclosed_n2")
    rng = np.random.default_rng(9)
    worst = 0.0
    for k in range(50):
        c = cn.random_almost_symplectic(chart, 900 + k)
        x = chart.lattice(1, n_random=1, seed=k)[1]
        A = cn.random_direction(chart.omega_inv_at(x), rng)
        a, b = cn.invariant_variation(c, A, x), cn.invariant_variation_fd(c, A, x)
        worst = max(worst, abs(a - b) / max(abs(a), 1e-6))
    failures = [] if worst < 1e-5 else [f"relative error {worst}"]
    _finish(record_criterion, 9, "variation formula vs symmetric FD, 50 pairs", failures, f"relative {worst:.1e}")


def test_criterion_10_vectorial_torsion(record_criterion):
    failures = []
    for n in (1, 2, 3):
        sp = standard_space(n)
        e = np.eye(2 * n)
        for i in range(2 * n):
            for j in range(2 * n):
                val = cn.vectorial_contraction(sp, e[i], e[j], check=False)
                want = 2 * (2 * n * n - n - 1) * int(sp.omega[i, j])
                if val != want:
                    failures.append(f"n={n} e{i + 1},e{j + 1}: {val} != {want}")
    ten = cn.vectorial_contraction(standard_space(2), np.eye(4)[0], np.eye(4)[2], check=False)
    if ten != 10:
        failures.append(f"n=2 value {ten}")
    closed = load_shipped("closed_n2")
    f = scalar_field("0.1*x1*x2 + 0.2*sin(x3) + 0.05*x4^2", 4)
    U = vector_field(["x1^2 - 0.3", "0.5 + 0.1*x4", "x3^2 - 0.3", "0.5 + 0.1*x2"], 4)
    v = cn.vectorial_connection(cn.tondeur(chart=closed), U, f)
    dev = max(abs(cn.torsion_invariant(v, x) - cn.vectorial_invariant_expected(closed, U, f, x))
              for x in closed.lattice(2, seed=10))
    if not dev < 1e-6:
        failures.append(f"t of nabla^(U,f) deviation {dev}")
    _finish(record_criterion, 10, "vectorial torsion contraction and t of nabla^(U,f)", failures,
            f"n=2 value {ten:g}, chart deviation {dev:.1e}")


def test_criterion_11_symplectomorphism(record_criterion):
    worst = 0.0
    for name in ("constant_n1", "constant_n2"):
        const = load_shipped(name)
        sp = const.space_at(np.zeros(const.dim))
        for k in range(10):
            c = cn.random_almost_symplectic(const, 1100 + k)
            g = random_symplectic(sp, 1100 + k, scale=0.3)
            pts = [x for x in const.lattice(1, n_random=10, seed=k)[1:] * 0.4 if const.contains(g.matrix @ x)]
            worst = max(worst, cn.pushforward_invariant_check(c, g, pts)["max_invariant_difference"])
    failures = [] if worst < 1e-6 else [f"max |t(phi x) - t(x)| {worst}"]
    _finish(record_criterion, 11, "pointwise symplectomorphism equivariance of t", failures, f"max {worst:.1e}")
