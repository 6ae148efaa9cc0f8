from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sympten import invariants as inv
from sympten.linear import Tensor, act, antisymmetrize, random_symplectic, random_tensor, standard_space, symmetrize


def test_fifteen_matchings():
    ms = inv.all_matchings()
    assert len(ms) == 15
    assert len({m.pairs for m in ms}) == 15
    assert sorted(m.canonical_name for m in ms if m.canonical_name) == ["r1", "r2", "r3", "r4"]


def test_pairing_parse_and_canonical():
    p = inv.TracePairing.parse("ki jp ql")
    sign, c = p.canonical()
    assert sign == -1 and str(c) == "ik jp ql"
    with pytest.raises(inv.PairingError):
        inv.TracePairing.parse("ij ik pl")
    with pytest.raises(inv.PairingError):
        inv.TracePairing.parse("ijk pq")


def test_reversed_pair_flips_sign(rng):
    Q = random_tensor(standard_space(2), 3, rng)
    a = inv.eval_trace(Q, "ik jp ql")
    b = inv.eval_trace(Q, "ki jp ql")
    assert np.isclose(a, -b)


@pytest.mark.parametrize("n", [2, 3])
def test_classification_rank_four(n):
    cls = inv.classify_traces(n)
    assert cls["span_rank"] == 4 and cls["r_rank"] == 4
    assert all(v is not None for v in cls["table"].values())
    assert all(cls["alt_reductions"].values())


def test_classification_collapse_n1():
    cls = inv.classify_traces(1)
    assert cls["span_rank"] == 1
    assert cls["relations"] == {"r2": "1", "r3": "-1", "r4": "1"}
    assert cls["r1_nonzero"]


def test_quadratic_scaling(rng):
    sp = standard_space(2, exact=True)
    Q = random_tensor(sp, 3, rng)
    lam = Fraction(-3, 2)
    for name in ("r1", "r2", "r3", "r4"):
        assert inv.eval_trace(Q * lam, name) == lam * lam * inv.eval_trace(Q, name)


def test_exact_matches_float(rng):
    sp = standard_space(2, exact=True)
    Q = random_tensor(sp, 3, rng)
    exact = inv.r_invariants(Q)
    Qf = Tensor(standard_space(2), np.asarray(Q.components, dtype=float))
    for a, b in zip(exact, inv.r_invariants(Qf)):
        assert isinstance(a, Fraction)
        assert abs(float(a) - b) < 1e-9 * max(1, abs(b))


def test_symmetric_pair_kills_everything():
    sp = standard_space(2, exact=True)
    rng = np.random.default_rng(4)
    for slots in ((0, 1), (0, 2), (1, 2)):
        Q = symmetrize(random_tensor(sp, 3, rng), slots)
        for m in inv.all_matchings():
            assert inv.eval_trace(Q, m) == 0


def test_totally_antisymmetric_r_zero():
    sp = standard_space(3, exact=True)
    Q = antisymmetrize(random_tensor(sp, 3, np.random.default_rng(5)), (0, 1, 2))
    assert inv.unique_invariant(Q) == 0


def test_skew_pair_traces_proportional():
    van = inv.vanishing_checks(2)
    assert van["skew01_rank"] == 1
    assert all(v is not None for v in van["skew01_multiples"].values())
    assert van["total_skew_r"]


def test_mixed_index_paths_agree():
    sp = standard_space(2, exact=True)
    Q = antisymmetrize(random_tensor(sp, 3, np.random.default_rng(6)), (0, 1))
    r = inv.unique_invariant(Q, skew_in_first_two=True)
    assert r == inv.mixed_index_form(Q)


def test_unique_invariant_rejects_non_skew(rng):
    Q = random_tensor(standard_space(2), 3, rng)
    with pytest.raises(inv.SkewnessError):
        inv.unique_invariant(Q, skew_in_first_two=True)


def test_separating_examples_n2():
    ex = inv.reference_examples(2)
    first = ex["1_113+1_324"]
    assert first["separates"] and abs(Fraction(first["values"]["r1"])) == 1
    assert ex["1_122+1_434"]["separates"]
    skew = ex["1_132-1_312+1_431-1_341"]["values"]
    assert skew["r2"] == "2" and skew["r3"] == "2"
    # the r3 reference example does not isolate r3; it also has nonzero r2
    dup = ex["1_113+1_243"]
    assert not dup["separates"] and dup["values"]["r2"] == "1" and dup["values"]["r3"] == "-1"


def test_oracle_separating_examples():
    found = inv.find_separating_examples(2)
    assert sorted(found) == ["r1", "r2", "r3", "r4"]
    for key, hit in found.items():
        labels = hit["Q"].split("+")
        entries = {tuple(int(c) for c in lab[2:]): 1 for lab in labels}
        vals = dict(zip(("r1", "r2", "r3", "r4"), inv.r_invariants(inv.sparse_tensor(2, entries))))
        assert vals[key] != 0
        assert all(v == 0 for k, v in vals.items() if k != key)


def test_invariance_exact():
    sp = standard_space(2, exact=True)
    Q = random_tensor(sp, 3, np.random.default_rng(8))
    base = inv.r_invariants(Q)
    for k in range(3):
        g = random_symplectic(sp, k)
        assert inv.r_invariants(act(g, Q, covariant=True)) == base


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 3))
def test_invariance_float(seed, n):
    sp = standard_space(n)
    Q = random_tensor(sp, 3, np.random.default_rng(seed))
    g = random_symplectic(sp, seed)
    a = np.array(inv.r_invariants(Q))
    b = np.array(inv.r_invariants(act(g, Q, covariant=True)))
    assert np.abs(a - b).max() <= 1e-8 * max(1.0, np.abs(a).max())
