from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sympten.koszul import (KoszulSignatureError, basis_indices, check_homotopy,
                            check_homotopy_on_basis, homotopy_defect, koszul_A, koszul_B,
                            space_dim, verify_exactness)
from sympten.linear import Tensor, outer, random_tensor, standard_space, symmetrize


def test_space_dim():
    assert space_dim(1, 2, 1) == 3 * 2
    assert space_dim(2, 3, 0) == 20
    assert space_dim(2, 0, 4) == 1
    assert len(basis_indices(2, 2, 1)) == space_dim(2, 2, 1)


def test_stage_dims_l3_n2():
    r = verify_exactness(3, 2)
    dims = [r.stages[0].source_dim] + [s.target_dim for s in r.stages]
    assert dims == [20, 40, 24, 4]
    assert r.passed


@pytest.mark.parametrize("l", [3, 4])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_exactness(l, n):
    r = verify_exactness(l, n)
    assert r.passed, r.to_json()
    assert r.stages[0].rank == r.stages[0].source_dim


def test_exactness_rejects_unsupported():
    with pytest.raises(ValueError):
        verify_exactness(5, 2)
    with pytest.raises(ValueError):
        verify_exactness(3, 4)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_homotopy_on_basis(n):
    for l in (3, 4):
        for p in range(l + 1):
            assert check_homotopy_on_basis(n, p, l - p)


def test_a_on_product_of_three_vectors():
    # A(u1 u2 u3) = sum_i (product without u_i) (x) u_i
    sp = standard_space(1, exact=True)
    rng = np.random.default_rng(3)
    u = [Tensor(sp, np.array([Fraction(int(x)) for x in rng.integers(-3, 4, 2)], dtype=object)) for _ in range(3)]
    prod = symmetrize(outer(outer(u[0], u[1]), u[2]), (0, 1, 2)).with_signature((3, 0))
    got = koszul_A(prod)
    want = sp.zeros(3)
    for i in range(3):
        a, b = [u[j] for j in range(3) if j != i]
        want = want + symmetrize(outer(outer(a, b), u[i]), (0, 1)).components
    assert np.all(got.components == want)
    assert got.signature == (2, 1)


def test_b_on_v_wedge_omega():
    from sympten.decomposition import vector_wedge_omega, xi
    sp = standard_space(2, exact=True)
    v = Tensor(sp, sp.basis_vector(1), (1, 0))
    b = koszul_B(vector_wedge_omega(v))
    assert np.all(b.components == xi(v).components * (-(2 * 2 + 1)))


def test_a_composite_vanishes(rng):
    sp = standard_space(2)
    t = random_tensor(sp, 3, rng, (3, 0))
    assert koszul_A(koszul_A(t)).is_zero(1e-12)


def test_end_maps_are_zero(rng):
    sp = standard_space(1)
    t = random_tensor(sp, 3, rng, (0, 3))
    assert koszul_A(t).is_zero()
    s = random_tensor(sp, 3, rng, (3, 0))
    assert koszul_B(s).is_zero()


def test_signature_required(rng):
    t = random_tensor(standard_space(1), 3, rng)
    with pytest.raises(KoszulSignatureError):
        koszul_A(t)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 2), st.integers(0, 4), st.integers(0, 10 ** 6))
def test_homotopy_random(n, p, seed):
    rng = np.random.default_rng(seed)
    q = 4 - p if p <= 4 else 0
    assert check_homotopy(n, p, q, rng, exact=False)


def test_homotopy_random_exact():
    rng = np.random.default_rng(0)
    sp = standard_space(2, exact=True)
    t = random_tensor(sp, 3, rng, (1, 2))
    assert homotopy_defect(t).is_zero(0)
