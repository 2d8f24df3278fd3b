from __future__ import annotations

import numpy as np
import pytest

from conftest import cat_named
from helpers import basis_sum, identity_sample, property_categories
from tqft_orbifold import treecalc as tc
from tqft_orbifold.frobenius import group_algebra

SEED = 1234


def test_hom_dims():
    z2, fib = cat_named("vec_z2"), cat_named("fibonacci")
    u, t = fib.unit, fib.index("tau")
    assert tc.hom_dim(z2, ((z2.unit,),), ((z2.unit,),)) == 1
    assert tc.hom_dim(fib, ((t,), (t,)), ((t,),)) == 1
    assert tc.hom_dim(fib, ((t,), (t,), (t,)), ((t,),)) == 2
    A = group_algebra(z2, [0, 1]).word
    assert tc.hom_dim(z2, A + A, A) == 4
    assert tc.hom_dim(fib, ((u,),), ((t,),)) == 0


def test_pairing_normalization():
    fib = cat_named("fibonacci")
    t = fib.index("tau")
    f = tc.compose(tc.fusion_vertex(fib, t, t, t), tc.hat_vertex(fib, t, t, t))
    assert f.residual(tc.identity(fib, ((t,),)) * (1 / fib.dims[t])) < 1e-12


def test_inadmissible_vertex_rejected():
    fib = cat_named("fibonacci")
    with pytest.raises(ValueError):
        tc.fusion_vertex(fib, fib.unit, fib.unit, fib.index("tau"))


@pytest.mark.parametrize("name", ["fibonacci", "ising"])
def test_identity_and_associativity(name):
    cat = cat_named(name)
    rng = np.random.default_rng(SEED)
    s = cat.rank - 1
    W = ((s,), (s,))
    f, g, h = (tc.random_morphism(cat, W, W, rng) for _ in range(3))
    assert tc.compose(tc.identity(cat, W), f).residual(f) < 1e-12
    lhs = tc.compose(tc.compose(f, g), h)
    rhs = tc.compose(f, tc.compose(g, h))
    assert lhs.residual(rhs) < 1e-9


def test_f_move_round_trip_fibonacci():
    fib = cat_named("fibonacci")
    t = fib.index("tau")
    W = ((t,), (t,), (t,))
    Y, iota, pi = tc.fuse(fib, W)
    assert tc.compose(pi, iota).residual(tc.identity(fib, (Y,))) < 1e-12
    assert tc.compose(iota, pi).residual(tc.identity(fib, W)) < 1e-12


def test_tensor_identities_and_interchange():
    cat = cat_named("ising")
    rng = np.random.default_rng(SEED)
    s, p = cat.index("sigma"), cat.index("psi")
    X, Y = ((s,),), ((s,), (p,))
    assert tc.tensor(tc.identity(cat, X), tc.identity(cat, Y)).residual(
        tc.identity(cat, X + Y)) < 1e-12
    f1, g1 = tc.random_morphism(cat, X, X, rng), tc.random_morphism(cat, Y, Y, rng)
    f2, g2 = tc.random_morphism(cat, X, X, rng), tc.random_morphism(cat, Y, Y, rng)
    lhs = tc.compose(tc.tensor(f1, g1), tc.tensor(f2, g2))
    rhs = tc.tensor(tc.compose(f1, f2), tc.compose(g1, g2))
    assert lhs.residual(rhs) < 1e-9


def test_unit_tensor_unit_of_algebra():
    z2 = cat_named("vec_z2")
    A = group_algebra(z2, [0, 1])
    ee = tc.tensor(A.eta, A.eta)
    assert ee.src == () and ee.tgt == A.word + A.word
    assert ee.nnz == 1


def test_vec_engine_is_matrix_algebra():
    from tqft_orbifold.orbifold import vect_engine
    V = vect_engine()
    rng = np.random.default_rng(SEED)
    a, b = rng.normal(size=(3, 2)), rng.normal(size=(2, 4))
    W2, W3, W4 = ((0,) * 2,), ((0,) * 3,), ((0,) * 4,)
    fa = tc.Morphism(V, W2, W3, {0: a})
    fb = tc.Morphism(V, W4, W2, {0: b})
    assert np.allclose(tc.compose(fa, fb).dense(0), a @ b)
    assert np.allclose(tc.tensor(fa, fb).dense(0), np.kron(a, b))


def test_braid_inverse_and_chi():
    cat = cat_named("vec_z2_chi")
    g = cat.index("g")
    W = ((g,), (g,))
    c = tc.braid(cat, W, 0)
    assert np.allclose(c.dense(cat.unit), -1)
    assert tc.compose(tc.braid(cat, W, 0, over=False), c).residual(tc.identity(cat, W)) < 1e-12


def test_braid_without_data():
    fib = cat_named("fibonacci").copy(R=None, twist=None)
    with pytest.raises(ValueError):
        tc.braid(fib, ((1,), (1,)), 0)


def test_yang_baxter_ising():
    cat = cat_named("ising")
    s = cat.index("sigma")
    W = ((s,), (s,), (s,))
    lhs = tc.compose_all(tc.braid(cat, W, 0), tc.braid(cat, W, 1), tc.braid(cat, W, 0))
    rhs = tc.compose_all(tc.braid(cat, W, 1), tc.braid(cat, W, 0), tc.braid(cat, W, 1))
    assert lhs.residual(rhs) < 1e-10


def test_fold_unfold_round_trip():
    cat = cat_named("fibonacci")
    rng = np.random.default_rng(SEED)
    t = cat.index("tau")
    f = tc.random_morphism(cat, ((t,),), ((t,), (t,)), rng)
    for side in ("left", "right"):
        assert tc.unfold(tc.fold(f, side), side).residual(f) < 1e-10


def test_traces():
    fib = cat_named("fibonacci")
    t = fib.index("tau")
    assert tc.trace(tc.identity(fib, ((t,),))) == pytest.approx(fib.dims[t])
    ising = cat_named("ising")
    s = ising.index("sigma")
    W = ((s,), (s,))
    assert tc.trace(tc.identity(ising, W)) == pytest.approx(2.0)


def test_completeness_ising_sigma_sigma():
    cat = cat_named("ising")
    s = cat.index("sigma")
    assert basis_sum(cat, s, s).residual(tc.identity(cat, ((s,), (s,)))) < 1e-12


def test_channel_projector_trace():
    cat = cat_named("ising")
    s, p = cat.index("sigma"), cat.index("psi")
    proj = tc.compose(tc.hat_vertex(cat, s, s, p), tc.fusion_vertex(cat, s, s, p)) * cat.dims[p]
    assert tc.trace(proj) == pytest.approx(cat.dims[p])


@pytest.mark.parametrize("name,cat", property_categories(), ids=lambda x: x if isinstance(x, str) else "")
def test_tree_identities_random(name, cat):
    rng = np.random.default_rng(SEED)
    for _ in range(100):
        for key, r in identity_sample(cat, rng).items():
            assert r < 1e-9, (name, key, r)


def test_snake_residual_direct_sum():
    cat = cat_named("ising")
    assert tc.snake_residual(cat, (0, 1, 2)) < 1e-12


def test_morphism_json_round_trip():
    cat = cat_named("fibonacci")
    rng = np.random.default_rng(SEED)
    t = cat.index("tau")
    f = tc.random_morphism(cat, ((t,), (t,)), ((t,), (t,)), rng)
    assert tc.Morphism.from_dict(cat, f.to_dict()).residual(f) == 0.0


def test_compose_word_mismatch():
    cat = cat_named("fibonacci")
    t = cat.index("tau")
    with pytest.raises(ValueError):
        tc.compose(tc.identity(cat, ((t,),)), tc.identity(cat, ((t,), (t,))))
