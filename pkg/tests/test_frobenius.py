from __future__ import annotations

import numpy as np
import pytest

from conftest import cat_named
from tqft_orbifold import treecalc as tc
from tqft_orbifold.frobenius import (FrobeniusAlgebra, block_matrix_algebra, center_basis,
                                     central_idempotents, column_bimodule, diagonal_algebra,
                                     group_algebra, matrix_algebra, module_dual, morita_decompose,
                                     pair_algebra, regular_module, relative_tensor,
                                     trivial_algebra, verify_frobenius, verify_module)
from tqft_orbifold.orbifold import vect_engine

PHI = (1 + 5 ** 0.5) / 2


def _algebras():
    z2, fib, V = cat_named("vec_z2_chi"), cat_named("fibonacci"), vect_engine()
    t = fib.index("tau")
    return {"trivial": trivial_algebra(fib), "diag3": diagonal_algebra(V, 3),
            "mat2": matrix_algebra(V, 2), "mats12": block_matrix_algebra(V, [1, 2]),
            "group_z2": group_algebra(z2, [0, 1]), "pair_tau": pair_algebra(fib, (t,))}


@pytest.mark.parametrize("key", list(_algebras()))
def test_builtin_algebras_are_special_symmetric_frobenius(key):
    rep = verify_frobenius(_algebras()[key])
    assert rep.passed, [c.name for c in rep.checks if not c.passed]


def test_scaled_product_breaks_axioms():
    A = diagonal_algebra(vect_engine(), 2)
    bad = FrobeniusAlgebra(A.cat, A.carrier, A.mu * 1.1, A.eta, A.delta, A.eps)
    rep = verify_frobenius(bad)
    assert not rep.passed
    assert not rep.get("unit_left").passed


@pytest.mark.parametrize("key,dim", [("trivial", 1), ("diag3", 3), ("mat2", 4), ("mats12", 5),
                                     ("group_z2", 2), ("pair_tau", PHI ** 2)])
def test_algebra_dims(key, dim):
    assert _algebras()[key].dim() == pytest.approx(dim)


def test_pair_algebra_carrier():
    fib = cat_named("fibonacci")
    A = _algebras()["pair_tau"]
    assert sorted(A.carrier) == [fib.unit, fib.index("tau")]


@pytest.mark.parametrize("key,dims", [("diag3", [1, 1, 1]), ("mat2", [4]), ("mats12", [1, 4]),
                                      ("group_z2", [2]), ("pair_tau", [PHI ** 2])])
def test_morita_decompose(key, dims):
    parts = morita_decompose(_algebras()[key], np.random.default_rng(7))
    assert sorted(abs(d) for _, d in parts) == pytest.approx(sorted(dims))
    for sub, _ in parts:
        assert verify_frobenius(sub).passed


def test_center_and_idempotents_of_diagonal():
    A = _algebras()["diag3"]
    assert len(center_basis(A)) == 3
    es = central_idempotents(A, np.random.default_rng(3))
    assert len(es) == 3
    total = es[0] + es[1] + es[2]
    assert total.residual(A.eta) < 1e-10
    for e in es:
        assert tc.compose(A.mu, tc.tensor(e, e)).residual(e) < 1e-10


def test_group_algebra_center_is_one_dimensional_block():
    A = _algebras()["group_z2"]
    assert len(morita_decompose(A)) == 1


def test_regular_module_and_double_dual():
    A = diagonal_algebra(vect_engine(), 2)
    M = regular_module(A)
    assert verify_module(M).passed
    D = module_dual(module_dual(M))
    assert D.carrier == M.carrier
    assert verify_module(D).passed
    assert {a.side for a in module_dual(M).actions} == {"left", "right"}
    assert set(module_dual(M).duality) == {"ev", "coev", "evt", "coevt"}


def test_relative_tensor_over_algebra_is_regular():
    A = diagonal_algebra(vect_engine(), 2)
    M = regular_module(A)
    R = relative_tensor(M, M, A)
    assert sum(R.ranks.values()) == 2
    assert verify_module(R.image).passed
    assert tc.compose(R.projector, R.projector).residual(R.projector) < 1e-10
    assert tc.compose(R.retract, R.embed).residual(tc.identity(A.cat, R.image.carrier)) < 1e-10


def test_relative_tensor_over_unit_is_plain_tensor():
    fib = cat_named("fibonacci")
    one = trivial_algebra(fib)
    M = regular_module(one)
    R = relative_tensor(M, M, one)
    assert R.projector.residual(tc.identity(fib, M.carrier + M.carrier)) < 1e-10


def test_column_bimodule():
    A = diagonal_algebra(vect_engine(), 2)
    X, B = column_bimodule(A, [2, 1])
    assert verify_module(X).passed
    assert X.dim() == pytest.approx(3)
    assert B.dim() == pytest.approx(5)
    assert verify_frobenius(B).passed


def test_module_shape_validation():
    A = diagonal_algebra(vect_engine(), 2)
    M = regular_module(A)
    with pytest.raises(ValueError):
        type(M)(M.cat, M.carrier, [M.actions[0], M.actions[0]])
