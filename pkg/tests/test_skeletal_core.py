from __future__ import annotations

import copy
import json
import math

import numpy as np
import pytest

from conftest import cat_named
from helpers import load_perturbed
from tqft_orbifold import catalog
from tqft_orbifold.skeletal_core import (SchemaError, global_dimension, load_category, s_matrix,
                                         to_document, verify_category, verify_fusion_ring,
                                         verify_modularity, verify_pentagon, verify_ribbon,
                                         verify_spherical)

PHI = (1 + math.sqrt(5)) / 2


@pytest.mark.parametrize("name,rank", [("vec", 1), ("vec_z2", 2), ("fibonacci", 2), ("ising", 3)])
def test_load_rank(name, rank):
    assert cat_named(name).rank == rank


def test_fibonacci_f_matrix():
    cat = cat_named("fibonacci")
    t, u = cat.index("tau"), cat.index("1")
    blk = cat.F[(t, t, t, t)]
    got = np.array([[blk.mat[blk.row_index[(c, 0, 0)], blk.col_index[(d, 0, 0)]]
                     for d in (u, t)] for c in (u, t)])
    want = np.array([[1 / PHI, 1 / math.sqrt(PHI)], [1 / math.sqrt(PHI), -1 / PHI]])
    assert np.allclose(got, want, atol=1e-12)


def test_document_round_trip():
    cat = cat_named("ising")
    again = load_category(json.loads(json.dumps(to_document(cat))))
    assert again.labels == cat.labels
    assert np.allclose(again.dims, cat.dims)
    for key, blk in cat.F.items():
        assert np.allclose(again.F[key].mat, blk.mat)


def test_missing_key_is_schema_error():
    doc = catalog.builtin_document("vec_z2")
    del doc["F"]
    with pytest.raises(SchemaError):
        load_category(doc)


def test_unknown_format_rejected():
    doc = catalog.builtin_document("vec")
    doc["format"] = "fuscat/99"
    with pytest.raises(SchemaError):
        load_category(doc)


@pytest.mark.parametrize("name", catalog.CATEGORY_NAMES)
def test_every_shipped_category_verifies(name):
    reps = verify_category(cat_named(name))
    assert all(r.passed for r in reps), [c.name for r in reps for c in r.checks if not c.passed]
    assert max(r.max_residual for r in reps) < 1e-10


def test_fusion_ring_detects_broken_rigidity():
    cat = cat_named("vec_z2")
    N = cat.N.copy()
    g, u = cat.index("g"), cat.unit
    N[g, g, u] = 0
    rep = verify_fusion_ring(cat.copy(N=N))
    assert not rep.get("unit_and_rigidity").passed
    assert verify_fusion_ring(cat).passed


def test_pentagon_trivial_cocycle_exact():
    assert verify_pentagon(cat_named("vec_z2")).max_residual == 0.0


def test_pentagon_accepts_nontrivial_cocycle():
    cat = cat_named("vec_z2_omega")
    g = cat.index("g")
    blk = cat.F[(g, g, g, g)]
    assert np.allclose(blk.mat, -1)
    assert verify_pentagon(cat).passed


def test_pentagon_flags_fibonacci_perturbation():
    doc = catalog.builtin_document("fibonacci")
    row = next(n for n, r in enumerate(doc["F"])
               if r[:5] == ["tau"] * 5 and r[7] == "tau")
    rep = verify_pentagon(load_perturbed(doc, "F", row))
    assert not rep.passed
    assert rep.max_residual > 1e-3


def test_spherical_dims():
    assert cat_named("fibonacci").dims[1] == pytest.approx(PHI)
    assert verify_spherical(cat_named("vec_z2")).passed


def test_spherical_flags_wrong_dimension():
    doc = catalog.builtin_document("fibonacci")
    doc["dims"]["tau"] = [1.5, 0.0]
    rep = verify_spherical(load_category(doc))
    assert not rep.passed
    assert not rep.get("trace_equals_dims").passed


def test_ribbon_symmetric_and_chi():
    assert verify_ribbon(cat_named("vec_z2")).passed
    assert verify_ribbon(cat_named("vec_z2_chi")).passed


def test_ribbon_flags_trivial_twist_on_fermion():
    doc = catalog.builtin_document("vec_z2_chi")
    doc["twist"]["g"] = [1.0, 0.0]
    rep = verify_ribbon(load_category(doc))
    assert not rep.passed


def test_ribbon_needs_braiding():
    doc = catalog.builtin_document("fibonacci")
    doc.pop("R", None)
    doc.pop("twist", None)
    with pytest.raises(ValueError):
        verify_ribbon(load_category(doc))


@pytest.mark.parametrize("name,value", [("vec", 1.0), ("ising", 4.0), ("fibonacci", 1 + PHI ** 2)])
def test_global_dimension(name, value):
    assert global_dimension(cat_named(name)) == pytest.approx(value)


def test_modularity():
    assert verify_modularity(cat_named("ising")).passed
    assert verify_modularity(cat_named("vec")).passed
    assert not verify_modularity(cat_named("vec_z2")).passed
    S = s_matrix(cat_named("vec_z2"))
    assert np.linalg.matrix_rank(S) == 1


def test_tolerance_override_copy():
    cat = cat_named("ising").copy(tolerance=1e-3)
    assert cat.tolerance == 1e-3
    assert cat_named("ising").tolerance != 1e-3


def test_perturbed_copy_leaves_original():
    doc = catalog.builtin_document("ising")
    before = copy.deepcopy(doc)
    load_perturbed(doc, "F")
    assert doc == before
