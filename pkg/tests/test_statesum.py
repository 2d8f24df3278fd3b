from __future__ import annotations

import cmath
import copy

import numpy as np
import pytest

from conftest import cat_named, tri_named
from tqft_orbifold import catalog
from tqft_orbifold.skeletal_core import SchemaError, global_dimension
from tqft_orbifold.statesum import (TriangulationError, dual_polyhedron, load_triangulation,
                                    orbifold_state_sum, triangulation_independence, tv_invariant,
                                    tv_state_sum, vertex_functional)

LENS = {"s2xs1": 0, "s3_5tet": 1, "rp3": 2, "l31": 3}


def _doc(name: str) -> dict:
    return copy.deepcopy(catalog.triangulation_document(name))


def _lens_oracle(cat, p: int) -> float:
    """Surgery on a p-framed unknot: ``|sum_i d_i^2 theta_i^p|^2 / dim^2``."""
    z = sum(d * d * cmath.exp(1j * p * cmath.phase(th))
            for d, th in zip(np.asarray(cat.dims, complex), np.asarray(cat.twist, complex)))
    return abs(z) ** 2 / global_dimension(cat).real ** 2


def _hom_count_z2(p: int) -> int:
    return sum(1 for x in range(2) if (p * x) % 2 == 0)


@pytest.mark.parametrize("name", catalog.TRIANGULATION_NAMES)
def test_builtins_are_closed_manifolds(name):
    t = tri_named(name)
    assert t.euler_characteristic == 0
    assert len(t.gluings) == 4 * t.tetrahedra


def test_boundary_simplex_dual_counts():
    t = tri_named("S3_5tet")
    D = dual_polyhedron(t)
    assert D.counts() == (5, 10, 10, 5)
    assert all(r.euler == 1 for r in D.regions)
    assert all(len(r.boundary) == 3 for r in D.regions)


def test_dual_edge_orientation_from_output_to_input():
    t = tri_named("S2xS1")
    D = dual_polyhedron(t)
    for (t1, f1, t2, f2) in D.edges:
        assert not t.is_input(t1, f1)
        assert t.is_input(t2, f2)


def test_unglued_face():
    doc = _doc("S3_2tet")
    doc["gluings"].pop()
    with pytest.raises(TriangulationError, match="unglued face"):
        load_triangulation(doc)


def test_orientation_inconsistency():
    doc = _doc("S3_2tet")
    doc["orient"] = [1, 1]
    with pytest.raises(TriangulationError, match="orientation"):
        load_triangulation(doc)


def test_non_branched_gluing():
    doc = _doc("S3_2tet")
    doc["gluings"][0][4] = [0, 2, 3, 1]
    with pytest.raises(TriangulationError, match="non-branched"):
        load_triangulation(doc)


def test_bad_format_and_self_glue():
    doc = _doc("S3_2tet")
    doc["format"] = "tri3/0"
    with pytest.raises(SchemaError):
        load_triangulation(doc)
    doc = _doc("S3_2tet")
    doc["gluings"][0][2:4] = [0, 0]
    with pytest.raises(SchemaError):
        load_triangulation(doc)


def test_load_from_json_string_and_name():
    import json
    a = load_triangulation(json.dumps(catalog.triangulation_document("rp3")))
    b = load_triangulation("RP3")
    assert a.to_document() == b.to_document()


def test_missing_path():
    with pytest.raises(FileNotFoundError):
        load_triangulation("/nonexistent/tri.json")


def test_vertex_functionals():
    vec, z2, fib = cat_named("vec"), cat_named("vec_z2"), cat_named("fibonacci")
    assert vertex_functional(vec, 1, [0] * 6, [0] * 4) == pytest.approx(1)
    g = z2.index("g")
    # labels (g, g, g, 1, 1, 1) are admissible on every face
    assert vertex_functional(z2, 1, [g, g, g, 0, 0, 0], [0] * 4) == pytest.approx(1)
    t = fib.index("tau")
    phi = (1 + 5 ** 0.5) / 2
    for sign in (1, -1):
        assert vertex_functional(fib, sign, [t] * 6, [0] * 4) == pytest.approx(-1 / phi ** 2)


def test_vertex_functional_inadmissible_is_zero():
    fib = cat_named("fibonacci")
    t = fib.index("tau")
    assert vertex_functional(fib, 1, [t, 0, 0, 0, 0, 0], [0] * 4) == 0


def test_vertex_functional_bad_multiplicity():
    fib = cat_named("fibonacci")
    t = fib.index("tau")
    with pytest.raises(ValueError):
        vertex_functional(fib, 1, [t] * 6, [1, 0, 0, 0])


@pytest.mark.parametrize("name", ["vec_z2", "vec_z2_chi"])
@pytest.mark.parametrize("manifold,p", list(LENS.items()))
def test_z2_against_hom_count(name, manifold, p):
    assert tv_invariant(cat_named(name), tri_named(manifold)) == pytest.approx(
        _hom_count_z2(p) / 2, abs=1e-12)


@pytest.mark.parametrize("name", ["fibonacci", "ising", "ising_minus"])
@pytest.mark.parametrize("manifold,p", list(LENS.items()))
def test_modular_against_surgery(name, manifold, p):
    cat = cat_named(name)
    assert tv_invariant(cat, tri_named(manifold)) == pytest.approx(_lens_oracle(cat, p), abs=1e-12)


def test_twisted_cocycle_kills_rp3():
    assert abs(tv_invariant(cat_named("vec_z2_omega"), tri_named("RP3"))) < 1e-12


def test_ising_rp3_frozen():
    assert tv_invariant(cat_named("ising"), tri_named("RP3")) == pytest.approx(
        0.5 + 0.25 * 2 ** 0.5, abs=1e-12)


def test_jobs_do_not_change_result():
    cat, t = cat_named("fibonacci"), tri_named("S3_5tet")
    a, b = tv_state_sum(cat, t, jobs=1), tv_state_sum(cat, t, jobs=3)
    assert a.value == b.value
    assert (a.admissible, a.visited) == (b.admissible, b.visited)


@pytest.mark.parametrize("name", ["fibonacci", "ising", "vec_z2_omega"])
def test_mirror_is_conjugate(name):
    cat, t = cat_named(name), tri_named("RP3")
    assert tv_invariant(cat, t.mirror()) == pytest.approx(np.conj(tv_invariant(cat, t)), abs=1e-12)


def test_independence_report():
    cat = cat_named("vec_z2")
    assert triangulation_independence(cat, tri_named("S3_5tet"), tri_named("S3_2tet")).passed
    rep = triangulation_independence(cat, tri_named("S3_5tet"), tri_named("S2xS1"))
    assert not rep.passed
    assert rep.max_residual == pytest.approx(0.5)


@pytest.mark.parametrize("name", ["vec_z2_omega", "ising_minus"])
def test_orbifold_sum_matches_on_lens_spaces(name):
    cat = cat_named(name)
    for m in ("RP3", "L31"):
        t = tri_named(m)
        assert abs(orbifold_state_sum(cat, t) - tv_invariant(cat, t)) < 1e-10
