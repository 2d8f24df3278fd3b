from __future__ import annotations

import json

import numpy as np
import pytest

from conftest import cat_named
from helpers import perturbed_document
from tqft_orbifold import catalog
from tqft_orbifold import treecalc as tc
from tqft_orbifold.frobenius import (column_bimodule, group_algebra, matrix_algebra, module_dual,
                                     pair_algebra, regular_module)
from tqft_orbifold.orbifold import (CONDITIONS, PrecheckError, check_T_compatible_iso,
                                    datum_from_dict, datum_to_dict, from_commutative_frobenius,
                                    from_crossed_extension, from_spherical_category, induce_psi,
                                    morita_transport, psi_power, psi_ratio_residuals,
                                    round_trip_iso, vect_engine, verify_orbifold_datum)
from tqft_orbifold.skeletal_core import global_dimension

M_TY = {"1": "1", "-1": "X"}


def _spherical(name):
    return from_spherical_category(cat_named(name))[1]


@pytest.mark.parametrize("name,dim", [("vec", 1), ("vec_z2", 4), ("fibonacci", 5), ("ising", 10)])
def test_T_dimension_counts_admissible_triples(name, dim):
    d = _spherical(name)
    cat = cat_named(name)
    admissible = int(np.count_nonzero(cat.N))
    assert d.T.dim() == pytest.approx(dim) == admissible


@pytest.mark.parametrize("name", ["vec", "vec_z2", "fibonacci", "ising"])
def test_phi2_is_inverse_global_dimension(name):
    assert _spherical(name).phi2 == pytest.approx(1 / global_dimension(cat_named(name)))


def test_psi_squared_is_dimension():
    cat = cat_named("fibonacci")
    d = _spherical("fibonacci")
    assert np.allclose(np.diag(psi_power(d, 2).dense(0)), cat.dims)
    assert np.allclose(psi_power(d, -2).dense(0) @ psi_power(d, 2).dense(0), np.eye(cat.rank))


def test_induce_psi_per_slot():
    cat = cat_named("fibonacci")
    d = _spherical("fibonacci")
    vals = {s: np.diag(induce_psi(d, s, power=2).dense(0)).real for s in "012"}
    # each slot multiplies by d of its own channel label
    assert sorted(set(np.round(vals["0"], 9))) == pytest.approx(sorted(cat.dims))
    assert not np.allclose(vals["0"], vals["1"])
    with pytest.raises(ValueError):
        induce_psi(d, 3)


@pytest.mark.parametrize("name", ["vec", "vec_z2", "fibonacci", "ising"])
def test_spherical_datum_satisfies_all_conditions(name):
    rep = verify_orbifold_datum(_spherical(name))
    assert rep.passed
    assert [c.name for c in rep.checks] == list(CONDITIONS)
    assert rep.prechecks.passed


def test_jobs_do_not_change_report():
    d = _spherical("ising")
    a, b = verify_orbifold_datum(d), verify_orbifold_datum(d, jobs=4)
    assert [c.residual for c in a.checks] == [c.residual for c in b.checks]


def test_scaled_psi_fails_o5c_but_keeps_o5a():
    d = _spherical("fibonacci")
    rep = verify_orbifold_datum(d.replace(psi=d.psi * 1.1))
    assert not rep.get("O5c").passed
    assert rep.get("O5a").passed and rep.get("O5b").passed
    assert rep.get("O5c").residual == pytest.approx(0.174, abs=1e-3)


def test_scaled_phi2_fails_while_o3a_holds():
    d = _spherical("vec_z2")
    rep = verify_orbifold_datum(d.replace(phi2=d.phi2 * 1.01))
    assert not rep.passed
    assert rep.get("O3a").passed


def test_commutative_group_algebra():
    z2 = cat_named("vec_z2")
    d = from_commutative_frobenius(group_algebra(z2, [0, 1]))
    assert verify_orbifold_datum(d).passed
    assert d.phi2 == 1


@pytest.mark.parametrize("make,match", [
    (lambda: pair_algebra(cat_named("fibonacci"), (1,)), "twist"),
    (lambda: group_algebra(cat_named("vec_z2_chi"), [0, 1]), "twist"),
    (lambda: matrix_algebra(vect_engine(), 2), "not commutative"),
])
def test_commutative_rejections(make, match):
    with pytest.raises(ValueError, match=match):
        from_commutative_frobenius(make())


@pytest.mark.parametrize("name", catalog.CROSSED_NAMES)
def test_crossed_datum_passes(name):
    d = from_crossed_extension(cat_named(name), M_TY)
    assert d.phi2 == pytest.approx(0.5)
    assert verify_orbifold_datum(d).passed


def test_perturbed_crossed_braiding_is_caught():
    doc = catalog.builtin_document("ty_z2_plus")
    bad = catalog.load_crossed(perturbed_document(doc, "crossed_R", 0))
    with pytest.raises(PrecheckError) as err:
        verify_orbifold_datum(from_crossed_extension(bad, M_TY))
    assert not err.value.report.passed


def test_crossed_unknown_label():
    with pytest.raises((ValueError, KeyError)):
        from_crossed_extension(cat_named("ty_z2_plus"), {"1": "1", "-1": "nope"})


def test_iso_identity_and_scaled():
    d = _spherical("vec_z2")
    idT = tc.identity(d.cat, d.T.carrier)
    assert check_T_compatible_iso(d, d, idT).passed
    assert check_T_compatible_iso(d, d, idT * 2).passed
    D = np.eye(int(d.T.dim().real))
    D[0, 0] = 2.0
    one_vector = tc.Morphism(d.cat, d.T.carrier, d.T.carrier, {0: D})
    assert not check_T_compatible_iso(d, d, one_vector).passed


def test_regular_transport_is_equivalent():
    d = _spherical("vec_z2")
    X = regular_module(d.A)
    there = morita_transport(d, X, full=True)
    assert verify_orbifold_datum(there.datum).passed
    assert there.datum.T.dim() == pytest.approx(d.T.dim())


def test_column_transport_psi_ratio():
    d = _spherical("vec_z2")
    X, _ = column_bimodule(d.A, [1, 2])
    there = morita_transport(d, X, full=True)
    assert there.witnesses.passed
    ratios = psi_ratio_residuals(d, X, there.datum)
    assert len(ratios) == 2
    assert max(r["residual"] for r in ratios) < 1e-10
    back = morita_transport(there.datum, module_dual(X), full=True)
    assert check_T_compatible_iso(d, back.datum, round_trip_iso(d, X, there, back)).passed


def test_transport_rejects_foreign_module():
    d = _spherical("vec_z2")
    X, _ = column_bimodule(_spherical("vec").A, [1])
    with pytest.raises(ValueError):
        morita_transport(d, X)


def test_datum_json_round_trip():
    d = _spherical("fibonacci")
    doc = json.loads(json.dumps(datum_to_dict(d)))
    e = datum_from_dict(doc)
    assert np.array_equal(e.alpha.dense(0), d.alpha.dense(0))
    assert e.phi2 == d.phi2
    assert verify_orbifold_datum(e).passed


def test_datum_bad_format():
    with pytest.raises(ValueError):
        datum_from_dict({"format": "other"})


def test_datum_shape_validation():
    d = _spherical("vec_z2")
    with pytest.raises(ValueError):
        d.replace(psi=tc.identity(d.cat, d.T.carrier))
