from __future__ import annotations

import json

import pytest

from tqft_orbifold import catalog
from tqft_orbifold.skeletal_core import CategoryData, verify_category
from tqft_orbifold.statesum import Triangulation

ALL_STEMS = catalog.CATEGORY_NAMES + catalog.CROSSED_NAMES + catalog.TRIANGULATION_NAMES


@pytest.mark.parametrize("stem", ALL_STEMS)
def test_shipped_file_loads(stem):
    obj = catalog.builtin(stem)
    if stem in catalog.CATEGORY_NAMES:
        assert isinstance(obj, CategoryData)
        assert all(r.passed for r in verify_category(obj))
    elif stem in catalog.CROSSED_NAMES:
        assert catalog.validate_crossed(obj).passed
    else:
        assert isinstance(obj, Triangulation)


def test_generators_reproduce_shipped_files(tmp_path):
    paths = catalog.write_data_files(tmp_path)
    assert sorted(p.stem for p in paths) == sorted(ALL_STEMS)
    for p in paths:
        assert p.read_text() == (catalog.DATA_DIR / p.name).read_text(), p.name


@pytest.mark.parametrize("name,params,stem", [
    ("vec_g", {}, "vec_z2"),
    ("vec_g", {"cocycle": "omega"}, "vec_z2_omega"),
    ("vec_g", {"braiding": "chi"}, "vec_z2_chi"),
    ("ty", {"tau": "-"}, "ty_z2_minus"),
    ("ty", {"H": "Z2", "q": "i"}, "ty_z2_plus"),
    ("L(3,1)", {}, "l31"),
    ("S2 x S1", {}, "s2xs1"),
])
def test_resolve_stem(name, params, stem):
    assert catalog.resolve_stem(name, params) == stem


@pytest.mark.parametrize("name,params", [
    ("vec_g", {"group": "Z3"}),
    ("vec_g", {"cocycle": "omega", "braiding": "chi"}),
    ("ty", {"tau": "0"}),
    ("fibonacci", {"k": 1}),
])
def test_resolve_stem_rejects(name, params):
    with pytest.raises(ValueError):
        catalog.resolve_stem(name, params)


def test_unknown_name():
    with pytest.raises(KeyError):
        catalog.builtin("nonesuch")


def test_available_lists_everything():
    av = catalog.available()
    assert set(av) == {"categories", "crossed", "triangulations"}
    assert sum(len(v) for v in av.values()) == len(ALL_STEMS)


def test_crossed_degrees():
    ty = catalog.builtin("ty_z2_plus")
    assert ty.degree("X") == "-1"
    assert ty.degree("g") == "1"
    assert ty.inverse("-1") == "-1"


def test_changed_grading_fails_validation():
    ty = catalog.builtin("ty_z2_plus")
    grading = dict(ty.grading)
    grading["g"] = "-1"
    rep = catalog.validate_crossed(ty.with_grading(grading))
    assert not rep.passed


def test_zeroed_crossed_braiding_fails_validation():
    ty = catalog.builtin("ty_z2_minus")
    R = dict(ty.crossed_R)
    key = next(iter(R))
    R[key] = R[key] * 0
    assert not catalog.validate_crossed(ty.with_crossed_R(R)).passed


def test_catalog_dir_override(tmp_path, monkeypatch):
    doc = catalog.builtin_document("fibonacci")
    doc["name"] = "fibonacci_copy"
    (tmp_path / "fibonacci.json").write_text(json.dumps(doc))
    monkeypatch.setenv("TQFT_CATALOG_DIR", str(tmp_path))
    assert catalog.builtin("fibonacci").name == "fibonacci_copy"
    with pytest.raises(KeyError):
        catalog.builtin("ising")
