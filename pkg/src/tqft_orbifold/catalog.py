"""Shipped category, crossed-extension and triangulation data.

Data files live in the package ``data`` directory (override with the
``TQFT_CATALOG_DIR`` environment variable).  The ``make_*`` builders produce
the same documents from closed-form formulas; the files are what
:func:`builtin` serves.
"""
from __future__ import annotations

import cmath
import itertools
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .skeletal_core import (CategoryData, VerificationReport, load_category,
                            verify_category)

DATA_DIR = Path(__file__).with_name("data")

PHI = (1 + math.sqrt(5)) / 2


def catalog_dir() -> Path:
    env = os.environ.get("TQFT_CATALOG_DIR")
    return Path(env) if env else DATA_DIR


def _c(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _fusion_document(name: str, labels: list[str], unit: str, dual: dict, mult: dict,
                     fnontrivial: dict, dims: dict, sqrt_dims: dict | None,
                     pivotal: dict, R: dict | None = None, twist: dict | None = None) -> dict:
    """Assemble a file document; every admissible F entry is written (default 1).

    ``mult`` maps ``(a, b)`` to the list of fusion outcomes (multiplicity free).
    ``fnontrivial`` maps ``(a, b, j, k)`` to ``{(c, d): value}`` overrides.
    """
    def N(a, b, c):
        return 1 if c in mult[(a, b)] else 0

    Nrows = [[a, b, c, 1] for a in labels for b in labels for c in mult[(a, b)]]
    Frows = []
    for a, b, j, k in itertools.product(labels, repeat=4):
        rows = [c for c in labels if N(b, j, c) and N(a, c, k)]
        cols = [d for d in labels if N(a, b, d) and N(d, j, k)]
        if not rows:
            continue
        over = fnontrivial.get((a, b, j, k))
        for c in rows:
            for d in cols:
                if over is not None:
                    v = over.get((c, d), 0.0)
                else:
                    v = 1.0 if len(rows) == 1 else (1.0 if c == d else 0.0)
                if v != 0:
                    Frows.append([a, b, j, k, c, 1, 1, d, 1, 1, *_c(v)])
    doc: dict[str, Any] = {"format": "fuscat/1", "name": name, "simples": labels, "unit": unit,
                           "dual": dual, "N": Nrows, "dims": {k: _c(v) for k, v in dims.items()},
                           "F": Frows, "pivotal": {k: _c(v) for k, v in pivotal.items()},
                           "tolerance": 1e-9}
    if sqrt_dims is not None:
        doc["sqrt_dims"] = {k: _c(v) for k, v in sqrt_dims.items()}
    if R is not None:
        doc["R"] = [[i, j, k, 1, 1, *_c(v)] for (i, j, k), v in R.items()]
        doc["twist"] = {k: _c(v) for k, v in twist.items()}
    return doc


def make_vec() -> dict:
    return _fusion_document("vec", ["1"], "1", {"1": "1"}, {("1", "1"): ["1"]}, {},
                            {"1": 1}, {"1": 1}, {"1": 1}, {("1", "1", "1"): 1}, {"1": 1})


def make_vec_z2(cocycle: str = "trivial", braiding: str | None = None) -> dict:
    """Vec_Z2 with trivial or nontrivial 3-cocycle.

    Braidings: ``"symmetric"`` (c_gg = 1), ``"chi"`` (c_gg = -1, a fermion) for the
    trivial cocycle; ``"semion"`` (c_gg = i) for the nontrivial one.
    """
    L = ["1", "g"]
    mult = {("1", "1"): ["1"], ("1", "g"): ["g"], ("g", "1"): ["g"], ("g", "g"): ["1"]}
    fnt = {}
    piv = {"1": 1, "g": 1}
    if cocycle == "omega":
        fnt[("g", "g", "g", "g")] = {("1", "1"): -1.0}
        piv = {"1": 1, "g": -1}
    elif cocycle != "trivial":
        raise ValueError(f"unknown cocycle {cocycle!r}")
    if braiding is None:
        braiding = "symmetric" if cocycle == "trivial" else "semion"
    rg = {"symmetric": 1.0, "chi": -1.0, "semion": 1j}[braiding]
    if (cocycle == "omega") != (braiding == "semion"):
        raise ValueError(f"braiding {braiding!r} incompatible with cocycle {cocycle!r}")
    R = {("1", "1", "1"): 1, ("1", "g", "g"): 1, ("g", "1", "g"): 1, ("g", "g", "1"): rg}
    twist = {"1": 1, "g": rg}
    name = {"symmetric": "vec_z2", "chi": "vec_z2_chi", "semion": "vec_z2_omega"}[braiding]
    return _fusion_document(name, L, "1", {"1": "1", "g": "g"}, mult, fnt,
                            {"1": 1, "g": 1}, {"1": 1, "g": 1}, piv, R, twist)


def make_fibonacci() -> dict:
    L = ["1", "tau"]
    mult = {("1", "1"): ["1"], ("1", "tau"): ["tau"], ("tau", "1"): ["tau"],
            ("tau", "tau"): ["1", "tau"]}
    s = 1 / math.sqrt(PHI)
    fnt = {("tau", "tau", "tau", "tau"): {("1", "1"): 1 / PHI, ("1", "tau"): s,
                                          ("tau", "1"): s, ("tau", "tau"): -1 / PHI}}
    R = {("1", "1", "1"): 1, ("1", "tau", "tau"): 1, ("tau", "1", "tau"): 1,
         ("tau", "tau", "1"): cmath.exp(-4j * math.pi / 5),
         ("tau", "tau", "tau"): cmath.exp(3j * math.pi / 5)}
    twist = {"1": 1, "tau": cmath.exp(4j * math.pi / 5)}
    return _fusion_document("fibonacci", L, "1", {"1": "1", "tau": "tau"}, mult, fnt,
                            {"1": 1, "tau": PHI}, {"1": 1, "tau": math.sqrt(PHI)},
                            {"1": 1, "tau": 1}, R, twist)


def make_ising_type(kappa: int = 1, nu: int | None = None, name: str | None = None,
                    labels: tuple[str, str, str] = ("1", "psi", "sigma")) -> dict:
    """Ising-type category: Tambara-Yamagami over Z2 with tau = kappa/sqrt(2).

    The braiding is the nu-family with ``(-1)^((nu^2 - 1)/8) = kappa``.
    """
    one, psi, sig = labels
    if nu is None:
        nu = 1 if kappa == 1 else 3
    if nu % 2 == 0 or (-1) ** ((nu * nu - 1) // 8) != kappa:
        raise ValueError(f"nu={nu} incompatible with kappa={kappa}")
    L = [one, psi, sig]
    mult = {(one, x): [x] for x in L} | {(x, one): [x] for x in L}
    mult[(psi, psi)] = [one]
    mult[(psi, sig)] = [sig]
    mult[(sig, psi)] = [sig]
    mult[(sig, sig)] = [one, psi]
    t = kappa / math.sqrt(2)
    fnt = {(sig, sig, sig, sig): {(one, one): t, (one, psi): t, (psi, one): t, (psi, psi): -t},
           (sig, psi, sig, psi): {(sig, sig): -1.0},
           (psi, sig, psi, sig): {(sig, sig): -1.0}}
    w = cmath.exp(1j * math.pi * nu / 8)
    R = {(one, x, x): 1 for x in L} | {(x, one, x): 1 for x in L}
    R[(psi, psi, one)] = -1
    R[(sig, psi, sig)] = -(1j ** nu)
    R[(psi, sig, sig)] = -(1j ** nu)
    R[(sig, sig, one)] = kappa * w.conjugate()
    R[(sig, sig, psi)] = kappa * w ** 3
    twist = {one: 1, psi: -1, sig: w}
    r2 = math.sqrt(2)
    return _fusion_document(name or ("ising" if kappa == 1 else "ising_minus"), L, one,
                            {x: x for x in L}, mult, fnt, {one: 1, psi: 1, sig: r2},
                            {one: 1, psi: 1, sig: r2 ** 0.5}, {one: 1, psi: 1, sig: kappa},
                            R, twist)


def make_ty(tau: str = "+") -> dict:
    """Crossed document: the Z2-extension of Vec_Z2,chi by one object ``X`` of degree -1.

    Realized as an Ising-type braided category with ``tau = +-1/sqrt(2)``; the
    Z2-action on labels is trivial.
    """
    if tau not in ("+", "-"):
        raise ValueError(f"tau sign must be '+' or '-', got {tau!r}")
    kappa = 1 if tau == "+" else -1
    name = "ty_z2_plus" if tau == "+" else "ty_z2_minus"
    doc = make_ising_type(kappa, name=name, labels=("1", "g", "X"))
    R = doc.pop("R")
    twist = doc.pop("twist")
    return {"format": "crossed/1", "name": name, "category": doc,
            "group": {"elements": ["1", "-1"], "unit": "1",
                      "mult": [["1", "1", "1"], ["1", "-1", "-1"], ["-1", "1", "-1"],
                               ["-1", "-1", "1"]]},
            "grading": {"1": "1", "g": "1", "X": "-1"},
            "action": {"1": {x: x for x in ("1", "g", "X")},
                       "-1": {x: x for x in ("1", "g", "X")}},
            "action_coefficients": [],
            "crossed_R": R, "twist": twist,
            "neutral": "vec_z2_chi", "neutral_labels": {"1": "1", "g": "g"}}


# ---------------------------------------------------------------------------
# crossed extensions

@dataclass
class CrossedCategoryData:
    """G-graded extension with a strict label action and its crossed braiding.

    ``underlying`` is the extension engine carrying ``crossed_R`` as its braiding.
    ``neutral`` is the degree-1 part as a separate engine and ``neutral_map`` sends
    its label indices to those of ``underlying``.
    """

    name: str
    underlying: CategoryData
    group: list[str]
    unit: str
    mult: dict[tuple[str, str], str]
    grading: dict[int, str]
    action: dict[str, dict[int, int]]
    neutral: CategoryData
    neutral_map: dict[int, int]
    action_coefficients: list = field(default_factory=list)

    @property
    def crossed_R(self) -> dict:
        return self.underlying.R

    def degree(self, label: str | int) -> str:
        return self.grading[self.underlying.index(label)]

    def inverse(self, g: str) -> str:
        for h in self.group:
            if self.mult[(g, h)] == self.unit:
                return h
        raise ValueError(f"group element {g!r} has no inverse")

    def with_crossed_R(self, R: dict) -> "CrossedCategoryData":
        import copy
        new = copy.copy(self)
        new.underlying = self.underlying.copy(R={k: np.array(v, dtype=complex)
                                                 for k, v in R.items()})
        return new

    def with_grading(self, grading: dict) -> "CrossedCategoryData":
        import copy
        new = copy.copy(self)
        new.grading = {self.underlying.index(k): v for k, v in grading.items()}
        return new


def load_crossed(source: Any) -> CrossedCategoryData:
    doc = source if isinstance(source, dict) else json.loads(Path(source).read_text())
    if doc.get("format") != "crossed/1":
        raise ValueError(f"not a crossed document (format {doc.get('format')!r})")
    cdoc = dict(doc["category"])
    cdoc["R"] = doc["crossed_R"]
    cdoc["twist"] = doc["twist"]
    cat = load_category(cdoc)
    grp = doc["group"]
    mult = {(a, b): c for a, b, c in grp["mult"]}
    grading = {cat.index(k): v for k, v in doc["grading"].items()}
    action = {g: {cat.index(a): cat.index(b) for a, b in m.items()}
              for g, m in doc["action"].items()}
    neutral = builtin(doc["neutral"])
    nmap = {neutral.index(a): cat.index(b) for a, b in doc["neutral_labels"].items()}
    return CrossedCategoryData(doc["name"], cat, list(grp["elements"]), grp["unit"], mult,
                               grading, action, neutral, nmap,
                               list(doc.get("action_coefficients", [])))


def validate_crossed(data: CrossedCategoryData) -> VerificationReport:
    """Group, grading, action and crossed-braiding residuals plus the degree-1 comparison."""
    cat = data.underlying
    rep = VerificationReport(f"crossed:{data.name}")
    G, m, e = data.group, data.mult, data.unit
    ok = all((a, b) in m and m[(a, b)] in G for a in G for b in G)
    ok = ok and all(m[(e, a)] == a == m[(a, e)] for a in G)
    ok = ok and all(m[(m[(a, b)], c)] == m[(a, m[(b, c)])] for a in G for b in G for c in G)
    ok = ok and all(any(m[(a, b)] == e for b in G) for a in G)
    rep.add("group_table", 0.0 if ok else np.inf, 0.5)
    if not ok:
        return rep
    bad = 0
    n = cat.rank
    for i, j, k in itertools.product(range(n), repeat=3):
        if cat.N[i, j, k] and m[(data.grading[i], data.grading[j])] != data.grading[k]:
            bad += 1
    rep.add("grading_multiplicative", float(bad), 0.5, f"{bad} violating channels")
    inv = {g: data.inverse(g) for g in G}
    bad = 0
    for g in G:
        act = data.action.get(g, {})
        for x in range(n):
            y = act.get(x)
            h = data.grading[x]
            if y is None or data.grading[y] != m[(m[(inv[g], h)], g)]:
                bad += 1
    bad += sum(data.action.get(e, {}).get(x) != x for x in range(n))
    for g, h in itertools.product(G, repeat=2):
        ag, ah, agh = data.action[g], data.action[h], data.action[m[(g, h)]]
        bad += sum(ah[ag[x]] != agh[x] for x in range(n))
    rep.add("action_compatible", float(bad), 0.5)
    strict = not data.action_coefficients and all(
        data.action[g][x] == x for g in G for x in range(n))
    rep.add("action_strict", 0.0 if strict else np.inf, 0.5,
            "" if strict else "only strict trivial label actions are supported")
    for r in verify_category(cat):
        for c in r.checks:
            name = c.name if r.name != "ribbon" else f"crossed_{c.name}"
            rep.add(f"{r.name}.{name}", c.residual, cat.tolerance)
    # degree-1 part against the shipped neutral engine
    nb, nm = data.neutral, data.neutral_map
    degs = sorted(nm.values())
    one = sorted(x for x in range(n) if data.grading[x] == e)
    res = 0.0 if degs == one else np.inf
    if res == 0.0:
        for a, b, c in itertools.product(range(nb.rank), repeat=3):
            res = max(res, abs(int(nb.N[a, b, c]) - int(cat.N[nm[a], nm[b], nm[c]])))
        for key, blk in nb.F.items():
            big = cat.F.get(tuple(nm[x] for x in key))
            res = max(res, np.inf if big is None else float(np.abs(big.mat - blk.mat).max()))
        for key, mat in nb.R.items():
            res = max(res, float(np.abs(cat.R[tuple(nm[x] for x in key)] - mat).max())
                      if mat.size else 0.0)
        for a in range(nb.rank):
            res = max(res, abs(nb.dims[a] - cat.dims[nm[a]]), abs(nb.twist[a] - cat.twist[nm[a]]),
                      abs(nb.pivotal[a] - cat.pivotal[nm[a]]))
    rep.add("neutral_part", res, cat.tolerance)
    return rep


# ---------------------------------------------------------------------------
# triangulations

def make_boundary_simplex() -> dict:
    """Boundary of the 4-simplex: tetrahedron ``m`` omits vertex ``m``."""
    tets = [[v for v in range(5) if v != m] for m in range(5)]
    rows = []
    for m, tm in enumerate(tets):
        for i, v in enumerate(tm):
            if v < m:
                continue
            other = tets[v]
            perm = [other.index(x) if x != v else other.index(m) for x in tm]
            rows.append([m, i, v, other.index(m), perm])
    return {"format": "tri3/1", "name": "S3_5tet", "tetrahedra": 5,
            "orient": [(-1) ** m for m in range(5)], "gluings": rows}


def make_double_tetrahedron() -> dict:
    """Two tetrahedra glued along their boundaries by the identity."""
    return {"format": "tri3/1", "name": "S3_2tet", "tetrahedra": 2, "orient": [1, -1],
            "gluings": [[0, f, 1, f, [0, 1, 2, 3]] for f in range(4)]}


# branched two-tetrahedron gluings found by exhaustive search, identified by H1
_SEARCHED = {
    "S2xS1": ([1, -1], [[0, 0, 0, 3, [3, 0, 1, 2]], [0, 1, 1, 1, [0, 1, 2, 3]],
                        [0, 2, 1, 2, [0, 1, 2, 3]], [1, 0, 1, 3, [3, 0, 1, 2]]]),
    "RP3": ([1, 1], [[0, 0, 0, 3, [3, 0, 1, 2]], [0, 1, 1, 0, [1, 0, 2, 3]],
                     [0, 2, 1, 3, [0, 1, 3, 2]], [1, 1, 1, 2, [0, 2, 1, 3]]]),
    "L(3,1)": ([1, 1], [[0, 0, 0, 3, [3, 0, 1, 2]], [0, 1, 1, 2, [0, 2, 1, 3]],
                        [0, 2, 1, 1, [0, 2, 1, 3]], [1, 0, 1, 3, [3, 0, 1, 2]]]),
}


def make_searched(name: str) -> dict:
    orient, rows = _SEARCHED[name]
    return {"format": "tri3/1", "name": name, "tetrahedra": 2, "orient": list(orient),
            "gluings": [list(r) for r in rows]}


# ---------------------------------------------------------------------------
# shipped files

def builtin_documents() -> dict[str, dict]:
    """Every shipped category and crossed document keyed by file stem."""
    docs = {"vec": make_vec(), "vec_z2": make_vec_z2(), "vec_z2_chi": make_vec_z2(braiding="chi"),
            "vec_z2_omega": make_vec_z2("omega"), "fibonacci": make_fibonacci(),
            "ising": make_ising_type(1), "ising_minus": make_ising_type(-1),
            "ty_z2_plus": make_ty("+"), "ty_z2_minus": make_ty("-"),
            "s3_5tet": make_boundary_simplex(), "s3_2tet": make_double_tetrahedron()}
    for name in _SEARCHED:
        docs[triangulation_stem(name)] = make_searched(name)
    return docs


def write_data_files(directory: Path | None = None) -> list[Path]:
    directory = Path(directory or DATA_DIR)
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for stem, doc in builtin_documents().items():
        p = directory / f"{stem}.json"
        text = json.dumps(doc, indent=1) if "gluings" not in doc else json.dumps(doc)
        p.write_text(text + "\n")
        out.append(p)
    return out


CATEGORY_NAMES = ("vec", "vec_z2", "vec_z2_chi", "vec_z2_omega", "fibonacci", "ising",
                  "ising_minus")
CROSSED_NAMES = ("ty_z2_plus", "ty_z2_minus")
TRIANGULATION_NAMES = ("s3_5tet", "s3_2tet", "s2xs1", "rp3", "l31")


def _read(stem: str) -> dict:
    p = catalog_dir() / f"{stem}.json"
    if not p.exists():
        raise KeyError(f"no shipped data file {p.name}")
    return json.loads(p.read_text())


def triangulation_stem(name: str) -> str:
    """File stem of a triangulation name: ``"L(3,1)" -> "l31"``, ``"S3_5tet" -> "s3_5tet"``."""
    return "".join(ch for ch in name.lower() if ch not in "(), ")


def triangulation_document(name: str) -> dict:
    stem = triangulation_stem(name)
    if stem not in TRIANGULATION_NAMES:
        raise KeyError(f"unknown triangulation {name!r}")
    return _read(stem)


def available() -> dict[str, list[str]]:
    return {"categories": list(CATEGORY_NAMES), "crossed": list(CROSSED_NAMES),
            "triangulations": list(TRIANGULATION_NAMES)}


def resolve_stem(name: str, params: dict | None = None) -> str:
    """Data file stem of a built-in name with optional family parameters.

    Names are file stems (see :func:`available`), triangulation names such as
    ``"L(3,1)"``, and the parametrized families ``vec_g`` (``group``,
    ``cocycle``, ``braiding``) and ``ty`` (``H``, ``q``, ``tau``).
    """
    params = dict(params or {})
    if name == "vec_g":
        if params.pop("group", "Z2") not in ("Z2", "z2"):
            raise ValueError("vec_g supports only group Z2")
        cocycle = params.pop("cocycle", "trivial")
        braiding = params.pop("braiding", None)
        if params:
            raise ValueError(f"unknown parameters {sorted(params)}")
        if cocycle not in ("trivial", "omega"):
            raise ValueError(f"unknown cocycle {cocycle!r}")
        stem = {("trivial", None): "vec_z2", ("trivial", "symmetric"): "vec_z2",
                ("trivial", "chi"): "vec_z2_chi", ("omega", None): "vec_z2_omega",
                ("omega", "semion"): "vec_z2_omega"}.get((cocycle, braiding))
        if stem is None:
            raise ValueError(f"braiding {braiding!r} incompatible with cocycle {cocycle!r}")
        return stem
    if name == "ty":
        if params.pop("H", "Z2") not in ("Z2", "z2"):
            raise ValueError("ty supports only H = Z2")
        if params.pop("q", "i") not in ("i", "-1"):
            raise ValueError("ty over Z2 supports the quadratic form q = i (chi(g,g) = -1)")
        tau = str(params.pop("tau", "+"))
        if params:
            raise ValueError(f"unknown parameters {sorted(params)}")
        if tau not in ("+", "-"):
            raise ValueError(f"tau must be '+' or '-', got {tau!r}")
        return "ty_z2_plus" if tau == "+" else "ty_z2_minus"
    if params:
        raise ValueError(f"{name} takes no parameters")
    if name in CATEGORY_NAMES or name in CROSSED_NAMES:
        return name
    if triangulation_stem(name) in TRIANGULATION_NAMES:
        return triangulation_stem(name)
    raise KeyError(f"unknown catalog name {name!r}")


def builtin_document(name: str, params: dict | None = None) -> dict:
    return _read(resolve_stem(name, params))


def builtin(name: str, params: dict | None = None):
    """Load a shipped category, crossed category or triangulation by name."""
    stem = resolve_stem(name, params)
    doc = _read(stem)
    if stem in CROSSED_NAMES:
        return load_crossed(doc)
    if stem in TRIANGULATION_NAMES:
        from .statesum import load_triangulation
        return load_triangulation(doc)
    return load_category(doc)
