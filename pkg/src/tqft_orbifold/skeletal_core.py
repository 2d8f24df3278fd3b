"""Skeletal fusion category data and coherence verification.

A skeletal category is stored by its simple labels, fusion multiplicities,
F-symbols, quantum dimensions, pivotal coefficients and (optionally) braiding
and twist data.  Multiplicity indices are 0-based internally and 1-based in
files.

F-symbol convention.  For simples ``a, b, j, k`` the block ``F[(a, b, j, k)]``
has rows indexed by right-nested trees ``(c, l, m)`` with ``m: b (x) j -> c``
and ``l: a (x) c -> k``, and columns indexed by left-nested trees
``(d, l2, m2)`` with ``m2: a (x) b -> d`` and ``l2: d (x) j -> k``.  As fusion
morphisms, ``right(c, l, m) = sum F[(c, l, m), (d, l2, m2)] left(d, l2, m2)``.

Braiding convention.  ``R[(i, j, k)][al, be]`` is the coefficient of the
fusion vector ``(i j -> k, al)`` in ``(j i -> k, be) o c_{i,j}``.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np


class SchemaError(ValueError):
    """Raised when a category document does not conform to the file schema."""


@dataclass
class Check:
    name: str
    residual: float
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "residual": float(self.residual),
                "passed": bool(self.passed), "detail": self.detail}


@dataclass
class VerificationReport:
    """Named collection of residual checks; passes iff every check passes."""

    name: str
    checks: list[Check] = field(default_factory=list)

    def add(self, name: str, residual: float, tol: float, detail: str = "") -> Check:
        residual = float(residual)
        chk = Check(name, residual, bool(np.isfinite(residual) and residual < tol), detail)
        self.checks.append(chk)
        return chk

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def max_residual(self) -> float:
        return max((c.residual for c in self.checks), default=0.0)

    def get(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed,
                "max_residual": self.max_residual,
                "checks": [c.to_dict() for c in self.checks]}


@dataclass
class FBlock:
    """One invertible F-matrix with its row/column tree labels."""

    rows: list[tuple[int, int, int]]
    cols: list[tuple[int, int, int]]
    mat: np.ndarray
    inv: np.ndarray | None
    row_index: dict = field(default_factory=dict)
    col_index: dict = field(default_factory=dict)

    def __post_init__(self):
        self.row_index = {r: n for n, r in enumerate(self.rows)}
        self.col_index = {c: n for n, c in enumerate(self.cols)}


@dataclass(eq=False)
class CategoryData:
    """Skeletal spherical (optionally ribbon) fusion category."""

    name: str
    labels: list[str]
    unit: int
    dual: list[int]
    N: np.ndarray
    F: dict[tuple[int, int, int, int], FBlock]
    dims: np.ndarray
    pivotal: np.ndarray
    sqrt_dims: np.ndarray | None = None
    R: dict[tuple[int, int, int], np.ndarray] | None = None
    twist: np.ndarray | None = None
    tolerance: float = 1e-9
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def rank(self) -> int:
        return len(self.labels)

    @property
    def is_vect(self) -> bool:
        return self.rank == 1

    @property
    def has_ribbon(self) -> bool:
        return self.R is not None

    def index(self, label: str | int) -> int:
        if isinstance(label, (int, np.integer)):
            return int(label)
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown simple label {label!r} in {self.name}") from None

    def fusion(self, a: int, b: int) -> list[int]:
        return [c for c in range(self.rank) if self.N[a, b, c] > 0]

    def fval(self, a: int, b: int, j: int, k: int, row, col) -> complex:
        blk = self.F.get((a, b, j, k))
        if blk is None:
            return 0.0
        r = blk.row_index.get(row)
        c = blk.col_index.get(col)
        if r is None or c is None:
            return 0.0
        return blk.mat[r, c]

    def finv(self, a: int, b: int, j: int, k: int, row, col) -> complex:
        """Entry of the inverse block: row is a left tree, col a right tree."""
        blk = self.F.get((a, b, j, k))
        if blk is None or blk.inv is None:
            return 0.0
        r = blk.col_index.get(row)
        c = blk.row_index.get(col)
        if r is None or c is None:
            return 0.0
        return blk.inv[r, c]

    def fold_coeff(self, i: int) -> complex:
        """``F^{i i* i}_i`` at the unit channels, the normalization of coev."""
        u, s = self.unit, self.dual[i]
        return self.fval(i, s, i, i, (u, 0, 0), (u, 0, 0))

    def fold_coeff_left(self, i: int) -> complex:
        u, s = self.unit, self.dual[i]
        return self.fval(s, i, s, s, (u, 0, 0), (u, 0, 0))

    def cached(self, key, builder):
        try:
            return self._cache[key]
        except KeyError:
            val = builder()
            self._cache[key] = val
            return val

    def copy(self, **changes) -> "CategoryData":
        """Independent copy with optional field replacements (cache not shared)."""
        data = to_document(self)
        cat = load_category(data)
        for k, v in changes.items():
            setattr(cat, k, v)
        cat._cache = {}
        return cat


def _cnum(v: Any) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise SchemaError(f"complex value must be [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, str):
        return complex(v.replace(" ", "").replace("i", "j"))
    raise SchemaError(f"cannot read scalar {v!r}")


def _jnum(z: complex) -> Any:
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def _read_source(source: Any) -> dict:
    if isinstance(source, dict):
        return source
    if isinstance(source, Path):
        return json.loads(source.read_text())
    if isinstance(source, str):
        s = source.lstrip()
        if s.startswith("{"):
            return json.loads(s)
        return json.loads(Path(source).read_text())
    raise SchemaError(f"unsupported category source {type(source).__name__}")


def _label_map(doc: dict, table: str, labels: list[str]) -> np.ndarray:
    raw = doc[table]
    if not isinstance(raw, dict):
        raise SchemaError(f"field {table!r} must be a label map")
    out = np.zeros(len(labels), dtype=complex)
    for lab in raw:
        if lab not in labels:
            raise SchemaError(f"dangling label reference {lab!r} in {table!r}")
    for n, lab in enumerate(labels):
        if lab not in raw:
            raise SchemaError(f"field {table!r} missing label {lab!r}")
        out[n] = _cnum(raw[lab])
    return out


def load_category(source: Any) -> CategoryData:
    """Parse a ``fuscat/1`` document (path, JSON text or dict).

    No axioms are verified here; use :func:`verify_pentagon` and friends.

    Raises
    ------
    SchemaError
        On missing fields, out-of-range indices, duplicate or dangling labels.
    """
    doc = _read_source(source)
    for key in ("format", "simples", "unit", "dual", "N", "dims", "F", "pivotal"):
        if key not in doc:
            raise SchemaError(f"missing field {key!r}")
    if doc["format"] != "fuscat/1":
        raise SchemaError(f"unknown format {doc['format']!r}")
    labels = [str(s) for s in doc["simples"]]
    if not labels or any(not s for s in labels):
        raise SchemaError("simples must be a non-empty list of non-empty labels")
    if len(set(labels)) != len(labels):
        raise SchemaError("duplicate simple labels")

    def lab(x: Any) -> int:
        if x not in labels:
            raise SchemaError(f"dangling label reference {x!r}")
        return labels.index(x)

    n = len(labels)
    unit = lab(doc["unit"])
    dual = [0] * n
    for a in labels:
        if a not in doc["dual"]:
            raise SchemaError(f"dual missing label {a!r}")
    for a, b in doc["dual"].items():
        dual[lab(a)] = lab(b)
    N = np.zeros((n, n, n), dtype=int)
    for row in doc["N"]:
        if len(row) != 4:
            raise SchemaError(f"N row must have 4 entries: {row!r}")
        i, j, k = lab(row[0]), lab(row[1]), lab(row[2])
        mult = int(row[3])
        if mult < 0:
            raise SchemaError("negative fusion multiplicity")
        N[i, j, k] = mult

    entries: dict[tuple, dict] = {}
    for row in doc["F"]:
        if len(row) != 12:
            raise SchemaError(f"F row must have 12 entries: {row!r}")
        a, b, j, k, c = (lab(x) for x in row[:5])
        l, m = int(row[5]) - 1, int(row[6]) - 1
        d = lab(row[7])
        l2, m2 = int(row[8]) - 1, int(row[9]) - 1
        if not (0 <= m < N[b, j, c] and 0 <= l < N[a, c, k]):
            raise SchemaError(f"F index out of range (right tree) in {row!r}")
        if not (0 <= m2 < N[a, b, d] and 0 <= l2 < N[d, j, k]):
            raise SchemaError(f"F index out of range (left tree) in {row!r}")
        entries.setdefault((a, b, j, k), {})[((c, l, m), (d, l2, m2))] = complex(
            float(row[10]), float(row[11]))

    F: dict[tuple[int, int, int, int], FBlock] = {}
    for a, b, j, k in itertools.product(range(n), repeat=4):
        rows = [(c, l, m) for c in range(n) for l in range(N[a, c, k]) for m in range(N[b, j, c])]
        cols = [(d, l2, m2) for d in range(n) for l2 in range(N[d, j, k]) for m2 in range(N[a, b, d])]
        if not rows and not cols:
            continue
        mat = np.zeros((len(rows), len(cols)), dtype=complex)
        ent = entries.get((a, b, j, k), {})
        ri = {r: x for x, r in enumerate(rows)}
        ci = {c: x for x, c in enumerate(cols)}
        for (r, c), v in ent.items():
            mat[ri[r], ci[c]] = v
        inv = None
        if len(rows) == len(cols):
            if np.linalg.matrix_rank(mat) == len(rows):
                inv = np.linalg.inv(mat)
        F[(a, b, j, k)] = FBlock(rows, cols, mat, inv)

    dims = _label_map(doc, "dims", labels)
    pivotal = _label_map(doc, "pivotal", labels)
    sqrt_dims = _label_map(doc, "sqrt_dims", labels) if "sqrt_dims" in doc else None
    R = None
    if "R" in doc:
        R = {}
        for i, j, k in itertools.product(range(n), repeat=3):
            if N[i, j, k] or N[j, i, k]:
                R[(i, j, k)] = np.zeros((N[i, j, k], N[j, i, k]), dtype=complex)
        for row in doc["R"]:
            if len(row) != 7:
                raise SchemaError(f"R row must have 7 entries: {row!r}")
            i, j, k = lab(row[0]), lab(row[1]), lab(row[2])
            al, be = int(row[3]) - 1, int(row[4]) - 1
            if not (0 <= al < N[i, j, k] and 0 <= be < N[j, i, k]):
                raise SchemaError(f"R index out of range in {row!r}")
            R[(i, j, k)][al, be] = complex(float(row[5]), float(row[6]))
    twist = _label_map(doc, "twist", labels) if "twist" in doc else None
    tol = float(doc.get("tolerance", 1e-9))
    if tol <= 0:
        raise SchemaError("tolerance must be positive")
    return CategoryData(name=str(doc.get("name", "unnamed")), labels=labels, unit=unit,
                        dual=dual, N=N, F=F, dims=dims, pivotal=pivotal,
                        sqrt_dims=sqrt_dims, R=R, twist=twist, tolerance=tol)


def to_document(cat: CategoryData) -> dict:
    """Serialize back to a ``fuscat/1`` dict (round-trips through load_category)."""
    L = cat.labels
    n = cat.rank
    doc: dict[str, Any] = {"format": "fuscat/1", "name": cat.name, "simples": list(L),
                           "unit": L[cat.unit],
                           "dual": {L[i]: L[cat.dual[i]] for i in range(n)}}
    doc["N"] = [[L[i], L[j], L[k], int(cat.N[i, j, k])]
                for i, j, k in itertools.product(range(n), repeat=3) if cat.N[i, j, k]]
    doc["dims"] = {L[i]: _jnum(cat.dims[i]) for i in range(n)}
    if cat.sqrt_dims is not None:
        doc["sqrt_dims"] = {L[i]: _jnum(cat.sqrt_dims[i]) for i in range(n)}
    rows = []
    for (a, b, j, k), blk in sorted(cat.F.items()):
        for r, (c, l, m) in enumerate(blk.rows):
            for s, (d, l2, m2) in enumerate(blk.cols):
                v = blk.mat[r, s]
                if v != 0:
                    rows.append([L[a], L[b], L[j], L[k], L[c], l + 1, m + 1,
                                 L[d], l2 + 1, m2 + 1, v.real, v.imag])
    doc["F"] = rows
    doc["pivotal"] = {L[i]: _jnum(cat.pivotal[i]) for i in range(n)}
    if cat.R is not None:
        doc["R"] = [[L[i], L[j], L[k], al + 1, be + 1, v.real, v.imag]
                    for (i, j, k), mat in sorted(cat.R.items())
                    for (al, be), v in np.ndenumerate(mat) if v != 0]
    if cat.twist is not None:
        doc["twist"] = {L[i]: _jnum(cat.twist[i]) for i in range(n)}
    doc["tolerance"] = cat.tolerance
    return doc


def verify_fusion_ring(cat: CategoryData) -> VerificationReport:
    """Exact integer checks on the fusion ring."""
    rep = VerificationReport("fusion_ring")
    n, u, N, dual = cat.rank, cat.unit, cat.N, cat.dual
    bad = sum(dual[dual[i]] != i for i in range(n)) + (dual[u] != u)
    rep.add("dual_involution", bad, 0.5)
    bad = 0
    for i in range(n):
        for k in range(n):
            want = 1 if k == i else 0
            bad += (N[i, u, k] != want) + (N[u, i, k] != want)
        for j in range(n):
            bad += N[i, j, u] != (1 if j == dual[i] else 0)
    rep.add("unit_and_rigidity", bad, 0.5)
    lhs = np.einsum("ije,ekl->ijkl", N, N)
    rhs = np.einsum("jkf,ifl->ijkl", N, N)
    rep.add("associativity", np.abs(lhs - rhs).max(), 0.5)
    return rep


def _pentagon_tuple(cat: CategoryData, a: int, b: int, c: int, d: int, e: int) -> float:
    n, N = cat.rank, cat.N
    rr = [(x, n1, y, n2, n3) for x in range(n) for n1 in range(N[c, d, x])
          for y in range(n) for n2 in range(N[b, x, y]) for n3 in range(N[a, y, e])]
    ll = [(p, m1, q, m2, m3) for p in range(n) for m1 in range(N[a, b, p])
          for q in range(n) for m2 in range(N[p, c, q]) for m3 in range(N[q, d, e])]
    if not rr and not ll:
        return 0.0
    li = {t: x for x, t in enumerate(ll)}
    P1 = np.zeros((len(rr), len(ll)), dtype=complex)
    P2 = np.zeros_like(P1)
    fv = cat.fval
    for r, (x, n1, y, n2, n3) in enumerate(rr):
        # two-move path through (ab)(cd)
        for p in range(n):
            for m1 in range(N[a, b, p]):
                for kk in range(N[p, x, e]):
                    f1 = fv(a, b, x, e, (y, n3, n2), (p, kk, m1))
                    if f1 == 0:
                        continue
                    for q in range(n):
                        for m2 in range(N[p, c, q]):
                            for m3 in range(N[q, d, e]):
                                f2 = fv(p, c, d, e, (x, kk, n1), (q, m3, m2))
                                if f2 != 0:
                                    P1[r, li[(p, m1, q, m2, m3)]] += f1 * f2
        # three-move path through a((bc)d) and (a(bc))d
        for s in range(n):
            for s1 in range(N[b, c, s]):
                for s2 in range(N[s, d, y]):
                    g1 = fv(b, c, d, y, (x, n2, n1), (s, s2, s1))
                    if g1 == 0:
                        continue
                    for q in range(n):
                        for q1 in range(N[a, s, q]):
                            for m3 in range(N[q, d, e]):
                                g2 = fv(a, s, d, e, (y, n3, s2), (q, m3, q1))
                                if g2 == 0:
                                    continue
                                for p in range(n):
                                    for m1 in range(N[a, b, p]):
                                        for m2 in range(N[p, c, q]):
                                            g3 = fv(a, b, c, q, (s, q1, s1), (p, m2, m1))
                                            if g3 != 0:
                                                P2[r, li[(p, m1, q, m2, m3)]] += g1 * g2 * g3
    return float(np.abs(P1 - P2).max()) if P1.size else 0.0


def verify_pentagon(cat: CategoryData) -> VerificationReport:
    """Compare the two re-bracketing paths from a(b(cd)) to ((ab)c)d.

    The report carries one aggregated check plus block invertibility; the
    worst tuple is recorded in the check detail.
    """
    rep = VerificationReport("pentagon")
    n, tol = cat.rank, cat.tolerance
    sq = 0.0
    for blk in cat.F.values():
        if blk.inv is None:
            sq = np.inf
            break
        sq = max(sq, float(np.abs(blk.mat @ blk.inv - np.eye(len(blk.rows))).max()))
    rep.add("F_invertible", sq, tol)
    worst, arg = 0.0, None
    for tup in itertools.product(range(n), repeat=5):
        res = _pentagon_tuple(cat, *tup)
        if res > worst:
            worst, arg = res, tup
    detail = "" if arg is None else "worst tuple " + ",".join(cat.labels[x] for x in arg)
    rep.add("pentagon", worst, tol, detail)
    return rep


def _unit_identity_residual(cat: CategoryData) -> float:
    u, worst = cat.unit, 0.0
    for (a, b, j, k), blk in cat.F.items():
        if u not in (a, b, j):
            continue
        want = np.zeros_like(blk.mat)
        for r, (c, l, m) in enumerate(blk.rows):
            if a == u:
                tgt = (b, m, 0) if c == k and l == 0 else None
            elif b == u:
                tgt = (a, l, 0) if c == j and m == 0 else None
            else:
                tgt = (k, 0, l) if c == b and m == 0 else None
            if tgt is not None and tgt in blk.col_index:
                want[r, blk.col_index[tgt]] = 1.0
        if want.shape != blk.mat.shape or want.shape[0] != want.shape[1]:
            return np.inf
        worst = max(worst, float(np.abs(blk.mat - want).max()))
    return worst


def verify_spherical(cat: CategoryData) -> VerificationReport:
    """Unit gauge, pivotal normalization and left/right dimensions via folds."""
    from . import treecalc as tc

    rep = VerificationReport("spherical")
    tol, n, u = cat.tolerance, cat.rank, cat.unit
    rep.add("dual_dims", max(abs(cat.dims[i] - cat.dims[cat.dual[i]]) for i in range(n)), tol)
    rep.add("unit_dim", abs(cat.dims[u] - 1), tol)
    rep.add("unit_F_identity", _unit_identity_residual(cat), tol)
    rep.add("pivotal_normalization",
            max([abs(cat.pivotal[u] - 1)] +
                [abs(cat.pivotal[i] * cat.pivotal[cat.dual[i]] - 1) for i in range(n)]), tol)
    rep.add("nonzero_global_dim", 0.0 if abs(global_dimension(cat)) > tol else np.inf, tol)
    try:
        left, right, snake = [], [], 0.0
        for i in range(n):
            X = (i,)
            right.append(tc.scalar(tc.right_trace(tc.identity(cat, (X,)))))
            left.append(tc.scalar(tc.left_trace(tc.identity(cat, (X,)))))
            snake = max(snake, tc.snake_residual(cat, X))
        left, right = np.array(left), np.array(right)
        rep.add("left_equals_right_trace", np.abs(left - right).max(), tol)
        rep.add("trace_equals_dims", np.abs(right - cat.dims).max(), tol)
        rep.add("snake_identities", snake, tol)
    except (ZeroDivisionError, FloatingPointError, np.linalg.LinAlgError) as exc:
        rep.add("fold_traces", np.inf, tol, f"fold evaluation failed: {exc}")
    return rep


def verify_ribbon(cat: CategoryData) -> VerificationReport:
    """Hexagons on all simple triples plus twist compatibility.

    Raises
    ------
    ValueError
        If the category carries no braiding data.
    """
    from . import treecalc as tc

    if cat.R is None or cat.twist is None:
        raise ValueError(f"category {cat.name} has no ribbon data")
    rep = VerificationReport("ribbon")
    tol, n, u = cat.tolerance, cat.rank, cat.unit
    inv_ok = all(m.shape[0] == m.shape[1] and
                 (m.size == 0 or np.linalg.matrix_rank(m) == m.shape[0])
                 for m in cat.R.values())
    rep.add("R_invertible", 0.0 if inv_ok else np.inf, tol)
    if not inv_ok:
        return rep
    h1 = h2 = 0.0
    for x, y, z in itertools.product(range(n), repeat=3):
        a, b = tc.hexagon_residuals(cat, (x,), (y,), (z,))
        h1, h2 = max(h1, a), max(h2, b)
    rep.add("hexagon_1", h1, tol)
    rep.add("hexagon_2", h2, tol)
    th = cat.twist
    rep.add("twist_unit", abs(th[u] - 1), tol)
    rep.add("twist_dual", max(abs(th[i] - th[cat.dual[i]]) for i in range(n)), tol)
    bal = 0.0
    for (i, j, k), m in cat.R.items():
        if not cat.N[i, j, k]:
            continue
        dbl = cat.R[(j, i, k)].T @ m.T
        want = th[k] / (th[i] * th[j]) * np.eye(cat.N[i, j, k])
        bal = max(bal, float(np.abs(dbl - want).max()))
    rep.add("double_braid_balancing", bal, tol)
    tw = max(abs(tc.twist_from_braiding(cat, i) - th[i]) for i in range(n))
    rep.add("twist_from_braiding", tw, tol)
    return rep


def global_dimension(cat: CategoryData) -> complex:
    return complex(np.sum(cat.dims ** 2))


def s_matrix(cat: CategoryData) -> np.ndarray:
    """Unnormalized S-matrix: trace of the double braid on each pair of simples."""
    if cat.R is None:
        raise ValueError(f"category {cat.name} has no ribbon data")
    n = cat.rank
    S = np.zeros((n, n), dtype=complex)
    for i, j in itertools.product(range(n), repeat=2):
        for k in range(n):
            if cat.N[i, j, k]:
                S[i, j] += cat.dims[k] * np.trace(cat.R[(j, i, k)].T @ cat.R[(i, j, k)].T)
    return S


def verify_modularity(cat: CategoryData, cond_max: float = 1e8) -> VerificationReport:
    """Informational: invertibility of the S-matrix, judged by its condition number."""
    S = s_matrix(cat)
    cond = float(np.linalg.cond(S))
    rep = VerificationReport("modularity")
    rep.add("s_matrix_invertible", 0.0 if cond < cond_max else np.inf, 0.5,
            f"condition number {cond:.6g}")
    return rep


def verify_category(cat: CategoryData) -> list[VerificationReport]:
    """All applicable verifiers in dependency order."""
    reps = [verify_fusion_ring(cat), verify_pentagon(cat), verify_spherical(cat)]
    if cat.R is not None and cat.twist is not None:
        reps.append(verify_ribbon(cat))
    return reps
