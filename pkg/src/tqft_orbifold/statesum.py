"""Turaev-Viro and orbifold state sums on branched triangulations.

Triangulations are Delta-complexes: tetrahedra with ordered vertices
``0 < 1 < 2 < 3`` whose faces are glued in pairs.  Face ``i`` is the face
opposite vertex ``i``.  Every gluing must preserve the vertex order of the
glued faces (a branching), so the face with vertices ``a < b < c`` always
carries the space ``Hom(c_ab (x) c_bc, c_ac)``.

Orientation.  A tetrahedron of sign ``s`` induces the sign ``s * (-1)**i`` on
its face ``i``.  Faces with induced sign ``+1`` enter the dual vertex as
fusion vectors, the others as trace-dual splitting vectors.  With this rule
a positive tetrahedron evaluates the ``alpha`` configuration

    Hom(c01 c13, c03) (x) Hom(c12 c23, c13) -> Hom(c02 c23, c03) (x) Hom(c01 c12, c02)

and a negative one the ``alphabar`` configuration read backwards.  The dual
edge of a face points from the tetrahedron where it is an output to the one
where it is an input.
"""
from __future__ import annotations

import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .skeletal_core import CategoryData, SchemaError, VerificationReport, global_dimension
from .treecalc import compose_all, fusion_vertex, hat_vertex, identity, tensor, trace

FACES = ((1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2))
EDGES = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
EDGE_INDEX = {e: n for n, e in enumerate(EDGES)}
# slot of each side of a face (a < b < c): ab -> "1", bc -> "2", ac -> "0"
FACE_SLOTS = (("1", 0, 1), ("2", 1, 2), ("0", 0, 2))


class TriangulationError(ValueError):
    """A gluing table that does not describe a closed oriented branched 3-manifold."""


def _parity(seq) -> int:
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)

    def classes(self, items) -> dict:
        roots = {}
        out = {}
        for x in items:
            r = self.find(x)
            out[x] = roots.setdefault(r, len(roots))
        return out


@dataclass(frozen=True)
class Triangulation:
    """Validated closed oriented branched triangulation.

    Attributes
    ----------
    tetrahedra : int
        Number of tetrahedra.
    orient : tuple of int
        Orientation sign of each tetrahedron.
    gluings : dict
        ``(tet, face) -> (tet', face', perm)`` for every face, in both directions.
    vertex_of, edge_of, face_of : dict
        Skeleton classes of ``(tet, vertex)``, ``(tet, edge index)`` and ``(tet, face)``.
    """

    tetrahedra: int
    orient: tuple[int, ...]
    gluings: dict
    vertex_of: dict
    edge_of: dict
    face_of: dict
    name: str = ""

    @property
    def num_vertices(self) -> int:
        return len(set(self.vertex_of.values()))

    @property
    def num_edges(self) -> int:
        return len(set(self.edge_of.values()))

    @property
    def num_faces(self) -> int:
        return len(set(self.face_of.values()))

    @property
    def euler_characteristic(self) -> int:
        return self.num_vertices - self.num_edges + self.num_faces - self.tetrahedra

    def is_input(self, tet: int, face: int) -> bool:
        return self.orient[tet] * (-1) ** face > 0

    def mirror(self) -> "Triangulation":
        """Same gluings with every orientation sign flipped."""
        return load_triangulation(self.to_document(orient=[-s for s in self.orient]))

    def to_document(self, orient=None) -> dict:
        rows = []
        for (t, f), (t2, f2, perm) in sorted(self.gluings.items()):
            if (t, f) <= (t2, f2):
                rows.append([t, f, t2, f2, list(perm)])
        return {"format": "tri3/1", "name": self.name, "tetrahedra": self.tetrahedra,
                "orient": list(self.orient if orient is None else orient), "gluings": rows}


def _read(source: Any) -> dict:
    if isinstance(source, Triangulation):
        return source.to_document()
    if isinstance(source, dict):
        return source
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        p = Path(source)
        if not p.exists():
            from . import catalog
            if catalog.triangulation_stem(str(source)) in catalog.TRIANGULATION_NAMES:
                return catalog.triangulation_document(str(source))
            raise FileNotFoundError(f"no triangulation file {source}")
        return json.loads(p.read_text())
    return json.loads(source)


def load_triangulation(source: Any) -> Triangulation:
    """Parse and validate a ``tri3/1`` gluing table.

    ``source`` may be a dict, a JSON string, a path or a built-in name.

    Raises
    ------
    SchemaError
        Malformed document or inconsistent gluing involution.
    TriangulationError
        Unglued face, orientation inconsistency, non-branched gluing or a
        non-manifold vertex link.
    """
    doc = _read(source)
    if doc.get("format") != "tri3/1":
        raise SchemaError(f"expected format 'tri3/1', got {doc.get('format')!r}")
    n = doc.get("tetrahedra")
    if not isinstance(n, int) or n < 1:
        raise SchemaError("'tetrahedra' must be a positive integer")
    orient = doc.get("orient", [1] * n)
    if len(orient) != n or any(s not in (1, -1) for s in orient):
        raise SchemaError("'orient' must list one sign +1/-1 per tetrahedron")
    glue: dict = {}
    for row in doc.get("gluings", []):
        if len(row) != 5:
            raise SchemaError(f"gluing row {row} must be [tet, face, tet', face', perm]")
        t, f, t2, f2, perm = row
        perm = tuple(int(x) for x in perm)
        if not (0 <= t < n and 0 <= t2 < n and 0 <= f < 4 and 0 <= f2 < 4):
            raise SchemaError(f"gluing row {row} out of range")
        if sorted(perm) != [0, 1, 2, 3] or perm[f] != f2:
            raise SchemaError(f"gluing row {row}: perm must be a permutation sending {f} to {f2}")
        if (t, f) == (t2, f2):
            raise SchemaError(f"face ({t}, {f}) glued to itself")
        inv = [0] * 4
        for i, j in enumerate(perm):
            inv[j] = i
        for key, val in (((t, f), (t2, f2, perm)), ((t2, f2), (t, f, tuple(inv)))):
            old = glue.get(key)
            if old is not None and (old[0], old[1], tuple(old[2][v] for v in FACES[key[1]])) != \
                    (val[0], val[1], tuple(val[2][v] for v in FACES[key[1]])):
                raise SchemaError(f"gluing involution inconsistent at face {key}")
            glue[key] = val
    for t in range(n):
        for f in range(4):
            if (t, f) not in glue:
                raise TriangulationError(f"unglued face (tet {t}, face {f})")
    for (t, f), (t2, f2, perm) in glue.items():
        img = [perm[v] for v in FACES[f]]
        pos = [FACES[f2].index(v) for v in img]
        induced = orient[t] * (-1) ** f * _parity(pos)
        if induced != -orient[t2] * (-1) ** f2:
            raise TriangulationError(
                f"orientation inconsistency between (tet {t}, face {f}) and (tet {t2}, face {f2})")
    for (t, f), (t2, f2, perm) in glue.items():
        img = [perm[v] for v in FACES[f]]
        if img != sorted(img):
            raise TriangulationError(
                f"non-branched gluing (tet {t}, face {f}) -> (tet {t2}, face {f2}): "
                "vertex order not preserved")
    uv, ue, uf = _UnionFind(), _UnionFind(), _UnionFind()
    for (t, f), (t2, f2, perm) in glue.items():
        uf.union((t, f), (t2, f2))
        for v in FACES[f]:
            uv.union((t, v), (t2, perm[v]))
        for a, b in itertools.combinations(FACES[f], 2):
            ue.union((t, EDGE_INDEX[(a, b)]), (t2, EDGE_INDEX[(perm[a], perm[b])]))
    vertex_of = uv.classes([(t, v) for t in range(n) for v in range(4)])
    edge_of = ue.classes([(t, e) for t in range(n) for e in range(6)])
    face_of = uf.classes([(t, f) for t in range(n) for f in range(4)])
    _check_links(n, vertex_of, edge_of)
    return Triangulation(n, tuple(orient), glue, vertex_of, edge_of, face_of,
                         name=str(doc.get("name", "")))


def _check_links(n: int, vertex_of: dict, edge_of: dict) -> None:
    # link of a vertex class: corner triangles, glued in pairs along their sides
    corners: dict[int, int] = {}
    ends: dict[int, set] = {}
    for t in range(n):
        for v in range(4):
            corners[vertex_of[(t, v)]] = corners.get(vertex_of[(t, v)], 0) + 1
        for e, (a, b) in enumerate(EDGES):
            ec = edge_of[(t, e)]
            ends.setdefault(vertex_of[(t, a)], set()).add((ec, 0))
            ends.setdefault(vertex_of[(t, b)], set()).add((ec, 1))
    for v, F in corners.items():
        chi = len(ends[v]) - 3 * F // 2 + F
        if chi != 2:
            raise TriangulationError(f"non-manifold vertex link at vertex {v} (euler characteristic {chi})")


# ---------------------------------------------------------------------------
# dual polyhedron

@dataclass(frozen=True)
class Region:
    """2-stratum dual to a triangulation edge; ``boundary`` lists dual edges cyclically."""

    edge: int
    boundary: tuple[int, ...]
    euler: int = 1


@dataclass(frozen=True)
class DualPolyhedron:
    """Stratification dual to a triangulation.

    ``vertices[x] = (tet, sign)``; ``edges[e] = (source tet, face, target tet, face)``
    oriented from the output side to the input side; ``regions`` are indexed by
    triangulation edges and ``cells`` by triangulation vertices.
    """

    vertices: tuple[tuple[int, int], ...]
    edges: tuple[tuple[int, int, int, int], ...]
    regions: tuple[Region, ...]
    cells: tuple[int, ...]
    edge_of_face: dict = field(default_factory=dict)

    def counts(self) -> tuple[int, int, int, int]:
        return len(self.vertices), len(self.edges), len(self.regions), len(self.cells)


def dual_polyhedron(t: Triangulation) -> DualPolyhedron:
    """Build the dual strata of a validated triangulation.

    Examples
    --------
    >>> from tqft_orbifold.statesum import load_triangulation, dual_polyhedron
    >>> dual_polyhedron(load_triangulation("S3_5tet")).counts()
    (5, 10, 10, 5)
    """
    verts = tuple((k, t.orient[k]) for k in range(t.tetrahedra))
    edges = []
    eof: dict = {}
    for (k, f), (k2, f2, _) in sorted(t.gluings.items()):
        if (k, f) in eof:
            continue
        if t.is_input(k, f):
            edges.append((k2, f2, k, f))
        else:
            edges.append((k, f, k2, f2))
        eof[(k, f)] = eof[(k2, f2)] = len(edges) - 1
    regions = []
    for ec in range(t.num_edges):
        start = next(key for key, c in t.edge_of.items() if c == ec)
        cycle = []
        k, e = start
        a, b = EDGES[e]
        f_in = [v for v in range(4) if v not in (a, b)][0]
        state0 = (k, e, f_in)
        for _ in range(6 * t.tetrahedra):
            c, d = [v for v in range(4) if v not in (a, b)]
            f_out = d if f_in == c else c
            cycle.append(eof[(k, f_out)])
            k, f_in, perm = t.gluings[(k, f_out)]
            a, b = perm[a], perm[b]
            if (k, EDGE_INDEX[(a, b)], f_in) == state0:
                break
        else:
            raise TriangulationError(f"edge {ec}: face cycle does not close")
        regions.append(Region(ec, tuple(cycle)))
    return DualPolyhedron(verts, tuple(edges), tuple(regions), tuple(range(t.num_vertices)), eof)


# ---------------------------------------------------------------------------
# vertex functionals

def tet_labels(c: dict | tuple, t: Triangulation | None = None, tet: int | None = None) -> tuple:
    """Six edge labels of a tetrahedron in ``EDGES`` order."""
    if t is None:
        return tuple(c)
    return tuple(c[t.edge_of[(tet, e)]] for e in range(6))


def face_channel(labels, face: int) -> tuple[int, int, int]:
    """``(c_ab, c_bc, c_ac)`` of face ``face`` with vertices ``a < b < c``."""
    a, b, c = FACES[face]
    return labels[EDGE_INDEX[(a, b)]], labels[EDGE_INDEX[(b, c)]], labels[EDGE_INDEX[(a, c)]]


def vertex_functional(cat: CategoryData, sign: int, labels, inputs) -> complex:
    """Closed diagram of one tetrahedron.

    Parameters
    ----------
    sign : int
        Orientation of the dual vertex (``+1`` for x+, ``-1`` for x-).
    labels : sequence of int
        Edge labels ``(c01, c02, c03, c12, c13, c23)``.
    inputs : sequence of int
        Multiplicity index of the basis vector on each face ``0..3``.

    Returns
    -------
    complex
        ``0`` when some face channel is not admissible.
    """
    ch = [face_channel(labels, f) for f in range(4)]
    for f, (i, j, k) in enumerate(ch):
        N = int(cat.N[i, j, k])
        if N == 0:
            return 0j
        if not 0 <= inputs[f] < N:
            raise ValueError(f"face {f}: index {inputs[f]} outside Hom({i} {j}, {k}) of dim {N}")
    c01, c02, c03, c12, c13, c23 = labels
    m0, m1, m2, m3 = inputs
    one = lambda x: identity(cat, ((x,),))  # noqa: E731
    if sign > 0:
        loop = compose_all(fusion_vertex(cat, c01, c13, c03, m2),
                           tensor(one(c01), fusion_vertex(cat, c12, c23, c13, m0)),
                           tensor(hat_vertex(cat, c01, c12, c02, m3), one(c23)),
                           hat_vertex(cat, c02, c23, c03, m1))
    else:
        loop = compose_all(fusion_vertex(cat, c02, c23, c03, m1),
                           tensor(fusion_vertex(cat, c01, c12, c02, m3), one(c23)),
                           tensor(one(c01), hat_vertex(cat, c12, c23, c13, m0)),
                           hat_vertex(cat, c01, c13, c03, m2))
    return trace(loop)


def _tv_amplitude(cat: CategoryData, sign: int, labels: tuple) -> np.ndarray | None:
    def build():
        ch = [face_channel(labels, f) for f in range(4)]
        shape = tuple(int(cat.N[c]) for c in ch)
        if 0 in shape:
            return None
        out = np.zeros(shape, dtype=complex)
        for idx in itertools.product(*(range(s) for s in shape)):
            out[idx] = vertex_functional(cat, sign, labels, idx)
        return out
    return cat.cached(("tv_tet", sign, labels), build)


# ---------------------------------------------------------------------------
# colouring enumeration

@dataclass
class StateSum:
    """Value of a state sum together with enumeration statistics."""

    value: complex
    prefactor: complex
    admissible: int
    visited: int


class _Plan:
    """Edge order and per-step checks for depth-first colouring enumeration."""

    def __init__(self, t: Triangulation):
        self.t = t
        order: list[int] = []
        for k in range(t.tetrahedra):
            for e in range(6):
                ec = t.edge_of[(k, e)]
                if ec not in order:
                    order.append(ec)
        self.order = order
        pos = {ec: n for n, ec in enumerate(order)}
        self.faces_at: list[list[tuple[int, int]]] = [[] for _ in order]
        seen = set()
        for k in range(t.tetrahedra):
            for f in range(4):
                fc = t.face_of[(k, f)]
                if fc in seen:
                    continue
                seen.add(fc)
                last = max(pos[t.edge_of[(k, EDGE_INDEX[e])]]
                           for e in itertools.combinations(FACES[f], 2))
                self.faces_at[last].append((k, f))
        self.tets_at: list[list[int]] = [[] for _ in order]
        for k in range(t.tetrahedra):
            last = max(pos[t.edge_of[(k, e)]] for e in range(6))
            self.tets_at[last].append(k)
        letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
        if t.num_faces > len(letters):
            raise ValueError("triangulation too large for the contraction planner")
        self.subscripts = ",".join("".join(letters[t.face_of[(k, f)]] for f in range(4))
                                   for k in range(t.tetrahedra)) + "->"


def _enumerate(plan: _Plan, rank: int, face_ok: Callable, tet_amp: Callable,
               weight: Callable, jobs: int = 1) -> tuple[complex, int, int]:
    t = plan.t
    n = len(plan.order)

    def run(first: int):
        col = [0] * t.num_edges
        amps: list = [None] * t.tetrahedra
        total = 0j
        count = visited = 0

        def rec(step: int):
            nonlocal total, count, visited
            if step == n:
                ts = amps
                if all(a.size == 1 for a in ts):
                    val = complex(np.prod([a.reshape(-1)[0] for a in ts]))
                else:
                    val = complex(np.einsum(plan.subscripts, *ts, optimize=True))
                total += weight(col) * val
                count += 1
                return
            ec = plan.order[step]
            choices = range(rank) if step else (first,)
            for c in choices:
                col[ec] = c
                visited += 1
                if not all(face_ok(t, k, f, col) for k, f in plan.faces_at[step]):
                    continue
                ok = True
                for k in plan.tets_at[step]:
                    a = tet_amp(k, tet_labels(col, t, k))
                    if a is None or not np.any(a):
                        ok = False
                        break
                    amps[k] = a
                if ok:
                    rec(step + 1)

        rec(0)
        return total, count, visited

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(run, range(rank)))
    else:
        parts = [run(c) for c in range(rank)]
    # combine in index order
    value = 0j
    for p in parts:
        value += p[0]
    return value, sum(p[1] for p in parts), sum(p[2] for p in parts)


def tv_state_sum(cat: CategoryData, t: Triangulation, jobs: int = 1) -> StateSum:
    """Turaev-Viro sum with enumeration statistics; see :func:`tv_invariant`."""
    plan = _Plan(t)
    dims = np.asarray(cat.dims, dtype=complex)

    def face_ok(t, k, f, col):
        return cat.N[face_channel(tet_labels(col, t, k), f)] > 0

    def amp(k, labels):
        return _tv_amplitude(cat, t.orient[k], labels)

    def weight(col):
        return complex(np.prod(dims[col]))

    value, count, visited = _enumerate(plan, cat.rank, face_ok, amp, weight, jobs)
    pre = complex(global_dimension(cat)) ** (-t.num_vertices)
    return StateSum(pre * value, pre, count, visited)


def tv_invariant(cat: CategoryData, t: Triangulation, jobs: int = 1) -> complex:
    """Turaev-Viro invariant from 6j-type closed diagrams.

    ``(dim S)^(-#vertices) * sum_c prod_e d_c(e) * contraction of the vertex functionals``.

    Examples
    --------
    >>> from tqft_orbifold.catalog import builtin
    >>> from tqft_orbifold.statesum import load_triangulation, tv_invariant
    >>> round(tv_invariant(builtin("vec_z2"), load_triangulation("S3_5tet")).real, 12)
    0.5
    """
    return tv_state_sum(cat, t, jobs).value


# ---------------------------------------------------------------------------
# orbifold evaluation from datum tables

class _DatumTables:
    """Colour maps of the ``T`` basis and dense ``alpha``/``alphabar``/``psi^2`` tables."""

    def __init__(self, datum):
        from .frobenius import central_idempotents
        from .orbifold import _induce, induce_psi

        V = datum.cat
        if not V.is_vect:
            raise ValueError("orbifold state sum needs a datum in the vector-space engine")
        u = V.unit
        T = datum.T
        W = T.carrier
        self.n = n = int(sum(len(x) for x in W))
        idem = central_idempotents(datum.A)
        self.rank = len(idem)
        self.colour: dict[str, np.ndarray] = {}
        for tag in "012":
            a = T.action(tag)
            col = -np.ones(n, dtype=int)
            for j, e in enumerate(idem):
                E = _induce(a, e, W).dense(u)
                if np.abs(E - np.diag(np.diag(E))).max() > 1e-9:
                    raise ValueError("T basis is not adapted to the algebra summands")
                col[np.abs(np.diag(E) - 1) < 1e-9] = j
            if (col < 0).any():
                raise ValueError(f"T basis vectors without a colour for slot {tag}")
            self.colour[tag] = col
        self.index: dict[tuple, np.ndarray] = {}
        for p in range(n):
            key = (self.colour["1"][p], self.colour["2"][p], self.colour["0"][p])
            self.index.setdefault(key, [])
            self.index[key].append(p)
        self.index = {k: np.asarray(v) for k, v in self.index.items()}
        self.alpha = datum.alpha.dense(u).reshape(n, n, n, n)
        self.alphabar = datum.alphabar.dense(u).reshape(n, n, n, n)
        self.psi2 = {tag: induce_psi(datum, tag, power=2).dense(u) for tag in "012"}
        self.phi2 = complex(datum.phi2)


def _psi_edges(t: Triangulation) -> dict:
    """For every edge class, the input face and slot that carries its ``psi^2``."""
    out: dict = {}
    for k in range(t.tetrahedra):
        for f in range(4):
            if not t.is_input(k, f):
                continue
            for tag, i, j in FACE_SLOTS:
                e = (FACES[f][i], FACES[f][j])
                ec = t.edge_of[(k, EDGE_INDEX[e])]
                out.setdefault(ec, (k, f, tag))
    return out


def orbifold_state_sum_details(datum, t: Triangulation, jobs: int = 1) -> StateSum:
    """Evaluate the datum-decorated dual stratification; see :func:`orbifold_state_sum`."""
    tabs = _DatumTables(datum)
    plan = _Plan(t)
    psi_at: dict = {}
    for ec, (k, f, tag) in _psi_edges(t).items():
        psi_at.setdefault((k, f), []).append(tag)

    def face_ok(t, k, f, col):
        return face_channel(tet_labels(col, t, k), f) in tabs.index

    def amp(k, labels):
        idx = [tabs.index[face_channel(labels, f)] for f in range(4)]
        if t.orient[k] > 0:
            # alpha: (face 2, face 0) -> (face 1, face 3)
            blk = tabs.alpha[np.ix_(idx[1], idx[3], idx[2], idx[0])]
            a = np.transpose(blk, (3, 0, 2, 1))
        else:
            # alphabar: (face 1, face 3) -> (face 2, face 0)
            blk = tabs.alphabar[np.ix_(idx[2], idx[0], idx[1], idx[3])]
            a = np.transpose(blk, (1, 2, 0, 3))
        for f in range(4):
            for tag in psi_at.get((k, f), ()):
                M = tabs.psi2[tag][np.ix_(idx[f], idx[f])]
                a = np.moveaxis(np.tensordot(a, M, axes=([f], [0])), -1, f)
        return a

    value, count, visited = _enumerate(plan, tabs.rank, face_ok, amp, lambda col: 1.0, jobs)
    pre = tabs.phi2 ** t.num_vertices
    return StateSum(pre * value, pre, count, visited)


def orbifold_state_sum(cat: CategoryData, t: Triangulation, datum=None, jobs: int = 1) -> complex:
    """Orbifold-side evaluation ``phi^(2 #vertices) * sum over decorations of alpha tables``.

    The datum defaults to the one built from ``cat`` by
    :func:`tqft_orbifold.orbifold.from_spherical_category`; only its
    ``alpha``, ``alphabar``, ``psi`` and ``phi`` tables and the ``T`` actions
    are read.
    """
    if datum is None:
        from .orbifold import from_spherical_category
        _, datum = from_spherical_category(cat)
    return orbifold_state_sum_details(datum, t, jobs).value


def triangulation_independence(cat: CategoryData, t1: Triangulation, t2: Triangulation,
                               tolerance: float = 1e-8) -> VerificationReport:
    """Compare ``tv_invariant`` on two triangulations of the same manifold."""
    z1, z2 = tv_invariant(cat, t1), tv_invariant(cat, t2)
    rep = VerificationReport(f"independence[{cat.name}: {t1.name or 't1'} vs {t2.name or 't2'}]")
    rep.add("difference", abs(z1 - z2), tolerance, detail=f"{z1:.12g} vs {z2:.12g}")
    return rep
