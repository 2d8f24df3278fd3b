"""String-diagram evaluation over fusion-tree bases.

Objects are tuples of simple indices (formal direct sums, summand order
matters), tensor words are tuples of objects.  The basis of ``Hom(W, k)`` for
a word ``W`` and simple ``k`` is the set of right-comb fusion trees::

    x1 (x) ( x2 (x) ( ... (x) (x_{n-1} (x) x_n) ) ) -> k

A tree is a nested tuple: ``()`` for the empty word, ``(s,)`` for a single
factor with summand ``s`` and ``(s, m, r, sub)`` otherwise, where ``sub`` is
the tree of the remaining factors with root ``r`` and ``m`` the multiplicity
index of the vertex ``x_s (x) r -> k``.

A :class:`Morphism` ``f: V -> W`` stores, for every root ``k``, the matrix
``<t_W| f |t_V>`` where ``<t|`` are fusion trees and ``|t>`` the splitting
trees dual to them (``<t|t'> = delta * id_k``).  With this normalization
composition is blockwise matrix multiplication.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .skeletal_core import CategoryData

Obj = tuple
Word = tuple


def as_word(word: Iterable) -> Word:
    return tuple(tuple(int(x) for x in obj) for obj in word)


@dataclass
class WordBasis:
    word: Word
    trees: dict[int, list]
    index: dict[int, dict]

    def size(self, root: int) -> int:
        return len(self.trees.get(root, ()))

    @property
    def roots(self) -> list[int]:
        return sorted(self.trees)

    @property
    def total(self) -> int:
        return sum(len(v) for v in self.trees.values())


def tree_root_label(tree, word: Word):
    """Root of a single-factor tree or ``None`` if ambiguous without context."""
    if len(tree) == 1:
        return word[0][tree[0]]
    return None


def basis(cat: CategoryData, word: Iterable) -> WordBasis:
    word = as_word(word)
    return cat.cached(("basis", word), lambda: _enumerate(cat, word))


def _enumerate(cat: CategoryData, word: Word) -> WordBasis:
    n = len(word)
    trees: dict[int, list] = {}
    if n == 0:
        trees[cat.unit] = [()]
    elif n == 1:
        for s, x in enumerate(word[0]):
            trees.setdefault(x, []).append((s,))
    else:
        rest = basis(cat, word[1:]).trees
        N = cat.N
        for s, x in enumerate(word[0]):
            for r in sorted(rest):
                for k in range(cat.rank):
                    for m in range(N[x, r, k]):
                        lst = trees.setdefault(k, [])
                        lst.extend((s, m, r, t) for t in rest[r])
    trees = {k: trees[k] for k in sorted(trees)}
    index = {k: {t: i for i, t in enumerate(v)} for k, v in trees.items()}
    return WordBasis(word, trees, index)


def hom_dim(cat: CategoryData, src: Iterable, tgt: Iterable) -> int:
    """Dimension of ``Hom(src, tgt)``: number of tree pairs with equal root."""
    for w in (src, tgt):
        for obj in as_word(w):
            if any(not 0 <= x < cat.rank for x in obj):
                raise ValueError(f"label outside category {cat.name}")
    bs, bt = basis(cat, src), basis(cat, tgt)
    return sum(bs.size(k) * bt.size(k) for k in bs.trees)


class Morphism:
    """Linear combination of tree pairs, stored as sparse per-root blocks."""

    __slots__ = ("cat", "src", "tgt", "blocks")

    def __init__(self, cat: CategoryData, src: Iterable, tgt: Iterable,
                 blocks: dict[int, sp.spmatrix] | None = None):
        self.cat = cat
        self.src = as_word(src)
        self.tgt = as_word(tgt)
        bs, bt = basis(cat, self.src), basis(cat, self.tgt)
        out = {}
        for k, m in (blocks or {}).items():
            shape = (bt.size(k), bs.size(k))
            if shape[0] == 0 or shape[1] == 0:
                continue
            m = sp.csr_matrix(m, dtype=complex)
            if m.shape != shape:
                raise ValueError(f"block {k} has shape {m.shape}, expected {shape}")
            m.eliminate_zeros()
            if m.nnz:
                out[k] = m
        self.blocks = out

    def __repr__(self) -> str:
        return (f"Morphism({self.src} -> {self.tgt}, roots={sorted(self.blocks)}, "
                f"nnz={self.nnz})")

    @property
    def nnz(self) -> int:
        return sum(m.nnz for m in self.blocks.values())

    def block(self, root: int) -> sp.csr_matrix:
        m = self.blocks.get(root)
        if m is None:
            shape = (basis(self.cat, self.tgt).size(root), basis(self.cat, self.src).size(root))
            return sp.csr_matrix(shape, dtype=complex)
        return m

    def dense(self, root: int) -> np.ndarray:
        return self.block(root).toarray()

    def _same_shape(self, other: "Morphism") -> None:
        if other.cat is not self.cat:
            raise ValueError("morphisms over different categories")
        if self.src != other.src or self.tgt != other.tgt:
            raise ValueError(f"shape mismatch {self.src}->{self.tgt} vs {other.src}->{other.tgt}")

    def __add__(self, other: "Morphism") -> "Morphism":
        self._same_shape(other)
        roots = set(self.blocks) | set(other.blocks)
        return Morphism(self.cat, self.src, self.tgt,
                        {k: self.block(k) + other.block(k) for k in roots})

    def __sub__(self, other: "Morphism") -> "Morphism":
        return self + (-1.0) * other

    def __neg__(self) -> "Morphism":
        return (-1.0) * self

    def __mul__(self, z) -> "Morphism":
        z = complex(z)
        return Morphism(self.cat, self.src, self.tgt, {k: m * z for k, m in self.blocks.items()})

    __rmul__ = __mul__

    def __matmul__(self, other: "Morphism") -> "Morphism":
        return compose(self, other)

    def residual(self, other: "Morphism") -> float:
        """Max entrywise absolute difference."""
        self._same_shape(other)
        worst = 0.0
        for k in set(self.blocks) | set(other.blocks):
            d = self.block(k) - other.block(k)
            if d.nnz:
                worst = max(worst, float(np.abs(d.data).max()))
        return worst

    def max_abs(self) -> float:
        return max((float(np.abs(m.data).max()) for m in self.blocks.values() if m.nnz),
                   default=0.0)

    def entries(self) -> list[tuple]:
        """Sparse listing ``(root, tgt_tree, src_tree, value)``."""
        bs, bt = basis(self.cat, self.src), basis(self.cat, self.tgt)
        out = []
        for k, m in sorted(self.blocks.items()):
            c = m.tocoo()
            for r, s, v in zip(c.row, c.col, c.data):
                out.append((k, bt.trees[k][r], bs.trees[k][s], complex(v)))
        return out

    def to_dict(self) -> dict:
        return {"src": [list(o) for o in self.src], "tgt": [list(o) for o in self.tgt],
                "blocks": {str(k): {"rows": m.tocoo().row.tolist(),
                                    "cols": m.tocoo().col.tolist(),
                                    "re": m.tocoo().data.real.tolist(),
                                    "im": m.tocoo().data.imag.tolist()}
                           for k, m in sorted(self.blocks.items())}}

    @staticmethod
    def from_dict(cat: CategoryData, doc: dict) -> "Morphism":
        src, tgt = as_word(doc["src"]), as_word(doc["tgt"])
        bs, bt = basis(cat, src), basis(cat, tgt)
        blocks = {}
        for k, b in doc["blocks"].items():
            k = int(k)
            data = np.asarray(b["re"], dtype=float) + 1j * np.asarray(b["im"], dtype=float)
            blocks[k] = sp.coo_matrix((data, (b["rows"], b["cols"])),
                                      shape=(bt.size(k), bs.size(k)))
        return Morphism(cat, src, tgt, blocks)


def from_entries(cat: CategoryData, src: Iterable, tgt: Iterable, entries: dict) -> Morphism:
    """Build from ``{(root, tgt_tree, src_tree): value}``."""
    src, tgt = as_word(src), as_word(tgt)
    bs, bt = basis(cat, src), basis(cat, tgt)
    per: dict[int, tuple[list, list, list]] = {}
    for (k, tt, st), v in entries.items():
        if v == 0:
            continue
        r, c, d = per.setdefault(k, ([], [], []))
        r.append(bt.index[k][tt])
        c.append(bs.index[k][st])
        d.append(v)
    blocks = {k: sp.coo_matrix((np.asarray(d, dtype=complex), (r, c)),
                               shape=(bt.size(k), bs.size(k)))
              for k, (r, c, d) in per.items()}
    return Morphism(cat, src, tgt, blocks)


def identity(cat: CategoryData, word: Iterable) -> Morphism:
    word = as_word(word)
    b = basis(cat, word)
    return Morphism(cat, word, word, {k: sp.identity(b.size(k), dtype=complex, format="csr")
                                      for k in b.trees})


def zero(cat: CategoryData, src: Iterable, tgt: Iterable) -> Morphism:
    return Morphism(cat, src, tgt, {})


def compose(f: Morphism, g: Morphism) -> Morphism:
    """``f o g``."""
    if f.cat is not g.cat:
        raise ValueError("morphisms over different categories")
    if f.src != g.tgt:
        raise ValueError(f"word mismatch: source {f.src} vs target {g.tgt}")
    blocks = {k: f.blocks[k] @ g.blocks[k] for k in f.blocks if k in g.blocks}
    return Morphism(f.cat, g.src, f.tgt, blocks)


def compose_all(*fs: Morphism) -> Morphism:
    """``fs[0] o fs[1] o ... o fs[-1]``, evaluated right to left."""
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = compose(f, out)
    return out


# ---------------------------------------------------------------------------
# re-treeing of concatenated words

def _joined_layout(cat: CategoryData, W1: Word, W2: Word, c: int):
    b1, b2 = basis(cat, W1), basis(cat, W2)
    segs, off = [], 0
    for a in range(cat.rank):
        for b in range(cat.rank):
            for nu in range(cat.N[a, b, c]):
                n1, n2 = b1.size(a), b2.size(b)
                segs.append(((a, b, nu), off, n1, n2))
                off += n1 * n2
    return segs, off


def _layout(cat, W1, W2, c):
    return cat.cached(("layout", W1, W2, c), lambda: _joined_layout(cat, W1, W2, c))


def _jrow(cat, W1, W2, c, a, b, nu, i1, i2) -> int:
    segs = cat.cached(("segidx", W1, W2, c),
                      lambda: {s[0]: (s[1], s[3]) for s in _layout(cat, W1, W2, c)[0]})
    off, n2 = segs[(a, b, nu)]
    return off + i1 * n2 + i2


def _conversion(cat: CategoryData, W1: Word, W2: Word) -> dict[int, tuple[dict, dict]]:
    """Dict-of-dict matrices (C, Cinv) per root, joined rows vs comb columns.

    ``C[c][row][col]``: joined tree ``row`` = sum C comb tree ``col``.
    ``Cinv[c][col][row]``: comb tree ``col`` = sum Cinv joined tree ``row``.
    """
    return cat.cached(("conv", W1, W2), lambda: _build_conversion(cat, W1, W2))


def _build_conversion(cat: CategoryData, W1: Word, W2: Word):
    W = W1 + W2
    bW = basis(cat, W)
    b1, b2 = basis(cat, W1), basis(cat, W2)
    u = cat.unit
    out: dict[int, tuple[dict, dict]] = {}
    for c in bW.trees:
        C: dict[int, dict[int, complex]] = {}
        Ci: dict[int, dict[int, complex]] = {}
        out[c] = (C, Ci)

        def put(row, col, v):
            if v != 0:
                C.setdefault(row, {})[col] = C.get(row, {}).get(col, 0) + v

        def puti(col, row, v):
            if v != 0:
                Ci.setdefault(col, {})[row] = Ci.get(col, {}).get(row, 0) + v

        if len(W1) == 0:
            for i2, t2 in enumerate(b2.trees.get(c, [])):
                row = _jrow(cat, W1, W2, c, u, c, 0, 0, i2)
                put(row, i2, 1.0)
                puti(i2, row, 1.0)
            continue
        if len(W2) == 0:
            for i1, t1 in enumerate(b1.trees.get(c, [])):
                row = _jrow(cat, W1, W2, c, c, u, 0, i1, 0)
                put(row, i1, 1.0)
                puti(i1, row, 1.0)
            continue
        if len(W1) == 1:
            for a in b1.trees:
                for i1, t1 in enumerate(b1.trees[a]):
                    for b in b2.trees:
                        for nu in range(cat.N[a, b, c]):
                            for i2, t2 in enumerate(b2.trees[b]):
                                col = bW.index[c][(t1[0], nu, b, t2)]
                                row = _jrow(cat, W1, W2, c, a, b, nu, i1, i2)
                                put(row, col, 1.0)
                                puti(col, row, 1.0)
            continue
        W1p = W1[1:]
        sub = _conversion(cat, W1p, W2)
        bsub = basis(cat, W1p + W2)
        b1p = basis(cat, W1p)
        for a in b1.trees:
            for i1, t1 in enumerate(b1.trees[a]):
                s, m1, r, t1p = t1
                x = W1[0][s]
                i1p = b1p.index[r][t1p]
                for b in b2.trees:
                    for nu in range(cat.N[a, b, c]):
                        left = (a, nu, m1)
                        for i2 in range(b2.size(b)):
                            row = _jrow(cat, W1, W2, c, a, b, nu, i1, i2)
                            for f in range(cat.rank):
                                if f not in sub:
                                    continue
                                Cf, Cfi = sub[f]
                                for lam in range(cat.N[x, f, c]):
                                    for mu in range(cat.N[r, b, f]):
                                        right = (f, lam, mu)
                                        coef = cat.finv(x, r, b, c, left, right)
                                        coef_f = cat.fval(x, r, b, c, right, left)
                                        srow = _jrow(cat, W1p, W2, f, r, b, mu, i1p, i2)
                                        if coef != 0:
                                            for ucol, v in Cf.get(srow, {}).items():
                                                col = bW.index[c][(s, lam, f, bsub.trees[f][ucol])]
                                                put(row, col, coef * v)
                                        if coef_f != 0:
                                            for ucol, v in _transpose_get(Cfi, srow, cat, W1p, W2, f):
                                                col = bW.index[c][(s, lam, f, bsub.trees[f][ucol])]
                                                puti(col, row, v * coef_f)
    return out


def _transpose_get(Ci: dict, srow: int, cat, W1p, W2, f):
    """Entries ``(col, Ci[col][srow])`` for a fixed joined row ``srow``."""
    tr = cat.cached(("convT", W1p, W2, f), lambda: _transpose(Ci))
    return tr.get(srow, {}).items()


def _transpose(d: dict) -> dict:
    out: dict = {}
    for a, row in d.items():
        for b, v in row.items():
            out.setdefault(b, {})[a] = v
    return out


def _dd_to_sparse(d: dict, shape) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    for r, row in d.items():
        for c, v in row.items():
            rows.append(r)
            cols.append(c)
            vals.append(v)
    return sp.csr_matrix((np.asarray(vals, dtype=complex), (rows, cols)), shape=shape)


def _conv_sparse(cat: CategoryData, W1: Word, W2: Word, c: int):
    def build():
        C, Ci = _conversion(cat, W1, W2)[c]
        n = basis(cat, W1 + W2).size(c)
        _, nj = _layout(cat, W1, W2, c)
        return _dd_to_sparse(C, (nj, n)), _dd_to_sparse(Ci, (n, nj))
    return cat.cached(("convsp", W1, W2, c), build)


_DENSE_LIMIT = 4096


def _conv_dense(cat: CategoryData, W1: Word, W2: Word, c: int):
    def build():
        C, Ci = _conv_sparse(cat, W1, W2, c)
        return C.toarray(), Ci.toarray()
    return cat.cached(("convdn", W1, W2, c), build)


def tensor(f: Morphism, g: Morphism) -> Morphism:
    """``f (x) g`` on the concatenated words, re-expressed in right-comb bases."""
    if f.cat is not g.cat:
        raise ValueError("morphisms over different categories")
    cat = f.cat
    src, tgt = f.src + g.src, f.tgt + g.tgt
    if cat.is_vect:
        if 0 in f.blocks and 0 in g.blocks:
            return Morphism(cat, src, tgt, {0: sp.kron(f.blocks[0], g.blocks[0], format="csr")})
        return Morphism(cat, src, tgt, {})
    if not f.src and not f.tgt:
        z = complex(f.block(cat.unit)[0, 0]) if cat.unit in f.blocks else 0.0
        return Morphism(cat, src, tgt, {k: m * z for k, m in g.blocks.items()})
    if not g.src and not g.tgt:
        z = complex(g.block(cat.unit)[0, 0]) if cat.unit in g.blocks else 0.0
        return Morphism(cat, src, tgt, {k: m * z for k, m in f.blocks.items()})
    bt = basis(cat, tgt)
    bs_ = basis(cat, src)
    blocks = {}
    for c in bt.trees:
        if bs_.size(c) == 0:
            continue
        segs_t, nt = _layout(cat, f.tgt, g.tgt, c)
        segs_s, ns = _layout(cat, f.src, g.src, c)
        if nt * ns <= _DENSE_LIMIT:
            # small blocks: dense arithmetic avoids sparse construction overhead
            K = np.zeros((nt, ns), dtype=complex)
            for (key, ot, n1t, n2t), (_, os_, n1s, n2s) in zip(segs_t, segs_s):
                a, b, _nu = key
                if a in f.blocks and b in g.blocks:
                    K[ot:ot + n1t * n2t, os_:os_ + n1s * n2s] = np.kron(
                        f.blocks[a].toarray(), g.blocks[b].toarray())
            if not K.any():
                continue
            _, Ci_t = _conv_dense(cat, f.tgt, g.tgt, c)
            C_s, _ = _conv_dense(cat, f.src, g.src, c)
            blocks[c] = Ci_t @ K @ C_s
            continue
        parts = []
        for (key, _, n1t, n2t), (_, _, n1s, n2s) in zip(segs_t, segs_s):
            a, b, _nu = key
            if a in f.blocks and b in g.blocks:
                parts.append(sp.kron(f.blocks[a], g.blocks[b], format="csr"))
            else:
                parts.append(sp.csr_matrix((n1t * n2t, n1s * n2s), dtype=complex))
        if not parts:
            continue
        K = sp.block_diag(parts, format="csr") if len(parts) > 1 else parts[0]
        if K.nnz == 0:
            continue
        _, Ci_t = _conv_sparse(cat, f.tgt, g.tgt, c)
        C_s, _ = _conv_sparse(cat, f.src, g.src, c)
        blocks[c] = Ci_t @ K @ C_s
    return Morphism(cat, src, tgt, blocks)


def tensor_all(*fs: Morphism) -> Morphism:
    out = fs[0]
    for f in fs[1:]:
        out = tensor(out, f)
    return out


def extend(f: Morphism, left: Iterable = (), right: Iterable = ()) -> Morphism:
    """``id_left (x) f (x) id_right``."""
    left, right = as_word(left), as_word(right)
    out = f
    if left:
        out = tensor(identity(f.cat, left), out)
    if right:
        out = tensor(out, identity(f.cat, right))
    return out


def at(f: Morphism, word: Iterable, position: int) -> Morphism:
    """Apply ``f`` to the factors ``word[position : position + len(f.src)]``."""
    word = as_word(word)
    n = len(f.src)
    if word[position:position + n] != f.src:
        raise ValueError(f"factors {word[position:position + n]} do not match source {f.src}")
    return extend(f, word[:position], word[position + n:])


# ---------------------------------------------------------------------------
# elementary morphisms

def fusion_vertex(cat: CategoryData, i: int, j: int, k: int, m: int = 0) -> Morphism:
    """Basis vector of ``Hom(i (x) j, k)``."""
    if not 0 <= m < cat.N[i, j, k]:
        raise ValueError(f"channel ({i},{j}->{k}) index {m} not admissible")
    return from_entries(cat, ((i,), (j,)), ((k,),), {(k, (0,), (0, m, j, (0,))): 1.0})


def splitting_vertex(cat: CategoryData, i: int, j: int, k: int, m: int = 0) -> Morphism:
    """Dual basis vector in ``Hom(k, i (x) j)`` with ``fusion o splitting = id``."""
    if not 0 <= m < cat.N[i, j, k]:
        raise ValueError(f"channel ({i},{j}->{k}) index {m} not admissible")
    return from_entries(cat, ((k,),), ((i,), (j,)), {(k, (0, m, j, (0,)), (0,)): 1.0})


def hat_vertex(cat: CategoryData, i: int, j: int, k: int, m: int = 0) -> Morphism:
    """Dual with respect to the trace pairing: ``fusion o hat = id / d_k``."""
    return splitting_vertex(cat, i, j, k, m) * (1.0 / cat.dims[k])


def braid_pair(cat: CategoryData, X: Obj, Y: Obj, over: bool = True) -> Morphism:
    """``c_{X,Y}: X (x) Y -> Y (x) X`` (over) or the inverse crossing ``c_{Y,X}^{-1}``."""
    if cat.R is None:
        raise ValueError(f"category {cat.name} has no braiding data")
    X, Y = tuple(X), tuple(Y)
    ent = {}
    for s, x in enumerate(X):
        for t, y in enumerate(Y):
            for k in range(cat.rank):
                nxy, nyx = cat.N[x, y, k], cat.N[y, x, k]
                if not nxy:
                    continue
                if over:
                    M = cat.R[(x, y, k)].T
                else:
                    M = np.linalg.inv(cat.R[(y, x, k)].T)
                for be in range(nyx):
                    for al in range(nxy):
                        ent[(k, (t, be, x, (s,)), (s, al, y, (t,)))] = M[be, al]
    return from_entries(cat, (X, Y), (Y, X), ent)


def braid(cat: CategoryData, word: Iterable, position: int, over: bool = True) -> Morphism:
    """Exchange factors ``position`` and ``position + 1`` of ``word``."""
    word = as_word(word)
    if not 0 <= position < len(word) - 1:
        raise ValueError(f"position {position} out of range for word of length {len(word)}")
    c = braid_pair(cat, word[position], word[position + 1], over)
    return extend(c, word[:position], word[position + 2:])


def dual_object(cat: CategoryData, X: Obj) -> Obj:
    return tuple(cat.dual[x] for x in X)


def ev(cat: CategoryData, X: Obj) -> Morphism:
    """``X* (x) X -> 1``."""
    X = tuple(X)
    Xs = dual_object(cat, X)
    u = cat.unit
    return from_entries(cat, (Xs, X), (), {(u, (), (s, 0, x, (s,))): 1.0 for s, x in enumerate(X)})


def coev(cat: CategoryData, X: Obj) -> Morphism:
    """``1 -> X (x) X*``."""
    X = tuple(X)
    Xs = dual_object(cat, X)
    u = cat.unit
    return from_entries(cat, (), (X, Xs),
                        {(u, (s, 0, Xs[s], (s,)), ()): 1.0 / cat.fold_coeff(x)
                         for s, x in enumerate(X)})


def evt(cat: CategoryData, X: Obj) -> Morphism:
    """``X (x) X* -> 1``."""
    X = tuple(X)
    Xs = dual_object(cat, X)
    u = cat.unit
    return from_entries(cat, (X, Xs), (),
                        {(u, (), (s, 0, Xs[s], (s,))): cat.pivotal[x] for s, x in enumerate(X)})


def coevt(cat: CategoryData, X: Obj) -> Morphism:
    """``1 -> X* (x) X``."""
    X = tuple(X)
    Xs = dual_object(cat, X)
    u = cat.unit
    return from_entries(cat, (), (Xs, X),
                        {(u, (s, 0, x, (s,)), ()): 1.0 / (cat.pivotal[x] * cat.fold_coeff_left(x))
                         for s, x in enumerate(X)})


def right_trace(f: Morphism) -> Morphism:
    """Close the last factor, which must agree in source and target."""
    cat = f.cat
    if not f.src or not f.tgt or f.src[-1] != f.tgt[-1]:
        raise ValueError("position mismatch: last factors of source and target differ")
    X = f.src[-1]
    V, W = f.src[:-1], f.tgt[:-1]
    Xs = (dual_object(cat, X),)
    step = extend(coev(cat, X), V)
    step = compose(extend(f, (), Xs), step)
    return compose(extend(evt(cat, X), W), step)


def left_trace(f: Morphism) -> Morphism:
    """Close the first factor, which must agree in source and target."""
    cat = f.cat
    if not f.src or not f.tgt or f.src[0] != f.tgt[0]:
        raise ValueError("position mismatch: first factors of source and target differ")
    X = f.src[0]
    V, W = f.src[1:], f.tgt[1:]
    Xs = (dual_object(cat, X),)
    step = extend(coevt(cat, X), (), V)
    step = compose(extend(f, Xs), step)
    return compose(extend(ev(cat, X), (), W), step)


def partial_trace(f: Morphism, factor: int) -> Morphism:
    """Trace out an outer source factor: ``0`` closes on the left, the last index on the right."""
    n = len(f.src)
    if factor < 0:
        factor += n
    if n and factor == n - 1:
        return right_trace(f)
    if n and factor == 0:
        return left_trace(f)
    raise ValueError("position mismatch: traced factor must be outermost in source and target")


def trace(f: Morphism) -> complex:
    """Full right trace of an endomorphism of a word."""
    if f.src != f.tgt:
        raise ValueError("trace needs an endomorphism")
    g = f
    while g.src:
        g = right_trace(g)
    return scalar(g)


def spherical_trace(f: Morphism) -> complex:
    """``sum_k d_k tr(f^k)`` for an endomorphism; agrees with :func:`trace` when spherical."""
    cat = f.cat
    return complex(sum(cat.dims[k] * m.diagonal().sum() for k, m in f.blocks.items()))


def scalar(f: Morphism) -> complex:
    if f.src or f.tgt:
        raise ValueError("scalar needs a morphism 1 -> 1")
    m = f.blocks.get(f.cat.unit)
    return 0j if m is None else complex(m[0, 0])


def fold(f: Morphism, side: str = "right") -> Morphism:
    """Bend the outer target factor on ``side`` into the source.

    ``right``: ``V -> W (x) Y`` becomes ``V (x) Y* -> W``;
    ``left``:  ``V -> Y (x) W`` becomes ``Y* (x) V -> W``.
    """
    cat = f.cat
    if not f.tgt:
        raise ValueError("nothing to fold")
    if side == "right":
        Y, W = f.tgt[-1], f.tgt[:-1]
        step = extend(f, (), (dual_object(cat, Y),))
        return compose(extend(evt(cat, Y), W), step)
    if side == "left":
        Y, W = f.tgt[0], f.tgt[1:]
        step = extend(f, (dual_object(cat, Y),))
        return compose(extend(ev(cat, Y), (), W), step)
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def unfold(f: Morphism, side: str = "right") -> Morphism:
    """Inverse of :func:`fold` (the source factor must be a dual ``Y*``)."""
    cat = f.cat
    if not f.src:
        raise ValueError("nothing to unfold")
    if side == "right":
        Ys, V = f.src[-1], f.src[:-1]
        Y = dual_object(cat, Ys)
        step = extend(coevt(cat, Y), V)
        return compose(extend(f, (), (Y,)), step)
    if side == "left":
        Ys, V = f.src[0], f.src[1:]
        Y = dual_object(cat, Ys)
        step = extend(coev(cat, Y), (), V)
        return compose(extend(f, (Y,)), step)
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def fuse(cat: CategoryData, word: Iterable) -> tuple[Obj, Morphism, Morphism]:
    """Semisimple object ``Y`` isomorphic to ``word`` with ``iota: Y -> word``, ``pi = iota^-1``."""
    word = as_word(word)
    b = basis(cat, word)
    Y = tuple(k for k in b.roots for _ in b.trees[k])
    blocks_i = {k: sp.identity(b.size(k), dtype=complex, format="csr") for k in b.trees}
    iota = Morphism(cat, (Y,), word, blocks_i)
    pi = Morphism(cat, word, (Y,), blocks_i)
    return Y, iota, pi


def snake_residual(cat: CategoryData, X: Obj) -> float:
    """Largest deviation among the four zig-zag identities for ``X``."""
    X = tuple(X)
    Xs = dual_object(cat, X)
    idX, idXs = identity(cat, (X,)), identity(cat, (Xs,))
    s1 = compose(extend(ev(cat, X), (X,)), extend(coev(cat, X), (), (X,)))
    s2 = compose(extend(ev(cat, X), (), (Xs,)), extend(coev(cat, X), (Xs,)))
    s3 = compose(extend(evt(cat, X), (), (X,)), extend(coevt(cat, X), (X,)))
    s4 = compose(extend(evt(cat, X), (Xs,)), extend(coevt(cat, X), (), (Xs,)))
    return max(s1.residual(idX), s2.residual(idXs), s3.residual(idX), s4.residual(idXs))


def hexagon_residuals(cat: CategoryData, X: Obj, Y: Obj, Z: Obj) -> tuple[float, float]:
    """Residuals of both hexagons, with the composite factor fused to a semisimple object."""
    X, Y, Z = tuple(X), tuple(Y), tuple(Z)
    YZ, iota, pi = fuse(cat, (Y, Z))
    lhs = compose_all(extend(iota, (), (X,)), braid_pair(cat, X, YZ), extend(pi, (X,)))
    rhs = compose(braid(cat, (Y, X, Z), 1), braid(cat, (X, Y, Z), 0))
    h1 = lhs.residual(rhs)
    XY, iota, pi = fuse(cat, (X, Y))
    lhs = compose_all(extend(iota, (Z,)), braid_pair(cat, XY, Z), extend(pi, (), (Z,)))
    rhs = compose(braid(cat, (X, Z, Y), 0), braid(cat, (X, Y, Z), 1))
    return h1, lhs.residual(rhs)


def twist_from_braiding(cat: CategoryData, i: int) -> complex:
    """Right partial trace of ``c_{i,i}``, a multiple of ``id_i``."""
    t = right_trace(braid_pair(cat, (i,), (i,)))
    m = t.blocks.get(i)
    return 0j if m is None else complex(m[0, 0])


def random_morphism(cat: CategoryData, src: Iterable, tgt: Iterable,
                    rng: np.random.Generator, density: float = 1.0) -> Morphism:
    """Dense random complex morphism (used by property tests)."""
    bs, bt = basis(cat, src), basis(cat, tgt)
    blocks = {}
    for k in bs.trees:
        shape = (bt.size(k), bs.size(k))
        if 0 in shape:
            continue
        m = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        if density < 1.0:
            m = m * (rng.random(shape) < density)
        blocks[k] = m
    return Morphism(cat, src, tgt, blocks)


def direct_sum_embed(f: Morphism, src: Word, tgt: Word,
                     src_offsets: Sequence[int], tgt_offsets: Sequence[int]) -> Morphism:
    """Place ``f`` inside words of larger direct sums.

    Factor ``n`` of ``f.src`` is the slice of ``src[n]`` starting at
    ``src_offsets[n]`` (same for targets); summand indices are shifted.
    """
    cat = f.cat
    src, tgt = as_word(src), as_word(tgt)
    for w, small, offs in ((src, f.src, src_offsets), (tgt, f.tgt, tgt_offsets)):
        if len(w) != len(small):
            raise ValueError("word length mismatch in embedding")
        for big, obj, o in zip(w, small, offs):
            if tuple(big[o:o + len(obj)]) != tuple(obj):
                raise ValueError("embedded object is not a slice of the target object")

    def shift(tree, offs):
        if not offs:
            return tree
        if len(tree) == 1:
            return (tree[0] + offs[0],)
        s, m, r, sub = tree
        return (s + offs[0], m, r, shift(sub, offs[1:]))

    ent = {}
    for k, tt, st, v in f.entries():
        ent[(k, shift(tt, list(tgt_offsets)), shift(st, list(src_offsets)))] = v
    return from_entries(cat, src, tgt, ent)


def relabel(f: Morphism, target: CategoryData, label_map: dict[int, int]) -> Morphism:
    """Copy ``f`` into another engine by renaming simple labels."""
    def mo(obj):
        return tuple(label_map[x] for x in obj)

    def mt(tree):
        if len(tree) <= 1:
            return tree
        s, m, r, sub = tree
        return (s, m, label_map[r], mt(sub))

    src = tuple(mo(o) for o in f.src)
    tgt = tuple(mo(o) for o in f.tgt)
    ent = {(label_map[k], mt(tt), mt(st)): v for k, tt, st, v in f.entries()}
    return from_entries(target, src, tgt, ent)
