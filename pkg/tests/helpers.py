"""Shared sampling helpers for the property tests."""
from __future__ import annotations

import copy

import numpy as np

from tqft_orbifold import catalog
from tqft_orbifold import treecalc as tc
from tqft_orbifold.skeletal_core import load_category


def property_categories():
    """Every shipped category plus the underlying categories of the crossed files."""
    out = [(n, catalog.builtin(n)) for n in catalog.CATEGORY_NAMES]
    out += [(n, catalog.builtin(n).underlying) for n in catalog.CROSSED_NAMES]
    return out


def basis_sum(cat, i: int, j: int):
    """``sum_{k, lam} d_k hat(lam) o lam`` on ``i (x) j``."""
    W = ((i,), (j,))
    total = tc.zero(cat, W, W)
    for k in cat.fusion(i, j):
        for m in range(int(cat.N[i, j, k])):
            total = total + tc.compose(tc.hat_vertex(cat, i, j, k, m),
                                       tc.fusion_vertex(cat, i, j, k, m)) * cat.dims[k]
    return total


def identity_sample(cat, rng: np.random.Generator) -> dict[str, float]:
    """One random instance of the pairing, completeness, insertion and snake identities."""
    r = cat.rank
    i, j = (int(x) for x in rng.integers(r, size=2))
    ks = cat.fusion(i, j)
    k = ks[int(rng.integers(len(ks)))]
    n = int(cat.N[i, j, k])
    m = int(rng.integers(n))
    pair = 0.0
    for m2 in range(n):
        f = tc.compose(tc.fusion_vertex(cat, i, j, k, m), tc.hat_vertex(cat, i, j, k, m2))
        want = tc.identity(cat, ((k,),)) * ((m == m2) / cat.dims[k])
        pair = max(pair, f.residual(want))
    W = ((i,), (j,))
    P = basis_sum(cat, i, j)
    complete = P.residual(tc.identity(cat, W))
    src = ((int(rng.integers(r)),), (int(rng.integers(r)),))
    tgt = ((k,),) if rng.random() < 0.5 else ((int(rng.integers(r)),), (int(rng.integers(r)),))
    g1 = tc.random_morphism(cat, src, W, rng)
    g2 = tc.random_morphism(cat, W, tgt, rng)
    plain = tc.compose(g2, g1)
    inserted = tc.compose_all(g2, P, g1)
    scale = max(1.0, plain.max_abs())
    insert = inserted.residual(plain) / scale
    size = 1 + int(rng.integers(2))
    X = tuple(sorted(int(x) for x in rng.integers(r, size=size)))
    snake = tc.snake_residual(cat, X)
    return {"pairing": pair, "completeness": complete, "insertion": insert, "snake": snake}


def perturbed_document(doc: dict, table: str, row: int = -1, delta: float = 1e-2) -> dict:
    """Copy of a category document with one table entry shifted by ``delta``."""
    d = copy.deepcopy(doc)
    if table == "dims":
        lab = list(d["dims"])[row]
        d["dims"][lab][0] += delta
    else:
        d[table][row][-2] += delta
    return d


def load_perturbed(doc: dict, table: str, row: int = -1):
    return load_category(perturbed_document(doc, table, row))
