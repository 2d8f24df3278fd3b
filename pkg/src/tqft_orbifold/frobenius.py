"""Delta-separable symmetric Frobenius algebras and their multi-modules.

An algebra lives on a single semisimple object ``A``.  A module lives on a
tensor word ``W`` and carries named actions; a left action is a morphism
``A (x) W -> W`` and a right action ``W (x) A -> W``.  The order of the
actions of a module is their depth order on the same side: an action listed
later is nearer to the viewer, so its algebra strand crosses over the strands
of earlier actions.  This fixes which crossing enters the commutation check of
two actions on one side.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .skeletal_core import CategoryData, VerificationReport
from .treecalc import (Morphism, Obj, Word, as_word, at, basis, braid, compose, compose_all,
                       coev, coevt, dual_object, ev, evt, extend, from_entries, fuse, identity, left_trace,
                       right_trace, tensor, trace)


@dataclass
class FrobeniusAlgebra:
    cat: CategoryData
    carrier: Obj
    mu: Morphism
    eta: Morphism
    delta: Morphism
    eps: Morphism
    name: str = "A"

    @property
    def word(self) -> Word:
        return (tuple(self.carrier),)

    def cup(self) -> Morphism:
        """``Delta o eta: 1 -> A (x) A``."""
        return compose(self.delta, self.eta)

    def cap(self) -> Morphism:
        """``eps o mu: A (x) A -> 1``."""
        return compose(self.eps, self.mu)

    def dim(self) -> complex:
        return trace(identity(self.cat, self.word))

    def element_action(self, z: Morphism, side: str = "left") -> Morphism:
        """Multiplication by an element ``z: 1 -> A`` as an endomorphism of ``A``."""
        A = self.word
        if side == "left":
            return compose(self.mu, tensor(z, identity(self.cat, A)))
        return compose(self.mu, tensor(identity(self.cat, A), z))


def _tol(cat: CategoryData, scale: float = 1.0) -> float:
    return cat.tolerance * max(1.0, scale)


def verify_frobenius(alg: FrobeniusAlgebra) -> VerificationReport:
    """Residuals of the algebra, coalgebra, Frobenius, symmetry and separability axioms."""
    cat = alg.cat
    A = alg.word
    AA = A + A
    shapes = {"mu": (alg.mu, AA, A), "eta": (alg.eta, (), A),
              "delta": (alg.delta, A, AA), "eps": (alg.eps, A, ())}
    for nm, (f, s, t) in shapes.items():
        if f.src != as_word(s) or f.tgt != as_word(t):
            raise ValueError(f"shape mismatch for {nm}: {f.src} -> {f.tgt}")
    mu, eta, de, ep = alg.mu, alg.eta, alg.delta, alg.eps
    idA = identity(cat, A)
    scale = max(m.max_abs() for m in (mu, eta, de, ep))
    tol = _tol(cat, scale ** 3)
    rep = VerificationReport(f"frobenius:{alg.name}")
    rep.add("associativity", compose(mu, tensor(mu, idA)).residual(compose(mu, tensor(idA, mu))), tol)
    rep.add("unit_left", compose(mu, tensor(eta, idA)).residual(idA), tol)
    rep.add("unit_right", compose(mu, tensor(idA, eta)).residual(idA), tol)
    rep.add("coassociativity",
            compose(tensor(de, idA), de).residual(compose(tensor(idA, de), de)), tol)
    rep.add("counit_left", compose(tensor(ep, idA), de).residual(idA), tol)
    rep.add("counit_right", compose(tensor(idA, ep), de).residual(idA), tol)
    mid = compose(de, mu)
    rep.add("frobenius_left", compose(tensor(mu, idA), tensor(idA, de)).residual(mid), tol)
    rep.add("frobenius_right", compose(tensor(idA, mu), tensor(de, idA)).residual(mid), tol)
    rep.add("delta_separable", compose(mu, de).residual(idA), tol)
    # symmetric: the two ways of bending the pairing eps o mu into A* agree
    Ad = (dual_object(cat, alg.carrier),)
    cap = compose(ep, mu)
    lhs = compose(extend(cap, (), Ad), extend(coev(cat, alg.carrier), A))
    rhs = compose(extend(cap, Ad), extend(coevt(cat, alg.carrier), (), A))
    rep.add("symmetry", lhs.residual(rhs), tol)
    return rep


# ---------------------------------------------------------------------------
# constructors

def trivial_algebra(cat: CategoryData) -> FrobeniusAlgebra:
    """The tensor unit with identity structure maps."""
    u = cat.unit
    one = Morphism(cat, ((u,), (u,)), ((u,),), {u: np.ones((1, 1))})
    return FrobeniusAlgebra(cat, (u,), one,
                            Morphism(cat, (), ((u,),), {u: np.ones((1, 1))}),
                            Morphism(cat, ((u,),), ((u,), (u,)), {u: np.ones((1, 1))}),
                            Morphism(cat, ((u,),), (), {u: np.ones((1, 1))}), name="1")


def _require_vect(cat: CategoryData) -> None:
    if not cat.is_vect:
        raise ValueError(f"category {cat.name} is not the vector-space engine")


def diagonal_algebra(cat: CategoryData, n: int, name: str = "diag") -> FrobeniusAlgebra:
    """``k^n`` with orthogonal idempotents ``1_i``, ``Delta(1_i) = 1_i (x) 1_i``, ``eps(1_i) = 1``."""
    _require_vect(cat)
    u = cat.unit
    A = (u,) * n
    mu = np.zeros((n, n * n))
    de = np.zeros((n * n, n))
    for i in range(n):
        mu[i, i * n + i] = 1.0
        de[i * n + i, i] = 1.0
    w = (A,)
    return FrobeniusAlgebra(cat, A, Morphism(cat, w + w, w, {u: mu}),
                            Morphism(cat, (), w, {u: np.ones((n, 1))}),
                            Morphism(cat, w, w + w, {u: de}),
                            Morphism(cat, w, (), {u: np.ones((1, n))}), name=name)


def matrix_algebra(cat: CategoryData, n: int, name: str = "mat") -> FrobeniusAlgebra:
    """``Mat_n(k)`` with ``Delta(E_ij) = (1/n) sum_k E_ik (x) E_kj`` and ``eps = n tr``."""
    _require_vect(cat)
    u = cat.unit
    n2 = n * n
    A = (u,) * n2
    mu = np.zeros((n2, n2 * n2))
    de = np.zeros((n2 * n2, n2))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                mu[i * n + k, (i * n + j) * n2 + (j * n + k)] = 1.0
                de[(i * n + k) * n2 + (k * n + j), i * n + j] = 1.0 / n
    eta = np.zeros((n2, 1))
    eps = np.zeros((1, n2))
    for i in range(n):
        eta[i * n + i, 0] = 1.0
        eps[0, i * n + i] = float(n)
    w = (A,)
    return FrobeniusAlgebra(cat, A, Morphism(cat, w + w, w, {u: mu}), Morphism(cat, (), w, {u: eta}),
                            Morphism(cat, w, w + w, {u: de}), Morphism(cat, w, (), {u: eps}),
                            name=name)


def block_matrix_algebra(cat: CategoryData, ns, name: str = "mats") -> FrobeniusAlgebra:
    """Direct sum of matrix algebras ``Mat_{n_i}``, each normalized as in :func:`matrix_algebra`."""
    _require_vect(cat)
    u = cat.unit
    offs, total = [], 0
    for n in ns:
        offs.append(total)
        total += n * n
    mu = np.zeros((total, total * total))
    de = np.zeros((total * total, total))
    eta = np.zeros((total, 1))
    eps = np.zeros((1, total))
    for o, n in zip(offs, ns):
        def e(i, j):
            return o + i * n + j
        for i in range(n):
            eta[e(i, i), 0] = 1.0
            eps[0, e(i, i)] = float(n)
            for j in range(n):
                for k in range(n):
                    mu[e(i, k), e(i, j) * total + e(j, k)] = 1.0
                    de[e(i, k) * total + e(k, j), e(i, j)] = 1.0 / n
    w = (((u,) * total),)
    return FrobeniusAlgebra(cat, (u,) * total, Morphism(cat, w + w, w, {u: mu}),
                            Morphism(cat, (), w, {u: eta}), Morphism(cat, w, w + w, {u: de}),
                            Morphism(cat, w, (), {u: eps}), name=name)


def column_bimodule(A: FrobeniusAlgebra, ns, name: str = "X") -> tuple[Module, FrobeniusAlgebra]:
    """``X = sum_i k^{n_i}`` between a diagonal algebra ``A`` and ``B = sum_i Mat_{n_i}``.

    ``A``'s i-th idempotent acts by the identity on ``k^{n_i}``; ``B`` acts on row
    vectors from the right.  Returns the module (tags ``"A"`` left, ``"B"`` right) and ``B``.
    """
    cat = A.cat
    _require_vect(cat)
    r = len(A.carrier)
    if len(ns) != r:
        raise ValueError(f"need one block size per summand of A ({r}), got {len(ns)}")
    B = block_matrix_algebra(cat, ns, name=f"B{tuple(ns)}")
    u = cat.unit
    nx = sum(ns)
    nb = len(B.carrier)
    xo, bo = [], []
    tx = tb = 0
    for n in ns:
        xo.append(tx)
        bo.append(tb)
        tx += n
        tb += n * n
    lam = np.zeros((nx, r * nx))
    rho = np.zeros((nx, nx * nb))
    for i, n in enumerate(ns):
        for a in range(n):
            lam[xo[i] + a, i * nx + xo[i] + a] = 1.0
            for c in range(n):
                rho[xo[i] + c, (xo[i] + a) * nb + bo[i] + a * n + c] = 1.0
    xw = (((u,) * nx),)
    X = Module(cat, xw, [Action("A", A, "left", Morphism(cat, A.word + xw, xw, {u: lam})),
                         Action("B", B, "right", Morphism(cat, xw + B.word, xw, {u: rho}))],
               name=name)
    return X, B


def pair_algebra(cat: CategoryData, m: Obj, name: str | None = None) -> FrobeniusAlgebra:
    """``m* (x) m`` with multiplication by evaluation, fused to a single object.

    ``mu = id (x) evt (x) id``, ``eta = coevt``, ``Delta = (id (x) coev (x) id) / d_m``,
    ``eps = d_m ev``; requires ``dim m != 0``.
    """
    m = tuple(m)
    md = dual_object(cat, m)
    d = trace(identity(cat, (m,)))
    if abs(d) < cat.tolerance:
        raise ValueError("pair algebra needs an object of nonzero dimension")
    W = (md, m)
    mu = at(evt(cat, m), (md, m, md, m), 1)
    eta = coevt(cat, m)
    de = at(coev(cat, m), (md, m), 1) * (1.0 / d)
    ep = ev(cat, m) * d
    Y, iota, pi = fuse(cat, W)
    return FrobeniusAlgebra(
        cat, Y,
        compose_all(pi, mu, tensor(iota, iota)),
        compose(pi, eta),
        compose_all(tensor(pi, pi), de, iota),
        compose(ep, iota),
        name=name or f"pair{m}")


def group_algebra(cat: CategoryData, labels, name: str | None = None) -> FrobeniusAlgebra:
    """Direct sum of invertible simples closed under fusion, multiplied by fusion vertices.

    ``Delta = (1/n) sum`` of splitting vertices and ``eps = n`` times the unit
    projection.  Associativity holds only when the F-symbols on the labels are
    trivial; :func:`verify_frobenius` reports it otherwise.
    """
    X = tuple(cat.index(x) for x in labels)
    n = len(X)
    pos = {x: s for s, x in enumerate(X)}
    if cat.unit not in pos:
        raise ValueError("group algebra must contain the unit")
    w = (X,)
    mu_e, de_e = {}, {}
    for s, x in enumerate(X):
        for t, y in enumerate(X):
            out = cat.fusion(x, y)
            if len(out) != 1 or out[0] not in pos or cat.N[x, y, out[0]] != 1:
                raise ValueError(f"labels {labels} are not a group of invertible simples")
            k = out[0]
            tree = (s, 0, y, (t,))
            mu_e[(k, (pos[k],), tree)] = 1.0
            de_e[(k, tree, (pos[k],))] = 1.0 / n
    u = cat.unit
    return FrobeniusAlgebra(cat, X, from_entries(cat, w + w, w, mu_e),
                            from_entries(cat, (), w, {(u, (pos[u],), ()): 1.0}),
                            from_entries(cat, w, w + w, de_e),
                            from_entries(cat, w, (), {(u, (), (pos[u],)): float(n)}),
                            name=name or "group")


def transport_algebra(alg: FrobeniusAlgebra, iota: Morphism, pi: Morphism,
                      name: str | None = None) -> FrobeniusAlgebra:
    """Structure maps moved along an isomorphism ``iota: Y -> A`` with inverse ``pi``."""
    Y = iota.src[0]
    return FrobeniusAlgebra(alg.cat, Y, compose_all(pi, alg.mu, tensor(iota, iota)),
                            compose(pi, alg.eta), compose_all(tensor(pi, pi), alg.delta, iota),
                            compose(alg.eps, iota), name=name or alg.name)


# ---------------------------------------------------------------------------
# modules

@dataclass
class Action:
    tag: str
    algebra: FrobeniusAlgebra
    side: str
    morphism: Morphism


@dataclass
class Module:
    """Multi-module on a tensor word; ``actions`` in depth order (back to front)."""

    cat: CategoryData
    carrier: Word
    actions: list[Action]
    name: str = "M"
    duality: dict[str, Morphism] = field(default_factory=dict)

    def __post_init__(self):
        self.carrier = as_word(self.carrier)
        for a in self.actions:
            A = a.algebra.word
            want = (A + self.carrier, self.carrier) if a.side == "left" else \
                (self.carrier + A, self.carrier)
            if a.side not in ("left", "right"):
                raise ValueError(f"action side must be left or right, got {a.side!r}")
            if (a.morphism.src, a.morphism.tgt) != want:
                raise ValueError(f"action {a.tag!r} has shape {a.morphism.src} -> "
                                 f"{a.morphism.tgt}, expected {want[0]} -> {want[1]}")
        tags = [a.tag for a in self.actions]
        if len(set(tags)) != len(tags):
            raise ValueError(f"duplicate action tags {tags}")

    def action(self, tag: str) -> Action:
        for a in self.actions:
            if a.tag == tag:
                return a
        raise KeyError(f"module {self.name} has no action {tag!r}")

    def side(self, side: str) -> list[Action]:
        return [a for a in self.actions if a.side == side]

    def dim(self) -> complex:
        return trace(identity(self.cat, self.carrier))


def regular_module(alg: FrobeniusAlgebra, sides: str = "lr") -> Module:
    acts = []
    if "l" in sides:
        acts.append(Action("l", alg, "left", alg.mu))
    if "r" in sides:
        acts.append(Action("r", alg, "right", alg.mu))
    return Module(alg.cat, alg.word, acts, name=f"{alg.name}_reg")


def _commute_residual(mod: Module, a: Action, b: Action) -> float:
    """``a`` precedes ``b`` in depth order."""
    cat, W = mod.cat, mod.carrier
    Aa, Ab = a.algebra.word, b.algebra.word
    ra, rb = a.morphism, b.morphism
    if a.side == "right" and b.side == "right":
        lhs = compose(rb, extend(ra, (), Ab))
        rhs = compose_all(ra, extend(rb, (), Aa), braid(cat, W + Aa + Ab, len(W), over=False))
    elif a.side == "left" and b.side == "left":
        lhs = compose(rb, extend(ra, Ab))
        rhs = compose_all(ra, extend(rb, Aa), braid(cat, Ab + Aa + W, 0, over=True))
    else:
        left, right = (a, b) if a.side == "left" else (b, a)
        Al, Ar = left.algebra.word, right.algebra.word
        lhs = compose(right.morphism, extend(left.morphism, (), Ar))
        rhs = compose(left.morphism, extend(right.morphism, Al))
    return lhs.residual(rhs)


def verify_module(mod: Module, pairs: bool = True) -> VerificationReport:
    """Unitality and associativity of every action plus pairwise commutation."""
    cat, W = mod.cat, mod.carrier
    idW = identity(cat, W)
    rep = VerificationReport(f"module:{mod.name}")
    for a in mod.actions:
        alg, r = a.algebra, a.morphism
        A = alg.word
        tol = _tol(cat, r.max_abs() ** 2 * max(1.0, alg.mu.max_abs()))
        if a.side == "left":
            unit = compose(r, extend(alg.eta, (), W))
            assoc = compose(r, extend(r, A)).residual(compose(r, extend(alg.mu, (), W)))
        else:
            unit = compose(r, extend(alg.eta, W))
            assoc = compose(r, extend(r, (), A)).residual(compose(r, extend(alg.mu, W)))
        rep.add(f"unital[{a.tag}]", unit.residual(idW), tol)
        rep.add(f"associative[{a.tag}]", assoc, tol)
    if pairs:
        acts = mod.actions
        for i in range(len(acts)):
            for j in range(i + 1, len(acts)):
                a, b = acts[i], acts[j]
                tol = _tol(cat, a.morphism.max_abs() * b.morphism.max_abs())
                rep.add(f"commute[{a.tag},{b.tag}]", _commute_residual(mod, a, b), tol)
    return rep


def induced_product_actions(m: Module, n: Module, rev: bool = False,
                            include: str = "all") -> Module:
    """Actions of ``M`` and ``N`` on ``M (x) N``.

    Default convention: actions of ``M`` sit behind ``N``, so a right action of
    ``M`` reaches its carrier by passing under ``N`` and a left action of ``N``
    passes over ``M``.  With ``rev`` the crossings are reversed and ``N`` sits
    behind ``M``.  ``include="outer"`` keeps only the left actions of ``M`` and
    the right actions of ``N``, which need no crossing.
    """
    if m.cat is not n.cat:
        raise ValueError("modules over different categories")
    cat = m.cat
    M, N = m.carrier, n.carrier
    W = M + N
    over = not rev
    m_acts, n_acts = [], []
    for a in m.actions:
        A = a.algebra.word
        if a.side == "left":
            f = extend(a.morphism, (), N)
        elif include == "outer":
            continue
        else:
            f = compose(extend(a.morphism, (), N), _slide(cat, N, A, M, over, "left"))
        m_acts.append(Action(a.tag, a.algebra, a.side, f))
    for a in n.actions:
        A = a.algebra.word
        if a.side == "right":
            f = extend(a.morphism, M)
        elif include == "outer":
            continue
        else:
            f = compose(extend(a.morphism, M), _slide(cat, M, A, N, over, "right"))
        n_acts.append(Action(a.tag, a.algebra, a.side, f))
    tags = [a.tag for a in m_acts]
    for a in n_acts:
        if a.tag in tags:
            raise ValueError(f"action tag {a.tag!r} present on both factors")
    acts = (n_acts + m_acts) if rev else (m_acts + n_acts)
    return Module(cat, W, acts, name=f"{m.name}{n.name}")


def _slide(cat: CategoryData, Z: Word, A: Word, rest: Word, over: bool, direction: str) -> Morphism:
    """Move the single-object word ``A`` across the word ``Z``.

    ``direction="left"``: ``rest (x) Z (x) A -> rest (x) A (x) Z`` with ``Z`` crossing
    over ``A`` when ``over``.  ``direction="right"``: ``A (x) Z (x) rest -> Z (x) A (x) rest``
    with ``A`` crossing over ``Z`` when ``over``.
    """
    steps = []
    if direction == "left":
        word = rest + Z + A
        pos = len(word) - 2
        for _ in range(len(Z)):
            steps.append(braid(cat, word, pos, over=over))
            word = word[:pos] + (word[pos + 1], word[pos]) + word[pos + 2:]
            pos -= 1
    else:
        word = A + Z + rest
        for pos in range(len(Z)):
            steps.append(braid(cat, word, pos, over=over))
            word = word[:pos] + (word[pos + 1], word[pos]) + word[pos + 2:]
    if not steps:
        return identity(cat, rest + Z + A if direction == "left" else A + Z + rest)
    return compose_all(*reversed(steps))


# ---------------------------------------------------------------------------
# relative tensor products

@dataclass
class RelativeTensor:
    left: Module
    right: Module
    over: FrobeniusAlgebra
    projector: Morphism
    embed: Morphism
    retract: Morphism
    image: Module
    ranks: dict[int, int]


def relative_projector(m: Module, n: Module, over: FrobeniusAlgebra,
                       m_tag: str | None = None, n_tag: str | None = None) -> Morphism:
    """``p = (rho_M (x) rho_N) o (id (x) Delta eta (x) id)`` on ``M (x) N``."""
    rm = _pick(m, "right", over, m_tag)
    ln = _pick(n, "left", over, n_tag)
    cup = extend(over.cup(), m.carrier, n.carrier)
    return compose(tensor(rm.morphism, ln.morphism), cup)


def _pick(mod: Module, side: str, alg: FrobeniusAlgebra, tag: str | None) -> Action:
    if tag is not None:
        a = mod.action(tag)
        if a.side != side:
            raise ValueError(f"action {tag!r} of {mod.name} is not a {side} action")
        return a
    cands = [a for a in mod.actions if a.side == side and a.algebra is alg]
    if len(cands) != 1:
        cands = [a for a in mod.actions if a.side == side and a.algebra.carrier == alg.carrier]
    if len(cands) != 1:
        raise ValueError(f"cannot choose a {side} action of {mod.name} over {alg.name}; pass a tag")
    return cands[0]


def split_idempotent(p: Morphism, tol: float | None = None) -> tuple[Obj, Morphism, Morphism, dict]:
    """Rank factorization ``p = embed o retract`` with ``retract o embed = id``."""
    cat = p.cat
    if p.src != p.tgt:
        raise ValueError("idempotent must be an endomorphism")
    tol = cat.tolerance * 1e3 if tol is None else tol
    W = p.src
    b = basis(cat, W)
    ranks, ib, pb = {}, {}, {}
    for k in b.roots:
        P = p.dense(k)
        if not P.size:
            continue
        U, s, _ = np.linalg.svd(P)
        r = int(np.sum(s > tol * max(1.0, s[0] if s.size else 1.0)))
        if r == 0:
            continue
        Ur = U[:, :r]
        ranks[k] = r
        ib[k] = Ur
        pb[k] = Ur.conj().T @ P
    Y = tuple(k for k in sorted(ranks) for _ in range(ranks[k]))
    embed = Morphism(cat, (Y,), W, ib)
    retract = Morphism(cat, W, (Y,), pb)
    return Y, embed, retract, ranks


def transport_action(a: Action, embed: Morphism, retract: Morphism) -> Action:
    A = a.algebra.word
    if a.side == "left":
        f = compose_all(retract, a.morphism, extend(embed, A))
    else:
        f = compose_all(retract, a.morphism, extend(embed, (), A))
    return Action(a.tag, a.algebra, a.side, f)


def relative_tensor(m: Module, n: Module, over: FrobeniusAlgebra, m_tag: str | None = None,
                    n_tag: str | None = None, rev: bool = False,
                    check: bool = True) -> RelativeTensor:
    """Image of ``p_{M,N}`` with the remaining actions of both factors."""
    cat = m.cat
    rm = _pick(m, "right", over, m_tag)
    ln = _pick(n, "left", over, n_tag)
    p = relative_projector(m, n, over, rm.tag, ln.tag)
    if check:
        res = compose(p, p).residual(p)
        if res > _tol(cat, p.max_abs() ** 2) * 1e2:
            raise ValueError(f"projector not idempotent (residual {res:.3e}); bad algebra data")
    Y, embed, retract, ranks = split_idempotent(p)
    rest_m = Module(cat, m.carrier, [a for a in m.actions if a.tag != rm.tag], m.name)
    rest_n = Module(cat, n.carrier, [a for a in n.actions if a.tag != ln.tag], n.name)
    prod = induced_product_actions(rest_m, rest_n, rev=rev)
    img = Module(cat, ((Y,)), [transport_action(a, embed, retract) for a in prod.actions],
                 name=f"{m.name}|{n.name}")
    return RelativeTensor(m, n, over, p, embed, retract, img, ranks)


# ---------------------------------------------------------------------------
# duals

def module_dual(mod: Module) -> Module:
    """Actions on ``X*`` obtained by bending the carrier line.

    A right action of ``X`` becomes a left action of ``X*`` (same tag) and a
    left action a right one.  The duality maps of ``X`` are stored in
    ``duality`` under ``ev``, ``coev``, ``evt``, ``coevt``.
    """
    cat = mod.cat
    if len(mod.carrier) != 1:
        raise ValueError("module_dual needs a single-object carrier; fuse the word first")
    X = mod.carrier[0]
    Xd = dual_object(cat, X)
    xd = (Xd,)
    lefts, rights = [], []
    for a in mod.actions:
        A = a.algebra.word
        if a.side == "right":
            f = compose_all(extend(evt(cat, X), xd), extend(a.morphism, xd, xd),
                            extend(coevt(cat, X), (), A + xd))
            lefts.append(Action(a.tag, a.algebra, "left", f))
        else:
            f = compose_all(extend(ev(cat, X), (), xd), extend(a.morphism, xd, xd),
                            extend(coev(cat, X), xd + A))
            rights.append(Action(a.tag, a.algebra, "right", f))
    duality = {"ev": ev(cat, X), "coev": coev(cat, X), "evt": evt(cat, X), "coevt": coevt(cat, X)}
    return Module(cat, xd, lefts + rights, name=f"{mod.name}*", duality=duality)


# ---------------------------------------------------------------------------
# decomposition into simple algebras

def center_basis(alg: FrobeniusAlgebra) -> list[Morphism]:
    """Basis of the elements ``z: 1 -> A`` with ``mu(z (x) -) = mu(- (x) z)``."""
    cat = alg.cat
    A = alg.word
    u = cat.unit
    bA = basis(cat, A)
    n = bA.size(u)
    if n == 0:
        return []
    cols = []
    for i in range(n):
        z = Morphism(cat, (), A, {u: sp.csr_matrix(([1.0], ([i], [0])), shape=(n, 1))})
        d = alg.element_action(z, "left") - alg.element_action(z, "right")
        cols.append(np.concatenate([d.dense(k).ravel() for k in bA.roots]))
    L = np.array(cols).T
    _, s, vh = np.linalg.svd(L)
    rank = int(np.sum(s > cat.tolerance * 1e3 * max(1.0, s[0] if s.size else 1.0)))
    null = vh[rank:].conj().T
    return [Morphism(cat, (), A, {u: null[:, j:j + 1]}) for j in range(null.shape[1])]


def central_idempotents(alg: FrobeniusAlgebra, rng: np.random.Generator | None = None
                         ) -> list[Morphism]:
    """Primitive central idempotents ``e: 1 -> A``, from the spectrum of a random central element."""
    cat = alg.cat
    u = cat.unit
    Z = center_basis(alg)
    if not Z:
        raise ValueError("algebra has no central elements; not unital")
    vecs = np.hstack([z.dense(u) for z in Z])
    q = len(Z)
    # structure constants of the center in the basis Z
    prods = np.empty((q, q, q), dtype=complex)
    for i in range(q):
        for j in range(q):
            w = compose(alg.mu, tensor(Z[i], Z[j])).dense(u)
            prods[i, j] = np.linalg.lstsq(vecs, w, rcond=None)[0].ravel()
    rng = np.random.default_rng(7) if rng is None else rng
    c = rng.normal(size=q) + 1j * rng.normal(size=q)
    Lc = np.einsum("i,ijk->kj", c, prods)
    evals, evecs = np.linalg.eig(Lc)
    gap = min((abs(a - b) for i, a in enumerate(evals) for b in evals[i + 1:]), default=1.0)
    if gap < 1e3 * cat.tolerance or np.linalg.cond(evecs) > 1e8:
        raise ValueError("non-semisimple center: central element has degenerate spectrum")
    out = []
    for j in range(q):
        v = evecs[:, j]
        vv = np.einsum("i,j,ijk->k", v, v, prods)
        lam = vv @ v.conj() / (v @ v.conj())
        e = v / lam
        out.append(Morphism(cat, (), alg.word, {u: (vecs @ e).reshape(-1, 1)}))
    return out


def morita_decompose(alg: FrobeniusAlgebra, rng: np.random.Generator | None = None
                     ) -> list[tuple[FrobeniusAlgebra, complex]]:
    """Simple summands from the primitive central idempotents, with their dimensions."""
    cat = alg.cat
    out = []
    for j, ez in enumerate(central_idempotents(alg, rng)):
        P = alg.element_action(ez, "left")
        Y, iota, pi, _ = split_idempotent(P)
        sub = FrobeniusAlgebra(cat, Y, compose_all(pi, alg.mu, tensor(iota, iota)),
                               compose_all(pi, alg.eta),
                               compose_all(tensor(pi, pi), alg.delta, iota),
                               compose(alg.eps, iota), name=f"{alg.name}[{j}]")
        d = sub.dim()
        if abs(d) < 1e3 * cat.tolerance:
            raise ValueError(f"simple summand {j} has zero dimension")
        out.append((sub, d))
    out.sort(key=lambda t: (t[0].carrier, -abs(t[1])))
    return out


def wrap(mod: Module, tag: str) -> Morphism:
    """Closed carrier loop around an action line: an endomorphism of the algebra.

    For a right action the loop closes on the left, for a left action on the
    right; for a simple algebra the result is ``dim(M)/dim(A) id_A``.
    """
    a = mod.action(tag)
    alg = a.algebra
    W = mod.carrier
    A = alg.word
    if a.side == "right":
        f = compose(extend(a.morphism, (), A), extend(alg.delta, W))
        for _ in W:
            f = left_trace(f)
    else:
        f = compose(extend(a.morphism, A), extend(alg.delta, (), W))
        for _ in W:
            f = right_trace(f)
    return f
