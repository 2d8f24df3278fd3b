"""Special orbifold data and the verifier of their ten defining identities.

A datum ``(A, T, alpha, alphabar, psi, phi)`` lives in a ribbon fusion
category.  ``T`` is a module on a single object with a left action tagged
``"0"`` and two right actions tagged ``"1"`` and ``"2"`` (``"1"`` behind
``"2"``).  ``alpha`` and ``alphabar`` are endomorphisms of ``T (x) T``.

Every identity is evaluated on the ambient tensor word, so no image of a
projector is ever split; residuals are relative entrywise differences.
"""
from __future__ import annotations

import functools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .frobenius import (Action, FrobeniusAlgebra, Module, diagonal_algebra,
                        module_dual, split_idempotent, verify_frobenius, verify_module)
from .skeletal_core import CategoryData, VerificationReport
from .treecalc import (Morphism, Word, at, basis, braid, coev, coevt,
                       compose, compose_all, dual_object, ev, evt, extend, identity,
                       direct_sum_embed, fuse, relabel, tensor, trace)

CONDITIONS = ("O1", "O2a", "O2b", "O3a", "O3b", "O4a", "O4b", "O5a", "O5b", "O5c")


class PrecheckError(ValueError):
    """The datum violates a structural precondition (module maps, projectors, psi)."""

    def __init__(self, message: str, report: VerificationReport):
        super().__init__(message)
        self.report = report


@dataclass
class OrbifoldDatum:
    A: FrobeniusAlgebra
    T: Module
    alpha: Morphism
    alphabar: Morphism
    psi: Morphism
    phi2: complex
    phi: complex | None = None
    name: str = "datum"

    def __post_init__(self):
        if len(self.T.carrier) != 1:
            raise ValueError("T must live on a single object; fuse its word first")
        tw = self.T.carrier + self.T.carrier
        for nm in ("alpha", "alphabar"):
            f = getattr(self, nm)
            if f.src != tw or f.tgt != tw:
                raise ValueError(f"{nm} must be an endomorphism of T (x) T")
        if self.psi.src != self.A.word or self.psi.tgt != self.A.word:
            raise ValueError("psi must be an endomorphism of A")
        self.phi2 = complex(self.phi2)
        if self.phi is None:
            self.phi = complex(np.sqrt(self.phi2))
        for tag, side in (("0", "left"), ("1", "right"), ("2", "right")):
            if self.T.action(tag).side != side:
                raise ValueError(f"action {tag!r} of T must be a {side} action")

    @property
    def cat(self) -> CategoryData:
        return self.A.cat

    def replace(self, **changes) -> "OrbifoldDatum":
        kw = dict(A=self.A, T=self.T, alpha=self.alpha, alphabar=self.alphabar, psi=self.psi,
                  phi2=self.phi2, phi=None if "phi2" in changes else self.phi, name=self.name)
        kw.update(changes)
        return OrbifoldDatum(**kw)


@dataclass
class ConditionReport(VerificationReport):
    prechecks: VerificationReport | None = None

    def to_dict(self) -> dict:
        d = super().to_dict()
        if self.prechecks is not None:
            d["prechecks"] = self.prechecks.to_dict()
        return d


# ---------------------------------------------------------------------------
# psi insertions

def _block_power(f: Morphism, power: int) -> Morphism:
    blocks = {}
    for k in basis(f.cat, f.src).roots:
        M = f.dense(k)
        if power < 0:
            M = np.linalg.inv(M)
        blocks[k] = np.linalg.matrix_power(M, abs(power))
    return Morphism(f.cat, f.src, f.tgt, blocks)


def psi_power(datum: OrbifoldDatum, power: int) -> Morphism:
    """``psi^power`` as an endomorphism of ``A`` (negative powers invert per block)."""
    return _block_power(datum.psi, power)


def _induce(action: Action, elem: Morphism, W: Word) -> Morphism:
    if action.side == "left":
        return compose(action.morphism, extend(elem, (), W))
    return compose(action.morphism, extend(elem, W))


def induce_psi(datum: OrbifoldDatum, slot: int | str, target: Module | None = None,
               power: int = 1) -> Morphism:
    """Act with ``psi^power o eta`` through the action ``slot`` of ``target``.

    ``target`` defaults to ``T``; the action is looked up by its tag.
    """
    target = datum.T if target is None else target
    tag = str(slot)
    try:
        a = target.action(tag)
    except KeyError:
        raise ValueError(f"module {target.name} has no action for slot {tag}") from None
    elem = compose(psi_power(datum, power), datum.A.eta)
    return _induce(a, elem, target.carrier)


# ---------------------------------------------------------------------------
# evaluation context

class _Ctx:
    """Cached building blocks shared by the ten conditions."""

    def __init__(self, d: OrbifoldDatum):
        self.d = d
        cat = self.cat = d.cat
        self.Tobj = d.T.carrier[0]
        self.t = d.T.carrier
        self.ts = (dual_object(cat, self.Tobj),)
        self.a = d.A.word
        self.r = {tag: d.T.action(tag).morphism for tag in "012"}
        self.Td = module_dual(d.T)
        self.cup = d.A.cup()

    @functools.cached_property
    def idT(self) -> Morphism:
        return identity(self.cat, self.t)

    @functools.cached_property
    def idTs(self) -> Morphism:
        return identity(self.cat, self.ts)

    @functools.lru_cache(maxsize=None)
    def psi_on(self, tag: str, power: int, dual: bool = False) -> Morphism:
        return induce_psi(self.d, tag, self.Td if dual else self.d.T, power)

    def sandwich(self, left: Morphism, right: Morphism) -> Morphism:
        """``(left (x) right) o (id (x) Delta eta (x) id)`` for actions ``left``/``right``."""
        X = left.tgt
        return compose(tensor(left, right), extend(self.cup, X, right.tgt))

    @functools.cached_property
    def p1(self) -> Morphism:
        return self.sandwich(self.r["1"], self.r["0"])

    @functools.cached_property
    def p2(self) -> Morphism:
        return self.sandwich(self.r["2"], self.r["0"])


def _rel(lhs: Morphism, rhs: Morphism) -> float:
    return lhs.residual(rhs) / max(1.0, lhs.max_abs(), rhs.max_abs())


# ---------------------------------------------------------------------------
# prechecks

def _precheck(c: _Ctx) -> VerificationReport:
    d, cat = c.d, c.cat
    rep = VerificationReport(f"prechecks:{d.name}")
    tol = cat.tolerance * 1e2
    for chk in verify_frobenius(d.A).checks:
        rep.add(f"algebra.{chk.name}", chk.residual, tol)
    for chk in verify_module(d.T).checks:
        rep.add(f"T.{chk.name}", chk.residual, tol)
    al, ab = d.alpha, d.alphabar
    rep.add("p1 o alpha", _rel(compose(c.p1, al), al), tol)
    rep.add("alpha o p2", _rel(compose(al, c.p2), al), tol)
    rep.add("p2 o alphabar", _rel(compose(c.p2, ab), ab), tol)
    rep.add("alphabar o p1", _rel(compose(ab, c.p1), ab), tol)
    for nm, res in _multimodule_residuals(c, al, ab).items():
        rep.add(nm, res, tol)
    # psi: bimodule map and invertible
    A, mu = d.A.word, d.A.mu
    psi = d.psi
    rep.add("psi.left_linear", _rel(compose(psi, mu), compose(mu, extend(psi, A))), tol)
    rep.add("psi.right_linear", _rel(compose(psi, mu), compose(mu, extend(psi, (), A))), tol)
    try:
        inv = psi_power(d, -1)
        res = _rel(compose(inv, psi), identity(cat, A))
    except np.linalg.LinAlgError:
        res = float("inf")
    rep.add("psi.invertible", res, tol)
    rep.add("phi.nonzero", 0.0 if abs(d.phi2) > cat.tolerance else float("inf"), 1.0)
    return rep


def multimodule_residuals(datum: OrbifoldDatum) -> dict[str, float]:
    """Residuals of the module-map identities of ``alpha`` and ``alphabar``."""
    c = _Ctx(datum)
    return _multimodule_residuals(c, datum.alpha, datum.alphabar)


def _multimodule_residuals(c: _Ctx, al: Morphism, ab: Morphism) -> dict[str, float]:
    cat, t, a = c.cat, c.t, c.a
    r0, r1, r2 = c.r["0"], c.r["1"], c.r["2"]
    L0 = extend(r0, (), t)
    # right actions on the first factor: the A-strand passes under (1) or over (2) the second T
    R1_first = compose(extend(r1, (), t), braid(cat, t + t + a, 1, over=True))
    R2_first = compose(extend(r2, (), t), braid(cat, t + t + a, 1, over=False))
    R1_last, R2_last = extend(r1, t), extend(r2, t)
    pairs = {
        "alpha.0": (al, L0, L0, "left"),
        "alpha.1": (al, R1_first, R1_last, "right"),
        "alpha.1'": (al, R1_last, R2_last, "right"),
        "alpha.2": (al, R2_last, R2_first, "right"),
        "alphabar.0": (ab, L0, L0, "left"),
        "alphabar.1": (ab, R1_last, R1_first, "right"),
        "alphabar.1'": (ab, R2_last, R1_last, "right"),
        "alphabar.2": (ab, R2_first, R2_last, "right"),
    }
    out = {}
    for name, (f, src_act, tgt_act, side) in pairs.items():
        lhs = compose(f, src_act)
        rhs = compose(tgt_act, extend(f, a) if side == "left" else extend(f, (), a))
        out[name] = _rel(lhs, rhs)
    return out


# ---------------------------------------------------------------------------
# the ten conditions

def _o1(c: _Ctx):
    cat, t = c.cat, c.t
    al = c.d.alpha
    w = t + t + t
    P = compose(at(c.p2, w, 0), at(c.p2, w, 1))
    lhs = compose_all(at(al, w, 0), braid(cat, w, 1, over=False), at(al, w, 0), P)
    rhs = compose_all(at(al, w, 1), tensor(al, c.psi_on("0", 2)), at(al, w, 1), P)
    return lhs, rhs


def _o2(c: _Ctx, which: str):
    d, t = c.d, c.t
    first, second, p = (d.alphabar, d.alpha, c.p1) if which == "a" else \
        (d.alpha, d.alphabar, c.p2)
    lhs = compose_all(second, extend(c.psi_on("0", 2), t), first)
    rhs = compose(extend(c.psi_on("0", -2), t), p)
    return lhs, rhs


def _o3(c: _Ctx, which: str):
    cat, t, ts, T = c.cat, c.t, c.ts, c.Tobj
    al, ab = c.d.alpha, c.d.alphabar
    cv, et = coev(cat, T), evt(cat, T)
    w2, w4 = t + ts, t + t + ts + ts
    if which == "a":
        lhs = compose_all(
            at(et, w4, 1),
            at(ab, w4, 0),
            braid(cat, t + ts + t + ts, 1, over=True),
            at(cv, w2, 2),
            extend(c.psi_on("2", 2), (), ts),
            at(et, t + ts + t + ts, 2),
            braid(cat, w4, 1, over=False),
            at(al, w4, 0),
            at(cv, w2, 1),
        )
        tag = "1"
    else:
        lhs = compose_all(
            at(et, t + ts + t + ts, 2),
            braid(cat, w4, 1, over=False),
            at(al, w4, 0),
            at(cv, w2, 1),
            extend(c.psi_on("1", 2), (), ts),
            at(et, w4, 1),
            at(ab, w4, 0),
            braid(cat, w4, 2, over=False),
            at(cv, w2, 1),
        )
        tag = "2"
    lam = c.Td.action(tag).morphism
    rhs = compose(c.sandwich(c.r[tag], lam), extend(c.psi_on(tag, -2), (), ts))
    return lhs, rhs


def _o4(c: _Ctx, which: str):
    cat, t, ts, T = c.cat, c.t, c.ts, c.Tobj
    al, ab = c.d.alpha, c.d.alphabar
    w4 = ts + t + t + ts
    if which == "a":
        # endomorphism of T* (x) T
        lhs = compose_all(
            at(evt(cat, T), w4, 2),
            at(ab, w4, 1),
            at(coevt(cat, T), t + ts, 0),
            extend(c.psi_on("2", 2), (), ts),
            at(ev(cat, T), w4, 0),
            at(al, w4, 1),
            at(coev(cat, T), ts + t, 2),
        )
        rho_d = c.Td.action("0").morphism
        rhs = compose(c.sandwich(rho_d, c.r["0"]), extend(c.psi_on("0", -2), ts))
    else:
        # endomorphism of T (x) T*
        lhs = compose_all(
            at(ev(cat, T), w4, 0),
            at(al, w4, 1),
            at(coev(cat, T), ts + t, 2),
            extend(c.psi_on("0", 2), ts),
            at(evt(cat, T), w4, 2),
            at(ab, w4, 1),
            at(coevt(cat, T), t + ts, 0),
        )
        lam = c.Td.action("1").morphism
        rhs = compose(c.sandwich(c.r["2"], lam), extend(c.psi_on("2", -2), (), ts))
    return lhs, rhs


def _o5_values(c: _Ctx) -> list[Morphism]:
    cat, ts, a, Tobj = c.cat, c.ts, c.a, c.Tobj
    d = c.d
    psi2 = psi_power(d, 2)

    def ins(tags):
        f = c.idT
        for tg in tags:
            f = compose(c.psi_on(tg, 2), f)
        return f

    f = compose(c.r["0"], extend(ins("12"), a))
    v1 = compose_all(evt(cat, Tobj), extend(f, (), ts), extend(coev(cat, Tobj), a))
    out = [v1]
    for tag, others in (("2", "01"), ("1", "02")):
        g = compose(c.r[tag], extend(ins(others), (), a))
        out.append(compose_all(ev(cat, Tobj), extend(g, ts), extend(coevt(cat, Tobj), (), a)))
    out.append(compose(d.A.eps, psi2) * (1.0 / d.phi2))
    return out


def _condition(c: _Ctx, name: str) -> tuple[Morphism, Morphism]:
    if name == "O1":
        return _o1(c)
    if name in ("O2a", "O2b"):
        return _o2(c, name[-1])
    if name in ("O3a", "O3b"):
        return _o3(c, name[-1])
    if name in ("O4a", "O4b"):
        return _o4(c, name[-1])
    v = c.o5
    i = {"O5a": 0, "O5b": 1, "O5c": 2}[name]
    return v[i], v[i + 1]


def condition_sides(datum: OrbifoldDatum, name: str) -> tuple[Morphism, Morphism]:
    """Both sides of one condition as morphisms (for inspection and tests)."""
    c = _Ctx(datum)
    c.o5 = _o5_values(c)
    return _condition(c, name)


def verify_orbifold_datum(datum: OrbifoldDatum, jobs: int = 1, tolerance: float | None = None,
                          prechecks: bool = True) -> ConditionReport:
    """Evaluate all ten identities; raises :class:`PrecheckError` on structural failure."""
    c = _Ctx(datum)
    cat = c.cat
    pre = _precheck(c) if prechecks else None
    if pre is not None and not pre.passed:
        bad = [ch.name for ch in pre.checks if not ch.passed]
        raise PrecheckError(f"datum {datum.name} fails prechecks: {', '.join(bad)}", pre)
    c.o5 = _o5_values(c)
    tol = tolerance if tolerance is not None else cat.tolerance * 1e1

    def run(name):
        lhs, rhs = _condition(c, name)
        return name, _rel(lhs, rhs)

    if jobs > 1:
        with ThreadPoolExecutor(jobs) as ex:
            results = list(ex.map(run, CONDITIONS))
    else:
        results = [run(n) for n in CONDITIONS]
    rep = ConditionReport(f"orbifold:{datum.name}", prechecks=pre)
    for name, res in results:
        rep.add(name, res, tol)
    return rep


# ---------------------------------------------------------------------------
# datum from a spherical fusion category

@functools.lru_cache(maxsize=None)
def vect_engine() -> CategoryData:
    """The one-simple engine of finite-dimensional vector spaces (shared instance)."""
    from .catalog import make_vec
    from .skeletal_core import load_category
    return load_category(make_vec())


def channels(cat: CategoryData) -> list[tuple[int, int, int, int]]:
    """Basis of ``T``: all ``(i, j, k, lam)`` with ``lam`` a vertex ``i (x) j -> k``."""
    r = cat.rank
    return [(i, j, k, m) for i in range(r) for j in range(r) for k in range(r)
            for m in range(int(cat.N[i, j, k]))]


def from_spherical_category(cat: CategoryData) -> tuple[CategoryData, OrbifoldDatum]:
    """Datum in vector spaces whose orbifold state sum is the Turaev-Viro sum of ``cat``.

    ``A`` is the diagonal algebra on the simples, ``T`` has one basis vector per
    fusion channel and ``alpha`` carries ``F / d`` coefficients.
    """
    if cat.sqrt_dims is None:
        raise ValueError(f"category {cat.name} has no chosen square roots of dimensions")
    V = vect_engine()
    u = V.unit
    r = cat.rank
    ch = channels(cat)
    idx = {c: n for n, c in enumerate(ch)}
    n = len(ch)
    A = diagonal_algebra(V, r, name=f"A[{cat.name}]")
    Tw = ((u,) * n,)
    rho = {t: np.zeros((n, n * r)) for t in "012"}
    for p, (i, j, k, _) in enumerate(ch):
        rho["0"][p, k * n + p] = 1.0
        rho["1"][p, p * r + i] = 1.0
        rho["2"][p, p * r + j] = 1.0
    acts = [Action("0", A, "left", Morphism(V, A.word + Tw, Tw, {u: rho["0"]})),
            Action("1", A, "right", Morphism(V, Tw + A.word, Tw, {u: rho["1"]})),
            Action("2", A, "right", Morphism(V, Tw + A.word, Tw, {u: rho["2"]}))]
    T = Module(V, Tw, acts, name=f"T[{cat.name}]")
    al = np.zeros((n * n, n * n), dtype=complex)
    ab = np.zeros((n * n, n * n), dtype=complex)
    dims = cat.dims
    # alpha: Hom(a c, k) (x) Hom(b j, c) -> Hom(d j, k) (x) Hom(a b, d)
    for (a, c, k, l) in ch:
        for (b, j, c2, m) in ch:
            if c2 != c:
                continue
            src = idx[(a, c, k, l)] * n + idx[(b, j, c, m)]
            for d in range(r):
                for l2 in range(int(cat.N[d, j, k])):
                    for m2 in range(int(cat.N[a, b, d])):
                        tgt = idx[(d, j, k, l2)] * n + idx[(a, b, d, m2)]
                        f = cat.fval(a, b, j, k, (c, l, m), (d, l2, m2))
                        g = cat.finv(a, b, j, k, (d, l2, m2), (c, l, m))
                        al[tgt, src] += f / dims[d]
                        ab[src, tgt] += g / dims[c]
    sq = np.asarray([cat.sqrt_dims[i] for i in range(r)], dtype=complex)
    psi = Morphism(V, A.word, A.word, {u: np.diag(sq)})
    dimS = complex(np.sum(np.asarray(cat.dims, dtype=complex) ** 2))
    d = OrbifoldDatum(A, T, Morphism(V, Tw + Tw, Tw + Tw, {u: al}),
                      Morphism(V, Tw + Tw, Tw + Tw, {u: ab}), psi, 1.0 / dimS,
                      name=f"A^{cat.name}")
    return V, d


# ---------------------------------------------------------------------------
# commutative datum

def from_commutative_frobenius(alg: FrobeniusAlgebra, cat: CategoryData | None = None
                               ) -> OrbifoldDatum:
    """``T = A`` with all three actions the multiplication, ``alpha = alphabar = Delta mu``."""
    cat = alg.cat if cat is None else cat
    if cat is not alg.cat:
        raise ValueError("algebra lives in a different category")
    rep = verify_frobenius(alg)
    if not rep.passed:
        bad = [c.name for c in rep.checks if not c.passed]
        raise ValueError(f"algebra {alg.name} fails Frobenius checks: {', '.join(bad)}")
    tol = cat.tolerance * 1e2
    if cat.twist is not None:
        for x in sorted(set(alg.carrier)):
            if abs(cat.twist[x] - 1) > tol:
                raise ValueError(f"nontrivial twist {cat.twist[x]:.6g} on summand "
                                 f"{cat.labels[x]} of the algebra")
    A = alg.word
    c = braid(cat, A + A, 0, over=True)
    res = _rel(compose(alg.mu, c), alg.mu)
    if res > tol:
        raise ValueError(f"algebra {alg.name} is not commutative (residual {res:.3e})")
    T = Module(cat, A, [Action("0", alg, "left", alg.mu), Action("1", alg, "right", alg.mu),
                        Action("2", alg, "right", alg.mu)], name=f"T[{alg.name}]")
    dm = compose(alg.delta, alg.mu)
    return OrbifoldDatum(alg, T, dm, dm, identity(cat, A), 1.0, 1.0, name=f"comm[{alg.name}]")


# ---------------------------------------------------------------------------
# datum from a crossed G-extension

def _sum_embedded(parts, src: Word, tgt: Word) -> Morphism:
    total = None
    for f, so, to in parts:
        g = direct_sum_embed(f, src, tgt, so, to)
        total = g if total is None else total + g
    if total is None:
        raise ValueError("no components")
    return total


def from_crossed_extension(crossed, m: dict) -> OrbifoldDatum:
    """Datum built from one simple object ``m[g]`` of each degree ``g``.

    Morphisms are evaluated in the extension on words of ``m`` letters, fused and
    finally relabeled into the degree-1 engine ``crossed.neutral``.
    """
    E = crossed.underlying
    G = list(crossed.group)
    mult = crossed.mult
    if set(m) != set(G):
        raise ValueError(f"choice m must cover the group {G}")
    mm = {g: E.index(m[g]) for g in G}
    if mm[crossed.unit] != E.unit:
        raise ValueError("m of the group unit must be the tensor unit")
    if E.sqrt_dims is None:
        raise ValueError("extension carries no chosen square roots of dimensions")
    dim, sq = {}, {}
    for g, x in mm.items():
        if crossed.grading[x] != g:
            raise ValueError(f"m[{g}] = {E.labels[x]} has degree {crossed.grading[x]}, not {g}")
        d = E.dims[x]
        if abs(d) < E.tolerance:
            raise ValueError(f"m[{g}] has zero dimension")
        dim[g] = trace(identity(E, ((x,),)))
        sq[g] = E.sqrt_dims[x]
    ob = {g: (mm[g],) for g in G}
    du = {g: dual_object(E, ob[g]) for g in G}

    # A = sum_g m_g* (x) m_g
    Aparts, offA, Aobj = {}, {}, ()
    for g in G:
        Y, io, pi = fuse(E, (du[g], ob[g]))
        Aparts[g] = (Y, io, pi)
        offA[g] = len(Aobj)
        Aobj += Y
    Aw = (Aobj,)
    mu_p, eta_p, de_p, ep_p, psi_p = [], [], [], [], []
    for g in G:
        Y, io, pi = Aparts[g]
        w = (du[g], ob[g])
        o = offA[g]
        mu = compose_all(pi, at(evt(E, ob[g]), w + w, 1), tensor(io, io))
        mu_p.append((mu, [o, o], [o]))
        eta_p.append((compose(pi, coevt(E, ob[g])), [], [o]))
        de = compose_all(tensor(pi, pi), at(coev(E, ob[g]), w, 1), io) * (1.0 / dim[g])
        de_p.append((de, [o], [o, o]))
        ep_p.append((compose(ev(E, ob[g]), io) * dim[g], [o], []))
        psi_p.append((identity(E, (Y,)) * (1.0 / sq[g]), [o], [o]))
    Ae = FrobeniusAlgebra(E, Aobj, _sum_embedded(mu_p, Aw + Aw, Aw),
                          _sum_embedded(eta_p, (), Aw), _sum_embedded(de_p, Aw, Aw + Aw),
                          _sum_embedded(ep_p, Aw, ()), name="A^m")
    psi_e = _sum_embedded(psi_p, Aw, Aw)

    # T = sum_{g,h} m_gh* (x) m_g (x) m_h
    pairs = [(g, h) for g in G for h in G]
    Tparts, offT, Tobj = {}, {}, ()
    for g, h in pairs:
        gh = mult[(g, h)]
        Y, io, pi = fuse(E, (du[gh], ob[g], ob[h]))
        Tparts[(g, h)] = (Y, io, pi)
        offT[(g, h)] = len(Tobj)
        Tobj += Y
    Tw = (Tobj,)
    r0, r1, r2 = [], [], []
    for g, h in pairs:
        gh = mult[(g, h)]
        Y, io, pi = Tparts[(g, h)]
        o = offT[(g, h)]
        tw = (du[gh], ob[g], ob[h])
        _, ia, _ = Aparts[gh]
        f0 = compose_all(pi, at(evt(E, ob[gh]), (du[gh], ob[gh]) + tw, 1), tensor(ia, io))
        r0.append((f0, [offA[gh], o], [o]))
        _, ia, _ = Aparts[h]
        w2 = tw + (du[h], ob[h])
        f2 = compose_all(pi, at(evt(E, ob[h]), w2, 2), tensor(io, ia))
        r2.append((f2, [o, offA[h]], [o]))
        _, ia, _ = Aparts[g]
        w1 = tw + (du[g], ob[g])
        w1b = (du[gh], ob[g], du[g], ob[h], ob[g])
        f1 = compose_all(pi, at(evt(E, ob[g]), (du[gh], ob[g], du[g], ob[g], ob[h]), 1),
                         braid(E, w1b, 3, over=True), braid(E, w1, 2, over=True),
                         tensor(io, ia))
        r1.append((f1, [o, offA[g]], [o]))
    acts = [Action("0", Ae, "left", _sum_embedded(r0, Aw + Tw, Tw)),
            Action("1", Ae, "right", _sum_embedded(r1, Tw + Aw, Tw)),
            Action("2", Ae, "right", _sum_embedded(r2, Tw + Aw, Tw))]

    al_p, ab_p = [], []
    for g, h, k in ((g, h, k) for g in G for h in G for k in G):
        hk, gh = mult[(h, k)], mult[(g, h)]
        ghk = mult[(g, hk)]
        Y1, io1, pi1 = Tparts[(g, hk)]
        Y2, io2, pi2 = Tparts[(h, k)]
        Y3, io3, pi3 = Tparts[(gh, k)]
        Y4, io4, pi4 = Tparts[(g, h)]
        s = (du[ghk], ob[g], ob[hk], du[hk], ob[h], ob[k])
        w = (du[ghk], ob[g], ob[h], ob[k])
        a = compose_all(
            braid(E, (du[ghk], ob[gh], du[gh], ob[k], ob[g], ob[h]), 2, over=False),
            at(coev(E, ob[gh]), (du[ghk], ob[k], ob[g], ob[h]), 1),
            braid(E, (du[ghk], ob[g], ob[k], ob[h]), 1, over=False),
            braid(E, w, 2, over=False),
            at(evt(E, ob[hk]), s, 2))
        a = compose_all(tensor(pi3, pi4), a, tensor(io1, io2))
        al_p.append((a, [offT[(g, hk)], offT[(h, k)]], [offT[(gh, k)], offT[(g, h)]]))
        t = (du[ghk], ob[gh], ob[k], du[gh], ob[g], ob[h])
        b = compose_all(
            at(coev(E, ob[hk]), w, 2),
            at(evt(E, ob[gh]), (du[ghk], ob[gh], du[gh], ob[g], ob[h], ob[k]), 1),
            braid(E, (du[ghk], ob[gh], du[gh], ob[g], ob[k], ob[h]), 4, over=True),
            braid(E, (du[ghk], ob[gh], du[gh], ob[k], ob[g], ob[h]), 3, over=True),
            braid(E, t, 2, over=True))
        b = compose_all(tensor(pi1, pi2), b, tensor(io3, io4))
        ab_p.append((b, [offT[(gh, k)], offT[(g, h)]], [offT[(g, hk)], offT[(h, k)]]))
    alpha = _sum_embedded(al_p, Tw + Tw, Tw + Tw)
    alphabar = _sum_embedded(ab_p, Tw + Tw, Tw + Tw)

    # push into the degree-1 engine
    B = crossed.neutral
    back = {v: k for k, v in crossed.neutral_map.items()}
    for x in set(Aobj) | set(Tobj):
        if x not in back:
            raise ValueError(f"summand {E.labels[x]} is not in the degree-1 part")

    def rl(f):
        return relabel(f, B, back)

    A = FrobeniusAlgebra(B, tuple(back[x] for x in Aobj), rl(Ae.mu), rl(Ae.eta), rl(Ae.delta),
                         rl(Ae.eps), name="A^m")
    T = Module(B, (tuple(back[x] for x in Tobj),),
               [Action(a.tag, A, a.side, rl(a.morphism)) for a in acts], name="T^m")
    n = len(G)
    return OrbifoldDatum(A, T, rl(alpha), rl(alphabar), rl(psi_e), 1.0 / n,
                         name=f"{crossed.name}[{','.join(E.labels[mm[g]] for g in G)}]")


# ---------------------------------------------------------------------------
# Morita transport

@dataclass
class MoritaTransport:
    """Result of a transport with the ambient embedding of the new ``T``."""

    datum: OrbifoldDatum
    projector: Morphism
    embed: Morphism
    retract: Morphism
    witnesses: VerificationReport


def _bimodule_sides(X: Module, A: FrobeniusAlgebra) -> tuple[Action, Action]:
    lefts, rights = X.side("left"), X.side("right")
    if len(lefts) != 1 or len(rights) != 1:
        raise ValueError("Morita module needs exactly one left and one right action")
    lx, rx = lefts[0], rights[0]
    if lx.algebra is not A and lx.algebra.carrier != A.carrier:
        raise ValueError("left action of the Morita module is not over the datum's algebra")
    return lx, rx


def morita_witnesses(X: Module, A: FrobeniusAlgebra) -> VerificationReport:
    """Rank checks of ``X* (x)_A X = B`` and ``X (x)_B X* = A`` plus the loop identities."""
    from .frobenius import morita_decompose, relative_projector
    cat = X.cat
    lx, rx = _bimodule_sides(X, A)
    B = rx.algebra
    Xd = module_dual(X)
    rep = VerificationReport(f"morita:{X.name}")
    rep.add("A.frobenius", verify_frobenius(A).max_residual, cat.tolerance * 1e2)
    rep.add("B.frobenius", verify_frobenius(B).max_residual, cat.tolerance * 1e2)
    rep.add("X.bimodule", verify_module(X).max_residual, cat.tolerance * 1e2)

    def ranks(obj):
        return {k: obj.count(k) for k in set(obj)}

    for nm, (m, n, alg, tag, target) in {
            "X*(x)_A X ~ B": (Xd, X, A, lx.tag, B), "X(x)_B X* ~ A": (X, Xd, B, rx.tag, A)}.items():
        p = relative_projector(m, n, alg, tag, tag)
        idem = compose(p, p).residual(p)
        got = split_idempotent(p)[3] if idem < cat.tolerance * 1e3 else None
        rep.add(nm, 0.0 if got == ranks(target.carrier) else np.inf, 0.5,
                f"ranks {got} vs {ranks(target.carrier)}")
    for nm, alg in (("A", A), ("B", B)):
        for sub, d in morita_decompose(alg):
            if abs(d) < cat.tolerance * 1e3:
                rep.add(f"{nm}.nonzero_dims", np.inf, 0.5, f"summand {sub.name} has dimension 0")
                break
        else:
            rep.add(f"{nm}.nonzero_dims", 0.0, 0.5)
    return rep


def _ambient_projector(d: OrbifoldDatum, X: Module, lx: Action) -> tuple[Morphism, Word]:
    cat = d.cat
    A = d.A
    Xd = module_dual(X)
    x, xs, t, a = X.carrier, Xd.carrier, d.T.carrier, A.word
    r = {tag: d.T.action(tag).morphism for tag in "012"}
    lam = lx.morphism
    rhod = Xd.action(lx.tag).morphism
    cup = A.cup()
    W = xs + t + x + x
    p0 = extend(compose(tensor(rhod, r["0"]), extend(cup, xs, t)), (), x + x)
    p1 = at(compose(tensor(r["1"], lam), extend(cup, t, x)), W, 1)
    s = t + a + a + x + x
    p2 = compose_all(at(lam, t + x + a + x, 2), braid(cat, t + a + x + x, 1, over=True),
                     at(r["2"], s, 0), extend(cup, t, x + x))
    p2 = extend(p2, xs)
    return compose_all(p0, p1, p2), W


def morita_transport(datum: OrbifoldDatum, X: Module, check: bool = True,
                     full: bool = False) -> OrbifoldDatum | MoritaTransport:
    """Transport along an ``A``-``B`` bimodule ``X``; ``B`` is the algebra of its right action."""
    cat = datum.cat
    if X.cat is not cat:
        raise ValueError("Morita module lives in a different category")
    if len(X.carrier) != 1:
        raise ValueError("Morita module must live on a single object")
    lx, rx = _bimodule_sides(X, datum.A)
    B = rx.algebra
    wit = morita_witnesses(X, datum.A) if check else VerificationReport("morita:unchecked")
    if not wit.passed:
        bad = [c.name for c in wit.checks if not c.passed]
        raise ValueError(f"Morita witnesses fail: {', '.join(bad)}")
    Xd = module_dual(X)
    Xo = X.carrier[0]
    x, xs, t, b = X.carrier, Xd.carrier, datum.T.carrier, B.word
    P, W = _ambient_projector(datum, X, lx)
    res = compose(P, P).residual(P)
    if res > cat.tolerance * 1e3 * max(1.0, P.max_abs() ** 2):
        raise ValueError(f"transport projector not idempotent (residual {res:.3e})")
    Y, e, r, _ = split_idempotent(P)
    y = (Y,)
    # actions of B on the ambient word
    lamd = Xd.action(rx.tag).morphism
    rho = rx.morphism
    amb0 = extend(lamd, (), t + x + x)
    amb1 = compose(at(rho, xs + t + x + b + x, 2), braid(cat, W + b, 3, over=True))
    amb2 = at(rho, W + b, 3)
    acts = [Action("0", B, "left", compose_all(r, amb0, extend(e, b))),
            Action("1", B, "right", compose_all(r, amb1, extend(e, (), b))),
            Action("2", B, "right", compose_all(r, amb2, extend(e, (), b)))]
    TX = Module(cat, y, acts, name=f"{datum.T.name}^{X.name}")
    al, ab = datum.alpha, datum.alphabar
    S = W + W
    # alpha^X
    w1 = xs + t + x + t + x + x
    w2 = xs + t + t + x + x + x
    steps = [at(evt(cat, Xo), S, 3), braid(cat, w1, 2, over=False), at(al, w2, 1),
             at(coev(cat, Xo), w2, 2)]
    w = xs + t + x + xs + t + x + x + x
    for pos in (6, 5, 4, 3):
        steps.append(braid(cat, w, pos, over=False))
        w = w[:pos] + (w[pos + 1], w[pos]) + w[pos + 2:]
    amb = compose_all(*reversed(steps))
    alX = compose_all(tensor(r, r), amb, tensor(e, e))
    # alphabar^X
    steps = []
    w = S
    for pos in (3, 4, 5, 6):
        steps.append(braid(cat, w, pos, over=True))
        w = w[:pos] + (w[pos + 1], w[pos]) + w[pos + 2:]
    steps.append(at(evt(cat, Xo), w, 2))
    w = xs + t + t + x + x + x
    steps += [at(ab, w, 1), braid(cat, w, 2, over=True)]
    w = xs + t + x + t + x + x
    steps.append(at(coev(cat, Xo), w, 3))
    amb = compose_all(*reversed(steps))
    abX = compose_all(tensor(r, r), amb, tensor(e, e))
    # (psi^X)^2 = (ev (x) id) o (id (x) rho (x) id) o (id (x) psi_0^2 (x) Delta) o (coevt (x) id)
    elem = compose(psi_power(datum, 2), datum.A.eta)
    psi0x = compose(lx.morphism, extend(elem, (), x))
    sq = compose_all(at(ev(cat, Xo), xs + x + b, 0), at(rho, xs + x + b + b, 1),
                     tensor(tensor(identity(cat, xs), psi0x), B.delta),
                     extend(coevt(cat, Xo), (), b))
    psiX = Morphism(cat, b, b, {k: sla.sqrtm(sq.dense(k)) for k in basis(cat, b).roots})
    new = OrbifoldDatum(B, TX, alX, abX, psiX, datum.phi2, datum.phi,
                        name=f"{datum.name}^{X.name}")
    if full:
        return MoritaTransport(new, P, e, r, wit)
    return new


def psi_ratio_residuals(datum: OrbifoldDatum, X: Module, transported: OrbifoldDatum
                        ) -> list[dict]:
    """Per simple summand: ``(psi_B / psi_A)^2`` against ``d_X / d_B``."""
    from .frobenius import central_idempotents
    cat = datum.cat
    u = cat.unit
    lx, rx = _bimodule_sides(X, datum.A)
    A, B = datum.A, transported.A
    x = X.carrier

    def scalar_on(f, z):
        v, w = compose(f, z).dense(u).ravel(), z.dense(u).ravel()
        return complex(np.vdot(w, v) / np.vdot(w, w))

    out = []
    eb = central_idempotents(B)
    for ea in central_idempotents(A):
        pa = _induce(lx, ea, x)
        psa = scalar_on(datum.psi, ea)
        for f in eb:
            proj = compose(_induce(rx, f, x), pa)
            dX = trace(proj)
            if abs(dX) < cat.tolerance * 1e3:
                continue
            dB = trace(B.element_action(f, "left"))
            psb = scalar_on(transported.psi, f)
            lhs, rhs = (psb / psa) ** 2, dX / dB
            out.append({"d_X": dX, "d_B": dB, "psi_A": psa, "psi_B": psb,
                        "ratio": lhs, "expected": rhs, "residual": abs(lhs - rhs)})
    return out


def check_T_compatible_iso(d1: OrbifoldDatum, d2: OrbifoldDatum, rho: Morphism
                           ) -> VerificationReport:
    """Multi-module isomorphism ``rho: T1 -> T2`` intertwining both alpha maps."""
    cat = d1.cat
    t1, t2 = d1.T.carrier, d2.T.carrier
    if d2.cat is not cat or rho.src != t1 or rho.tgt != t2:
        raise ValueError(f"rho must map {t1} to {t2} in one category")
    rep = VerificationReport(f"T-iso:{d1.name}->{d2.name}")
    tol = cat.tolerance * 1e2
    if d1.A.carrier != d2.A.carrier:
        raise ValueError("data do not share the algebra object")
    rep.add("shared.psi", _rel(d1.psi, d2.psi), tol)
    rep.add("shared.phi2", abs(d1.phi2 - d2.phi2), tol)
    a = d1.A.word
    inv_ok = True
    for k in set(basis(cat, t1).roots) | set(basis(cat, t2).roots):
        M = rho.dense(k)
        if M.shape[0] != M.shape[1] or (M.size and np.linalg.matrix_rank(M, tol=1e-8) < M.shape[0]):
            inv_ok = False
    rep.add("invertible", 0.0 if inv_ok else np.inf, 0.5)
    for tag in "012":
        f, g = d1.T.action(tag), d2.T.action(tag)
        if f.side == "left":
            lhs, rhs = compose(rho, f.morphism), compose(g.morphism, extend(rho, a))
        else:
            lhs, rhs = compose(rho, f.morphism), compose(g.morphism, extend(rho, (), a))
        rep.add(f"module_map[{tag}]", _rel(lhs, rhs), tol)
    rr = tensor(rho, rho)
    rep.add("alpha", _rel(compose(rr, d1.alpha), compose(d2.alpha, rr)), tol)
    rep.add("alphabar", _rel(compose(rr, d1.alphabar), compose(d2.alphabar, rr)), tol)
    return rep


def round_trip_iso(datum: OrbifoldDatum, X: Module, there: MoritaTransport,
                   back: MoritaTransport) -> Morphism:
    """Candidate ``rho: T -> T^{X X*}`` for transport along ``X`` and then ``X*``.

    Each ``X``-line is created by a coevaluation next to the old ``T``; the two
    pairs on the right cross once.  The left action inserts the inverse of the
    loop element ``dim(X_i)/dim(A_i)`` of ``X`` around ``A``.
    """
    from .frobenius import wrap
    cat = datum.cat
    lx, _ = _bimodule_sides(X, datum.A)
    Xo = X.carrier[0]
    x, xs, t = X.carrier, (dual_object(cat, Xo),), datum.T.carrier
    w = x + xs + t
    amb = compose_all(braid(cat, w + x + xs + x + xs, len(w) + 1, over=False),
                      at(coev(cat, Xo), w + x + xs, len(w) + 2), at(coev(cat, Xo), w, len(w)),
                      extend(coev(cat, Xo), (), t))
    inner = at(there.retract, x + xs + t + x + x + xs + xs, 1)
    loop = _block_power(wrap(X, lx.tag), -1)
    fix = _induce(datum.T.action("0"), compose(loop, datum.A.eta), t)
    return compose_all(back.retract, inner, amb, fix)


# ---------------------------------------------------------------------------
# serialization

def _cnum(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _algebra_dict(alg: FrobeniusAlgebra) -> dict:
    return {"name": alg.name, "carrier": list(alg.carrier), "mu": alg.mu.to_dict(),
            "eta": alg.eta.to_dict(), "delta": alg.delta.to_dict(), "eps": alg.eps.to_dict()}


def datum_to_dict(datum: OrbifoldDatum) -> dict:
    """JSON-ready document with the category, algebra, module and all morphism tables."""
    from .skeletal_core import to_document
    return {"format": "orbdatum/1", "name": datum.name, "category": to_document(datum.cat),
            "A": _algebra_dict(datum.A),
            "T": {"name": datum.T.name, "carrier": [list(o) for o in datum.T.carrier],
                  "actions": [{"tag": a.tag, "side": a.side, "morphism": a.morphism.to_dict()}
                              for a in datum.T.actions]},
            "alpha": datum.alpha.to_dict(), "alphabar": datum.alphabar.to_dict(),
            "psi": datum.psi.to_dict(), "phi2": _cnum(datum.phi2), "phi": _cnum(datum.phi)}


def datum_from_dict(doc: dict, cat: CategoryData | None = None) -> OrbifoldDatum:
    from .skeletal_core import load_category
    if doc.get("format") != "orbdatum/1":
        raise ValueError(f"not an orbifold datum document (format {doc.get('format')!r})")
    if cat is None:
        cat = load_category(doc["category"])
    a = doc["A"]

    def mor(x):
        return Morphism.from_dict(cat, x)

    A = FrobeniusAlgebra(cat, tuple(a["carrier"]), mor(a["mu"]), mor(a["eta"]), mor(a["delta"]),
                         mor(a["eps"]), name=a.get("name", "A"))
    t = doc["T"]
    T = Module(cat, t["carrier"], [Action(x["tag"], A, x["side"], mor(x["morphism"]))
                                   for x in t["actions"]], name=t.get("name", "T"))
    return OrbifoldDatum(A, T, mor(doc["alpha"]), mor(doc["alphabar"]), mor(doc["psi"]),
                         complex(*doc["phi2"]), complex(*doc["phi"]), name=doc.get("name", "datum"))
