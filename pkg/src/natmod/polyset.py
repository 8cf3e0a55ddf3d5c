"""Polynomials in finite sets: extension, composition, and the 2/3-cell calculus.

A polynomial is a diagram I <- B -> A -> J of total maps between finite
sets; its extension sends an I-indexed family to the J-indexed family of
dependent pairs (a, section of the fibre over a).  Morphisms of polynomials
are triples over a chosen pullback carrier, cartesian when the comparison
map is a bijection; adjustments are carrier maps over B.  Chosen pullbacks
are the sets of pairs in lexicographic element order throughout, which
makes horizontal composition of cartesian cells a pure square chase.

Elements of derived sets are nested tuples; sections are represented as
tuples of (index, value) pairs in index order.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional


@dataclass(frozen=True)
class FinMap:
    """A total function between finite sets of hashable elements."""

    dom: tuple
    cod: tuple
    mapping: tuple  # tuple of (x, f(x)) pairs in dom order

    def __post_init__(self):
        got = dict(self.mapping)
        if set(got) != set(self.dom):
            raise ValueError("mapping does not cover the domain")
        cod_set = set(self.cod)
        for x, y in self.mapping:
            if y not in cod_set:
                raise ValueError(f"value {y!r} outside the codomain")

    def __call__(self, x):
        return dict(self.mapping)[x]

    @property
    def as_dict(self) -> dict:
        return dict(self.mapping)

    def fibre(self, y) -> tuple:
        d = self.as_dict
        return tuple(x for x in self.dom if d[x] == y)

    def is_bijection(self) -> bool:
        return len(self.dom) == len(self.cod) and len(set(self.as_dict.values())) == len(self.cod)

    def inverse(self) -> "FinMap":
        if not self.is_bijection():
            raise ValueError("not a bijection")
        return fin_map(self.cod, self.dom, {y: x for x, y in self.mapping})


def fin_map(dom: Iterable, cod: Iterable, mapping: dict | Callable) -> FinMap:
    dom = tuple(dom)
    cod = tuple(cod)
    if callable(mapping):
        pairs = tuple((x, mapping(x)) for x in dom)
    else:
        pairs = tuple((x, mapping[x]) for x in dom)
    return FinMap(dom, cod, pairs)


def identity_map(xs: Iterable) -> FinMap:
    xs = tuple(xs)
    return fin_map(xs, xs, lambda x: x)


def compose_map(g: FinMap, f: FinMap) -> FinMap:
    gd = g.as_dict
    fd = f.as_dict
    return fin_map(f.dom, g.cod, lambda x: gd[fd[x]])


def chosen_pullback(f: FinMap, g: FinMap) -> tuple[tuple, FinMap, FinMap]:
    """The pullback of a cospan as the set of pairs, in lexicographic order."""
    if f.cod != g.cod:
        raise ValueError("pullback requires a common codomain")
    fd, gd = f.as_dict, g.as_dict
    apex = tuple((x, y) for x in f.dom for y in g.dom if fd[x] == gd[y])
    return apex, fin_map(apex, f.dom, lambda p: p[0]), fin_map(apex, g.dom, lambda p: p[1])


def is_pullback_square(top: FinMap, left: FinMap, right: FinMap, bottom: FinMap) -> bool:
    """Does (left, top) exhibit its domain as the pullback of (bottom, right)?

    Square shape: top : P -> Y, left : P -> X, right : Y -> Z, bottom : X -> Z.
    """
    if compose_map(bottom, left).mapping != compose_map(right, top).mapping:
        return False
    want = {}
    bd, rd = bottom.as_dict, right.as_dict
    for x in bottom.dom:
        for y in right.dom:
            if bd[x] == rd[y]:
                want[(x, y)] = 0
    ld, td = left.as_dict, top.as_dict
    got: dict = {}
    for p in left.dom:
        key = (ld[p], td[p])
        got[key] = got.get(key, 0) + 1
    return set(got) == set(want) and all(n == 1 for n in got.values())


@dataclass(frozen=True)
class Polynomial:
    """A diagram I <-s- B -f-> A -t-> J of total maps of finite sets."""

    s: FinMap
    f: FinMap
    t: FinMap

    def __post_init__(self):
        if self.s.dom != self.f.dom:
            raise ValueError("s and f must share their domain B")
        if self.f.cod != self.t.dom:
            raise ValueError("cod(f) must be dom(t)")

    @property
    def I(self) -> tuple:
        return self.s.cod

    @property
    def B(self) -> tuple:
        return self.s.dom

    @property
    def A(self) -> tuple:
        return self.f.cod

    @property
    def J(self) -> tuple:
        return self.t.cod

    def fibre(self, a) -> tuple:
        return self.f.fibre(a)


def poly_from_map(f: FinMap) -> Polynomial:
    """A morphism viewed as a polynomial from 1 to 1."""
    one = ("*",)
    return Polynomial(
        fin_map(f.dom, one, lambda _: "*"),
        f,
        fin_map(f.cod, one, lambda _: "*"),
    )


def identity_poly(index: Iterable) -> Polynomial:
    """The identity polynomial I <- I -> I -> I."""
    i = identity_map(index)
    return Polynomial(i, i, i)


def _sections(index: tuple, values_at: Callable[[object], tuple]) -> list[tuple]:
    """All sections of a dependent family, as tuples of (index, value) pairs."""
    pools = [tuple((b, v) for v in values_at(b)) for b in index]
    return [tuple(choice) for choice in itertools.product(*pools)]


def extend(p: Polynomial, family: dict) -> dict:
    """The extension of a polynomial applied to an I-indexed family of sets.

    The component at j is the set of pairs (a, section) with t(a) = j and
    the section assigning to each b in the fibre over a an element of the
    family at s(b).
    """
    if set(family) != set(p.I):
        raise ValueError("family must be indexed exactly by I")
    sd = p.s.as_dict
    out = {j: [] for j in p.J}
    td = p.t.as_dict
    for a in p.A:
        fib = p.fibre(a)
        for sec in _sections(fib, lambda b: tuple(family[sd[b]])):
            out[td[a]].append((a, sec))
    return {j: tuple(v) for j, v in out.items()}


def extend_map(p: Polynomial, family: dict, family2: dict, maps: dict) -> dict:
    """Functorial action of the extension on a family of maps X -> X'."""
    ext1 = extend(p, family)
    ext2 = extend(p, family2)
    sd = p.s.as_dict
    out = {}
    for j in p.J:
        def act(el, _j=j):
            a, sec = el
            return (a, tuple((b, maps[sd[b]](v)) for b, v in sec))
        out[j] = fin_map(ext1[j], ext2[j], act)
    return out


def compose(g: Polynomial, f: Polynomial) -> Polynomial:
    """The polynomial composite g·f, with the explicit middle sets.

    For f : I -+-> J and g : J -+-> K the composite has positions
    M = Σ_{c in C} Π_{d in D_c} A and directions
    N = Σ_{(c,m) in M} Σ_{d in D_c} B_{m(d)}, with the evident projections.
    """
    if f.J != g.I:
        raise ValueError("middle index sets do not match")
    ud = g.s.as_dict
    td = f.t.as_dict
    sd = f.s.as_dict
    fd = f.f.as_dict
    m_set = []
    for c in g.A:
        fib = g.fibre(c)
        for sec in _sections(fib, lambda d: tuple(a for a in f.A if td[a] == ud[d])):
            m_set.append((c, sec))
    m_set = tuple(m_set)
    n_set = []
    for c, sec in m_set:
        for d, a in sec:
            for b in f.fibre(a):
                n_set.append((c, sec, d, b))
    n_set = tuple(n_set)
    vd = g.t.as_dict
    return Polynomial(
        fin_map(n_set, f.I, lambda el: sd[el[3]]),
        fin_map(n_set, m_set, lambda el: (el[0], el[1])),
        fin_map(m_set, g.J, lambda el: vd[el[0]]),
    )


def compose_extension_iso(g: Polynomial, f: Polynomial, family: dict) -> dict:
    """The structural bijection P_{g·f}(X) ≅ P_g(P_f(X)), per K-index.

    Returns, for each k, a pair (forward, backward) of maps realising the
    canonical isomorphism; naturality amounts to these maps commuting with
    the functorial action on family maps.
    """
    gf = compose(g, f)
    lhs = extend(gf, family)
    mid = extend(f, family)
    rhs = extend(g, mid)
    sd = f.s.as_dict

    out = {}
    for k in g.J:
        def fwd(el, _k=k):
            (c, m), sec = el
            md = dict(m)
            secd = dict(sec)
            outer = tuple(
                (d, (md[d], tuple(
                    (b, secd[(c, m, d, b)]) for b in f.fibre(md[d])
                )))
                for d in g.fibre(c)
            )
            return (c, outer)

        def bwd(el, _k=k):
            c, outer = el
            m = tuple((d, pair[0]) for d, pair in outer)
            outer_d = dict(outer)
            sec = []
            for d, a in m:
                inner = dict(outer_d[d][1])
                for b in f.fibre(a):
                    sec.append(((c, m, d, b), inner[b]))
            return ((c, m), tuple(sec))

        out[k] = (
            fin_map(lhs[k], rhs[k], fwd),
            fin_map(rhs[k], lhs[k], bwd),
        )
    return out


def find_poly_iso(p: Polynomial, q: Polynomial) -> Optional[tuple[FinMap, FinMap]]:
    """A structure-preserving pair of bijections (on positions, on directions).

    Searches bijections commuting with s, f, t (identity on the outer index
    sets, which must agree).  Exponential; intended for tiny instances only.
    """
    if p.I != q.I or p.J != q.J:
        return None
    if len(p.A) != len(q.A) or len(p.B) != len(q.B):
        return None
    td_p, td_q = p.t.as_dict, q.t.as_dict
    sd_p, sd_q = p.s.as_dict, q.s.as_dict
    fd_p, fd_q = p.f.as_dict, q.f.as_dict
    for a_perm in itertools.permutations(q.A):
        a_map = dict(zip(p.A, a_perm))
        if any(td_p[a] != td_q[a_map[a]] for a in p.A):
            continue
        if any(len(p.fibre(a)) != len(q.fibre(a_map[a])) for a in p.A):
            continue
        pools = []
        for b in p.B:
            pool = [
                b2 for b2 in q.fibre(a_map[fd_p[b]])
                if sd_q[b2] == sd_p[b]
            ]
            pools.append(pool)
        for combo in itertools.product(*pools):
            if len(set(combo)) != len(combo):
                continue
            return (
                fin_map(p.A, q.A, a_map),
                fin_map(p.B, q.B, dict(zip(p.B, combo))),
            )
    return None


# ---------------------------------------------------------------------------
# Morphisms of polynomials, adjustments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolyMorphism:
    """A 2-cell between parallel polynomials, with chosen pullback carrier.

    The carrier together with (to_a, phi1) forms the chosen pullback of the
    codomain's middle map along phi0; phi2 compares it with the domain's
    directions.  Cartesian iff phi2 is a bijection.
    """

    src: Polynomial
    dst: Polynomial
    phi0: FinMap   # A -> C
    to_a: FinMap   # carrier -> A
    phi1: FinMap   # carrier -> D
    phi2: FinMap   # carrier -> B

    def __post_init__(self):
        if self.src.I != self.dst.I or self.src.J != self.dst.J:
            raise ValueError("morphisms require parallel polynomials")
        # outer triangles
        if compose_map(self.dst.t, self.phi0).mapping != self.src.t.mapping:
            raise ValueError("phi0 does not respect the target index")
        if compose_map(self.src.f, self.phi2).mapping != self.to_a.mapping:
            raise ValueError("phi2 does not lie over A")
        lhs = compose_map(self.src.s, self.phi2).mapping
        rhs = compose_map(self.dst.s, self.phi1).mapping
        if lhs != rhs:
            raise ValueError("phi1/phi2 do not agree over the source index")
        if not is_pullback_square(self.phi1, self.to_a, self.dst.f, self.phi0):
            raise ValueError("the lower square is not a pullback")

    @property
    def carrier(self) -> tuple:
        return self.to_a.dom

    @property
    def cartesian(self) -> bool:
        return self.phi2.is_bijection()


def cell_from_square(
    src: Polynomial, dst: Polynomial, phi0: FinMap, phi1_direct: FinMap
) -> PolyMorphism:
    """The cartesian cell canonically induced by a pullback square.

    ``phi1_direct : B -> D`` together with phi0 must form a pullback square
    against the two middle maps; the cell's carrier is the chosen pullback
    and its comparison map is the induced bijection.
    """
    if not is_pullback_square(phi1_direct, src.f, dst.f, phi0):
        raise ValueError("the given square is not a pullback")
    apex, to_a, phi1 = chosen_pullback(phi0, dst.f)
    # carrier elements are pairs (a, d) with phi0(a) = g(d)
    fd = src.f.as_dict
    p1d = phi1_direct.as_dict
    inv: dict = {}
    for b in src.B:
        inv[(fd[b], p1d[b])] = b
    phi2 = fin_map(apex, src.B, lambda p: inv[p])
    return PolyMorphism(src, dst, phi0, to_a, phi1, phi2)


def identity_cell(p: Polynomial) -> PolyMorphism:
    return cell_from_square(p, p, identity_map(p.A), identity_map(p.B))


def vertical_compose(psi: PolyMorphism, phi: PolyMorphism) -> PolyMorphism:
    """ψ ∘ φ for φ : F => G and ψ : G => H, via the chosen pullbacks."""
    if phi.dst is not psi.src and phi.dst != psi.src:
        raise ValueError("cells are not composable")
    f_poly, h_poly = phi.src, psi.dst
    phi0 = compose_map(psi.phi0, phi.phi0)
    apex, to_a, phi1 = chosen_pullback(phi0, h_poly.f)
    phi0_d = phi.phi0.as_dict
    # carrier elements (a, x) with h(x) = psi0(phi0(a))
    psi_idx = {(psi.to_a(e), psi.phi1(e)): e for e in psi.carrier}
    phi_idx = {(phi.to_a(e), phi.phi1(e)): e for e in phi.carrier}

    def comp2(p):
        a, x = p
        e_psi = psi_idx[(phi0_d[a], x)]
        d = psi.phi2(e_psi)
        e_phi = phi_idx[(a, d)]
        return phi.phi2(e_phi)

    phi2 = fin_map(apex, f_poly.B, comp2)
    return PolyMorphism(f_poly, h_poly, phi0, to_a, phi1, phi2)


def horizontal_compose(psi: PolyMorphism, phi: PolyMorphism) -> PolyMorphism:
    """ψ·φ : G·F => G'·F' for cartesian ψ : G => G' and φ : F => F'.

    Both cells must be cartesian; they are re-expressed as pullback squares
    and chased through the explicit construction of the composites.
    """
    if not (psi.cartesian and phi.cartesian):
        raise ValueError("horizontal composition is defined on cartesian cells")
    if phi.src.J != psi.src.I:
        raise ValueError("cells do not share the middle index")
    gf = compose(psi.src, phi.src)
    gf2 = compose(psi.dst, phi.dst)
    phi_sq = _square_of(phi)       # B -> B'
    psi_sq = _square_of(psi)       # D -> D'
    phi0d, phi1d = phi.phi0.as_dict, phi_sq.as_dict
    psi0d, psi1d = psi.phi0.as_dict, psi_sq.as_dict
    f2 = phi.dst
    g2 = psi.dst

    def on_m(el):
        c, sec = el
        new_sec = tuple(
            sorted(((psi1d[d], phi0d[a]) for d, a in sec),
                   key=lambda p: g2.fibre(psi0d[c]).index(p[0]))
        )
        return (psi0d[c], new_sec)

    def on_n(el):
        c, sec, d, b = el
        mc, msec = on_m((c, sec))
        return (mc, msec, psi1d[d], phi1d[b])

    m_map = fin_map(gf.A, gf2.A, on_m)
    n_map = fin_map(gf.B, gf2.B, on_n)
    return cell_from_square(gf, gf2, m_map, n_map)


def _square_of(cell: PolyMorphism) -> FinMap:
    """The direct map B -> D of a cartesian cell in pullback-square form."""
    inv = cell.phi2.inverse().as_dict
    p1 = cell.phi1.as_dict
    return fin_map(cell.src.B, cell.dst.B, lambda b: p1[inv[b]])


def cell_action(cell: PolyMorphism, family: dict) -> dict:
    """The induced map on extensions, per outer index.

    At a position a with section t, the image position is phi0(a) and the
    image section assigns to a direction d the value of t at the comparison
    of the carrier element over (a, d).
    """
    src_ext = extend(cell.src, family)
    dst_ext = extend(cell.dst, family)
    carrier_of = {(cell.to_a(e), cell.phi1(e)): e for e in cell.carrier}
    phi0d = cell.phi0.as_dict
    phi2d = cell.phi2.as_dict
    out = {}
    for j in cell.src.J:
        def act(el, _j=j):
            a, sec = el
            secd = dict(sec)
            c = phi0d[a]
            new_sec = tuple(
                (d, secd[phi2d[carrier_of[(a, d)]]])
                for d in cell.dst.fibre(c)
            )
            return (c, new_sec)

        out[j] = fin_map(src_ext[j], dst_ext[j], act)
    return out


def whisker_left(g: Polynomial, phi: PolyMorphism) -> PolyMorphism:
    """g·φ : g·F => g·F' (identity on the outer factor)."""
    return horizontal_compose(identity_cell(g), phi)


def whisker_right(psi: PolyMorphism, f: Polynomial) -> PolyMorphism:
    """ψ·f : G·f => G'·f (identity on the inner factor)."""
    return horizontal_compose(psi, identity_cell(f))


@dataclass(frozen=True)
class Adjustment:
    """A 3-cell: a carrier map between parallel 2-cells commuting over B."""

    src: PolyMorphism
    dst: PolyMorphism
    alpha: FinMap

    def __post_init__(self):
        if compose_map(self.dst.phi2, self.alpha).mapping != self.src.phi2.mapping:
            raise ValueError("the adjustment triangle over B does not commute")


def all_adjustments(phi: PolyMorphism, psi: PolyMorphism) -> list[Adjustment]:
    """Brute-force enumeration of all adjustments φ ⇛ ψ."""
    out = []
    for values in itertools.product(psi.carrier, repeat=len(phi.carrier)):
        alpha = fin_map(phi.carrier, psi.carrier, dict(zip(phi.carrier, values)))
        if compose_map(psi.phi2, alpha).mapping == phi.phi2.mapping:
            out.append(Adjustment(phi, psi, alpha))
    return out


def unique_adjustment(phi: PolyMorphism, psi: PolyMorphism) -> Adjustment:
    """The unique adjustment into a cartesian cell: ψ₂⁻¹ ∘ φ₂.

    Refuses non-cartesian ψ, where uniqueness can fail.  Uniqueness is
    nevertheless verified by enumerating every carrier map.
    """
    if not psi.cartesian:
        raise ValueError("codomain cell must be cartesian")
    alpha = compose_map(psi.phi2.inverse(), phi.phi2)
    found = all_adjustments(phi, psi)
    if len(found) != 1:
        raise AssertionError(f"expected a unique adjustment, found {len(found)}")
    if found[0].alpha.mapping != alpha.mapping:
        raise AssertionError("closed form disagrees with the enumeration")
    return found[0]


# ---------------------------------------------------------------------------
# Beck–Chevalley, distributivity, and the two correspondence lemmas
# ---------------------------------------------------------------------------

@dataclass
class IndexedBijection:
    """A family of mutually inverse map pairs, keyed by an index."""

    forward: dict
    backward: dict

    def check_roundtrips(self) -> bool:
        for k, f in self.forward.items():
            b = self.backward[k]
            for x in f.dom:
                if b(f(x)) != x:
                    return False
            for y in b.dom:
                if f(b(y)) != y:
                    return False
        return True


def beck_chevalley_witness(
    v: FinMap, f: FinMap, u: FinMap, g: FinMap, family: dict
) -> tuple[IndexedBijection, IndexedBijection]:
    """Witness bijections for base change along a pullback square.

    Square (checked to be a pullback)::

        B --v--> D
        |        |
        f        g
        v        v
        A --u--> C

    For an A-indexed family X, returns for each d in D the sum-side
    bijection Σ_{a in A_{g(d)}} X_a ≅ Σ_{b in B_d} X_{f(b)} and the
    product-side bijection Π_{a in A_{g(d)}} X_a ≅ Π_{b in B_d} X_{f(b)},
    where A_c is the u-fibre.
    """
    if not is_pullback_square(v, f, g, u):
        raise ValueError("input square is not a pullback")
    fd, vd, ud, gd = f.as_dict, v.as_dict, u.as_dict, g.as_dict
    sum_fwd, sum_bwd = {}, {}
    prod_fwd, prod_bwd = {}, {}
    b_of = {(fd[b], vd[b]): b for b in f.dom}
    for d in g.dom:
        a_fibre = tuple(a for a in u.dom if ud[a] == gd[d])
        b_fibre = v.fibre(d)
        lhs_sum = tuple((a, x) for a in a_fibre for x in family[a])
        rhs_sum = tuple((b, x) for b in b_fibre for x in family[fd[b]])
        sum_bwd[d] = fin_map(rhs_sum, lhs_sum, lambda p: (fd[p[0]], p[1]))
        sum_fwd[d] = fin_map(lhs_sum, rhs_sum, lambda p, _d=d: (b_of[(p[0], _d)], p[1]))
        lhs_prod = _sections(a_fibre, lambda a: tuple(family[a]))
        rhs_prod = _sections(b_fibre, lambda b: tuple(family[fd[b]]))
        prod_fwd[d] = fin_map(
            lhs_prod, rhs_prod,
            lambda sec, _bf=b_fibre: tuple((b, dict(sec)[fd[b]]) for b in _bf),
        )
        prod_bwd[d] = fin_map(
            rhs_prod, lhs_prod,
            lambda sec, _af=a_fibre, _d=d: tuple(
                (a, dict(sec)[b_of[(a, _d)]]) for a in _af
            ),
        )
    return (
        IndexedBijection(sum_fwd, sum_bwd),
        IndexedBijection(prod_fwd, prod_bwd),
    )


def distributivity_witness(u: FinMap, f: FinMap, family: dict) -> IndexedBijection:
    """The type-theoretic choice bijection, per element of the base.

    For C --u--> B --f--> A and a C-indexed family X, gives for each a the
    bijection Π_{b in B_a} Σ_{c in C_b} X_c ≅ Σ_{m in Π_b C_b} Π_b X_{m(b)}.
    """
    fwd, bwd = {}, {}
    for a in f.cod:
        b_fibre = f.fibre(a)
        lhs = _sections(
            b_fibre,
            lambda b: tuple((c, x) for c in u.fibre(b) for x in family[c]),
        )
        choices = _sections(b_fibre, lambda b: u.fibre(b))
        rhs = tuple(
            (m, sec)
            for m in choices
            for sec in _sections(b_fibre, lambda b, _m=m: tuple(family[dict(_m)[b]]))
        )
        fwd[a] = fin_map(
            lhs, rhs,
            lambda sec: (
                tuple((b, cx[0]) for b, cx in sec),
                tuple((b, cx[1]) for b, cx in sec),
            ),
        )
        bwd[a] = fin_map(
            rhs, lhs,
            lambda p: tuple(
                (b, (dict(p[0])[b], dict(p[1])[b])) for b in f.fibre(a)
            ),
        )
    return IndexedBijection(fwd, bwd)


def lemma_map_into_extension(
    f: FinMap, family_x: tuple, g: FinMap
) -> tuple[FinMap, FinMap]:
    """Split a map into Σ_{a in A} X^{B_a} into its two components.

    Given g : Y -> P_f(X), returns g1 : Y -> A and g2 : Δ_{g1}(B) -> X,
    with the chosen pullback carrier {(y, b) : f(b) = g1(y)}.
    """
    gd = g.as_dict
    g1 = fin_map(g.dom, f.cod, lambda y: gd[y][0])
    fd = f.as_dict
    carrier = tuple((y, b) for y in g.dom for b in f.dom if fd[b] == g1(y))
    g2 = fin_map(carrier, family_x, lambda p: dict(gd[p[0]][1])[p[1]])
    return g1, g2


def lemma_pair_into_extension(
    f: FinMap, family_x: tuple, g1: FinMap, g2: FinMap
) -> FinMap:
    """Inverse direction: reassemble g : Y -> P_f(X) from (g1, g2)."""
    fd = f.as_dict
    p_f_x = tuple(
        (a, sec)
        for a in f.cod
        for sec in _sections(f.fibre(a), lambda _b: family_x)
    )
    g2d = g2.as_dict

    def rebuild(y):
        a = g1(y)
        sec = tuple((b, g2d[(y, b)]) for b in f.fibre(a))
        return (a, sec)

    return fin_map(g1.dom, p_f_x, rebuild)


def quadruple_object(f: FinMap) -> tuple:
    """Σ_{a in A} Σ_{m in A^{B_a}} Σ_{b in B_a} B_{m(b)}, as nested tuples."""
    out = []
    for a in f.cod:
        fib = f.fibre(a)
        for m in _sections(fib, lambda _b: f.cod):
            md = dict(m)
            for b in fib:
                for b2 in f.fibre(md[b]):
                    out.append((a, m, b, b2))
    return tuple(out)


def lemma_split_quadruple(
    f: FinMap, g: FinMap
) -> tuple[FinMap, FinMap, FinMap, FinMap]:
    """Split g : Y -> Σ_a Σ_m Σ_{b in B_a} B_{m(b)} into four components.

    Returns (g1 : Y -> A, g2 : Δ_{g1}(B) -> A, g3 : Y -> B over A,
    g4 : Y -> B with f∘g4 = g2∘⟨id, g3⟩); the stated domains make the
    correspondence bijective, as the round-trip test demands.
    """
    gd = g.as_dict
    g1 = fin_map(g.dom, f.cod, lambda y: gd[y][0])
    fd = f.as_dict
    carrier = tuple((y, b) for y in g.dom for b in f.dom if fd[b] == g1(y))
    g2 = fin_map(carrier, f.cod, lambda p: dict(gd[p[0]][1])[p[1]])
    g3 = fin_map(g.dom, f.dom, lambda y: gd[y][2])
    g4 = fin_map(g.dom, f.dom, lambda y: gd[y][3])
    return g1, g2, g3, g4


def lemma_join_quadruple(
    f: FinMap, g1: FinMap, g2: FinMap, g3: FinMap, g4: FinMap
) -> FinMap:
    """Inverse direction of the quadruple correspondence."""
    q = quadruple_object(f)
    g2d = g2.as_dict

    def rebuild(y):
        a = g1(y)
        m = tuple((b, g2d[(y, b)]) for b in f.fibre(a))
        return (a, m, g3(y), g4(y))

    return fin_map(g1.dom, q, rebuild)


# ---------------------------------------------------------------------------
# Pseudomonad data
# ---------------------------------------------------------------------------

def left_unitor(p: Polynomial) -> PolyMorphism:
    """The cartesian cell p => i₁·p (the canonical Σ_{x:1} A ≅ A backwards)."""
    i1 = identity_poly(p.I)
    ip = compose(i1, p)
    td = p.t.as_dict

    def on_a(a):
        j = td[a]
        return (j, ((j, a),))

    def on_b(b):
        a = p.f.as_dict[b]
        j = td[a]
        return (j, ((j, a),), j, b)

    return cell_from_square(p, ip, fin_map(p.A, ip.A, on_a), fin_map(p.B, ip.B, on_b))


def right_unitor(p: Polynomial) -> PolyMorphism:
    """The cartesian cell p => p·i₁ (the canonical Σ_{x:A} 1 ≅ A backwards)."""
    i1 = identity_poly(p.I)
    pi = compose(p, i1)
    sd = p.s.as_dict

    def on_a(a):
        sec = tuple((b, sd[b]) for b in p.fibre(a))
        return (a, sec)

    def on_b(b):
        a = p.f.as_dict[b]
        return (a, on_a(a)[1], b, sd[b])

    return cell_from_square(p, pi, fin_map(p.A, pi.A, on_a), fin_map(p.B, pi.B, on_b))


def associator(p: Polynomial, q: Polynomial, r: Polynomial) -> PolyMorphism:
    """The cartesian cell (r·q)·p => r·(q·p) re-bracketing the composite."""
    lhs = compose(compose(r, q), p)
    rhs = compose(r, compose(q, p))
    qp = compose(q, p)

    def on_m(el):
        # element of M_lhs: ((e, n), sec) with n a section of r's fibre in C_q
        # and sec keyed by the full direction quadruples of r·q
        (e, n), sec = el
        secd = dict(sec)
        nd = dict(n)
        outer = []
        for fdir in r.fibre(e):
            c = nd[fdir]
            inner = tuple(
                (d, secd[(e, n, fdir, d)])
                for d in q.fibre(c)
            )
            outer.append((fdir, (c, inner)))
        return (e, tuple(outer))

    # lhs N elements are ((e,n), sec, (e,n,fdir,d), b); rhs N elements are
    # (e, outer, fdir, n_qp) with n_qp = (c, inner, d, b) in N(q·p)
    def on_n(el):
        (c_l, m_l, d_l, b) = el
        e, outer = on_m((c_l, m_l))
        _, _, fdir, d = d_l
        outer_d = dict(outer)
        n_qp = (outer_d[fdir][0], outer_d[fdir][1], d, b)
        return (e, outer, fdir, n_qp)

    return cell_from_square(
        lhs, rhs, fin_map(lhs.A, rhs.A, on_m), fin_map(lhs.B, rhs.B, on_n)
    )


@dataclass
class PseudomonadReport:
    checks: dict[str, bool] = field(default_factory=dict)
    details: dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def check_pseudomonad_data(
    p: Polynomial, eta: PolyMorphism, mu: PolyMorphism
) -> PseudomonadReport:
    """Verify that (p, η, μ) generates a polynomial pseudomonad.

    Checks that η and μ are cartesian, constructs the three coherence
    composite pairs (conjugating by the associator and unitor cells so they
    become parallel), finds the unique adjustment between each pair by
    brute-force enumeration, and verifies the unit-law object bijections
    Σ_{x:A} 1 ≅ A ≅ Σ_{x:1} A elementwise.
    """
    report = PseudomonadReport()

    def record(name: str, ok: bool, detail: str = "") -> None:
        report.checks[name] = ok
        if detail:
            report.details[name] = detail

    record("eta-cartesian", eta.cartesian)
    record("mu-cartesian", mu.cartesian)
    if not (eta.cartesian and mu.cartesian):
        return report
    i1 = identity_poly(p.I)
    if eta.src != i1 or eta.dst != p:
        record("eta-shape", False, "η must be a cell i₁ => p")
        return report
    pp = compose(p, p)
    if mu.src != pp or mu.dst != p:
        record("mu-shape", False, "μ must be a cell p·p => p")
        return report

    # associativity pair over (p·p)·p
    try:
        assoc = associator(p, p, p)
        lhs = vertical_compose(mu, vertical_compose(whisker_left(p, mu), assoc))
        rhs = vertical_compose(mu, whisker_right(mu, p))
        record("assoc-cells-cartesian", lhs.cartesian and rhs.cartesian)
        adj = unique_adjustment(lhs, rhs)
        adj_back = unique_adjustment(rhs, lhs)
        record("assoc-adjustment", True)
        record(
            "assoc-adjustment-invertible",
            compose_map(adj_back.alpha, adj.alpha).mapping
            == identity_map(lhs.carrier).mapping,
        )
    except (ValueError, AssertionError) as exc:
        record("assoc-adjustment", False, f"associativity cell: {exc}")

    # unit pairs over p
    try:
        lam_lhs = vertical_compose(mu, vertical_compose(whisker_right(eta, p), left_unitor(p)))
        adj = unique_adjustment(lam_lhs, identity_cell(p))
        adj_back = unique_adjustment(identity_cell(p), lam_lhs)
        record("left-unit-adjustment", True)
        record(
            "left-unit-invertible",
            compose_map(adj_back.alpha, adj.alpha).mapping
            == identity_map(lam_lhs.carrier).mapping,
        )
    except (ValueError, AssertionError) as exc:
        record("left-unit-adjustment", False, f"left unit cell: {exc}")
    try:
        rho_lhs = vertical_compose(mu, vertical_compose(whisker_left(p, eta), right_unitor(p)))
        adj = unique_adjustment(rho_lhs, identity_cell(p))
        adj_back = unique_adjustment(identity_cell(p), rho_lhs)
        record("right-unit-adjustment", True)
        record(
            "right-unit-invertible",
            compose_map(adj_back.alpha, adj.alpha).mapping
            == identity_map(rho_lhs.carrier).mapping,
        )
    except (ValueError, AssertionError) as exc:
        record("right-unit-adjustment", False, f"right unit cell: {exc}")

    # unit-law object bijections, elementwise
    sigma_a_one = tuple((a, "*") for a in p.A)
    one_sigma_a = tuple(("*", a) for a in p.A)
    to_a1 = fin_map(sigma_a_one, p.A, lambda el: el[0])
    to_a2 = fin_map(one_sigma_a, p.A, lambda el: el[1])
    record(
        "unit-law-bijections",
        to_a1.is_bijection() and to_a2.is_bijection()
        and len(sigma_a_one) == len(p.A) == len(one_sigma_a),
    )
    return report


def trivial_pseudomonad() -> tuple[Polynomial, PolyMorphism, PolyMorphism]:
    """The identity-like instance: one position with a single direction."""
    a = ("a0",)
    b = ("b0",)
    p = poly_from_map(fin_map(b, a, {"b0": "a0"}))
    eta = cell_from_square(
        identity_poly(("*",)), p,
        fin_map(("*",), a, lambda _: "a0"),
        fin_map(("*",), b, lambda _: "b0"),
    )
    pp = compose(p, p)
    mu = cell_from_square(
        pp, p,
        fin_map(pp.A, a, lambda _: "a0"),
        fin_map(pp.B, b, lambda _: "b0"),
    )
    return p, eta, mu


def partiality_pseudomonad() -> tuple[Polynomial, PolyMorphism, PolyMorphism]:
    """(p, η, μ) for P(X) = 1 + X in finite sets.

    This is the classifier of a natural model with two closed types — an
    empty type z and a unit type u — restricted to finite sets: positions
    are the types, directions their terms, η picks the unit with its term,
    and μ is the dependent sum of a constant family (fibre sizes 0 and 1
    are closed under fibre-sums, so the data is total on a finite carrier).
    """
    a = ("z", "u")
    b = ("du",)
    p = poly_from_map(fin_map(b, a, {"du": "u"}))
    eta = cell_from_square(
        identity_poly(("*",)), p,
        fin_map(("*",), a, lambda _: "u"),
        fin_map(("*",), b, lambda _: "du"),
    )
    pp = compose(p, p)

    def mu0(el):
        c, sec = el
        if c == "z":
            return "z"
        (_, inner_a), = sec
        return inner_a

    mu = cell_from_square(
        pp, p, fin_map(pp.A, ("z", "u"), mu0), fin_map(pp.B, b, lambda _: "du")
    )
    return p, eta, mu


# ---------------------------------------------------------------------------
# Seeded random generators for the property suites
# ---------------------------------------------------------------------------

def random_fin_map(rng: random.Random, dom: tuple, cod: tuple) -> FinMap:
    if not cod and dom:
        raise ValueError("no maps into the empty set from a nonempty one")
    return fin_map(dom, cod, {x: rng.choice(cod) for x in dom})


def random_polynomial(rng: random.Random, max_size: int = 3, tag: str = "") -> Polynomial:
    i_set = tuple(f"i{tag}{k}" for k in range(rng.randint(1, max_size)))
    a_set = tuple(f"a{tag}{k}" for k in range(rng.randint(1, max_size)))
    b_set = tuple(f"b{tag}{k}" for k in range(rng.randint(0, max_size)))
    j_set = tuple(f"j{tag}{k}" for k in range(rng.randint(1, max_size)))
    return Polynomial(
        random_fin_map(rng, b_set, i_set),
        random_fin_map(rng, b_set, a_set),
        random_fin_map(rng, a_set, j_set),
    )


def random_family(rng: random.Random, index: tuple, max_size: int = 3, tag: str = "x") -> dict:
    return {
        i: tuple(f"{tag}{i}.{k}" for k in range(rng.randint(0, max_size)))
        for i in index
    }


def random_pullback_square(rng: random.Random, max_size: int = 3):
    """A random cospan completed to its chosen pullback square."""
    c_set = tuple(f"c{k}" for k in range(rng.randint(1, max_size)))
    a_set = tuple(f"a{k}" for k in range(rng.randint(1, max_size)))
    d_set = tuple(f"d{k}" for k in range(rng.randint(1, max_size)))
    u = random_fin_map(rng, a_set, c_set)
    g = random_fin_map(rng, d_set, c_set)
    apex, f, v = chosen_pullback(u, g)
    return v, f, u, g


def random_cartesian_pair(rng: random.Random, max_size: int = 3):
    """A random parallel pair of cartesian cells between 1 -> 1 polynomials."""
    a_set = tuple(f"a{k}" for k in range(rng.randint(1, max_size)))
    b_set = tuple(f"b{k}" for k in range(rng.randint(0, max_size)))
    f = random_fin_map(rng, b_set, a_set)
    src = poly_from_map(f)
    # build the codomain as a pullback of a random map along random phi0
    c_set = tuple(f"c{k}" for k in range(rng.randint(1, max_size)))
    d_set = tuple(f"d{k}" for k in range(rng.randint(0, max_size)))
    g = random_fin_map(rng, d_set, c_set)
    dst = poly_from_map(g)

    def random_cartesian(tag: str) -> Optional[PolyMorphism]:
        for _ in range(40):
            phi0 = random_fin_map(rng, f.cod, g.cod)
            # need fibrewise bijections B_a ≅ D_{phi0(a)}
            ok = all(len(f.fibre(a)) == len(g.fibre(phi0(a))) for a in f.cod)
            if not ok:
                continue
            mapping = {}
            for a in f.cod:
                dn = list(g.fibre(phi0(a)))
                rng.shuffle(dn)
                for b, d in zip(f.fibre(a), dn):
                    mapping[b] = d
            phi1 = fin_map(f.dom, g.dom, mapping)
            if is_pullback_square(phi1, f, g, phi0):
                return cell_from_square(src, dst, phi0, phi1)
        return None

    first = random_cartesian("u")
    second = random_cartesian("v")
    if first is None or second is None:
        return None
    return first, second
