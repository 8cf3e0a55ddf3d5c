"""Presheaves over finite category presentations and the pullback oracle.

A presheaf assigns a finite set of element keys to every object and a
contravariant action to every morphism.  The central operation is
:func:`check_pullback_square`, which decides by enumeration whether a
commuting square of natural transformations is a pullback; everything else
in the package that claims "is a pullback" ultimately calls it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .fincat import FinCatPresentation, FinFunctor


@dataclass
class Presheaf:
    """Contravariant finite-set-valued functor on a FinCatPresentation."""

    base: FinCatPresentation
    values: dict[str, list[str]]
    action: dict[str, dict[str, str]]  # morphism -> (element of P(cod) -> element of P(dom))

    def at(self, obj: str) -> list[str]:
        return self.values.get(obj, [])

    def restrict(self, m: str, x: str) -> str:
        """x[m], the action of morphism m on element x of P(cod m)."""
        return self.action[m][x]

    def check(self) -> list[str]:
        """Functoriality violations, by enumeration; empty list means ok."""
        report = []
        for obj in self.base.object_keys:
            i = self.base.identity(obj)
            for x in self.at(obj):
                if self.restrict(i, x) != x:
                    report.append(f"identity action fails at {obj!r} on {x!r}")
        for m in self.base.all_morphisms():
            src, dst = self.base.dom(m), self.base.cod(m)
            amap = self.action.get(m)
            if amap is None:
                report.append(f"no action for morphism {m!r}")
                continue
            for x in self.at(dst):
                if amap.get(x) not in self.at(src):
                    report.append(f"action of {m!r} does not send {x!r} into P({src})")
        for f in self.base.all_morphisms():
            for g in self.base.all_morphisms():
                if self.base.cod(g) != self.base.dom(f):
                    continue
                fg = self.base.compose(f, g)
                for x in self.at(self.base.cod(f)):
                    if self.restrict(g, self.restrict(f, x)) != self.restrict(fg, x):
                        report.append(f"x[f][g] != x[f∘g] for f={f}, g={g}, x={x}")
        return report


@dataclass
class NatTrans:
    """A pointwise map between presheaves over the same base."""

    dom: Presheaf
    cod: Presheaf
    components: dict[str, dict[str, str]]  # object -> (element -> element)

    def apply(self, obj: str, x: str) -> str:
        return self.components[obj][x]

    def check(self) -> list[str]:
        report = []
        for obj in self.dom.base.object_keys:
            comp = self.components.get(obj)
            if comp is None:
                report.append(f"no component at {obj!r}")
                continue
            for x in self.dom.at(obj):
                if comp.get(x) not in self.cod.at(obj):
                    report.append(f"component at {obj!r} does not send {x!r} into codomain")
        for m in self.dom.base.all_morphisms():
            src, dst = self.dom.base.dom(m), self.dom.base.cod(m)
            for x in self.dom.at(dst):
                lhs = self.cod.restrict(m, self.apply(dst, x))
                rhs = self.apply(src, self.dom.restrict(m, x))
                if lhs != rhs:
                    report.append(f"naturality fails for {m!r} on {x!r}")
        return report


def identity_nat(p: Presheaf) -> NatTrans:
    return NatTrans(p, p, {obj: {x: x for x in p.at(obj)} for obj in p.base.object_keys})


def compose_nat(g: NatTrans, f: NatTrans) -> NatTrans:
    comps = {
        obj: {x: g.apply(obj, f.apply(obj, x)) for x in f.dom.at(obj)}
        for obj in f.dom.base.object_keys
    }
    return NatTrans(f.dom, g.cod, comps)


def yoneda(base: FinCatPresentation, c: str) -> Presheaf:
    """The representable presheaf hom(-, c) with precomposition action."""
    values = {d: base.hom(d, c) for d in base.object_keys}
    action: dict[str, dict[str, str]] = {}
    for m in base.all_morphisms():
        dst = base.cod(m)
        action[m] = {h: base.compose(h, m) for h in values.get(dst, [])}
    return Presheaf(base, values, action)


def yoneda_map(base: FinCatPresentation, g: str, src_ps: Presheaf, dst_ps: Presheaf) -> NatTrans:
    """y(g) : y(dom g) -> y(cod g), postcomposition by g."""
    comps = {d: {h: base.compose(g, h) for h in src_ps.at(d)} for d in base.object_keys}
    return NatTrans(src_ps, dst_ps, comps)


def element_nat(base: FinCatPresentation, ps: Presheaf, obj: str, x: str, yon: Presheaf) -> NatTrans:
    """The natural transformation y(obj) -> ps classifying x in ps(obj)."""
    comps = {d: {h: ps.restrict(h, x) for h in yon.at(d)} for d in base.object_keys}
    return NatTrans(yon, ps, comps)


def elements_cat(p: Presheaf) -> tuple[FinCatPresentation, FinFunctor]:
    """The category of elements of p, with its projection functor."""
    base = p.base
    objs = []
    for c in base.object_keys:
        for x in p.at(c):
            objs.append(f"el({c}|{x})")
    homs: dict[tuple[str, str], list[str]] = {}
    identities: dict[str, str] = {}
    obj_map: dict[str, str] = {}
    mor_map: dict[str, str] = {}

    def el_mor(m: str, src_el: str, dst_el: str) -> str:
        return f"{src_el}=>{dst_el}:{m}"

    for c in base.object_keys:
        for x in p.at(c):
            src_el = f"el({c}|{x})"
            obj_map[src_el] = c
            for d in base.object_keys:
                for y in p.at(d):
                    dst_el = f"el({d}|{y})"
                    ms = []
                    for m in base.hom(c, d):
                        if p.restrict(m, y) == x:
                            k = el_mor(m, src_el, dst_el)
                            ms.append(k)
                            mor_map[k] = m
                    if ms:
                        homs[(src_el, dst_el)] = ms
    for c in base.object_keys:
        for x in p.at(c):
            el = f"el({c}|{x})"
            identities[el] = el_mor(base.identity(c), el, el)

    def rule(g: str, f: str) -> str:
        gm = g.rsplit(":", 1)[1]
        fm = f.rsplit(":", 1)[1]
        src_el = f.split("=>", 1)[0]
        dst_el = g.split("=>", 1)[1].rsplit(":", 1)[0]
        return el_mor(base.compose(gm, fm), src_el, dst_el)

    cat = FinCatPresentation(
        object_keys=objs, homs=homs, compose_table={}, identities=identities,
        terminal_key=None, compose_rule=rule,
    )
    proj = FinFunctor(cat, base, obj_map, mor_map)
    return cat, proj


def check_pullback_square(f: NatTrans, x: NatTrans, top: NatTrans, left: NatTrans) -> bool:
    """Decide whether the square below is a pullback, pointwise.

    ::

        P --top--> Y
        |          |
      left         f
        v          v
        X ---x---> U

    At every base object D, the canonical map
    P(D) -> {(u,v) in X(D) x Y(D) : x(u) = f(v)} must be a bijection.
    """
    if left.dom is not top.dom or x.dom is not left.cod or f.dom is not top.cod:
        raise ValueError("pullback square shape mismatch")
    if x.cod is not f.cod:
        raise ValueError("pullback square shape mismatch: different codomains")
    base = x.dom.base
    p = top.dom
    for d in base.object_keys:
        for z in p.at(d):
            if x.apply(d, left.apply(d, z)) != f.apply(d, top.apply(d, z)):
                return False
        want = {}
        for u in x.dom.at(d):
            xu = x.apply(d, u)
            for v in f.dom.at(d):
                if xu == f.apply(d, v):
                    want[(u, v)] = 0
        got = {}
        for z in p.at(d):
            pair = (left.apply(d, z), top.apply(d, z))
            got[pair] = got.get(pair, 0) + 1
        if set(got) != set(want) or any(n != 1 for n in got.values()):
            return False
    return True


def check_pullback_square_by_cones(
    f: NatTrans, x: NatTrans, top: NatTrans, left: NatTrans
) -> bool:
    """Independent pullback verifier chasing the universal property.

    Enumerates every cone whose apex is a representable presheaf y(D) —
    i.e. every pair of natural transformations a : y(D) -> X, b : y(D) -> Y
    with x∘a = f∘b, built from elements via Yoneda — and demands exactly
    one mediating natural transformation into the candidate apex.  This
    re-derives the answer of :func:`check_pullback_square` from the
    definition rather than from the fibrewise-bijection shortcut.
    """
    base = x.dom.base
    p = top.dom
    yons = {d: yoneda(base, d) for d in base.object_keys}
    for d in base.object_keys:
        yd = yons[d]
        for u in x.dom.at(d):
            a = element_nat(base, x.dom, d, u, yd)
            for v in f.dom.at(d):
                b = element_nat(base, f.dom, d, v, yd)
                lhs = compose_nat(x, a)
                rhs = compose_nat(f, b)
                if any(
                    lhs.apply(e, h) != rhs.apply(e, h)
                    for e in base.object_keys for h in yd.at(e)
                ):
                    continue
                mediating = 0
                for z in p.at(d):
                    med = element_nat(base, p, d, z, yd)
                    la = compose_nat(left, med)
                    tb = compose_nat(top, med)
                    if all(
                        la.apply(e, h) == a.apply(e, h) and tb.apply(e, h) == b.apply(e, h)
                        for e in base.object_keys for h in yd.at(e)
                    ):
                        mediating += 1
                if mediating != 1:
                    return False
    # commutativity of the candidate square itself
    for d in base.object_keys:
        for z in p.at(d):
            if x.apply(d, left.apply(d, z)) != f.apply(d, top.apply(d, z)):
                return False
    return True


@dataclass
class RepresentabilityWitness:
    obj: str
    element: str
    witness_obj: Optional[str] = None
    witness_mor: Optional[str] = None
    witness_elem: Optional[str] = None

    @property
    def found(self) -> bool:
        return self.witness_obj is not None


@dataclass
class RepresentabilityReport:
    bound_note: str
    entries: list[RepresentabilityWitness] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(e.found for e in self.entries)

    def failures(self) -> list[RepresentabilityWitness]:
        return [e for e in self.entries if not e.found]


def is_representable(p: NatTrans, witness_search_bound: Optional[int] = None) -> RepresentabilityReport:
    """Search representability data for every fibre of p, in deterministic order.

    For each object Γ and each A in cod(p)(Γ), candidate witnesses
    (B, g : B -> Γ, y in dom(p)(B)) are tried in enumeration order — objects
    by position, then morphisms, then elements — and the first one whose
    square passes :func:`check_pullback_square` is recorded.  The report
    carries the truncation caveat: conclusions hold for the materialized
    base only.
    """
    base = p.dom.base
    candidates = base.object_keys
    if witness_search_bound is not None:
        candidates = candidates[:witness_search_bound]
    yons = {d: yoneda(base, d) for d in base.object_keys}
    report = RepresentabilityReport(
        bound_note=f"verified up to the materialized base of {len(base.object_keys)} objects",
    )
    for gamma in base.object_keys:
        for a in p.cod.at(gamma):
            entry = RepresentabilityWitness(gamma, a)
            x_nt = element_nat(base, p.cod, gamma, a, yons[gamma])
            for b_obj in candidates:
                if entry.found:
                    break
                for g in base.hom(b_obj, gamma):
                    if entry.found:
                        break
                    left = yoneda_map(base, g, yons[b_obj], yons[gamma])
                    for y in p.dom.at(b_obj):
                        top = element_nat(base, p.dom, b_obj, y, yons[b_obj])
                        if check_pullback_square(p, x_nt, top, left):
                            entry.witness_obj = b_obj
                            entry.witness_mor = g
                            entry.witness_elem = y
                            break
            report.entries.append(entry)
    return report


def sum_presheaves(ps: list[Presheaf]) -> tuple[Presheaf, list[NatTrans]]:
    """Pointwise disjoint union, with the coproduct injections."""
    if not ps:
        raise ValueError("need at least one presheaf")
    base = ps[0].base
    tag = lambda i, x: f"i{i}:{x}"
    values = {
        obj: [tag(i, x) for i, p in enumerate(ps) for x in p.at(obj)]
        for obj in base.object_keys
    }
    action: dict[str, dict[str, str]] = {}
    for m in base.all_morphisms():
        amap = {}
        for i, p in enumerate(ps):
            for x in p.at(base.cod(m)):
                amap[tag(i, x)] = tag(i, p.restrict(m, x))
        action[m] = amap
    total = Presheaf(base, values, action)
    injections = [
        NatTrans(p, total, {obj: {x: tag(i, x) for x in p.at(obj)} for obj in base.object_keys})
        for i, p in enumerate(ps)
    ]
    return total, injections


def sum_nat_trans(fs: list[NatTrans]) -> NatTrans:
    """The coproduct of parallel families of natural transformations."""
    dom, dom_inj = sum_presheaves([f.dom for f in fs])
    cod, cod_inj = sum_presheaves([f.cod for f in fs])
    base = dom.base
    comps: dict[str, dict[str, str]] = {}
    for obj in base.object_keys:
        cmap = {}
        for i, f in enumerate(fs):
            for x in f.dom.at(obj):
                cmap[f"i{i}:{x}"] = f"i{i}:{f.apply(obj, x)}"
        comps[obj] = cmap
    return NatTrans(dom, cod, comps)


def pullback_presheaves(f: NatTrans, g: NatTrans) -> tuple[Presheaf, NatTrans, NatTrans]:
    """Pointwise fibre product of f : X -> Z and g : Y -> Z, with projections."""
    if f.cod is not g.cod:
        raise ValueError("pullback requires a common codomain")
    base = f.dom.base
    pair = lambda x, y: f"({x}|{y})"
    values: dict[str, list[str]] = {}
    pairs: dict[str, list[tuple[str, str]]] = {}
    for obj in base.object_keys:
        ps = [
            (x, y)
            for x in f.dom.at(obj)
            for y in g.dom.at(obj)
            if f.apply(obj, x) == g.apply(obj, y)
        ]
        pairs[obj] = ps
        values[obj] = [pair(x, y) for x, y in ps]
    action: dict[str, dict[str, str]] = {}
    for m in base.all_morphisms():
        src, dst = base.dom(m), base.cod(m)
        action[m] = {
            pair(x, y): pair(f.dom.restrict(m, x), g.dom.restrict(m, y))
            for x, y in pairs[dst]
        }
    apex = Presheaf(base, values, action)
    proj1 = NatTrans(apex, f.dom, {o: {pair(x, y): x for x, y in pairs[o]} for o in base.object_keys})
    proj2 = NatTrans(apex, g.dom, {o: {pair(x, y): y for x, y in pairs[o]} for o in base.object_keys})
    return apex, proj1, proj2


def compose_representables(p: NatTrans, q: NatTrans) -> NatTrans:
    """Ordinary composite p ∘ q of natural transformations (for closure tests)."""
    return compose_nat(p, q)
