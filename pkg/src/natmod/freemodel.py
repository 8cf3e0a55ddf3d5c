"""The free natural-model constructions and their universal-property verifiers.

Five constructions are provided: the term model on a family of basic types,
and the free extensions of an arbitrary model by a term, a basic type, a
unit type, and dependent sum types, together with the polynomial composite
of two models over a shared base.  Each construction is paired with the
morphisms appearing in its universal property (inclusion, substitution /
insertion / summation, and the mediating extension of an arbitrary
morphism); existence is verified by the checkers in :mod:`natmod.natmodel`
and uniqueness by bounded enumeration via :mod:`natmod.morphism`.

Quotient identifications in the underlying categories of contexts are
implemented as key normalization at construction time: every context is
registered under the key of its normal form, so equality of contexts is
equality of keys.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Callable, Optional

from .fincat import BoundedCategory, FinSliceOpposite
from .natmodel import (
    ExtensionData,
    NaturalModel,
    SigmaStructure,
    UnitStructure,
    canonical_pullback,
    induced_sub,
    section,
    swap_iso,
)
from .morphism import MorphismPins, NMorphism, compose_morphisms


# ---------------------------------------------------------------------------
# Shared plumbing for models built over another model
# ---------------------------------------------------------------------------

def _fresh_key(base_keys: list[str], stem: str) -> str:
    """A key for a new symbol that avoids clashing with existing ones."""
    key = stem
    used = set(base_keys)
    while key in used:
        key += "'"
    return key


class _WrappedCategory(BoundedCategory):
    """Base class for categories of formally extended contexts.

    Objects are registered normal forms; morphisms wrap morphisms of the
    inner category (possibly with extra payload) and are kept in a registry
    so endpoints never have to be parsed back out of keys.
    """

    def __init__(self, prefix: str):
        self._prefix = prefix
        self._obj_info: dict[str, tuple] = {}
        self._mor_info: dict[str, tuple] = {}
        self._obj_size: dict[str, int] = {}
        self._compose_cache: dict[tuple[str, str], str] = {}
        self.model: Optional[NaturalModel] = None  # set by the owning model

    # object bookkeeping
    def _register_obj(self, key: str, info: tuple, size: int) -> str:
        if key not in self._obj_info:
            self._obj_info[key] = info
            self._obj_size[key] = size
        return key

    def obj_info(self, key: str) -> tuple:
        return self._obj_info[key]

    def obj_size(self, key: str) -> int:
        return self._obj_size[key]

    # morphism bookkeeping
    def _wrap(self, src: str, dst: str, payload: tuple) -> str:
        key = f"{src}=>{dst}${payload!r}"
        if key not in self._mor_info:
            self._mor_info[key] = (src, dst, payload)
        return key

    def mor_payload(self, m: str) -> tuple:
        return self._mor_info[m][2]

    def dom(self, m: str) -> str:
        return self._mor_info[m][0]

    def cod(self, m: str) -> str:
        return self._mor_info[m][1]

    def objects(self, bound: int) -> list[str]:
        assert self.model is not None
        seeds = [s for s in self._seeds(bound) if self.obj_size(s) <= bound]
        seen = dict.fromkeys(seeds)
        frontier = list(seeds)
        while frontier:
            nxt = []
            for ctx in frontier:
                budget = bound - self.obj_size(ctx)
                if budget <= 0:
                    continue
                for ty in self.model.types(ctx, budget):
                    e = self.model.ext(ctx, ty)
                    if self.obj_size(e.extended) <= bound and e.extended not in seen:
                        seen[e.extended] = None
                        nxt.append(e.extended)
            frontier = nxt
        return sorted(seen, key=lambda c: (self.obj_size(c), c))

    def _seeds(self, bound: int) -> list[str]:
        raise NotImplementedError


# ---------------------------------------------------------------------------
# The term model on a family of basic types
# ---------------------------------------------------------------------------

class TermModel(NaturalModel):
    """The free natural model on an I-indexed family of basic types.

    The base category is the opposite of finite sets over I; the type
    presheaf is constant with value I, the term presheaf is the domain
    functor, and extension by the basic type j appends a fresh element
    labelled j.
    """

    def __init__(self, index):
        self.index = tuple(sorted(set(index)))
        self.base = FinSliceOpposite(self.index)

    def ty_key(self, i: int) -> str:
        return f"T{i}"

    def tm_key(self, k: int) -> str:
        return f"x{k}"

    def types(self, ctx: str, bound: int) -> list[str]:
        return [self.ty_key(i) for i in self.index]

    def terms(self, ctx: str, bound: int) -> list[str]:
        return [self.tm_key(k) for k in range(len(self.base.obj_labels(ctx)))]

    def typeof(self, ctx: str, term: str) -> str:
        labels = self.base.obj_labels(ctx)
        return self.ty_key(labels[int(term[1:])])

    def subst_ty(self, sigma: str, ty: str) -> str:
        return ty

    def subst_tm(self, sigma: str, term: str) -> str:
        fn = self.base.mor_fn(sigma)
        return self.tm_key(fn[int(term[1:])])

    def ext(self, ctx: str, ty: str) -> ExtensionData:
        labels = self.base.obj_labels(ctx)
        j = int(ty[1:])
        n = len(labels)
        extended = self.base.obj_key(labels + (j,))
        proj = self.base.mor_key(extended, ctx, tuple(range(n)))
        return ExtensionData(extended, proj, self.tm_key(n))

    def indsub(self, sigma: str, term: str, ty: str) -> Optional[str]:
        gamma = self.base.cod(sigma)
        e = self.ext(gamma, ty)
        fn = self.base.mor_fn(sigma)
        return self.base.mor_key(
            self.base.dom(sigma), e.extended, fn + (int(term[1:]),)
        )

    def ext_parent(self, ctx: str) -> Optional[tuple[str, str]]:
        labels = self.base.obj_labels(ctx)
        if not labels:
            return None
        return self.base.obj_key(labels[:-1]), self.ty_key(labels[-1])


def term_model(index, bound: int = 3) -> TermModel:
    """The free natural model on an index-set of basic types.

    ``bound`` is recorded as the suggested verification bound; the model
    itself is lazily generated and not truncated.
    """
    m = TermModel(index)
    m.suggested_bound = bound
    return m


# ---------------------------------------------------------------------------
# Strict morphisms presented by root data
# ---------------------------------------------------------------------------

class _DerivedMorphism:
    """A strict morphism determined by root-context data.

    Images of extension contexts are obtained by folding the codomain's
    ``ext`` over the type images, so strict preservation of the chosen
    representability data holds by construction; images of morphisms whose
    codomain is an extension are forced by the universal property of the
    induced substitutions and are derived by decomposition.
    """

    def __init__(
        self,
        src: NaturalModel,
        dst: NaturalModel,
        root_obj: Callable[[str], str],
        root_mor: Callable[["_DerivedMorphism", str], str],
        ty_map: Callable[["_DerivedMorphism", str, str], str],
        tm_map: Callable[["_DerivedMorphism", str, str], str],
    ):
        self.src = src
        self.dst = dst
        self._root_obj = root_obj
        self._root_mor = root_mor
        self._ty_map = ty_map
        self._tm_map = tm_map
        self._obj: dict[str, str] = {}

    def on_obj(self, ctx: str) -> str:
        out = self._obj.get(ctx)
        if out is not None:
            return out
        parent = self.src.ext_parent(ctx)
        if parent is None:
            out = self._root_obj(ctx)
        else:
            pctx, pty = parent
            out = self.dst.ext(self.on_obj(pctx), self.on_ty(pctx, pty)).extended
        self._obj[ctx] = out
        return out

    def on_ty(self, ctx: str, ty: str) -> str:
        return self._ty_map(self, ctx, ty)

    def on_tm(self, ctx: str, tm: str) -> str:
        return self._tm_map(self, ctx, tm)

    def on_mor(self, m: str) -> str:
        src = self.src
        a, b = src.base.dom(m), src.base.cod(m)
        if a == b and m == src.base.identity(a):
            return self.dst.base.identity(self.on_obj(a))
        parent = src.ext_parent(b)
        if parent is None:
            return self._root_mor(self, m)
        pctx, pty = parent
        e = src.ext(pctx, pty)
        base_part = src.base.compose(e.proj, m)
        term_part = src.subst_tm(m, e.var)
        return induced_sub(
            self.dst, self.on_mor(base_part), self.on_tm(a, term_part),
            self.on_ty(pctx, pty),
        )


def _as_nmorphism(d: _DerivedMorphism, name: str) -> NMorphism:
    return NMorphism(d.src, d.dst, d.on_obj, d.on_mor, d.on_ty, d.on_tm, name)


def initial_morphism(tm: TermModel, target: NaturalModel, images: dict) -> NMorphism:
    """The unique strict morphism out of a term model with prescribed images.

    ``images`` maps each index element to a closed type of the target.  The
    image of a context is the iterated extension of the empty context by the
    weakened images of its labels; variables go to the matching slot
    variables and substitutions to tuples of slot projections.
    """
    o_tys = {i: images[i] for i in tm.index}
    slot_vars: dict[str, list[str]] = {}

    def root_obj(ctx: str) -> str:
        assert ctx == tm.terminal
        slot_vars[ctx] = []
        return target.terminal

    def ty_map(d: _DerivedMorphism, ctx: str, ty: str) -> str:
        i = int(ty[1:])
        fctx = d.on_obj(ctx)
        return target.subst_ty(target.t(fctx), o_tys[i])

    def tm_map(d: _DerivedMorphism, ctx: str, tm_key: str) -> str:
        _slot_vars_for(d, ctx)
        return slot_vars[ctx][int(tm_key[1:])]

    def _slot_vars_for(d: _DerivedMorphism, ctx: str) -> None:
        if ctx in slot_vars:
            return
        parent = tm.ext_parent(ctx)
        assert parent is not None
        pctx, pty = parent
        _slot_vars_for(d, pctx)
        d.on_obj(ctx)
        e = target.ext(d.on_obj(pctx), d.on_ty(pctx, pty))
        weakened = [target.subst_tm(e.proj, v) for v in slot_vars[pctx]]
        slot_vars[ctx] = weakened + [e.var]

    def root_mor(d: _DerivedMorphism, m: str) -> str:
        # the only root is the terminal context
        return target.t(d.on_obj(tm.base.dom(m)))

    d = _DerivedMorphism(tm, target, root_obj, root_mor, ty_map, tm_map)
    return _as_nmorphism(d, "initial")


def initiality_pins(tm: TermModel, target: NaturalModel, images: dict) -> MorphismPins:
    pins = MorphismPins()
    pins.on_obj[tm.terminal] = target.terminal
    for i in tm.index:
        pins.on_ty[(tm.terminal, tm.ty_key(i))] = images[i]
    return pins


# ---------------------------------------------------------------------------
# Extension by a term of a basic type
# ---------------------------------------------------------------------------

class _ExtTermCategory(_WrappedCategory):
    """Contexts of the inner model formally extended by a term variable."""

    def __init__(self, inner: NaturalModel, o_ty: str):
        super().__init__("xt")
        self.inner = inner
        self.o_ty = o_ty
        self._under: dict[str, str] = {}
        self._align: dict[str, str] = {}  # extension key -> iso fixing the underlying context

    def obj_key_for(self, gamma: str, tys: tuple[str, ...]) -> str:
        return f"xt({gamma}|{';'.join(tys)})"

    def register(self, gamma: str, tys: tuple[str, ...], under: str) -> str:
        key = self.obj_key_for(gamma, tys)
        size = self.inner.base.obj_size(under)
        return self._register_obj(key, (gamma, tys), size)

    def under(self, key: str) -> str:
        return self._under[key]

    def anchor(self, key: str) -> str:
        """The structure map under(key) -> ⋄•O over which hom sets live."""
        return self._anchor[key]

    # populated by the owning model
    _anchor: dict[str, str]

    @property
    def terminal(self) -> Optional[str]:
        return self.model.i_obj(self.inner.terminal)  # type: ignore[attr-defined]

    def hom(self, a: str, b: str) -> list[str]:
        ua, ub = self._under[a], self._under[b]
        out = []
        for s in self.inner.base.hom(ua, ub):
            if self.inner.base.compose(self._anchor[b], s) == self._anchor[a]:
                out.append(self._wrap(a, b, (s,)))
        return out

    def identity(self, a: str) -> str:
        return self._wrap(a, a, (self.inner.base.identity(self._under[a]),))

    def compose(self, g: str, f: str) -> str:
        out = self._compose_cache.get((g, f))
        if out is not None:
            return out
        if self.dom(g) != self.cod(f):
            raise ValueError("not composable")
        (gs,) = self.mor_payload(g)
        (fs,) = self.mor_payload(f)
        out = self._wrap(self.dom(f), self.cod(g), (self.inner.base.compose(gs, fs),))
        self._compose_cache[(g, f)] = out
        return out

    def _seeds(self, bound: int) -> list[str]:
        return [
            self.model.i_obj(g)  # type: ignore[attr-defined]
            for g in self.inner.base.objects(max(bound - 1, 0))
        ]


class ExtTermModel(NaturalModel):
    """The free natural model on ``inner`` extended by a term x of type O.

    Contexts are pairs of an inner context and a list of formal extensions
    depending on the new variable; lists whose head does not depend on it
    are absorbed into the inner context (the normal form), with the swap
    isomorphism recorded so that types and terms can be transported.
    """

    def __init__(self, inner: NaturalModel, o_ty: str):
        self.inner = inner
        self.o_ty = o_ty
        cat = _ExtTermCategory(inner, o_ty)
        cat.model = self
        cat._anchor = {}
        self.base = cat
        self._o_exts: dict[str, ExtensionData] = {}
        # the anchor object ⋄•O and its extension data
        self._diamond_ext = inner.ext(inner.terminal, o_ty)
        self.x_term = self._diamond_ext.var
        self.i_obj(inner.terminal)

    # -- context construction -------------------------------------------
    def _o_ext(self, gamma: str) -> ExtensionData:
        """Extension of an inner context by the weakened new-variable type."""
        e = self._o_exts.get(gamma)
        if e is None:
            o_at = self.inner.subst_ty(self.inner.t(gamma), self.o_ty)
            e = self.inner.ext(gamma, o_at)
            self._o_exts[gamma] = e
        return e

    def i_obj(self, gamma: str) -> str:
        """The image (Γ;) of an inner context under the inclusion."""
        cat = self.base
        key = cat.obj_key_for(gamma, ())
        if key in cat._obj_info:
            return key
        e = self._o_ext(gamma)
        cat.register(gamma, (), e.extended)
        cat._under[key] = e.extended
        cat._anchor[key] = canonical_pullback(self.inner, self.inner.t(gamma), self.o_ty)
        return key

    def types(self, ctx: str, bound: int) -> list[str]:
        return self.inner.types(self.base.under(ctx), bound)

    def terms(self, ctx: str, bound: int) -> list[str]:
        return self.inner.terms(self.base.under(ctx), bound)

    def typeof(self, ctx: str, term: str) -> str:
        return self.inner.typeof(self.base.under(ctx), term)

    def ty_size(self, ctx: str, ty: str) -> int:
        return self.inner.ty_size(self.base.under(ctx), ty)

    def tm_size(self, ctx: str, term: str) -> int:
        return self.inner.tm_size(self.base.under(ctx), term)

    def subst_ty(self, sigma: str, ty: str) -> str:
        (s,) = self.base.mor_payload(sigma)
        return self.inner.subst_ty(s, ty)

    def subst_tm(self, sigma: str, term: str) -> str:
        (s,) = self.base.mor_payload(sigma)
        return self.inner.subst_tm(s, term)

    def ext(self, ctx: str, ty: str) -> ExtensionData:
        cat = self.base
        gamma, tys = cat.obj_info(ctx)
        under = cat.under(ctx)
        inner = self.inner
        e_in = inner.ext(under, ty)
        if not tys:
            # normal-form collapse: a type not depending on the new variable
            # is absorbed into the inner context
            o_ext = self._o_ext(gamma)
            preimages = [
                a for a in inner.types(gamma, self.ty_size(ctx, ty))
                if inner.subst_ty(o_ext.proj, a) == ty
            ]
            if preimages:
                a_prime = preimages[0]
                inner_ext = inner.ext(gamma, a_prime)
                new_key = self.i_obj(inner_ext.extended)
                o_at_g = inner.subst_ty(inner.t(gamma), self.o_ty)
                sw_inv = swap_iso(inner, gamma, a_prime, o_at_g)
                proj = cat._wrap(new_key, ctx, (inner.base.compose(e_in.proj, sw_inv),))
                var = inner.subst_tm(sw_inv, e_in.var)
                cat._align[new_key] = sw_inv
                return ExtensionData(new_key, proj, var)
        new_tys = tys + (ty,)
        new_key = cat.obj_key_for(gamma, new_tys)
        if new_key not in cat._obj_info:
            cat.register(gamma, new_tys, e_in.extended)
            cat._under[new_key] = e_in.extended
            cat._anchor[new_key] = inner.base.compose(cat._anchor[ctx], e_in.proj)
            cat._align[new_key] = inner.base.identity(e_in.extended)
        proj = cat._wrap(new_key, ctx, (e_in.proj,))
        return ExtensionData(new_key, proj, e_in.var)

    def align_iso(self, ctx: str) -> str:
        """under(ctx) -> under(parent)•A, identity unless normalization fired."""
        return self.base._align[ctx]

    def indsub(self, sigma: str, term: str, ty: str) -> Optional[str]:
        gamma_ctx = self.base.cod(sigma)
        (s,) = self.base.mor_payload(sigma)
        e = self.ext(gamma_ctx, ty)
        tau = induced_sub(self.inner, s, term, ty)
        align = self.base._align.get(e.extended)
        if align is not None:
            inv = self.inner.base.is_iso(align)
            if inv is None:
                raise ValueError("alignment isomorphism is not invertible")
            tau = self.inner.base.compose(inv, tau)
        return self.base._wrap(self.base.dom(sigma), e.extended, (tau,))

    def ext_parent(self, ctx: str) -> Optional[tuple[str, str]]:
        gamma, tys = self.base.obj_info(ctx)
        if tys:
            parent = self.base.obj_key_for(gamma, tys[:-1])
            if parent in self.base._obj_info:
                if self.ext(parent, tys[-1]).extended == ctx:
                    return parent, tys[-1]
            return None
        inner_parent = self.inner.ext_parent(gamma)
        if inner_parent is None:
            return None
        pctx, pty = inner_parent
        parent = self.i_obj(pctx)
        cand = self.inner.subst_ty(self._o_ext(pctx).proj, pty)
        if self.ext(parent, cand).extended == ctx:
            return parent, cand
        return None


def extend_by_term(inner: NaturalModel, o_ty: str) -> ExtTermModel:
    """Freely extend a model by a term x of the closed type ``o_ty``.

    The distinguished term is ``model.x_term``, a term of the weakened type
    over the new terminal context.
    """
    return ExtTermModel(inner, o_ty)


def term_inclusion(ext: ExtTermModel) -> NMorphism:
    """The strict inclusion of the inner model into its term extension."""
    inner = ext.inner

    def root_obj(ctx: str) -> str:
        return ext.i_obj(ctx)

    def ty_map(d, ctx: str, ty: str) -> str:
        return inner.subst_ty(ext._o_ext(ctx).proj, ty)

    def tm_map(d, ctx: str, tm: str) -> str:
        return inner.subst_tm(ext._o_ext(ctx).proj, tm)

    def root_mor(d, m: str) -> str:
        o_at = inner.subst_ty(inner.t(inner.base.cod(m)), ext.o_ty)
        return ext.base._wrap(
            d.on_obj(inner.base.dom(m)), d.on_obj(inner.base.cod(m)),
            (canonical_pullback(inner, m, o_at),),
        )

    d = _DerivedMorphism(inner, ext, root_obj, root_mor, ty_map, tm_map)
    return _as_nmorphism(d, "I")


def substitution_morphism(ext: ExtTermModel, o_term: str) -> NMorphism:
    """S_o : substitute the closed term o for the formal variable x.

    Satisfies S_o(x) = o and S_o ∘ I = id.  The comparison morphisms
    w : S_o(ctx) -> under(ctx) are the iterated canonical pullbacks of the
    section of o, composed with the recorded alignment isomorphisms where
    normal-form collapse changed the underlying context.
    """
    inner = ext.inner
    chains: dict[str, str] = {}

    def w_chain(d, ctx: str) -> str:
        w = chains.get(ctx)
        if w is not None:
            return w
        parent = ext.ext_parent(ctx)
        if parent is None:
            gamma, tys = ext.base.obj_info(ctx)
            assert not tys
            o_at = inner.subst_ty(inner.t(gamma), ext.o_ty)
            o_wk = inner.subst_tm(inner.t(gamma), o_term)
            w = induced_sub(inner, inner.base.identity(gamma), o_wk, o_at)
        else:
            pctx, pty = parent
            d.on_obj(ctx)
            w = canonical_pullback(inner, w_chain(d, pctx), pty)
            align = ext.base._align.get(ctx)
            if align is not None and align != inner.base.identity(inner.base.dom(align)):
                inv = inner.base.is_iso(align)
                assert inv is not None
                w = inner.base.compose(inv, w)
        chains[ctx] = w
        return w

    def root_obj(ctx: str) -> str:
        gamma, tys = ext.base.obj_info(ctx)
        assert not tys
        return gamma

    def ty_map(d, ctx: str, ty: str) -> str:
        d.on_obj(ctx)
        return inner.subst_ty(w_chain(d, ctx), ty)

    def tm_map(d, ctx: str, tm: str) -> str:
        d.on_obj(ctx)
        return inner.subst_tm(w_chain(d, ctx), tm)

    def root_mor(d, m: str) -> str:
        # codomain is a root (Γ₀;): compose with the retraction of the section
        a, b = ext.base.dom(m), ext.base.cod(m)
        gamma_b, _ = ext.base.obj_info(b)
        (s,) = ext.base.mor_payload(m)
        retract = ext._o_ext(gamma_b).proj
        return inner.base.compose(retract, inner.base.compose(s, w_chain(d, a)))

    d = _DerivedMorphism(ext, inner, root_obj, root_mor, ty_map, tm_map)
    return _as_nmorphism(d, "S_o")


def term_functorial_extension(
    ext_src: ExtTermModel, ext_dst: ExtTermModel, f: NMorphism
) -> NMorphism:
    """F_tm : the extension of F to the term-extended models, over F.

    Requires ``ext_dst`` to be the term extension of F's codomain by F(O).
    Normalization in the codomain may re-shuffle the underlying contexts;
    the comparison morphisms are tracked and used to transport types.
    """
    src_m, dst_m = ext_src.inner, ext_dst.inner
    thetas: dict[str, str] = {}

    def theta(d, ctx: str) -> str:
        """under_dst(F_tm ctx) -> F(under_src ctx).

        Normal-form collapse may fire on either side; the recorded
        alignment isomorphisms are composed in on the codomain side and
        their F-images inverted on the domain side.
        """
        th = thetas.get(ctx)
        if th is not None:
            return th
        parent = ext_src.ext_parent(ctx)
        if parent is None:
            th = dst_m.base.identity(ext_dst.base.under(d.on_obj(ctx)))
        else:
            pctx, pty = parent
            th_p = theta(d, pctx)
            f_ty = f.on_ty(ext_src.base.under(pctx), pty)
            th = canonical_pullback(dst_m, th_p, f_ty)
            img = d.on_obj(ctx)
            align_dst = ext_dst.base._align.get(img)
            if align_dst is not None and \
                    align_dst != dst_m.base.identity(dst_m.base.dom(align_dst)):
                th = dst_m.base.compose(th, align_dst)
            align_src = ext_src.base._align.get(ctx)
            if align_src is not None and \
                    align_src != src_m.base.identity(src_m.base.dom(align_src)):
                inv = src_m.base.is_iso(align_src)
                assert inv is not None
                th = dst_m.base.compose(f.on_mor(inv), th)
        thetas[ctx] = th
        return th

    def root_obj(ctx: str) -> str:
        gamma, tys = ext_src.base.obj_info(ctx)
        assert not tys
        return ext_dst.i_obj(f.on_obj(gamma))

    def ty_map(d, ctx: str, ty: str) -> str:
        img = f.on_ty(ext_src.base.under(ctx), ty)
        return dst_m.subst_ty(theta(d, ctx), img)

    def tm_map(d, ctx: str, tm: str) -> str:
        img = f.on_tm(ext_src.base.under(ctx), tm)
        return dst_m.subst_tm(theta(d, ctx), img)

    def root_mor(d, m: str) -> str:
        a, b = ext_src.base.dom(m), ext_src.base.cod(m)
        (s,) = ext_src.base.mor_payload(m)
        out = dst_m.base.compose(f.on_mor(s), theta(d, a))
        return ext_dst.base._wrap(d.on_obj(a), d.on_obj(b), (out,))

    d = _DerivedMorphism(ext_src, ext_dst, root_obj, root_mor, ty_map, tm_map)
    return _as_nmorphism(d, "F_tm")


def extend_term_universal(
    ext_src: ExtTermModel, f: NMorphism, o_term: str
) -> NMorphism:
    """F♯ : the unique morphism out of the term extension with F♯(x) = o.

    Computed as the substitution morphism after the functorial extension.
    """
    target = f.dst
    fo = f.on_ty(ext_src.inner.terminal, ext_src.o_ty)
    ext_dst = extend_by_term(target, fo)
    f_tm = term_functorial_extension(ext_src, ext_dst, f)
    s_o = substitution_morphism(ext_dst, o_term)
    out = compose_morphisms(s_o, f_tm)
    out.name = "F#"
    return out


def term_universal_pins(
    ext_src: ExtTermModel, f: NMorphism, o_term: str, bound: int
) -> MorphismPins:
    """Pins expressing G ∘ I = F and G(x) = o for the rival search."""
    inner = ext_src.inner
    incl = term_inclusion(ext_src)
    pins = MorphismPins()
    for gamma in inner.base.objects(bound):
        key = ext_src.i_obj(gamma)
        pins.on_obj[key] = f.on_obj(gamma)
        for ty in inner.types(gamma, bound):
            pins.on_ty[(key, incl.on_ty(gamma, ty))] = f.on_ty(gamma, ty)
        for tm in inner.terms(gamma, bound):
            pins.on_tm[(key, incl.on_tm(gamma, tm))] = f.on_tm(gamma, tm)
        for delta in inner.base.objects(bound):
            for m in inner.base.hom(delta, gamma):
                pins.on_mor[incl.on_mor(m)] = f.on_mor(m)
    root = ext_src.i_obj(inner.terminal)
    pins.on_tm[(root, ext_src.x_term)] = o_term
    return pins


# ---------------------------------------------------------------------------
# Extension by a basic type, and by a unit type
# ---------------------------------------------------------------------------

class _InterleavedCategory(_WrappedCategory):
    """Contexts interleaved with formal slots (shared by the X and unit cases).

    Objects are (Γ, k₀, A₁, k₁, …, Aₙ, kₙ) in normal form (either the bare
    pair (Γ, 0) or k₀ > 0); ``with_tally`` controls whether morphisms carry
    a function between the slot counts (the basic-type case) or not (the
    unit case).
    """

    def __init__(self, inner: NaturalModel, with_tally: bool):
        super().__init__("ix")
        self.inner = inner
        self.with_tally = with_tally
        self._under: dict[str, str] = {}
        self._count: dict[str, int] = {}

    def obj_key_for(self, gamma: str, ks: tuple[int, ...], tys: tuple[str, ...]) -> str:
        body = ",".join(
            x for pair in itertools.zip_longest(map(str, ks), tys, fillvalue=None)
            for x in pair if x is not None
        )
        return f"ix({gamma}|{body})"

    def register(self, gamma: str, ks: tuple[int, ...], tys: tuple[str, ...]) -> str:
        # normalize: absorb leading type whenever the head slot count is zero
        while tys and ks[0] == 0:
            gamma = self.inner.ext(gamma, tys[0]).extended
            tys = tys[1:]
            ks = ks[1:]
        key = self.obj_key_for(gamma, ks, tys)
        if key not in self._obj_info:
            under = gamma
            for t in tys:
                under = self.inner.ext(under, t).extended
            self._under[key] = under
            self._count[key] = sum(ks)
            self._register_obj(
                key, (gamma, ks, tys), self.inner.base.obj_size(under) + sum(ks)
            )
        return key

    def under(self, key: str) -> str:
        return self._under[key]

    def count(self, key: str) -> int:
        return self._count[key]

    @property
    def terminal(self) -> Optional[str]:
        return self.register(self.inner.terminal, (0,), ())

    def hom(self, a: str, b: str) -> list[str]:
        ua, ub = self._under[a], self._under[b]
        inner_homs = self.inner.base.hom(ua, ub)
        if not self.with_tally:
            return [self._wrap(a, b, (s, ())) for s in inner_homs]
        ka, kb = self._count[a], self._count[b]
        out = []
        for s in inner_homs:
            # kb == 0 yields exactly the empty tally; ka == 0 < kb yields none
            for tally in itertools.product(range(ka), repeat=kb):
                out.append(self._wrap(a, b, (s, tally)))
        return out

    def identity(self, a: str) -> str:
        ident = self.inner.base.identity(self._under[a])
        tally = tuple(range(self._count[a])) if self.with_tally else ()
        return self._wrap(a, a, (ident, tally))

    def compose(self, g: str, f: str) -> str:
        out = self._compose_cache.get((g, f))
        if out is not None:
            return out
        if self.dom(g) != self.cod(f):
            raise ValueError("not composable")
        gs, gt = self.mor_payload(g)
        fs, ft = self.mor_payload(f)
        s = self.inner.base.compose(gs, fs)
        tally = tuple(ft[j] for j in gt) if self.with_tally else ()
        out = self._wrap(self.dom(f), self.cod(g), (s, tally))
        self._compose_cache[(g, f)] = out
        return out

    def _seeds(self, bound: int) -> list[str]:
        return [
            self.register(g, (0,), ())
            for g in self.inner.base.objects(bound)
        ]


class _InterleavedModel(NaturalModel):
    """Shared behaviour of the basic-type and unit-type free extensions."""

    new_ty: str
    new_terms_are_slots: bool

    def __init__(self, inner: NaturalModel, with_tally: bool):
        self.inner = inner
        cat = _InterleavedCategory(inner, with_tally)
        cat.model = self
        self.base = cat

    def slot_term(self, j: int) -> str:
        return f"{self._slot_prefix}{j}" if self.new_terms_are_slots else self._star

    def types(self, ctx: str, bound: int) -> list[str]:
        return [self.new_ty] + self.inner.types(self.base.under(ctx), bound)

    def terms(self, ctx: str, bound: int) -> list[str]:
        if self.new_terms_are_slots:
            new = [self.slot_term(j) for j in range(self.base.count(ctx))]
        else:
            new = [self._star]
        return new + self.inner.terms(self.base.under(ctx), bound)

    def typeof(self, ctx: str, term: str) -> str:
        if self._is_new_term(term):
            return self.new_ty
        return self.inner.typeof(self.base.under(ctx), term)

    def ty_size(self, ctx: str, ty: str) -> int:
        if ty == self.new_ty:
            return 1
        return self.inner.ty_size(self.base.under(ctx), ty)

    def subst_ty(self, sigma: str, ty: str) -> str:
        if ty == self.new_ty:
            return ty
        (s, _) = self.base.mor_payload(sigma)
        return self.inner.subst_ty(s, ty)

    def subst_tm(self, sigma: str, term: str) -> str:
        s, tally = self.base.mor_payload(sigma)
        if self._is_new_term(term):
            if not self.new_terms_are_slots:
                return term
            return self.slot_term(tally[self._slot_index(term)])
        return self.inner.subst_tm(s, term)

    def ext(self, ctx: str, ty: str) -> ExtensionData:
        cat = self.base
        gamma, ks, tys = cat.obj_info(ctx)
        inner = self.inner
        under = cat.under(ctx)
        k = cat.count(ctx)
        if ty == self.new_ty:
            new_key = cat.register(gamma, ks[:-1] + (ks[-1] + 1,), tys)
            tally = tuple(range(k)) if cat.with_tally else ()
            proj = cat._wrap(new_key, ctx, (inner.base.identity(under), tally))
            var = self.slot_term(k) if self.new_terms_are_slots else self._star
            return ExtensionData(new_key, proj, var)
        e_in = inner.ext(under, ty)
        new_key = cat.register(gamma, ks + (0,), tys + (ty,))
        tally = tuple(range(k)) if cat.with_tally else ()
        proj = cat._wrap(new_key, ctx, (e_in.proj, tally))
        return ExtensionData(new_key, proj, e_in.var)

    def indsub(self, sigma: str, term: str, ty: str) -> Optional[str]:
        cat = self.base
        gamma_ctx = cat.cod(sigma)
        s, tally = cat.mor_payload(sigma)
        e = self.ext(gamma_ctx, ty)
        if ty == self.new_ty:
            if not cat.with_tally:
                return cat._wrap(cat.dom(sigma), e.extended, (s, ()))
            j = self._slot_index(term)
            return cat._wrap(cat.dom(sigma), e.extended, (s, tally + (j,)))
        tau = induced_sub(self.inner, s, term, ty)
        return cat._wrap(cat.dom(sigma), e.extended, (tau, tally))

    def ext_parent(self, ctx: str) -> Optional[tuple[str, str]]:
        cat = self.base
        gamma, ks, tys = cat.obj_info(ctx)
        if ks[-1] > 0:
            parent = cat.register(gamma, ks[:-1] + (ks[-1] - 1,), tys)
            if self.ext(parent, self.new_ty).extended == ctx:
                return parent, self.new_ty
            return None
        if tys:
            parent = cat.register(gamma, ks[:-1], tys[:-1])
            if self.ext(parent, tys[-1]).extended == ctx:
                return parent, tys[-1]
            return None
        inner_parent = self.inner.ext_parent(gamma)
        if inner_parent is None:
            return None
        pctx, pty = inner_parent
        parent = cat.register(pctx, (0,), ())
        if self.ext(parent, pty).extended == ctx:
            return parent, pty
        return None

    def _is_new_term(self, term: str) -> bool:
        if self.new_terms_are_slots:
            rest = term[len(self._slot_prefix):]
            return term.startswith(self._slot_prefix) and rest.isdigit()
        return term == self._star

    def _slot_index(self, term: str) -> int:
        return int(term[len(self._slot_prefix):])


class TypeExtModel(_InterleavedModel):
    """The free natural model on ``inner`` extended by a basic type X.

    The new type and slot-term keys carry one apostrophe per nesting level,
    so iterated extensions never clash.
    """

    new_terms_are_slots = True

    def __init__(self, inner: NaturalModel):
        super().__init__(inner, with_tally=True)
        self.new_ty = _fresh_key(inner.types(inner.terminal, 4), "X")
        self._slot_prefix = "v" + "'" * self.new_ty.count("'")


class UnitExtModel(_InterleavedModel):
    """The free natural model on ``inner`` admitting a unit type."""

    new_terms_are_slots = False

    def __init__(self, inner: NaturalModel):
        super().__init__(inner, with_tally=False)
        self.new_ty = _fresh_key(inner.types(inner.terminal, 4), "unit")
        self._star = _fresh_key(
            inner.terms(inner.terminal, 4) + [self.new_ty], "star"
        )
        self.unit_structure = UnitStructure(self.new_ty, self._star)


def extend_by_type(inner: NaturalModel) -> TypeExtModel:
    """Freely adjoin a basic type; the new type key is ``model.new_ty``."""
    return TypeExtModel(inner)


def extend_by_unit(inner: NaturalModel) -> UnitExtModel:
    """Freely adjoin a unit type; the structure is ``model.unit_structure``."""
    return UnitExtModel(inner)


def interleaved_inclusion(ext: _InterleavedModel) -> NMorphism:
    """The strict inclusion of the inner model into an interleaved extension."""
    inner = ext.inner
    cat = ext.base

    def root_obj(ctx: str) -> str:
        return cat.register(ctx, (0,), ())

    def ty_map(d, ctx: str, ty: str) -> str:
        return ty

    def tm_map(d, ctx: str, tm: str) -> str:
        return tm

    def root_mor(d, m: str) -> str:
        return cat._wrap(
            d.on_obj(inner.base.dom(m)), d.on_obj(inner.base.cod(m)), (m, ())
        )

    d = _DerivedMorphism(inner, ext, root_obj, root_mor, ty_map, tm_map)
    return _as_nmorphism(d, "I")


def _interleaved_collapse(
    ext: _InterleavedModel,
    target: NaturalModel,
    f: NMorphism,
    slot_ty: Callable[[str], str],
    slot_tm_is_var: bool,
    name: str,
) -> NMorphism:
    """The mediating morphism out of an interleaved extension.

    Formal slots are sent to extensions by ``slot_ty`` of the image context
    (weakened appropriately); inner types and terms are transported along
    the comparison morphism that forgets the slots.  With ``f`` the
    identity this is the insertion morphism; in general it is F♯.
    """
    inner = ext.inner
    thetas: dict[str, str] = {}
    slot_vars: dict[str, list[str]] = {}

    def theta(d, ctx: str) -> str:
        """F♯(ctx) -> F(under ctx), forgetting the formal slots."""
        th = thetas.get(ctx)
        if th is not None:
            return th
        parent = ext.ext_parent(ctx)
        if parent is None:
            th = target.base.identity(d.on_obj(ctx))
            slot_vars.setdefault(ctx, [])
        else:
            pctx, pty = parent
            th_p = theta(d, pctx)
            d.on_obj(ctx)
            e = target.ext(d.on_obj(pctx), d.on_ty(pctx, pty))
            if pty == ext.new_ty:
                th = target.base.compose(th_p, e.proj)
                slot_vars[ctx] = [
                    target.subst_tm(e.proj, v) for v in _slots(d, pctx)
                ] + [e.var]
            else:
                f_ty = f.on_ty(ext.base.under(pctx), pty)
                th = canonical_pullback(target, th_p, f_ty)
                slot_vars[ctx] = [
                    target.subst_tm(e.proj, v) for v in _slots(d, pctx)
                ]
        thetas[ctx] = th
        return th

    def _slots(d, ctx: str) -> list[str]:
        theta(d, ctx)
        return slot_vars[ctx]

    def root_obj(ctx: str) -> str:
        gamma, ks, tys = ext.base.obj_info(ctx)
        assert not tys and sum(ks) == 0
        slot_vars.setdefault(ctx, [])
        return f.on_obj(gamma)

    def ty_map(d, ctx: str, ty: str) -> str:
        if ty == ext.new_ty:
            d.on_obj(ctx)
            theta(d, ctx)
            return target.subst_ty(target.t(d.on_obj(ctx)), slot_ty(d.on_obj(ctx)))
        img = f.on_ty(ext.base.under(ctx), ty)
        d.on_obj(ctx)
        return target.subst_ty(theta(d, ctx), img)

    def tm_map(d, ctx: str, tm: str) -> str:
        if ext._is_new_term(tm):
            d.on_obj(ctx)
            if slot_tm_is_var:
                return _slots(d, ctx)[int(tm[1:])]
            u = target.unit_structure  # type: ignore[attr-defined]
            return target.subst_tm(target.t(d.on_obj(ctx)), u.star_tm)
        img = f.on_tm(ext.base.under(ctx), tm)
        d.on_obj(ctx)
        return target.subst_tm(theta(d, ctx), img)

    def root_mor(d, m: str) -> str:
        a, b = ext.base.dom(m), ext.base.cod(m)
        (s, _) = ext.base.mor_payload(m)
        return target.base.compose(f.on_mor(s), theta(d, a))

    d = _DerivedMorphism(ext, target, root_obj, root_mor, ty_map, tm_map)
    return _as_nmorphism(d, name)


def type_universal(ext: TypeExtModel, f: NMorphism, o_ty: str) -> NMorphism:
    """F♯ out of the basic-type extension, sending X to the closed type o_ty."""
    return _interleaved_collapse(
        ext, f.dst, f, slot_ty=lambda _ctx: o_ty, slot_tm_is_var=True, name="F#",
    )


def type_insertion(ext: TypeExtModel, o_ty: str) -> NMorphism:
    """S : send the formal basic type to an existing closed type of the inner model."""
    from .morphism import identity_morphism

    return type_universal(ext, identity_morphism(ext.inner), o_ty)


def unit_universal(ext: UnitExtModel, f: NMorphism) -> NMorphism:
    """F♯ out of the unit extension into a model admitting a unit type."""
    target = f.dst
    u: UnitStructure = target.unit_structure  # type: ignore[attr-defined]
    return _interleaved_collapse(
        ext, target, f, slot_ty=lambda _ctx: u.unit_ty, slot_tm_is_var=False,
        name="F#",
    )


def unit_insertion(ext: UnitExtModel) -> NMorphism:
    """N : collapse the formal units into the unit structure of the inner model."""
    from .morphism import identity_morphism

    return unit_universal(ext, identity_morphism(ext.inner))


def interleaved_universal_pins(
    ext: _InterleavedModel, f: NMorphism, bound: int, sharp: NMorphism,
) -> MorphismPins:
    """Pins for G ∘ I = F plus the prescribed images of the formal structure.

    The new type (and, in the unit case, its term) are pinned at every
    in-bound context to the values any structure-preserving candidate is
    forced to take — the weakened prescribed closed type resp. the weakened
    distinguished term — as computed by the constructed mediating morphism.
    """
    inner = ext.inner
    incl = interleaved_inclusion(ext)
    pins = MorphismPins()
    for gamma in inner.base.objects(bound):
        key = incl.on_obj(gamma)
        pins.on_obj[key] = f.on_obj(gamma)
        for ty in inner.types(gamma, bound):
            pins.on_ty[(key, ty)] = f.on_ty(gamma, ty)
        for tm in inner.terms(gamma, bound):
            pins.on_tm[(key, tm)] = f.on_tm(gamma, tm)
        for delta in inner.base.objects(bound):
            for m in inner.base.hom(delta, gamma):
                pins.on_mor[incl.on_mor(m)] = f.on_mor(m)
    for ctx in ext.base.objects(bound):
        pins.on_ty[(ctx, ext.new_ty)] = sharp.on_ty(ctx, ext.new_ty)
        if not ext.new_terms_are_slots:
            pins.on_tm[(ctx, ext._star)] = sharp.on_tm(ctx, ext._star)
    return pins


# ---------------------------------------------------------------------------
# Type trees and the free admission of dependent sum types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TypeTree:
    """Leaf-labelled finite rooted binary tree of types.

    The right subtree of a node lives over the context extended by the left
    subtree.
    """

    leaf: Optional[str] = None
    left: Optional["TypeTree"] = None
    right: Optional["TypeTree"] = None

    @property
    def is_leaf(self) -> bool:
        return self.leaf is not None

    @functools.cached_property
    def key(self) -> str:
        if self.is_leaf:
            return self.leaf  # type: ignore[return-value]
        return f"[{self.left.key},{self.right.key}]"

    def leaves(self) -> list[str]:
        if self.is_leaf:
            return [self.leaf]  # type: ignore[list-item]
        return self.left.leaves() + self.right.leaves()

    @functools.cached_property
    def _size(self) -> int:
        if self.is_leaf:
            return 1
        return self.left._size + self.right._size

    def size(self) -> int:
        return self._size


@dataclass(frozen=True)
class TermTree:
    """Term tree; a node carries the type tree indexing its second component.

    A node (t₁, B, t₂) is a term of the dependent sum [p(t₁), B]; the second
    component t₂ lives over the same context, of type B substituted along the
    section of t₁.
    """

    leaf: Optional[str] = None
    left: Optional["TermTree"] = None
    rtype: Optional[TypeTree] = None
    right: Optional["TermTree"] = None

    @property
    def is_leaf(self) -> bool:
        return self.leaf is not None

    @functools.cached_property
    def key(self) -> str:
        if self.is_leaf:
            return self.leaf  # type: ignore[return-value]
        return f"[{self.left.key}:{self.rtype.key}:{self.right.key}]"

    def size(self) -> int:
        if self.is_leaf:
            return 1
        return self.left.size() + self.right.size()


def tree_ext(m: NaturalModel, ctx: str, tree: TypeTree) -> tuple[str, str, TermTree]:
    """(Γ•T, p_T, q_T): extension data for a type tree, built from the leaves.

    p_T is the composite of the leaf projections; q_T pairs the weakened
    variables of the two subtrees.
    """
    cache = m.__dict__.setdefault("_tree_ext_cache", {})
    out = cache.get((ctx, tree.key))
    if out is not None:
        return out
    if tree.is_leaf:
        e = m.ext(ctx, tree.leaf)
        out = (e.extended, e.proj, TermTree(leaf=e.var))
    else:
        c1, p1, q1 = tree_ext(m, ctx, tree.left)
        c2, p2, q2 = tree_ext(m, c1, tree.right)
        proj = m.base.compose(p1, p2)
        left_tm = tmtree_subst(m, p2, q1)
        rtype = tree_subst(m, canonical_pullback_tree(m, proj, tree.left), tree.right)
        out = (c2, proj, TermTree(left=left_tm, rtype=rtype, right=q2))
    cache[(ctx, tree.key)] = out
    return out


def canonical_pullback_tree(m: NaturalModel, sigma: str, tree: TypeTree) -> str:
    """σ•T : iterated canonical pullback along the leaves of a type tree."""
    out = sigma
    rest = tree
    for leaf_ty in _leaf_types_along(m, m.base.cod(sigma), tree):
        out = canonical_pullback(m, out, leaf_ty)
    return out


def _leaf_types_along(m: NaturalModel, ctx: str, tree: TypeTree) -> list[str]:
    if tree.is_leaf:
        return [tree.leaf]
    left = _leaf_types_along(m, ctx, tree.left)
    mid = tree_ext(m, ctx, tree.left)[0]
    return left + _leaf_types_along(m, mid, tree.right)


def tree_subst(m: NaturalModel, sigma: str, tree: TypeTree) -> TypeTree:
    """T[σ], substituting leaf-wise with the canonical pullbacks in between."""
    cache = m.__dict__.setdefault("_tree_subst_cache", {})
    out = cache.get((sigma, tree.key))
    if out is not None:
        return out
    if tree.is_leaf:
        out = TypeTree(leaf=m.subst_ty(sigma, tree.leaf))
    else:
        left = tree_subst(m, sigma, tree.left)
        sigma_ext = canonical_pullback_tree(m, sigma, tree.left)
        right = tree_subst(m, sigma_ext, tree.right)
        out = TypeTree(left=left, right=right)
    cache[(sigma, tree.key)] = out
    return out


def tmtree_subst(m: NaturalModel, sigma: str, tree: TermTree) -> TermTree:
    cache = m.__dict__.setdefault("_tmtree_subst_cache", {})
    out = cache.get((sigma, tree.key))
    if out is not None:
        return out
    if tree.is_leaf:
        out = TermTree(leaf=m.subst_tm(sigma, tree.leaf))
    else:
        left = tmtree_subst(m, sigma, tree.left)
        sigma_ext = canonical_pullback_tree(
            m, sigma, tmtree_type(m, m.base.cod(sigma), tree.left)
        )
        rtype = tree_subst(m, sigma_ext, tree.rtype)
        right = tmtree_subst(m, sigma, tree.right)
        out = TermTree(left=left, rtype=rtype, right=right)
    cache[(sigma, tree.key)] = out
    return out


def tmtree_type(m: NaturalModel, ctx: str, tree: TermTree) -> TypeTree:
    """The type tree of a term tree (leafwise typing, node type from the index)."""
    if tree.is_leaf:
        return TypeTree(leaf=m.typeof(ctx, tree.leaf))
    return TypeTree(left=tmtree_type(m, ctx, tree.left), right=tree.rtype)


def tmtree_section(m: NaturalModel, ctx: str, tree: TermTree) -> str:
    """⟨id, t⟩_T : Γ -> Γ•T for a term tree t of type tree T over Γ."""
    return tree_indsub(m, m.base.identity(ctx), tree, tmtree_type(m, ctx, tree))


def tree_indsub(m: NaturalModel, sigma: str, tm: TermTree, ty: TypeTree) -> str:
    """⟨σ, t⟩_T = ⟨⟨σ, t₁⟩_{T₁}, t₂⟩_{T₂}, recursively through the tree."""
    if ty.is_leaf:
        assert tm.is_leaf
        return induced_sub(m, sigma, tm.leaf, ty.leaf)
    tau1 = tree_indsub(m, sigma, tm.left, ty.left)
    return tree_indsub(m, tau1, tm.right, ty.right)


class _TreeCategory(_WrappedCategory):
    """Contexts formally extended by lists of type trees."""

    def __init__(self, inner: NaturalModel):
        super().__init__("tr")
        self.inner = inner
        self._under: dict[str, str] = {}

    def obj_key_for(self, gamma: str, trees: tuple[TypeTree, ...]) -> str:
        return f"tr({gamma}|{';'.join(t.key for t in trees)})"

    def register(self, gamma: str, trees: tuple[TypeTree, ...]) -> str:
        while trees and trees[0].is_leaf:
            gamma = self.inner.ext(gamma, trees[0].leaf).extended
            trees = trees[1:]
        key = self.obj_key_for(gamma, trees)
        if key not in self._obj_info:
            under = gamma
            for t in trees:
                under = tree_ext(self.inner, under, t)[0]
            self._under[key] = under
            self._register_obj(key, (gamma, trees), self.inner.base.obj_size(under))
        return key

    def under(self, key: str) -> str:
        return self._under[key]

    @property
    def terminal(self) -> Optional[str]:
        return self.register(self.inner.terminal, ())

    def hom(self, a: str, b: str) -> list[str]:
        return [
            self._wrap(a, b, (s,))
            for s in self.inner.base.hom(self._under[a], self._under[b])
        ]

    def identity(self, a: str) -> str:
        return self._wrap(a, a, (self.inner.base.identity(self._under[a]),))

    def compose(self, g: str, f: str) -> str:
        out = self._compose_cache.get((g, f))
        if out is not None:
            return out
        if self.dom(g) != self.cod(f):
            raise ValueError("not composable")
        (gs,) = self.mor_payload(g)
        (fs,) = self.mor_payload(f)
        out = self._wrap(self.dom(f), self.cod(g), (self.inner.base.compose(gs, fs),))
        self._compose_cache[(g, f)] = out
        return out

    def _seeds(self, bound: int) -> list[str]:
        return [self.register(g, ()) for g in self.inner.base.objects(bound)]


class SigmaExtModel(NaturalModel):
    """The free natural model on ``inner`` admitting dependent sum types.

    Types are type trees over the underlying context, terms are term trees,
    and the dependent sum of (T, T') is the tree [T, T'].  Tree keys are
    registered so they never need to be parsed.
    """

    def __init__(self, inner: NaturalModel):
        self.inner = inner
        cat = _TreeCategory(inner)
        cat.model = self
        self.base = cat
        self._ty_trees: dict[str, TypeTree] = {}
        self._tm_trees: dict[str, TermTree] = {}
        self.sigma_structure = SigmaStructure(self._sigma, self._pair)

    # -- tree registries --------------------------------------------------
    def reg_ty(self, tree: TypeTree) -> str:
        self._ty_trees.setdefault(tree.key, tree)
        return tree.key

    def reg_tm(self, tree: TermTree) -> str:
        self._tm_trees.setdefault(tree.key, tree)
        return tree.key

    def ty_tree(self, key: str) -> TypeTree:
        return self._ty_trees[key]

    def tm_tree(self, key: str) -> TermTree:
        return self._tm_trees[key]

    # -- model interface ---------------------------------------------------
    def types(self, ctx: str, bound: int) -> list[str]:
        under = self.base.under(ctx)
        return [self.reg_ty(t) for t in self._gen_ty_trees(under, bound)]

    def _gen_ty_trees(self, m_ctx: str, bound: int) -> list[TypeTree]:
        cache = self.__dict__.setdefault("_gen_ty_cache", {})
        cached = cache.get((m_ctx, bound))
        if cached is not None:
            return cached
        out: list[TypeTree] = []
        if bound >= 1:
            for leaf in self.inner.types(m_ctx, bound):
                out.append(TypeTree(leaf=leaf))
            for lsize in range(1, bound):
                for l_tree in self._gen_ty_trees(m_ctx, lsize):
                    if l_tree.size() != lsize:
                        continue
                    mid = tree_ext(self.inner, m_ctx, l_tree)[0]
                    for r_tree in self._gen_ty_trees(mid, bound - lsize):
                        out.append(TypeTree(left=l_tree, right=r_tree))
        cache[(m_ctx, bound)] = out
        return out

    def terms(self, ctx: str, bound: int) -> list[str]:
        under = self.base.under(ctx)
        out = []
        for ty in self._gen_ty_trees(under, bound):
            out.extend(self.reg_tm(t) for t in self._gen_tm_trees(under, ty))
        return out

    def _gen_tm_trees(self, m_ctx: str, ty: TypeTree) -> list[TermTree]:
        cache = self.__dict__.setdefault("_gen_tm_cache", {})
        cached = cache.get((m_ctx, ty.key))
        if cached is not None:
            return cached
        if ty.is_leaf:
            out = [
                TermTree(leaf=a)
                for a in self.inner.terms_of(m_ctx, ty.leaf, max(ty.size(), 1))
            ]
        else:
            out = []
            for t1 in self._gen_tm_trees(m_ctx, ty.left):
                s_t1 = tmtree_section(self.inner, m_ctx, t1)
                ty2 = tree_subst(self.inner, s_t1, ty.right)
                for t2 in self._gen_tm_trees(m_ctx, ty2):
                    out.append(TermTree(left=t1, rtype=ty.right, right=t2))
        cache[(m_ctx, ty.key)] = out
        return out

    def typeof(self, ctx: str, term: str) -> str:
        cache = self.__dict__.setdefault("_typeof_cache", {})
        out = cache.get((ctx, term))
        if out is None:
            under = self.base.under(ctx)
            out = self.reg_ty(tmtree_type(self.inner, under, self.tm_tree(term)))
            cache[(ctx, term)] = out
        return out

    def ty_size(self, ctx: str, ty: str) -> int:
        return self.ty_tree(ty).size()

    def tm_size(self, ctx: str, term: str) -> int:
        return self.tm_tree(term).size()

    def subst_ty(self, sigma: str, ty: str) -> str:
        cache = self.__dict__.setdefault("_subst_ty_cache", {})
        out = cache.get((sigma, ty))
        if out is None:
            (s,) = self.base.mor_payload(sigma)
            out = self.reg_ty(tree_subst(self.inner, s, self.ty_tree(ty)))
            cache[(sigma, ty)] = out
        return out

    def subst_tm(self, sigma: str, term: str) -> str:
        cache = self.__dict__.setdefault("_subst_tm_cache", {})
        out = cache.get((sigma, term))
        if out is None:
            (s,) = self.base.mor_payload(sigma)
            out = self.reg_tm(tmtree_subst(self.inner, s, self.tm_tree(term)))
            cache[(sigma, term)] = out
        return out

    def ext(self, ctx: str, ty: str) -> ExtensionData:
        cat = self.base
        gamma, trees = cat.obj_info(ctx)
        tree = self.ty_tree(ty)
        new_key = cat.register(gamma, trees + (tree,))
        _, proj, var = tree_ext(self.inner, cat.under(ctx), tree)
        return ExtensionData(new_key, cat._wrap(new_key, ctx, (proj,)), self.reg_tm(var))

    def indsub(self, sigma: str, term: str, ty: str) -> Optional[str]:
        (s,) = self.base.mor_payload(sigma)
        e = self.ext(self.base.cod(sigma), ty)
        tau = tree_indsub(self.inner, s, self.tm_tree(term), self.ty_tree(ty))
        return self.base._wrap(self.base.dom(sigma), e.extended, (tau,))

    def ext_parent(self, ctx: str) -> Optional[tuple[str, str]]:
        gamma, trees = self.base.obj_info(ctx)
        if trees:
            parent = self.base.register(gamma, trees[:-1])
            ty = self.reg_ty(trees[-1])
            if self.ext(parent, ty).extended == ctx:
                return parent, ty
            return None
        inner_parent = self.inner.ext_parent(gamma)
        if inner_parent is None:
            return None
        pctx, pty = inner_parent
        parent = self.base.register(pctx, ())
        ty = self.reg_ty(TypeTree(leaf=pty))
        if self.ext(parent, ty).extended == ctx:
            return parent, ty
        return None

    # -- dependent sum structure -------------------------------------------
    def _sigma(self, ctx: str, ty_a: str, ty_b: str) -> str:
        return self.reg_ty(TypeTree(left=self.ty_tree(ty_a), right=self.ty_tree(ty_b)))

    def _pair(self, ctx: str, ty_a: str, ty_b: str, tm_a: str, tm_b: str) -> str:
        return self.reg_tm(TermTree(
            left=self.tm_tree(tm_a), rtype=self.ty_tree(ty_b), right=self.tm_tree(tm_b),
        ))


def extend_by_sigma(inner: NaturalModel) -> SigmaExtModel:
    """Freely adjoin dependent sum types via type trees."""
    return SigmaExtModel(inner)


def sigma_inclusion(ext: SigmaExtModel) -> NMorphism:
    """The strict inclusion of the inner model into its tree extension."""
    inner = ext.inner

    def root_obj(ctx: str) -> str:
        return ext.base.register(ctx, ())

    def ty_map(d, ctx: str, ty: str) -> str:
        return ext.reg_ty(TypeTree(leaf=ty))

    def tm_map(d, ctx: str, tm: str) -> str:
        return ext.reg_tm(TermTree(leaf=tm))

    def root_mor(d, m: str) -> str:
        return ext.base._wrap(
            d.on_obj(inner.base.dom(m)), d.on_obj(inner.base.cod(m)), (m,)
        )

    d = _DerivedMorphism(inner, ext, root_obj, root_mor, ty_map, tm_map)
    return _as_nmorphism(d, "I")


def sigma_of_tree(
    m: NaturalModel, ctx: str, tree: TypeTree, bound: int
) -> tuple[str, str, str]:
    """Collapse a type tree to a single type via the Σ structure of ``m``.

    Returns (Σ-collapsed type over ctx, θ : ctx•collapsed -> ctx•T-chain,
    θ⁻¹); θ is the canonical comparison isomorphism of the two extensions.
    """
    s: SigmaStructure = m.sigma_structure  # type: ignore[attr-defined]
    if tree.is_leaf:
        e = m.ext(ctx, tree.leaf)
        ident = m.base.identity(e.extended)
        return tree.leaf, ident, ident
    from .natmodel import sigma_split

    s1, th1, th1i = sigma_of_tree(m, ctx, tree.left, bound)
    mid = tree_ext(m, ctx, tree.left)[0]
    s2, th2, th2i = sigma_of_tree(m, mid, tree.right, bound)
    # transport the collapsed right type along θ₁ to live over ctx•S₁
    b_ty = m.subst_ty(th1, s2)
    sig = s.sigma(ctx, s1, b_ty)
    e_sig = m.ext(ctx, sig)
    # θΣ : ctx•Σ(S₁,B) -> ctx•S₁•B via the projections of the generic pair
    q_sig = e_sig.var
    sig_wk = m.typeof(e_sig.extended, q_sig)
    a1_wk = m.subst_ty(e_sig.proj, s1)
    b_wk = m.subst_ty(canonical_pullback(m, e_sig.proj, s1), b_ty)
    fst_tm, snd_tm = sigma_split(
        m, s, e_sig.extended, a1_wk, b_wk, q_sig,
        max(bound, tree.size()),
    )
    into_s1 = induced_sub(m, e_sig.proj, fst_tm, s1)
    theta_sig = induced_sub(m, into_s1, snd_tm, b_ty)
    th1_lift = canonical_pullback(m, th1, s2)
    theta = m.base.compose(th2, m.base.compose(th1_lift, theta_sig))
    theta_inv = m.base.is_iso(theta)
    if theta_inv is None:
        raise ValueError(f"tree collapse comparison at {tree.key} is not invertible")
    return sig, theta, theta_inv


def pair_of_tree(
    m: NaturalModel, ctx: str, tm: TermTree, bound: int
) -> str:
    """Collapse a term tree to a single term via the Σ structure of ``m``."""
    s: SigmaStructure = m.sigma_structure  # type: ignore[attr-defined]
    if tm.is_leaf:
        return tm.leaf
    t1_ty = tmtree_type(m, ctx, tm.left)
    s1, th1, _ = sigma_of_tree(m, ctx, t1_ty, bound)
    mid = tree_ext(m, ctx, t1_ty)[0]
    s2, _, _ = sigma_of_tree(m, mid, tm.rtype, bound)
    b_ty = m.subst_ty(th1, s2)
    a_tm = pair_of_tree(m, ctx, tm.left, bound)
    b_tm = pair_of_tree(m, ctx, tm.right, bound)
    return s.pair(ctx, s1, b_ty, a_tm, b_tm)


def tree_summation(ext: SigmaExtModel, bound: int = 4) -> NMorphism:
    """S : collapse tree contexts using the Σ structure of the inner model.

    Requires the inner model to admit dependent sum types.
    """
    from .morphism import identity_morphism

    return sigma_universal(ext, identity_morphism(ext.inner), bound)


def sigma_functorial_extension(
    ext_src: SigmaExtModel, ext_dst: SigmaExtModel, f: NMorphism
) -> NMorphism:
    """F_Σ : apply F to every leaf of every tree."""
    src_m, dst_m = ext_src.inner, ext_dst.inner

    def map_ty_tree(m_ctx: str, tree: TypeTree) -> TypeTree:
        if tree.is_leaf:
            return TypeTree(leaf=f.on_ty(m_ctx, tree.leaf))
        left = map_ty_tree(m_ctx, tree.left)
        mid = tree_ext(src_m, m_ctx, tree.left)[0]
        return TypeTree(left=left, right=map_ty_tree(mid, tree.right))

    def map_tm_tree(m_ctx: str, tree: TermTree) -> TermTree:
        if tree.is_leaf:
            return TermTree(leaf=f.on_tm(m_ctx, tree.leaf))
        t1_ty = tmtree_type(src_m, m_ctx, tree.left)
        mid = tree_ext(src_m, m_ctx, t1_ty)[0]
        return TermTree(
            left=map_tm_tree(m_ctx, tree.left),
            rtype=map_ty_tree(mid, tree.rtype),
            right=map_tm_tree(m_ctx, tree.right),
        )

    def root_obj(ctx: str) -> str:
        gamma, trees = ext_src.base.obj_info(ctx)
        assert not trees
        return ext_dst.base.register(f.on_obj(gamma), ())

    def ty_map(d, ctx: str, ty: str) -> str:
        return ext_dst.reg_ty(map_ty_tree(ext_src.base.under(ctx), ext_src.ty_tree(ty)))

    def tm_map(d, ctx: str, tm: str) -> str:
        return ext_dst.reg_tm(map_tm_tree(ext_src.base.under(ctx), ext_src.tm_tree(tm)))

    def root_mor(d, m: str) -> str:
        (s,) = ext_src.base.mor_payload(m)
        a, b = ext_src.base.dom(m), ext_src.base.cod(m)
        return ext_dst.base._wrap(d.on_obj(a), d.on_obj(b), (f.on_mor(s),))

    d = _DerivedMorphism(ext_src, ext_dst, root_obj, root_mor, ty_map, tm_map)
    return _as_nmorphism(d, "F_sigma")


def sigma_universal(ext: SigmaExtModel, f: NMorphism, bound: int = 4) -> NMorphism:
    """F♯ out of the tree extension into a model admitting dependent sums.

    Built directly: trees are collapsed with the target's Σ structure after
    applying F to their leaves, and the comparison isomorphisms are tracked
    to transport types over formally extended contexts.
    """
    target = f.dst
    src_m = ext.inner
    thetas: dict[str, str] = {}

    def map_ty_tree(m_ctx: str, tree: TypeTree) -> TypeTree:
        if tree.is_leaf:
            return TypeTree(leaf=f.on_ty(m_ctx, tree.leaf))
        left = map_ty_tree(m_ctx, tree.left)
        mid = tree_ext(src_m, m_ctx, tree.left)[0]
        return TypeTree(left=left, right=map_ty_tree(mid, tree.right))

    def map_tm_tree(m_ctx: str, tree: TermTree) -> TermTree:
        if tree.is_leaf:
            return TermTree(leaf=f.on_tm(m_ctx, tree.leaf))
        t1_ty = tmtree_type(src_m, m_ctx, tree.left)
        mid = tree_ext(src_m, m_ctx, t1_ty)[0]
        return TermTree(
            left=map_tm_tree(m_ctx, tree.left),
            rtype=map_ty_tree(mid, tree.rtype),
            right=map_tm_tree(m_ctx, tree.right),
        )

    def theta(d, ctx: str) -> str:
        """F♯(ctx) -> "F(under ctx)" built leafwise; collapses tracked."""
        th = thetas.get(ctx)
        if th is not None:
            return th
        parent = ext.ext_parent(ctx)
        if parent is None:
            th = target.base.identity(d.on_obj(ctx))
        else:
            pctx, pty = parent
            th_p = theta(d, pctx)
            tree = map_ty_tree(ext.base.under(pctx), ext.ty_tree(pty))
            tree_over_img = tree_subst(target, th_p, tree)
            _, th_here, _ = sigma_of_tree(
                target, d.on_obj(pctx), tree_over_img, _collapse_bound(tree)
            )
            lift = canonical_pullback_tree(target, th_p, tree)
            th = target.base.compose(lift, th_here)
        thetas[ctx] = th
        return th

    def _collapse_bound(tree: TypeTree) -> int:
        return max(bound, tree.size())

    def root_obj(ctx: str) -> str:
        gamma, trees = ext.base.obj_info(ctx)
        assert not trees
        return f.on_obj(gamma)

    def ty_map(d, ctx: str, ty: str) -> str:
        tree = map_ty_tree(ext.base.under(ctx), ext.ty_tree(ty))
        d.on_obj(ctx)
        tree_img = tree_subst(target, theta(d, ctx), tree)
        return sigma_of_tree(target, d.on_obj(ctx), tree_img, _collapse_bound(tree))[0]

    def tm_map(d, ctx: str, tm: str) -> str:
        tree = map_tm_tree(ext.base.under(ctx), ext.tm_tree(tm))
        d.on_obj(ctx)
        tree_img = tmtree_subst(target, theta(d, ctx), tree)
        return pair_of_tree(target, d.on_obj(ctx), tree_img, bound)

    def root_mor(d, m: str) -> str:
        (s,) = ext.base.mor_payload(m)
        a = ext.base.dom(m)
        return target.base.compose(f.on_mor(s), theta(d, a))

    d = _DerivedMorphism(ext, target, root_obj, root_mor, ty_map, tm_map)
    return _as_nmorphism(d, "F#")


def sigma_universal_pins(
    ext: SigmaExtModel, f: NMorphism, bound: int, sharp: NMorphism
) -> MorphismPins:
    """Pins for G ∘ I = F plus Σ-preservation, which forces all tree images.

    Since dependent-sum preservation determines the image of every node from
    the images of its subtrees, every type and term image is pinned to the
    value of the constructed F♯; uniqueness search then ranges only over the
    morphism images.
    """
    inner = ext.inner
    pins = MorphismPins()
    for gamma in inner.base.objects(bound):
        key = ext.base.register(gamma, ())
        pins.on_obj[key] = f.on_obj(gamma)
    incl = sigma_inclusion(ext)
    for gamma in inner.base.objects(bound):
        for delta in inner.base.objects(bound):
            for m in inner.base.hom(delta, gamma):
                pins.on_mor[incl.on_mor(m)] = f.on_mor(m)
    for ctx in ext.base.objects(bound):
        for ty in ext.types(ctx, bound):
            pins.on_ty[(ctx, ty)] = sharp.on_ty(ctx, ty)
        for tm in ext.terms(ctx, bound):
            pins.on_tm[(ctx, tm)] = sharp.on_tm(ctx, tm)
    return pins


# ---------------------------------------------------------------------------
# Polynomial composite of two models over a shared base
# ---------------------------------------------------------------------------

class CompositeModel(NaturalModel):
    """The polynomial composite (ℂ, q·p) of two models over one base category.

    Types are pairs (A, B) with A a type of the outer model and B a type of
    the inner model over the outer extension; terms are the matching
    quadruples.  Extension composes the two chosen extensions.
    """

    def __init__(self, inner_p: NaturalModel, outer_q: NaturalModel):
        self.p = inner_p
        self.q = outer_q
        self.base = inner_p.base

    @staticmethod
    def ty_key(a: str, b: str) -> str:
        return f"({a}|{b})"

    @staticmethod
    def tm_key(a: str, b: str, x: str, y: str) -> str:
        return f"({a}|{b}|{x}|{y})"

    def _ty_parts(self, key: str) -> tuple[str, str]:
        return self._ty_reg[key]

    def _tm_parts(self, key: str) -> tuple[str, str, str, str]:
        return self._tm_reg[key]

    _ty_reg: dict[str, tuple[str, str]] = {}
    _tm_reg: dict[str, tuple[str, str, str, str]] = {}

    def _reg_ty(self, a: str, b: str) -> str:
        key = self.ty_key(a, b)
        self._ty_reg.setdefault(key, (a, b))
        return key

    def _reg_tm(self, a: str, b: str, x: str, y: str) -> str:
        key = self.tm_key(a, b, x, y)
        self._tm_reg.setdefault(key, (a, b, x, y))
        return key

    def __post_init__(self):  # dataclass-style guard, kept for clarity
        pass

    def types(self, ctx: str, bound: int) -> list[str]:
        out = []
        for a in self.q.types(ctx, bound):
            za = self.q.ty_size(ctx, a)
            mid = self.q.ext(ctx, a).extended
            for b in self.p.types(mid, bound - za):
                out.append(self._reg_ty(a, b))
        return out

    def terms(self, ctx: str, bound: int) -> list[str]:
        out = []
        for key in self.types(ctx, bound):
            a, b = self._ty_parts(key)
            for x in self.q.terms_of(ctx, a, bound):
                s_x = section(self.q, ctx, x)
                b_at = self.p.subst_ty(s_x, b)
                for y in self.p.terms_of(ctx, b_at, bound):
                    out.append(self._reg_tm(a, b, x, y))
        return out

    def typeof(self, ctx: str, term: str) -> str:
        a, b, _, _ = self._tm_parts(term)
        return self._reg_ty(a, b)

    def ty_size(self, ctx: str, ty: str) -> int:
        a, b = self._ty_parts(ty)
        mid = self.q.ext(ctx, a).extended
        return self.q.ty_size(ctx, a) + self.p.ty_size(mid, b)

    def subst_ty(self, sigma: str, ty: str) -> str:
        a, b = self._ty_parts(ty)
        gamma = self.base.cod(sigma)
        sigma_ext = canonical_pullback(self.q, sigma, a)
        return self._reg_ty(self.q.subst_ty(sigma, a), self.p.subst_ty(sigma_ext, b))

    def subst_tm(self, sigma: str, term: str) -> str:
        a, b, x, y = self._tm_parts(term)
        sigma_ext = canonical_pullback(self.q, sigma, a)
        return self._reg_tm(
            self.q.subst_ty(sigma, a),
            self.p.subst_ty(sigma_ext, b),
            self.q.subst_tm(sigma, x),
            self.p.subst_tm(sigma, y),
        )

    def ext(self, ctx: str, ty: str) -> ExtensionData:
        a, b = self._ty_parts(ty)
        e_q = self.q.ext(ctx, a)
        e_p = self.p.ext(e_q.extended, b)
        proj = self.base.compose(e_q.proj, e_p.proj)
        a_wk = self.q.subst_ty(proj, a)
        b_wk = self.p.subst_ty(canonical_pullback(self.q, proj, a), b)
        x_wk = self.q.subst_tm(e_p.proj, e_q.var)
        return ExtensionData(
            e_p.extended, proj, self._reg_tm(a_wk, b_wk, x_wk, e_p.var)
        )

    def indsub(self, sigma: str, term: str, ty: str) -> Optional[str]:
        a, b = self._ty_parts(ty)
        _, _, x, y = self._tm_parts(term)
        tau1 = induced_sub(self.q, sigma, x, a)
        return induced_sub(self.p, tau1, y, b)


def poly_composite_models(inner_p: NaturalModel, outer_q: NaturalModel) -> CompositeModel:
    """The polynomial composite model (ℂ, q·p); both models must share a base."""
    if inner_p.base is not outer_q.base:
        raise ValueError("polynomial composite requires a shared base category")
    m = CompositeModel(inner_p, outer_q)
    m._ty_reg = {}
    m._tm_reg = {}
    return m
