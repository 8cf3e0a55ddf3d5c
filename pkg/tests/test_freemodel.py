import itertools
import random

import pytest

from natmod.fincat import is_pullback_square
from natmod.freemodel import (
    TypeTree,
    extend_by_sigma,
    extend_by_term,
    extend_by_type,
    extend_by_unit,
    extend_term_universal,
    initial_morphism,
    initiality_pins,
    interleaved_inclusion,
    interleaved_universal_pins,
    poly_composite_models,
    sigma_inclusion,
    sigma_universal,
    sigma_universal_pins,
    substitution_morphism,
    term_inclusion,
    term_model,
    term_universal_pins,
    tree_ext,
    tree_subst,
    tree_summation,
    type_insertion,
    type_universal,
    unit_insertion,
    unit_universal,
)
from natmod.morphism import (
    check_morphism,
    check_sigma_morphism,
    compose_morphisms,
    count_morphisms,
    identity_morphism,
)
from natmod.natmodel import (
    check_eat,
    check_sigma,
    check_unit,
    extension_square_oracle,
)


class TestTermModel:
    def test_empty_index_gives_terminal_base(self):
        m = term_model(range(0))
        assert m.base.objects(3) == [m.base.obj_key(())]
        assert m.types(m.terminal, 3) == []
        assert m.terms(m.terminal, 3) == []

    def test_singleton_index_is_fin_op_with_constant_types(self):
        m = term_model(range(1))
        # objects at bound n: one per cardinality
        assert len(m.base.objects(3)) == 4
        for g in m.base.objects(3):
            assert m.types(g, 3) == ["T0"]
            assert len(m.terms(g, 3)) == len(m.base.obj_labels(g))

    def test_extension_data_appends_a_fresh_labelled_element(self):
        m = term_model(range(2))
        g = m.base.obj_key((0, 1))
        e = m.ext(g, "T1")
        assert m.base.obj_labels(e.extended) == (0, 1, 1)
        # the projection is the left inclusion
        assert m.base.mor_fn(e.proj) == (0, 1)
        assert e.var == "x2"

    def test_initiality_counts_for_three_targets(self):
        tm = term_model(range(2))
        targets = [
            (term_model(range(2)), {0: "T0", 1: "T1"}),
            (term_model(range(1)), {0: "T0", 1: "T0"}),
        ]
        u = extend_by_unit(term_model(range(0)))
        targets.append((u, {0: u.new_ty, 1: u.new_ty}))
        for target, images in targets:
            fm = initial_morphism(tm, target, images)
            assert check_morphism(fm, 2).ok
            assert count_morphisms(tm, target, 2, initiality_pins(tm, target, images)) == 1


class TestExtendByTerm:
    def setup_method(self):
        self.u = extend_by_unit(term_model(range(0)))
        self.ext = extend_by_term(self.u, self.u.new_ty)

    def test_types_are_types_of_the_weakened_context(self):
        # ty (Γ; ...) equals ty of the inner context extended by the new type
        key = self.ext.terminal
        under = self.ext.base.under(key)
        assert self.ext.types(key, 2) == self.u.types(under, 2)

    def test_normal_form_collapse_identifies_weakened_extensions(self):
        # extending (Γ;) by a type that does not mention the variable lands
        # on the inclusion image of the inner extension
        incl = term_inclusion(self.ext)
        g = self.u.terminal
        a = self.u.types(g, 1)[0]
        lifted = incl.on_ty(g, a)
        e = self.ext.ext(incl.on_obj(g), lifted)
        assert e.extended == incl.on_obj(self.u.ext(g, a).extended)

    def test_inclusion_preserves_extension_strictly(self):
        incl = term_inclusion(self.ext)
        rep = check_morphism(incl, 2, strict=True)
        assert rep.ok, rep.checks

    def test_distinguished_term_and_substitution(self):
        s = substitution_morphism(self.ext, self.u._star)
        assert s.on_tm(self.ext.terminal, self.ext.x_term) == self.u._star
        si = compose_morphisms(s, term_inclusion(self.ext))
        for g in self.u.base.objects(2):
            assert si.on_obj(g) == g

    def test_universal_property_with_prescribed_term(self):
        mt = term_model(range(1))
        ext = extend_by_term(mt, "T0")
        target = extend_by_term(extend_by_type(term_model(range(0))), "X")
        fm = initial_morphism(mt, target, {0: "X"})
        sharp = extend_term_universal(ext, fm, "v0")
        assert check_morphism(sharp, 2).ok
        assert sharp.on_tm(ext.terminal, ext.x_term) == "v0"
        pins = term_universal_pins(ext, fm, "v0", 2)
        assert count_morphisms(ext, target, 2, pins) == 1

    def test_functorial_extension_and_substitution_recover_sharp(self):
        # with the identity morphism and o = x, the mediating morphism is
        # the identity (uniqueness forces it)
        sharp = extend_term_universal(
            self.ext, term_inclusion(self.ext), self.ext.x_term
        )
        for g in self.ext.base.objects(2):
            assert sharp.on_obj(g) == g


class TestExtendByType:
    def test_types_gain_exactly_the_new_basic_type(self):
        m = term_model(range(1))
        xm = extend_by_type(m)
        key = xm.terminal
        assert xm.types(key, 2) == [xm.new_ty] + m.types(m.terminal, 2)

    def test_terms_gain_one_per_formal_slot(self):
        m = term_model(range(0))
        xm = extend_by_type(m)
        e = xm.ext(xm.terminal, xm.new_ty)
        e2 = xm.ext(e.extended, xm.new_ty)
        assert len(xm.terms(e.extended, 2)) == 1
        assert len(xm.terms(e2.extended, 2)) == 2

    def test_check_eat_passes(self):
        xm = extend_by_type(term_model(range(1)))
        assert check_eat(xm, 2).ok

    def test_type_insertion_retracts_the_inclusion(self):
        m = term_model(range(1))
        xm = extend_by_type(m)
        s = type_insertion(xm, "T0")
        assert s.on_ty(xm.terminal, xm.new_ty) == "T0"
        si = compose_morphisms(s, interleaved_inclusion(xm))
        for g in m.base.objects(2):
            assert si.on_obj(g) == g
            for t in m.types(g, 2):
                assert si.on_ty(g, t) == t

    def test_universal_property(self):
        m0 = term_model(range(0))
        xm = extend_by_type(m0)
        target = term_model(range(1))
        fm = initial_morphism(m0, target, {})
        sharp = type_universal(xm, fm, "T0")
        assert check_morphism(sharp, 2).ok
        assert sharp.on_ty(xm.terminal, xm.new_ty) == "T0"
        pins = interleaved_universal_pins(xm, fm, 2, sharp)
        assert count_morphisms(xm, target, 2, pins) == 1

    def test_sharp_sends_contexts_to_iterated_extensions(self):
        # the free model on one basic type maps onto the term model on one
        # index: a context with k formal slots lands on the k-element object
        m0 = term_model(range(0))
        xm = extend_by_type(m0)
        target = term_model(range(1))
        sharp = type_universal(xm, initial_morphism(m0, target, {}), "T0")
        ctx = xm.terminal
        for k in range(1, 3):
            ctx = xm.ext(ctx, xm.new_ty).extended
            assert sharp.on_obj(ctx) == target.base.obj_key((0,) * k)


class TestExtendByUnit:
    def test_unit_structure_passes(self):
        u = extend_by_unit(term_model(range(1)))
        assert check_eat(u, 2).ok
        assert check_unit(u, u.unit_structure, 2).ok

    def test_formal_unit_projection_is_identity_on_the_underlying_context(self):
        u = extend_by_unit(term_model(range(1)))
        e = u.ext(u.terminal, u.new_ty)
        (s, _) = u.base.mor_payload(e.proj)
        under = u.base.under(u.terminal)
        assert s == u.inner.base.identity(under)

    def test_unit_insertion_retracts_inclusion(self):
        inner = extend_by_unit(term_model(range(0)))
        u2 = extend_by_unit(inner)
        n = unit_insertion(u2)
        assert check_morphism(n, 2).ok
        ni = compose_morphisms(n, interleaved_inclusion(u2))
        for g in inner.base.objects(2):
            assert ni.on_obj(g) == g
            for t in inner.terms(g, 2):
                assert ni.on_tm(g, t) == t

    def test_universal_property(self):
        m0 = term_model(range(0))
        um = extend_by_unit(m0)
        target = extend_by_unit(term_model(range(0)))
        fm = initial_morphism(m0, target, {})
        sharp = unit_universal(um, fm)
        assert check_morphism(sharp, 2).ok
        assert sharp.on_ty(um.terminal, um.new_ty) == target.new_ty
        pins = interleaved_universal_pins(um, fm, 2, sharp)
        assert count_morphisms(um, target, 2, pins) == 1


class TestTypeTrees:
    def setup_method(self):
        self.m = term_model(range(1))
        self.s = extend_by_sigma(self.m)

    def test_leaf_tree_is_ordinary_extension(self):
        g = self.m.base.obj_key((0,))
        ext_m = self.m.ext(g, "T0")
        extended, proj, var = tree_ext(self.m, g, TypeTree(leaf="T0"))
        assert (extended, proj) == (ext_m.extended, ext_m.proj)
        assert var.leaf == ext_m.var

    def test_two_leaf_tree_extends_twice_with_composite_projection(self):
        g = self.m.base.obj_key(())
        t = TypeTree(left=TypeTree(leaf="T0"), right=TypeTree(leaf="T0"))
        extended, proj, _ = tree_ext(self.m, g, t)
        e1 = self.m.ext(g, "T0")
        e2 = self.m.ext(e1.extended, "T0")
        assert extended == e2.extended
        assert proj == self.m.base.compose(e1.proj, e2.proj)

    def test_tree_substitution_functoriality(self):
        rng = random.Random(12)
        m = self.m
        # a three-leaf tree over the empty context
        t = TypeTree(
            left=TypeTree(left=TypeTree(leaf="T0"), right=TypeTree(leaf="T0")),
            right=TypeTree(leaf="T0"),
        )
        g = m.base.obj_key(())
        for d1 in m.base.objects(2):
            for sig in m.base.hom(d1, g):
                for d2 in m.base.objects(2):
                    for tau in m.base.hom(d2, d1):
                        lhs = tree_subst(m, m.base.compose(sig, tau), t)
                        rhs = tree_subst(m, tau, tree_subst(m, sig, t))
                        assert lhs.key == rhs.key

    def test_sigma_model_passes_eat_and_sigma(self):
        assert check_eat(self.s, 2).ok
        assert check_sigma(self.s, self.s.sigma_structure, 2).ok

    def test_non_associativity_witness(self):
        # [[A,B],C] and [A,[B,C]] are distinct type keys, but the extended
        # contexts are isomorphic (found by hom enumeration)
        s = self.s
        g = s.terminal
        leaf = TypeTree(leaf="T0")
        ll = TypeTree(left=TypeTree(left=leaf, right=leaf), right=leaf)
        rr = TypeTree(left=leaf, right=TypeTree(left=leaf, right=leaf))
        kl, kr = s.reg_ty(ll), s.reg_ty(rr)
        assert kl != kr
        el = s.ext(g, kl).extended
        er = s.ext(g, kr).extended
        iso = None
        for h in s.base.hom(el, er):
            if s.base.is_iso(h):
                iso = h
                break
        assert iso is not None

    def test_pairing_restricts_to_fibre_bijections(self):
        # over each context, pair̂ bijects Σ_t terms(B[s_t]) with the fibre
        # of the classifier over the dependent sum
        s = self.s
        g = s.base.register(self.m.base.obj_key((0,)), ())
        st = s.sigma_structure
        for ty_a in s.types(g, 1):
            ext_a = s.ext(g, ty_a).extended
            for ty_b in s.types(ext_a, 1):
                sig = st.sigma(g, ty_a, ty_b)
                pairs = []
                for a in s.terms_of(g, ty_a, 1):
                    from natmod.natmodel import section

                    b_ty = s.subst_ty(section(s, g, a), ty_b)
                    for b in s.terms_of(g, b_ty, 2):
                        pairs.append(st.pair(g, ty_a, ty_b, a, b))
                fibre = s.terms_of(g, sig, 2)
                assert sorted(pairs) == sorted(fibre)
                assert len(set(pairs)) == len(pairs)

    def test_tree_summation_collapses_two_leaf_trees(self):
        s2 = extend_by_sigma(self.s)
        summ = tree_summation(s2, bound=3)
        assert check_sigma_morphism(summ, 2)

    def test_sigma_universal_property(self):
        s = self.s
        incl = sigma_inclusion(s)
        sharp = sigma_universal(s, incl, bound=3)
        assert check_morphism(sharp, 2).ok
        for c in s.base.objects(2):
            assert sharp.on_obj(c) == c
        pins = sigma_universal_pins(s, incl, 2, sharp)
        assert count_morphisms(s, s, 2, pins) == 1


class TestPolyCompositeModels:
    def test_composite_of_term_model_with_itself(self):
        m = term_model(range(1))
        comp = poly_composite_models(m, m)
        assert check_eat(comp, 2).ok
        assert extension_square_oracle(comp, 3, 2, 2).ok

    def test_projection_factors_through_both_extensions(self):
        m = term_model(range(1))
        comp = poly_composite_models(m, m)
        g = m.base.obj_key(())
        ty = comp.types(g, 2)[0]
        e = comp.ext(g, ty)
        a, b = comp._ty_parts(ty)
        e_q = m.ext(g, a)
        e_p = m.ext(e_q.extended, b)
        assert e.extended == e_p.extended
        assert e.proj == m.base.compose(e_q.proj, e_p.proj)

    def test_composite_variable_projects_to_the_constituent_data(self):
        m = term_model(range(1))
        comp = poly_composite_models(m, m)
        g = m.base.obj_key(())
        ty = comp.types(g, 2)[0]
        e = comp.ext(g, ty)
        a, b = comp._ty_parts(ty)
        e_q = m.ext(g, a)
        e_p = m.ext(e_q.extended, b)
        a2, b2, x2, y2 = comp._tm_parts(e.var)
        assert x2 == m.subst_tm(e_p.proj, e_q.var)
        assert y2 == e_p.var
        assert a2 == m.subst_ty(e.proj, a)


class TestFreeFunctorsPreserveInitiality:
    def test_term_model_with_term_equals_free_types_and_terms_model(self):
        # the free model on one basic type and one term of it, built as the
        # term extension of the term model, admits a unique strict morphism
        # in each direction against itself (mutual uniqueness at the bound)
        mt = term_model(range(1))
        free = extend_by_term(mt, "T0")
        pins = term_universal_pins(
            free, term_inclusion(free), free.x_term, 2
        )
        assert count_morphisms(free, free, 2, pins) == 1


class TestMutualUniqueness:
    def test_relabelled_term_extensions_are_mutually_unique(self):
        # the free model on two basic types and a term of the first admits
        # exactly one generator-respecting morphism to and from the free
        # model with the term on the second type
        mt = term_model(range(2))
        m1 = extend_by_term(mt, "T0")
        m2 = extend_by_term(mt, "T1")
        swap = {0: "T1", 1: "T0"}
        for src, dst in ((m1, m2), (m2, m1)):
            fm = initial_morphism(mt, dst, swap)
            sharp = extend_term_universal(src, fm, dst.x_term)
            assert check_morphism(sharp, 2).ok
            pins = term_universal_pins(src, fm, dst.x_term, 2)
            assert count_morphisms(src, dst, 2, pins) == 1


class TestSubstitutionAsMediator:
    def test_sharp_of_the_identity_is_the_substitution_morphism(self):
        # the mediating morphism for the identity with an arbitrary closed
        # term agrees with the substitution morphism on all four sorts
        base = extend_by_term(extend_by_type(term_model(range(0))), "X")
        ext = extend_by_term(base, "X")
        o = base.terms(base.terminal, 1)[0]
        s_o = substitution_morphism(ext, o)
        sharp = extend_term_universal(ext, identity_morphism(base), o)
        for g in ext.base.objects(2):
            assert sharp.on_obj(g) == s_o.on_obj(g)
            for t in ext.types(g, 1):
                assert sharp.on_ty(g, t) == s_o.on_ty(g, t)
            for t in ext.terms(g, 1):
                assert sharp.on_tm(g, t) == s_o.on_tm(g, t)
        for a in ext.base.objects(2):
            for b in ext.base.objects(2):
                for mm in ext.base.hom(a, b):
                    assert sharp.on_mor(mm) == s_o.on_mor(mm)

    def test_substitution_retracts_inclusion_on_all_four_sorts(self):
        u = extend_by_unit(term_model(range(0)))
        ext = extend_by_term(u, u.new_ty)
        s = substitution_morphism(ext, u._star)
        si = compose_morphisms(s, term_inclusion(ext))
        for g in u.base.objects(2):
            assert si.on_obj(g) == g
            for t in u.types(g, 2):
                assert si.on_ty(g, t) == t
            for t in u.terms(g, 2):
                assert si.on_tm(g, t) == t
        for a in u.base.objects(2):
            for b in u.base.objects(2):
                for mm in u.base.hom(a, b):
                    assert si.on_mor(mm) == mm


class TestNestedConstructions:
    def test_two_basic_type_extensions_use_fresh_keys(self):
        inner = extend_by_type(term_model(range(0)))
        outer = extend_by_type(inner)
        assert inner.new_ty != outer.new_ty
        assert check_eat(outer, 2).ok
        tys = outer.types(outer.terminal, 2)
        assert inner.new_ty in tys and outer.new_ty in tys

    def test_unit_over_sigma_keeps_the_sum_checker_green(self):
        s = extend_by_sigma(term_model(range(1)))
        u = extend_by_unit(s)
        assert check_eat(u, 2).ok
        assert check_unit(u, u.unit_structure, 2).ok


class TestSigmaOverUnit:
    def test_leaf_unit_structure_survives_the_tree_construction(self):
        # the configuration behind the polynomial pseudomonad: a model with
        # both a unit type and dependent sums; the inner unit lifts to leaf
        # trees and still satisfies the unit equations and pullback square
        from natmod.natmodel import UnitStructure

        u = extend_by_unit(term_model(range(0)))
        s = extend_by_sigma(u)
        from natmod.freemodel import TypeTree, TermTree

        unit_leaf = s.reg_ty(TypeTree(leaf=u.new_ty))
        star_leaf = s.reg_tm(TermTree(leaf=u._star))
        lifted = UnitStructure(unit_leaf, star_leaf)
        assert check_unit(s, lifted, 2).ok
        assert check_sigma(s, s.sigma_structure, 2).ok
