import itertools

import pytest

from natmod.fincat import FinSliceOpposite, truncate
from natmod.presheaf import (
    NatTrans,
    Presheaf,
    check_pullback_square,
    check_pullback_square_by_cones,
    compose_nat,
    element_nat,
    elements_cat,
    identity_nat,
    is_representable,
    pullback_presheaves,
    sum_nat_trans,
    sum_presheaves,
    yoneda,
    yoneda_map,
)
from natmod.fincat import check_category

from helpers import chain_poset, diamond_lattice


def constant_presheaf(base, elems):
    values = {o: list(elems) for o in base.object_keys}
    action = {m: {x: x for x in elems} for m in base.all_morphisms()}
    return Presheaf(base, values, action)


def unique_map(base, src: Presheaf, dst: Presheaf) -> NatTrans:
    comps = {
        o: {x: dst.at(o)[0] for x in src.at(o)} for o in base.object_keys
    }
    return NatTrans(src, dst, comps)


class TestYoneda:
    def test_yoneda_at_terminal_is_constant_singleton(self):
        base = chain_poset(3)
        y = yoneda(base, "2")
        for o in base.object_keys:
            assert len(y.at(o)) == 1
        assert y.check() == []

    def test_yoneda_values_are_hom_sets(self):
        base = truncate(FinSliceOpposite({0}), 3)
        for c in base.object_keys:
            y = yoneda(base, c)
            for d in base.object_keys:
                assert len(y.at(d)) == len(base.hom(d, c))

    def test_yoneda_counts_in_truncated_fin_op(self):
        # hom((B), (A)) in Fin^op is the set of plain functions A -> B, so
        # the representable at the 2-element object counts |d| ** 2.
        gen = FinSliceOpposite({0})
        base = truncate(gen, 3)
        c = gen.obj_key((0, 0))
        y = yoneda(base, c)
        for d in base.object_keys:
            assert len(y.at(d)) == len(gen.obj_labels(d)) ** 2

    def test_yoneda_faithfulness_at_desk_scale(self):
        base = truncate(FinSliceOpposite({0}), 3)
        for c in base.object_keys:
            for cprime in base.object_keys:
                yc = yoneda(base, c)
                ycp = yoneda(base, cprime)
                seen = {}
                for m in base.hom(c, cprime):
                    nt = yoneda_map(base, m, yc, ycp)
                    sig = tuple(
                        (o, x, nt.apply(o, x)) for o in base.object_keys for x in yc.at(o)
                    )
                    assert sig not in seen, f"{m} and {seen[sig]} induce the same map"
                    seen[sig] = m


class TestElementsCat:
    def test_projection_is_a_functor(self):
        base = chain_poset(3)
        p = yoneda(base, "1")
        cat, proj = elements_cat(p)
        assert check_category(cat) == []
        assert proj.check() == []

    def test_elements_of_representable_matches_slice(self):
        # elements of y(c) over a poset = objects below c
        base = diamond_lattice()
        cat, _ = elements_cat(yoneda(base, "a"))
        assert len(cat.object_keys) == 2  # 0 and a


class TestPullbackSquareOracle:
    def test_identity_square_passes(self):
        base = chain_poset(2)
        p = yoneda(base, "1")
        q = yoneda(base, "0")
        f = yoneda_map(base, "0<=1", q, p)
        assert check_pullback_square(f, f, identity_nat(q), identity_nat(q))

    def test_padded_fibre_fails(self):
        base = chain_poset(2)
        y1 = yoneda(base, "1")
        y0 = yoneda(base, "0")
        f = yoneda_map(base, "0<=1", y0, y1)
        # pad the candidate apex with an extra element over object "0"
        padded_values = {o: list(y0.at(o)) for o in base.object_keys}
        padded_values["0"] = padded_values["0"] + ["ghost"]
        action = {}
        for m in base.all_morphisms():
            amap = dict(y0.action[m])
            if base.cod(m) == "0":
                amap["ghost"] = y0.at(base.dom(m))[0] if base.dom(m) != "0" else "ghost"
            action[m] = amap
        padded = Presheaf(base, padded_values, action)
        left = NatTrans(padded, y0, {
            o: {x: y0.at(o)[0] for x in padded.at(o)} for o in base.object_keys
        })
        top = NatTrans(padded, y0, left.components)
        good_left = identity_nat(y0)
        assert check_pullback_square(f, f, good_left, good_left)
        assert not check_pullback_square(f, f, top, left)

    def test_oracle_agrees_with_cone_chaser(self):
        base = diamond_lattice()
        y1 = yoneda(base, "1")
        ya = yoneda(base, "a")
        y0 = yoneda(base, "0")
        f = yoneda_map(base, "a<=1", ya, y1)
        x = yoneda_map(base, "b<=1", yoneda(base, "b"), y1)
        # pullback of a and b over 1 is 0, giving a genuine pullback square
        left = yoneda_map(base, "0<=b", y0, x.dom)
        top = yoneda_map(base, "0<=a", y0, ya)
        assert check_pullback_square(f, x, top, left)
        assert check_pullback_square_by_cones(f, x, top, left)
        # and a non-example
        bad_top = NatTrans(y0, ya, {
            o: {h: ya.at(o)[0] for h in y0.at(o)} if y0.at(o) and ya.at(o) else {}
            for o in base.object_keys
        })
        assert check_pullback_square(f, x, bad_top, left) == \
            check_pullback_square_by_cones(f, x, bad_top, left)


class TestRepresentability:
    def test_identity_is_representable_with_trivial_witness(self):
        base = chain_poset(3)
        p = yoneda(base, "1")
        rep = is_representable(identity_nat(p))
        assert rep.ok
        for e in rep.entries:
            assert e.witness_obj == e.obj
            assert e.witness_mor == base.identity(e.obj)
            assert e.witness_elem == e.element

    def test_yoneda_image_maps_are_representable_over_a_lattice(self):
        base = diamond_lattice()
        y1 = yoneda(base, "1")
        ya = yoneda(base, "a")
        f = yoneda_map(base, "a<=1", ya, y1)
        assert is_representable(f).ok

    def test_constant_two_element_presheaf_not_representable(self):
        # over the discrete two-object category there is no "product-like"
        # representing object, so 2 -> 1 has a non-representable fibre
        from helpers import poset_category
        base = poset_category(["u", "v"], lambda x, y: x == y)
        two = constant_presheaf(base, ["e0", "e1"])
        one = constant_presheaf(base, ["*"])
        nt = unique_map(base, two, one)
        rep = is_representable(nt)
        assert not rep.ok
        assert rep.failures()


class TestSumsAndPullbacks:
    def test_sum_with_empty_presheaf_is_isomorphic_copy(self):
        base = chain_poset(2)
        p = yoneda(base, "1")
        empty = Presheaf(base, {o: [] for o in base.object_keys},
                         {m: {} for m in base.all_morphisms()})
        total, (inj, _) = sum_presheaves([p, empty])
        for o in base.object_keys:
            assert len(total.at(o)) == len(p.at(o))
        assert total.check() == []
        assert inj.check() == []

    def test_pullback_of_p_along_itself_is_kernel_pair(self):
        base = chain_poset(2)
        y1 = yoneda(base, "1")
        y0 = yoneda(base, "0")
        f = yoneda_map(base, "0<=1", y0, y1)
        apex, p1, p2 = pullback_presheaves(f, f)
        for o in base.object_keys:
            fibre_sizes = {}
            for x in y0.at(o):
                v = f.apply(o, x)
                fibre_sizes[v] = fibre_sizes.get(v, 0) + 1
            assert len(apex.at(o)) == sum(n * n for n in fibre_sizes.values())
        assert apex.check() == []
        assert p1.check() == []

    def test_one_plus_p_values(self):
        base = chain_poset(2)
        y1 = yoneda(base, "1")
        y0 = yoneda(base, "0")
        one = constant_presheaf(base, ["*"])
        f = yoneda_map(base, "0<=1", y0, y1)
        one_plus_p = sum_nat_trans([identity_nat(one), f])
        for o in base.object_keys:
            assert len(one_plus_p.dom.at(o)) == 1 + len(y0.at(o))

    def test_closure_under_sum_composite_and_pullback(self):
        # over the chain poset, representables glue exactly (no truncation)
        base = chain_poset(3)
        y0, y1, y2 = (yoneda(base, k) for k in ["0", "1", "2"])
        q = yoneda_map(base, "0<=1", y0, y1)
        p = yoneda_map(base, "1<=2", y1, y2)
        assert is_representable(p).ok and is_representable(q).ok
        assert is_representable(compose_nat(p, q)).ok
        assert is_representable(sum_nat_trans([p, p])).ok
        two = constant_presheaf(base, ["e0", "e1"])
        into = NatTrans(two, y2, {
            o: {x: y2.at(o)[0] for x in two.at(o)} for o in base.object_keys
        })
        apex, pr1, pr2 = pullback_presheaves(into, p)
        assert is_representable(pr1).ok


class TestTermModelClassifier:
    def test_witness_search_recovers_the_chosen_extension_data(self):
        # on the truncated term model, the representability search finds,
        # for each in-bound fibre with room, exactly the construction's
        # (extension, projection, variable); boundary fibres are reported
        # as failures with the truncation caveat
        from natmod.freemodel import term_model
        from natmod.natmodel import model_presheaves

        m = term_model(range(1))
        ps = model_presheaves(m, 2, 1)
        rep = is_representable(ps.p)
        assert "verified up to" in rep.bound_note
        for entry in rep.entries:
            size = len(m.base.obj_labels(entry.obj))
            e = m.ext(entry.obj, entry.element)
            if size < 2:
                assert entry.found
                assert entry.witness_obj == e.extended
                assert entry.witness_mor == e.proj
                assert entry.witness_elem == e.var
            else:
                # the witness would escape the truncation
                assert not entry.found


class TestOracleSoundness:
    def test_cone_chaser_agrees_on_term_model_extension_squares(self):
        # the fibrewise oracle and the definition-chasing verifier agree on
        # every extension square of the truncated term model
        from natmod.freemodel import term_model
        from natmod.natmodel import model_presheaves

        m = term_model(range(1))
        ps = model_presheaves(m, 2, 1)
        for g in m.base.objects(1):
            for ty in m.types(g, 1):
                e = m.ext(g, ty)
                x_nt = element_nat(ps.cat, ps.ty, g, ty, ps.yon[g])
                top = element_nat(ps.cat, ps.tm, e.extended, e.var, ps.yon[e.extended])
                left = yoneda_map(ps.cat, e.proj, ps.yon[e.extended], ps.yon[g])
                fast = check_pullback_square(ps.p, x_nt, top, left)
                slow = check_pullback_square_by_cones(ps.p, x_nt, top, left)
                assert fast and slow
