"""Law-style property tests over randomly generated finite data."""

import random

from hypothesis import given, settings, strategies as st

from natmod.fincat import FinSliceOpposite, truncate
from natmod.freemodel import TypeTree, term_model, tree_subst
from natmod.polyset import (
    beck_chevalley_witness,
    chosen_pullback,
    compose_map,
    distributivity_witness,
    extend,
    extend_map,
    fin_map,
    identity_map,
    lemma_join_quadruple,
    lemma_map_into_extension,
    lemma_pair_into_extension,
    lemma_split_quadruple,
    poly_from_map,
    quadruple_object,
    random_family,
    random_fin_map,
)


@st.composite
def fin_maps(draw, max_size=4):
    n_dom = draw(st.integers(0, max_size))
    n_cod = draw(st.integers(1, max_size))
    dom = tuple(f"d{i}" for i in range(n_dom))
    cod = tuple(f"c{i}" for i in range(n_cod))
    values = [draw(st.integers(0, n_cod - 1)) for _ in range(n_dom)]
    return fin_map(dom, cod, {x: cod[v] for x, v in zip(dom, values)})


@st.composite
def composable_pairs(draw, max_size=4):
    f = draw(fin_maps(max_size))
    n_cod = draw(st.integers(1, max_size))
    cod = tuple(f"e{i}" for i in range(n_cod))
    values = [draw(st.integers(0, n_cod - 1)) for _ in range(len(f.cod))]
    g = fin_map(f.cod, cod, {x: cod[v] for x, v in zip(f.cod, values)})
    return g, f


class TestFinMapLaws:
    @given(fin_maps())
    def test_identity_laws(self, f):
        assert compose_map(f, identity_map(f.dom)).mapping == f.mapping
        assert compose_map(identity_map(f.cod), f).mapping == f.mapping

    @given(composable_pairs())
    def test_pullback_projections_commute(self, pair):
        g, f = pair
        # complete f and a parallel copy of itself to the chosen pullback
        apex, p1, p2 = chosen_pullback(g, g)
        assert compose_map(g, p1).mapping == compose_map(g, p2).mapping


class TestExtensionFunctoriality:
    @given(fin_maps(3), st.integers(0, 3), st.integers(0, 3))
    @settings(max_examples=40, deadline=None)
    def test_extension_preserves_identity_and_composite(self, f, n1, n2):
        p = poly_from_map(f)
        xs = {"*": tuple(f"x{i}" for i in range(n1))}
        ys = {"*": tuple(f"y{i}" for i in range(max(n2, 1)))}
        zs = {"*": ("z0",)}
        ident = extend_map(p, xs, xs, {"*": identity_map(xs["*"])})["*"]
        assert ident.mapping == identity_map(extend(p, xs)["*"]).mapping
        rng = random.Random(n1 * 7 + n2)
        phi = {"*": random_fin_map(rng, xs["*"], ys["*"])}
        psi = {"*": random_fin_map(rng, ys["*"], zs["*"])}
        left = extend_map(p, xs, zs, {"*": compose_map(psi["*"], phi["*"])})["*"]
        right = compose_map(
            extend_map(p, ys, zs, psi)["*"], extend_map(p, xs, ys, phi)["*"]
        )
        assert left.mapping == right.mapping


class TestCorrespondenceRoundtrips:
    @given(fin_maps(3), st.integers(0, 2), st.integers(0, 2), st.randoms())
    @settings(max_examples=30, deadline=None)
    def test_extension_splitting_roundtrip(self, f, nx, ny, pyrng):
        xs = tuple(f"x{i}" for i in range(nx))
        pfx = extend(poly_from_map(f), {"*": xs})["*"]
        if not pfx:
            return
        y = tuple(f"y{i}" for i in range(ny))
        g = fin_map(y, pfx, {yy: pyrng.choice(pfx) for yy in y})
        g1, g2 = lemma_map_into_extension(f, xs, g)
        back = lemma_pair_into_extension(f, xs, g1, g2)
        assert back.mapping == g.mapping

    @given(fin_maps(3), st.integers(0, 2), st.randoms())
    @settings(max_examples=30, deadline=None)
    def test_quadruple_roundtrip(self, f, ny, pyrng):
        q = quadruple_object(f)
        if not q:
            return
        y = tuple(f"y{i}" for i in range(ny))
        g = fin_map(y, q, {yy: pyrng.choice(q) for yy in y})
        parts = lemma_split_quadruple(f, g)
        assert lemma_join_quadruple(f, *parts).mapping == g.mapping


class TestWitnessNaturality:
    @given(st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_beck_chevalley_commutes_with_family_maps(self, seed):
        rng = random.Random(seed)
        from natmod.polyset import random_pullback_square

        v, f, u, g = random_pullback_square(rng, 3)
        fam = random_family(rng, u.dom, 2)
        fam2 = random_family(rng, u.dom, 2, tag="y")
        try:
            phi = {a: random_fin_map(rng, fam[a], fam2[a]) for a in u.dom}
        except ValueError:
            return
        s1, _ = beck_chevalley_witness(v, f, u, g, fam)
        s2, _ = beck_chevalley_witness(v, f, u, g, fam2)
        fd = f.as_dict
        for d in g.dom:
            fwd1, fwd2 = s1.forward[d], s2.forward[d]
            for (a, x) in fwd1.dom:
                lhs = fwd2((a, phi[a](x)))
                b, x2 = fwd1((a, x))
                assert lhs == (b, phi[fd[b]](x))

    @given(st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_distributivity_commutes_with_family_maps(self, seed):
        rng = random.Random(seed)
        b = tuple(f"b{i}" for i in range(rng.randint(1, 3)))
        a = tuple(f"a{i}" for i in range(rng.randint(1, 3)))
        c = tuple(f"c{i}" for i in range(rng.randint(0, 3)))
        u = random_fin_map(rng, c, b)
        f = random_fin_map(rng, b, a)
        fam = random_family(rng, c, 2)
        fam2 = random_family(rng, c, 2, tag="y")
        try:
            phi = {ci: random_fin_map(rng, fam[ci], fam2[ci]) for ci in c}
        except ValueError:
            return
        w1 = distributivity_witness(u, f, fam)
        w2 = distributivity_witness(u, f, fam2)
        for a_el in f.cod:
            for sec in w1.forward[a_el].dom:
                # act on the left-hand side: map each chosen element
                acted = tuple((bb, (cx[0], phi[cx[0]](cx[1]))) for bb, cx in sec)
                m1, s1 = w1.forward[a_el](sec)
                m2, s2 = w2.forward[a_el](acted)
                assert m2 == m1
                assert s2 == tuple((bb, phi[dict(m1)[bb]](x)) for bb, x in s1)


class TestTreeSubstitutionLaws:
    @given(st.integers(0, 1000))
    @settings(max_examples=20, deadline=None)
    def test_three_leaf_tree_functoriality(self, seed):
        rng = random.Random(seed)
        m = term_model(range(2))
        shapes = [
            TypeTree(left=TypeTree(left=TypeTree(leaf="T0"), right=TypeTree(leaf="T1")),
                     right=TypeTree(leaf="T0")),
            TypeTree(left=TypeTree(leaf="T1"),
                     right=TypeTree(left=TypeTree(leaf="T0"), right=TypeTree(leaf="T1"))),
        ]
        t = shapes[seed % 2]
        g = m.base.obj_key(())
        ctxs = m.base.objects(2)
        d1 = rng.choice(ctxs)
        sigmas = m.base.hom(d1, g)
        if not sigmas:
            return
        sig = rng.choice(sigmas)
        d2 = rng.choice(ctxs)
        taus = m.base.hom(d2, d1)
        if not taus:
            return
        tau = rng.choice(taus)
        lhs = tree_subst(m, m.base.compose(sig, tau), t)
        rhs = tree_subst(m, tau, tree_subst(m, sig, t))
        assert lhs.key == rhs.key
