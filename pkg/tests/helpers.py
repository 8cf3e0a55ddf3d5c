"""Shared builders for small hand-made categories used across the test suite."""

from __future__ import annotations

import itertools

from natmod.fincat import FinCatPresentation


def poset_category(elements, leq) -> FinCatPresentation:
    """The category of a finite poset: one morphism a->b iff leq(a, b)."""
    objs = [str(e) for e in elements]
    homs = {}
    identities = {}
    for a in elements:
        for b in elements:
            if leq(a, b):
                homs[(str(a), str(b))] = [f"{a}<={b}"]
    for a in elements:
        identities[str(a)] = f"{a}<={a}"

    def rule(g: str, f: str) -> str:
        src = f.split("<=")[0]
        dst = g.split("<=")[1]
        return f"{src}<={dst}"

    tops = [a for a in elements if all(leq(b, a) for b in elements)]
    return FinCatPresentation(
        object_keys=objs,
        homs=homs,
        compose_table={},
        identities=identities,
        terminal_key=str(tops[0]) if tops else None,
        compose_rule=rule,
    )


def diamond_lattice() -> FinCatPresentation:
    """The four-element lattice 0 < a, b < 1 (a, b incomparable)."""

    order = {
        ("0", "0"), ("0", "a"), ("0", "b"), ("0", "1"),
        ("a", "a"), ("a", "1"),
        ("b", "b"), ("b", "1"),
        ("1", "1"),
    }
    return poset_category(["0", "a", "b", "1"], lambda x, y: (x, y) in order)


def chain_poset(n: int) -> FinCatPresentation:
    """The linear order 0 <= 1 <= ... <= n-1 as a category."""
    return poset_category(list(range(n)), lambda x, y: x <= y)


def one_object_category() -> FinCatPresentation:
    return FinCatPresentation(
        object_keys=["*"],
        homs={("*", "*"): ["id*"]},
        compose_table={("id*", "id*"): "id*"},
        identities={"*": "id*"},
        terminal_key="*",
    )


def broken_unit_category() -> FinCatPresentation:
    """Two objects with a composition table violating a unit law."""
    homs = {
        ("x", "x"): ["idx"],
        ("y", "y"): ["idy", "e"],
        ("x", "y"): ["f"],
    }
    table = {
        ("idx", "idx"): "idx",
        ("idy", "idy"): "idy",
        ("e", "e"): "e",
        ("e", "idy"): "e",
        ("idy", "e"): "e",
        ("f", "idx"): "f",
        ("idy", "f"): "f",
        ("e", "f"): "f",
    }
    # break the right unit law for e: e ∘ idy should be e, redirect it
    table[("e", "idy")] = "idy"
    return FinCatPresentation(
        object_keys=["x", "y"],
        homs=homs,
        compose_table=table,
        identities={"x": "idx", "y": "idy"},
        terminal_key=None,
    )


def finite_sets_model(max_fibre: int = 2):
    """The standard model on finite sets, as a bounded generator.

    Contexts are finite cardinalities (the terminal context is the
    singleton), substitutions are all functions, a type over n is a family
    of fibre sizes bounded by ``max_fibre``, and a term is a choice of an
    element in each fibre.  Extension is the disjoint sum of the fibres in
    lexicographic layout.  Types here genuinely depend on the context, so
    substitution acts non-trivially.
    """
    from natmod.fincat import BoundedCategory
    from natmod.natmodel import ExtensionData, NaturalModel

    class FinSets(BoundedCategory):
        @property
        def terminal(self):
            return "set1"

        def obj_size(self, a):
            return int(a[3:])

        def objects(self, bound):
            return [f"set{n}" for n in range(bound + 1)]

        def hom(self, a, b):
            import itertools

            na, nb = int(a[3:]), int(b[3:])
            return [
                f"{a}=>{b}:{fn}"
                for fn in itertools.product(range(nb), repeat=na)
            ]

        def dom(self, m):
            return m.split("=>")[0]

        def cod(self, m):
            return m.split("=>")[1].split(":")[0]

        def fn(self, m):
            import ast

            return ast.literal_eval(m.split(":", 1)[1])

        def identity(self, a):
            n = int(a[3:])
            return f"{a}=>{a}:{tuple(range(n))}"

        def compose(self, g, f):
            gf = self.fn(g)
            ff = self.fn(f)
            out = tuple(gf[v] for v in ff)
            return f"{self.dom(f)}=>{self.cod(g)}:{out}"

    class FiniteSetsModel(NaturalModel):
        def __init__(self):
            self.base = FinSets()
            self.max_fibre = max_fibre

        @staticmethod
        def _fam(ty):
            import ast

            return ast.literal_eval(ty[3:])

        @staticmethod
        def _sec(tm):
            import ast

            fam, sec = tm[3:].split("|")
            return ast.literal_eval(fam), ast.literal_eval(sec)

        def types(self, ctx, bound):
            import itertools

            n = int(ctx[3:])
            return [
                f"fam{fam}"
                for fam in itertools.product(range(self.max_fibre + 1), repeat=n)
            ]

        def terms(self, ctx, bound):
            import itertools

            out = []
            for ty in self.types(ctx, bound):
                fam = self._fam(ty)
                for sec in itertools.product(*(range(k) for k in fam)):
                    out.append(f"sec{fam}|{sec}")
            return out

        def typeof(self, ctx, term):
            fam, _ = self._sec(term)
            return f"fam{fam}"

        def subst_ty(self, sigma, ty):
            fam = self._fam(ty)
            fn = self.base.fn(sigma)
            return f"fam{tuple(fam[v] for v in fn)}"

        def subst_tm(self, sigma, term):
            fam, sec = self._sec(term)
            fn = self.base.fn(sigma)
            new_fam = tuple(fam[v] for v in fn)
            new_sec = tuple(sec[v] for v in fn)
            return f"sec{new_fam}|{new_sec}"

        def ext(self, ctx, ty):
            fam = self._fam(ty)
            total = sum(fam)
            extended = f"set{total}"
            proj = []
            var = []
            for x, k in enumerate(fam):
                proj.extend([x] * k)
                var.extend(range(k))
            wk_fam = tuple(fam[x] for x in proj)
            return ExtensionData(
                extended,
                f"{extended}=>{ctx}:{tuple(proj)}",
                f"sec{wk_fam}|{tuple(var)}",
            )

        def indsub(self, sigma, term, ty):
            fam = self._fam(ty)
            offsets = []
            acc = 0
            for k in fam:
                offsets.append(acc)
                acc += k
            fn = self.base.fn(sigma)
            _, sec = self._sec(term)
            out = tuple(offsets[fn[d]] + sec[d] for d in range(len(fn)))
            e = self.ext(self.base.cod(sigma), ty)
            return f"{self.base.dom(sigma)}=>{e.extended}:{out}"

    return FiniteSetsModel()
