"""Explicit finite categories, functors, and limits computed by enumeration.

Objects and morphisms are identified by canonical string keys; equality of
keys is equality of cells.  Categories with infinitely many objects are
represented by bounded generators (:class:`BoundedCategory`) that enumerate
objects up to a size bound and produce full finite hom sets on demand;
:func:`truncate` materializes such a generator into a
:class:`FinCatPresentation`.
"""

from __future__ import annotations

import itertools
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional


class BoundedCategory(ABC):
    """A category presented by enumeration.

    Hom sets between any two objects are finite and fully enumerable even
    when the object collection is not; ``objects(bound)`` yields the finite
    fragment of objects whose size is at most ``bound``.
    """

    @property
    @abstractmethod
    def terminal(self) -> Optional[str]:
        """Key of the distinguished terminal object, if any."""

    @abstractmethod
    def objects(self, bound: int) -> list[str]:
        """All object keys of size <= bound, in deterministic order."""

    @abstractmethod
    def hom(self, a: str, b: str) -> list[str]:
        """All morphism keys a -> b, in deterministic order."""

    @abstractmethod
    def dom(self, m: str) -> str: ...

    @abstractmethod
    def cod(self, m: str) -> str: ...

    @abstractmethod
    def identity(self, a: str) -> str: ...

    @abstractmethod
    def compose(self, g: str, f: str) -> str:
        """Composite g after f; requires cod(f) == dom(g)."""

    def obj_size(self, a: str) -> int:
        """The size of an object, as used by ``objects(bound)``."""
        return 0

    def to_terminal(self, a: str) -> str:
        """The unique morphism a -> terminal."""
        t = self.terminal
        if t is None:
            raise ValueError("category has no distinguished terminal object")
        ms = self.hom(a, t)
        if len(ms) != 1:
            raise ValueError(f"expected exactly one morphism {a} -> {t}, found {len(ms)}")
        return ms[0]

    def is_iso(self, m: str) -> Optional[str]:
        """Key of the two-sided inverse of m, or None."""
        a, b = self.dom(m), self.cod(m)
        for w in self.hom(b, a):
            if self.compose(w, m) == self.identity(a) and self.compose(m, w) == self.identity(b):
                return w
        return None


@dataclass
class FinCatPresentation(BoundedCategory):
    """A finite category given by explicit tables.

    ``homs`` maps (src, dst) pairs to morphism key lists; ``compose_table``
    maps (g, f) to the composite g∘f for every composable pair.  A lazy
    ``compose_rule`` may be supplied instead of a full table; composites are
    then computed on demand and cached.
    """

    object_keys: list[str]
    homs: dict[tuple[str, str], list[str]]
    compose_table: dict[tuple[str, str], str]
    identities: dict[str, str]
    terminal_key: Optional[str] = None
    compose_rule: Optional[Callable[[str, str], str]] = None
    _dom: dict[str, str] = field(default_factory=dict, repr=False)
    _cod: dict[str, str] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        for (src, dst), ms in self.homs.items():
            for m in ms:
                self._dom[m] = src
                self._cod[m] = dst

    @property
    def terminal(self) -> Optional[str]:
        return self.terminal_key

    def objects(self, bound: int) -> list[str]:
        return list(self.object_keys)

    def hom(self, a: str, b: str) -> list[str]:
        return list(self.homs.get((a, b), []))

    def dom(self, m: str) -> str:
        return self._dom[m]

    def cod(self, m: str) -> str:
        return self._cod[m]

    def identity(self, a: str) -> str:
        return self.identities[a]

    def compose(self, g: str, f: str) -> str:
        key = (g, f)
        if key in self.compose_table:
            return self.compose_table[key]
        if self.compose_rule is not None:
            out = self.compose_rule(g, f)
            self.compose_table[key] = out
            return out
        raise KeyError(f"no composite for ({g}, {f})")

    def all_morphisms(self) -> list[str]:
        out = []
        for ms in self.homs.values():
            out.extend(ms)
        return out


def check_category(c: FinCatPresentation) -> list[str]:
    """Verify the category laws by enumeration; returns violations (empty = ok)."""
    report: list[str] = []
    seen: dict[str, tuple[str, str]] = {}
    for (src, dst), ms in c.homs.items():
        for m in ms:
            if m in seen and seen[m] != (src, dst):
                report.append(f"morphism {m!r} appears in hom{seen[m]} and hom{(src, dst)}")
            seen[m] = (src, dst)

    for a in c.object_keys:
        i = c.identities.get(a)
        if i is None:
            report.append(f"object {a!r} has no identity")
            continue
        if i not in c.homs.get((a, a), []):
            report.append(f"identity of {a!r} is not in hom({a},{a})")

    morphisms = [(m, src, dst) for (src, dst), ms in c.homs.items() for m in ms]

    def try_compose(g: str, f: str):
        try:
            return c.compose(g, f)
        except KeyError:
            report.append(f"no composite recorded for ({g}, {f})")
            return None

    for m, src, dst in morphisms:
        if try_compose(m, c.identities[src]) != m:
            report.append(f"unit law: {m} ∘ id_{src} != {m}")
        if try_compose(c.identities[dst], m) != m:
            report.append(f"unit law: id_{dst} ∘ {m} != {m}")

    for f, fs, ft in morphisms:
        for g, gs, gt in morphisms:
            if gs != ft:
                continue
            gf = try_compose(g, f)
            if gf is None:
                continue
            if gf not in c.homs.get((fs, gt), []):
                report.append(f"composite {g} ∘ {f} = {gf!r} missing from hom({fs},{gt})")
                continue
            for h, hs, ht in morphisms:
                if hs != gt:
                    continue
                h_gf = try_compose(h, gf)
                hg = try_compose(h, g)
                hg_f = try_compose(hg, f) if hg is not None else None
                if h_gf != hg_f:
                    report.append(f"associativity fails on ({h}, {g}, {f})")

    if c.terminal_key is not None:
        t = c.terminal_key
        if t not in c.object_keys:
            report.append(f"terminal object {t!r} not among objects")
        else:
            for a in c.object_keys:
                n = len(c.homs.get((a, t), []))
                if n != 1:
                    report.append(f"terminal: |hom({a},{t})| = {n}, expected 1")
    return report


@dataclass
class FinFunctor:
    """A functor between finite category presentations, given by tables."""

    source: FinCatPresentation
    target: FinCatPresentation
    obj_map: dict[str, str]
    mor_map: dict[str, str]
    preserves_terminal: bool = False

    def check(self) -> list[str]:
        report = []
        for a in self.source.object_keys:
            fa = self.obj_map.get(a)
            if fa is None:
                report.append(f"no image for object {a!r}")
                continue
            if self.mor_map.get(self.source.identity(a)) != self.target.identity(fa):
                report.append(f"identity of {a!r} not preserved")
        morphisms = self.source.all_morphisms()
        for m in morphisms:
            fm = self.mor_map.get(m)
            if fm is None:
                report.append(f"no image for morphism {m!r}")
                continue
            if self.target.dom(fm) != self.obj_map[self.source.dom(m)] or \
               self.target.cod(fm) != self.obj_map[self.source.cod(m)]:
                report.append(f"image of {m!r} has wrong endpoints")
        for f in morphisms:
            for g in morphisms:
                if self.source.dom(g) != self.source.cod(f):
                    continue
                lhs = self.mor_map[self.source.compose(g, f)]
                rhs = self.target.compose(self.mor_map[g], self.mor_map[f])
                if lhs != rhs:
                    report.append(f"composition not preserved on ({g}, {f})")
        if self.preserves_terminal:
            if self.source.terminal_key is None or self.target.terminal_key is None:
                report.append("terminal preservation requested but a terminal object is missing")
            elif self.obj_map[self.source.terminal_key] != self.target.terminal_key:
                report.append("distinguished terminal object not preserved")
        return report


def truncate(cat: BoundedCategory, bound: int) -> FinCatPresentation:
    """Materialize the fragment of `cat` on objects of size <= bound."""
    objs = cat.objects(bound)
    obj_set = set(objs)
    homs: dict[tuple[str, str], list[str]] = {}
    for a in objs:
        for b in objs:
            ms = cat.hom(a, b)
            if ms:
                homs[(a, b)] = ms
    identities = {a: cat.identity(a) for a in objs}
    term = cat.terminal if (cat.terminal in obj_set) else None

    def rule(g: str, f: str) -> str:
        return cat.compose(g, f)

    return FinCatPresentation(
        object_keys=objs,
        homs=homs,
        compose_table={},
        identities=identities,
        terminal_key=term,
        compose_rule=rule,
    )


def is_pullback_square(
    c: BoundedCategory,
    bound: int,
    apex: str,
    to_left: str,
    to_top: str,
    left_leg: str,
    top_leg: str,
) -> bool:
    """Universal-property check for a commuting square, by enumeration.

    Shape::

        apex --to_top--> Y
          |              |
       to_left        top_leg
          v              v
          X --left_leg-> Z

    Requires ``left_leg ∘ to_left == top_leg ∘ to_top``.  Competing cones are
    drawn from all objects of size <= bound.
    """
    x, y = c.cod(to_left), c.cod(to_top)
    if c.compose(left_leg, to_left) != c.compose(top_leg, to_top):
        return False
    for q in c.objects(bound):
        for q1 in c.hom(q, x):
            lhs = c.compose(left_leg, q1)
            for q2 in c.hom(q, y):
                if lhs != c.compose(top_leg, q2):
                    continue
                mediating = [
                    h for h in c.hom(q, apex)
                    if c.compose(to_left, h) == q1 and c.compose(to_top, h) == q2
                ]
                if len(mediating) != 1:
                    return False
    return True


def pullback(
    c: FinCatPresentation, f: str, g: str
) -> Optional[tuple[str, str, str]]:
    """A pullback of the cospan (f, g), found by exhaustive cone search.

    Returns (apex object, projection to dom(f), projection to dom(g)) for the
    first cone (in enumeration order) satisfying the universal property
    against all competing cones in the category, or None if there is none.
    """
    if c.cod(f) != c.cod(g):
        raise ValueError("pullback requires a cospan: cod(f) must equal cod(g)")
    x, y = c.dom(f), c.dom(g)
    n = len(c.object_keys)
    for apex in c.object_keys:
        for p1 in c.hom(apex, x):
            fp1 = c.compose(f, p1)
            for p2 in c.hom(apex, y):
                if fp1 != c.compose(g, p2):
                    continue
                if is_pullback_square(c, n, apex, p1, p2, f, g):
                    return (apex, p1, p2)
    return None


def product(c: FinCatPresentation, x: str, y: str) -> Optional[tuple[str, str, str]]:
    """A product of x and y, found by exhaustive cone search.

    Returns (object, projection to x, projection to y) for the first span
    satisfying the universal property, or None.
    """
    for apex in c.object_keys:
        for p1 in c.hom(apex, x):
            for p2 in c.hom(apex, y):
                if _is_product_cone(c, apex, p1, p2, x, y):
                    return (apex, p1, p2)
    return None


def _is_product_cone(c: FinCatPresentation, apex: str, p1: str, p2: str, x: str, y: str) -> bool:
    for q in c.object_keys:
        for q1 in c.hom(q, x):
            for q2 in c.hom(q, y):
                mediating = [
                    h for h in c.hom(q, apex)
                    if c.compose(p1, h) == q1 and c.compose(p2, h) == q2
                ]
                if len(mediating) != 1:
                    return False
    return True


class FinSliceOpposite(BoundedCategory):
    """The category (Fin/I)^op for a finite index set I, as a bounded generator.

    Objects are finite sets over I, skeletally presented: the object key
    ``fs[i0,i1,...]`` stands for the set {0,..,n-1} with labelling function
    k |-> ik.  A morphism (A,u) -> (B,v) is a label-preserving function
    B -> A (direction reversed by the op).  Object size is the cardinality
    of the underlying set.
    """

    def __init__(self, index: Iterable[int]):
        self.index = tuple(sorted(set(index)))
        self._hom_cache: dict[tuple[str, str], list[str]] = {}
        self._fn_cache: dict[str, tuple[int, ...]] = {}
        self._compose_cache: dict[tuple[str, str], str] = {}

    # -- key helpers ---------------------------------------------------
    @staticmethod
    def obj_key(labels: tuple[int, ...]) -> str:
        return "fs[" + ",".join(str(i) for i in labels) + "]"

    @staticmethod
    def obj_labels(key: str) -> tuple[int, ...]:
        inner = key[3:-1]
        if not inner:
            return ()
        return tuple(int(s) for s in inner.split(","))

    @staticmethod
    def mor_key(src: str, dst: str, fn: tuple[int, ...]) -> str:
        return f"{src}=>{dst}:(" + ",".join(str(k) for k in fn) + ")"

    def mor_fn(self, m: str) -> tuple[int, ...]:
        fn = self._fn_cache.get(m)
        if fn is None:
            inner = m.rsplit(":(", 1)[1][:-1]
            fn = tuple(int(s) for s in inner.split(",")) if inner else ()
            self._fn_cache[m] = fn
        return fn

    # -- BoundedCategory interface --------------------------------------
    @property
    def terminal(self) -> str:
        return self.obj_key(())

    def obj_size(self, a: str) -> int:
        return len(self.obj_labels(a))

    def objects(self, bound: int) -> list[str]:
        out = []
        for n in range(bound + 1):
            for labels in itertools.product(self.index, repeat=n):
                out.append(self.obj_key(labels))
        return out

    def hom(self, a: str, b: str) -> list[str]:
        key = (a, b)
        cached = self._hom_cache.get(key)
        if cached is not None:
            return list(cached)
        u = self.obj_labels(a)
        v = self.obj_labels(b)
        # functions underlying(b) -> underlying(a) over I
        candidates_per_slot = []
        ok = True
        for lb in v:
            slots = tuple(k for k, la in enumerate(u) if la == lb)
            if not slots:
                ok = False
                break
            candidates_per_slot.append(slots)
        if not ok and v:
            self._hom_cache[key] = []
            return []
        out = [self.mor_key(a, b, fn) for fn in itertools.product(*candidates_per_slot)]
        self._hom_cache[key] = out
        return list(out)

    def dom(self, m: str) -> str:
        return m.split("=>", 1)[0]

    def cod(self, m: str) -> str:
        return m.split("=>", 1)[1].rsplit(":(", 1)[0]

    def identity(self, a: str) -> str:
        n = len(self.obj_labels(a))
        return self.mor_key(a, a, tuple(range(n)))

    def compose(self, g: str, f: str) -> str:
        # f : X -> Y, g : Y -> Z; underlying functions fb : Y* -> X*, gb : Z* -> Y*
        out = self._compose_cache.get((g, f))
        if out is not None:
            return out
        if self.dom(g) != self.cod(f):
            raise ValueError(f"not composable: {g} after {f}")
        fb = self.mor_fn(f)
        gb = self.mor_fn(g)
        fn = tuple(fb[k] for k in gb)
        out = self.mor_key(self.dom(f), self.cod(g), fn)
        self._compose_cache[(g, f)] = out
        return out
