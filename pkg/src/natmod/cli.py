"""Command-line workbench: load descriptions, run constructions and checks.

Three command families:

* ``natmod check MODEL.json`` — category laws, the equational theory, the
  representability oracle on every extension square.
* ``natmod free KIND ...`` — run a free construction and its
  universal-property verifier; optionally serialize the result.
* ``natmod poly SUBCMD ...`` — polynomial operations: extension counts,
  composition with the extension-preservation check, Beck–Chevalley and
  distributivity witnesses on seeded random instances, pseudomonad data.

Exit codes: 0 if all checks pass, 1 on a check failure, 2 on a parse error.
``NATMOD_BOUND`` overrides the default bound.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
import time
from typing import Optional

from . import freemodel, modelio, polyset
from .fincat import check_category, truncate
from .morphism import check_morphism, count_morphisms
from .natmodel import check_eat, check_sigma, check_unit, extension_square_oracle
from .report import VerificationReport


DEFAULT_BOUND = 3


def _default_bound() -> int:
    env = os.environ.get("NATMOD_BOUND")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return DEFAULT_BOUND


def _emit(report: VerificationReport, args) -> int:
    text = (
        report.to_machine(with_timing=args.timing)
        if args.format == "machine"
        else report.to_text(with_timing=args.timing)
    )
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if report.ok else 1


def _load_base(spec: str):
    """A base model from 'term-model:N' or a model file path."""
    if spec.startswith("term-model:"):
        n = int(spec.split(":", 1)[1])
        return freemodel.term_model(range(n))
    with open(spec) as fh:
        return modelio.parse_model(fh.read())


def cmd_check(args) -> int:
    t0 = time.time()
    try:
        with open(args.model) as fh:
            model = modelio.parse_model(fh.read())
    except (OSError, modelio.ParseError) as exc:
        sys.stderr.write(f"parse error: {exc}\n")
        return 2
    from .modelio import BOUNDARY_RANK

    report = VerificationReport("check", args.bound, args.seed)
    cat_violations = check_category(truncate(model.base, BOUNDARY_RANK))
    report.add("category-laws", not cat_violations,
               "; ".join(cat_violations[:3]))
    # a file is a fragment: the theory's quantifiers range over the objects
    # whose extension data is complete; boundary objects only receive maps
    eat = check_eat(model, 0, ty_bound=args.bound)
    for eq, msgs in sorted(eat.violations.items()):
        report.add(f"eat-{eq}", False, msgs[0])
    report.add("eat", eat.ok, f"{len(eat.violations)} violated equations" if not eat.ok else "")
    oracle = extension_square_oracle(model, BOUNDARY_RANK, args.bound, 0)
    report.add(
        "representability-oracle", oracle.ok,
        f"{len(oracle.checked)} squares checked, {len(oracle.skipped)} outside the truncation",
    )
    report.timing_s = time.time() - t0
    return _emit(report, args)


def cmd_free(args) -> int:
    t0 = time.time()
    try:
        base = _load_base(args.base)
    except (OSError, ValueError, modelio.ParseError) as exc:
        sys.stderr.write(f"parse error: {exc}\n")
        return 2
    bound = args.bound
    report = VerificationReport(f"free-{args.kind}", bound, args.seed)
    model = None

    if args.kind == "term-model":
        model = base
        eat = check_eat(model, bound)
        report.add("eat", eat.ok)
        oracle = extension_square_oracle(model, bound + 1, bound, bound)
        report.add("representability-oracle", oracle.ok,
                   f"{len(oracle.checked)} squares")
        images = {i: model.ty_key(i) for i in model.index}
        pins = freemodel.initiality_pins(model, model, images)
        rivals = count_morphisms(model, model, min(bound, 2), pins)
        report.add("initiality-selfmap-unique", rivals == 1, f"count={rivals}")
    elif args.kind == "term":
        if not args.type:
            sys.stderr.write("parse error: --type is required for 'term'\n")
            return 2
        model = freemodel.extend_by_term(base, args.type)
        eat = check_eat(model, bound)
        report.add("eat", eat.ok)
        incl = freemodel.term_inclusion(model)
        report.add("inclusion-strict", check_morphism(incl, min(bound, 2)).ok)
        sharp = freemodel.extend_term_universal(model, incl, model.x_term)
        report.add("mediating-strict", check_morphism(sharp, min(bound, 2)).ok)
        ub = min(bound, 2)
        pins = freemodel.term_universal_pins(model, incl, model.x_term, ub)
        rivals = count_morphisms(model, model, ub, pins)
        report.add("universal-property-unique", rivals == 1, f"count={rivals}")
    elif args.kind == "type":
        model = freemodel.extend_by_type(base)
        eat = check_eat(model, bound)
        report.add("eat", eat.ok)
        incl = freemodel.interleaved_inclusion(model)
        report.add("inclusion-strict", check_morphism(incl, min(bound, 2)).ok)
        sharp = freemodel.type_universal(model, incl, model.new_ty)
        report.add("mediating-strict", check_morphism(sharp, min(bound, 2)).ok)
        ub = min(bound, 2)
        pins = freemodel.interleaved_universal_pins(model, incl, ub, sharp)
        rivals = count_morphisms(model, model, ub, pins)
        report.add("universal-property-unique", rivals == 1, f"count={rivals}")
    elif args.kind == "unit":
        model = freemodel.extend_by_unit(base)
        eat = check_eat(model, bound)
        report.add("eat", eat.ok)
        report.add("unit-structure", check_unit(model, model.unit_structure, bound).ok)
        incl = freemodel.interleaved_inclusion(model)
        sharp = freemodel.unit_universal(model, incl)
        report.add("mediating-strict", check_morphism(sharp, min(bound, 2)).ok)
        ub = min(bound, 2)
        pins = freemodel.interleaved_universal_pins(model, incl, ub, sharp)
        rivals = count_morphisms(model, model, ub, pins)
        report.add("universal-property-unique", rivals == 1, f"count={rivals}")
    elif args.kind == "sigma":
        model = freemodel.extend_by_sigma(base)
        eat = check_eat(model, min(bound, 2))
        report.add("eat", eat.ok)
        report.add(
            "sigma-structure",
            check_sigma(model, model.sigma_structure, min(bound, 2)).ok,
        )
        incl = freemodel.sigma_inclusion(model)
        sharp = freemodel.sigma_universal(model, incl, bound)
        report.add("mediating-strict", check_morphism(sharp, min(bound, 2)).ok)
        ub = min(bound, 2)
        pins = freemodel.sigma_universal_pins(model, incl, ub, sharp)
        rivals = count_morphisms(model, model, ub, pins)
        report.add("universal-property-unique", rivals == 1, f"count={rivals}")
    elif args.kind == "poly-compose":
        model = freemodel.poly_composite_models(base, base)
        eat = check_eat(model, bound)
        report.add("eat", eat.ok)
        oracle = extension_square_oracle(model, bound, bound - 1, bound - 1)
        report.add("representability-oracle", oracle.ok,
                   f"{len(oracle.checked)} squares")
    else:
        sys.stderr.write(f"parse error: unknown construction {args.kind!r}\n")
        return 2

    if args.out_model and model is not None:
        with open(args.out_model, "w") as fh:
            fh.write(modelio.serialize_model(model, min(args.bound, 2)))
    report.timing_s = time.time() - t0
    return _emit(report, args)


def cmd_poly(args) -> int:
    t0 = time.time()
    rng = random.Random(args.seed)
    report = VerificationReport(f"poly-{args.subcmd}", args.bound, args.seed)

    def load(path):
        with open(path) as fh:
            return modelio.parse_polynomial(fh.read())

    try:
        if args.subcmd == "extend":
            p = load(args.files[0])
            sizes = [int(s) for s in (args.family or "1").split(",")]
            if len(sizes) != len(p.I):
                raise modelio.ParseError(
                    f"--family needs {len(p.I)} sizes, got {len(sizes)}"
                )
            family = {i: tuple(f"x{i}.{k}" for k in range(sizes[idx]))
                      for idx, i in enumerate(p.I)}
            ext = polyset.extend(p, family)
            for j in p.J:
                report.add(f"component-{j}", True, f"{len(ext[j])} elements")
        elif args.subcmd == "compose":
            g = load(args.files[0])
            f = load(args.files[1])
            gf = polyset.compose(g, f)
            report.add("composite", True,
                       f"positions={len(gf.A)} directions={len(gf.B)}")
            family = polyset.random_family(rng, f.I, args.bound)
            isos = polyset.compose_extension_iso(g, f, family)
            ok = all(
                len(fwd.dom) == len(fwd.cod) and fwd.is_bijection()
                for fwd, _ in isos.values()
            )
            report.add("extension-preserves-composition", ok)
        elif args.subcmd == "verify-bc":
            failures = 0
            for k in range(args.count):
                v, f, u, g = polyset.random_pullback_square(rng, args.bound)
                family = polyset.random_family(rng, u.dom, args.bound)
                sums, prods = polyset.beck_chevalley_witness(v, f, u, g, family)
                if not (sums.check_roundtrips() and prods.check_roundtrips()):
                    failures += 1
            report.add("beck-chevalley", failures == 0,
                       f"{args.count} instances, {failures} failures")
        elif args.subcmd == "verify-dist":
            failures = 0
            for k in range(args.count):
                sizes = args.bound
                b = tuple(f"b{i}" for i in range(rng.randint(1, sizes)))
                a = tuple(f"a{i}" for i in range(rng.randint(1, sizes)))
                c = tuple(f"c{i}" for i in range(rng.randint(0, sizes)))
                u = polyset.random_fin_map(rng, c, b)
                f = polyset.random_fin_map(rng, b, a)
                family = polyset.random_family(rng, c, sizes)
                w = polyset.distributivity_witness(u, f, family)
                if not w.check_roundtrips():
                    failures += 1
            report.add("distributivity", failures == 0,
                       f"{args.count} instances, {failures} failures")
        elif args.subcmd == "pseudomonad":
            for name, data in [
                ("trivial", polyset.trivial_pseudomonad()),
                ("partiality", polyset.partiality_pseudomonad()),
            ]:
                rep = polyset.check_pseudomonad_data(*data)
                detail = "; ".join(
                    f"{k}:{'ok' if v else 'FAIL'}" for k, v in sorted(rep.checks.items())
                )
                report.add(f"pseudomonad-{name}", rep.ok, detail)
        else:
            sys.stderr.write(f"parse error: unknown subcommand {args.subcmd!r}\n")
            return 2
    except (OSError, modelio.ParseError, ValueError) as exc:
        sys.stderr.write(f"parse error: {exc}\n")
        return 2
    report.timing_s = time.time() - t0
    return _emit(report, args)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="natmod",
        description="workbench for natural models over finite categories",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--bound", type=int, default=_default_bound())
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=["text", "machine"], default="text")
        p.add_argument("--out", default=None, help="write the report to a file")
        p.add_argument("--timing", action="store_true",
                       help="include timing (breaks bit-for-bit reproducibility)")

    p_check = sub.add_parser("check", help="verify a model description file")
    p_check.add_argument("model")
    common(p_check)
    p_check.set_defaults(fn=cmd_check)

    p_free = sub.add_parser("free", help="run a free construction and its verifier")
    p_free.add_argument(
        "kind",
        choices=["term-model", "term", "type", "unit", "sigma", "poly-compose"],
    )
    p_free.add_argument("--base", default="term-model:1",
                        help="'term-model:N' or a model file path")
    p_free.add_argument("--type", default=None,
                        help="closed type key (for 'term')")
    p_free.add_argument("--out-model", default=None,
                        help="serialize the constructed model to this path")
    common(p_free)
    p_free.set_defaults(fn=cmd_free)

    p_poly = sub.add_parser("poly", help="polynomial operations and witnesses")
    p_poly.add_argument(
        "subcmd",
        choices=["extend", "compose", "verify-bc", "verify-dist", "pseudomonad"],
    )
    p_poly.add_argument("files", nargs="*")
    p_poly.add_argument("--family", default=None,
                        help="comma-separated family sizes (for 'extend')")
    p_poly.add_argument("--count", type=int, default=50)
    common(p_poly)
    p_poly.set_defaults(fn=cmd_poly)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
