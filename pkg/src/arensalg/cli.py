"""Command-line front end, ``arensalg <verb> [inputs] [flags]``.

Exit codes: 0 success (for ``regularity`` only when the verdict is Regular),
3 NotRegular, 4 Inconclusive, 1 usage error, 2 invalid input.  JSON reports
carry ``"schema_version": 1`` and are byte-identical for identical inputs;
text reports start with a timestamp line unless ``--no-timestamp`` is given.
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys
from dataclasses import dataclass, field as dc_field
from pathlib import Path

from .algebra import StructureAlgebra, algebra_from_json, truncate, validate
from .arens import biend_of_dual, right_topological_center, topological_center
from .duality import adjoint_density_check, check_biend_inclusion
from .errors import ArensAlgError, ExtractionFailed, InvalidAlgebra
from .modules import bicommutant, classify, commutant, module_from_json, trace_ideal, validate_module
from .regularity import (
    INCONCLUSIVE,
    NOT_REGULAR,
    REGULAR,
    Budget,
    best_functional,
    builtin_family,
    certificate_from_json,
    decide_regularity,
    default_levels,
    extract_self_correcting,
    family_from_spec,
    family_names,
    sample_functionals,
    verify_certificate,
)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_NOT_REGULAR, EXIT_INCONCLUSIVE = 0, 1, 2, 3, 4
VERDICT_EXIT = {REGULAR: EXIT_OK, NOT_REGULAR: EXIT_NOT_REGULAR, INCONCLUSIVE: EXIT_INCONCLUSIVE}


class UsageError(Exception):
    pass


class InputError(Exception):
    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report


@dataclass
class Outcome:
    result: dict
    lines: list = dc_field(default_factory=list)
    code: int = EXIT_OK


# ---------------------------------------------------------------------------
# input helpers


def _load_json(path: str):
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror or e}") from None
    return _parse_json(text, path)


def _parse_json(text: str, where: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"{where}: malformed JSON at line {e.lineno}, column {e.colno} (char {e.pos}): {e.msg}") from None


def _load_algebra(path: str) -> StructureAlgebra:
    obj = _load_json(path)
    try:
        a = algebra_from_json(obj, Path(path).parent)
    except (ValueError, TypeError, KeyError, ZeroDivisionError) as e:
        raise InputError(f"{path}: {e}") from None
    report = validate(a)
    if not report.valid:
        raise InputError(f"{path}: {report.summary()}", report.to_json())
    return a


def _load_module(path: str):
    obj = _load_json(path)
    if not isinstance(obj, dict) or "algebra" not in obj:
        raise InputError(f"{path}: module object needs an 'algebra' entry")
    try:
        u = module_from_json(obj, Path(path).parent)
    except (ValueError, TypeError, KeyError, ZeroDivisionError, OSError) as e:
        raise InputError(f"{path}: {e}") from None
    areport = validate(u.algebra)
    if not areport.valid:
        raise InputError(f"{path}: algebra {areport.summary()}", areport.to_json())
    report = validate_module(u)
    if not report.valid:
        raise InputError(f"{path}: module {report.summary()}", report.to_json())
    return u


def _parse_levels(text: str | None):
    if text is None:
        return None
    try:
        levels = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"--levels expects comma-separated integers, got {text!r}") from None
    if not levels:
        raise UsageError("--levels is empty")
    return tuple(levels)


def _parse_params(text: str | None) -> dict:
    if text is None:
        return {}
    obj = _parse_json(text, "--params")
    if not isinstance(obj, dict):
        raise InputError("--params must be a JSON object")
    return obj


def _family(args):
    """(family, budget from the spec file or None) from ``spec`` or ``--family``."""
    if args.spec is not None and args.family is not None:
        raise UsageError("give either a family spec file or --family, not both")
    if args.spec is not None:
        obj = _load_json(args.spec)
        if not isinstance(obj, dict):
            raise InputError(f"{args.spec}: family spec must be a JSON object")
        return family_from_spec(obj, Path(args.spec).parent)
    if args.family is None:
        raise UsageError(f"{args.verb} needs a family spec file or --family")
    return builtin_family(args.family, _parse_params(args.params)), None


def _budget(args, fam, spec_budget: Budget | None) -> Budget:
    levels = _parse_levels(args.levels)
    base = spec_budget or Budget()
    if levels is None:
        levels = base.levels or default_levels(fam)
    seed = args.seed if args.seed is not None else base.seed
    samples = args.samples if args.samples is not None else base.samples
    if samples < 0:
        raise UsageError("--samples must be non-negative")
    return Budget(levels, seed, samples)


def _matrices(ops) -> list:
    return [m.to_json() for m in ops]


# ---------------------------------------------------------------------------
# verbs


def cmd_check(args) -> Outcome:
    obj = _load_json(args.input)
    try:
        a = algebra_from_json(obj, Path(args.input).parent)
    except (ValueError, TypeError, KeyError, ZeroDivisionError, ArensAlgError) as e:
        raise InputError(f"{args.input}: {e}") from None
    report = validate(a)
    result = {"field": a.field.to_json(), "dim": a.dim, "unit": [a.field.format(x) for x in a.unit],
              "validation": report.to_json()}
    lines = [f"algebra of dimension {a.dim} over {a.field}", report.summary()]
    return Outcome(result, lines, EXIT_OK if report.valid else EXIT_INPUT)


def cmd_commutant(args) -> Outcome:
    u = _load_module(args.input)
    c = commutant(u)
    result = {"module_dim": u.dim, "dim": c.dim, "basis": _matrices(c.inclusion)}
    return Outcome(result, [f"End_R(U) has dimension {c.dim} (U of dimension {u.dim})"])


def cmd_bicommutant(args) -> Outcome:
    u = _load_module(args.input)
    res = bicommutant(u)
    result = {"module_dim": u.dim, "dim": res.biend.dim, "commutant_dim": res.commutant.dim,
              "image_dim": u.image_subspace.dim, "relation": res.relation, "basis": _matrices(res.biend.inclusion)}
    lines = [f"Biend_R(U) has dimension {res.biend.dim}, End_R(U) has dimension {res.commutant.dim}",
             f"image of R has dimension {u.image_subspace.dim}; relation: {res.relation}"]
    return Outcome(result, lines)


def cmd_trace_ideal(args) -> Outcome:
    u = _load_module(args.input)
    t = trace_ideal(u)
    result = {"dim": t.dim, "codim": t.codim, "ideal": t.to_json()}
    return Outcome(result, [f"trace ideal of dimension {t.dim} (codimension {t.codim})"])


def cmd_classify(args) -> Outcome:
    u = _load_module(args.input)
    flags = classify(u)
    result = {"module_dim": u.dim, "flags": flags.to_json()}
    return Outcome(result, [f"{k}: {v}" for k, v in flags.to_json().items()])


def cmd_dual_check(args) -> Outcome:
    u = _load_module(args.input)
    v = _load_module(args.other) if args.other else u
    rep = check_biend_inclusion(u)
    dens = adjoint_density_check(u, v)
    result = {
        "biend_inclusion": rep.to_json(),
        "adjoint_density": {"surjective": dens.surjective, "hom_dim": dens.hom_dim,
                            "dual_hom_dim": dens.dual_hom_dim,
                            "witness": dens.witness.to_json() if dens.witness is not None else None},
    }
    lines = [f"inclusion (i): {rep.inclusion_i} (raw {rep.raw_inclusion_i})",
             f"inclusion (ii): {rep.inclusion_ii} (raw {rep.raw_inclusion_ii})",
             f"Biend dimensions (U, U*): {rep.biend_dims[0]}, {rep.biend_dims[1]}",
             f"every map V* -> U* is an adjoint: {dens.surjective} "
             f"(Hom dims {dens.hom_dim}, {dens.dual_hom_dim})"]
    return Outcome(result, lines)


def cmd_arens_center(args) -> Outcome:
    a = _load_algebra(args.input)
    left, right = topological_center(a), right_topological_center(a)
    result = {"dim": a.dim,
              "left_center": {"dim": left.dim, "basis": left.to_json()},
              "right_center": {"dim": right.dim, "basis": right.to_json()},
              "products_coincide": left.dim == a.dim}
    lines = [f"left topological center: dimension {left.dim} of {a.dim}",
             f"right topological center: dimension {right.dim} of {a.dim}"]
    return Outcome(result, lines)


def cmd_arens_biend(args) -> Outcome:
    a = _load_algebra(args.input)
    rep = biend_of_dual(a)
    result = dict(rep.to_json(), ok=rep.ok)
    lines = [f"Biend_R(R*) dimension {rep.biend_dim}, center image dimension {rep.center_image_dim}, "
             f"equal: {rep.biend_equals_center_image}",
             f"End_R(R*) dimension {rep.lend_dim}, left multiplications {rep.left_mult_dim}, "
             f"equal: {rep.lend_equals_left_mults}"]
    return Outcome(result, lines)


def cmd_regularity(args) -> Outcome:
    fam, spec_budget = _family(args)
    budget = _budget(args, fam, spec_budget)
    verdict = decide_regularity(fam, budget)
    lines = [f"verdict: {verdict.kind} ({verdict.grade})",
             f"levels: {', '.join(map(str, verdict.levels))}",
             f"max ranks: {', '.join(map(str, verdict.ranks))}"]
    if verdict.kind == REGULAR:
        lines.append(f"square-zero ideals of codimension {verdict.codim}; "
                     f"compatible with the tower maps: {verdict.tower_compatible}")
    if verdict.translate_dims is not None:
        lines.append(f"dim R.rho: {', '.join(map(str, verdict.translate_dims))}")
    if verdict.reason:
        lines.append(f"reason: {verdict.reason}")
    return Outcome(verdict.to_json(), lines, VERDICT_EXIT[verdict.kind])


def _extract_source(args):
    if args.input is not None:
        if args.family is not None or args.spec is not None:
            raise UsageError("give an algebra file or a family, not both")
        a = _load_algebra(args.input)
        return a, {"algebra": a.to_json()}, a.dim
    if args.level is None:
        raise UsageError("extraction from a family needs --level")
    fam, _ = _family(args)
    return truncate(fam, args.level), {"family": fam.to_json(), "level": args.level}, args.level


def cmd_extract(args) -> Outcome:
    a, source, level = _extract_source(args)
    seed = args.seed or 0
    samples = 8 if args.samples is None else args.samples
    if args.witness is not None:
        try:
            witness = tuple(a.field.parse(x) for x in args.witness.split(","))
        except (ValueError, ZeroDivisionError) as e:
            raise InputError(f"--witness: {e}") from None
        if len(witness) != a.dim:
            raise InputError(f"--witness has {len(witness)} entries for an algebra of dimension {a.dim}")
    else:
        _, witness = best_functional(a, sample_functionals(a, level, seed, samples))
    cert, attempts = extract_self_correcting(a, witness, args.n0, seed=seed, samples=samples)
    cert.diagnostics.setdefault("family_level", level)
    result = {"source": source, "witness": [a.field.format(x) for x in witness],
              "attempts": [{"rank": t.rank, "outcome": t.outcome, "branch": t.branch} for t in attempts],
              "certificate": cert.to_json()}
    lines = [f"square-zero ideal of dimension {cert.ideal.dim}, codimension {cert.codim}",
             f"verified: {', '.join(f'{k}={v}' for k, v in cert.verified.items())}",
             f"attempts: {len(attempts)}, final rank {attempts[-1].rank}, branch {attempts[-1].branch}"]
    return Outcome(result, lines)


def _certificates_in(obj) -> list[tuple[dict, dict]]:
    """Pairs (certificate json, source json) found in a report or a bare certificate."""
    if "ideal" in obj and "codim" in obj:
        return [(obj, {})]
    body = obj.get("result", obj)
    if "certificate" in body:
        return [(body["certificate"], body.get("source", {}))]
    family = body.get("family")
    return [(c, {"family": family, "level": c.get("diagnostics", {}).get("family_level")})
            for c in body.get("certificates", [])]


def cmd_verify_cert(args) -> Outcome:
    obj = _load_json(args.input)
    if not isinstance(obj, dict):
        raise InputError(f"{args.input}: expected a report or a certificate object")
    explicit = _load_algebra(args.algebra) if args.algebra else None
    spec_family = None
    if args.spec is not None:
        spec_family, _ = family_from_spec(_load_json(args.spec), Path(args.spec).parent)
    pairs = _certificates_in(obj)
    if not pairs:
        raise InputError(f"{args.input}: no certificate found")
    checks = []
    for cert_json, source in pairs:
        if explicit is not None:
            a = explicit
        elif "algebra" in source:
            a = algebra_from_json(source["algebra"])
        elif spec_family is not None and source.get("level") is not None:
            a = truncate(spec_family, source["level"])
        elif source.get("family") and source.get("level") is not None:
            fam = source["family"]
            a = truncate(builtin_family(fam["family"], fam.get("params", {})), source["level"])
        else:
            raise UsageError("cannot locate the algebra of a certificate; pass --algebra or --spec")
        try:
            cert = certificate_from_json(cert_json)
        except (KeyError, ValueError, TypeError) as e:
            raise InputError(f"{args.input}: malformed certificate ({e})") from None
        checks.append({"level": cert.level, "codim": cert.codim, "valid": verify_certificate(a, cert)})
    ok = all(c["valid"] for c in checks)
    lines = [f"certificate at dimension {c['level']} (codimension {c['codim']}): "
             f"{'valid' if c['valid'] else 'INVALID'}" for c in checks]
    return Outcome({"certificates": checks, "all_valid": ok}, lines, EXIT_OK if ok else EXIT_INPUT)


def cmd_family_list(args) -> Outcome:
    names = family_names()
    return Outcome({"families": names}, names)


VERBS = {
    "check": (cmd_check, "validate an algebra file"),
    "commutant": (cmd_commutant, "End_R(U) of a module"),
    "bicommutant": (cmd_bicommutant, "Biend_R(U) of a module"),
    "trace-ideal": (cmd_trace_ideal, "trace ideal of a left module"),
    "classify": (cmd_classify, "faithful/torsionless/T-accessible/generator/projective flags"),
    "dual-check": (cmd_dual_check, "biendomorphism inclusions and adjoint density"),
    "arens-center": (cmd_arens_center, "topological centers of the bidual"),
    "arens-biend": (cmd_arens_biend, "Biend_R(R*) against the topological center"),
    "regularity": (cmd_regularity, "Arens regularity verdict for a truncation family"),
    "extract": (cmd_extract, "square-zero ideal certificate at one level"),
    "verify-cert": (cmd_verify_cert, "re-verify certificates from a report"),
    "family-list": (cmd_family_list, "names of the builtin families"),
}


# ---------------------------------------------------------------------------
# parsing and output


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--out", help="write the report to this path instead of stdout")
    common.add_argument("--no-timestamp", action="store_true", help="omit the timestamp line of text reports")

    budget = _Parser(add_help=False)
    budget.add_argument("--seed", type=int)
    budget.add_argument("--samples", type=int)

    family = _Parser(add_help=False)
    family.add_argument("--family", help="builtin family name")
    family.add_argument("--params", help="family parameters as a JSON object")

    parser = _Parser(prog="arensalg", description="Exact computations with structure-constant algebras.")
    sub = parser.add_subparsers(dest="verb", parser_class=_Parser)
    for verb, (_, text) in VERBS.items():
        parents = [common]
        if verb in ("regularity", "extract"):
            parents += [budget, family]
        p = sub.add_parser(verb, help=text, description=text, parents=parents)
        if verb in ("check", "commutant", "bicommutant", "trace-ideal", "classify", "dual-check",
                    "arens-center", "arens-biend", "verify-cert"):
            p.add_argument("input")
        if verb == "dual-check":
            p.add_argument("--other", help="second module V for the adjoint density check (default U)")
        if verb == "regularity":
            p.add_argument("spec", nargs="?", help="family spec JSON file")
            p.add_argument("--levels", help="comma-separated levels, e.g. 4,8,16")
        if verb == "extract":
            p.add_argument("input", nargs="?", help="algebra JSON file")
            p.add_argument("--spec", help="family spec JSON file")
            p.add_argument("--level", type=int)
            p.add_argument("--witness", help="comma-separated coordinates of the functional")
            p.add_argument("--n0", type=int, help="claimed maximal rank (default: the witness's rank)")
        if verb == "verify-cert":
            p.add_argument("--algebra", help="algebra JSON file the certificate refers to")
            p.add_argument("--spec", help="family spec JSON file the report refers to")
    return parser


def _render(verb: str, outcome: Outcome, fmt: str, timestamp: bool) -> str:
    if fmt == "json":
        doc = {"schema_version": SCHEMA_VERSION, "command": verb, "exit_code": outcome.code,
               "result": outcome.result}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    lines = []
    if timestamp:
        lines.append(f"# generated {datetime.datetime.now(datetime.timezone.utc).isoformat(timespec='seconds')}")
    lines.append(f"arensalg {verb}")
    lines.extend(f"  {line}" for line in outcome.lines)
    return "\n".join(lines) + "\n"


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    if args.verb is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    handler = VERBS[args.verb][0]
    for name in ("spec", "family", "params", "input", "level"):
        if not hasattr(args, name):
            setattr(args, name, None)
    try:
        outcome = handler(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as e:
        outcome = Outcome({"error": str(e), "report": e.report}, [f"invalid input: {e}"], EXIT_INPUT)
        print(f"invalid input: {e}", file=sys.stderr)
    except ExtractionFailed as e:
        outcome = Outcome({"error": str(e), "diagnostic": e.diagnostic}, [f"extraction failed: {e}"],
                          EXIT_INCONCLUSIVE)
    except InvalidAlgebra as e:
        report = e.report.to_json() if hasattr(e.report, "to_json") else e.report
        outcome = Outcome({"error": str(e), "report": report}, [f"invalid input: {e}"], EXIT_INPUT)
        print(f"invalid input: {e}", file=sys.stderr)
    except (ArensAlgError, ValueError, KeyError, TypeError, ZeroDivisionError) as e:
        message = e.args[0] if isinstance(e, KeyError) and e.args else str(e)
        outcome = Outcome({"error": f"{type(e).__name__}: {message}"}, [f"invalid input: {message}"], EXIT_INPUT)
        print(f"invalid input: {type(e).__name__}: {message}", file=sys.stderr)
    _emit(_render(args.verb, outcome, args.format, not args.no_timestamp), args.out)
    return outcome.code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
