"""``fibertor`` command line.

Input is a JSON document (file path, inline text, or ``-`` for stdin) with
named sections:

``matrix``
    nested integer arrays (big integers may be decimal strings)
``polynomial``
    integer coefficients, constant term first
``automorphism``
    ``{"rank": 2, "kind": "free", "images": ["ab", "b"]}``; ``kind`` may be
    ``"closed"`` (rank = 2 * genus); ``inverse_images`` is optional for free
    groups
``braid``
    ``{"strands": 3, "word": [1, -2]}``, an alternative to ``automorphism``
``fiber``
    ``{"kind": "free", "rank": 2}`` or ``{"kind": "closed", "genus": 2}``
``cover``
    ``{"kind": "homology" | "coinvariant", "modulus": N}``,
    ``{"kind": "permutation", "permutations": [[...], ...]}`` or
    ``{"kind": "abelian", "projection": [[...]], "moduli": [...]}``
``characters``
    list of characters, each a list of ``[num, mod]`` pairs
``chi_abs``, ``n``
    inputs of ``bound``

Exit status: 0 success, 1 domain error, 2 schema error, 3 scale cap refused.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import math
import os
import re
import sys
from dataclasses import dataclass
from typing import Any

from .. import alexander as alx
from .. import covers as cov
from .. import tower as tw
from ..errors import FibertorError, UnsupportedScaleError
from ..group import Automorphism, SurfacePresentation
from ..intpoly import DEFAULT_TOL, IntPoly, mahler_measure
from ..linalg import IntMatrix, char_poly, smith_normal_form
from . import serialize

COMMAND_HELP = {
    "snf": "Smith normal form and cokernel of a matrix",
    "charpoly": "characteristic polynomial of a matrix",
    "mahler": "certified Mahler measure of a polynomial or matrix",
    "classify": "cyclotomic, unipotent or non-cyclotomic monodromy",
    "torus": "homology of one mapping torus",
    "tower-cyclic": "cyclic tower up to --kmax",
    "tower-abelian": "abelian towers for --moduli",
    "cover-build": "build a finite cover of the fiber",
    "cover-lift": "lift the automorphism to a cover and summarize it",
    "alexander": "Alexander polynomial and character values",
    "search-lift": "look for a cover with a non-cyclotomic lift",
    "bound": "torsion growth bound from --lambda0",
}

COMMANDS = ("snf", "charpoly", "mahler", "classify", "torus", "tower-cyclic", "tower-abelian",
            "cover-build", "cover-lift", "alexander", "search-lift", "bound")

TOWER_COLUMNS = ("index", "degree", "betti", "torsion_order", "normalized_log_torsion",
                 "fiber_components", "bound")

EXIT_OK, EXIT_DOMAIN, EXIT_SCHEMA, EXIT_SCALE = 0, 1, 2, 3


class SchemaError(Exception):
    """The input document or the flags do not match the schema."""


@serialize.register
@dataclass(frozen=True)
class AlexanderReport:
    """Output of the ``alexander`` command."""

    variables: tuple[str, ...]
    matrix: alx.AlexanderMatrix
    polynomial: alx.LaurentPoly | None
    characters: tuple[alx.Character, ...] = ()
    evaluations: tuple[alx.ComplexPoly, ...] = ()


# ---------------------------------------------------------------- input

_INT_RE = re.compile(r"^[+-]?\d+$")


def _int(x: Any, where: str) -> int:
    if isinstance(x, bool):
        raise SchemaError(f"{where}: expected an integer, got a boolean")
    if isinstance(x, int):
        return x
    if isinstance(x, str) and _INT_RE.match(x.strip()):
        return int(x)
    raise SchemaError(f"{where}: expected an integer or a decimal string, got {x!r}")


def _int_list(x: Any, where: str) -> list[int]:
    if not isinstance(x, list):
        raise SchemaError(f"{where}: expected an array")
    return [_int(v, f"{where}[{i}]") for i, v in enumerate(x)]


def _matrix(x: Any, where: str = "matrix") -> IntMatrix:
    if not isinstance(x, list) or not x:
        raise SchemaError(f"{where}: expected a non-empty array of rows")
    rows = [_int_list(r, f"{where}[{i}]") for i, r in enumerate(x)]
    if any(len(r) != len(rows[0]) for r in rows):
        raise SchemaError(f"{where}: rows have different lengths")
    return IntMatrix.from_rows(rows)


def load_document(source: str) -> dict:
    if source == "-":
        text = sys.stdin.read()
    elif os.path.isfile(source):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = source
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"input is neither a readable file nor a JSON document: {exc}") from None
    if not isinstance(doc, dict):
        raise SchemaError("input document must be a JSON object of named sections")
    return doc


def _fiber(doc: dict) -> SurfacePresentation | None:
    f = doc.get("fiber")
    if f is None:
        return None
    if not isinstance(f, dict):
        raise SchemaError("fiber: expected an object")
    kind = f.get("kind", "free")
    if kind == "free":
        return SurfacePresentation.free(_int(f.get("rank"), "fiber.rank"))
    if kind == "closed":
        if "genus" in f:
            return SurfacePresentation.closed(_int(f["genus"], "fiber.genus"))
        rank = _int(f.get("rank"), "fiber.rank")
        if rank % 2:
            raise SchemaError("fiber.rank of a closed surface must be even")
        return SurfacePresentation.closed(rank // 2)
    raise SchemaError(f"fiber.kind must be 'free' or 'closed', got {kind!r}")


def _automorphism(doc: dict, required: bool = True) -> Automorphism | None:
    if "automorphism" in doc:
        a = doc["automorphism"]
        if not isinstance(a, dict):
            raise SchemaError("automorphism: expected an object")
        images = a.get("images")
        if not isinstance(images, list) or not all(isinstance(w, str) for w in images):
            raise SchemaError("automorphism.images: expected an array of words")
        rank = _int(a.get("rank", len(images)), "automorphism.rank")
        kind = a.get("kind", "free")
        if kind == "free":
            base = SurfacePresentation.free(rank)
        elif kind == "closed":
            if rank % 2:
                raise SchemaError("automorphism.rank of a closed surface must be even")
            base = SurfacePresentation.closed(rank // 2)
        else:
            raise SchemaError(f"automorphism.kind must be 'free' or 'closed', got {kind!r}")
        inv = a.get("inverse_images")
        if inv is not None and (not isinstance(inv, list) or not all(isinstance(w, str) for w in inv)):
            raise SchemaError("automorphism.inverse_images: expected an array of words")
        if inv is None and base.is_closed:
            raise SchemaError("automorphism.inverse_images is required for closed surfaces")
        return Automorphism.from_images(base, images, inv)
    if "braid" in doc:
        b = doc["braid"]
        if not isinstance(b, dict):
            raise SchemaError("braid: expected an object")
        strands = _int(b.get("strands"), "braid.strands")
        word = _int_list(b.get("word"), "braid.word")
        return Automorphism.from_braid(strands, word)
    if required:
        raise SchemaError("this command needs an 'automorphism' or 'braid' section")
    return None


def _monodromy(doc: dict) -> IntMatrix:
    if "matrix" in doc:
        return _matrix(doc["matrix"])
    a = _automorphism(doc, required=False)
    if a is None:
        raise SchemaError("this command needs a 'matrix', 'automorphism' or 'braid' section")
    return a.abelianization_matrix()


def _cover_spec(doc: dict, base: SurfacePresentation, a: Automorphism | None,
                moduli: list[int] | None) -> cov.CoverSpec:
    c = doc.get("cover")
    if c is None:
        if not moduli:
            raise SchemaError("this command needs a 'cover' section or --moduli")
        if len(moduli) != 1:
            raise SchemaError("--moduli must name exactly one modulus here")
        N = moduli[0]
        return cov.coinvariant_cover_spec(a, N) if a is not None else cov.CoverSpec.abelian(base, N)
    if not isinstance(c, dict):
        raise SchemaError("cover: expected an object")
    kind = c.get("kind")
    if kind == "homology":
        return cov.CoverSpec.abelian(base, _int(c.get("modulus"), "cover.modulus"))
    if kind == "coinvariant":
        if a is None:
            raise SchemaError("a coinvariant cover needs an automorphism")
        return cov.coinvariant_cover_spec(a, _int(c.get("modulus"), "cover.modulus"))
    if kind == "permutation":
        perms = c.get("permutations")
        if not isinstance(perms, list):
            raise SchemaError("cover.permutations: expected an array of permutations")
        return cov.CoverSpec.permutation(
            base, [_int_list(p, f"cover.permutations[{i}]") for i, p in enumerate(perms)])
    if kind == "abelian":
        return cov.CoverSpec.from_quotient(base, _matrix(c.get("projection"), "cover.projection"),
                                           _int_list(c.get("moduli"), "cover.moduli"))
    if kind == "trivial":
        return cov.CoverSpec.trivial(base)
    raise SchemaError("cover.kind must be one of homology, coinvariant, permutation, abelian, trivial")


def _characters(doc: dict) -> list[alx.Character]:
    raw = doc.get("characters", [])
    if not isinstance(raw, list):
        raise SchemaError("characters: expected an array")
    out = []
    for i, ch in enumerate(raw):
        if not isinstance(ch, list):
            raise SchemaError(f"characters[{i}]: expected an array of [num, mod] pairs")
        pairs = []
        for j, v in enumerate(ch):
            if not isinstance(v, list) or len(v) != 2:
                raise SchemaError(f"characters[{i}][{j}]: expected a [num, mod] pair")
            pairs.append((_int(v[0], f"characters[{i}][{j}]"), _int(v[1], f"characters[{i}][{j}]")))
        out.append(alx.Character(tuple(pairs)))
    return out


# ---------------------------------------------------------------- commands

def cmd_snf(doc, args):
    return smith_normal_form(_matrix(doc.get("matrix")))


def cmd_charpoly(doc, args):
    return char_poly(_monodromy(doc))


def cmd_mahler(doc, args):
    if "polynomial" in doc:
        p = IntPoly(tuple(_int_list(doc["polynomial"], "polynomial")))
    else:
        p = char_poly(_monodromy(doc))
    return mahler_measure(p, args.tol)


def cmd_classify(doc, args):
    return tw.classify_monodromy(_monodromy(doc), args.tol)


def cmd_torus(doc, args):
    return tw.mapping_torus_homology(_monodromy(doc), _fiber(doc))


def cmd_tower_cyclic(doc, args):
    if args.kmax is None:
        raise SchemaError("tower-cyclic needs --kmax")
    return tw.cyclic_tower(_monodromy(doc), args.kmax, _fiber(doc), workers=args.threads, tol=args.tol)


def cmd_tower_abelian(doc, args):
    if not args.moduli:
        raise SchemaError("tower-abelian needs --moduli")
    return tw.homology_cover_tower(_automorphism(doc), args.moduli, workers=args.threads)


def cmd_cover_build(doc, args):
    a = _automorphism(doc, required=False)
    base = a.domain if a is not None else _fiber(doc)
    if base is None:
        raise SchemaError("cover-build needs a 'fiber', 'automorphism' or 'braid' section")
    return cov.build_cover(_cover_spec(doc, base, a, args.moduli))


def cmd_cover_lift(doc, args):
    a = _automorphism(doc)
    cover = cov.build_cover(_cover_spec(doc, a.domain, a, args.moduli))
    return cov.lift_automorphism(a, cover)


def cmd_alexander(doc, args):
    a = _automorphism(doc)
    m = alx.fox_alexander_matrix(alx.torus_presentation(a))
    try:
        poly = alx.alexander_polynomial(m)
    except UnsupportedScaleError:
        if "characters" not in doc:
            raise
        poly = None
    chis = _characters(doc)
    evals = alx.evaluate_characters(m, chis, workers=args.threads) if chis else []
    return AlexanderReport(m.variable_names, m, poly, tuple(chis), tuple(evals))


def cmd_search_lift(doc, args):
    moduli = args.moduli or [2, 3, 4, 5, 6]
    budget = args.budget if args.budget is not None else len(moduli) + 1
    return tw.search_noncyclotomic_lift(_automorphism(doc), moduli, budget)


def cmd_bound(doc, args):
    B = _monodromy(doc)
    fiber = _fiber(doc)
    if "chi_abs" in doc:
        chi = _int(doc["chi_abs"], "chi_abs")
    elif fiber is not None:
        chi = fiber.chi_abs
    else:
        a = _automorphism(doc, required=False)
        chi = a.domain.chi_abs if a is not None else B.rows - 1
    n = _int(doc.get("n", 1), "n")
    if args.lambda0 is None:
        raise SchemaError("bound needs --lambda0")
    return tw.growth_lower_bound(B, args.lambda0, chi, n)


HANDLERS = {
    "snf": cmd_snf, "charpoly": cmd_charpoly, "mahler": cmd_mahler, "classify": cmd_classify,
    "torus": cmd_torus, "tower-cyclic": cmd_tower_cyclic, "tower-abelian": cmd_tower_abelian,
    "cover-build": cmd_cover_build, "cover-lift": cmd_cover_lift, "alexander": cmd_alexander,
    "search-lift": cmd_search_lift, "bound": cmd_bound,
}


# ---------------------------------------------------------------- output

def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (tuple, list)):
        return ",".join(_cell(x) for x in v)
    return str(v)


def _matrix_lines(M: IntMatrix) -> list[str]:
    if M.rows == 0:
        return ["  (empty)"]
    cells = [[str(M[i, j]) for j in range(M.cols)] for i in range(M.rows)]
    w = max(len(c) for r in cells for c in r)
    return ["  [" + " ".join(c.rjust(w) for c in r) + "]" for r in cells]


def summary(record: Any) -> list[tuple[str, Any]]:
    """Human-level fields of a record, used by the table and CSV formats."""
    if isinstance(record, IntPoly):
        return [("polynomial", str(record)), ("degree", record.degree)]
    if hasattr(record, "invariant_factors") and hasattr(record, "D"):
        return [("invariant_factors", record.invariant_factors), ("rank", record.rank)]
    if isinstance(record, tw.MappingTorus):
        return [("betti", record.h1_betti), ("torsion", record.h1_torsion),
                ("torsion_order", record.torsion_order)]
    if isinstance(record, tw.Cyclotomic):
        return [("classification", record.label)]
    if isinstance(record, tw.NonCyclotomic):
        w = record.witness
        return [("classification", record.label), ("spectral_radius", w.value),
                ("lower", w.lower), ("upper", w.upper)]
    if isinstance(record, cov.CoverData):
        return [("degree", record.degree), ("h1_rank", record.h1_rank),
                ("schreier_generators", len(record.schreier_generators)),
                ("galois", cov.is_galois(record))]
    if isinstance(record, cov.LiftedAction):
        return [("degree", record.cover.degree), ("h1_rank", record.cover.h1_rank),
                ("matrix", record.matrix), ("char_poly", str(char_poly(record.matrix))),
                ("classification", tw.classify_monodromy(record.matrix).label)]
    if isinstance(record, tw.SearchResult):
        rows = [("found", record.found), ("modulus", record.modulus),
                ("attempts", ";".join(f"{n}:{o}" for n, o in record.attempts))]
        if record.found:
            rows += [("spectral_radius", record.witness.value),
                     ("cover_degree", record.lift.cover.degree),
                     ("h1_rank", record.lift.cover.h1_rank)]
        return rows
    if isinstance(record, AlexanderReport):
        rows = [("variables", record.variables),
                ("polynomial", "" if record.polynomial is None else str(record.polynomial))]
        for ch, ev in zip(record.characters, record.evaluations):
            label = ",".join(f"{n}/{m}" for n, m in ch.values)
            rows.append((f"chi({label})", _complex_poly_str(ev)))
        return rows
    import dataclasses
    return [(f.name, getattr(record, f.name)) for f in dataclasses.fields(record)]


def _complex_poly_str(p: alx.ComplexPoly) -> str:
    """Coefficients rounded to 10 places, highest degree first."""
    def num(z: complex) -> str:
        re_, im = round(z.real, 10) + 0.0, round(z.imag, 10) + 0.0
        return f"{re_:g}" if im == 0 else f"({re_:g}{im:+g}j)"
    parts = []
    for i in range(len(p.coeffs) - 1, -1, -1):
        c = num(p.coeffs[i])
        if c == "0":
            continue
        mono = "" if i == 0 else ("u" if i == 1 else f"u^{i}")
        if mono and c in ("1", "-1"):
            term = ("-" if c == "-1" else "") + mono
        else:
            term = c + ("*" + mono if mono else "")
        parts.append(term)
    if not parts:
        return "0"
    out = parts[0]
    for t in parts[1:]:
        out += " - " + t[1:] if t.startswith("-") else " + " + t
    return out


def _tower_rows(report: tw.TowerReport) -> list[list[str]]:
    return [[_cell(getattr(lv, c)) for c in TOWER_COLUMNS] for lv in report.levels]


def render_csv(record: Any) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if isinstance(record, tw.TowerReport):
        w.writerow(TOWER_COLUMNS)
        w.writerows(_tower_rows(record))
    else:
        w.writerow(("field", "value"))
        for k, v in summary(record):
            if isinstance(v, IntMatrix):
                v = ";".join(",".join(str(x) for x in v.row(i)) for i in range(v.rows))
            w.writerow((k, _cell(v)))
    return buf.getvalue()


def render_table(record: Any) -> str:
    lines: list[str] = []
    if isinstance(record, tw.TowerReport):
        rows = [list(TOWER_COLUMNS)] + _tower_rows(record)
        widths = [max(len(r[i]) for r in rows) for i in range(len(TOWER_COLUMNS))]
        for r in rows:
            lines.append("  ".join(c.rjust(wd) for c, wd in zip(r, widths)).rstrip())
        lines.append(f"limit_estimate: {record.limit_estimate!r} ({record.limit_method})")
        if record.mahler_reference is not None:
            lines.append(f"mahler_reference: {record.mahler_reference!r}")
        lines += [f"note: {n}" for n in record.notes]
    else:
        for k, v in summary(record):
            if isinstance(v, IntMatrix):
                lines.append(f"{k}:")
                lines += _matrix_lines(v)
            else:
                lines.append(f"{k}: {_cell(v)}")
    return "\n".join(lines) + "\n"


def render(record: Any, fmt: str) -> str:
    if fmt == "json":
        return serialize.dumps(record)
    if fmt == "csv":
        return render_csv(record)
    return render_table(record)


def write_plot_data(report: tw.TowerReport, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("index", "normalized_log_torsion", "mahler_reference"))
        ref = "" if report.mahler_reference is None else repr(report.mahler_reference)
        for lv in report.levels:
            w.writerow((lv.index, repr(lv.normalized_log_torsion), ref))


# ---------------------------------------------------------------- driver

def _moduli(text: str) -> list[int]:
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--moduli expects a comma list of integers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("--moduli is empty")
    return vals


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _real(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError("expected a finite number")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", help="JSON document: a file path, inline text, or - for stdin")
    common.add_argument("--format", choices=("table", "csv", "json"), default="table")
    common.add_argument("--tol", type=_real, default=DEFAULT_TOL, help="Mahler measure tolerance")
    common.add_argument("--kmax", type=_positive, help="last level of a cyclic tower")
    common.add_argument("--moduli", type=_moduli, help="comma list of moduli N")
    common.add_argument("--lambda0", type=_real, help="eigenvalue threshold for bound")
    common.add_argument("--budget", type=_positive, help="number of covers search-lift may try")
    common.add_argument("--threads", type=_positive, default=os.cpu_count() or 1,
                        help="worker processes for tower levels and characters")
    common.add_argument("--plot-data", metavar="PATH",
                        help="for towers, also write (index, normalized_log_torsion, mahler_reference) CSV")
    parser = argparse.ArgumentParser(
        prog="fibertor",
        description="Torsion growth in mapping torus towers and monodromy lifts.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=COMMAND_HELP[name])
    return parser


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stderr(stderr), contextlib.redirect_stdout(stdout):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_SCHEMA if exc.code else EXIT_OK
    try:
        doc = load_document(args.input)
        record = HANDLERS[args.command](doc, args)
        text = render(record, args.format)
        if args.plot_data:
            if not isinstance(record, tw.TowerReport):
                raise SchemaError("--plot-data applies to tower commands only")
            write_plot_data(record, args.plot_data)
    except SchemaError as exc:
        print(f"fibertor: schema error: {exc}", file=stderr)
        return EXIT_SCHEMA
    except UnsupportedScaleError as exc:
        print(f"fibertor: refused: {exc}", file=stderr)
        return EXIT_SCALE
    except (FibertorError, ValueError, ArithmeticError) as exc:
        print(f"fibertor: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_DOMAIN
    stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


__all__ = ["run", "main", "build_parser", "render", "load_document", "SchemaError",
           "AlexanderReport", "COMMANDS", "TOWER_COLUMNS"]
