"""Command-line front end: abstract weight data, X0 certificates, criterion checks and group experiments."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .affine_dynamics import (
    CLUSTER_TOL,
    AffineMap,
    cartan_projection,
    ideal_split,
    jordan_projection,
    margulis_invariant,
    random_rho_regular,
)
from .concrete_rep import FIXTURES, RANK_TOL, RepSpec, check_criterion, realize, vt0_basis
from .errors import BadInput, NotApplicable, ProperAffineError, PropertyViolation
from .group_builder import build_family, properness_heuristic, word_survey
from .rep_weights import classify, highest_from_varpi, multiplicities_split, weight_set, weyl_dimension
from .root_system import FAMILIES, build_root_system, fmt_q, parse_root_system, vec
from .x0_select import certify, select_x0, vector_predicates

SCHEMA_VERSION = 1
INVERSE_TOL = 1e-6


# ---------------------------------------------------------------------------
# serialization


def _encode(obj: Any) -> str:
    """Deterministic JSON: rationals as strings, floats with 17 significant digits."""
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, Fraction):
        return json.dumps(fmt_q(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x) or math.isinf(x):
            return json.dumps(repr(x))
        return format(x + 0.0, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return _encode(obj.tolist())
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def _flatten(obj: Any, prefix: str = "") -> list[tuple[str, str]]:
    if isinstance(obj, dict):
        out = []
        for k, v in obj.items():
            out += _flatten(v, f"{prefix}.{k}" if prefix else str(k))
        return out
    if isinstance(obj, (list, tuple)) and any(isinstance(v, (dict, list, tuple)) for v in obj):
        out = []
        for i, v in enumerate(obj):
            out += _flatten(v, f"{prefix}[{i}]")
        return out
    return [(prefix, _encode(obj))]


def render(report: dict, as_json: bool) -> str:
    if as_json:
        return _encode(report) + "\n"
    rows = _flatten(report)
    width = max((len(k) for k, _ in rows), default=0)
    return "".join(f"{k.ljust(width)}  {v}\n" for k, v in rows)


# ---------------------------------------------------------------------------
# spec resolution


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise BadInput(f"expected comma-separated integers, got {text!r}") from exc


def _q_list(text: str) -> list[Fraction]:
    try:
        return [Fraction(t.strip()) for t in text.split(",") if t.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise BadInput(f"expected comma-separated rationals, got {text!r}") from exc


def _family_rank(args) -> tuple[str, int]:
    family = args.family_opt or args.family
    rank = args.rank_opt if args.rank_opt is not None else args.rank
    if family is None or rank is None:
        raise BadInput("need a root system: FAMILY RANK or --family/--rank")
    family = family.upper()
    return family, int(rank)


def _spec_echo(args) -> dict:
    keys = ("family", "rank", "highest", "weight", "sym", "wedge", "adjoint", "standard", "group", "p")
    out = {}
    for k in keys:
        v = getattr(args, k, None)
        if k == "family":
            v = args.family_opt or args.family
        if k == "rank":
            v = args.rank_opt if args.rank_opt is not None else args.rank
        if v not in (None, False):
            out[k] = v
    return out


def _load_spec_file(args) -> None:
    if not getattr(args, "spec_file", None):
        return
    try:
        data = json.loads(Path(args.spec_file).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise BadInput(f"cannot read spec file: {exc}") from exc
    if not isinstance(data, dict):
        raise BadInput("spec file must contain a JSON object")
    for k, v in data.items():
        attr = {"family": "family_opt", "rank": "rank_opt"}.get(k, k.replace("-", "_"))
        if not hasattr(args, attr):
            raise BadInput(f"unknown spec field {k!r}")
        if getattr(args, attr) in (None, False):
            setattr(args, attr, v if not isinstance(v, list) else ",".join(str(x) for x in v))


def _rep_kind(args) -> tuple[str, int] | None:
    kinds = [
        ("sym", args.sym),
        ("wedge", args.wedge),
        ("adjoint", 1 if args.adjoint else None),
        ("standard", 1 if args.standard else None),
    ]
    given = [(k, d) for k, d in kinds if d is not None]
    if len(given) > 1:
        raise BadInput("give at most one of --sym, --wedge, --adjoint, --standard")
    return given[0] if given else None


def abstract_highest(args):
    """(root system, highest weight) for the exact weight commands."""
    family, rank = _family_rank(args)
    if "X" in family:
        rs = parse_root_system(family)
    else:
        if family not in FAMILIES:
            raise BadInput(f"unknown family {family!r}; known: {', '.join(FAMILIES)}")
        rs = build_root_system(family, rank)
    kind = _rep_kind(args)
    given = [x for x in (args.highest, args.weight, kind) if x is not None]
    if len(given) != 1:
        raise BadInput("give exactly one of --highest, --weight, or a representation kind")
    if args.highest is not None:
        return rs, highest_from_varpi(rs, _int_list(args.highest))
    if args.weight is not None:
        w = vec(_q_list(args.weight))
        if len(w) != rs.ambient_dim:
            raise BadInput(f"weight needs {rs.ambient_dim} coordinates")
        return rs, w
    tag, degree = kind
    coords = [0] * rs.rank
    if tag == "adjoint":
        if len(rs.factors) > 1:
            raise BadInput("the adjoint representation of a product is reducible")
        return rs, max(rs.positive_roots, key=lambda a: (sum(rs.root_coords(a)), a))
    if tag == "standard":
        coords[0] = 1
    elif tag == "sym":
        if degree < 0:
            raise BadInput("symmetric degree must be nonnegative")
        coords[0] = degree
    else:
        if not 1 <= degree <= rs.rank:
            raise BadInput(f"wedge degree must be in 1..{rs.rank}")
        if rs.factors[0][0] == "A":
            coords[degree - 1] = 1
        else:
            dim = rs.ambient_dim
            return rs, vec([1] * degree + [0] * (dim - degree))
    return rs, highest_from_varpi(rs, coords)


def concrete_spec(args) -> RepSpec:
    """Named fixture or SL_{n+1} / SO(p, q) from family and rank."""
    if args.group:
        if args.group not in FIXTURES:
            raise BadInput(f"unknown group fixture {args.group!r}; known: {', '.join(sorted(FIXTURES))}")
        return FIXTURES[args.group]
    family, rank = _family_rank(args)
    if args.highest is not None or args.weight is not None:
        raise BadInput("concrete groups take --sym/--wedge/--adjoint/--standard, not a highest weight")
    tag, degree = _rep_kind(args) or ("standard", 1)
    if family == "A":
        return RepSpec("SL", n=rank + 1, rep_kind=tag, degree=degree)
    if family == "B":
        p = args.p if args.p is not None else rank + 1
        return RepSpec("SO", p=p, q=rank, rep_kind=tag, degree=degree)
    raise BadInput("concrete groups: family A (SL_{n+1}) or B (SO(p,q), q = rank)")


# ---------------------------------------------------------------------------
# commands


def cmd_classify(args) -> tuple[dict, int]:
    rs, highest = abstract_highest(args)
    omega = weight_set(rs, highest)
    cls = classify(rs, omega)
    mults = None
    if not any(rs.doubled):
        mults = multiplicities_split(rs, highest)
    zero = vec([0] * rs.ambient_dim)
    res = {
        "root_system": rs.name,
        "highest": [fmt_q(c) for c in highest],
        "highest_varpi": [fmt_q(c) for c in rs.varpi_coords(highest)],
        "weight_count": len(omega),
        "dimension_weyl": None if any(rs.doubled) else weyl_dimension(rs, highest),
        "dimension_freudenthal": None if mults is None else mults.dimension,
        "zero_multiplicity": None if mults is None else mults.multiplicities.get(zero, 0),
        "classification": cls.to_json(),
    }
    if args.weights:
        res["weights"] = (mults or omega).to_json()
    return res, 0


def cmd_find_x0(args) -> tuple[dict, int]:
    rs, highest = abstract_highest(args)
    omega = weight_set(rs, highest)
    if args.check:
        cert = certify(rs, omega, _q_list(args.check))
    else:
        cert = select_x0(rs, omega, args.seed)
    res = {"certificate": cert.to_json()}
    code = 0
    if args.check and not (cert.generically_symmetric and cert.extreme):
        code = PropertyViolation.exit_code
    if args.predicates:
        res["predicates"] = vector_predicates(cert, _q_list(args.predicates)).to_json()
    return res, code


def cmd_check_criterion(args) -> tuple[dict, int]:
    rep = realize(concrete_spec(args))
    report = check_criterion(rep, args.tol_rank)
    res = {"group": rep.to_json(), "criterion": report.to_json()}
    return res, 0 if report.holds else PropertyViolation.exit_code


def _load_elements(path: str, rep) -> list[AffineMap]:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise BadInput(f"cannot read element file: {exc}") from exc
    if not isinstance(data, list) or not data:
        raise BadInput("element file must be a nonempty JSON array")
    d = rep.dim_v
    n = rep.fam.n
    out = []
    for k, item in enumerate(data):
        if isinstance(item, dict):
            std = np.asarray(item.get("std"), dtype=float)
            v = np.asarray(item.get("translation", [0.0] * d), dtype=float)
            if std.size != n * n or v.size != d:
                raise BadInput(f"element {k}: std needs {n * n} entries and translation {d}")
            std = std.reshape(n, n)
        else:
            arr = np.asarray(item, dtype=float)
            if arr.size != (d + 1) ** 2:
                raise BadInput(f"element {k}: expected {(d + 1) ** 2} row-major entries")
            m = arr.reshape(d + 1, d + 1)
            if rep.spec.rep_kind != "standard":
                raise BadInput("affine-matrix elements are only accepted for standard representations")
            std = rep.basis @ m[:d, :d] @ rep.basis.T
            v = m[:d, d]
        if not rep.fam.is_member(std, 1e-6):
            raise BadInput(f"element {k} is not in {rep.fam.name}")
        out.append(AffineMap.from_group(rep, std, v))
    return out


def _element_report(rep, cert, g: AffineMap, vt0, tol_cluster: float) -> dict:
    w0 = rep.w0_rep
    sp = ideal_split(rep, cert, g, tol_cluster)
    inv = g.inverse()
    spi = ideal_split(rep, cert, inv, tol_cluster)
    m = margulis_invariant(rep, sp, g, vt0)
    mi = margulis_invariant(rep, spi, inv, vt0)
    jd = jordan_projection(rep, g.std)
    return {
        "jd": jd.value,
        "jd_eig": jd.eig_value,
        "jd_converged": jd.converged,
        "ct": cartan_projection(rep, g.std),
        "margulis": m.coords,
        "margulis_inverse": mi.coords,
        "inverse_check": float(np.linalg.norm(mi.m + w0 @ m.m)),
        "formula_gap": m.formula_gap,
    }


def cmd_margulis(args) -> tuple[dict, int]:
    rep = realize(concrete_spec(args))
    if not check_criterion(rep, args.tol_rank).holds:
        raise NotApplicable("criterion fails for this group: the Margulis invariant carries no information")
    cert = select_x0(rep.rs, rep.omega, args.seed)
    vt0 = vt0_basis(rep, args.tol_rank)
    if args.elements:
        elems = _load_elements(args.elements, rep)
    else:
        rng = np.random.default_rng(args.seed)
        elems = [random_rho_regular(rep, cert, rng, args.scale) for _ in range(args.count)]
    rows = []
    code = 0
    for g in elems:
        try:
            row = _element_report(rep, cert, g, vt0, args.tol_cluster)
        except NotApplicable as exc:
            row = {"error": str(exc)}
            code = max(code, NotApplicable.exit_code)
        else:
            if row["inverse_check"] > INVERSE_TOL and code == 0:
                code = PropertyViolation.exit_code
        rows.append(row)
    return {"x0": [fmt_q(c) for c in cert.x0], "vt0_dim": int(vt0.shape[1]), "elements": rows}, code


def _family(args):
    rep = realize(concrete_spec(args))
    cert = select_x0(rep.rs, rep.omega, args.seed)
    fam = build_family(
        rep,
        cert,
        k=args.k,
        power=args.power,
        m_norm=args.m_norm,
        seed=args.seed,
        y_scale=args.scale,
        s_threshold=args.s_threshold,
        min_angle=args.min_angle,
        sabotage=args.sabotage,
    )
    return rep, cert, fam


def cmd_build_group(args) -> tuple[dict, int]:
    rep, cert, fam = _family(args)
    res = {"x0": [fmt_q(c) for c in cert.x0], "family": fam.to_json(), "passes": fam.passes}
    return res, 0 if fam.passes else PropertyViolation.exit_code


def cmd_word_survey(args) -> tuple[dict, int]:
    rep, cert, fam = _family(args)
    survey = word_survey(fam, args.max_len)
    res = {
        "x0": [fmt_q(c) for c in cert.x0],
        "hypotheses": fam.to_json()["hypotheses"],
        "survey": survey.summary(),
    }
    ok = fam.passes and survey.passes
    if args.properness:
        prop = properness_heuristic(fam, min(args.max_len, args.properness_len), seed=args.seed)
        res["properness"] = prop.to_json()
        ok = ok and prop.passes
    if args.csv:
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(survey.csv_rows())
        if args.csv == "-":
            sys.stderr.write(buf.getvalue())
        else:
            Path(args.csv).write_text(buf.getvalue())
    return res, 0 if ok else PropertyViolation.exit_code


COMMANDS = {
    "classify-rep": cmd_classify,
    "find-x0": cmd_find_x0,
    "check-criterion": cmd_check_criterion,
    "margulis": cmd_margulis,
    "build-group": cmd_build_group,
    "word-survey": cmd_word_survey,
}


# ---------------------------------------------------------------------------
# argument parsing


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("family", nargs="?", help="root system family (A, B, C, D, BC) or a product like B2xB2")
    p.add_argument("rank", nargs="?", type=int)
    p.add_argument("--family", dest="family_opt")
    p.add_argument("--rank", dest="rank_opt", type=int)
    p.add_argument("--highest", help="highest weight in fundamental-weight coordinates, e.g. 5,0,1")
    p.add_argument("--weight", help="highest weight in e-coordinates, e.g. 4,-1,-1,-2")
    p.add_argument("--sym", type=int, help="symmetric power of the standard representation")
    p.add_argument("--wedge", type=int, help="exterior power of the standard representation")
    p.add_argument("--adjoint", action="store_true")
    p.add_argument("--standard", action="store_true")
    p.add_argument("--group", help=f"named group fixture: {', '.join(sorted(FIXTURES))}")
    p.add_argument("--p", type=int, help="p for SO(p, q) with q = rank (default rank + 1)")
    p.add_argument("--spec-file", help="JSON object with any of the representation flags")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol-rank", type=float, default=RANK_TOL)
    p.add_argument("--tol-cluster", type=float, default=CLUSTER_TOL)
    out = p.add_mutually_exclusive_group()
    out.add_argument("--json", dest="as_json", action="store_true", default=True)
    out.add_argument("--text", dest="as_json", action="store_false")


def _group_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int, default=2, help="number of generators")
    p.add_argument("--power", type=int, default=8, help="power N of each linear generator")
    p.add_argument("--scale", type=float, default=0.4, help="norm of the Cartan vector of each linear letter")
    p.add_argument("--m-norm", type=float, default=1.0, help="norm of the prescribed Margulis invariant")
    p.add_argument("--s-threshold", type=float, default=0.25)
    p.add_argument("--min-angle", type=float, default=0.6, help="minimal angle between expanding and contracting spaces of letters")
    p.add_argument("--sabotage", action="store_true", help="negate the second generator's invariant")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="proper-affine", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("classify-rep", help="weight set, dimension and classification")
    _common(p)
    p.add_argument("--weights", action="store_true", help="include the full weight list")
    p = sub.add_parser("find-x0", help="choose and certify X0")
    _common(p)
    p.add_argument("--check", help="certify this X0 instead of searching")
    p.add_argument("--predicates", help="also evaluate the predicates of this vector Y")
    p = sub.add_parser("check-criterion", help="is V^t_0 moved by w0")
    _common(p)
    p = sub.add_parser("margulis", help="Jordan, Cartan and Margulis data of group elements")
    _common(p)
    p.add_argument("--elements", help="JSON array of (d+1)^2 row-major affine matrices")
    p.add_argument("--count", type=int, default=4, help="random elements when no file is given")
    p.add_argument("--scale", type=float, default=1.0)
    p = sub.add_parser("build-group", help="generators with prescribed Margulis invariant")
    _common(p)
    _group_flags(p)
    p = sub.add_parser("word-survey", help="survey all cyclically reduced words")
    _common(p)
    _group_flags(p)
    p.add_argument("--max-len", type=int, default=6)
    p.add_argument("--csv", help="write the per-word table here ('-' for stderr)")
    p.add_argument("--properness", action="store_true", help="also run the displacement heuristic")
    p.add_argument("--properness-len", type=int, default=5)
    return parser


def run(argv: Sequence[str] | None = None) -> tuple[dict, int]:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        _load_spec_file(args)
        results, code = COMMANDS[args.command](args)
    except ProperAffineError as exc:
        results, code = {"error": type(exc).__name__, "message": str(exc)}, exc.exit_code
    except np.linalg.LinAlgError as exc:
        results, code = {"error": type(exc).__name__, "message": str(exc)}, PropertyViolation.exit_code
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "spec": _spec_echo(args),
        "seed": args.seed,
        "tolerances": {"rank": args.tol_rank, "cluster": args.tol_cluster},
        "exit_code": code,
        "results": results,
        "timing": {"elapsed_s": time.perf_counter() - start},
    }
    return report, code


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    report, code = run(argv)
    sys.stdout.write(render(report, args.as_json))
    return code


if __name__ == "__main__":
    sys.exit(main())
