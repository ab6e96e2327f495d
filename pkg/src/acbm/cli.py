"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a mathematical check fails,
2 for bad flags or malformed input documents.  All reports are JSON with
sorted keys, so reruns with the same flags give byte-identical output.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import class_f, connection, curvature, hypersurface, sections_decomp
from .errors import AcbmError, NotPhiKaehler
from .selftest import run_selftest
from .serialize import FixtureDocument, SchemaError, dumps, structure_document, tensor_document
from .structure import canonical_structure, random_structure

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
SEED_ENV = "ACBM_SEED"
FTENSOR_TOL = 1e-8
RANDOM_CLASSES = ("F0", "F1", "F4", "F5", "F11")


class InputError(Exception):
    """Bad flags or unreadable input; maps to exit code 2."""


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _emit(report: dict, out: str | None) -> None:
    text = dumps(report)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(path: str, kind: str) -> FixtureDocument:
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    doc = FixtureDocument.from_json(text)
    if doc.kind != kind:
        raise SchemaError(f"expected a {kind} document, got {doc.kind!r}")
    return doc


# -- commands -----------------------------------------------------------------

def cmd_selftest(args) -> int:
    if args.n < 1:
        raise InputError("--n must be >= 1")
    if args.samples < 1:
        raise InputError("--samples must be >= 1")
    seed = _default_seed() if args.seed is None else args.seed
    suite = run_selftest(args.n, seed, args.samples)
    report = {"command": "selftest", "n": args.n, "seed": seed, "samples": args.samples}
    report.update(suite.to_dict())
    _emit(report, args.out)
    return EXIT_OK if suite.passed else EXIT_FAIL


def cmd_classify(args) -> int:
    doc = _load(args.input, "f_tensor")
    s = doc.get_structure()
    f = class_f.FTensor(doc.array(), s)
    invariants = f.residuals()
    report = {"command": "classify", "n": doc.n, "tol": args.tol,
              "invariants": invariants.to_dict()}
    if not invariants.passed(FTENSOR_TOL):
        report["error"] = f"F violates its symmetries: {invariants.failures(FTENSOR_TOL)}"
        _emit(report, args.out)
        return EXIT_FAIL
    report.update(class_f.classify(f, tol=args.tol).to_dict())
    _emit(report, args.out)
    return EXIT_OK


def cmd_decompose(args) -> int:
    doc = _load(args.input, "curv_tensor")
    if doc.n != 2:
        raise InputError(f"decomposition needs n = 2, got n = {doc.n}")
    s = doc.get_structure()
    L = doc.array()
    pre = curvature.check_phi_kaehler_type(L, s)
    report = {"command": "decompose", "n": doc.n, "precondition": pre.to_dict()}
    try:
        dec = sections_decomp.decompose_5d(L, s, seed=args.seed)
    except NotPhiKaehler as exc:
        report["error"] = f"NotPhiKaehler: {exc}"
        _emit(report, args.out)
        return EXIT_FAIL
    report.update(dec.to_dict())
    _emit(report, args.out)
    return EXIT_OK if dec.residual < sections_decomp.PHI_KAEHLER_TOL else EXIT_FAIL


def cmd_example(args) -> int:
    if args.n < 2:
        raise InputError("--n must be >= 2")
    if args.t_min < hypersurface.MIN_T:
        raise InputError(f"--t-min must be >= {hypersurface.MIN_T}")
    if args.t_max < args.t_min:
        raise InputError("--t-max must be >= --t-min")
    if args.steps < 1:
        raise InputError("--steps must be >= 1")
    if args.fd_step is not None and not args.fd_step > 0:
        raise InputError("--fd-step must be positive")
    grid = np.linspace(args.t_min, args.t_max, args.steps)
    fam_report = hypersurface.verify_example(args.n, grid, fd_step=args.fd_step)
    report = {"command": "example"}
    report.update(fam_report.to_dict())
    _emit(report, args.out)
    return EXIT_OK if fam_report.passed else EXIT_FAIL


def _random_class_params(class_id: str, s, rng: np.random.Generator):
    d = s.dim
    if class_id in ("F1",):
        return rng.standard_normal(d)
    if class_id in ("F4", "F5"):
        return float(rng.standard_normal())
    if class_id == "F11":
        omega = rng.standard_normal(d)
        return omega - float(omega @ s.xi) * s.eta
    return None


def _random_f(class_id: str | None, s, rng) -> class_f.FTensor:
    """A single class template, or the sum of all main classes when no class is given."""
    ids = ("F1", "F4", "F5", "F11") if class_id is None else (class_id,)
    F = sum(class_f.class_template(cid, s, _random_class_params(cid, s, rng)).F for cid in ids)
    return class_f.FTensor(F, s)


def cmd_random(args) -> int:
    if args.n < 1:
        raise InputError("--n must be >= 1")
    if args.class_id is not None and args.class_id not in RANDOM_CLASSES:
        raise InputError(f"unsupported class {args.class_id!r}; expected one of {RANDOM_CLASSES}")
    seed = _default_seed() if args.seed is None else args.seed
    rng = np.random.default_rng(seed)
    meta = {"generator": "random", "seed": str(seed)}
    kind = args.kind

    if kind == "structure":
        if args.class_id is not None:
            raise InputError("--class does not apply to structure fixtures")
        doc = structure_document(random_structure(args.n, seed), meta)
    elif kind == "f_tensor":
        if args.class_id is None:
            raise InputError("f_tensor fixtures need --class")
        s = canonical_structure(args.n)
        meta["class"] = args.class_id
        doc = tensor_document(kind, _random_f(args.class_id, s, rng).F, s, meta)
    elif kind == "curv_tensor":
        if args.class_id is not None:
            raise InputError("--class does not apply to curv_tensor fixtures")
        s = canonical_structure(args.n)
        try:
            L = sections_decomp.project_phi_kaehler(rng.standard_normal((s.dim,) * 4), s)
        except AcbmError as exc:
            raise InputError(str(exc)) from exc
        meta["projection"] = "phi_kaehler"
        doc = tensor_document(kind, L, s, meta)
    else:  # torsion
        if args.class_id == "F0":
            raise InputError("F0 has zero torsion; choose a main class")
        s = canonical_structure(args.n)
        f = _random_f(args.class_id, s, rng)
        t = connection.torsion(connection.phi_b_deformation(f, s), s)
        meta["class"] = args.class_id or "F1+F4+F5+F11"
        doc = tensor_document(kind, t.T_low, s, meta)

    text = doc.to_json()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="acbm", description="Pointwise checks for almost contact B-metric structures.")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("selftest", help="run every invariant suite at one n")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")
    sp.add_argument("--samples", type=int, default=50)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_selftest)

    sp = sub.add_parser("classify", help="classify an f_tensor fixture")
    sp.add_argument("input", help="fixture path, or - for stdin")
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("decompose", help="write an n = 2 curv_tensor as nu L1 + nu* L2")
    sp.add_argument("input", help="fixture path, or - for stdin")
    sp.add_argument("--seed", type=int, default=0, help="seed of the adapted basis")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("example", help="verify the hypersurface family on a t-grid")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--t-min", type=float, default=0.5)
    sp.add_argument("--t-max", type=float, default=2.0)
    sp.add_argument("--steps", type=int, default=16)
    sp.add_argument("--fd-step", type=float, default=None)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_example)

    sp = sub.add_parser("random", help="write a seeded random fixture")
    sp.add_argument("--kind", required=True, choices=("structure", "f_tensor", "curv_tensor", "torsion"))
    sp.add_argument("--class", dest="class_id", default=None)
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_random)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (InputError, SchemaError) as exc:
        print(f"acbm: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except AcbmError as exc:
        print(f"acbm: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
