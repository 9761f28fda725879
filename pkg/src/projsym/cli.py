"""Command-line front end: ``projsym {gen,check,lift,classify,verify}``.

Ray-map files and reports are JSON documents. Complex numbers are written as
``[re, im]`` pairs and matrices row-major as lists of rows. Floats use
Python's shortest round-trip representation, so parsing a written report
recovers every float64 exactly.

Exit codes: 0 success, 1 hypothesis violated, 2 input or usage error,
3 numeric indeterminacy.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Any

import numpy as np

from projsym import artin_lift, ray_maps, testkit, wigner_lift
from projsym.errors import (
    HypothesisViolation,
    InputError,
    NumericIndeterminacy,
    ProjectiveError,
)
from projsym.projective_core import Field, canonical_phase
from projsym.ray_maps import MatrixInduced, Tabulated, Witness

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2
EXIT_NUMERIC = 3

DEFAULT_TOL = 1e-8
DEFAULT_TRIALS = 200
DEFAULT_SEED = 0
INVERTIBLE_MAX_CONDITION = 1e3


class UsageError(InputError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# ---------------------------------------------------------------- encoding

def encode_complex(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def encode_vector(v) -> list[list[float]]:
    return [encode_complex(z) for z in np.asarray(v).ravel()]


def encode_matrix(m) -> list[list[list[float]]]:
    return [encode_vector(row) for row in np.asarray(m)]


def _finite(x: float, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise InputError(f"{where}: expected a number, got {x!r}")
    if not math.isfinite(x):
        raise InputError(f"{where}: NaN or infinite value")
    return float(x)


def decode_complex(obj, where: str) -> complex:
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return complex(_finite(obj, where))
    if not isinstance(obj, list) or len(obj) != 2:
        raise InputError(f"{where}: expected [re, im], got {obj!r}")
    return complex(_finite(obj[0], where), _finite(obj[1], where))


def decode_vector(obj, where: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        raise InputError(f"{where}: expected a non-empty list of [re, im] pairs")
    v = np.array([decode_complex(z, f"{where}[{k}]") for k, z in enumerate(obj)])
    if not np.any(v != 0):
        raise InputError(f"{where}: zero vector")
    return v


def decode_matrix(obj, where: str = "matrix") -> np.ndarray:
    """Square matrix from a list of rows, or from a flat row-major list of n*n entries."""
    if not isinstance(obj, list) or not obj:
        raise InputError(f"{where}: expected a non-empty array")
    nested = all(isinstance(row, list) and row and isinstance(row[0], list) for row in obj)
    if nested:
        rows = [[decode_complex(z, f"{where}[{i}][{j}]") for j, z in enumerate(row)]
                for i, row in enumerate(obj)]
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise InputError(f"{where}: matrix is not square")
        return np.array(rows, dtype=np.complex128)
    flat = [decode_complex(z, f"{where}[{k}]") for k, z in enumerate(obj)]
    n = math.isqrt(len(flat))
    if n * n != len(flat):
        raise InputError(f"{where}: {len(flat)} entries do not form a square matrix")
    return np.array(flat, dtype=np.complex128).reshape(n, n)


def _decode_field(doc: dict) -> Field:
    value = doc.get("field", "complex")
    try:
        return Field(value)
    except ValueError:
        raise InputError(f"field: expected 'real' or 'complex', got {value!r}") from None


def _require_real(arr: np.ndarray, where: str):
    if np.any(arr.imag != 0):
        raise InputError(f"{where}: complex entries in a real-field file")


def load_ray_map(doc: Any):
    """Build ``(RayMap, Field)`` from a parsed ray-map document."""
    if not isinstance(doc, dict):
        raise InputError("document: expected a JSON object")
    kind = doc.get("kind")
    field = _decode_field(doc)
    if kind == "matrix":
        if "matrix" not in doc:
            raise InputError("matrix: missing")
        m = decode_matrix(doc["matrix"])
        conj = doc.get("conjugate", False)
        if not isinstance(conj, bool):
            raise InputError(f"conjugate: expected a boolean, got {conj!r}")
        if field is Field.REAL:
            _require_real(m, "matrix")
        if m.shape[0] < 2:
            raise InputError("matrix: dimension must be at least 2")
        return MatrixInduced(m, conj), field
    if kind == "tabulated":
        dim = doc.get("dim")
        if isinstance(dim, bool) or not isinstance(dim, int) or dim < 2:
            raise InputError(f"dim: expected an integer >= 2, got {dim!r}")
        pairs = doc.get("pairs")
        if not isinstance(pairs, list):
            raise InputError("pairs: expected an array")
        decoded = []
        for k, p in enumerate(pairs):
            if not isinstance(p, dict) or "in" not in p or "out" not in p:
                raise InputError(f"pairs[{k}]: expected an object with 'in' and 'out'")
            x = decode_vector(p["in"], f"pairs[{k}].in")
            y = decode_vector(p["out"], f"pairs[{k}].out")
            if x.shape[0] != dim or y.shape[0] != dim:
                raise InputError(f"pairs[{k}]: vector length differs from dim {dim}")
            if field is Field.REAL:
                _require_real(x, f"pairs[{k}].in")
                _require_real(y, f"pairs[{k}].out")
            decoded.append((x, y))
        return Tabulated(dim, decoded), field
    raise InputError(f"kind: expected 'matrix' or 'tabulated', got {kind!r}")


def matrix_document(m: np.ndarray, conjugate: bool = False,
                    field: Field = Field.COMPLEX) -> dict:
    doc = {"kind": "matrix", "field": field.value, "matrix": encode_matrix(m),
           "conjugate": conjugate}
    return doc


def tabulated_document(t: Tabulated, field: Field = Field.COMPLEX) -> dict:
    return {"kind": "tabulated", "field": field.value, "dim": t.dim,
            "pairs": [{"in": encode_vector(x.vector), "out": encode_vector(y)}
                      for x, y in zip(t.inputs, t.outputs)]}


def encode_witness(w: Witness | None):
    if w is None:
        return None
    return {"inputs": [encode_vector(r.vector) for r in w.inputs],
            "expected": float(w.expected), "observed": float(w.observed)}


def gauge_matrix(m: np.ndarray) -> np.ndarray:
    """Multiply by the global phase that makes column 1's pivot real and non-negative."""
    m = np.asarray(m) * canonical_phase(np.asarray(m)[:, 0])
    return m


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def read_document(path: str):
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None

    def _reject(token):
        raise InputError(f"{path}: {token} is not allowed")

    try:
        return json.loads(text, parse_constant=_reject)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def write_output(text: str, out: str | None):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def load_operator(doc: Any) -> artin_lift.SemiLinearMap:
    if not isinstance(doc, dict):
        raise InputError("operator: expected a JSON object")
    if doc.get("matrix") is None:
        raise InputError("matrix: operator report carries no lifted matrix")
    m = decode_matrix(doc["matrix"])
    sigma = doc.get("sigma")
    if sigma is None and doc.get("kind") in ("unitary", "antiunitary"):
        sigma = wigner_lift.Kind(doc["kind"]).sigma.value
    try:
        sigma = artin_lift.Sigma(sigma)
    except ValueError:
        raise InputError(f"sigma: expected 'identity' or 'conjugation', got {sigma!r}") from None
    return artin_lift.SemiLinearMap(m, sigma)


# ---------------------------------------------------------------- commands

def _report(command: str, args, **fields) -> dict:
    doc = {"command": command, "verdict": fields.pop("verdict")}
    doc["kind"] = fields.pop("kind", None)
    doc["sigma"] = fields.pop("sigma", None)
    doc["worst_residual"] = fields.pop("worst_residual", None)
    doc["witness"] = fields.pop("witness", None)
    doc["seed"] = getattr(args, "seed", None)
    doc["tol"] = args.tol
    doc["trials"] = getattr(args, "trials", None)
    doc["matrix"] = fields.pop("matrix", None)
    doc.update(fields)
    return doc


def _check_report_entry(rep: ray_maps.VerificationReport) -> dict:
    return {"verdict": rep.verdict, "worst_residual": rep.worst_residual,
            "trials": rep.trials, "witness": encode_witness(rep.witness)}


def cmd_check(args) -> int:
    t, field = load_ray_map(read_document(args.input))
    reports = [ray_maps.check_quasi_unitary(t, args.trials, args.tol, args.seed, field)]
    if t.dim >= 3:
        reports.append(ray_maps.check_collineation(t, args.trials, args.tol, args.seed, field))
    passed = all(r.passed for r in reports)
    first_bad = next((r for r in reports if not r.passed), None)
    doc = _report("check", args, verdict="pass" if passed else "fail",
                  worst_residual=max(r.worst_residual for r in reports),
                  witness=encode_witness(first_bad.witness) if first_bad else None,
                  checks={r.name: _check_report_entry(r) for r in reports})
    write_output(dumps(doc), args.out)
    return EXIT_OK if passed else EXIT_VIOLATION


def cmd_lift(args) -> int:
    t, field = load_ray_map(read_document(args.input))
    try:
        if args.mode == "wigner":
            u, cert = wigner_lift.lift_symmetry(t, field, args.tol, args.trials, args.seed)
            doc = _report("lift", args, verdict="pass", kind=u.kind.value,
                          sigma=u.sigma.value,
                          worst_residual=cert.compatibility.worst_residual,
                          matrix=encode_matrix(u.matrix), mode="wigner",
                          sigma_residual=cert.sigma_residual,
                          quasi_unitarity_residual=cert.quasi_unitarity.worst_residual)
        else:
            f, diag = artin_lift.lift_collineation(t, field, args.tol, args.trials, args.seed)
            doc = _report("lift", args, verdict="pass", sigma=f.sigma.value,
                          worst_residual=diag.verification.worst_residual,
                          matrix=encode_matrix(gauge_matrix(f.matrix)), mode="artin",
                          sigma_residual=diag.sigma_residual)
    except (HypothesisViolation, NumericIndeterminacy) as exc:
        witness = getattr(exc, "witness", None)
        doc = _report("lift", args, verdict="fail", witness=encode_witness(witness),
                      mode=args.mode, error=f"{type(exc).__name__}: {exc}")
        write_output(dumps(doc), args.out)
        return EXIT_VIOLATION if isinstance(exc, HypothesisViolation) else EXIT_NUMERIC
    write_output(dumps(doc), args.out)
    return EXIT_OK


def cmd_classify(args) -> int:
    t, field = load_ray_map(read_document(args.input))
    try:
        kind = wigner_lift.classify(t, field, args.tol)
    except (HypothesisViolation, NumericIndeterminacy) as exc:
        doc = _report("classify", args, verdict="fail",
                      witness=encode_witness(getattr(exc, "witness", None)),
                      error=f"{type(exc).__name__}: {exc}")
        write_output(dumps(doc), args.out)
        return EXIT_VIOLATION if isinstance(exc, HypothesisViolation) else EXIT_NUMERIC
    doc = _report("classify", args, verdict="pass", kind=kind.value, sigma=kind.sigma.value)
    write_output(dumps(doc), args.out)
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.dim < 2:
        raise UsageError(f"--dim must be at least 2, got {args.dim}")
    if args.kind == "invertible":
        m = testkit.random_invertible(args.dim, args.seed, INVERTIBLE_MAX_CONDITION)
        conj = False
    else:
        m = testkit.haar_unitary(args.dim, args.seed)
        conj = args.kind == "antiunitary"
    write_output(dumps(matrix_document(m, conj)), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    t, field = load_ray_map(read_document(args.input))
    op = load_operator(read_document(args.operator))
    rep = wigner_lift.verify_compatibility(t, op, args.trials, args.tol, args.seed, field)
    doc = _report("verify", args, verdict=rep.verdict, sigma=op.sigma.value,
                  worst_residual=rep.worst_residual, witness=encode_witness(rep.witness))
    write_output(dumps(doc), args.out)
    return EXIT_OK if rep.passed else EXIT_VIOLATION


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid float {text!r}") from None
    if not (math.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError("tolerance must be positive and finite")
    return value


def _nonneg_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="projsym", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, trials=True, seed=True):
        p.add_argument("--tol", type=_positive_float, default=DEFAULT_TOL)
        if trials:
            p.add_argument("--trials", type=_nonneg_int, default=DEFAULT_TRIALS)
        if seed:
            p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
        p.add_argument("--out", default=None, help="write the report here instead of stdout")

    p = sub.add_parser("check", help="test quasi-unitarity and collinearity preservation")
    p.add_argument("input", help="ray-map file, '-' for stdin")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("lift", help="lift a ray map to a semi-linear operator")
    p.add_argument("input")
    p.add_argument("--mode", choices=("wigner", "artin"), default="wigner")
    common(p)
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("classify", help="decide unitary vs anti-unitary")
    p.add_argument("input")
    common(p, trials=False, seed=False)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("gen", help="write a seeded random matrix-induced ray map")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--kind", choices=("unitary", "antiunitary", "invertible"),
                   default="unitary")
    p.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen, tol=None)

    p = sub.add_parser("verify", help="check an operator report against a ray map")
    p.add_argument("input")
    p.add_argument("operator", help="report file produced by 'lift'")
    common(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    """Run one command and return its exit code (never raises)."""
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        # --help and friends
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    except InputError as exc:
        print(f"projsym: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except HypothesisViolation as exc:
        print(f"projsym: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except (NumericIndeterminacy, ProjectiveError, np.linalg.LinAlgError) as exc:
        print(f"projsym: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except Exception as exc:  # exit-code contract admits only 0-3
        print(f"projsym: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def entry_point():
    sys.exit(main())
