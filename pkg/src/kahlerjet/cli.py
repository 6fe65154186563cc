"""Command-line front end: ``kjet expand`` and ``kjet verify``.

Exit codes: 0 success, 1 failed checks, 2 usage errors, 3 unknown or
unsupported model/object/order, 4 malformed input files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_MODEL, EXIT_INPUT = 0, 1, 2, 3, 4
MAX_ORDER = 12
OBJECTS = ("phi_inv", "phi", "theta_exp", "k", "k_inv", "psi_inv", "potential", "dist2", "z_knc")
SUITE_CHOICES = ("coefficients", "oracles", "operators", "symmetric", "spencer", "all")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _cap_threads():
    """Honour KJET_THREADS by capping the BLAS pools before numpy loads."""
    n = os.environ.get("KJET_THREADS")
    if not n:
        return
    if not n.isdigit() or int(n) < 1:
        raise CliError(f"KJET_THREADS must be a positive integer, got {n!r}", EXIT_USAGE)
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kjet", description="Normal-coordinate jet expansions and checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("expand", help="compute a series expansion")
    src = ex.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", help="model-zoo name, e.g. grassmann_c")
    src.add_argument("--jet", help="curvature jet JSON file")
    ex.add_argument("--params", default="", help="comma separated model parameters, e.g. 1,2 or so3")
    ex.add_argument("--object", required=True, choices=OBJECTS)
    ex.add_argument("--order", type=int, default=7, help="truncation degree (default 7)")
    ex.add_argument("--at", help="vector JSON file; print per-degree values at this point")
    ex.add_argument("--field", help="vector JSON file with the constant field Z (needed for z_knc)")
    ex.add_argument("--out", help="write the series JSON here instead of stdout")

    ve = sub.add_parser("verify", help="run verification suites")
    ve.add_argument("--suite", action="append", choices=SUITE_CHOICES, help="may be repeated (default all)")
    ve.add_argument("--tol", type=float, default=None, help="replace every check tolerance by this value")
    ve.add_argument("--report", help="write the JSON report here instead of stdout")
    ve.add_argument("--seed", type=int, default=0)
    ve.add_argument("--timings", action="store_true", help="add per-suite wall-clock times to the report")
    return parser


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_INPUT) from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"{path} is not valid JSON: {exc}", EXIT_INPUT) from exc


def read_vector(path, dim: int):
    """A vector document {"dim": n, "values": [...]} (a bare list is accepted too)."""
    import numpy as np

    doc = _read_json(path)
    if isinstance(doc, dict):
        values = doc.get("values")
        declared = doc.get("dim", dim)
    else:
        values, declared = doc, dim
    try:
        vec = np.asarray(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise CliError(f"{path}: vector entries must be numbers", EXIT_INPUT) from exc
    if vec.ndim != 1 or vec.shape[0] != dim or declared != dim:
        raise CliError(f"{path}: expected a vector of dimension {dim}", EXIT_INPUT)
    return vec


def _load_jet(args):
    from .curvature import CurvatureJet
    from .symmetric_models import model_zoo

    if args.jet:
        doc = _read_json(args.jet)
        try:
            return CurvatureJet.from_dict(doc), {"jet": os.path.basename(args.jet)}
        except (KeyError, TypeError, ValueError) as exc:
            raise CliError(f"malformed jet file {args.jet}: {exc}", EXIT_INPUT) from exc
    try:
        model = model_zoo(args.model, args.params, order=max(3, args.order - 2))
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError(f"unknown model {args.model!r} with params {args.params!r}: {exc}", EXIT_MODEL) from exc
    return model.jet, {"model": model.name, "params": args.params}


def _compute(obj: str, jet, trunc: int, field=None):
    from . import knc, transport

    if obj == "phi_inv":
        return transport.solve_phi_inv(jet, trunc)
    if obj == "phi":
        return transport.phi(jet, trunc)
    if obj == "theta_exp":
        return transport.solve_theta_exp(jet, trunc)
    if obj == "k_inv":
        return knc.solve_k_inv(jet, trunc)
    if obj == "k":
        return knc.k_element(jet, trunc)
    if obj == "psi_inv":
        # valid through trunc - 1, so solve one degree further
        return knc.psi_inv(jet, trunc + 1).truncate(trunc)
    if obj == "potential":
        return knc.potential(jet, trunc)
    if obj == "dist2":
        return knc.distance_sq(jet, trunc)
    if obj == "z_knc":
        return knc.z_knc_linear(jet, field, trunc)
    raise CliError(f"unknown object {obj!r}", EXIT_MODEL)


def cmd_expand(args) -> int:
    from . import __version__
    from .knc import NormalizationError
    from .transport import TorsionError

    if args.order < 1 or args.order > MAX_ORDER:
        raise CliError(f"order must lie in 1..{MAX_ORDER}", EXIT_MODEL)
    jet, origin = _load_jet(args)
    needs_cplx = args.object in ("k", "k_inv", "psi_inv", "potential", "dist2", "z_knc")
    if needs_cplx and jet.point.cplx is None:
        raise CliError(f"{args.object} needs a jet with a complex structure", EXIT_MODEL)
    field = None
    if args.object == "z_knc":
        if not args.field:
            raise CliError("z_knc needs --field", EXIT_USAGE)
        field = read_vector(args.field, jet.dim)
    try:
        s = _compute(args.object, jet, args.order, field)
    except (TorsionError, NormalizationError) as exc:
        raise CliError(str(exc), EXIT_INPUT) from exc
    doc = {
        "schema": 1,
        "kind": "expansion",
        "object": args.object,
        **origin,
        "order": args.order,
        "engine": {"name": "kahlerjet", "version": __version__},
        "series": s.to_dict(),
    }
    if args.at:
        X = read_vector(args.at, jet.dim)
        vals = s.eval_terms(X)
        doc["at"] = {"vector": X.tolist(), "degree_values": [_jsonable(v) for v in vals]}
    text = json.dumps(doc, indent=1, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if args.at:
        for k, v in enumerate(doc["at"]["degree_values"]):
            print(f"degree {k}: {v}", file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


def _jsonable(v):
    import numpy as np

    arr = np.asarray(v, dtype=float)
    return float(arr) if arr.ndim == 0 else arr.tolist()


def cmd_verify(args) -> int:
    from .suites import run_suites

    names = args.suite or ["all"]
    report = run_suites(names, seed=args.seed, tol=args.tol, timings=args.timings)
    text = json.dumps(report, indent=1, sort_keys=True)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text + "\n")
        for c in report["checks"]:
            if not c["passed"]:
                print(f"FAIL {c['id']}: {c['measured']:.3e} > {c['tol']:.1e}")
        print(f"{report['n_checks'] - report['n_failed']}/{report['n_checks']} checks passed")
    else:
        print(text)
    return EXIT_OK if report["passed"] else EXIT_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _cap_threads()
        if args.command == "expand":
            return cmd_expand(args)
        return cmd_verify(args)
    except CliError as exc:
        print(f"kjet: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
