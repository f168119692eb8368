"""Command-line front end.

Inputs come from a JSON document (``--input``) holding named row-major
matrices, vectors and scalars, optionally overridden per name by plain-text
files (``--X x.txt``, whitespace-separated rows) and scalar flags. The
report is one JSON document on stdout; a short summary goes to stderr.

Exit codes: 0 success, 1 negative verdict with ``--fail-on-false``,
2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from . import __version__
from .classify import (
    PerturbationSpec,
    classify_ranks,
    epsilon_bound,
    exact_discrepancy,
    first_order_expansion,
    mc_oracle,
)
from .equivalence import build_equalizing_dispersion, check_estimator_equality, check_rss_equality, solve_gamma
from .errors import NumericalError, ValidationError
from .estimators import general_ridge_estimate, grss
from .linalg import Tolerances, as_matrix, as_vector, check_spd, spd_solve
from .model import Design, ModelTruth, RidgeSpec, validate_design
from .structure import decompose_dispersion

MATRIX_NAMES = ("X", "omega", "K1", "K2", "L1", "L2", "H", "delta")
VECTOR_NAMES = ("y", "beta")
SCALAR_NAMES = ("sigma2", "eps", "rho", "lambda")

Z_CONVENTION = "Z is the canonical orthonormal basis of the orthogonal complement of range(X); Z'Z = I"


@dataclass(eq=False)
class MatrixBundle:
    """Named inputs for one invocation; every entry is optional."""

    arrays: dict[str, np.ndarray] = dataclasses.field(default_factory=dict)
    scalars: dict[str, float] = dataclasses.field(default_factory=dict)

    @classmethod
    def from_mapping(cls, doc: dict) -> "MatrixBundle":
        if not isinstance(doc, dict):
            raise ValidationError("input document must be an object of named entries")
        unknown = set(doc) - set(MATRIX_NAMES + VECTOR_NAMES + SCALAR_NAMES)
        if unknown:
            raise ValidationError(f"unknown input names: {sorted(unknown)}")
        bundle = cls()
        for name, value in doc.items():
            bundle.set(name, value)
        return bundle

    def set(self, name: str, value) -> None:
        if value is None:
            return
        if name in MATRIX_NAMES:
            self.arrays[name] = as_matrix(value, name)
        elif name in VECTOR_NAMES:
            self.arrays[name] = as_vector(value, name)
        elif name in SCALAR_NAMES:
            try:
                v = float(value)
            except (TypeError, ValueError):
                raise ValidationError(f"{name} must be a number") from None
            if not math.isfinite(v):
                raise ValidationError(f"{name} must be finite")
            self.scalars[name] = v
        else:
            raise ValidationError(f"unknown input name {name!r}")

    def to_mapping(self) -> dict:
        doc: dict[str, Any] = {}
        for name in MATRIX_NAMES + VECTOR_NAMES:
            if name in self.arrays:
                doc[name] = self.arrays[name].tolist()
        for name in SCALAR_NAMES:
            if name in self.scalars:
                doc[name] = self.scalars[name]
        return doc

    def __eq__(self, other) -> bool:
        if not isinstance(other, MatrixBundle):
            return NotImplemented
        return (
            self.scalars == other.scalars
            and self.arrays.keys() == other.arrays.keys()
            and all(
                a.shape == other.arrays[n].shape and np.array_equal(a, other.arrays[n])
                for n, a in self.arrays.items()
            )
        )

    def get(self, name: str):
        return self.arrays.get(name, self.scalars.get(name))

    def require(self, *names: str) -> None:
        missing = [n for n in names if self.get(n) is None]
        if missing:
            raise ValidationError(f"missing required inputs: {', '.join(missing)}")

    def validate(self) -> None:
        """Check all dimensions against ``X`` before any computation."""
        self.require("X")
        n, k = self.arrays["X"].shape
        expect = {"omega": (n, n), "K1": (k, k), "K2": (k, k), "L1": (k, k), "L2": (k, k), "H": (k, k),
                  "delta": (n - k, n - k), "y": (n,), "beta": (k,)}
        for name, shape in expect.items():
            if name in self.arrays and self.arrays[name].shape != shape:
                raise ValidationError(f"{name} must have shape {shape}, got {self.arrays[name].shape}")
        for name in ("sigma2", "eps"):
            if name in self.scalars and not self.scalars[name] > 0:
                raise ValidationError(f"{name} must be positive")
        for name in ("rho", "lambda"):
            if name in self.scalars and self.scalars[name] < 0:
                raise ValidationError(f"{name} must be nonnegative")

    def ridge_pair(self, d: Design, omega: np.ndarray | None) -> tuple[np.ndarray, np.ndarray]:
        """``(K1, K2)``: explicit matrices, else ``lambda * I``, else the
        shrinkage pair ``rho * (X' Omega^-1 X, X'X)``, else zeros."""
        ks = []
        for name in ("K1", "K2"):
            if name in self.arrays:
                ks.append(self.arrays[name])
            elif "lambda" in self.scalars:
                ks.append(self.scalars["lambda"] * np.eye(d.k))
            elif "rho" in self.scalars:
                rho = self.scalars["rho"]
                if name == "K2":
                    ks.append(rho * d.gram)
                else:
                    if omega is None:
                        raise ValidationError("rho-based K1 needs omega")
                    ks.append(rho * d.X.T @ spd_solve(omega, d.X, "omega"))
            else:
                ks.append(np.zeros((d.k, d.k)))
        return ks[0], ks[1]


def load_text_matrix(path: str) -> np.ndarray:
    try:
        m = np.loadtxt(path, dtype=np.float64, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ValidationError(f"cannot read matrix file {path}: {exc}") from None
    return m


def load_bundle(args: argparse.Namespace) -> MatrixBundle:
    doc: dict = {}
    if args.input:
        try:
            with open(args.input) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read input document {args.input}: {exc}") from None
    bundle = MatrixBundle.from_mapping(doc)
    for name in MATRIX_NAMES + VECTOR_NAMES:
        path = getattr(args, f"file_{name}")
        if path:
            bundle.set(name, load_text_matrix(path))
    for name in SCALAR_NAMES:
        value = getattr(args, f"scalar_{name}")
        if value is not None:
            bundle.set(name, value)
    bundle.validate()
    return bundle


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    return obj


def _omega(bundle: MatrixBundle, d: Design, tol: Tolerances) -> np.ndarray:
    bundle.require("omega")
    return check_spd(bundle.arrays["omega"], "omega", tol, size=d.n)


def _blocks_dict(d: Design, omega: np.ndarray, tol: Tolerances) -> dict:
    b = decompose_dispersion(d, omega, tol)
    return {"gamma": b.gamma, "delta": b.delta, "xi": b.xi}


def cmd_estimate(args, bundle, d, tol):
    bundle.require("y")
    omega = _omega(bundle, d, tol) if args.psi == "omega" else bundle.arrays.get("omega")
    k1, k2 = bundle.ridge_pair(d, omega)
    ridge = args.ridge or ("K1" if args.psi == "omega" else "K2")
    K = k1 if ridge == "K1" else k2
    spec = RidgeSpec.explicit(omega, K, tol) if args.psi == "omega" else RidgeSpec.identity(K, tol)
    y = bundle.arrays["y"]
    beta_hat = general_ridge_estimate(d, spec, y)
    value = grss(d, spec, y)
    result = {"psi": args.psi, "ridge": ridge, "K": K, "beta_hat": beta_hat, "grss": value}
    return result, None, f"beta_hat = {np.array2string(beta_hat, precision=6)}, GRSS = {value:.6g}"


def cmd_check_eq(args, bundle, d, tol):
    omega = _omega(bundle, d, tol)
    k1, k2 = bundle.ridge_pair(d, omega)
    cert = check_estimator_equality(d, omega, k1, k2, tol)
    result = dataclasses.asdict(cert) | {"K1": k1, "K2": k2, "blocks": _blocks_dict(d, omega, tol)}
    return result, cert.equal, f"estimators equal: {cert.equal} (xi {cert.xi_residual:.2e}, condition {cert.condition_residual:.2e})"


def cmd_check_rss_eq(args, bundle, d, tol):
    omega = _omega(bundle, d, tol)
    k1, k2 = bundle.ridge_pair(d, omega)
    cert = check_rss_equality(d, omega, k1, k2, tol)
    result = {
        "estimator_equal": cert.estimator_equal,
        "rss_equal": cert.rss_equal,
        "residuals": cert.residuals,
        "A": cert.A,
        "B": cert.B,
        "K1": k1,
        "K2": k2,
    }
    return result, cert.rss_equal, f"estimators equal: {cert.estimator_equal}, estimators and GRSS equal: {cert.rss_equal}"


def cmd_gamma(args, bundle, d, tol):
    omega = bundle.arrays.get("omega")
    k1, k2 = bundle.ridge_pair(d, None if omega is None else check_spd(omega, "omega", tol))
    sol = solve_gamma(d, k1, k2, tol)
    result = {"exists": sol.exists, "kbar1": sol.kbar1, "kbar2": sol.kbar2, "K1": k1, "K2": k2}
    if sol.exists:
        result["gamma"] = sol.gamma_of(bundle.arrays.get("H"))
    return result, sol.exists, f"SPD Gamma exists: {sol.exists}"


def cmd_build_omega(args, bundle, d, tol):
    omega_in = bundle.arrays.get("omega")
    k1, k2 = bundle.ridge_pair(d, None if omega_in is None else check_spd(omega_in, "omega", tol))
    omega = build_equalizing_dispersion(
        d, k1, k2, bundle.arrays.get("H"), bundle.arrays.get("delta"), args.normalize_det, tol
    )
    cert = check_estimator_equality(d, omega, k1, k2, tol)
    sign, logdet = np.linalg.slogdet(omega)
    result = {
        "omega": omega,
        "det": float(sign * np.exp(logdet)),
        "normalized_det": args.normalize_det,
        "certificate": dataclasses.asdict(cert),
        "blocks": _blocks_dict(d, omega, tol),
        "K1": k1,
        "K2": k2,
    }
    return result, None, f"equalizing dispersion built (det {result['det']:.6g})"


def cmd_classify(args, bundle, d, tol):
    omega = _omega(bundle, d, tol)
    k1, k2 = bundle.ridge_pair(d, omega)
    v1, v2 = classify_ranks(d, omega, k1, k2, tol)
    return {"v1": v1, "v2": v2, "K1": k1, "K2": k2}, None, f"v1 = {v1}, v2 = {v2}"


def cmd_expand(args, bundle, d, tol):
    omega = _omega(bundle, d, tol)
    bundle.require("L1", "L2")
    l1, l2 = bundle.arrays["L1"], bundle.arrays["L2"]
    bound = epsilon_bound(d, omega, l1, l2, tol)
    eps = bundle.scalars.get("eps")
    if eps is None:
        eps = 0.1 * bound if math.isfinite(bound) else 1.0
    spec = PerturbationSpec(l1, l2, eps, bound)
    report = first_order_expansion(d, omega, spec, bundle.scalars.get("sigma2", 1.0), bundle.arrays.get("beta"), tol)
    result = {
        "eps": report.eps,
        "bound": report.bound,
        "bound_norm": "spectral",
        "dif_order0": report.dif_order0,
        "dif_order1": report.dif_order1,
        "diff_order0": report.diff_order0,
        "diff_order1": report.diff_order1,
        "v1": report.v1,
        "v2": report.v2,
    }
    if report.dif is not None:
        result["dif"] = report.dif
        result["diff_mse"] = report.diff_mse
    return result, None, f"eps = {report.eps:.4g} (bound {report.bound:.4g}), v1 = {report.v1}, v2 = {report.v2}"


def cmd_simulate(args, bundle, d, tol):
    omega = _omega(bundle, d, tol)
    bundle.require("beta")
    k1, k2 = bundle.ridge_pair(d, omega)
    truth = ModelTruth.create(bundle.arrays["beta"], bundle.scalars.get("sigma2", 1.0), omega, tol)
    dif_hat, stderr = mc_oracle(d, omega, k1, k2, truth, args.draws, args.seed, args.streams, args.workers, tol)
    dif, _ = exact_discrepancy(d, omega, k1, k2, truth, tol)
    dev = float(np.abs(dif_hat - dif).max())
    result = {
        "draws": args.draws,
        "seed": args.seed,
        "streams": args.streams,
        "dif_hat": dif_hat,
        "stderr": stderr,
        "dif_exact": dif,
        "max_abs_deviation": dev,
        "deviation_in_stderr": dev / stderr if stderr > 0 else 0.0,
    }
    return result, None, f"MC dif within {result['deviation_in_stderr']:.2f} standard errors of closed form"


COMMANDS = {
    "estimate": (cmd_estimate, "general ridge estimate and GRSS"),
    "check-eq": (cmd_check_eq, "decide beta_hat(Omega, K1) == beta_hat(I, K2)"),
    "check-rss-eq": (cmd_check_rss_eq, "decide simultaneous estimator and GRSS equality"),
    "gamma": (cmd_gamma, "existence and a sample of Gamma with X'X Gamma K1 = K2"),
    "build-omega": (cmd_build_omega, "construct an equalizing dispersion matrix"),
    "classify": (cmd_classify, "two-step rank classification (v1, v2)"),
    "expand": (cmd_expand, "first-order discrepancy expansion and eps bound"),
    "simulate": (cmd_simulate, "Monte Carlo estimate of the L2 difference matrix"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="JSON document of named matrices and scalars")
    for name in MATRIX_NAMES + VECTOR_NAMES:
        common.add_argument(f"--{name}", dest=f"file_{name}", metavar="FILE", help=f"plain-text file for {name}")
    for name in SCALAR_NAMES:
        common.add_argument(f"--{name}", dest=f"scalar_{name}", type=float, metavar="VALUE")
    common.add_argument("--rank-tol", type=float, help="relative singular-value cutoff")
    common.add_argument("--eq-tol", type=float, help="relative matrix-equality cutoff")
    common.add_argument("--pd-tol", type=float, help="minimum eigenvalue for positive definiteness")
    common.add_argument("--fail-on-false", action="store_true", help="exit 1 when a yes/no verdict is negative")

    parser = argparse.ArgumentParser(prog="ridge-equality", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {name: sub.add_parser(name, parents=[common], help=help_) for name, (_, help_) in COMMANDS.items()}
    subs["estimate"].add_argument("--psi", choices=("identity", "omega"), default="identity")
    subs["estimate"].add_argument("--ridge", choices=("K1", "K2"))
    subs["build-omega"].add_argument("--normalize-det", action="store_true")
    subs["simulate"].add_argument("--seed", type=int, default=0)
    subs["simulate"].add_argument("--draws", type=int, default=200_000)
    subs["simulate"].add_argument("--streams", type=int, default=1)
    subs["simulate"].add_argument("--workers", type=int, default=1)
    return parser


def run_command(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "simulate" and args.seed < 0:
        print("error: --seed must be a nonnegative integer", file=stderr)
        return 2
    try:
        tol = Tolerances.from_env(rank_rel=args.rank_tol, eq_rel=args.eq_tol, pd_min=args.pd_tol)
        bundle = load_bundle(args)
        d = validate_design(bundle.arrays["X"], tol)
        handler, _ = COMMANDS[args.command]
        result, verdict, summary = handler(args, bundle, d, tol)
    except ValidationError as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=stderr)
        return 3
    report = {
        "tool": "ridge-equality",
        "version": __version__,
        "command": args.command,
        "inputs": bundle.to_mapping(),
        "tolerances": tol.as_dict(),
        "conventions": {"Z": Z_CONVENTION, "residual_norm": "Frobenius, relative to operand sizes"},
        "result": result,
    }
    if verdict is not None:
        report["verdict"] = bool(verdict)
    stdout.write(json.dumps(_jsonable(report), indent=2, allow_nan=False) + "\n")
    print(summary, file=stderr)
    if args.fail_on_false and verdict is False:
        return 1
    return 0


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
