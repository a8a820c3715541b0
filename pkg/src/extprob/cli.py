"""Command-line entry point: ``extprob <subcommand> [options]``.

Exit codes
    0  success
    1  domain error (not physical, degenerate state, ...) or a failed check
    2  malformed or missing input
    3  the output file could not be written

Errors are reported on stderr as one JSON line ``{"error": code, "reason": ...}``.
The default seed is 0 and can be changed with the ``EXTPROB_SEED`` environment
variable; ``--seed`` always wins.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from typing import Callable, Optional

import jsonschema
import numpy as np

from . import counterexample, detector, extmeasure, schemas, spectral, verify
from .bimodule import operator_from_json, vector_from_json
from .errors import ExtProbError, NotPhysical
from .hypercomplex import ring_by_name

SEED_ENV = "EXTPROB_SEED"
FAULT_ENV = "EXTPROB_INJECT_FAULT"  # test hook: name of a verify-algebra check to break

EXIT_OK, EXIT_DOMAIN, EXIT_INPUT, EXIT_OUTPUT = 0, 1, 2, 3


class InputError(Exception):
    """Malformed or missing input; maps to exit code 2."""

    def __init__(self, code: str, reason: str, pointer: Optional[str] = None):
        super().__init__(reason)
        self.code, self.reason, self.pointer = code, reason, pointer


class OutputError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    inputs: dict = field(default_factory=dict)
    seed: int = 0
    tol: Optional[float] = None
    fmt: str = "json"
    out: Optional[str] = None


@dataclass
class Outcome:
    document: dict
    summary: str
    ok: bool = True
    csv_rows: Optional[list] = None  # header first


# ---------------------------------------------------------------------------
# Input


def _load_json(path: str, schema: dict, what: str):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise InputError("InputNotFound", f"input not found: {path}") from None
    except IsADirectoryError:
        raise InputError("InputNotFound", f"input not found: {path} is a directory") from None
    except json.JSONDecodeError as exc:
        raise InputError("MalformedInput", f"{what} {path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    errors = sorted(jsonschema.Draft202012Validator(schema).iter_errors(data),
                    key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        pointer = "/" + "/".join(str(p) for p in err.absolute_path)
        raise InputError("MalformedInput", f"{what} {path}: {err.message} at {pointer}", pointer)
    return data


def _load_vector(path: str):
    data = _load_json(path, schemas.VECTOR, "state")
    try:
        return vector_from_json(data)
    except ValueError as exc:
        raise InputError("MalformedInput", f"state {path}: {exc}", "/coeffs") from None


def _load_operator(path: str):
    data = _load_json(path, schemas.OPERATOR, "operator")
    try:
        return operator_from_json(data)
    except ValueError as exc:
        raise InputError("MalformedInput", f"operator {path}: {exc}", "/entries") from None


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        seed = int(raw)
    except ValueError:
        raise InputError("MalformedInput", f"{SEED_ENV}={raw!r} is not an integer") from None
    if seed < 0:
        raise InputError("MalformedInput", f"{SEED_ENV} must be non-negative")
    return seed


def _tolerances(cfg: RunConfig) -> spectral.Tolerances:
    if cfg.tol is None:
        return spectral.DEFAULT
    return spectral.Tolerances(verify_tol=cfg.tol)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_verify_algebra(cfg: RunConfig) -> Outcome:
    fault = os.environ.get(FAULT_ENV) or None
    if fault is not None and fault not in verify.CHECKS:
        raise InputError("MalformedInput", f"{FAULT_ENV}={fault!r} names no check")
    tol = 1e-10 if cfg.tol is None else cfg.tol
    report = verify.run_suite(tol=tol, seed=cfg.seed, fault=fault)
    failed = [c["identity"] for c in report["checks"] if not c["ok"]]
    worst = max(c["max_residual"] for c in report["checks"])
    if failed:
        summary = f"verify-algebra: FAIL {', '.join(failed)} (tol {tol:g})"
    else:
        summary = f"verify-algebra: ok, {len(report['checks'])} identities, max residual {worst:.3g}"
    return Outcome(report, summary, ok=not failed)


def cmd_counterexample(cfg: RunConfig) -> Outcome:
    lam, mu = cfg.inputs["lambda"], cfg.inputs["mu"]
    rep = counterexample.report(lam, mu)
    comp = rep["checks"]["compatibility"]["compatible"]
    failed = [k for k, c in rep["checks"].items() if not c["ok"]]
    status = "ok" if rep["all_ok"] else "FAIL " + ", ".join(failed)
    return Outcome(rep, f"counterexample lambda={lam:g} mu={mu:g}: {status}; compatible={comp}",
                   ok=rep["all_ok"])


def cmd_spectral(cfg: RunConfig) -> Outcome:
    if cfg.inputs.get("conjecture_scan") is not None:
        return _conjecture(cfg, cfg.inputs["conjecture_scan"])
    if not cfg.inputs.get("operator"):
        raise InputError("MalformedInput", "spectral needs --operator or --conjecture-scan")
    A = _load_operator(cfg.inputs["operator"])
    rep = spectral.is_physical(A, _tolerances(cfg))
    if not rep:
        raise NotPhysical(rep.reason)
    doc = rep.result.to_json()
    doc["hermitian"] = rep.hermitian
    return Outcome(doc, f"spectral: physical, eigenvalues {_fmt_values(doc['eigenvalues'])}")


def cmd_conjecture_scan(cfg: RunConfig) -> Outcome:
    return _conjecture(cfg, cfg.inputs["count"])


def _conjecture(cfg: RunConfig, count: int) -> Outcome:
    res = spectral.conjecture_scan(count, cfg.seed, tol=_tolerances(cfg))
    frac = res["fraction_compatible"]
    shown = "n/a" if frac is None else f"{frac:.3f}"
    return Outcome(res, f"conjecture-scan: {res['compatible']}/{res['physical_pairs']} physical "
                        f"commuting pairs compatible ({shown})")


def cmd_measure(cfg: RunConfig) -> Outcome:
    psi = _load_vector(cfg.inputs["state"])
    A = _load_operator(cfg.inputs["observable"])
    spec = spectral.left_eigen_real(A, _tolerances(cfg))
    dist = extmeasure.measure(psi, spec)
    doc = {"ring": psi.ring.name, **dist.to_json()}
    pairs = ", ".join(f"{v:g}: {p:.6g}" for v, p in zip(dist.eigenvalues, dist.probabilities))
    return Outcome(doc, f"measure: {{{pairs}}}")


def cmd_joint(cfg: RunConfig) -> Outcome:
    psi = _load_vector(cfg.inputs["state"])
    A = _load_operator(cfg.inputs["a"])
    B = _load_operator(cfg.inputs["b"])
    tol = _tolerances(cfg)
    sa, sb = spectral.left_eigen_real(A, tol), spectral.left_eigen_real(B, tol)
    order = cfg.inputs["order"]
    w = extmeasure.joint_weights(psi, sa, sb)
    table = extmeasure.joint_table(psi, sa, sb, order, w)
    marg = extmeasure.first_marginal_invariance(psi, sa, sb)
    doc = {
        "ring": psi.ring.name,
        "order": order,
        "a_eigenvalues": list(sa.distinct_eigenvalues),
        "b_eigenvalues": list(sb.distinct_eigenvalues),
        "table": table.tolist(),
        "order_gap": marg.order_gap,
        "a_first_marginal_gap": marg.a_gap,
    }
    return Outcome(doc, f"joint ({order}): {table.shape[0]}x{table.shape[1]} table, "
                        f"order gap {marg.order_gap:.3g}")


def cmd_chsh(cfg: RunConfig) -> Outcome:
    mode = cfg.inputs["mode"]
    if mode == "quantum":
        return _chsh_quantum(cfg)
    scan = cfg.inputs.get("scan")
    if scan is not None:
        values = extmeasure.scan_signed_models(scan, cfg.seed, mode, cfg.inputs.get("workers", 1))
        max_abs = float(np.max(np.abs(values))) if values.size else 0.0
        doc = {"mode": mode, "count": int(scan), "seed": cfg.seed, "max_abs_S": max_abs,
               "classical_bound": 2.0, "within_bound": bool(max_abs <= 2.0 + 1e-9),
               "values": [float(x) for x in values]}
        rows = [["index", "S"]] + [[i, repr(float(x))] for i, x in enumerate(values)]
        return Outcome(doc, f"chsh {mode} scan: {scan} models, max |S| = {max_abs!r}", csv_rows=rows)
    if cfg.inputs.get("model"):
        data = _load_json(cfg.inputs["model"], schemas.SIGNED_MODEL, "model")
        try:
            model = extmeasure.SignedLHVModel.from_json(data)
        except ValueError as exc:
            raise InputError("MalformedInput", f"model {cfg.inputs['model']}: {exc}") from None
        source = cfg.inputs["model"]
    else:
        model, source = extmeasure.witness_model(), "witness"
    S = extmeasure.chsh_signed_lhv(model, mode)
    doc = {"mode": mode, "model": model.to_json(), "source": source, "S": S}
    return Outcome(doc, f"chsh {mode} ({source}): S = {S!r}", csv_rows=[["index", "S"], [0, repr(S)]])


def _chsh_quantum(cfg: RunConfig) -> Outcome:
    ring = ring_by_name(cfg.inputs["ring"])
    ang = extmeasure.TSIRELSON_ANGLES
    obs = {}
    for name, theta in ang.items():
        first = name.startswith("a")
        op = (extmeasure.two_party_operator(ring, a=extmeasure.spin(theta)) if first
              else extmeasure.two_party_operator(ring, b=extmeasure.spin(theta)))
        obs[name] = spectral.left_eigen_real(op, _tolerances(cfg))
    psi = extmeasure.singlet(ring)
    E = [[extmeasure.correlator(psi, obs[x], obs[y]) for y in ("b", "b2")] for x in ("a", "a2")]
    S = extmeasure.chsh_value(np.array(E))
    doc = {"mode": "quantum", "ring": ring.name, "state": "singlet",
           "angles": {k: float(v) for k, v in ang.items()}, "E": E, "S": S,
           "tsirelson_bound": 2 * math.sqrt(2)}
    return Outcome(doc, f"chsh quantum ({ring.name} singlet): S = {S!r}",
                   csv_rows=[["index", "S"], [0, repr(S)]])


def cmd_detector_sim(cfg: RunConfig) -> Outcome:
    data = _load_json(cfg.inputs["model"], schemas.COLOR_MODEL, "model")
    model = detector.ColorModel.from_json(data)
    if cfg.inputs.get("exact"):
        ex = detector.exact_expectations(model)
        doc = {"model": model.to_json(), "exact": ex.to_json(),
               "report": detector.predictivity_report(model)}
        rows = [["n", "P_n"]] + [[n, repr(p)] for n, p in ex.P_n.items()]
        return Outcome(doc, f"detector-sim exact: P_a = {ex.P_a!r}, 1 - P_0 = {ex.coarse!r}",
                       csv_rows=rows)
    shots = cfg.inputs.get("shots")
    if shots is None:
        raise InputError("MalformedInput", "detector-sim needs --shots (or --exact)")
    shards = cfg.inputs.get("shards")
    if shards:
        res = detector.simulate_sharded(model, shots, cfg.seed, shards)
    else:
        res = detector.simulate(model, shots, cfg.seed, cfg.inputs.get("workers", 1))
    doc = {"model": model.to_json(), "seed": cfg.seed, **res.to_json()}
    rows = [["n", "count", "P_n"]] + [[n, c, repr(res.P_n[n])] for n, c in res.counts.items()]
    return Outcome(doc, f"detector-sim: N = {res.N}, P_a = {res.P_a!r}, 1 - P_0 = {res.coarse!r}",
                   csv_rows=rows)


COMMANDS: dict[str, Callable[[RunConfig], Outcome]] = {
    "verify-algebra": cmd_verify_algebra,
    "counterexample": cmd_counterexample,
    "spectral": cmd_spectral,
    "measure": cmd_measure,
    "joint": cmd_joint,
    "chsh": cmd_chsh,
    "detector-sim": cmd_detector_sim,
    "conjecture-scan": cmd_conjecture_scan,
}


def _fmt_values(values) -> str:
    return "[" + ", ".join(f"{v:g}" for v in values) + "]"


# ---------------------------------------------------------------------------
# Output


def render(outcome: Outcome, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(outcome.csv_rows)
        return buf.getvalue()
    return json.dumps(outcome.document, indent=2, allow_nan=False) + "\n"


def write_atomic(path: str, text: str) -> None:
    """Write via a temporary file in the target directory and rename it into place."""
    directory = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp = tempfile.mkstemp(prefix=".extprob-", dir=directory)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror}") from None
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise OutputError(f"cannot write {path}: {exc.strerror}") from None


# ---------------------------------------------------------------------------
# Argument parsing


def _positive_float(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if not (x > 0 and math.isfinite(x)):
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return x


def _count(minimum: int) -> Callable[[str], int]:
    def parse(text: str) -> int:
        try:
            n = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
        if n < minimum:
            raise argparse.ArgumentTypeError(f"must be at least {minimum}")
        return n

    return parse


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("common options")
    g.add_argument("--seed", type=_count(0), default=None,
                   help=f"random seed (default 0, or ${SEED_ENV})")
    g.add_argument("--tol", type=_positive_float, default=None,
                   help="tolerance override (verify-algebra: residual bound, default 1e-10; "
                        "spectral commands: eigen/Gram verification, default 1e-8)")
    g.add_argument("--out", default=None, help="write the result here (atomically) instead of stdout")
    g.add_argument("--format", choices=("json", "csv"), default="json", dest="fmt",
                   help="output format; csv only for chsh and detector-sim")

    parser = argparse.ArgumentParser(
        prog="extprob", description="Extended probabilities over quaternion and Clifford bimodules.",
        epilog="exit codes: 0 ok, 1 domain error or failed check, 2 bad input, 3 output write failure",
        allow_abbrev=False)
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text, description=help_text,
                              allow_abbrev=False)

    add("verify-algebra", "check the ring and bimodule identities")

    p = add("counterexample", "reproduce the commuting-but-incompatible Clifford pair")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="first eigenvalue of A (default 1)")
    p.add_argument("--mu", type=float, default=2.0, help="second eigenvalue of A (default 2)")

    p = add("spectral", "left eigenbasis with real eigenvalues of an operator")
    p.add_argument("--operator", help="operator JSON {ring, rank, entries}")
    p.add_argument("--conjecture-scan", type=_count(1), metavar="N",
                   help="instead, test N random commuting Clifford pairs for compatibility")

    p = add("measure", "renormalized outcome distribution of one observable")
    p.add_argument("--state", required=True, help="state JSON {ring, rank, coeffs}")
    p.add_argument("--observable", required=True, help="operator JSON")

    p = add("joint", "sequential joint statistics of two commuting observables")
    p.add_argument("--state", required=True, help="state JSON")
    p.add_argument("--a", required=True, help="first observable (operator JSON)")
    p.add_argument("--b", required=True, help="second observable (operator JSON)")
    p.add_argument("--order", choices=("a-first", "b-first", "symmetric"), default="a-first")

    p = add("chsh", "CHSH value of signed hidden-variable models or the singlet")
    p.add_argument("--mode", choices=("raw", "renorm", "quantum"), default="renorm")
    p.add_argument("--model", help="signed model JSON {weights, a_outcomes, b_outcomes} "
                                   "(default: the (2, -1) witness)")
    p.add_argument("--scan", type=_count(1), metavar="N", help="scan N random signed models")
    p.add_argument("--workers", type=_count(1), default=1, help="processes for --scan")
    p.add_argument("--ring", choices=("quaternion", "clifford"), default="clifford",
                   help="ring for --mode quantum")

    p = add("detector-sim", "Monte Carlo of detector colors")
    p.add_argument("--model", required=True, help="color model JSON {colors: [{n, p}]}")
    p.add_argument("--shots", type=_count(1), help="number of particles N")
    p.add_argument("--exact", action="store_true", help="closed-form expectations instead of sampling")
    p.add_argument("--workers", type=_count(1), default=1, help="processes (result is identical)")
    p.add_argument("--shards", type=_count(1), help="run as this many sequential shards (result is identical)")

    p = add("conjecture-scan", "fraction of random commuting physical Clifford pairs that are compatible")
    p.add_argument("--count", type=_count(1), default=100)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    skip = {"subcommand", "seed", "tol", "out", "fmt"}
    inputs = {k: v for k, v in vars(args).items() if k not in skip}
    if "lam" in inputs:
        inputs["lambda"] = inputs.pop("lam")
    if args.subcommand == "chsh" and inputs["mode"] == "quantum" and (inputs["scan"] or inputs["model"]):
        raise InputError("MalformedInput", "--mode quantum takes neither --model nor --scan")
    if args.fmt == "csv" and args.subcommand not in ("chsh", "detector-sim"):
        raise InputError("MalformedInput", "csv output is only available for chsh and detector-sim")
    seed = args.seed if args.seed is not None else _default_seed()
    return RunConfig(args.subcommand, inputs, seed, args.tol, args.fmt, args.out)


def _emit_error(code: str, reason: str, pointer: Optional[str] = None) -> None:
    payload = {"error": code, "reason": reason}
    if pointer is not None:
        payload["pointer"] = pointer
    print(json.dumps(payload), file=sys.stderr)


def run(cfg: RunConfig) -> int:
    try:
        outcome = COMMANDS[cfg.subcommand](cfg)
    except InputError as exc:
        _emit_error(exc.code, exc.reason, exc.pointer)
        return EXIT_INPUT
    except ExtProbError as exc:
        _emit_error(exc.code, exc.reason)
        return EXIT_DOMAIN
    text = render(outcome, cfg.fmt)
    if cfg.out:
        try:
            write_atomic(cfg.out, text)
        except OutputError as exc:
            _emit_error("OutputWriteFailed", str(exc))
            return EXIT_OUTPUT
        print(outcome.summary)
    else:
        sys.stdout.write(text)
    if not outcome.ok:
        print(outcome.summary, file=sys.stderr)
    return EXIT_OK if outcome.ok else EXIT_DOMAIN


def main(argv: Optional[list] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
    except InputError as exc:
        _emit_error(exc.code, exc.reason, exc.pointer)
        return EXIT_INPUT
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
