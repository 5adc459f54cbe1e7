"""Command-line front end: ``quasinormal check | exhibit | corpus``.

Exit codes: 0 when every expected outcome is met (and, for entries without
an expectation, nothing is Inconclusive); 1 on an unexpected verdict; 2 on a
configuration error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from importlib import resources

import jsonschema
import numpy as np

from .corpus import CORPUS_TOL, corpus_suite, parse_dims
from .exhibits import ExhibitError, build_exhibit
from .hilbert import TolerancePolicy
from .operators import FiniteMatrixOp, LocalOperator
from .results import ProbeConfig, Report, Status
from .trees import FiniteTree, T2Kappa, TreeShiftOp, basis_power_norms_test, quasinormal_tree_test, t2kappa_weights
from .verdicts import (
    ANCHORS,
    commutation_agreement,
    embry_suite,
    hyponormal_falsify,
    moment_matrices,
    moment_solvability_test,
    normality_test,
    paranormal_falsify,
    power_identity_test,
    quasinormal_test,
)

EXIT_OK, EXIT_UNEXPECTED, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


def load_schema() -> dict:
    text = resources.files("quasinormal").joinpath("schema/run_config.json").read_text()
    return json.loads(text)


def validate_config(config: dict) -> None:
    validator = jsonschema.Draft202012Validator(load_schema())
    errors = sorted(validator.iter_errors(config), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at {where}: {e.message}")


def _scalar(x) -> complex:
    return complex(x[0], x[1]) if isinstance(x, list) else complex(x)


def parse_matrix(rows) -> np.ndarray:
    n = len(rows)
    bad = [i for i, row in enumerate(rows) if len(row) != n]
    if bad:
        raise ConfigError(f"matrix must be square: row {bad[0]} has {len(rows[bad[0]])} entries, expected {n}")
    return np.array([[_scalar(x) for x in row] for row in rows], dtype=complex)


def parse_tree(spec: dict) -> TreeShiftOp:
    if "family" in spec:
        kappa = math.inf if spec.get("kappa") == "inf" else spec.get("kappa", 0)
        cap = spec.get("depth_cap", 8)
        tree = T2Kappa(kappa, cap, trunk_depth_cap=cap if kappa == math.inf else None)
        alpha = [_scalar(x) for x in spec.get("alpha", [2 ** -0.5, 2 ** -0.5])]
        beta = [_scalar(x) for x in spec.get("beta", [2 ** -0.5, 1.5 ** 0.5])]
        return TreeShiftOp(tree, t2kappa_weights(alpha, beta, _scalar(spec.get("trunk", 1.0))))
    try:
        parent = {int(k): int(v) for k, v in spec["parent"].items()}
        weights = {int(k): _scalar(v) for k, v in spec["weights"].items()}
    except ValueError as exc:
        raise ConfigError(f"tree vertex keys must be integers: {exc}") from None
    vertices = set(parent) | set(parent.values())
    return TreeShiftOp(FiniteTree(parent, vertices), weights)


def _json_arg(text: str, flag: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{flag}: not valid JSON ({exc.msg})") from None


def _tol(config: dict) -> TolerancePolicy:
    t = config.get("tol", {})
    return TolerancePolicy(t.get("abs_tol", 1e-10), t.get("rel_tol", 1e-10))


def _probes(config: dict) -> ProbeConfig:
    p = config.get("probes", {})
    return ProbeConfig(p.get("seed", 0), p.get("num_probes", 200), p.get("support_size", 6))


def _predicate_name(p: str) -> str:
    if ":" in p:
        base, n = p.split(":")
        return f"{base}[n={int(n)}]"
    return p


def build_operator(config: dict):
    """Return ``(operator, exhibit_spec_or_None)`` from a validated config."""
    spec = config["operator"]
    if "exhibit" in spec:
        ex = build_exhibit(spec["exhibit"])
        return ex.operator, ex
    if "matrix" in spec:
        return FiniteMatrixOp(parse_matrix(spec["matrix"])), None
    return parse_tree(spec["tree"]), None


def run_predicate(name: str, op: LocalOperator, probes: ProbeConfig, tol: TolerancePolicy):
    base, _, arg = name.partition(":")
    if base == "quasinormal":
        return ANCHORS["quasinormal"], quasinormal_test(op, probes, tol)
    if base == "normality":
        return ANCHORS["normality"], normality_test(op, probes, tol)
    if base == "paranormal":
        return ANCHORS["paranormal"], paranormal_falsify(op, probes, tol)
    if base == "hyponormal":
        return ANCHORS["hyponormal"], hyponormal_falsify(op, probes, tol)
    if base == "power_identity":
        return ANCHORS["power_identity"], power_identity_test(op, int(arg), probes, tol)
    if base == "moment":
        if not isinstance(op, FiniteMatrixOp):
            raise ConfigError("predicate 'moment' needs a matrix operator")
        return ANCHORS["moment"], moment_solvability_test(*moment_matrices(op), tol=tol)
    if base in ("quasinormal_tree", "basis_power_norms"):
        if not isinstance(op, TreeShiftOp):
            raise ConfigError(f"predicate {base!r} needs a tree operator")
        if base == "quasinormal_tree":
            return "d(v) = d(u) for each child v with nonzero weight", quasinormal_tree_test(op, tol=tol)
        return "||S e_u||^n = ||S^n e_u|| for every vertex u", basis_power_norms_test(op, int(arg), tol=tol)
    raise ConfigError(f"unknown predicate {name!r}")


def run_check(config: dict) -> Report:
    validate_config(config)
    tol, probes = _tol(config), _probes(config)
    try:
        op, ex = build_operator(config)
    except (ExhibitError, KeyError, ValueError) as exc:
        raise ConfigError(str(exc).strip("'\"")) from None
    predicates = config.get("predicates", [])
    suite = config.get("suite")
    if suite is None and not predicates:
        suite = "exhibit" if ex is not None else "embry"
    expected = {k: Status(v) for k, v in config.get("expected", {}).items()}
    if suite == "exhibit":
        if ex is None:
            raise ConfigError("suite 'exhibit' needs an exhibit operator")
        rep = ex.run(probes, tol)
    elif suite == "embry":
        if op is None:
            raise ConfigError(f"exhibit {ex.name} has no single operator for the embry suite")
        n_max = config.get("n_max", 6)
        power_exp = {k: expected.get(f"power_identity[n={k}]") for k in range(n_max + 1)}
        q_exp = expected.get("quasinormal")
        if ex is not None:
            power_exp = {k: power_exp[k] or ex.power_expectation(k) for k in power_exp}
            q_exp = q_exp or ex.expectation("quasinormal")
        rep = embry_suite(op, n_max, probes, tol, power_exp, q_exp)
    elif suite == "agreement":
        if not isinstance(op, FiniteMatrixOp):
            raise ConfigError("suite 'agreement' needs a matrix operator")
        rep = commutation_agreement(op, tol)
    else:
        rep = Report(op.descriptor if op is not None else ex.name, {}, seed=probes.seed)
    if op is None and predicates:
        raise ConfigError(f"exhibit {ex.name} has no single operator to run predicates on")
    for p in predicates:
        anchor, verdict = run_predicate(p, op, probes, tol)
        name = _predicate_name(p)
        exp = expected.get(name)
        if exp is None and ex is not None:
            exp = ex.expectation(name)
        rep.add(name, anchor, verdict, exp)
    rep.config = {"run": {k: v for k, v in config.items() if k != "output"}, **rep.config}
    rep.seed = probes.seed
    return rep


def exit_code(rep: Report) -> int:
    for e in rep.entries:
        if not e.matched:
            return EXIT_UNEXPECTED
        if e.expected is None and e.verdict.inconclusive:
            return EXIT_UNEXPECTED
    return EXIT_OK


def emit(rep: Report, out: str | None, timestamp: bool) -> None:
    text = rep.dumps(timestamp)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for line in rep.summary_lines():
        print(line, file=sys.stderr)


# ---------------------------------------------------------------------------
# argument handling


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, help="probe / corpus seed")
    p.add_argument("--tol-abs", type=float, help="absolute tolerance")
    p.add_argument("--tol-rel", type=float, help="relative tolerance")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp (byte-identical reruns)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quasinormal", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="run predicates or a suite on one operator")
    check.add_argument("--config", help="JSON run configuration")
    src = check.add_mutually_exclusive_group()
    src.add_argument("--exhibit", help="catalog name, e.g. prz3:n=4")
    src.add_argument("--matrix", help="JSON square matrix; entries are numbers or [re, im]")
    src.add_argument("--tree", help="JSON tree spec (family t2kappa or parent/weights maps)")
    check.add_argument("--predicate", action="append", default=[], help="repeatable; e.g. power_identity:3")
    check.add_argument("--suite", choices=["embry", "agreement", "exhibit"])
    check.add_argument("--nmax", type=int, help="largest n of the embry suite")
    check.add_argument("--num-probes", type=int)
    check.add_argument("--expect", action="append", default=[], metavar="PRED=STATUS",
                       help="declare an expected status, e.g. quasinormal=Fails")
    _add_common(check)

    ex = sub.add_parser("exhibit", help="build an exhibit and run its bundled expectations")
    ex.add_argument("name")
    ex.add_argument("--N", dest="sizes", help="comma-separated sizes for prz1")
    ex.add_argument("--num-probes", type=int)
    _add_common(ex)

    corp = sub.add_parser("corpus", help="structural invariants over a seeded random-matrix corpus")
    corp.add_argument("--count", type=int, default=500)
    corp.add_argument("--dims", default="2..6")
    _add_common(corp)
    return parser


def config_from_args(args) -> dict:
    config: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(config, dict):
            raise ConfigError("config must be a JSON object")
    if args.exhibit:
        config["operator"] = {"exhibit": args.exhibit}
    elif args.matrix:
        config["operator"] = {"matrix": _json_arg(args.matrix, "--matrix")}
    elif args.tree:
        config["operator"] = {"tree": _json_arg(args.tree, "--tree")}
    if args.predicate:
        config["predicates"] = list(args.predicate)
    if args.suite:
        config["suite"] = args.suite
    if args.nmax is not None:
        config["n_max"] = args.nmax
    if args.expect:
        exp = config.setdefault("expected", {})
        for item in args.expect:
            key, eq, val = item.partition("=")
            if not eq:
                raise ConfigError(f"--expect wants PRED=STATUS, got {item!r}")
            exp[_predicate_name(key)] = val
    if args.seed is not None or args.num_probes is not None:
        probes = config.setdefault("probes", {})
        if args.seed is not None:
            probes["seed"] = args.seed
        if args.num_probes is not None:
            probes["num_probes"] = args.num_probes
    if args.tol_abs is not None or args.tol_rel is not None:
        tol = config.setdefault("tol", {})
        if args.tol_abs is not None:
            tol["abs_tol"] = args.tol_abs
        if args.tol_rel is not None:
            tol["rel_tol"] = args.tol_rel
    if args.out:
        config["output"] = args.out
    return config


def _tol_from_args(args, default: TolerancePolicy) -> TolerancePolicy:
    return TolerancePolicy(default.abs_tol if args.tol_abs is None else args.tol_abs,
                           default.rel_tol if args.tol_rel is None else args.tol_rel)


def cmd_check(args) -> int:
    config = config_from_args(args)
    rep = run_check(config)
    emit(rep, config.get("output"), not args.no_timestamp)
    return exit_code(rep)


def cmd_exhibit(args) -> int:
    overrides = {}
    if args.sizes:
        try:
            overrides["N"] = [int(x) for x in args.sizes.split(",") if x.strip()]
        except ValueError:
            raise ConfigError(f"--N wants comma-separated integers, got {args.sizes!r}") from None
    try:
        ex = build_exhibit(args.name, **overrides)
    except (ExhibitError, KeyError, ValueError) as exc:
        raise ConfigError(str(exc).strip("'\"")) from None
    probes = ProbeConfig(args.seed or 0, 200 if args.num_probes is None else args.num_probes)
    rep = ex.run(probes, _tol_from_args(args, TolerancePolicy()))
    emit(rep, args.out, not args.no_timestamp)
    return exit_code(rep)


def cmd_corpus(args) -> int:
    if args.count < 0:
        raise ConfigError("--count must be nonnegative")
    try:
        dims = parse_dims(args.dims)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rep = corpus_suite(args.seed or 0, args.count, dims, _tol_from_args(args, CORPUS_TOL))
    emit(rep, args.out, not args.no_timestamp)
    return exit_code(rep)


COMMANDS = {"check": cmd_check, "exhibit": cmd_exhibit, "corpus": cmd_corpus}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
