"""Command-line front end: ``genuniq {certify,verify,sobi-table,trig-check}``.

Exit codes: 0 pass / consistent, 2 fail / counterexample, 3 inconclusive,
1 usage, IO or parse error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .apps import sobi, trig
from .certify import SCHEMA_VERSION, certify_generic_uniqueness, jsonable
from .config import DEFAULT_SEED, MIN_RESTARTS, RunConfig
from .errors import GenuniqError, ModelSyntaxError
from .parser import parse_model
from .solve import empirical_uniqueness_test

EXIT_OK, EXIT_USAGE, EXIT_FAIL, EXIT_INCONCLUSIVE = 0, 1, 2, 3
TRIG_TOL = 1e-9
TRIG_POINTS = 100


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    common.add_argument("--restarts", type=int, default=20)
    common.add_argument("--batch", type=int, default=None)
    common.add_argument("--rank-tol", type=float, default=RunConfig.rank_tol)
    common.add_argument("--accept-tol", type=float, default=RunConfig.accept_tol)
    common.add_argument("--match-tol", type=float, default=RunConfig.match_tol)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--out", default=None)

    parser = _Parser(prog="genuniq", description="Generic uniqueness checks for structured factorizations.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("certify", parents=[common], help="run the uniqueness checklist on a model file")
    p.add_argument("model")
    p = sub.add_parser("verify", parents=[common], help="empirical recovery test on a model file")
    p.add_argument("model")
    p = sub.add_parser("sobi-table", parents=[common], help="bounds on the number of SOBI sources")
    p.add_argument("--pipeline", action="store_true",
                   help="also recompute the first row for I=3..5 through the checklist")
    p.add_argument("--pipeline-p", type=int, default=40)
    p = sub.add_parser("trig-check", parents=[common], help="check the multiple-angle polynomials")
    p.add_argument("n_max", type=int)
    return parser


def config_from(args) -> RunConfig:
    try:
        return RunConfig(
            seed=args.seed, rank_tol=args.rank_tol, accept_tol=args.accept_tol, match_tol=args.match_tol,
            restarts=args.restarts, batch=args.batch, out=args.out, format=args.format,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _load_model(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_model(text)


def _emit(cfg: RunConfig, payload: dict, text: str):
    if cfg.format == "json":
        out = json.dumps(jsonable(payload), sort_keys=True, indent=2) + "\n"
    else:
        out = text.rstrip("\n") + "\n"
    if cfg.out:
        try:
            with open(cfg.out, "w", encoding="utf-8") as fh:
                fh.write(out)
        except OSError as exc:
            raise UsageError(f"cannot write {cfg.out}: {exc.strerror}") from exc
    else:
        sys.stdout.write(out)


def _model_dims(model) -> dict:
    return {"K": model.K, "N": model.N, "R": model.R, "l": model.l, "domain": model.domain}


# -- commands -----------------------------------------------------------------

def cmd_certify(path: str, cfg: RunConfig) -> int:
    model = _load_model(path)
    report = certify_generic_uniqueness(model, cfg.seed, cfg.tolerances, batch=cfg.batch)
    payload = {"command": "certify", "model": _model_dims(model), "config": cfg.to_dict(), **report.to_dict()}
    lines = [f"model: K={model.K} N={model.N} R={model.R} l={model.l} domain={model.domain}"]
    for k, entry in sorted(report.assumptions.items()):
        lines.append(f"assumption {k}: {entry.verdict}")
    lines += [
        f"N_hat: {report.n_hat}",
        f"l_hat: {report.l_hat}",
        f"scaling invariant: {report.scaling_invariant} ({report.scaling_source})",
        f"certified max R: {report.certified_max_r}",
        f"verdict: {report.verdict}",
    ]
    _emit(cfg, payload, "\n".join(lines))
    if report.verdict == "pass":
        return EXIT_OK
    if report.verdict in ("fail-bound", "fail-assumption"):
        return EXIT_FAIL
    return EXIT_INCONCLUSIVE


def cmd_verify(path: str, cfg: RunConfig) -> int:
    model = _load_model(path)
    if model.K < model.R:
        raise UsageError(f"verify needs K >= R (got K={model.K}, R={model.R})")
    report = empirical_uniqueness_test(
        model, cfg.seed, restarts=cfg.restarts, accept_tol=cfg.accept_tol,
        match_tol=cfg.match_tol, min_restarts=MIN_RESTARTS,
    )
    payload = {
        "schema_version": SCHEMA_VERSION, "command": "verify",
        "model": _model_dims(model), "config": cfg.to_dict(), **report.to_dict(),
    }
    text = (
        f"model: K={model.K} N={model.N} R={model.R} l={model.l} domain={model.domain}\n"
        f"restarts: {report.restarts}  converged: {report.converged}  matched: {report.matched}\n"
        f"degenerate: {report.degenerate}\n"
        f"verdict: {report.verdict} ({report.reason})"
    )
    _emit(cfg, payload, text)
    return {"consistent": EXIT_OK, "counterexample": EXIT_FAIL}.get(report.verdict, EXIT_INCONCLUSIVE)


def cmd_sobi_table(cfg: RunConfig, pipeline: bool = False, pipeline_p: int = 40) -> int:
    table = sobi.sobi_table()
    ok = all(tuple(table[k]) == tuple(v) for k, v in sobi.TABLE_EXPECTED.items())
    payload = {
        "schema_version": SCHEMA_VERSION, "command": "sobi-table", "config": cfg.to_dict(),
        "I": list(sobi.TABLE_SIZES), **{k: list(v) for k, v in table.items()}, "matches_expected": ok,
    }
    text = sobi.format_table(table)
    if pipeline:
        rows = {}
        for I in (3, 4, 5):
            rep = certify_generic_uniqueness(sobi.sobi_model(I, pipeline_p), cfg.seed, cfg.tolerances, batch=cfg.batch)
            rows[I] = rep.certified_max_r
        agree = all(rows[I] == table["thm2"][sobi.TABLE_SIZES.index(I)] for I in rows)
        payload["pipeline"] = {"P": pipeline_p, "certified_max_r": rows, "agrees": agree}
        text += "\nchecklist, P=%d: " % pipeline_p + " ".join(f"I={I}:{v}" for I, v in rows.items())
        text += "  (agrees)" if agree else "  (MISMATCH)"
        ok = ok and agree
    _emit(cfg, payload, text)
    return EXIT_OK if ok else EXIT_FAIL


def trig_sweep(n_max: int, seed: int, points: int = TRIG_POINTS) -> dict:
    """Max errors of P_n, Q_n, R_n against math.cos/sin for n = 1..n_max."""
    if not 1 <= n_max <= trig.MAX_DEGREE:
        raise UsageError(f"n_max must be in 1..{trig.MAX_DEGREE}")
    rows = []
    for n in range(1, n_max + 1):
        P = trig.cheb_P(n)
        Q, R = trig.tan_half_QR(n)
        lhs = trig.poly_add(trig.poly_mul(list(Q.numerator), list(Q.numerator)),
                            trig.poly_mul(list(R.numerator), list(R.numerator)))
        exact = lhs == trig.poly_mul(list(Q.denominator), list(Q.denominator))
        zetas = np.random.default_rng([seed, n]).uniform(-math.pi, math.pi, points)
        err_p = err_q = err_r = 0.0
        for z in zetas:
            z = float(z)
            t = math.tan(z / 2)
            err_p = max(err_p, abs(math.cos(n * z) - float(trig.eval_exact(P, math.cos(z)))))
            err_q = max(err_q, abs(math.cos(n * z) - Q(t)))
            err_r = max(err_r, abs(math.sin(n * z) - R(t)))
        rows.append({"n": n, "err_P": err_p, "err_Q": err_q, "err_R": err_r, "exact_identity": exact})
    return {"rows": rows, "tol": TRIG_TOL, "points": points}


def cmd_trig_check(n_max: int, cfg: RunConfig) -> int:
    sweep = trig_sweep(n_max, cfg.seed)
    ok = all(max(r["err_P"], r["err_Q"], r["err_R"]) < TRIG_TOL and r["exact_identity"] for r in sweep["rows"])
    payload = {"schema_version": SCHEMA_VERSION, "command": "trig-check", "config": cfg.to_dict(),
               "n_max": n_max, **sweep, "pass": ok}
    lines = [f"{'n':>3} {'max|P err|':>12} {'max|Q err|':>12} {'max|R err|':>12}  Q^2+R^2=1"]
    for r in sweep["rows"]:
        lines.append(f"{r['n']:>3} {r['err_P']:>12.3e} {r['err_Q']:>12.3e} {r['err_R']:>12.3e}  {r['exact_identity']}")
    if n_max == 1:
        Q, R = trig.tan_half_QR(1)
        forms = {"Q_1": trig.rational_to_text(Q), "R_1": trig.rational_to_text(R)}
        payload["forms"] = forms
        lines += [f"cos z = {forms['Q_1']}", f"sin z = {forms['R_1']}"]
    lines.append("pass" if ok else "FAIL")
    _emit(cfg, payload, "\n".join(lines))
    return EXIT_OK if ok else EXIT_FAIL


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        cfg = config_from(args)
        if args.command == "certify":
            return cmd_certify(args.model, cfg)
        if args.command == "verify":
            return cmd_verify(args.model, cfg)
        if args.command == "sobi-table":
            return cmd_sobi_table(cfg, args.pipeline, args.pipeline_p)
        return cmd_trig_check(args.n_max, cfg)
    except ModelSyntaxError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, OverflowError, GenuniqError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
