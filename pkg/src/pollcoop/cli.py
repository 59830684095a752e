"""Command-line front end: ``pollcoop {solve,cf,shapley,check} config.json``.

Exit codes: 0 when everything passes, 1 when a mathematical check fails,
2 for configuration or IO errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import analytic
from .charfun import (BASIC_KINDS, COVER_MAX_PLAYERS, CFKind, CFTable, alignment_coefficient, cf_table,
                      distances, verify_partial_order, verify_superadditivity)
from .errors import ConfigError, PollCoopError
from .game import MAX_PLAYERS, Coalition, GameSpec, PlayerParams, random_regular_spec, validate_spec
from .oracle import DEFAULT_M, validate_against_closed_forms
from .solutions import check_imputation, compare_shapley, imputation_vertices, shapley_closed_form

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG = 0, 1, 2

TOP_KEYS = {"t0", "T", "x0", "players", "eval_time", "eval_state", "cf_kinds", "oracle_M", "tolerances", "format"}
REQUIRED_KEYS = ("t0", "T", "x0", "players")
PLAYER_KEYS = {"b", "d"}
TOL_KEYS = {"identity", "oracle_rel"}
RANDOM_SUITE_SIZE = 20


@dataclass(frozen=True)
class RunConfig:
    spec: GameSpec
    eval_time: float
    eval_state: float
    cf_kinds: tuple[CFKind, ...] = tuple(CFKind)
    oracle_M: int = DEFAULT_M
    identity_tol: float = 1e-9
    oracle_rel_tol: float = 1e-3
    format: str = "json"


def _number(value: Any, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(field, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(field, "must be finite")
    return float(value)


def _reject_unknown(obj: dict, allowed: set, where: str) -> None:
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ConfigError(f"{where}{extra[0]}", "unknown key")


def _kinds(value: Any, field: str = "cf_kinds") -> tuple[CFKind, ...]:
    if isinstance(value, str):
        value = [v.strip() for v in value.split(",") if v.strip()]
    if not isinstance(value, list) or not value:
        raise ConfigError(field, "expected a non-empty list of kinds")
    out = []
    for v in value:
        if v == "all":
            return tuple(CFKind)
        try:
            out.append(CFKind(v))
        except ValueError:
            raise ConfigError(field, f"unknown kind {v!r}") from None
    return tuple(dict.fromkeys(out))


def config_from_dict(raw: Any) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    _reject_unknown(raw, TOP_KEYS, "")
    for key in REQUIRED_KEYS:
        if key not in raw:
            raise ConfigError(key, "required field is missing")
    t0, T, x0 = (_number(raw[k], k) for k in ("t0", "T", "x0"))
    players_raw = raw["players"]
    if not isinstance(players_raw, list) or not players_raw:
        raise ConfigError("players", "expected a non-empty list")
    if len(players_raw) > MAX_PLAYERS:
        raise ConfigError("players", f"at most {MAX_PLAYERS} players are supported")
    players = []
    for i, p in enumerate(players_raw):
        where = f"players[{i}]"
        if not isinstance(p, dict):
            raise ConfigError(where, "expected an object with keys b, d")
        _reject_unknown(p, PLAYER_KEYS, where + ".")
        for key in ("b", "d"):
            if key not in p:
                raise ConfigError(f"{where}.{key}", "required field is missing")
        players.append(PlayerParams(i, _number(p["b"], f"{where}.b"), _number(p["d"], f"{where}.d")))
    spec = GameSpec(t0, T, x0, tuple(players))
    report = validate_spec(spec)
    if not report.valid:
        v = report.violations[0]
        field = v.field if v.player is None else f"players[{v.player}].{'b' if v.field == 'regularity' else v.field}"
        raise ConfigError(field, v.message)

    tols = raw.get("tolerances", {})
    if not isinstance(tols, dict):
        raise ConfigError("tolerances", "expected an object")
    _reject_unknown(tols, TOL_KEYS, "tolerances.")
    cfg = RunConfig(
        spec=spec,
        eval_time=_number(raw.get("eval_time", t0), "eval_time"),
        eval_state=_number(raw.get("eval_state", x0), "eval_state"),
        cf_kinds=_kinds(raw["cf_kinds"]) if "cf_kinds" in raw else tuple(CFKind),
        oracle_M=_grid(raw.get("oracle_M", DEFAULT_M), "oracle_M"),
        identity_tol=_number(tols.get("identity", 1e-9), "tolerances.identity"),
        oracle_rel_tol=_number(tols.get("oracle_rel", 1e-3), "tolerances.oracle_rel"),
        format=_format(raw.get("format", "json"), "format"),
    )
    _check_eval_time(cfg)
    return cfg


def _grid(value: Any, field: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ConfigError(field, f"expected a positive integer, got {value!r}")
    return value


def _format(value: Any, field: str) -> str:
    if value not in ("json", "csv"):
        raise ConfigError(field, f"expected 'json' or 'csv', got {value!r}")
    return value


def _check_eval_time(cfg: RunConfig) -> None:
    if not cfg.spec.t0 <= cfg.eval_time <= cfg.spec.T:
        raise ConfigError("eval_time", f"{cfg.eval_time} outside [t0, T] = [{cfg.spec.t0}, {cfg.spec.T}]")


def parse_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read config: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"malformed JSON at line {exc.lineno}: {exc.msg}") from None
    return config_from_dict(raw)


# -- output helpers -----------------------------------------------------------

def num(v) -> float | None:
    """Round to 12 significant digits; the result round-trips through repr."""
    if v is None:
        return None
    v = float(v)
    if not math.isfinite(v):
        return v
    r = float(f"{v:.12g}")
    return 0.0 if r == 0 else r


def _vec(values) -> list:
    return [num(v) for v in values]


def _coalition_cols(S: Coalition) -> dict:
    return {"mask": S.mask, "members": list(S.members)}


def _spec_block(spec: GameSpec) -> dict:
    return {"t0": num(spec.t0), "T": num(spec.T), "x0": num(spec.x0),
            "players": [{"b": num(p.b), "d": num(p.d)} for p in spec.players]}


# -- commands -----------------------------------------------------------------

def _profile_block(spec: GameSpec, profile: analytic.ControlProfile) -> dict:
    traj = analytic.state_trajectory(spec, profile)
    payoffs = [analytic.player_payoff(spec, profile, i) for i in range(spec.n)]
    return {
        "controls": [{"player": i, "c0": num(c.c0), "c1": num(c.c1), "cap": num(c.cap)}
                     for i, c in enumerate(profile.controls)],
        "trajectory": {"x0": num(traj.x0), "t0": num(traj.t0), "a1": num(traj.a1), "a2": num(traj.a2)},
        "x_at_T": num(traj(spec.T)),
        "payoffs": _vec(payoffs),
        "total_payoff": num(sum(payoffs)),
    }


def cmd_solve(cfg: RunConfig) -> tuple[dict, int]:
    spec = cfg.spec
    report = {
        "command": "solve",
        "spec": _spec_block(spec),
        "nash": _profile_block(spec, analytic.nash_equilibrium(spec)),
        "cooperative": _profile_block(spec, analytic.cooperative_agreement(spec)),
        "pollution_gap_at_T": num(analytic.pollution_gap(spec, spec.T)),
    }
    return report, EXIT_OK


def _tables(cfg: RunConfig, kinds) -> dict:
    return {k: cf_table(cfg.spec, k, cfg.eval_state, cfg.eval_time) for k in kinds}


def cmd_cf(cfg: RunConfig, with_distances: bool = False) -> tuple[dict, int]:
    spec = cfg.spec
    if CFKind.eta_cover in cfg.cf_kinds and spec.n > COVER_MAX_PLAYERS:
        raise ConfigError("cf_kinds", f"eta_cover needs n <= {COVER_MAX_PLAYERS}")
    out = []
    for kind, table in _tables(cfg, cfg.cf_kinds).items():
        rows = []
        for S, value in table:
            row = {**_coalition_cols(S), "value": num(value)}
            if with_distances and kind is not CFKind.eta_cover:
                gap = distances(spec, kind, S, cfg.eval_time)
                row["upper_gap"], row["lower_gap"] = num(gap.upper_gap), num(gap.lower_gap)
                if S.mask:
                    k = alignment_coefficient(spec, S)
                    row["k_eta"], row["k_alpha"] = num(k.k_eta), num(k.k_alpha)
                else:
                    row["k_eta"] = row["k_alpha"] = None
            rows.append(row)
        out.append({"kind": kind.value, "x": num(table.x), "t": num(table.t), "rows": rows})
    return {"command": "cf", "spec": _spec_block(spec), "tables": out}, EXIT_OK


def _symmetric_pairs(spec: GameSpec) -> list:
    ps = spec.players
    return [[i, j] for i in range(spec.n) for j in range(i + 1, spec.n) if ps[i].b == ps[j].b and ps[i].d == ps[j].d]


def cmd_shapley(cfg: RunConfig) -> tuple[dict, int]:
    spec = cfg.spec
    tables = _tables(cfg, BASIC_KINDS)
    cmp = compare_shapley(spec, cfg.eval_state, cfg.eval_time, cfg.identity_tol, tables)
    vertices, rationality = {}, {}
    for kind in BASIC_KINDS:
        try:
            vertices[kind.value] = [_vec(v.payoffs) for v in imputation_vertices(tables[kind])]
        except PollCoopError as exc:
            vertices[kind.value] = {"degenerate": str(exc)}
        rep = check_imputation(tables[kind], cmp.vectors[kind], cfg.identity_tol)
        rationality[kind.value] = {"slacks": _vec(rep.slacks), "residual": num(rep.residual), "valid": rep.valid}
    general = shapley_closed_form(spec, x=cfg.eval_state, t=cfg.eval_time)
    printed = shapley_closed_form(spec, x=cfg.eval_state, t=cfg.eval_time, variant="printed")
    report = {
        "command": "shapley",
        "spec": _spec_block(spec),
        "vectors": {k.value: _vec(v.payoffs) for k, v in cmp.vectors.items()},
        "coincidences": {
            "alpha_delta_max_deviation": num(cmp.alpha_delta_deviation),
            "zeta_eta_max_deviation": num(cmp.zeta_eta_deviation),
            "efficiency_residuals": {k.value: num(r) for k, r in cmp.efficiency_residuals.items()},
            "passed": cmp.passed,
        },
        "closed_form": {
            "zeta_eta": _vec(general.payoffs),
            "zeta_eta_max_deviation": num(cmp.closed_form_deviation),
            "zeta_eta_printed": _vec(printed.payoffs),
            "zeta_eta_printed_max_deviation": num(cmp.printed_closed_form_deviation),
            "alpha_delta_printed_n3_max_deviation": num(cmp.printed_n3_alpha_deviation),
        },
        "imputation_vertices": vertices,
        "rationality": rationality,
        "symmetric_pairs": _symmetric_pairs(spec),
    }
    return report, EXIT_OK if cmp.passed else EXIT_CHECK_FAILED


def _viol(check: str, kind, S: Coalition, gap: float) -> dict:
    return {"check": check, "kind": str(kind), **_coalition_cols(S), "gap": num(gap)}


def _identity_checks(spec: GameSpec, x: float, t: float, tol: float,
                     table_hook: Callable[[CFKind, CFTable], CFTable] | None = None) -> list[dict]:
    kinds = BASIC_KINDS + (CFKind.eta_cover,) if spec.n <= COVER_MAX_PLAYERS else BASIC_KINDS
    tables = {k: cf_table(spec, k, x, t) for k in kinds}
    if table_hook is not None:
        tables = {k: table_hook(k, tab) for k, tab in tables.items()}
    checks = []

    order = verify_partial_order(spec, x, t, tol, tables)
    checks.append({"check": "partial_order", "passed": order.passed,
                   "violations": [_viol("partial_order", f"{v.upper}>={v.lower}", v.coalition, v.gap)
                                  for v in order.violations]})

    for kind, table in tables.items():
        rep = verify_superadditivity(table, tol)
        checks.append({"check": f"superadditivity:{kind}", "passed": rep.passed, "min_gap": num(rep.min_gap),
                       "violations": [_viol("superadditivity", kind, v.S.union(v.Q), v.gap) for v in rep.violations]})

    V = {k: tables[k].values for k in BASIC_KINDS}
    refl1 = (V[CFKind.delta] - V[CFKind.alpha]) - (V[CFKind.eta] - V[CFKind.zeta])
    refl2 = (V[CFKind.delta] - V[CFKind.eta]) - (V[CFKind.alpha] - V[CFKind.zeta])
    bad = [m for m in range(len(refl1)) if abs(refl1[m]) > tol or abs(refl2[m]) > tol]
    checks.append({"check": "reflection_symmetry", "passed": not bad,
                   "max_residual": num(max(np.max(np.abs(refl1)), np.max(np.abs(refl2)))),
                   "violations": [_viol("reflection_symmetry", "delta-alpha vs eta-zeta", Coalition(m),
                                        max(abs(refl1[m]), abs(refl2[m]))) for m in bad]})

    resid = np.zeros(len(refl1))
    for m in range(1, len(resid)):
        k = alignment_coefficient(spec, Coalition(m)).k_eta
        resid[m] = V[CFKind.eta][m] - (k * V[CFKind.delta][m] + (1 - k) * V[CFKind.zeta][m])
    bad = np.flatnonzero(np.abs(resid) > tol)
    checks.append({"check": "alignment", "passed": not len(bad), "max_residual": num(np.max(np.abs(resid))),
                   "violations": [_viol("alignment", "eta", Coalition(int(m)), resid[m]) for m in bad]})

    grand = [tables[k].grand_value for k in BASIC_KINDS]
    spread = max(grand) - min(grand)
    checks.append({"check": "grand_coalition_agreement", "passed": spread == 0.0, "max_deviation": num(spread),
                   "violations": [] if spread == 0.0 else [_viol("grand_coalition_agreement", "all", spec.grand, spread)]})

    cmp = compare_shapley(spec, x, t, tol, {k: tables[k] for k in BASIC_KINDS})
    checks.append({"check": "shapley_coincidences", "passed": cmp.passed,
                   "alpha_delta_max_deviation": num(cmp.alpha_delta_deviation),
                   "zeta_eta_max_deviation": num(cmp.zeta_eta_deviation),
                   "violations": [] if cmp.passed else
                   [_viol("shapley_coincidences", "alpha=delta,zeta=eta", spec.grand,
                          max(cmp.alpha_delta_deviation, cmp.zeta_eta_deviation))]})
    return checks


def cmd_check(cfg: RunConfig, with_oracle: bool = False, seed: int | None = None,
              table_hook: Callable[[CFKind, CFTable], CFTable] | None = None) -> tuple[dict, int]:
    spec = cfg.spec
    checks = _identity_checks(spec, cfg.eval_state, cfg.eval_time, cfg.identity_tol, table_hook)
    if with_oracle:
        mat = validate_against_closed_forms(spec, cfg.oracle_M, cfg.oracle_rel_tol)
        worst = mat.worst
        checks.append({"check": "oracle_validation", "passed": mat.passed, "M": mat.M,
                       "max_relative_error": num(mat.max_error), "worst_kind": worst.kind.value,
                       "worst_coalition": _coalition_cols(worst.coalition),
                       "violations": [_viol("oracle_validation", e.kind, e.coalition, e.error)
                                      for e in mat.entries if e.error >= cfg.oracle_rel_tol]})
    if seed is not None:
        rng = np.random.default_rng(seed)
        failed = []
        for j in range(RANDOM_SUITE_SIZE):
            rspec = random_regular_spec(rng, int(rng.integers(2, 7)))
            for c in _identity_checks(rspec, rspec.x0, rspec.t0, cfg.identity_tol):
                if not c["passed"]:
                    failed.append({"spec_index": j, "check": c["check"], "violations": c["violations"]})
        checks.append({"check": "random_suite", "seed": seed, "specs": RANDOM_SUITE_SIZE,
                       "passed": not failed, "violations": failed})
    passed = all(c["passed"] for c in checks)
    report = {"command": "check", "spec": _spec_block(spec), "x": num(cfg.eval_state), "t": num(cfg.eval_time),
              "passed": passed, "checks": checks}
    return report, EXIT_OK if passed else EXIT_CHECK_FAILED


# -- encoding -----------------------------------------------------------------

def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, list):
        return " ".join(map(str, v))
    return repr(v) if isinstance(v, float) else str(v)


def to_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if report.get("command") == "cf":
        cols = ["kind", "x", "t", "mask", "members", "value", "upper_gap", "lower_gap", "k_eta", "k_alpha"]
        w.writerow(cols)
        for tab in report["tables"]:
            for row in tab["rows"]:
                full = {"kind": tab["kind"], "x": tab["x"], "t": tab["t"], **row}
                w.writerow([_cell(full.get(c)) for c in cols])
    else:
        w.writerow(["path", "value"])
        for path, v in _flatten(report):
            w.writerow([path, _cell(v)])
    return buf.getvalue()


# -- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pollcoop", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("solve", "Nash and cooperative solutions"), ("cf", "characteristic-function tables"),
                        ("shapley", "Shapley values and imputations"), ("check", "verify identities and orderings")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", help="JSON config file")
        p.add_argument("--format", choices=("json", "csv"), default=None)
        p.add_argument("--out", help="write the report to this path instead of stdout")
        p.add_argument("--kinds", help="comma-separated kinds, e.g. alpha,eta_cover")
        p.add_argument("--at-time", type=float, dest="at_time")
        p.add_argument("--at-state", type=float, dest="at_state")
        p.add_argument("--grid", type=int, help="oracle grid size M")
        p.add_argument("--tol", type=float, help="identity tolerance")
        if name == "cf":
            p.add_argument("--distances", action="store_true", help="add bound gaps and alignment per row")
        if name == "check":
            p.add_argument("--oracle", action="store_true", help="also validate closed forms with the oracle")
            p.add_argument("--seed", type=int, help="run identity checks on random specs from this seed")
    return parser


def _apply_flags(cfg: RunConfig, args) -> RunConfig:
    changes = {}
    if args.format:
        changes["format"] = args.format
    if args.kinds:
        changes["cf_kinds"] = _kinds(args.kinds, "--kinds")
    if args.at_time is not None:
        changes["eval_time"] = args.at_time
    if args.at_state is not None:
        changes["eval_state"] = args.at_state
    if args.grid is not None:
        changes["oracle_M"] = _grid(args.grid, "--grid")
    if args.tol is not None:
        changes["identity_tol"] = args.tol
    cfg = replace(cfg, **changes)
    _check_eval_time(cfg)
    return cfg


def run(argv=None, table_hook=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _apply_flags(parse_config(args.config), args)
        if args.command == "solve":
            report, code = cmd_solve(cfg)
        elif args.command == "cf":
            report, code = cmd_cf(cfg, args.distances)
        elif args.command == "shapley":
            report, code = cmd_shapley(cfg)
        else:
            report, code = cmd_check(cfg, args.oracle, args.seed, table_hook)
        text = to_json(report) if cfg.format == "json" else to_csv(report)
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PollCoopError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
