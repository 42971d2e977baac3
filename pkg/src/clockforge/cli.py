"""Command-line experiment harness.

Every subcommand produces an envelope {command, parameters, results, rows,
checks, passed}. `checks` holds the claim checks made along the way; the exit
code is 1 if any of them failed, 2 on a usage error and 0 otherwise.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from math import cos, pi

import numpy as np

from .errors import ClockforgeError, DomainError
from .scaling import fit_exponent

COMMANDS = ("spectrum", "gap-scan", "biased", "feynman", "kitaev", "adiabatic",
            "idling", "multicog", "tune")
# full-space multicog builds from the CLI stay at a few thousand states
CLI_FULL_QUTRITS = 8
FAMILIES = {"laplacian": (1.0, 1.0), "hopping": (0.0, 0.0), "pinned": (1.0, 0.0)}


class UsageError(Exception):
    pass


@dataclass
class ExperimentConfig:
    command: str
    parameters: dict = field(default_factory=dict)

    def get(self, key, default=None):
        value = self.parameters.get(key)
        return default if value is None else value


@dataclass
class Outcome:
    results: dict
    rows: list = field(default_factory=list)
    header: tuple = ()
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


# -- parameter helpers ----------------------------------------------------------

def _int_list(value, flag: str) -> list[int]:
    if isinstance(value, (list, tuple)):
        items = value
    else:
        items = [v for v in str(value).split(",") if v.strip()]
    try:
        out = [int(v) for v in items]
    except ValueError:
        raise UsageError(f"{flag}: expected comma-separated integers, got {value!r}") from None
    if not out:
        raise UsageError(f"{flag}: empty list")
    return out


def _float_list(value, flag: str) -> list[float]:
    items = value if isinstance(value, (list, tuple)) else str(value).split(",")
    try:
        return [float(v) for v in items]
    except ValueError:
        raise UsageError(f"{flag}: expected comma-separated numbers, got {value!r}") from None


def _require(cfg: ExperimentConfig, key: str, flag: str):
    value = cfg.get(key)
    if value is None:
        raise UsageError(f"{flag} is required for '{cfg.command}'")
    return value


def _single_n(cfg: ExperimentConfig) -> int:
    ns = _int_list(_require(cfg, "n", "--n"), "--n")
    if len(ns) != 1:
        raise UsageError(f"--n: '{cfg.command}' takes a single size")
    return ns[0]


def _fit(rows: list, x: int, y: int) -> dict:
    pts = [(r[x], r[y]) for r in rows]
    if len({p[0] for p in pts}) < 2:
        return {"exponent": None, "intercept": None, "r2": None}
    slope, intercept, r2 = fit_exponent(pts)
    return {"exponent": slope, "intercept": intercept, "r2": r2}


# -- subcommands ----------------------------------------------------------------

def run_spectrum(cfg: ExperimentConfig) -> Outcome:
    from .walk import WalkSpec, analytic_spectrum, build_walk_matrix, numeric_spectrum

    n = _single_n(cfg)
    spec = WalkSpec(n, float(cfg.get("left", 1.0)), float(cfg.get("right", 1.0)))
    tol = float(cfg.get("tol", 1e-8))
    ana = analytic_spectrum(spec)
    num = numeric_spectrum(build_walk_matrix(spec))
    dev = float(np.max(np.abs(ana.eigenvalues - num.eigenvalues)))
    res = {"n": n, "left": spec.left_loop, "right": spec.right_loop,
           "eigenvalues": [float(e) for e in ana.eigenvalues], "gap": ana.gap,
           "method": ana.method, "closed_form": ana.closed_form,
           "n_hyperbolic": ana.n_hyperbolic, "max_deviation": dev, "agree": dev <= tol}
    rows = [(k, float(a), float(b)) for k, (a, b) in enumerate(zip(ana.eigenvalues, num.eigenvalues))]
    return Outcome(res, rows, ("index", "analytic", "numeric"), {"analytic_matches_numeric": dev <= tol})


def run_gap_scan(cfg: ExperimentConfig) -> Outcome:
    from .walk import WalkSpec, build_walk_matrix, numeric_spectrum

    family = cfg.get("family", "laplacian")
    if family == "custom":
        left, right = float(cfg.get("left", 1.0)), float(cfg.get("right", 1.0))
    elif family in FAMILIES:
        left, right = FAMILIES[family]
    else:
        raise UsageError(f"--family: unknown family {family!r}")
    ns = sorted(_int_list(_require(cfg, "n", "--n"), "--n"))
    rows = [(n, numeric_spectrum(build_walk_matrix(WalkSpec(n, left, right))).gap) for n in ns]
    fit = _fit(rows, 0, 1)
    res = {"family": family, "left": left, "right": right, **fit}
    checks = {}
    if family in ("laplacian", "hopping") and fit["exponent"] is not None:
        checks["exponent_near_minus_2"] = abs(fit["exponent"] + 2) <= float(cfg.get("tol", 0.1))
    return Outcome(res, rows, ("N", "gap"), checks)


def run_biased(cfg: ExperimentConfig) -> Outcome:
    from scipy.linalg import eigh

    from .walk import WalkSpec, build_walk_matrix, numeric_spectrum

    n = _single_n(cfg)
    b = float(_require(cfg, "bias", "--bias"))
    if b <= 0:
        raise UsageError("--bias must be positive")
    spec = WalkSpec(n, 1 / b, b)
    low = float(numeric_spectrum(build_walk_matrix(spec)).eigenvalues[0])
    expected = -(b + 1 / b)
    _, vec = eigh(build_walk_matrix(spec), subset_by_index=[0, 0])
    v = np.abs(vec[:, 0])
    ratio = v[1:] / v[:-1]
    tol = float(cfg.get("tol", 1e-9))
    res = {"n": n, "bias": b, "left": 1 / b, "right": b, "lowest": low, "expected": expected,
           "error": abs(low - expected), "ratio_min": float(ratio.min()), "ratio_max": float(ratio.max())}
    checks = {"lowest_is_minus_b_plus_inverse": abs(low - expected) <= tol}
    if b > 1:
        checks["ground_state_geometric"] = bool(np.allclose(ratio, b, rtol=1e-6))
    return Outcome(res, [(n, b, low, expected)], ("N", "bias", "lowest", "expected"), checks)


def run_feynman(cfg: ExperimentConfig) -> Outcome:
    from .feynman import GateSequence, cesaro_limit

    ns = sorted(_int_list(_require(cfg, "n", "--n"), "--n"))
    padding = int(cfg.get("padding", 0))
    rows = []
    for n in ns:
        circ = GateSequence.identity(1, n)
        done = n if padding else None
        rows.append((n, padding, cesaro_limit(circ, [0], padding, from_step=done)))
    res = {"padding": padding, **_fit(rows, 0, 2)}
    checks = {}
    if padding == 0 and res["exponent"] is not None and len(rows) >= 3:
        checks["exponent_near_minus_1"] = abs(res["exponent"] + 1) <= float(cfg.get("tol", 0.15))
    if padding:
        checks["done_probability_at_least_half"] = all(r[2] >= 0.5 for r in rows)
    return Outcome(res, rows, ("N", "A", "limit"), checks)


def run_kitaev(cfg: ExperimentConfig) -> Outcome:
    from .kitaev import full_cross_check, no_case_bound, rotation_verifier

    ns = sorted(_int_list(_require(cfg, "n", "--n"), "--n"))
    atol = float(cfg.get("tol", 1e-8))
    rows, checks = [], {}
    for n in ns:
        eps = 1 / n ** 2
        no = rotation_verifier(n, eps)
        low = no_case_bound(no)
        mismatch = None
        if n <= 16:
            mismatch = full_cross_check(no, atol=atol).max_mismatch
            checks[f"blocks_match_full_N{n}"] = mismatch <= atol
        yes = full_cross_check(rotation_verifier(n, eps, accept=True), atol=atol) if n <= 16 else None
        if yes is not None:
            checks[f"yes_history_below_eps_over_N_N{n}"] = yes.history_energy <= yes.yes_bound + 1e-12
        rows.append((n, eps, low, mismatch if mismatch is not None else float("nan")))
    fit = _fit(rows, 0, 2)
    if fit["exponent"] is not None and len(rows) >= 3:
        checks["no_case_exponent_near_minus_2"] = abs(fit["exponent"] + 2) <= 0.1
    return Outcome(fit, rows, ("N", "epsilon", "no_case_energy", "block_mismatch"), checks)


def run_adiabatic(cfg: ExperimentConfig) -> Outcome:
    from .adiabatic import ScheduleSpec, gap_profile, integrate_schedule

    n = _single_n(cfg)
    t1 = float(cfg.get("t1", 60.0))
    ladder = sorted(_float_list(cfg.get("t2_ladder", "50,100,200,400"), "--t2-ladder"))
    prof = gap_profile(ScheduleSpec(n, t1, ladder[0]), 201)
    t_mid = [g for t, g, _ in prof if t1 <= t <= t1 + ladder[0]]
    expected = 2 - 2 * cos(pi / (n + 1))
    rows = [(t2, integrate_schedule(ScheduleSpec(n, t1, t2)).fidelity) for t2 in ladder]
    fid = [r[1] for r in rows]
    res = {"n": n, "t1": t1, "section2_min_gap": min(t_mid), "expected_min_gap": expected}
    checks = {"section2_min_gap_within_1pct": abs(min(t_mid) - expected) <= 0.01 * expected,
              "fidelity_increasing": all(b > a for a, b in zip(fid[:-1], fid[1:]))}
    return Outcome(res, rows, ("T2", "fidelity"), checks)


def run_idling(cfg: ExperimentConfig) -> Outcome:
    from .idling import IdlingSpec, analytic_gap_bound, canonical_paths, done_overlap

    n = _single_n(cfg)
    c = int(_require(cfg, "c", "--c"))
    spec = IdlingSpec(n, c)
    overlap = done_overlap(spec)
    rep = canonical_paths(spec)
    analytic = analytic_gap_bound(spec)
    res = {"n_states": spec.n_states, "overlap_num": overlap.numerator,
           "overlap_den": overlap.denominator, "l": rep.max_path_length, "rho": rep.congestion,
           "bound": rep.gap_lower_bound, "numeric_gap": rep.numeric_gap, "analytic_bound": analytic}
    checks = {"path_bound_below_gap": rep.gap_lower_bound <= rep.numeric_gap,
              "analytic_bound_below_gap": analytic <= rep.numeric_gap,
              "overlap_formula": overlap == Fraction(1 + spec.padding, spec.n_states)}
    row = (n, c, spec.n_states, rep.max_path_length, rep.congestion, rep.gap_lower_bound, rep.numeric_gap)
    return Outcome(res, [row], ("N", "C", "states", "l", "rho", "bound", "gap"), checks)


def run_multicog(cfg: ExperimentConfig) -> Outcome:
    from .multicog import build_multicog, legal_restriction, lowest_gap

    c = int(_require(cfg, "c", "--c"))
    length = int(_require(cfg, "length", "--length"))
    mode = cfg.get("mode", "stopped")
    clock = build_multicog(c, length, mode)
    legal = clock.legal_operator().to_dense()
    gap = lowest_gap(legal)
    m = clock.n_steps
    expected = 2 - 2 * cos((2 if mode == "cycle" else 1) * pi / m)
    res = {"cogs": c, "length": length, "mode": mode, "n_steps": m, "legal_gap": gap,
           "expected_gap": expected, "boundary_degree": clock.site_degree(length),
           "degree_estimate": 2 * length * c}
    checks = {"gap_matches_walk": abs(gap - expected) <= 1e-10}
    if clock.n_sites <= CLI_FULL_QUTRITS:
        sub = legal_restriction(clock.operator(), clock.legal_states())
        checks["legal_restriction_is_walk"] = bool(np.array_equal(sub, legal))
    return Outcome(res, [(c, length, m, gap, expected)], ("C", "L", "N", "gap", "expected"), checks)


def run_tune(cfg: ExperimentConfig) -> Outcome:
    from .tuning import sector_spectrum_study, v_from_rule

    ns = sorted(_int_list(_require(cfg, "n", "--n"), "--n"))
    rule = cfg.get("v_rule", "cubic")
    rows, gaps, ok = [], [], True
    checks = {}
    for n in ns:
        study = sector_spectrum_study(n, v_from_rule(rule, n))
        rows += study.rows()
        gaps.append((n, study.gap))
        ok = ok and study.bound_satisfied
        checks[f"unique_ground_N{n}"] = abs(study.ground_energy) <= 1e-12 and study.gap > 0
    fit = _fit(gaps, 0, 1)
    res = {"v_rule": rule, "gaps": [g for _, g in gaps], "gap": gaps[-1][1],
           "fitted_exponent": fit["exponent"], "bound_satisfied": ok}
    checks["geometric_bound_holds"] = ok
    return Outcome(res, rows, ("N", "V", "z", "E_z"), checks)


RUNNERS = {"spectrum": run_spectrum, "gap-scan": run_gap_scan, "biased": run_biased,
           "feynman": run_feynman, "kitaev": run_kitaev, "adiabatic": run_adiabatic,
           "idling": run_idling, "multicog": run_multicog, "tune": run_tune}


# -- output ---------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def to_csv(outcome: Outcome) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(outcome.header)
    for row in sorted(outcome.rows, key=lambda r: tuple(r[:len(r) - 1])):
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return None if np.isnan(x) else x
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def envelope(cfg: ExperimentConfig, outcome: Outcome) -> dict:
    return _jsonable({"command": cfg.command, "parameters": cfg.parameters,
                      "results": outcome.results, "header": list(outcome.header),
                      "rows": sorted(outcome.rows, key=lambda r: tuple(r[:len(r) - 1])),
                      "checks": outcome.checks, "passed": outcome.passed})


def run(cfg: ExperimentConfig) -> tuple[int, dict, Outcome]:
    if cfg.command not in RUNNERS:
        raise UsageError(f"unknown command {cfg.command!r}")
    outcome = RUNNERS[cfg.command](cfg)
    return (0 if outcome.passed else 1), envelope(cfg, outcome), outcome


# -- argument parsing -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clockforge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--n", help="size or comma-separated sizes")
        p.add_argument("--left", type=float)
        p.add_argument("--right", type=float)
        p.add_argument("--bias", type=float)
        p.add_argument("--c", type=int, help="extra/idling qubits or number of cogs")
        p.add_argument("--length", type=int, help="cog length L")
        p.add_argument("--mode", choices=("stopped", "cycle"))
        p.add_argument("--family", choices=tuple(FAMILIES) + ("custom",))
        p.add_argument("--padding", type=int)
        p.add_argument("--t1", type=float)
        p.add_argument("--v-rule", dest="v_rule")
        p.add_argument("--t2-ladder", dest="t2_ladder")
        p.add_argument("--tol", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--config", help="JSON file {command?, parameters}; flags override it")
    return parser


def config_from_args(args: argparse.Namespace) -> tuple[ExperimentConfig, str | None, str]:
    params = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"--config: cannot read {args.config}: {exc}") from None
        if data.get("command", args.command) != args.command:
            raise UsageError(f"--config: file is for '{data['command']}', not '{args.command}'")
        params.update({k.replace("-", "_"): v for k, v in data.get("parameters", {}).items()})
    skip = {"command", "config", "out", "format"}
    for k, v in vars(args).items():
        if k not in skip and v is not None:
            params[k] = v
    fmt = args.format or params.pop("format", None) or "json"
    out = args.out or params.pop("out", None)
    params.pop("format", None)
    params.pop("out", None)
    return ExperimentConfig(args.command, params), out, fmt


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg, out, fmt = config_from_args(args)
        code, env, outcome = run(cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (DomainError, ClockforgeError, ValueError) as exc:
        print(f"usage error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    text = to_csv(outcome) if fmt == "csv" else json.dumps(env, indent=2) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for name, ok in outcome.checks.items():
        if not ok:
            print(f"check failed: {name}", file=sys.stderr)
    return code
