"""Command-line front end.

Verbs: dep, sweep, throughput, optimize-single, optimize-multi,
validate, figures.  All outputs are CSV (stdout or --out) with a
`# params:` comment line capturing the fully resolved configuration.
Exit codes: 0 success, 2 invalid parameters, 3 infeasible optimization,
4 numeric failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass

import numpy as np

from .detection import min_dep_slot, min_dep_two_hop, optimal_threshold
from .errors import InfeasibleError, NumericError
from .model import (
    AntennaConfig,
    ConstraintSet,
    RateParams,
    SystemParams,
    dbm_to_watts,
    load_config,
    rho_from_db,
)
from .optimize import covert_power_limit, optimize_multi, optimize_single
from .report import build_discrepancy_report, write_discrepancy_csv
from .throughput import throughput_multi, throughput_single
from .validation import run_validation

__all__ = ["main"]

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERIC = 4

# Documented defaults for quantities the source material leaves open:
# the power cap for the optimization figures and the reference rate used
# when comparing unoptimized throughputs.
DEFAULT_P_MAX = 5.0
DEFAULT_T_REF = 0.5

_SWEEP_VARIABLES = ("p", "p_s", "p_r", "rho", "sigma_n2_dbm", "t", "epsilon", "n_t", "n_r")


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _csv_line(values) -> str:
    fields = []
    for value in values:
        text = _fmt(value)
        if any(ch in text for ch in ',"\n'):
            text = '"' + text.replace('"', '""') + '"'
        fields.append(text)
    return ",".join(fields)


def _write_csv(out: str | None, params_line: str, header: list[str], rows) -> None:
    lines = [f"# params: {params_line}", _csv_line(header)]
    lines.extend(_csv_line(row) for row in rows)
    text = "\n".join(lines) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as handle:
            handle.write(text)


@dataclass
class _Resolved:
    """Flag values after merging CLI > config file > built-in default."""

    args: argparse.Namespace
    config: dict

    def get(self, name: str, default=None, cast=float):
        value = getattr(self.args, name, None)
        if value is None and name in self.config:
            value = cast(self.config[name])
        if value is None:
            value = default
        return value


def _system_params(res: _Resolved) -> SystemParams:
    rho = res.get("rho")
    rho_db = res.get("rho_db")
    if rho is not None and rho_db is not None:
        raise ValueError("give either --rho or --rho-db, not both")
    if rho is None:
        rho = rho_from_db(rho_db) if rho_db is not None else 1.5
    n_t = res.get("nt", 1, int)
    n_r = res.get("nr", 1, int)
    return SystemParams(
        p_s=res.get("ps", 1.0),
        p_r=res.get("pr", 1.0),
        sigma_n2=dbm_to_watts(res.get("sigma_n_dbm", -5.0)),
        rho=rho,
        antennas=AntennaConfig(n_s=n_t, n_rr=n_r, n_rt=n_t, n_d=n_r),
    )


def _params_line(res: _Resolved, params: SystemParams, extra: dict | None = None) -> str:
    fields = {
        "ps": params.p_s,
        "pr": params.p_r,
        "sigma_n2_w": params.sigma_n2,
        "rho": params.rho,
        "nt": params.antennas.n_s,
        "nr": params.antennas.n_rr,
        "seed": res.get("seed", 0, int),
        "workers": res.get("workers", 1, int),
    }
    if extra:
        fields.update(extra)
    return " ".join(f"{k}={_fmt(v)}" for k, v in fields.items())


def _cmd_dep(res: _Resolved) -> int:
    params = _system_params(res)
    tau = optimal_threshold(params)
    pe1 = min_dep_slot(params.p_s, params)
    pe2 = min_dep_slot(params.p_r, params)
    xi = min_dep_two_hop(params)
    _write_csv(
        res.get("out", None, str),
        _params_line(res, params),
        ["tau_star_w", "pe1_star", "pe2_star", "xi_star"],
        [(tau, pe1, pe2, xi)],
    )
    return EXIT_OK


def _is_multi(params: SystemParams) -> bool:
    return not params.antennas.is_single


def _throughput(params: SystemParams, rate: RateParams):
    return throughput_multi(params, rate) if _is_multi(params) else throughput_single(params, rate)


def _cmd_throughput(res: _Resolved) -> int:
    params = _system_params(res)
    t = res.get("t", DEFAULT_T_REF)
    out = _throughput(params, RateParams(t))
    _write_csv(
        res.get("out", None, str),
        _params_line(res, params, {"t": t}),
        ["t", "p_out_hop1", "p_out_hop2", "p_out", "eta"],
        [(t, out.p_out_hop1, out.p_out_hop2, out.p_out, out.eta)],
    )
    return EXIT_OK


def _sweep_grid(res: _Resolved):
    lo = res.get("sweep_from")
    hi = res.get("sweep_to")
    steps = res.get("steps", 50, int)
    scale = res.get("scale", "linear", str)
    if lo is None or hi is None:
        raise ValueError("sweep requires --from and --to")
    if not lo < hi:
        raise ValueError(f"--from must be < --to, got ({lo}, {hi})")
    if steps < 2:
        raise ValueError(f"--steps must be >= 2, got {steps}")
    if scale == "log":
        if lo <= 0:
            raise ValueError("log scale requires --from > 0")
        return np.geomspace(lo, hi, steps)
    if scale != "linear":
        raise ValueError(f"--scale must be linear or log, got {scale!r}")
    return np.linspace(lo, hi, steps)


def _cmd_sweep(res: _Resolved) -> int:
    variable = res.get("variable", None, str)
    if variable not in _SWEEP_VARIABLES:
        raise ValueError(f"--variable must be one of {_SWEEP_VARIABLES}, got {variable!r}")
    base = _system_params(res)
    t = res.get("t", DEFAULT_T_REF)
    grid = _sweep_grid(res)
    rows = []
    for value in grid:
        value = float(value)
        params, rate = base, RateParams(t)
        if variable == "p":
            params = base.with_powers(value, value)
        elif variable == "p_s":
            params = base.with_powers(value, base.p_r)
        elif variable == "p_r":
            params = base.with_powers(base.p_s, value)
        elif variable == "rho":
            params = SystemParams(base.p_s, base.p_r, base.sigma_n2, value, base.antennas)
        elif variable == "sigma_n2_dbm":
            params = SystemParams(base.p_s, base.p_r, dbm_to_watts(value), base.rho, base.antennas)
        elif variable == "t":
            rate = RateParams(value)
        elif variable == "epsilon":
            p_cov = covert_power_limit(value, base, res.get("p_max", DEFAULT_P_MAX))
            params = base.with_powers(p_cov, p_cov)
        elif variable in ("n_t", "n_r"):
            count = int(round(value))
            ant = base.antennas
            if variable == "n_t":
                ant = AntennaConfig(count, ant.n_rr, count, ant.n_d)
            else:
                ant = AntennaConfig(ant.n_s, count, ant.n_rt, count)
            params = SystemParams(base.p_s, base.p_r, base.sigma_n2, base.rho, ant)
        out = _throughput(params, rate)
        rows.append((value, min_dep_two_hop(params), out.p_out, out.eta))
    _write_csv(
        res.get("out", None, str),
        _params_line(res, base, {"variable": variable, "t": t}),
        [variable, "xi_star", "p_out", "eta"],
        rows,
    )
    return EXIT_OK


def _constraints(res: _Resolved) -> ConstraintSet:
    return ConstraintSet(
        epsilon=res.get("epsilon", 0.15),
        delta=res.get("delta", 0.1),
        p_max=res.get("p_max", DEFAULT_P_MAX),
    )


def _write_optimum(res, params, constraints, opt) -> None:
    _write_csv(
        res.get("out", None, str),
        _params_line(
            res,
            params,
            {"epsilon": constraints.epsilon, "delta": constraints.delta,
             "p_max": constraints.p_max},
        ),
        ["p_s", "p_r", "t", "eta", "method", "active_constraints"],
        [(opt.p_s, opt.p_r, opt.t, opt.eta, opt.method,
          "|".join(sorted(opt.active_constraints)) or "none")],
    )


def _cmd_optimize_single(res: _Resolved) -> int:
    params = _system_params(res)
    constraints = _constraints(res)
    opt = optimize_single(constraints, params)
    _write_optimum(res, params, constraints, opt)
    return EXIT_OK


def _cmd_optimize_multi(res: _Resolved) -> int:
    params = _system_params(res)
    constraints = _constraints(res)
    h1 = res.get("h1")
    h2 = res.get("h2")
    h3 = res.get("h3")
    steps = None
    if any(v is not None for v in (h1, h2, h3)):
        if None in (h1, h2, h3):
            raise ValueError("give all of --h1/--h2/--h3 or none")
        steps = (h1, h2, h3)
    opt = optimize_multi(
        constraints,
        params,
        steps=steps,
        phi=res.get("phi", 1e-6),
        v_max=res.get("v_max", 10**6, int),
    )
    _write_optimum(res, params, constraints, opt)
    return EXIT_OK


def _cmd_validate(res: _Resolved) -> int:
    checks = run_validation(
        samples=res.get("samples", 1_000_000, int),
        seed=res.get("seed", 42, int),
        workers=res.get("workers", 1, int),
    )
    rows = [
        (c.name, c.analytic, c.mc_mean, c.mc_stderr, c.n_sigma, "pass" if c.passed else "FAIL")
        for c in checks
    ]
    out = res.get("out", None, str)
    _write_csv(
        out,
        f"samples={res.get('samples', 1_000_000, int)} seed={res.get('seed', 42, int)} "
        f"workers={res.get('workers', 1, int)}",
        ["check", "analytic", "mc_mean", "mc_stderr", "n_sigma", "status"],
        rows,
    )
    report_dir = os.path.dirname(out) if out else "."
    write_discrepancy_csv(
        build_discrepancy_report(), os.path.join(report_dir or ".", "discrepancies.csv")
    )
    if not all(c.passed for c in checks):
        raise NumericError("one or more analytic-vs-MC checks failed (see report)")
    return EXIT_OK


def _figure_rows(which: int, res: _Resolved):
    sigma_grid = (-10.0, -5.0, 3.0)
    rho = 1.5
    if which == 3:
        header = ["sigma_n2_dbm", "P_watts", "xi_star"]
        rows = []
        for sigma_dbm in sigma_grid:
            sigma_n2 = dbm_to_watts(sigma_dbm)
            for p in np.linspace(0.1, 5.0, 50):
                p = float(p)
                rows.append((sigma_dbm, p, min_dep_two_hop(SystemParams(p, p, sigma_n2, rho))))
        return header, rows
    if which == 4:
        header = ["sigma_n2_dbm", "rho", "xi_star"]
        rows = []
        for sigma_dbm in sigma_grid:
            sigma_n2 = dbm_to_watts(sigma_dbm)
            for r in np.linspace(1.01, 3.0, 50):
                r = float(r)
                rows.append((sigma_dbm, r, min_dep_two_hop(SystemParams(3.0, 3.0, sigma_n2, r))))
        return header, rows
    if which == 5:
        header = ["p_s", "p_r", "xi_star"]
        sigma_n2 = dbm_to_watts(-5.0)
        rows = []
        for p_s in np.linspace(0.25, 5.0, 20):
            for p_r in np.linspace(0.25, 5.0, 20):
                rows.append(
                    (float(p_s), float(p_r),
                     min_dep_two_hop(SystemParams(float(p_s), float(p_r), sigma_n2, rho)))
                )
        return header, rows
    if which == 6:
        header = ["t", "eta_single", "eta_multi"]
        sigma_n2 = dbm_to_watts(-5.0)
        single = SystemParams(1.0, 1.0, sigma_n2, rho)
        multi = SystemParams(1.0, 1.0, sigma_n2, rho, AntennaConfig(2, 8, 2, 8))
        rows = []
        for t in np.linspace(0.01, 3.0, 200):
            rate = RateParams(float(t))
            rows.append(
                (float(t), throughput_single(single, rate).eta, throughput_multi(multi, rate).eta)
            )
        return header, rows
    if which == 7:
        header = ["n_t", "n_r", "eta"]
        sigma_n2 = dbm_to_watts(-5.0)
        rate = RateParams(1.5)
        rows = []
        for n_t, n_r in ((1, 1), (1, 2), (2, 2), (2, 4), (2, 8), (4, 4), (4, 8)):
            params = SystemParams(1.0, 1.0, sigma_n2, rho, AntennaConfig(n_t, n_r, n_t, n_r))
            rows.append((n_t, n_r, throughput_multi(params, rate).eta))
        return header, rows
    if which == 8:
        header = ["epsilon", "p_cov_w", "eta_single", "eta_multi"]
        sigma_n2 = dbm_to_watts(-5.0)
        rate = RateParams(DEFAULT_T_REF)
        single = SystemParams(1.0, 1.0, sigma_n2, rho)
        rows = []
        for eps in np.linspace(0.05, 0.5, 20):
            p_cov = covert_power_limit(float(eps), single, DEFAULT_P_MAX)
            s = single.with_powers(p_cov, p_cov)
            m = SystemParams(p_cov, p_cov, sigma_n2, rho, AntennaConfig(2, 8, 2, 8))
            rows.append(
                (float(eps), p_cov, throughput_single(s, rate).eta, throughput_multi(m, rate).eta)
            )
        return header, rows
    raise ValueError(f"unknown figure {which}; data figures are 3-8")


def _cmd_figures(res: _Resolved) -> int:
    which = res.get("which", None, str)
    outdir = res.get("outdir", ".", str)
    os.makedirs(outdir, exist_ok=True)
    numbers = range(3, 9) if which in (None, "all") else [int(which)]
    for number in numbers:
        header, rows = _figure_rows(number, res)
        _write_csv(
            os.path.join(outdir, f"fig{number}.csv"),
            f"figure={number} rho=1.5 seed={res.get('seed', 0, int)}",
            header,
            rows,
        )
    return EXIT_OK


def _add_system_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--ps", type=float, help="source transmit power in watts (default 1)")
    sp.add_argument("--pr", type=float, help="relay transmit power in watts (default 1)")
    sp.add_argument("--sigma-n-dbm", dest="sigma_n_dbm", type=float,
                    help="nominal noise power in dBm (default -5)")
    sp.add_argument("--rho", type=float, help="noise-uncertainty ratio > 1 (default 1.5)")
    sp.add_argument("--rho-db", dest="rho_db", type=float,
                    help="noise uncertainty in dB (alternative to --rho)")
    sp.add_argument("--nt", type=int, help="transmit antennas per hop (default 1)")
    sp.add_argument("--nr", type=int, help="receive antennas per hop (default 1)")


def _add_constraint_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--epsilon", type=float, help="covertness budget (default 0.15)")
    sp.add_argument("--delta", type=float, help="reliability budget (default 0.1)")
    sp.add_argument("--p-max", dest="p_max", type=float,
                    help=f"per-hop power cap in watts (default {DEFAULT_P_MAX})")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covertrelay",
        description="Covert two-hop relay performance: detection error probability, "
        "outage, covert throughput, and constrained optimization.",
    )
    parser.add_argument("--seed", type=int, help="Monte-Carlo seed (default 0)")
    parser.add_argument("--workers", type=int, help="Monte-Carlo worker shards (default 1)")
    parser.add_argument("--config", type=str, help="key = value file supplying flag defaults")
    parser.add_argument("--out", type=str, help="CSV output path (default stdout)")
    # The same flags are accepted after the subcommand; SUPPRESS keeps the
    # subparser from clobbering a value given before it.
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    shared.add_argument("--workers", type=int, default=argparse.SUPPRESS)
    shared.add_argument("--config", type=str, default=argparse.SUPPRESS)
    shared.add_argument("--out", type=str, default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=argparse.ArgumentParser)

    def add_parser(name, help):  # noqa: A002 - mirrors argparse's keyword
        return sub.add_parser(name, help=help, parents=[shared])

    sp = add_parser("dep", help="optimal threshold and minimum DEP at one parameter point")
    _add_system_flags(sp)

    sp = add_parser("throughput", help="outage and covert throughput at one parameter point")
    _add_system_flags(sp)
    sp.add_argument("--t", type=float, help=f"target rate bit/s/Hz (default {DEFAULT_T_REF})")

    sp = add_parser("sweep", help="sweep one variable, emitting xi*, outage and throughput")
    _add_system_flags(sp)
    sp.add_argument("--variable", type=str, help=f"one of {', '.join(_SWEEP_VARIABLES)}")
    sp.add_argument("--from", dest="sweep_from", type=float, help="sweep start")
    sp.add_argument("--to", dest="sweep_to", type=float, help="sweep end")
    sp.add_argument("--steps", type=int, help="grid points (default 50)")
    sp.add_argument("--scale", type=str, help="linear or log (default linear)")
    sp.add_argument("--t", type=float, help="target rate for throughput columns")
    sp.add_argument("--p-max", dest="p_max", type=float,
                    help="power cap used by the epsilon sweep")

    sp = add_parser("optimize-single", help="KKT throughput maximization, single antenna")
    _add_system_flags(sp)
    _add_constraint_flags(sp)

    sp = add_parser("optimize-multi", help="grid throughput maximization, TAS/MRC")
    _add_system_flags(sp)
    _add_constraint_flags(sp)
    sp.add_argument("--h1", type=float, help="linear source-power step (default: log grid)")
    sp.add_argument("--h2", type=float, help="linear relay-power step (default: log grid)")
    sp.add_argument("--h3", type=float, help="rate step (default 0.01)")
    sp.add_argument("--phi", type=float, help="rate-loop convergence tolerance (default 1e-6)")
    sp.add_argument("--v-max", dest="v_max", type=int, help="evaluation cap (default 1e6)")

    sp = add_parser("validate", help="analytic-vs-Monte-Carlo campaign + discrepancy report")
    sp.add_argument("--samples", type=int, help="trials per check (default 1e6)")

    sp = add_parser("figures", help="emit the standard figure CSVs (3-8)")
    sp.add_argument("--which", type=str, help="figure number 3-8 or 'all' (default all)")
    sp.add_argument("--outdir", type=str, help="output directory (default .)")

    return parser


_COMMANDS = {
    "dep": _cmd_dep,
    "throughput": _cmd_throughput,
    "sweep": _cmd_sweep,
    "optimize-single": _cmd_optimize_single,
    "optimize-multi": _cmd_optimize_multi,
    "validate": _cmd_validate,
    "figures": _cmd_figures,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    config = {}
    if args.config:
        try:
            config = load_config(args.config)
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INVALID
    res = _Resolved(args, config)
    try:
        return _COMMANDS[args.command](res)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (NumericError, ArithmeticError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
