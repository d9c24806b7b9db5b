"""Command-line pipeline driver.

Subcommands: adf, johansen, vecm, svec, irf, fevd, simulate, pipeline.
Analysis subcommands read a flat key-value config file (``--config``) that
names the data, the role mapping, estimation choices and the restriction
pattern; ``simulate`` works from flags alone.  ``--seed`` and ``--out-dir``
override their config counterparts.

Config format: ``key = value`` lines, full-line ``#`` comments, and two
optional bracketed mask blocks::

    data = drc.csv
    year_column = year
    role_output = y
    role_employment = n
    role_wage = w
    role_price = p
    role_unemployment = u
    max_p = 4
    criterion = sc
    bootstrap_reps = 200
    seed = 42
    out_dir = out
    [xi_b_pattern]
    * * 0 * 0
    0 * 0 0 0
    * * 0 0 0
    * * 0 * *
    * * 0 * *
    [/xi_b_pattern]

A missing pattern block selects the built-in five-variable scheme.  The
seed is mandatory: reports must be reproducible, so there is no
wall-clock default.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .cointegration import BetaRestriction, rank_tests, select_lag, test_beta_restriction
from .dataset import ROLES, TimePanel, build_system, load_csv, save_csv
from .dynamics import FEVD_HORIZONS, fevd, irf
from .exceptions import SvecmError
from .report import (
    render_adf_table,
    render_fevd_table,
    render_impact_table,
    render_rank_table,
    render_relation,
    svg_line_plot,
)
from .svec import (
    RestrictionPattern,
    bootstrap_tvalues,
    check_identification,
    default_pattern,
    identify,
    with_tvalues,
)
from .unitroot import integration_order
from .vecm import fit_vecm
from .wsps import (
    DEFAULT_SIGMAS,
    SHOCK_NAMES,
    ShockSequence,
    WsPsParams,
    raw_series,
    true_impact_matrices,
)


@dataclass
class PipelineConfig:
    data: str
    year_column: str = "year"
    roles: dict = field(default_factory=dict)
    take_logs: bool = True
    deterministic: str = "constant"
    adf_max_lags: int = 4
    max_p: int = 4
    criterion: str = "sc"
    rank: int | None = None
    beta_restriction: np.ndarray | None = None
    pattern: RestrictionPattern | None = None
    bootstrap_reps: int = 200
    seed: int | None = None
    out_dir: str = "out"
    irf_horizon: int = 50
    fevd_horizons: tuple = FEVD_HORIZONS

    def validate(self):
        if self.seed is None:
            raise ValueError("config must set a seed; reports are reproducible by contract")
        if not os.path.exists(self.data):
            raise FileNotFoundError(f"data file not found: {self.data}")
        missing = [r for r in ROLES if r not in self.roles]
        if missing:
            raise ValueError(f"config missing role assignments: {missing}")


def parse_config(path: str) -> PipelineConfig:
    keys: dict = {}
    blocks: dict = {}
    current = None
    with open(path) as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            stripped = line.strip()
            if current is not None:
                if stripped == f"[/{current}]":
                    current = None
                else:
                    blocks[current].append(line)
                continue
            if not stripped or stripped.startswith("#"):
                continue
            if stripped.startswith("[") and stripped.endswith("]"):
                current = stripped[1:-1]
                blocks[current] = []
                continue
            if "=" not in stripped:
                raise ValueError(f"bad config line: {line!r}")
            key, _, value = stripped.partition("=")
            keys[key.strip()] = value.strip()
    if current is not None:
        raise ValueError(f"unterminated block [{current}]")

    cfg = PipelineConfig(data=keys.pop("data", ""))
    cfg.year_column = keys.pop("year_column", cfg.year_column)
    for role in ROLES:
        k = f"role_{role}"
        if k in keys:
            cfg.roles[role] = keys.pop(k)
    if "take_logs" in keys:
        cfg.take_logs = keys.pop("take_logs").lower() in ("1", "true", "yes")
    cfg.deterministic = keys.pop("deterministic", cfg.deterministic)
    for name in ("adf_max_lags", "max_p", "bootstrap_reps", "irf_horizon"):
        if name in keys:
            setattr(cfg, name, int(keys.pop(name)))
    cfg.criterion = keys.pop("criterion", cfg.criterion)
    if "rank" in keys:
        cfg.rank = int(keys.pop("rank"))
    if "seed" in keys:
        cfg.seed = int(keys.pop("seed"))
    cfg.out_dir = keys.pop("out_dir", cfg.out_dir)
    if "fevd_horizons" in keys:
        cfg.fevd_horizons = tuple(int(h) for h in keys.pop("fevd_horizons").split(","))
    if "beta_restriction" in keys:
        cols = [
            [float(v) for v in col.split(",")]
            for col in keys.pop("beta_restriction").split(";")
        ]
        cfg.beta_restriction = np.array(cols, dtype=float).T
    if "xi_b_pattern" in blocks:
        b_block = "\n".join(blocks.get("b_pattern", []))
        xi_block = "\n".join(blocks["xi_b_pattern"])
        if not b_block:
            n = len([ln for ln in blocks["xi_b_pattern"] if ln.strip()])
            b_block = "\n".join(" ".join("*" for _ in range(n)) for _ in range(n))
        cfg.pattern = RestrictionPattern.from_text(b_block, xi_block)
    if keys:
        raise ValueError(f"unknown config keys: {sorted(keys)}")
    return cfg


# ---------------------------------------------------------------------------
# artifact writers


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _write_matrix(path, matrix, row_names, col_names):
    rows = [[name] + [repr(float(v)) for v in row] for name, row in zip(row_names, matrix)]
    _write_rows(path, ["", *col_names], rows)


class Reporter:
    """Accumulates report text and flushes it (partial on failure)."""

    def __init__(self, out_dir):
        self.out_dir = out_dir
        self.lines = []

    def add(self, text=""):
        self.lines.append(text)

    def section(self, title):
        self.add()
        self.add(f"== {title} ==")

    def flush(self):
        os.makedirs(self.out_dir, exist_ok=True)
        with open(os.path.join(self.out_dir, "report.txt"), "w") as fh:
            fh.write("\n".join(self.lines) + "\n")


# ---------------------------------------------------------------------------
# pipeline stages


def _stage_ingest(cfg, rep):
    raw = load_csv(cfg.data, cfg.year_column)
    system = build_system(raw, cfg.roles, cfg.take_logs)
    rep.section("data")
    rep.add(f"source: {cfg.data}")
    rep.add(f"span: {system.years[0]}-{system.years[-1]} (T={system.T}), K={system.K}")
    rep.add(f"system columns: {', '.join(system.names)}")
    os.makedirs(cfg.out_dir, exist_ok=True)
    save_csv(system, os.path.join(cfg.out_dir, "system.csv"), cfg.year_column)
    return system


def _stage_unitroot(cfg, rep, system):
    rows = []
    for name in system.names:
        lvl, dif, verdict = integration_order(
            system.column(name), "constant", cfg.adf_max_lags, "sc"
        )
        rows.append((name, lvl.statistic, dif.statistic, verdict))
    rep.section("unit roots (ADF, constant, lag order by SC)")
    rep.add(render_adf_table(rows))
    verdicts = {r[3] for r in rows}
    rep.add(
        "all variables integrated of order one"
        if verdicts == {"I(1)"}
        else f"mixed integration orders: {sorted(verdicts)}"
    )
    _write_rows(
        os.path.join(cfg.out_dir, "unitroot.csv"),
        ["variable", "level_stat", "diff_stat", "order"],
        [(n, repr(a), repr(b), v) for n, a, b, v in rows],
    )
    return rows


def _stage_rank(cfg, rep, system):
    p = select_lag(system, cfg.max_p, cfg.criterion)
    rep.section("lag selection")
    rep.add(f"VAR order by {cfg.criterion.upper()} over 1..{cfg.max_p}: p = {p}")
    result, _ = rank_tests(system, p)
    rep.section("cointegration rank tests")
    rep.add(render_rank_table(result))
    rep.add(
        f"trace decision: r = {result.selected_rank['5%']} at 5%, "
        f"r = {result.selected_rank['1%']} at 1%"
    )
    rep.add(
        f"adjusted-test decision: r = {result.sl_selected_rank['5%']} at 5%, "
        f"r = {result.sl_selected_rank['1%']} at 1%"
    )
    r = cfg.rank if cfg.rank is not None else result.selected_rank["5%"]
    rep.add(f"rank carried forward: r = {r}" + (" (config override)" if cfg.rank is not None else ""))
    rows = []
    for j in range(result.K):
        rows.append(
            (
                j,
                repr(float(result.eigenvalues[j])),
                repr(float(result.trace_stats[j])),
                repr(result.trace_cv[j]["5%"]),
                repr(result.trace_cv[j]["1%"]),
                repr(float(result.sl_stats[j])),
                repr(result.sl_cv[j]["5%"]),
                repr(result.sl_cv[j]["1%"]),
            )
        )
    _write_rows(
        os.path.join(cfg.out_dir, "rank_tests.csv"),
        ["hypothesis_r", "eigenvalue", "trace", "trace_cv5", "trace_cv1", "sl", "sl_cv5", "sl_cv1"],
        rows,
    )
    return p, r


def _stage_vecm(cfg, rep, system, p, r):
    model = fit_vecm(system, p, r, cfg.deterministic)
    rep.section("vecm estimation")
    rep.add(f"p = {p}, r = {r}, deterministic = {cfg.deterministic}, T = {model.T}")
    for j in range(r):
        if "w-p" in model.names and abs(model.beta[list(model.names).index("w-p"), j]) > 1e-12:
            rep.add("cointegration relation: " + render_relation(model.beta[:, j], model.names))
        else:
            rep.add(f"beta[:, {j}] = {np.array2string(model.beta[:, j], precision=4)}")
    rep.add("alpha (loadings):")
    rep.add(render_impact_table(model.alpha, None, model.names, [f"ec{j+1}" for j in range(r)], ""))
    rep.add("residual covariance:")
    rep.add(render_impact_table(model.sigma, None, model.names, model.names, ""))
    _write_matrix(os.path.join(cfg.out_dir, "beta.csv"), model.beta.T, [f"ec{j+1}" for j in range(r)], model.names)
    _write_matrix(os.path.join(cfg.out_dir, "alpha.csv"), model.alpha, model.names, [f"ec{j+1}" for j in range(r)])
    _write_matrix(os.path.join(cfg.out_dir, "sigma.csv"), model.sigma, model.names, model.names)
    if cfg.beta_restriction is not None:
        restriction = BetaRestriction(cfg.beta_restriction, "configured restriction")
        lr, df, pval, beta_r = test_beta_restriction(model, restriction)
        rep.section("beta restriction test")
        rep.add(f"LR = {lr:.4f}, df = {df}, p-value = {pval:.4f}")
        for j in range(beta_r.shape[1]):
            rep.add("restricted relation: " + render_relation(beta_r[:, j], model.names))
        _write_rows(
            os.path.join(cfg.out_dir, "restriction_test.csv"),
            ["lr", "df", "pvalue", *model.names],
            [(repr(lr), df, repr(pval), *[repr(float(v)) for v in beta_r[:, 0]])],
        )
    return model


def _stage_svec(cfg, rep, model):
    pattern = cfg.pattern if cfg.pattern is not None else default_pattern()
    report = check_identification(pattern, model)
    rep.section("structural identification")
    rep.add(report.describe())
    svec = identify(model, pattern, seed=cfg.seed)
    rep.add(f"converged: {svec.converged} after {svec.iterations} iterations")
    rep.add(f"log-likelihood: {svec.loglik:.4f}")
    return pattern, svec


def _stage_bootstrap(cfg, rep, model, pattern, svec):
    boot = bootstrap_tvalues(model, pattern, reps=cfg.bootstrap_reps, seed=cfg.seed, point=svec)
    svec = with_tvalues(svec, boot)
    rep.section("impact matrices (bootstrap t-values in parentheses)")
    rep.add(render_impact_table(svec.b, svec.tvalues_b, model.names, pattern.shock_names,
                                "contemporaneous impact B"))
    rep.add("")
    rep.add(render_impact_table(svec.xi_b, svec.tvalues_xi_b, model.names, pattern.shock_names,
                                "long-run impact Xi*B"))
    rep.add(f"bootstrap: {boot.reps_used}/{boot.reps_requested} replications used "
            f"({boot.failures} failed)")
    out = cfg.out_dir
    _write_matrix(os.path.join(out, "b_matrix.csv"), svec.b, model.names, pattern.shock_names)
    _write_matrix(os.path.join(out, "b_tvalues.csv"), svec.tvalues_b, model.names, pattern.shock_names)
    _write_matrix(os.path.join(out, "xi_b_matrix.csv"), svec.xi_b, model.names, pattern.shock_names)
    _write_matrix(os.path.join(out, "xi_b_tvalues.csv"), svec.tvalues_xi_b, model.names, pattern.shock_names)
    return svec


def _stage_irf(cfg, rep, model, svec):
    res = irf(svec, model, H=cfg.irf_horizon)
    rep.section("impulse responses")
    rep.add(f"horizons 0..{cfg.irf_horizon}; per-shock CSV and per-pair SVG emitted")
    for j, shock in enumerate(res.shock_names):
        rows = [
            (h, *[repr(float(res.responses[h, i, j])) for i in range(len(res.variable_names))])
            for h in res.horizons
        ]
        _write_rows(
            os.path.join(cfg.out_dir, f"irf_{shock}.csv"),
            ["horizon", *res.variable_names],
            rows,
        )
        for i, var in enumerate(res.variable_names):
            svg_line_plot(
                os.path.join(cfg.out_dir, f"irf_{var}_{shock}.svg"),
                res.horizons,
                res.responses[:, i, j],
                title=f"response of {var} to {shock}",
                ylabel=var,
            )
    return res


def _stage_fevd(cfg, rep, model, svec):
    res = fevd(svec, model, cfg.fevd_horizons)
    rep.section("forecast-error variance decomposition")
    for var in res.variable_names:
        rep.add(render_fevd_table(res, var))
        rep.add("")
        i = list(res.variable_names).index(var)
        rows = [
            (h, *[repr(float(res.shares[h][i, j])) for j in range(len(res.shock_names))])
            for h in res.horizons
        ]
        _write_rows(
            os.path.join(cfg.out_dir, f"fevd_{var}.csv"),
            ["period", *res.shock_names],
            rows,
        )
    return res


def run_pipeline(cfg: PipelineConfig) -> str:
    """Execute the full chain; returns the report path.

    Stage failures flush the partial report with a FAILED marker, then
    re-raise the original exception.
    """
    cfg.validate()
    rep = Reporter(cfg.out_dir)
    rep.add("svecm pipeline report")
    rep.add(f"version: {__version__}")
    rep.add(f"seed: {cfg.seed}")
    stage = "ingest"
    try:
        system = _stage_ingest(cfg, rep)
        stage = "unitroot"
        _stage_unitroot(cfg, rep, system)
        stage = "ranktest"
        p, r = _stage_rank(cfg, rep, system)
        stage = "vecm"
        model = _stage_vecm(cfg, rep, system, p, r)
        stage = "svec"
        pattern, svec = _stage_svec(cfg, rep, model)
        stage = "bootstrap"
        svec = _stage_bootstrap(cfg, rep, model, pattern, svec)
        stage = "irf"
        _stage_irf(cfg, rep, model, svec)
        stage = "fevd"
        _stage_fevd(cfg, rep, model, svec)
    except Exception as exc:
        rep.add()
        rep.add(f"FAILED at stage {stage}: {exc}")
        rep.flush()
        raise
    rep.add()
    rep.add("pipeline complete")
    rep.flush()
    _write_rows(
        os.path.join(cfg.out_dir, "pipeline_summary.csv"),
        ["p", "r", "loglik", "identification", "seed"],
        [(p, r, repr(svec.loglik), svec.identification.verdict, cfg.seed)],
    )
    return os.path.join(cfg.out_dir, "report.txt")


# ---------------------------------------------------------------------------
# subcommands


def _load_cfg(args) -> PipelineConfig:
    if not args.config:
        raise SystemExit("this subcommand requires --config")
    cfg = parse_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out_dir is not None:
        cfg.out_dir = args.out_dir
    cfg.validate()
    return cfg


def _cmd_adf(args):
    cfg = _load_cfg(args)
    rep = Reporter(cfg.out_dir)
    system = _stage_ingest(cfg, rep)
    _stage_unitroot(cfg, rep, system)
    rep.flush()
    print("\n".join(rep.lines))


def _cmd_johansen(args):
    cfg = _load_cfg(args)
    rep = Reporter(cfg.out_dir)
    system = _stage_ingest(cfg, rep)
    _stage_rank(cfg, rep, system)
    rep.flush()
    print("\n".join(rep.lines))


def _cmd_vecm(args):
    cfg = _load_cfg(args)
    rep = Reporter(cfg.out_dir)
    system = _stage_ingest(cfg, rep)
    p, r = _stage_rank(cfg, rep, system)
    _stage_vecm(cfg, rep, system, p, r)
    rep.flush()
    print("\n".join(rep.lines))


def _cmd_svec(args):
    cfg = _load_cfg(args)
    rep = Reporter(cfg.out_dir)
    system = _stage_ingest(cfg, rep)
    p, r = _stage_rank(cfg, rep, system)
    model = _stage_vecm(cfg, rep, system, p, r)
    pattern, svec = _stage_svec(cfg, rep, model)
    _stage_bootstrap(cfg, rep, model, pattern, svec)
    rep.flush()
    print("\n".join(rep.lines))


def _cmd_irf(args):
    cfg = _load_cfg(args)
    rep = Reporter(cfg.out_dir)
    system = _stage_ingest(cfg, rep)
    p, r = _stage_rank(cfg, rep, system)
    model = _stage_vecm(cfg, rep, system, p, r)
    _, svec = _stage_svec(cfg, rep, model)
    _stage_irf(cfg, rep, model, svec)
    rep.flush()
    print("\n".join(rep.lines))


def _cmd_fevd(args):
    cfg = _load_cfg(args)
    rep = Reporter(cfg.out_dir)
    system = _stage_ingest(cfg, rep)
    p, r = _stage_rank(cfg, rep, system)
    model = _stage_vecm(cfg, rep, system, p, r)
    _, svec = _stage_svec(cfg, rep, model)
    _stage_fevd(cfg, rep, model, svec)
    rep.flush()
    print("\n".join(rep.lines))


def _cmd_simulate(args):
    if args.seed is None:
        raise SystemExit("simulate requires --seed")
    params = WsPsParams(
        phi=args.phi, a=args.a, alpha_l=args.alpha, b=args.b,
        gamma1=args.gamma1, gamma2=args.gamma2,
    )
    sigmas = {"d": args.sigma_d, "s": args.sigma_s, "p": args.sigma_p,
              "w": args.sigma_w, "l": args.sigma_l}
    shocks = ShockSequence.draw(args.T, sigmas, args.seed)
    panel = raw_series(params, shocks, start_year=args.start_year, wage_shock=args.wage_shock)
    out_dir = args.out_dir or "out"
    os.makedirs(out_dir, exist_ok=True)
    data_path = os.path.join(out_dir, "simulated.csv")
    save_csv(panel, data_path, "year")
    b_true, xi_b_true = true_impact_matrices(params, sigmas, args.wage_shock)
    sidecar = {
        "params": {"phi": params.phi, "a": params.a, "alpha_l": params.alpha_l,
                   "b": params.b, "gamma1": params.gamma1, "gamma2": params.gamma2,
                   "lam": params.lam},
        "sigmas": sigmas,
        "seed": args.seed,
        "T": args.T,
        "wage_shock": args.wage_shock,
        "shock_names": list(SHOCK_NAMES),
        "system_order": ["p", "y-n", "w-p", "n", "u"],
        "true_impact": [[float(v) for v in row] for row in b_true],
        "true_long_run": [[float(v) for v in row] for row in xi_b_true],
    }
    with open(os.path.join(out_dir, "truth.json"), "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
    print(f"wrote {data_path} and truth.json (T={args.T}, seed={args.seed})")


def _cmd_pipeline(args):
    cfg = _load_cfg(args)
    path = run_pipeline(cfg)
    print(f"report written to {path}")


def main(argv=None) -> int:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS,
                        help="path to the pipeline config file")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="override the config seed")
    common.add_argument("--out-dir", default=argparse.SUPPRESS,
                        help="override the config output directory")

    parser = argparse.ArgumentParser(prog="svecm", description=__doc__.splitlines()[0])
    parser.add_argument("--config", default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out-dir", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn in (
        ("adf", _cmd_adf),
        ("johansen", _cmd_johansen),
        ("vecm", _cmd_vecm),
        ("svec", _cmd_svec),
        ("irf", _cmd_irf),
        ("fevd", _cmd_fevd),
        ("pipeline", _cmd_pipeline),
    ):
        s = sub.add_parser(name, parents=[common])
        s.set_defaults(func=fn)

    sim = sub.add_parser("simulate", parents=[common])
    sim.add_argument("--T", type=int, default=500)
    sim.add_argument("--start-year", type=int, default=1960)
    sim.add_argument("--phi", type=float, default=WsPsParams.phi)
    sim.add_argument("--a", type=float, default=WsPsParams.a)
    sim.add_argument("--alpha", type=float, default=WsPsParams.alpha_l)
    sim.add_argument("--b", type=float, default=WsPsParams.b)
    sim.add_argument("--gamma1", type=float, default=WsPsParams.gamma1)
    sim.add_argument("--gamma2", type=float, default=WsPsParams.gamma2)
    for key in ("d", "s", "p", "w", "l"):
        sim.add_argument(f"--sigma-{key}", type=float, default=DEFAULT_SIGMAS[key])
    sim.add_argument("--wage-shock", choices=("transitory", "permanent"), default="transitory")
    sim.set_defaults(func=_cmd_simulate)

    args = parser.parse_args(argv)
    try:
        args.func(args)
    except SvecmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
