"""Command-line front end.

Exit codes: 0 success, 1 a validation check failed, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import ConfigError, RunConfig, config_items, load_config, with_overrides
from .core import Policy, ValidationError, validate
from .cost_model import EvaluationReport, total_cost
from .oracle.enumeration import StateSpaceTooLarge
from .oracle.simulation import SimulationResult, simulate
from .optimizer import SearchError, SearchSpace, default_R_range, optimize
from .validation import ValidationReport, run_validation

CSV_COLUMNS = ("m", "R", "s", "tc_total", "tc_warehouse", "tc_retailer", "mass_residual_max")


class UsageError(Exception):
    pass


def _num(x: float) -> str:
    return format(x, ".17g")


def _report_row(rep: EvaluationReport) -> list[str]:
    p, b = rep.policy, rep.breakdown
    return [str(p.m), str(p.R), str(p.s), _num(b.total), _num(b.warehouse_holding),
            _num(b.retailer_holding_shortage), _num(rep.mass_residual_max)]


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _table(header, rows) -> str:
    rows = [list(map(str, r)) for r in rows]
    widths = [max(len(str(h)), *(len(r[c]) for r in rows)) if rows else len(str(h))
              for c, h in enumerate(header)]
    lines = ["  ".join(str(h).rjust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in rows]
    return "\n".join(lines) + "\n"


def _report_flat(rep: EvaluationReport) -> dict:
    p, b = rep.policy, rep.breakdown
    return {"m": p.m, "R": p.R, "s": p.s, "tc_total": b.total, "tc_warehouse": b.warehouse_holding,
            "tc_retailer": b.retailer_holding_shortage, "mass_residual_max": rep.mass_residual_max}


def _report_dict(rep: EvaluationReport) -> dict:
    return {
        "policy": {"m": rep.policy.m, "R": rep.policy.R, "s": rep.policy.s},
        "breakdown": rep.breakdown.as_dict(),
        "per_state": {
            str(i): {"probability": st.probability, "unit_cost": st.unit_cost,
                     "mass_residual": st.mass_residual}
            for i, st in rep.per_state.items()
        },
        "mass_residual_max": rep.mass_residual_max,
    }


def _sim_dict(res: SimulationResult) -> dict:
    return {
        "mean_cost_rate": res.mean_cost_rate,
        "std_error": res.std_error,
        "replications": res.replications,
        "horizon": res.horizon,
        "warmup": res.warmup,
        "breakdown": res.breakdown.as_dict(),
        "inventory_histograms": res.inventory_histograms.tolist(),
    }


def _document(command: str, cfg: RunConfig, result) -> str:
    doc = {
        "tool": "twoechelon",
        "version": __version__,
        "command": command,
        "config": dict(config_items(cfg)),
        "result": result,
    }
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


class Output:
    def __init__(self, fmt: str, out: str | None, stdout):
        self.fmt = fmt
        self.out = Path(out) if out else None
        self.stdout = stdout

    def emit(self, command: str, cfg: RunConfig, table: str, csv_text: str, result: dict) -> None:
        structured = _document(command, cfg, result)
        shown = {"table": table, "csv": csv_text, "structured": structured}[self.fmt]
        self.stdout.write(shown)
        if self.out is not None:
            self.out.write_text(csv_text if self.fmt == "csv" else structured)


def _need_policy(cfg: RunConfig) -> Policy:
    if cfg.policy is None:
        raise UsageError("config has no policy (policy.m, policy.R, policy.s)")
    validate(cfg.params, cfg.policy)
    return cfg.policy


def cmd_evaluate(cfg: RunConfig, out: Output) -> int:
    policy = _need_policy(cfg)
    rep = total_cost(policy, cfg.params, epsilon=cfg.epsilon)
    state_rows = [[i, _num(st.probability), _num(st.unit_cost), f"{st.mass_residual:.3e}"]
                  for i, st in rep.per_state.items()]
    table = _table(("component", "cost_rate"), [
        ("warehouse_holding", _num(rep.breakdown.warehouse_holding)),
        ("retailer_holding_shortage", _num(rep.breakdown.retailer_holding_shortage)),
        ("total", _num(rep.total)),
    ]) + "\n" + _table(("state", "probability", "unit_cost", "mass_residual"), state_rows)
    out.emit("evaluate", cfg, table, _csv(CSV_COLUMNS, [_report_row(rep)]), _report_dict(rep))
    return 0


def cmd_simulate(cfg: RunConfig, out: Output, threads: int) -> int:
    policy = _need_policy(cfg)
    sim = cfg.sim
    try:
        res = simulate(policy, cfg.params, horizon=sim.horizon, warmup=sim.warmup,
                       replications=sim.replications, seed=sim.seed,
                       sample_interval=sim.sample_interval, threads=threads)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    pooled = res.pooled_histogram()
    total = pooled.sum() or 1
    R, Q = policy.R, cfg.params.Q
    table = (
        f"mean cost rate  {_num(res.mean_cost_rate)} +- {_num(res.std_error)}"
        f"  ({res.replications} replications, horizon {res.horizon}, warmup {res.warmup})\n"
        + _table(("component", "cost_rate"), [
            ("warehouse_holding", _num(res.breakdown.warehouse_holding)),
            ("retailer_holding_shortage", _num(res.breakdown.retailer_holding_shortage)),
        ])
        + "\n" + _table(("position", "share"),
                        [(R + 1 + q, f"{pooled[q] / total:.4f}") for q in range(Q)])
    )
    csv_text = _csv(("mean_cost_rate", "std_error", "tc_warehouse", "tc_retailer"),
                    [[_num(res.mean_cost_rate), _num(res.std_error),
                      _num(res.breakdown.warehouse_holding),
                      _num(res.breakdown.retailer_holding_shortage)]])
    out.emit("simulate", cfg, table, csv_text, _sim_dict(res))
    return 0


def cmd_validate(cfg: RunConfig, out: Output, threads: int) -> int:
    policy = _need_policy(cfg)
    p = cfg.params
    if p.N > 4 or p.Q > 4 or policy.m > 3:
        raise UsageError("validate needs a small instance (N <= 4, Q <= 4, m <= 3)")
    sim_kwargs = dict(horizon=cfg.sim.horizon, warmup=cfg.sim.warmup,
                      replications=cfg.sim.replications, seed=cfg.sim.seed,
                      sample_interval=cfg.sim.sample_interval, threads=threads)
    try:
        report: ValidationReport = run_validation(
            policy, p, prob_floor=cfg.prob_floor, simulate_check=cfg.validate_simulate,
            sim_kwargs=sim_kwargs, corrupt_mu=cfg.corrupt_mu, epsilon=cfg.epsilon)
    except StateSpaceTooLarge as exc:
        raise UsageError(str(exc)) from None
    rows = [(c.name, f"{c.deviation:.3e}", f"{c.tolerance:.1e}", "PASS" if c.passed else "FAIL", c.detail)
            for c in report.checks]
    header = ("check", "max_deviation", "tolerance", "status", "detail")
    result = {
        "passed": report.passed,
        "checks": [{"name": c.name, "deviation": c.deviation, "tolerance": c.tolerance,
                    "passed": c.passed, "detail": c.detail} for c in report.checks],
    }
    out.emit("validate", cfg, _table(header, rows), _csv(header, rows), result)
    return 0 if report.passed else 1


def _space(cfg: RunConfig) -> SearchSpace:
    if cfg.space is not None:
        return cfg.space
    return SearchSpace((0, 4), default_R_range(cfg.params), (0, cfg.params.Q - 1))


def cmd_optimize(cfg: RunConfig, out: Output, threads: int) -> int:
    res = optimize(cfg.params, _space(cfg), mode=cfg.search_mode, epsilon=cfg.epsilon,
                   threads=threads)
    rows = [_report_row(rep) for rep in res.grid]
    best = res.report
    table = _table(CSV_COLUMNS, rows) + (
        f"\nbest m={best.policy.m} R={best.policy.R} s={best.policy.s} tc={_num(best.total)}\n")
    result = {"grid": [_report_flat(rep) for rep in res.grid], "best": _report_flat(best)}
    out.emit("optimize", cfg, table, _csv(CSV_COLUMNS, rows), result)
    return 0


_SWEEPABLE = {f"params.{k}" for k in ("N", "lam", "L", "L0", "h", "h0", "beta", "Q")} | \
    {f"policy.{k}" for k in ("m", "R", "s")}
_INT_FIELDS = {"params.N", "params.Q", "policy.m", "policy.R", "policy.s"}


def cmd_sweep(cfg: RunConfig, out: Output) -> int:
    policy = _need_policy(cfg)
    name = cfg.sweep_param
    if name is not None and "." not in name:
        name = f"policy.{name}" if name in ("m", "R", "s") else f"params.{name}"
    if name not in _SWEEPABLE:
        raise UsageError(f"sweep.param must be one of {sorted(_SWEEPABLE)}")
    if not cfg.sweep_values:
        raise UsageError("sweep.values is empty")
    section, field_name = name.split(".")
    ints = name in _INT_FIELDS
    rows = []
    reports = []
    values = []
    for raw in cfg.sweep_values:
        value = int(raw) if ints else float(raw)
        if ints and value != raw:
            raise UsageError(f"{name} needs integer values, got {raw}")
        params, pol = cfg.params, policy
        if section == "params":
            params = replace(params, **{field_name: value})
        else:
            pol = replace(pol, **{field_name: value})
        validate(params, pol)
        rep = total_cost(pol, params, epsilon=cfg.epsilon)
        reports.append(rep)
        values.append(value)
        rows.append([str(value) if ints else _num(value)] + _report_row(rep))
    header = (name,) + CSV_COLUMNS
    result = {"param": name, "rows": [{name: v, **_report_flat(rep)}
                                      for v, rep in zip(values, reports)]}
    out.emit("sweep", cfg, _table(header, rows), _csv(header, rows), result)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twoechelon", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("evaluate", "exact cost of one policy"),
        ("simulate", "discrete-event estimate of one policy's cost"),
        ("validate", "check the exact model against the oracles"),
        ("optimize", "grid search for the cheapest policy"),
        ("sweep", "exact cost while one parameter varies"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True, help="key = value config file")
        cmd.add_argument("--out", help="write the structured (or csv) document here")
        cmd.add_argument("--format", choices=("table", "csv", "structured"), default="table")
        cmd.add_argument("--seed", type=int)
        cmd.add_argument("--epsilon", type=float)
        cmd.add_argument("--replications", type=int)
        cmd.add_argument("--horizon", type=float)
        cmd.add_argument("--threads", type=int, default=1)
    return parser


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        cfg = with_overrides(load_config(args.config), seed=args.seed, epsilon=args.epsilon,
                             replications=args.replications, horizon=args.horizon)
        if args.epsilon is not None and not 0.0 < args.epsilon < 1.0:
            raise UsageError("epsilon must lie in (0, 1)")
        if args.threads < 1:
            raise UsageError("--threads must be >= 1")
        out = Output(args.format, args.out, stdout)
        if args.command == "evaluate":
            return cmd_evaluate(cfg, out)
        if args.command == "simulate":
            return cmd_simulate(cfg, out, args.threads)
        if args.command == "validate":
            return cmd_validate(cfg, out, args.threads)
        if args.command == "optimize":
            return cmd_optimize(cfg, out, args.threads)
        return cmd_sweep(cfg, out)
    except (ConfigError, ValidationError, SearchError, UsageError) as exc:
        stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
