"""
pd-fade-opt command line.

    python run.py optimize --config baseline.cfg --out baseline.csv
    python run.py validate-mc --config baseline.cfg --trials 1000000
    python run.py golden --out data/golden/derived_records.csv

Every command writes one CSV file and prints a short summary.
"""

import argparse
import csv
import math
import os
import sys

from pdfade.config import CSV_SIGNIFICANT_DIGITS, DERIVED_FILE, MC_SEED, MC_TOLERANCE, MC_TRIALS, log
from pdfade.errors import ConfigError, PdFadeError
from pdfade.fading_model import fade_profile, fading_stats, packet_count, rate_split
from pdfade.message_error import q_gaussian
from pdfade.optimizer import (
    admissible_grid,
    fixed_re_trajectory,
    geometric_t_values,
    ideal_q_curve,
    optimize,
    sweep_overall_rate,
    sweep_power,
    trajectory_gap,
)
from pdfade.oracles import build_derived_records, write_golden_records
from pdfade.outage import ApproxMethod, pe_closed_form, pe_monte_carlo
from pdfade.run_config import COMMANDS, parse_config

PROG = "pd-fade-opt"

POINT_COLUMNS = ["rc", "re", "n", "fades_full", "frac_weight", "p_e", "q", "log10_q", "method"]
SWEEP_COLUMNS = ["overall_rate", "T", "P_dB", "rc_star", "re_star", "n_star", "p_e_star",
                 "log10_q_star", "method"]
TRAJECTORY_COLUMNS = ["overall_rate", "T", "re_fixed", "rc", "log10_q"]
VALIDATE_COLUMNS = ["rc", "n", "p_e_approx", "p_e_mc", "mc_std_err", "abs_deviation", "bound",
                    "within"]

EXIT_OK = 0
EXIT_VALIDATION_FAILED = 1
EXIT_ERROR = 2


# ============================================================================
# CSV OUTPUT
# ============================================================================

def format_value(value):
    """12 significant digits for floats, enum tags by value, -inf spelled out"""
    if isinstance(value, ApproxMethod):
        return value.value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if value == int(value) and abs(value) < 1e15:
            return str(int(value))
        return format(value, f".{CSV_SIGNIFICANT_DIGITS}g")
    return str(value)


def write_csv(path, columns, rows):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    log(f"📝 Wrote {len(rows)} rows to {path}")


def _output_path(config):
    return config.output or f"{config.command}.csv"


def _report_errors(errors):
    for T, message in errors:
        print(f"⚠️  T={T:g} skipped: {message}")


# ============================================================================
# COMMANDS
# ============================================================================

def _estimate(config, params, rc, stats, point_index=0):
    method = config.approx_method
    if method.is_closed_form:
        return pe_closed_form(method, params, rc, stats)
    mc = config.monte_carlo()
    return pe_monte_carlo(params, rc, mc.trials, mc.seed, point_index, mc.workers)


def _point_row(split, profile, p_e, q):
    return [split.rc, split.re, split.n, profile.full_fades, profile.fractional_weight,
            p_e.p_e, q.q, q.log10_q, p_e.method]


def run_point(config):
    params = config.system_params()
    stats = fading_stats(params.P, config.quadrature())
    split = rate_split(params, config.rc)
    profile = fade_profile(params, split.rc)
    p_e = _estimate(config, params, split.rc, stats)
    q = q_gaussian(split.n, params.m_hat, p_e.p_e, p_e.log_p_e, p_e.log_q_e)

    write_csv(_output_path(config), POINT_COLUMNS, [_point_row(split, profile, p_e, q)])
    print(f"✅ R_C={split.rc:.6g}, R_E={split.re:.6g}, n={split.n}: "
          f"p_e={p_e.p_e:.6g}, log10 q={q.log10_q:.6g} ({p_e.method.value})")
    return EXIT_OK


def run_optimize(config):
    params = config.system_params()
    log(f"🔧 Optimizing {config.method} over T={params.T:g}, P={params.P_dB:g} dB")
    result = optimize(params, config.approx_method, mc=config.monte_carlo(),
                      quad=config.quadrature(), rc_limit=config.rc_limit)

    rows = [_point_row(g.split, fade_profile(params, g.split.rc), g.p_e, g.q) for g in result.grid]
    write_csv(_output_path(config), POINT_COLUMNS, rows)
    best = result.best
    print(f"✅ Optimum ({result.method.value}): rc*={best.split.rc:.6g}, re*={best.split.re:.6g}, "
          f"n*={best.split.n}, log10 q*={best.q.log10_q:.6g} over {len(result.grid)} grid points")
    return EXIT_OK


def _t_values(config, params):
    if config.t_values:
        return config.t_values
    return geometric_t_values(params, config.rate_max, config.rate_min, config.rate_points)


def _sweep_row(row):
    return [row.overall_rate, row.T, row.P_dB, row.rc_star, row.re_star, row.n_star,
            row.p_e_star, row.log10_q_star, row.method]


def run_sweep_rate(config):
    params = config.system_params()
    errors = []
    log(f"📊 Sweeping overall rate at P = {params.P_dB:g} dB ({config.method})")
    rows = sweep_overall_rate(params, _t_values(config, params), config.approx_method,
                              mc=config.monte_carlo(), quad=config.quadrature(), errors=errors)
    write_csv(_output_path(config), SWEEP_COLUMNS, [_sweep_row(r) for r in rows])
    _report_errors(errors)
    print(f"✅ {len(rows)} rows, {len(errors)} skipped T values")
    return EXIT_OK


def run_sweep_power(config):
    params = config.system_params()
    errors = []
    rows = sweep_power(params, _t_values(config, params), config.P_dB_values, config.approx_method,
                       mc=config.monte_carlo(), quad=config.quadrature(), errors=errors)
    write_csv(_output_path(config), SWEEP_COLUMNS, [_sweep_row(r) for r in rows])
    _report_errors(errors)
    print(f"✅ {len(rows)} rows over {len(config.P_dB_values)} power levels, "
          f"{len(errors)} skipped T values")
    return EXIT_OK


def run_trajectory(config):
    params = config.system_params()
    T_values = _t_values(config, params)
    method, mc, quad = config.approx_method, config.monte_carlo(), config.quadrature()
    stats = fading_stats(params.P, quad)
    # MonteCarlo without allow_monte_carlo fails here, before anything is written
    ideal = ideal_q_curve(params, T_values, method, mc, quad, stats)
    errors = []
    rows = fixed_re_trajectory(params, config.re_fixed, T_values, method, mc, quad, stats, errors)

    out = [[r.overall_rate, r.T, r.re_star, r.rc_star, r.log10_q_star] for r in rows]
    write_csv(_output_path(config), TRAJECTORY_COLUMNS, out)
    _report_errors(errors)

    gaps = trajectory_gap(ideal, rows)
    worst = max(gaps.values()) if gaps else float("nan")
    print(f"✅ {len(rows)} rows for R_E={config.re_fixed:g}; "
          f"largest log10 q gap to the optimized system: {worst:.6g}")
    return EXIT_OK


def run_validate_mc(config):
    """Closed-form p_e against Monte Carlo at every admissible R_C"""
    params = config.system_params()
    method = config.approx_method
    if not method.is_closed_form:
        method = ApproxMethod.APPROX4
    mc = config.monte_carlo()
    stats = fading_stats(params.P, config.quadrature())
    grid = admissible_grid(params, method, rc_limit=config.rc_limit)
    log(f"🔧 Validating {method.value} against {mc.trials} Monte Carlo trials at {len(grid)} points")

    rows = []
    worst = 0.0
    failed = 0
    for index, split in enumerate(grid):
        approx = pe_closed_form(method, params, split.rc, stats)
        estimate = pe_monte_carlo(params, split.rc, mc.trials, mc.seed, index, mc.workers)
        deviation = abs(approx.p_e - estimate.p_e)
        bound = 3.0 * estimate.mc_std_err + MC_TOLERANCE
        within = deviation <= bound
        worst = max(worst, deviation)
        failed += not within
        rows.append([split.rc, split.n, approx.p_e, estimate.p_e, estimate.mc_std_err,
                     deviation, bound, within])

    write_csv(_output_path(config), VALIDATE_COLUMNS, rows)
    if failed:
        print(f"❌ {failed} of {len(rows)} points outside 3 SE + {MC_TOLERANCE}; "
              f"max |{method.value} - MC| = {worst:.6g}")
        return EXIT_VALIDATION_FAILED
    print(f"✅ max |{method.value} - MC| = {worst:.6g} over {len(rows)} points, all within bound")
    return EXIT_OK


DISPATCH = {
    "point": run_point,
    "optimize": run_optimize,
    "sweep-rate": run_sweep_rate,
    "sweep-power": run_sweep_power,
    "trajectory": run_trajectory,
    "validate-mc": run_validate_mc,
}


def run(config):
    """Execute a validated RunConfig; returns the exit status"""
    return DISPATCH[config.command](config)


def run_golden(out, trials, seed):
    path = out or DERIVED_FILE
    records = build_derived_records(trials=trials, seed=seed)
    write_golden_records(records, path)
    print(f"✅ {len(records)} derived golden records in {path}")
    return EXIT_OK


# ============================================================================
# ENTRY POINT
# ============================================================================

def build_parser():
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Channel/erasure rate split optimizer for PD block-Rayleigh fading",
    )
    parser.add_argument("command", choices=COMMANDS + ("golden",))
    parser.add_argument("--config", help="flat key = value run configuration")
    parser.add_argument("--out", help="CSV output path (overrides 'output')")
    parser.add_argument("--seed", type=int, help="Monte Carlo seed (overrides 'seed')")
    parser.add_argument("--trials", type=int, help="Monte Carlo trials (overrides 'trials')")
    parser.add_argument("--method", help="Approx1..Approx4 or MonteCarlo (overrides 'method')")
    return parser


def _load(args):
    if not args.config:
        raise ConfigError(f"command '{args.command}' needs --config <path>")
    with open(args.config, encoding="utf-8") as f:
        text = f.read()
    overrides = {
        "command": args.command,
        "output": args.out,
        "seed": args.seed,
        "trials": args.trials,
        "method": args.method,
    }
    return parse_config(text, overrides)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "golden":
            return run_golden(args.out, args.trials or MC_TRIALS,
                              MC_SEED if args.seed is None else args.seed)
        return run(_load(args))
    except (PdFadeError, OSError) as e:
        print(f"❌ {PROG} {args.command}: {e}", file=sys.stderr)
        return EXIT_ERROR
