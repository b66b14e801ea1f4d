"""Command line front end.

Subcommands: ``test``, ``simulate``, ``decompose`` and ``cic-compare``.
Exit codes: 0 when a command completes (whatever the test decides), 2 on
bad input, 3 when inference fails numerically.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .counterfactual import check_cdf_parallel, compare_counterfactuals
from .distributions import Binning, align_supports, total_variation
from .errors import InputError, NumericalError
from .inference import TestConfig, falsification_test
from .mixture import (
    EXAMPLE3,
    case3_representation,
    decompose,
    example3_table,
    lognormal_mixture_quadruple,
    reconstruct,
)
from .panel import CELLS, cell_distributions, read_panel_csv, write_panel_csv
from .report import (
    build_report,
    load_json,
    quadruple_to_dict,
    read_pair,
    read_quadruple,
    write_plot_csv,
)
from .simulate import (
    BINARY,
    NORMAL_VIOLATION,
    binary_quadruple,
    normal_violation_quadruple,
    simulate_binary,
    simulate_mixture,
    simulate_normal_violation,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

DGPS = ("case1", "case2", "case3", "example3", "binary", "normal-violation")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(f"{self.prog}: {message}")


def _fail(message: str, code: int = EXIT_INPUT) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _positive(kind):
    def parse(text):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value

    return parse


def _binning(args) -> Binning | None:
    if args.bin_width is None:
        if getattr(args, "zero_bin", False):
            raise InputError("--zero-bin requires --bin-width")
        return None
    return Binning(args.bin_width, args.origin, getattr(args, "zero_bin", False))


def _add_binning(p: argparse.ArgumentParser, zero_bin: bool = True) -> None:
    p.add_argument("--bin-width", type=_positive(float), help="discretize outcomes into bins of this width")
    p.add_argument("--origin", type=float, default=0.0, help="left edge of bin 0 (default 0)")
    if zero_bin:
        p.add_argument("--zero-bin", action="store_true", help="give outcomes equal to 0 their own bin")


def _cells_from_input(path: str, binning: Binning | None):
    if path.lower().endswith(".json"):
        return read_quadruple(load_json(path))
    return cell_distributions(read_panel_csv(path), binning)


def _run(handler, argv) -> int:
    try:
        return handler(argv)
    except InputError as exc:
        return _fail(str(exc))
    except NumericalError as exc:
        return _fail(str(exc), EXIT_NUMERICAL)
    except OSError as exc:
        return _fail(str(exc))
    except SystemExit as exc:  # --help
        return exc.code if isinstance(exc.code, int) else EXIT_OK


# -- test ---------------------------------------------------------------------


def _test_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="didinvariance test", description="Test parallel trends of distributions on a panel CSV.")
    p.add_argument("--input", required=True, help="panel CSV: cluster_id,group,period,outcome[,weight]")
    p.add_argument("--output", required=True, help="report JSON path")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--bootstrap", type=int, default=1000, help="cluster bootstrap replicates")
    p.add_argument("--sims", type=int, default=10000, help="draws for the critical value")
    p.add_argument("--seed", type=int, default=0)
    _add_binning(p)
    p.add_argument("--min-se-floor", type=float, default=0.0)
    p.add_argument("--keep-empty-bins", action="store_true", help="do not drop bins empty in all used cells")
    p.add_argument("--workers", type=int, default=1, help="threads for the bootstrap (results do not depend on it)")
    p.add_argument("--plot-csv", help="write support,implied_pmf,se,flag here")
    p.add_argument("--decompose", action="store_true", help="add total variation distances between cells")
    p.add_argument("--cic", action="store_true", help="add the CiC vs parallel-trends divergence")
    return p


def _decomposition_block(cells) -> dict:
    f = cells.dists
    return {
        "theta_comparison_over_time": total_variation(f[0][1], f[0][0]),
        "theta_treated_over_time": total_variation(f[1][1], f[1][0]),
        "tv_groups_pre": total_variation(f[1][0], f[0][0]),
        "note": "treated post-period cell holds treated outcomes",
    }


def _cic_block(cells) -> dict:
    cmp = compare_counterfactuals(cells)
    return {"divergence": cmp.divergence, "argmax": cmp.argmax, "implied_proper": cmp.implied_proper}


def _cmd_test(argv) -> int:
    args = _test_parser().parse_args(argv)
    config = TestConfig(
        alpha=args.alpha,
        bootstrap_reps=args.bootstrap,
        cv_sims=args.sims,
        seed=args.seed,
        bin_width=args.bin_width,
        origin=args.origin,
        zero_bin=args.zero_bin,
        min_se_floor=args.min_se_floor,
        drop_empty_bins=not args.keep_empty_bins,
        workers=args.workers,
    )
    panel = read_panel_csv(args.input)
    result = falsification_test(panel, config)
    decomposition = cic = None
    if args.decompose or args.cic:
        cells = cell_distributions(panel, config.binning)
        decomposition = _decomposition_block(cells) if args.decompose else None
        cic = _cic_block(cells) if args.cic else None
    report = build_report(result, ["test", *argv], decomposition, cic)
    Path(args.output).write_text(report.to_json(), encoding="utf-8")
    if args.plot_csv:
        with open(args.plot_csv, "w", encoding="utf-8", newline="") as fh:
            write_plot_csv(result, fh)
    if result.status != "ok":
        return _fail(f"numerical failure: {result.error}", EXIT_NUMERICAL)
    s = report.summary
    print(f"T = {s['statistic']}, critical value = {s['critical_value']}, p = {s['p_value']}: {s['decision']}")
    return EXIT_OK


def cmd_test(argv) -> int:
    return _run(_cmd_test, argv)


# -- simulate -----------------------------------------------------------------


def _simulate_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="didinvariance simulate", description="Simulate a 2x2 panel or write a population quadruple.")
    p.add_argument("--dgp", required=True, choices=DGPS)
    p.add_argument("--n", type=int, default=1000, help="units per cell")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--clusters", type=int, default=50)
    p.add_argument("--out", required=True, help="panel CSV, or quadruple JSON with --population")
    p.add_argument("--theta", type=float, help="mixture weight for case3 (default 0.5)")
    p.add_argument("--bin-width", type=_positive(float), help="bin simulated outcomes; required with --population for continuous DGPs")
    p.add_argument("--population", action="store_true", help="write the discretized population quadruple as JSON")
    return p


def _mixture_theta(args) -> float:
    fixed = {"case1": 1.0, "case2": 0.0, "example3": EXAMPLE3["theta"]}
    if args.dgp in fixed:
        if args.theta is not None and args.theta != fixed[args.dgp]:
            raise InputError(f"--dgp {args.dgp} fixes theta = {fixed[args.dgp]}")
        return fixed[args.dgp]
    return EXAMPLE3["theta"] if args.theta is None else args.theta


def _oracle_lines(args) -> list[str]:
    if args.dgp == "binary":
        return [f"P(Y=1) group {d} period {t}: {BINARY[d][t]:.2f}" for d, t in CELLS]
    if args.dgp == "normal-violation":
        lines = []
        for d, t in CELLS:
            mu, sd = NORMAL_VIOLATION["treated" if d else "comparison"][t]
            lines.append(f"group {d} period {t}: N({mu:g}, {sd:g}^2), mean {mu:.2f}")
        return lines
    theta = _mixture_theta(args)
    table = example3_table(theta)
    lines = [f"theta = {theta:g}: G_t ~ LN(2+t, 1), H_d ~ LN(3+d, 1)", "g       group       pre    post  change"]
    for (transform, group), row in table.items():
        lines.append(f"{transform:<7} {group:<10} {row['pre']:6.2f} {row['post']:7.2f} {row['change']:7.2f}")
    return lines


def _cmd_simulate(argv) -> int:
    args = _simulate_parser().parse_args(argv)
    if args.n < 1:
        raise InputError("--n must be at least 1")
    if args.population:
        if args.dgp == "binary":
            cells = binary_quadruple()
        elif args.dgp == "normal-violation":
            cells = normal_violation_quadruple()
        else:
            if args.bin_width is None:
                raise InputError("--population needs --bin-width for this DGP")
            cells = lognormal_mixture_quadruple(_mixture_theta(args), bin_width=args.bin_width)
        Path(args.out).write_text(json.dumps(quadruple_to_dict(cells)) + "\n", encoding="utf-8")
    else:
        if args.dgp == "binary":
            panel = simulate_binary(args.n, args.seed, args.clusters)
        elif args.dgp == "normal-violation":
            panel = simulate_normal_violation(args.n, args.seed, args.clusters)
        else:
            panel = simulate_mixture(_mixture_theta(args), args.n, args.seed, args.clusters)
        if args.bin_width is not None:
            panel = panel.with_outcomes(Binning(args.bin_width).labels(panel.outcome))
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            write_panel_csv(panel, fh)
    for line in _oracle_lines(args):
        print(line)
    return EXIT_OK


def cmd_simulate(argv) -> int:
    return _run(_cmd_simulate, argv)


# -- decompose ----------------------------------------------------------------


def _decompose_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="didinvariance decompose", description="Mixture decomposition of a pair of PMFs or of a quadruple's time pairs.")
    p.add_argument("--input", required=True, help="pair JSON, quadruple JSON or panel CSV")
    _add_binning(p)
    return p


def _decomposition_dict(f1, f2) -> dict:
    dec = decompose(f1, f2)
    r1, r2 = reconstruct(dec)
    a, b = r1.on_support(dec.f_min.support), r2.on_support(dec.f_min.support)
    o1, o2 = align_supports([f1, f2])
    error = max(np.abs(a.masses - o1.masses).max(), np.abs(b.masses - o2.masses).max())
    return {
        "theta": dec.theta,
        "degenerate_case": dec.degenerate_case,
        "support": dec.f_min.support.tolist(),
        "f_min": dec.f_min.masses.tolist(),
        "f_tilde_1": dec.f_tilde_1.masses.tolist(),
        "f_tilde_2": dec.f_tilde_2.masses.tolist(),
        "reconstruction_error": float(error),
    }


def _cmd_decompose(argv) -> int:
    args = _decompose_parser().parse_args(argv)
    if args.input.lower().endswith(".json"):
        data = load_json(args.input)
        if "cells" not in data:
            out = _decomposition_dict(*read_pair(data))
            print(json.dumps(out, indent=2))
            return EXIT_OK
        cells = read_quadruple(data)
    else:
        cells = cell_distributions(read_panel_csv(args.input), _binning(args))
    f = cells.dists
    check = check_cdf_parallel(cells)
    out = {
        "treated_time_pair": _decomposition_dict(f[1][1], f[1][0]),
        "comparison_time_pair": _decomposition_dict(f[0][1], f[0][0]),
        "cdf_parallel_deviation": check.max_abs_deviation,
        "cdf_parallel_argmax": check.argmax,
        "cdf_parallel_holds": check.holds,
        "mixture_representation": case3_representation(cells, tolerance=1e-12) is not None,
    }
    print(json.dumps(out, indent=2))
    return EXIT_OK


def cmd_decompose(argv) -> int:
    return _run(_cmd_decompose, argv)


# -- cic-compare --------------------------------------------------------------


def _cic_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="didinvariance cic-compare", description="Compare CiC and parallel-trends counterfactual CDFs.")
    p.add_argument("--input", required=True, help="quadruple JSON or panel CSV")
    _add_binning(p)
    p.add_argument("--method", choices=("interpolated", "step"), default="interpolated")
    p.add_argument("--plot-csv", help="write support,cic_cdf,implied_cdf here")
    return p


def _cmd_cic_compare(argv) -> int:
    args = _cic_parser().parse_args(argv)
    cells = _cells_from_input(args.input, _binning(args))
    cmp = compare_counterfactuals(cells, args.method)
    print(json.dumps({
        "divergence": cmp.divergence,
        "argmax": cmp.argmax,
        "implied_proper": cmp.implied_proper,
        "method": args.method,
    }, indent=2))
    if args.plot_csv:
        with open(args.plot_csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["support", "cic_cdf", "implied_cdf"])
            for row in zip(cmp.support.tolist(), cmp.cic_cdf.tolist(), cmp.implied_cdf.tolist()):
                writer.writerow([repr(v) for v in row])
    return EXIT_OK


def cmd_cic_compare(argv) -> int:
    return _run(_cmd_cic_compare, argv)


# -- entry point --------------------------------------------------------------

COMMANDS = {
    "test": cmd_test,
    "simulate": cmd_simulate,
    "decompose": cmd_decompose,
    "cic-compare": cmd_cic_compare,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv or argv[0] in ("-h", "--help") or argv[0] not in COMMANDS:
        print("usage: didinvariance {" + ",".join(COMMANDS) + "} [options]", file=sys.stderr)
        return EXIT_OK if argv and argv[0] in ("-h", "--help") else EXIT_INPUT
    return COMMANDS[argv[0]](argv[1:])


if __name__ == "__main__":
    sys.exit(main())
