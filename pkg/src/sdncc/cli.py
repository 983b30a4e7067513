"""Command-line entry point: ``sdncc solve|fit-hoplaw|alloc|fig2|fig3``.

Exit codes: 0 success, 2 configuration error, 3 infeasible instance.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from sdncc.errors import AllInfeasible, ConfigError, Infeasible, SdnccError
from sdncc.graph import Topology
from sdncc.hoplaw import default_sample_points, fit_topology
from sdncc.scenario import (
    FIG3_FIELDS,
    METHODS,
    Scenario,
    alloc_rows,
    experiment_fig2,
    experiment_fig3,
    rows_to_csv,
    run_scenario,
    to_csv,
)

EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3

log = logging.getLogger("sdncc")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)


def _plot_path(args) -> Path | None:
    if args.no_plot:
        return None
    if args.plot:
        return Path(args.plot)
    if args.out:
        return Path(args.out).with_suffix(".png")
    return None


def _load(args) -> Scenario:
    scenario = Scenario.load(args.config)
    return scenario.with_overrides(
        seed=args.seed,
        method=getattr(args, "method", None),
        budget=getattr(args, "budget", None),
    )


def cmd_solve(args) -> None:
    scenario = _load(args)
    fit = scenario.hop_law_fit(scenario.build_topology())
    rows = run_scenario(scenario, timing=args.timing, fit=fit)
    _emit(rows_to_csv(rows, scenario, fit), args.out)


def cmd_fit_hoplaw(args) -> None:
    topology = Topology.load(args.topology)
    points = args.points or default_sample_points(topology.n, args.max_fraction)
    fit = fit_topology(topology, points, args.samples, args.seed)
    header = {"A": fit.a, "alpha": fit.alpha, "residual": fit.residual, "N": fit.n_nodes}
    rows = [{"n": n, "measured_d": d, "fitted_d": fit.predict(n)} for n, d in fit.samples]
    _emit(to_csv(rows, ["n", "measured_d", "fitted_d"], header, "d in hops; residual is RMS in log space"), args.out)


def cmd_alloc(args) -> None:
    scenario = _load(args)
    rows = alloc_rows(scenario)
    columns = ["service", "kind", "popularity", "unclamped", "optimal", "rounded", "oracle"]
    _emit(to_csv(rows, columns, scenario.parameter_block(), "copies; popularity in requests per period"), args.out)


def cmd_fig2(args) -> None:
    scenario = _load(args)
    fit = scenario.hop_law_fit(scenario.build_topology())
    rows = experiment_fig2(scenario, timing=args.timing, fit=fit)
    _emit(rows_to_csv(rows, scenario, fit), args.out)
    plot = _plot_path(args)
    if plot:
        from sdncc.plotting import render_fig2

        render_fig2(rows, plot)
        log.info("wrote %s", plot)


def cmd_fig3(args) -> None:
    scenario = _load(args)
    fit = scenario.hop_law_fit(scenario.build_topology())
    rows = experiment_fig3(scenario, fit)
    header = {**scenario.parameter_block(), "hop_law_a": fit.a, "hop_law_alpha": fit.alpha, "N": fit.n_nodes}
    _emit(to_csv(rows, FIG3_FIELDS, header, "copies; popularity in requests per period"), args.out)
    plot = _plot_path(args)
    if plot:
        from sdncc.plotting import render_fig3

        render_fig3(rows, plot)
        log.info("wrote %s", plot)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sdncc", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v progress, -vv solver diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_cmd(name: str, func, help_: str, search: bool = False, plot: bool = False):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="scenario JSON file")
        p.add_argument("--out", help="CSV output path (default: stdout)")
        p.add_argument("--seed", type=int, help="override the scenario seed")
        if search:
            p.add_argument("--method", choices=METHODS)
            p.add_argument("--budget", type=int, help="maximum number of exhaustive-search candidates")
            p.add_argument("--timing", action="store_true", help="add a runtime_ms column (breaks byte-identical reruns)")
        if plot:
            p.add_argument("--plot", help="figure path (default: next to --out with .png)")
            p.add_argument("--no-plot", action="store_true")
        p.set_defaults(func=func)
        return p

    scenario_cmd("solve", cmd_solve, "run the configured method and the baseline over the sweep", search=True)
    scenario_cmd("alloc", cmd_alloc, "closed-form and grid-search copy counts per service")
    scenario_cmd("fig2", cmd_fig2, "traffic vs number of caching/computing nodes", search=True, plot=True)
    scenario_cmd("fig3", cmd_fig3, "optimal copy counts vs popularity", plot=True)

    p = sub.add_parser("fit-hoplaw", help="fit d(n) = A (N/n)^alpha on a topology file")
    p.add_argument("--topology", required=True)
    p.add_argument("--out")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=100, help="random server sets per n when not enumerating")
    p.add_argument("--points", type=int, nargs="+", help="n values to measure (default: geometric up to N/2)")
    p.add_argument("--max-fraction", type=float, default=0.5)
    p.set_defaults(func=cmd_fit_hoplaw)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING if args.verbose == 0 else logging.INFO if args.verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (Infeasible, AllInfeasible) as exc:
        print(f"sdncc: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, SdnccError) as exc:
        print(f"sdncc: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


if __name__ == "__main__":
    sys.exit(main())
