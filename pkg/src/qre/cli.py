"""Command-line interface.

Subcommands cover the pipeline stages individually (widgetize, compile,
verify) and end to end (estimate, sweep), plus the scaling-law fitter and a
QFT circuit generator for quick experiments.

Exit codes: 0 success, 2 invalid input or configuration, 3 estimation
infeasible under the given constraints, 4 file I/O failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .architecture import EstimationError
from .circuit import CircuitError, emit_qasm, generate_qft, transpile
from .compiler import CompileError, compile_widget
from .config import ConfigError, load_config
from .pipeline import (
    compile_plan,
    load_circuit,
    render_sweep_csv,
    run_decoder_sweep,
    run_estimate,
    run_pipe_sweep,
    verify_circuit,
)
from .report import render_console, render_csv
from .scalefit import FitError, fit_scaling_law, read_samples_csv

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4

VERIFY_TOLERANCE = 1e-9


def _cmd_estimate(args: argparse.Namespace) -> int:
    result = run_estimate(args.circuit, args.config, args.out_dir,
                          args.cache_dir)
    print(render_console(result.report))
    if args.csv:
        Path(args.csv).write_text(render_csv(result.report))
    return EXIT_OK


def _cmd_widgetize(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    plan = load_circuit(args.circuit, config).plan
    print(f"n_input: {plan.n_input}")
    print(f"widgets: {plan.n_widgets} ({plan.n_distinct_widgets} distinct)")
    for wid in plan.widgets:
        print(f"  {wid}: x{plan.multiplicity[wid]}, "
              f"{len(plan.widgets[wid])} gates")
    print(f"stitches: {sum(plan.stitches.values())}")
    for (a, b), count in sorted(plan.stitches.items()):
        print(f"  {a} -> {b}: x{count}")
    return EXIT_OK


def _cmd_compile(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    plan = load_circuit(args.circuit, config).plan
    algo, n_clifford = compile_plan(plan, config, args.cache_dir)
    for wid in plan.widgets:
        cw = algo.compiled[wid]
        prep = algo.preps[wid]
        print(f"{wid}: {cw.n_nodes} nodes, {len(cw.edges)} edges, "
              f"{cw.n_T} T, {cw.n_Rz} Rz, "
              f"{len(cw.consump_schedule)} consumption steps, "
              f"{prep.n_sub_steps} preparation sub-steps")
    est = algo.est
    print(f"sequence: {est.n_widgets} widgets, {est.n_nodes_total} nodes, "
          f"max {est.n_logical_max} logical, {n_clifford} Clifford gates")
    return EXIT_OK


def _cmd_verify(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    loaded = load_circuit(args.circuit, config)
    worst = min(verify_circuit(loaded, seed=args.seed + i,
                               cache_dir=args.cache_dir)
                for i in range(args.trials))
    print(f"fidelity: {worst!r} over {args.trials} trial(s)")
    if worst < 1.0 - VERIFY_TOLERANCE:
        print("verification FAILED", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def _cmd_fit_scaling(args: argparse.Namespace) -> int:
    fit = fit_scaling_law(read_samples_csv(args.samples))
    print(f"kappa: {fit.kappa!r}")
    print(f"p_thresh: {fit.p_thresh!r}")
    print(f"residual: {fit.residual!r}")
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    plan = load_circuit(args.circuit, config).plan
    algo, _ = compile_plan(plan, config, args.cache_dir)
    if args.kind == "pipes":
        values = [int(v) for v in args.values.split(",")]
        rows = run_pipe_sweep(algo, config, values)
        text = render_sweep_csv(rows, "n_inter_pipes")
    else:
        presets = args.presets.split(",")
        rows = run_decoder_sweep(algo, config, presets)
        text = render_sweep_csv(rows, "preset")
    if args.csv:
        Path(args.csv).write_text(text)
    else:
        print(text, end="")
    return EXIT_OK


def _cmd_gen_qft(args: argparse.Namespace) -> int:
    text = emit_qasm(generate_qft(args.n), args.n)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text, end="")
    return EXIT_OK


def _cmd_transpile(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    plan = load_circuit(args.circuit, config).plan
    for wid, gates in plan.widgets.items():
        tw = transpile(gates)
        print(f"{wid}: {tw.n_T_init} T, {tw.n_Rz_init} Rz, "
              f"{tw.n_Clifford_init} Clifford")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qre",
        description="Resource estimator for modular surface-code machines.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        return p

    p = add("estimate", _cmd_estimate,
            "full resource estimate for a circuit")
    p.add_argument("circuit", help="circuit file (.qasm or .json)")
    p.add_argument("--config", help="YAML configuration file")
    p.add_argument("--out-dir", help="directory for report.csv")
    p.add_argument("--csv", help="also write the report CSV to this path")
    p.add_argument("--cache-dir", help="compiled-widget cache directory")

    p = add("widgetize", _cmd_widgetize,
            "show the widget decomposition of a circuit")
    p.add_argument("circuit")
    p.add_argument("--config")

    p = add("compile", _cmd_compile,
            "compile each distinct widget to a graph state")
    p.add_argument("circuit")
    p.add_argument("--config")
    p.add_argument("--cache-dir")

    p = add("verify", _cmd_verify,
            "check compiled widgets against the circuit by simulation")
    p.add_argument("circuit")
    p.add_argument("--config")
    p.add_argument("--cache-dir")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1)

    p = add("transpile", _cmd_transpile,
            "show per-widget transpiled gate counts")
    p.add_argument("circuit")
    p.add_argument("--config")

    p = add("fit-scaling", _cmd_fit_scaling,
            "fit the logical-error scaling law to sampled rates")
    p.add_argument("samples", help="CSV of p,d,ler[,weight] rows")

    p = add("sweep", _cmd_sweep, "sweep interconnect pipes or decoder preset")
    p.add_argument("kind", choices=["pipes", "decoder"])
    p.add_argument("circuit")
    p.add_argument("--config")
    p.add_argument("--cache-dir")
    p.add_argument("--values", default="1,2,4,8,16,32",
                   help="comma-separated pipe counts (pipes sweep)")
    p.add_argument("--presets", default="mwpm-circuit,astra-gnn",
                   help="comma-separated scaling presets (decoder sweep)")
    p.add_argument("--csv", help="write the sweep table to this path")

    p = add("gen-qft", _cmd_gen_qft,
            "generate a quantum Fourier transform circuit")
    p.add_argument("n", type=int, help="number of qubits")
    p.add_argument("--out", help="output path (default: stdout)")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EstimationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, CircuitError, CompileError, FitError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
