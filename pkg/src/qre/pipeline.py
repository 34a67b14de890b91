"""End-to-end estimation runs: parse, widgetize, compile, solve, time, report.

This module strings the stages together for a single circuit source and owns
the run-level concerns the stages themselves do not: input-format dispatch
(flat QASM, widget-table JSON, nested-block JSON), the shared widget cache,
provenance hashing, and parameter sweeps executed across worker threads over
a read-only compiled algorithm.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

from . import __version__
from .circuit import (
    CircuitError,
    WidgetizedCircuit,
    invert_gates,
    parse_qasm,
    parse_widget_file,
    transpile,
)
from .compiler import compile_widget, verify_unitarity
from .config import ArchConfig, load_config
from .estimator import (
    CompiledAlgorithm,
    SelectionResult,
    TimingBreakdown,
    compute_timing,
    solve_distance_and_factory,
)
from .prepsched import schedule_preparation
from .report import ResourceReport, assemble_report, render_csv
from .scalefit import SCALING_PRESETS
from .widgetizer import (
    SplitCriterion,
    WidgetPlan,
    build_dependency_graph,
    iter_leaf_sequence,
    parse_nested_file,
)

__all__ = [
    "LoadedCircuit",
    "EstimateResult",
    "SweepRow",
    "load_circuit",
    "compile_plan",
    "run_estimate",
    "run_pipe_sweep",
    "run_decoder_sweep",
    "render_sweep_csv",
    "verify_circuit",
]

SEQUENCE_LIMIT = 100_000  # widget sequences longer than this stay symbolic


@dataclass(frozen=True)
class LoadedCircuit:
    """A parsed circuit source: the estimation plan, the expanded widget
    sequence when it is small enough to materialize, and the raw bytes for
    provenance hashing."""

    plan: WidgetPlan
    sequence: tuple[str, ...] | None
    data: bytes


def _plan_from_text(text: str, config: ArchConfig, name: str) -> LoadedCircuit:
    data = text.encode()
    stripped = text.lstrip()
    if not stripped.startswith("{"):
        wc = WidgetizedCircuit.single(parse_qasm(text))
        return LoadedCircuit(WidgetPlan.from_widgetized(wc),
                             tuple(wc.widgets), data)
    # JSON: widget table vs nested blocks, decided by their required keys
    if '"distinct_widgets"' in stripped:
        return _from_widget_payload(name)
    nested = parse_nested_file(name)
    criterion = SplitCriterion(
        max_active_qubits=config.max_active_qubits,
        max_gates=config.max_gates,
        slice_moments=config.slice_moments,
    )
    root = build_dependency_graph(nested, criterion)
    plan = WidgetPlan.from_root(root, nested.n_input)
    sequence: tuple[str, ...] | None
    if plan.n_widgets <= SEQUENCE_LIMIT:
        sequence = tuple(iter_leaf_sequence(root, limit=SEQUENCE_LIMIT))
    else:
        sequence = None
    return LoadedCircuit(plan, sequence, data)


def _from_widget_payload(path: str) -> LoadedCircuit:
    wc = parse_widget_file(path)
    return LoadedCircuit(WidgetPlan.from_widgetized(wc), tuple(wc.widgets),
                         Path(path).read_bytes())


def load_circuit(path: str | Path, config: ArchConfig) -> LoadedCircuit:
    """Parse a circuit file, dispatching on its content: OpenQASM text
    becomes a single widget; JSON is either a widget table
    ({distinct_widgets, sequence}) or nested blocks ({blocks, root}), the
    latter widgetized under the configured split thresholds."""
    return _plan_from_text(Path(path).read_text(), config, str(path))


def compile_plan(
    plan: WidgetPlan,
    config: ArchConfig,
    cache_dir: str | Path | None = None,
) -> tuple[CompiledAlgorithm, int]:
    """Transpile, compile, and prep-schedule every distinct widget.

    Returns the compiled algorithm and the transpiled Clifford-gate total
    over the full sequence (the graph states do not retain it).
    """
    compiled = {}
    preps = {}
    n_clifford = 0
    for wid, gates in plan.widgets.items():
        tw = transpile(gates)
        cw = compile_widget(tw, n_input=plan.n_input, cache_dir=cache_dir)
        compiled[wid] = cw
        preps[wid] = schedule_preparation(cw.n_nodes, cw.edges,
                                          fan_out=config.fan_out)
        n_clifford += plan.multiplicity[wid] * tw.n_Clifford_init
    return CompiledAlgorithm(plan, compiled, preps), n_clifford


@dataclass(frozen=True)
class EstimateResult:
    """Everything one estimation run produced, report included."""

    report: ResourceReport
    config: ArchConfig
    algo: CompiledAlgorithm
    selection: SelectionResult
    timing: TimingBreakdown
    n_clifford_init: int


def _config_hash(config: ArchConfig) -> str:
    return hashlib.sha256(repr(config).encode()).hexdigest()[:16]


def _estimate(
    loaded: LoadedCircuit,
    config: ArchConfig,
    cache_dir: str | Path | None,
) -> EstimateResult:
    algo, n_clifford = compile_plan(loaded.plan, config, cache_dir)
    sel = solve_distance_and_factory(config, algo.est, algo.l_prep_total)
    timing = compute_timing(config, algo, sel)
    provenance = {
        "config_hash": _config_hash(config),
        "circuit_hash": hashlib.sha256(loaded.data).hexdigest()[:16],
        "tool_version": __version__,
    }
    report = assemble_report(config, algo, sel, timing, n_clifford,
                             provenance)
    return EstimateResult(report, config, algo, sel, timing, n_clifford)


def run_estimate(
    circuit_path: str | Path,
    config_path: str | Path | None = None,
    out_dir: str | Path | None = None,
    cache_dir: str | Path | None = None,
) -> EstimateResult:
    """Full run from files; writes report.csv under out_dir when given."""
    config = load_config(config_path)
    loaded = load_circuit(circuit_path, config)
    result = _estimate(loaded, config, cache_dir)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.csv").write_text(render_csv(result.report))
    return result


# --------------------------------------------------------------------------
# Sweeps
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    """One sweep point: the varied setting, the solved distance, the wall
    time per run, and that time divided by the first row's."""

    label: str
    d: int
    t_hardware: float
    normalized_runtime: float


def _normalize(labels: Sequence[str], solved: Sequence[tuple[int, float]],
               ) -> list[SweepRow]:
    base = solved[0][1]
    return [SweepRow(label, d, t, t / base)
            for label, (d, t) in zip(labels, solved)]


def run_pipe_sweep(
    algo: CompiledAlgorithm,
    config: ArchConfig,
    pipe_values: Sequence[int],
) -> list[SweepRow]:
    """Re-time the solved machine at each interconnect-pipe count.

    The distance/factory solution does not depend on the pipe count, so it
    is solved once; per-value timing runs on worker threads sharing the
    read-only compiled algorithm.
    """
    if not pipe_values:
        raise ValueError("pipe sweep needs at least one value")
    sel = solve_distance_and_factory(config, algo.est, algo.l_prep_total)

    def one(pipes: int) -> tuple[int, float]:
        timing = compute_timing(replace(config, n_inter_pipes=pipes),
                                algo, sel)
        return sel.d, timing.t_hardware_total

    with ThreadPoolExecutor(max_workers=min(8, len(pipe_values))) as pool:
        solved = list(pool.map(one, pipe_values))
    return _normalize([str(v) for v in pipe_values], solved)


def run_decoder_sweep(
    algo: CompiledAlgorithm,
    config: ArchConfig,
    presets: Sequence[str] = ("mwpm-circuit", "astra-gnn"),
) -> list[SweepRow]:
    """Re-solve and re-time the run under each decoder scaling preset."""
    unknown = [name for name in presets if name not in SCALING_PRESETS]
    if unknown:
        raise ValueError(f"unknown scaling presets: {unknown} "
                         f"(available: {sorted(SCALING_PRESETS)})")

    def one(name: str) -> tuple[int, float]:
        kappa, p_thresh = SCALING_PRESETS[name]
        cfg = replace(config, kappa=kappa, p_thresh=p_thresh)
        sel = solve_distance_and_factory(cfg, algo.est, algo.l_prep_total)
        timing = compute_timing(cfg, algo, sel)
        return sel.d, timing.t_hardware_total

    with ThreadPoolExecutor(max_workers=min(8, len(presets))) as pool:
        solved = list(pool.map(one, presets))
    return _normalize(list(presets), solved)


def render_sweep_csv(rows: Sequence[SweepRow], label_name: str) -> str:
    lines = [f"{label_name},code_distance,t_hardware,normalized_runtime"]
    for row in rows:
        lines.append(f"{row.label},{row.d},{row.t_hardware!r},"
                     f"{row.normalized_runtime!r}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Verification entry point
# --------------------------------------------------------------------------

def verify_circuit(
    loaded: LoadedCircuit,
    seed: int | None = None,
    cache_dir: str | Path | None = None,
) -> float:
    """Compile the circuit's widgets, execute the sequence by exact
    simulation, undo it with the inverted gate list, and return the overlap
    with the initial state (1.0 means the compilation is unitarily exact)."""
    if loaded.sequence is None:
        raise CircuitError("circuit too large to expand for verification")
    plan = loaded.plan
    compiled = {wid: compile_widget(transpile(gates), n_input=plan.n_input,
                                    cache_dir=cache_dir)
                for wid, gates in plan.widgets.items()}
    gates = [g for wid in loaded.sequence for g in plan.widgets[wid]]
    return verify_unitarity([compiled[wid] for wid in loaded.sequence],
                            invert_gates(gates), seed=seed)
