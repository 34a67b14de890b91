"""Compile transpiled widgets into graph states, schedules, and Pauli frames.

Every non-Clifford rotation becomes a teleportation gadget: the wire's current
node is entangled to a fresh node (CZ then H on the fresh node), marked for
measurement in the rotation-angle basis, and the wire retargets to the fresh
node. Clifford gates act directly on current nodes (SWAP is pure relabeling).
The accumulated Clifford preparation is canonicalized to graph + local
Clifford form; conditional byproducts are commuted to end-of-preparation
Pauli frames; consumption sub-steps are greedy maximal antichains of the
frame-dependency order. Small widgets also carry an exact dense state so the
whole construction can be verified by simulation.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _sim
from .circuit import (
    CLIFFORD_1Q,
    CLIFFORD_2Q,
    T_LIKE,
    CircuitError,
    Gate,
    GateKind,
    TranspiledWidget,
    circuit_width,
)
from .stabilizer import PauliRows, graph_form, stabilizer_after

CACHE_ENV = "QRE_CACHE_DIR"
CACHE_FORMAT = 1

SIM_QUBIT_LIMIT = 12


class CompileError(ValueError):
    """Raised for widget-compilation and verification failures."""


@dataclass(frozen=True)
class Measurement:
    """Consumption measurement of one node.

    kind "T" and "Rz" measure in the X basis rotated by the stored angle
    (pi/4-magnitude angles are tagged "T"); kind "X" is a plain X-basis
    teleportation measurement.
    """

    node: int
    kind: str
    angle: float


@dataclass(frozen=True)
class PauliFrame:
    """Byproduct applied when the source node's outcome is 1: X on
    x_support, Z on z_support (overlap means both, i.e. Y up to phase)."""

    x_support: tuple[int, ...]
    z_support: tuple[int, ...]

    def touches(self) -> frozenset[int]:
        return frozenset(self.x_support) | frozenset(self.z_support)


@dataclass(eq=True)
class CompiledWidget:
    """Graph state plus consumption data for one widget (see module docstring)."""

    n_input: int
    n_nodes: int
    edges: tuple[tuple[int, int], ...]
    local_cliffords: tuple[tuple[str, ...], ...]
    input_nodes: tuple[int, ...]
    output_nodes: tuple[int, ...]
    prep_ops: tuple[tuple[str, tuple[int, ...]], ...]
    measurements: tuple[Measurement, ...]
    frames: dict[int, PauliFrame]
    consump_schedule: tuple[tuple[int, ...], ...]
    n_logical: int
    local_state: np.ndarray | None = field(compare=False, repr=False, default=None)

    @property
    def n_T(self) -> int:
        return sum(1 for m in self.measurements if m.kind == "T")

    @property
    def n_Rz(self) -> int:
        return sum(1 for m in self.measurements if m.kind == "Rz")

    @property
    def meas_schedule(self) -> dict[int, Measurement]:
        return {m.node: m for m in self.measurements}

    def degrees(self) -> list[int]:
        deg = [0] * self.n_nodes
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg


def _gadget_angle(g: Gate) -> float:
    if g.kind is GateKind.T:
        return math.pi / 4
    if g.kind is GateKind.Tdg:
        return -math.pi / 4
    assert g.angle is not None
    return g.angle


def compile_widget(
    w: TranspiledWidget,
    n_input: int | None = None,
    cache_dir: str | Path | None = None,
) -> CompiledWidget:
    """Compile one transpiled widget; results are cached by content hash when
    a cache directory is given (or set via the QRE_CACHE_DIR variable)."""
    width = circuit_width(w.gates)
    n = max(width, 1) if n_input is None else n_input
    if width > n:
        raise CompileError(f"widget touches {width} wires but n_input={n}")

    directory = cache_dir if cache_dir is not None else os.environ.get(CACHE_ENV)
    key = _cache_key(w, n)
    if directory:
        cached = load_cached(directory, key)
        if cached is not None:
            return cached

    compiled = _compile(w, n)
    if directory:
        save_cached(directory, key, compiled)
    return compiled


def _compile(w: TranspiledWidget, n: int) -> CompiledWidget:
    cur = list(range(n))
    next_node = n
    ops: list[tuple[str, tuple[int, ...]]] = []
    measurements: list[Measurement] = []
    gadgets: list[tuple[int, int, int]] = []  # (measured node, fresh node, op index)

    for g in w.gates:
        if g.kind is GateKind.SWAP:
            a, b = g.qubits
            cur[a], cur[b] = cur[b], cur[a]
        elif g.kind in CLIFFORD_1Q or g.kind in CLIFFORD_2Q:
            ops.append((g.kind.value, tuple(cur[q] for q in g.qubits)))
        elif g.kind in T_LIKE or g.kind is GateKind.Rz:
            theta = _gadget_angle(g)
            q = g.qubits[0]
            a, f = cur[q], next_node
            next_node += 1
            ops.append(("cz", (a, f)))
            ops.append(("h", (f,)))
            measurements.append(
                Measurement(a, "T" if g.kind in T_LIKE else "Rz", theta))
            gadgets.append((a, f, len(ops)))
            cur[q] = f
        else:
            raise CompileError(f"composite gate {g} in transpiled widget")

    n_nodes = next_node
    if len(measurements) != w.n_T_init + w.n_Rz_init:
        raise CompileError("gadget count disagrees with transpiled gate counts")

    frames: dict[int, PauliFrame] = {}
    for a, f, k in gadgets:
        p = PauliRows.single_z(f, n_nodes)
        p.apply_ops(ops[k:])
        frames[a] = PauliFrame(
            x_support=tuple(np.nonzero(p.x[0])[0].tolist()),
            z_support=tuple(np.nonzero(p.z[0])[0].tolist()),
        )

    gf = graph_form(stabilizer_after(ops, n_nodes))
    edges = tuple(gf.edges())
    schedule = _layer_consumption(measurements, frames)
    n_logical = _max_live_nodes(n, n_nodes, edges, schedule)

    local_state = None
    if n_nodes <= SIM_QUBIT_LIMIT:
        state = _sim.plus_state(n_nodes)
        for name, qubits in ops:
            state = _sim.apply_matrix(state, _OP_MATS[name], qubits)
        local_state = state

    return CompiledWidget(
        n_input=n,
        n_nodes=n_nodes,
        edges=edges,
        local_cliffords=gf.applied,
        input_nodes=tuple(range(n)),
        output_nodes=tuple(cur),
        prep_ops=tuple(ops),
        measurements=tuple(measurements),
        frames=frames,
        consump_schedule=schedule,
        n_logical=n_logical,
        local_state=local_state,
    )


def _layer_consumption(
    measurements: Sequence[Measurement], frames: Mapping[int, PauliFrame]
) -> tuple[tuple[int, ...], ...]:
    """Greedy maximal antichains of 'b before a if b's frame touches a'."""
    measured = {m.node for m in measurements}
    preds: dict[int, set[int]] = {v: set() for v in measured}
    for b, frame in frames.items():
        for v in frame.touches():
            if v in measured:
                preds[v].add(b)
    remaining = set(measured)
    done: set[int] = set()
    layers: list[tuple[int, ...]] = []
    while remaining:
        layer = sorted(v for v in remaining if preds[v] <= done)
        if not layer:
            raise CompileError("cyclic measurement dependencies")
        layers.append(tuple(layer))
        done.update(layer)
        remaining.difference_update(layer)
    return tuple(layers)


def _max_live_nodes(
    n_input: int,
    n_nodes: int,
    edges: Iterable[tuple[int, int]],
    schedule: Sequence[Sequence[int]],
) -> int:
    """Maximum concurrent nodes under just-in-time creation: a node exists
    from the first sub-step that measures it or a neighbor (inputs from the
    start) until its own measurement, outputs until the end."""
    horizon = len(schedule) + 1
    meas_time = {v: t + 1 for t, layer in enumerate(schedule) for v in layer}
    nbrs: dict[int, list[int]] = {v: [] for v in range(n_nodes)}
    for u, v in edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    create = {}
    for v in range(n_nodes):
        if v < n_input:
            create[v] = 0
        else:
            times = [meas_time.get(u, horizon) for u in (v, *nbrs[v])]
            create[v] = min(times)
    peak = 0
    for t in range(1, horizon + 1):
        live = sum(1 for v in range(n_nodes)
                   if create[v] <= t <= meas_time.get(v, horizon))
        peak = max(peak, live)
    return peak


# --------------------------------------------------------------------------
# Stitching
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class StitchedEstimationSet:
    """Sequence-level counts: totals use multiplicities without expansion."""

    n_input: int
    n_widgets: int
    n_T_init: int
    n_Rz_init: int
    n_logical_max: int
    n_nodes_total: int
    per_widget: tuple[tuple[CompiledWidget, int], ...]


def stitch(items: Sequence[tuple[CompiledWidget, int]]) -> StitchedEstimationSet:
    """Combine compiled widgets (with multiplicities) into sequence totals.

    The stitched node count adds one output-teleportation relay per wire per
    internal boundary: sum(N_i) + (n_widgets - 1) * n_input.
    """
    if not items:
        raise CompileError("empty widget sequence")
    n = items[0][0].n_input
    if any(w.n_input != n for w, _ in items):
        raise CompileError("stitched widgets must share n_input")
    if any(mult < 1 for _, mult in items):
        raise CompileError("multiplicities must be >= 1")
    n_widgets = sum(mult for _, mult in items)
    return StitchedEstimationSet(
        n_input=n,
        n_widgets=n_widgets,
        n_T_init=sum(mult * w.n_T for w, mult in items),
        n_Rz_init=sum(mult * w.n_Rz for w, mult in items),
        n_logical_max=max(w.n_logical for w, _ in items),
        n_nodes_total=sum(mult * w.n_nodes for w, mult in items)
        + (n_widgets - 1) * n,
        per_widget=tuple(items),
    )


# --------------------------------------------------------------------------
# Simulation-backed verification
# --------------------------------------------------------------------------

_OP_MATS = {
    "h": _sim.H_MAT, "s": _sim.S_MAT, "sdg": _sim.SDG_MAT, "x": _sim.X_MAT,
    "y": _sim.Y_MAT, "z": _sim.Z_MAT, "cx": _sim.CX_MAT, "cz": _sim.CZ_MAT,
    "swap": _sim.SWAP_MAT,
}


class _Register:
    """Dense register addressed by node labels (axes tracked under removal)."""

    def __init__(self) -> None:
        self.state = np.ones((), dtype=complex)
        self.axes: dict[object, int] = {}

    @property
    def size(self) -> int:
        return self.state.ndim

    def add(self, label: object, vec: np.ndarray) -> None:
        self.state = np.multiply.outer(self.state, vec.astype(complex))
        self.axes[label] = self.state.ndim - 1

    def apply(self, mat: np.ndarray, labels: Sequence[object]) -> None:
        self.state = _sim.apply_matrix(
            self.state, mat, tuple(self.axes[l] for l in labels))

    def measure(self, label: object, vecs: Sequence[np.ndarray],
                rng: np.random.Generator) -> int:
        axis = self.axes.pop(label)
        reduced0, p0 = _sim.project_qubit(self.state, axis, vecs[0])
        outcome = 0 if rng.random() < p0 else 1
        if outcome == 0:
            self.state = reduced0 / math.sqrt(max(p0, 1e-300))
        else:
            reduced1, p1 = _sim.project_qubit(self.state, axis, vecs[1])
            self.state = reduced1 / math.sqrt(max(p1, 1e-300))
        for other, ax in self.axes.items():
            if ax > axis:
                self.axes[other] = ax - 1
        return outcome

    def ordered(self, labels: Sequence[object]) -> np.ndarray:
        perm = [self.axes[l] for l in labels]
        return np.transpose(self.state, perm)


def _meas_vectors(angle: float) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal pair for an angle-rotated X measurement (angle 0 is X)."""
    a = np.array([np.exp(0.5j * angle), np.exp(-0.5j * angle)]) / math.sqrt(2)
    b = np.array([np.exp(0.5j * angle), -np.exp(-0.5j * angle)]) / math.sqrt(2)
    return a, b


_PLUS = np.array([1, 1], dtype=complex) / math.sqrt(2)
_ZERO = np.array([1, 0], dtype=complex)
_X_VECS = _meas_vectors(0.0)


def verify_unitarity(
    widgets: Sequence[CompiledWidget],
    inverse_gates: Sequence[Gate],
    *,
    seed: int | None = None,
    qubit_limit: int = SIM_QUBIT_LIMIT,
) -> float:
    """Execute the widget sequence by exact simulation on |0...0> with random
    measurement outcomes and eager frame corrections, apply the inverse gate
    list, and return the overlap-squared with |0...0>."""
    if not widgets:
        raise CompileError("empty widget sequence")
    n = widgets[0].n_input
    if any(w.n_input != n for w in widgets):
        raise CompileError("widgets must share n_input")
    peak = max(w.n_nodes for w in widgets)
    if len(widgets) > 1:
        peak = max(peak, n + 2)
    if peak > qubit_limit:
        raise CompileError(
            f"verification needs {peak} simulated qubits, limit is {qubit_limit}")

    rng = np.random.default_rng(seed)
    reg = _Register()
    carriers: list[object] = []

    for i, w in enumerate(widgets):
        if i == 0:
            for q in range(n):
                reg.add((0, q), _ZERO)
            carriers = [(0, q) for q in range(n)]
        else:
            for q in range(n):
                relay = ("relay", i, q)
                target = (i, q)
                reg.add(relay, _PLUS)
                reg.apply(_sim.CZ_MAT, (carriers[q], relay))
                s1 = reg.measure(carriers[q], _X_VECS, rng)
                reg.add(target, _PLUS)
                reg.apply(_sim.CZ_MAT, (relay, target))
                s2 = reg.measure(relay, _X_VECS, rng)
                if s2:
                    reg.apply(_sim.X_MAT, (target,))
                if s1:
                    reg.apply(_sim.Z_MAT, (target,))
                carriers[q] = target
        for v in range(n, w.n_nodes):
            reg.add((i, v), _PLUS)
        for name, qubits in w.prep_ops:
            reg.apply(_OP_MATS[name], [(i, v) for v in qubits])
        meas = w.meas_schedule
        for layer in w.consump_schedule:
            for node in layer:
                spec = meas[node]
                outcome = reg.measure((i, node), _meas_vectors(spec.angle), rng)
                if outcome:
                    frame = w.frames[node]
                    for v in frame.x_support:
                        reg.apply(_sim.X_MAT, [(i, v)])
                    for v in frame.z_support:
                        reg.apply(_sim.Z_MAT, [(i, v)])
        carriers = [(i, w.output_nodes[q]) for q in range(n)]

    state = reg.ordered(carriers)
    for g in inverse_gates:
        state = _sim.apply_matrix(state, _inverse_mat(g), g.qubits)
    amp = state[(0,) * n]
    return float(abs(amp) ** 2)


def _inverse_mat(g: Gate) -> np.ndarray:
    if g.kind is GateKind.Rz:
        return _sim.rz_mat(g.angle)
    if g.kind is GateKind.CPhase:
        return _sim.cphase_mat(g.angle)
    table = {GateKind.T: _sim.T_MAT, GateKind.Tdg: _sim.TDG_MAT,
             GateKind.CCX: _sim.CCX_MAT}
    return table.get(g.kind, _OP_MATS.get(g.kind.value))


# --------------------------------------------------------------------------
# Disk cache
# --------------------------------------------------------------------------

def _cache_key(w: TranspiledWidget, n_input: int) -> str:
    parts = [f"v{CACHE_FORMAT}", f"n{n_input}"]
    parts.extend(repr(g) for g in w.gates)
    return hashlib.sha256("|".join(parts).encode()).hexdigest()[:32]


def _to_dict(cw: CompiledWidget, key: str) -> dict:
    return {
        "format": CACHE_FORMAT,
        "key": key,
        "n_input": cw.n_input,
        "n_nodes": cw.n_nodes,
        "edges": [list(e) for e in cw.edges],
        "local_cliffords": [list(l) for l in cw.local_cliffords],
        "input_nodes": list(cw.input_nodes),
        "output_nodes": list(cw.output_nodes),
        "prep_ops": [[name, list(qs)] for name, qs in cw.prep_ops],
        "measurements": [[m.node, m.kind, m.angle] for m in cw.measurements],
        "frames": {str(a): {"x": list(f.x_support), "z": list(f.z_support)}
                   for a, f in cw.frames.items()},
        "consump_schedule": [list(layer) for layer in cw.consump_schedule],
        "n_logical": cw.n_logical,
    }


def _from_dict(payload: dict) -> CompiledWidget:
    prep_ops = tuple((name, tuple(qs)) for name, qs in payload["prep_ops"])
    n_nodes = payload["n_nodes"]
    local_state = None
    if n_nodes <= SIM_QUBIT_LIMIT:
        state = _sim.plus_state(n_nodes)
        for name, qubits in prep_ops:
            state = _sim.apply_matrix(state, _OP_MATS[name], qubits)
        local_state = state
    return CompiledWidget(
        n_input=payload["n_input"],
        n_nodes=n_nodes,
        edges=tuple((u, v) for u, v in payload["edges"]),
        local_cliffords=tuple(tuple(l) for l in payload["local_cliffords"]),
        input_nodes=tuple(payload["input_nodes"]),
        output_nodes=tuple(payload["output_nodes"]),
        prep_ops=prep_ops,
        measurements=tuple(Measurement(node, kind, angle)
                           for node, kind, angle in payload["measurements"]),
        frames={int(a): PauliFrame(tuple(f["x"]), tuple(f["z"]))
                for a, f in payload["frames"].items()},
        consump_schedule=tuple(tuple(layer)
                               for layer in payload["consump_schedule"]),
        n_logical=payload["n_logical"],
        local_state=local_state,
    )


def save_cached(directory: str | Path, key: str, cw: CompiledWidget) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"widget-{key}.json"
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(_to_dict(cw, key)))
    os.replace(tmp, path)
    return path


def load_cached(directory: str | Path, key: str) -> CompiledWidget | None:
    path = Path(directory) / f"widget-{key}.json"
    if not path.exists():
        return None
    try:
        payload = json.loads(path.read_text())
        if payload.get("format") != CACHE_FORMAT or payload.get("key") != key:
            return None
        return _from_dict(payload)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError):
        return None
