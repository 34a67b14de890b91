"""Split nested circuits into widgets via a subcircuit dependency graph.

Blocks are expanded depth-first; a node that violates the split criterion is
decomposed (one child per operation) if it invokes other blocks, or sliced
into contiguous moment groups if it is a flat gate list. Repeat counts stay
symbolic throughout, so widget/stitch multiplicities for circuits with
billions of expanded gates are exact Python integers computed without ever
materializing the leaf sequence. Nodes with equal equivalence keys (canonical
gate-list hash modulo first-use qubit relabeling) are built once and shared.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping, Sequence, Union

from .circuit import (
    ARITY,
    ANGLED,
    CircuitError,
    Gate,
    GateKind,
    WidgetizedCircuit,
    _eval_angle,
    circuit_width,
)

NESTED_FORMAT = 1


@dataclass(frozen=True)
class BlockRef:
    """An invocation of a named block, repeated `repeat` times."""

    name: str
    repeat: int = 1

    def __post_init__(self) -> None:
        if self.repeat < 1:
            raise CircuitError(f"repeat must be >= 1 in block ref {self.name!r}")


BodyItem = Union[Gate, BlockRef]


@dataclass
class NestedCircuit:
    """Named blocks of gates and block invocations, plus a root block."""

    n_input: int
    blocks: dict[str, list[BodyItem]]
    root: str

    def __post_init__(self) -> None:
        if self.root not in self.blocks:
            raise CircuitError(f"root block {self.root!r} is not defined")
        self._check_acyclic()
        width = 0
        for name, body in self.blocks.items():
            for item in body:
                if isinstance(item, BlockRef) and item.name not in self.blocks:
                    raise CircuitError(f"block {name!r} references undefined {item.name!r}")
                if isinstance(item, Gate):
                    width = max(width, max(item.qubits) + 1)
        if width > self.n_input:
            raise CircuitError(f"gates touch qubit {width - 1}, beyond n_input={self.n_input}")

    def _check_acyclic(self) -> None:
        state: dict[str, int] = {}  # 1 = on stack, 2 = done

        def visit(name: str) -> None:
            if state.get(name) == 2:
                return
            if state.get(name) == 1:
                raise CircuitError(f"cyclic block reference through {name!r}")
            state[name] = 1
            for item in self.blocks[name]:
                if isinstance(item, BlockRef) and item.name in self.blocks:
                    visit(item.name)
            state[name] = 2

        for name in self.blocks:
            visit(name)


@dataclass(frozen=True)
class SplitCriterion:
    """Thresholds deciding when a subcircuit must be split further.

    A node is split when active_qubits >= max_active_qubits or its fully
    expanded gate count >= max_gates. Flat gate lists are sliced into groups
    of `slice_moments` moments.
    """

    max_active_qubits: int
    max_gates: int
    slice_moments: int = 1

    def __post_init__(self) -> None:
        if min(self.max_active_qubits, self.max_gates, self.slice_moments) < 1:
            raise CircuitError("split-criterion thresholds must all be >= 1")

    def violated_by(self, active_qubits: int, n_gates: int) -> bool:
        return active_qubits >= self.max_active_qubits or n_gates >= self.max_gates


@dataclass
class SubcircuitNode:
    """One node of the dependency graph: a leaf gate list or a composite.

    ``children`` holds ordered (node, repeat) edges in execution order and is
    empty exactly when ``gates`` is set. Equal equivalence keys mean the nodes
    are interchangeable for resource purposes, and such nodes are shared.
    """

    id: str
    label: str
    active_qubits: int
    n_gates: int  # fully expanded count (symbolic, exact)
    equivalence_key: str
    gates: tuple[Gate, ...] | None = None
    children: list[tuple["SubcircuitNode", int]] = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return self.gates is not None


def assign_moments(gates: Sequence[Gate]) -> list[int]:
    """Greedy left-packed moment index per gate (a gate joins the earliest
    moment in which all its qubits are free)."""
    free_at: dict[int, int] = {}
    moments = []
    for g in gates:
        m = max((free_at.get(q, 0) for q in g.qubits), default=0)
        moments.append(m)
        for q in g.qubits:
            free_at[q] = m + 1
    return moments


def _canonical_leaf_key(gates: Sequence[Gate]) -> str:
    """Hash of the gate list with qubits relabeled by first use."""
    relabel: dict[int, int] = {}
    parts = []
    for g in gates:
        for q in g.qubits:
            if q not in relabel:
                relabel[q] = len(relabel)
        qs = ",".join(str(relabel[q]) for q in g.qubits)
        angle = "" if g.angle is None else repr(g.angle)
        parts.append(f"{g.kind.value}({angle})[{qs}]")
    digest = hashlib.sha256(";".join(parts).encode()).hexdigest()[:24]
    return f"L:{digest}"


def _composite_key(children: Sequence[tuple[SubcircuitNode, int]]) -> str:
    parts = [f"{child.equivalence_key}x{rep}" for child, rep in children]
    digest = hashlib.sha256(";".join(parts).encode()).hexdigest()[:24]
    return f"C:{digest}"


class _Builder:
    def __init__(self, circ: NestedCircuit, criterion: SplitCriterion):
        self.circ = circ
        self.criterion = criterion
        self.by_key: dict[str, SubcircuitNode] = {}
        self.block_nodes: dict[str, SubcircuitNode] = {}
        self.counter = 0
        self._stats_memo: dict[str, tuple[frozenset[int], int]] = {}

    def _next_id(self) -> str:
        nid = f"n{self.counter}"
        self.counter += 1
        return nid

    def _intern(self, node: SubcircuitNode) -> SubcircuitNode:
        existing = self.by_key.get(node.equivalence_key)
        if existing is not None:
            self.counter -= 1  # id was never exposed
            return existing
        self.by_key[node.equivalence_key] = node
        return node

    # -- expansion statistics (never materializes repeats) ------------------

    def block_stats(self, name: str) -> tuple[frozenset[int], int]:
        """(active qubit set, fully expanded gate count) of one repetition."""
        if name in self._stats_memo:
            return self._stats_memo[name]
        qubits: set[int] = set()
        count = 0
        for item in self.circ.blocks[name]:
            if isinstance(item, Gate):
                qubits.update(item.qubits)
                count += 1
            else:
                sub_q, sub_n = self.block_stats(item.name)
                qubits.update(sub_q)
                count += item.repeat * sub_n
        stats = (frozenset(qubits), count)
        self._stats_memo[name] = stats
        return stats

    def flatten(self, name: str) -> list[Gate]:
        """Fully expand a block known to satisfy the criterion."""
        out: list[Gate] = []
        for item in self.circ.blocks[name]:
            if isinstance(item, Gate):
                out.append(item)
            else:
                body = self.flatten(item.name)
                out.extend(body * item.repeat)
        return out

    # -- node construction ---------------------------------------------------

    def build_block(self, name: str) -> SubcircuitNode:
        if name in self.block_nodes:
            return self.block_nodes[name]
        qubit_set, n_gates = self.block_stats(name)
        body = self.circ.blocks[name]
        has_refs = any(isinstance(item, BlockRef) for item in body)

        if not self.criterion.violated_by(len(qubit_set), n_gates):
            node = self.build_leaf(self.flatten(name), label=name)
        elif has_refs:
            children: list[tuple[SubcircuitNode, int]] = []
            for k, item in enumerate(body):
                if isinstance(item, Gate):
                    children.append((self.build_leaf([item], label=f"{name}.{k}"), 1))
                else:
                    children.append((self.build_block(item.name), item.repeat))
            node = SubcircuitNode(
                id=self._next_id(), label=name, active_qubits=len(qubit_set),
                n_gates=n_gates, equivalence_key=_composite_key(children),
                children=children,
            )
            node = self._intern(node)
        else:
            node = self.build_gate_list(list(body), label=name)  # type: ignore[arg-type]
        self.block_nodes[name] = node
        return node

    def build_gate_list(self, gates: list[Gate], label: str) -> SubcircuitNode:
        active = len({q for g in gates for q in g.qubits})
        if not self.criterion.violated_by(active, len(gates)):
            return self.build_leaf(gates, label)

        moments = assign_moments(gates)
        n_moments = moments[-1] + 1 if moments else 0
        slice_size = self.criterion.slice_moments
        if n_moments <= slice_size:
            slice_size = 1  # same-size slice would not shrink; fall back
        if n_moments <= 1:
            if len(gates) == 1:
                raise CircuitError(
                    f"subcircuit {label!r} is a single gate on {active} qubits and "
                    f"still violates the split criterion; cannot split further"
                )
            # One moment of parallel gates: decompose per gate.
            children = [(self.build_leaf([g], label=f"{label}.{k}"), 1)
                        for k, g in enumerate(gates)]
        else:
            children = []
            for k, start in enumerate(range(0, n_moments, slice_size)):
                sliced = [g for g, m in zip(gates, moments)
                          if start <= m < start + slice_size]
                children.append((self.build_gate_list(sliced, label=f"{label}[{k}]"), 1))
        node = SubcircuitNode(
            id=self._next_id(), label=label, active_qubits=active,
            n_gates=len(gates), equivalence_key=_composite_key(children),
            children=children,
        )
        return self._intern(node)

    def build_leaf(self, gates: Sequence[Gate], label: str) -> SubcircuitNode:
        gates = tuple(gates)
        node = SubcircuitNode(
            id=self._next_id(), label=label,
            active_qubits=len({q for g in gates for q in g.qubits}),
            n_gates=len(gates), equivalence_key=_canonical_leaf_key(gates),
            gates=gates,
        )
        return self._intern(node)


def build_dependency_graph(circ: NestedCircuit, criterion: SplitCriterion) -> SubcircuitNode:
    """Recursively split the circuit's root block until every leaf satisfies
    the criterion, sharing equivalent subtrees, and return the root node."""
    return _Builder(circ, criterion).build_block(circ.root)


# --------------------------------------------------------------------------
# Lazy enumeration
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class _Counts:
    first: str
    last: str
    widgets: Mapping[str, int]
    stitches: Mapping[tuple[str, str], int]


def _fold(node: SubcircuitNode, memo: dict[str, _Counts]) -> _Counts:
    cached = memo.get(node.id)
    if cached is not None:
        return cached
    if node.is_leaf:
        result = _Counts(node.id, node.id, {node.id: 1}, {})
    else:
        widgets: dict[str, int] = {}
        stitches: dict[tuple[str, str], int] = {}
        prev_last: str | None = None
        first: str | None = None
        for child, repeat in node.children:
            sub = _fold(child, memo)
            for wid, count in sub.widgets.items():
                widgets[wid] = widgets.get(wid, 0) + repeat * count
            for pair, count in sub.stitches.items():
                stitches[pair] = stitches.get(pair, 0) + repeat * count
            if repeat > 1:  # seam between consecutive repetitions
                seam = (sub.last, sub.first)
                stitches[seam] = stitches.get(seam, 0) + (repeat - 1)
            if prev_last is not None:
                pair = (prev_last, sub.first)
                stitches[pair] = stitches.get(pair, 0) + 1
            if first is None:
                first = sub.first
            prev_last = sub.last
        assert first is not None and prev_last is not None
        result = _Counts(first, prev_last, widgets, stitches)
    memo[node.id] = result
    return result


def _collect_leaves(node: SubcircuitNode) -> dict[str, SubcircuitNode]:
    leaves: dict[str, SubcircuitNode] = {}
    seen: set[str] = set()

    def walk(n: SubcircuitNode) -> None:
        if n.id in seen:
            return
        seen.add(n.id)
        if n.is_leaf:
            leaves[n.id] = n
        for child, _ in n.children:
            walk(child)

    walk(node)
    return leaves


def enumerate_widgets_and_stitches(
    root: SubcircuitNode,
) -> tuple[dict[str, tuple[tuple[Gate, ...], int]], dict[tuple[str, str], int]]:
    """Distinct-widget table {id: (gates, multiplicity)} and stitch multiset
    {(id, id): count} of the depth-first leaf sequence, computed lazily.

    Sum of multiplicities equals the expanded widget count; stitch counts sum
    to that minus one.
    """
    counts = _fold(root, {})
    leaves = _collect_leaves(root)
    table = {wid: (leaves[wid].gates, mult) for wid, mult in counts.widgets.items()}
    return table, dict(counts.stitches)


def iter_leaf_sequence(root: SubcircuitNode, limit: int = 1_000_000) -> Iterator[str]:
    """Materialized leaf-id sequence (testing/debug only; refuses huge runs)."""
    total = sum(_fold(root, {}).widgets.values())
    if total > limit:
        raise CircuitError(f"sequence of {total} widgets exceeds expansion limit {limit}")

    def walk(node: SubcircuitNode) -> Iterator[str]:
        if node.is_leaf:
            yield node.id
            return
        for child, repeat in node.children:
            for _ in range(repeat):
                yield from walk(child)

    return walk(root)


# --------------------------------------------------------------------------
# Plan handed to the estimator
# --------------------------------------------------------------------------

@dataclass
class WidgetPlan:
    """Everything downstream estimation needs from a widget decomposition:
    the distinct gate lists, their multiplicities, the ordered-pair stitch
    multiset, and the first/last widgets of the sequence."""

    n_input: int
    widgets: dict[str, tuple[Gate, ...]]
    multiplicity: dict[str, int]
    stitches: dict[tuple[str, str], int]
    first: str
    last: str

    @property
    def n_widgets(self) -> int:
        return sum(self.multiplicity.values())

    @property
    def n_distinct_widgets(self) -> int:
        return len(self.widgets)

    def __post_init__(self) -> None:
        if set(self.widgets) != set(self.multiplicity):
            raise CircuitError("widget table and multiplicity keys differ")
        if sum(self.stitches.values()) != self.n_widgets - 1:
            raise CircuitError("stitch counts must sum to n_widgets - 1")

    @classmethod
    def from_root(cls, root: SubcircuitNode, n_input: int) -> "WidgetPlan":
        counts = _fold(root, {})
        leaves = _collect_leaves(root)
        return cls(
            n_input=n_input,
            widgets={wid: leaves[wid].gates for wid in counts.widgets},
            multiplicity=dict(counts.widgets),
            stitches=dict(counts.stitches),
            first=counts.first,
            last=counts.last,
        )

    @classmethod
    def from_widgetized(cls, wc: WidgetizedCircuit) -> "WidgetPlan":
        multiplicity: dict[str, int] = {}
        for wid in wc.widgets:
            multiplicity[wid] = multiplicity.get(wid, 0) + 1
        return cls(
            n_input=wc.n_input,
            widgets={wid: tuple(gates) for wid, gates in wc.distinct_widgets.items()
                     if wid in multiplicity},
            multiplicity=multiplicity,
            stitches=dict(wc.stitches),
            first=wc.widgets[0],
            last=wc.widgets[-1],
        )


# --------------------------------------------------------------------------
# Nested-circuit JSON
# --------------------------------------------------------------------------

def _gate_from_json(obj: Mapping, where: str) -> Gate:
    name = obj["gate"]
    kind = next((k for k in GateKind if k.value == name), None)
    if kind is None:
        raise CircuitError(f"{where}: unsupported gate {name!r}")
    qubits = tuple(int(q) for q in obj.get("qubits", ()))
    angle = obj.get("angle")
    if isinstance(angle, str):
        angle = _eval_angle(angle, 0)
    if angle is not None:
        angle = float(angle)
    try:
        return Gate(kind, qubits, angle)
    except CircuitError as exc:
        raise CircuitError(f"{where}: {exc}") from exc


def parse_nested_file(path: str | Path) -> NestedCircuit:
    """Load nested-circuit JSON: {format, n_input?, root, blocks:{name: [items]}}
    where an item is {"gate", "qubits", "angle"?} or {"block", "repeat"?}."""
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise CircuitError(f"{path}: not valid JSON: {exc}") from exc
    if payload.get("format", NESTED_FORMAT) != NESTED_FORMAT:
        raise CircuitError(f"{path}: unsupported nested-circuit format")
    raw_blocks = payload.get("blocks")
    if not isinstance(raw_blocks, dict) or not raw_blocks:
        raise CircuitError(f"{path}: 'blocks' must be a non-empty object")

    blocks: dict[str, list[BodyItem]] = {}
    for name, body in raw_blocks.items():
        items: list[BodyItem] = []
        for k, obj in enumerate(body):
            where = f"{path}: block {name!r} item {k}"
            if "gate" in obj:
                items.append(_gate_from_json(obj, where))
            elif "block" in obj:
                items.append(BlockRef(str(obj["block"]), int(obj.get("repeat", 1))))
            else:
                raise CircuitError(f"{where}: need 'gate' or 'block'")
        blocks[name] = items

    root = payload.get("root")
    if root is None:
        root = next(iter(raw_blocks))
    width = max((circuit_width(
        [i for i in body if isinstance(i, Gate)]) for body in blocks.values()),
        default=0)
    n_input = int(payload.get("n_input", max(width, 1)))
    return NestedCircuit(n_input=n_input, blocks=blocks, root=str(root))
