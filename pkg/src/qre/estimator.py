"""Code-distance / precision / factory selection and the timing model.

Selection works outside-in: factories are tried in table order; for each, the
synthesis precision and code distance are co-solved by a fixed point (the
precision budget per rotation must stay below the per-tock logical error
rate, but the synthesis length it implies feeds back into the space-time
volume that sets the distance).  A factory is accepted only when its output
error rate beats the logical cell it feeds (otherwise distillation would be
the weakest link), and the module layout is recomputed for every candidate
distance because the transfer-bus length and the concurrent T-state feed both
depend on d.

Timing follows the prepare-while-consuming pipeline across the two module
legs: total consumption time plus per-step distillation and preparation
delays, inter-leg handover teleports, and the decoding lag accumulated
whenever the classical decoder tock exceeds the quantum tock.  All sums are
multiplicity-weighted over the widget sequence so repeated widgets never
force an expanded walk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

from .architecture import (
    EstimationError,
    ModuleLayout,
    TFactory,
    choose_modules_per_leg,
)
from .compiler import CompiledWidget, StitchedEstimationSet, stitch
from .config import ArchConfig
from .prepsched import PrepSchedule, cross_module_ops
from .widgetizer import WidgetPlan

__all__ = [
    "CompiledAlgorithm",
    "SequentialCounts",
    "SelectionResult",
    "TimingBreakdown",
    "logical_error_per_cycle",
    "logical_error_per_tock",
    "gate_synthesis_length",
    "sequential_counts",
    "budget_rhs",
    "spacetime_lhs",
    "minimum_distance",
    "solve_distance_and_factory",
    "decoding_cores",
    "compute_timing",
]

D_CAP = 199          # largest code distance the solver will consider
EPS_ITER_CAP = 50    # fixed-point iteration budget for the precision solve


# --------------------------------------------------------------------------
# Error-rate and synthesis primitives
# --------------------------------------------------------------------------

def logical_error_per_cycle(p: float, d: int, kappa: float,
                            p_thresh: float) -> float:
    """Per-QEC-cycle logical error rate of a distance-d patch."""
    return kappa * (p / p_thresh) ** ((d + 1) / 2.0)


def logical_error_per_tock(p_c: float, d: int) -> float:
    """Failure probability of one d-cycle logical tock."""
    return 1.0 - (1.0 - p_c) ** d


def gate_synthesis_length(epsilon: float, c0: float = 0.57,
                          c1: float = 8.83) -> int:
    """Worst-case Clifford+T length approximating one rotation to diamond
    distance epsilon."""
    if epsilon <= 0:
        raise ValueError(f"synthesis precision must be positive: {epsilon}")
    return math.ceil(c0 * math.log2(1.0 / epsilon) + c1)


@dataclass(frozen=True)
class SequentialCounts:
    """Totals of T-basis work after rotations are synthesized."""

    n_tot_t: int
    n_seq_consump: int
    n_seq_distill: int


def sequential_counts(n_t_init: int, n_rz_init: int, l_eps: int,
                      n_prime_eff: int) -> SequentialCounts:
    """Sequential T-consumption and T-distillation step counts when n'
    states can be delivered concurrently."""
    if n_prime_eff < 1:
        raise ValueError("concurrent T-state feed must be >= 1")
    n_tot_t = n_rz_init * l_eps + n_t_init
    n_seq_consump = (-(-n_t_init // n_prime_eff)
                     + l_eps * -(-n_rz_init // n_prime_eff))
    n_seq_distill = -(-n_tot_t // n_prime_eff)
    return SequentialCounts(n_tot_t, n_seq_consump, n_seq_distill)


# --------------------------------------------------------------------------
# Compiled-sequence container
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CompiledAlgorithm:
    """A widget plan with each distinct widget compiled and prep-scheduled.

    Keys of `compiled` and `preps` are the plan's widget ids; sequence-level
    sums use the plan's multiplicities and stitch counts.
    """

    plan: WidgetPlan
    compiled: Mapping[str, CompiledWidget]
    preps: Mapping[str, PrepSchedule]

    def __post_init__(self) -> None:
        missing = set(self.plan.widgets) - set(self.compiled)
        if missing or set(self.plan.widgets) - set(self.preps):
            raise EstimationError(
                f"compiled/prep tables incomplete: missing {sorted(missing)}")

    @cached_property
    def est(self) -> StitchedEstimationSet:
        return stitch([(self.compiled[w], self.plan.multiplicity[w])
                       for w in self.plan.widgets])

    @cached_property
    def l_prep_total(self) -> int:
        """Total preparation sub-steps over the full (repeated) sequence."""
        return sum(self.plan.multiplicity[w] * self.preps[w].n_sub_steps
                   for w in self.plan.widgets)

    @property
    def l_prep_first(self) -> int:
        """Sub-steps to prepare the first graph (the unpipelined head)."""
        return self.preps[self.plan.first].n_sub_steps

    @cached_property
    def consump_steps_total(self) -> int:
        return sum(self.plan.multiplicity[w]
                   * len(self.compiled[w].consump_schedule)
                   for w in self.plan.widgets)


# --------------------------------------------------------------------------
# Distance / precision / factory selection
# --------------------------------------------------------------------------

def budget_rhs(p_algo_fail: float) -> float:
    """-J1 = -ln(1 - p_algo_fail): the positive failure-budget bound."""
    return -math.log1p(-p_algo_fail)


def spacetime_lhs(
    d: int,
    config: ArchConfig,
    n_logical: int,
    l_prep_total: int,
    n_per_leg: int,
    l_transfer_bus: int,
    counts: SequentialCounts,
    cycles: float,
) -> float:
    """Expected failure weight of the full space-time volume at distance d."""
    p_c = logical_error_per_cycle(config.p, d, config.kappa, config.p_thresh)
    prep_volume = 2.0 * n_logical * l_prep_total * d
    consump_volume = (2.0 * n_logical + n_per_leg * l_transfer_bus) * (
        counts.n_seq_consump * d + counts.n_seq_distill * cycles)
    return p_c * d * (prep_volume + consump_volume)


def minimum_distance(
    config: ArchConfig,
    n_logical: int,
    l_prep_total: int,
    n_per_leg: int,
    l_transfer_bus: int,
    counts: SequentialCounts,
    cycles: float,
    d_cap: int = D_CAP,
) -> int | None:
    """Smallest odd d meeting the failure budget for a fixed volume (no
    layout feedback); None when the cap is exhausted."""
    rhs = budget_rhs(config.p_algo_fail)
    for d in range(3, d_cap + 1, 2):
        if spacetime_lhs(d, config, n_logical, l_prep_total, n_per_leg,
                         l_transfer_bus, counts, cycles) < rhs:
            return d
    return None


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of the distance/precision/factory solve."""

    d: int
    epsilon: float | None      # None when the algorithm needs no synthesis
    l_eps: int
    factory: TFactory
    p_c: float
    p_logical: float
    j1: float                  # ln(1 - p_algo_fail), negative
    layout: ModuleLayout
    counts: SequentialCounts


def _solve_distance(
    config: ArchConfig,
    n_logical: int,
    l_prep_total: int,
    factory: TFactory,
    l_eps: int,
    n_t_init: int,
    n_rz_init: int,
) -> tuple[int, ModuleLayout, SequentialCounts] | None:
    """Smallest odd d <= D_CAP meeting the failure budget, with the module
    layout and sequential counts recomputed for every candidate distance."""
    rhs = budget_rhs(config.p_algo_fail)
    for d in range(3, D_CAP + 1, 2):
        try:
            layout = choose_modules_per_leg(
                config.n_phys_per_module, n_logical, d, factory)
        except EstimationError:
            continue  # nothing fits at this distance
        counts = sequential_counts(n_t_init, n_rz_init, l_eps,
                                   layout.n_prime_effective)
        lhs = spacetime_lhs(d, config, n_logical, l_prep_total,
                            layout.n_per_leg, layout.l_transfer_bus,
                            counts, factory.cycles)
        if lhs < rhs:
            return d, layout, counts
    return None


def solve_distance_and_factory(
    config: ArchConfig,
    est: StitchedEstimationSet,
    l_prep_total: int,
) -> SelectionResult:
    """Scan the factory table in listed order; for each candidate co-solve
    the synthesis precision and code distance, then keep the first factory
    whose distilled output error beats the logical cell it supplies."""
    needs_synthesis = est.n_Rz_init > 0

    last_failure = "factory table is empty"
    for factory in config.factories:
        solved = _solve_epsilon_fixed_point(
            config, est, l_prep_total, factory, needs_synthesis)
        if solved is None:
            last_failure = (
                f"no odd d <= {D_CAP} meets the failure budget "
                f"p_algo_fail={config.p_algo_fail} with factory {factory.name!r}")
            continue
        d, layout, counts, epsilon, l_eps = solved
        p_c = logical_error_per_cycle(config.p, d, config.kappa,
                                      config.p_thresh)
        p_logical = logical_error_per_tock(p_c, d)
        # With no T states consumed the factories idle, so any row serves;
        # otherwise the distilled output must beat the cell it feeds.
        if counts.n_tot_t > 0 and not factory.p_out < p_logical:
            last_failure = (
                f"factory {factory.name!r} output error {factory.p_out} is not "
                f"below the logical tock error {p_logical:.3e} at d={d}")
            continue
        return SelectionResult(
            d=d, epsilon=epsilon, l_eps=l_eps, factory=factory, p_c=p_c,
            p_logical=p_logical, j1=math.log1p(-config.p_algo_fail),
            layout=layout, counts=counts)
    raise EstimationError(f"estimation infeasible: {last_failure}")


def _solve_epsilon_fixed_point(
    config: ArchConfig,
    est: StitchedEstimationSet,
    l_prep_total: int,
    factory: TFactory,
    needs_synthesis: bool,
) -> tuple[int, ModuleLayout, SequentialCounts, float | None, int] | None:
    """Co-solve (d, epsilon) for one factory.

    Without rotations the synthesis length is zero and a single distance
    solve suffices.  Otherwise iterate: solve d with the current synthesis
    length, then demand epsilon below the resulting per-tock logical error,
    halving epsilon whenever the demand fails.  Distance grows monotonically
    while epsilon shrinks, so the loop settles quickly.
    """
    def solve(l_eps: int):
        return _solve_distance(config, est.n_logical_max, l_prep_total,
                               factory, l_eps, est.n_T_init, est.n_Rz_init)

    if not needs_synthesis:
        solved = solve(0)
        return None if solved is None else (*solved, None, 0)

    if config.epsilon is not None:
        # User pinned the precision: single solve at its synthesis length.
        l_eps = gate_synthesis_length(config.epsilon, config.c0, config.c1)
        solved = solve(l_eps)
        return None if solved is None else (*solved, config.epsilon, l_eps)

    # Initial guess: the logical error of the shortest-synthesis solve.
    guess = solve(0)
    if guess is None:
        return None
    d0 = guess[0]
    epsilon = logical_error_per_tock(
        logical_error_per_cycle(config.p, d0, config.kappa, config.p_thresh),
        d0)
    for _ in range(EPS_ITER_CAP):
        l_eps = gate_synthesis_length(epsilon, config.c0, config.c1)
        solved = solve(l_eps)
        if solved is None:
            return None
        d = solved[0]
        p_logical = logical_error_per_tock(
            logical_error_per_cycle(config.p, d, config.kappa,
                                    config.p_thresh), d)
        if epsilon < p_logical:
            return (*solved, epsilon, l_eps)
        epsilon = p_logical / 2.0
    raise EstimationError(
        f"precision fixed point did not settle within {EPS_ITER_CAP} "
        f"iterations (factory {factory.name!r})")


# --------------------------------------------------------------------------
# Timing model
# --------------------------------------------------------------------------

def decoding_cores(t_decoder: float, t: float) -> int:
    """Concurrent decoding cores needed so decoding lags by at most one tock
    (ratio of decoder tock to quantum tock; the shared factor d cancels)."""
    return math.ceil(t_decoder / (8.0 * t))


@dataclass(frozen=True)
class TimingBreakdown:
    """Wall-time components of one algorithm repetition (seconds)."""

    t_consump_total: float
    t_distill_delay_total: float
    t_prep_delay_total: float
    t_handover_inter_total: float
    t_decode_delay_total: float
    t_hardware_total: float
    t_ft_total: float

    def __post_init__(self) -> None:
        parts = (self.t_consump_total, self.t_distill_delay_total,
                 self.t_prep_delay_total, self.t_handover_inter_total,
                 self.t_decode_delay_total)
        if any(x < 0 for x in parts):
            raise EstimationError(f"negative timing component: {self}")


@dataclass(frozen=True)
class _WidgetTiming:
    """Per-widget quantities reused across sequence positions."""

    t_prep: float             # time to prepare this widget's graph
    t_consump_intra: float    # intra-module consumption time bound
    t_distill_delay: float    # stall waiting for distilled T states
    n_max_t: int
    n_max_rz: int


def _per_module_maxima(cw: CompiledWidget, register_size: int,
                       layout: ModuleLayout) -> tuple[int, int]:
    """Max per-module counts of T- and Rz-basis measurements for one widget,
    with nodes mapped to modules by contiguous register blocks."""
    if layout.n_per_leg == 1:
        return cw.n_T, cw.n_Rz
    t_counts = [0] * layout.n_per_leg
    rz_counts = [0] * layout.n_per_leg
    for m in cw.measurements:
        module = (m.node % register_size) // layout.memory_per_module
        if m.kind == "T":
            t_counts[module] += 1
        elif m.kind == "Rz":
            rz_counts[module] += 1
    return max(t_counts), max(rz_counts)


def _widget_timing(
    config: ArchConfig,
    cw: CompiledWidget,
    prep: PrepSchedule,
    sel: SelectionResult,
    register_size: int,
) -> _WidgetTiming:
    d = sel.d
    layout = sel.layout
    t, t_inter = config.t, config.t_inter
    cycles = sel.factory.cycles
    n_fact = layout.n_t_factories

    n_intra = prep.n_sub_steps
    n_cross = (cross_module_ops(prep, register_size, config.n_inter_pipes)
               if layout.n_per_leg > 1 else 0)
    t_prep = 8.0 * d * (n_intra * t + n_cross * t_inter)

    n_max_t, n_max_rz = _per_module_maxima(cw, register_size, layout)
    t_consump_intra = 8.0 * t * d * (
        -(-n_max_t // n_fact) + sel.l_eps * -(-n_max_rz // n_fact))

    # T states banked on the transfer bus while this graph was prepared,
    # against the longest sequential T demand any single module will see.
    n_t_per_module = max(int(n_fact * t_prep // (8.0 * t * cycles)),
                         layout.l_transfer_bus)
    l_max_seq = n_max_t + sel.l_eps * n_max_rz
    if l_max_seq > n_t_per_module:
        shortfall = -(-(l_max_seq - n_t_per_module) // n_fact)
        t_distill_delay = 8.0 * t * cycles * shortfall
    else:
        t_distill_delay = 0.0

    return _WidgetTiming(t_prep, t_consump_intra, t_distill_delay,
                         n_max_t, n_max_rz)


def _handover_crossings(out_widget: CompiledWidget, in_widget: CompiledWidget,
                        register_size: int, layout: ModuleLayout) -> int:
    """Module-boundary crossings to teleport one widget's outputs onto the
    next widget's inputs, wire by wire."""
    if layout.n_per_leg == 1:
        return 0
    total = 0
    for out_node, in_node in zip(out_widget.output_nodes,
                                 in_widget.input_nodes):
        m_out = (out_node % register_size) // layout.memory_per_module
        m_in = (in_node % register_size) // layout.memory_per_module
        total += abs(m_out - m_in) + 1
    return total


def compute_timing(
    config: ArchConfig,
    algo: CompiledAlgorithm,
    sel: SelectionResult,
) -> TimingBreakdown:
    """All wall-time components for the compiled sequence at the selected
    (d, epsilon, factory) operating point."""
    plan = algo.plan
    register_size = algo.est.n_logical_max
    d = sel.d
    t = config.t

    per_widget = {
        wid: _widget_timing(config, algo.compiled[wid], algo.preps[wid],
                            sel, register_size)
        for wid in plan.widgets
    }

    # Distillation stalls occur at every sequence position except the last.
    t_distill_total = sum(
        (plan.multiplicity[wid] - (1 if wid == plan.last else 0))
        * wt.t_distill_delay
        for wid, wt in per_widget.items())

    # Preparation stalls and handover teleports are properties of ordered
    # adjacent pairs, so the stitch multiset gives their sequence totals.
    t_prep_delay_total = 0.0
    handover_ops = 0
    for (a, b), count in plan.stitches.items():
        wt_a = per_widget[a]
        lag = (per_widget[b].t_prep - wt_a.t_consump_intra
               - wt_a.t_distill_delay)
        if lag > 0:
            t_prep_delay_total += count * lag
        crossings = _handover_crossings(
            algo.compiled[a], algo.compiled[b], register_size, sel.layout)
        if crossings:
            handover_ops += count * -(-crossings // config.n_inter_pipes)
    t_handover = 8.0 * config.t_inter * d * handover_ops

    t_consump = (8.0 * t * d * (algo.l_prep_first + sel.counts.n_seq_consump)
                 + t_distill_total + t_prep_delay_total)

    # Decoding lag: one (decoder tock - quantum tock) per consumption-side
    # tock, plus the slower factory tock for distillation stalls.
    quantum_tock = 8.0 * t * d
    decoder_tock = config.t_decoder * d
    factory_tock = 8.0 * t * sel.factory.cycles
    consump_tocks = (algo.l_prep_first + sel.counts.n_seq_consump
                     + math.ceil(t_prep_delay_total / quantum_tock))
    distill_tocks = math.ceil(t_distill_total / factory_tock)
    t_decode = (consump_tocks * max(0.0, decoder_tock - quantum_tock)
                + distill_tocks * max(0.0, decoder_tock - factory_tock))

    t_hardware = t_consump + t_handover + t_decode
    return TimingBreakdown(
        t_consump_total=t_consump,
        t_distill_delay_total=t_distill_total,
        t_prep_delay_total=t_prep_delay_total,
        t_handover_inter_total=t_handover,
        t_decode_delay_total=t_decode,
        t_hardware_total=t_hardware,
        t_ft_total=config.n_algo_reps * t_hardware,
    )
