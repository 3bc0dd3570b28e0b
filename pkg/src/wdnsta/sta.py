"""Discrete state transition algorithm over catalog-index vectors.

Four operators generate ``se`` candidates each from the working solution:

* swap - exchange the values at 2..m_a random positions;
* shift - move a run of 1..m_b entries to another place;
* symmetry - reverse a block made of two flanks around a centre of 0..m_c;
* substitute - redraw 1..m_d entries from the catalog.

The fittest candidate replaces the working solution if it is better, or with
probability ``p2`` otherwise.  After the four operators an archive keeps the
best solution seen and the working solution is reset to it with probability
``p1``.

Random numbers come from numpy's PCG64 generator.  Run ``i`` of a seeded batch
uses ``SeedSequence(seed, spawn_key=(i,))`` so any single run can be replayed.
"""
from __future__ import annotations

import csv
import io
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .evaluator import (
    BatchEvaluator, Evaluation, PenaltySchedule, deficit_factor, evaluate, pc_at,
)
from .hydraulics import SolverSettings
from .network import Design, Network

log = logging.getLogger(__name__)

OPERATORS = ("swap", "shift", "symmetry", "substitute")


@dataclass(frozen=True)
class SearchConfig:
    se: int = 8
    p1: float = 0.1
    p2: float = 0.1
    m_a: int = 2
    m_b: int = 1
    m_c: int = 0
    m_d: int = 1
    max_iterations: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.se < 1:
            raise ValueError("se must be at least 1")
        if not (0.0 <= self.p1 <= 1.0 and 0.0 <= self.p2 <= 1.0):
            raise ValueError("p1 and p2 must lie in [0, 1]")
        if self.m_a < 2 or self.m_b < 1 or self.m_c < 0 or self.m_d < 1:
            raise ValueError("operator factors need m_a >= 2, m_b >= 1, m_c >= 0, m_d >= 1")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")

    def expected_evaluations(self) -> int:
        return self.se * (1 + 4 * self.max_iterations)


def make_rng(seed: int, run_index: Optional[int] = None) -> np.random.Generator:
    if run_index is None:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(run_index,))))


# -- deterministic moves ------------------------------------------------------

def swap_at(design, positions) -> np.ndarray:
    """Rotate the values at ``positions`` one place; two positions is a plain swap."""
    out = np.array(design, copy=True)
    pos = list(positions)
    out[pos] = out[pos[1:] + pos[:1]]
    return out


def shift_at(design, start: int, length: int, insert: int) -> np.ndarray:
    """Cut ``design[start:start+length]`` and reinsert it before remaining entry ``insert``.

    ``insert`` counts entries left after the cut: 0 puts the run at the
    front, ``n - length`` at the back.  ``insert == start`` is the identity.
    """
    x = np.asarray(design)
    n = len(x)
    idx = np.arange(n)
    rest = np.concatenate((idx[:start], idx[start + length:]))
    perm = np.concatenate((rest[:insert], idx[start:start + length], rest[insert:]))
    return x[perm].copy()


def symmetry_at(design, anchor: int, flank: int, center: int = 0) -> np.ndarray:
    """Mirror ``flank`` entries on each side of a ``center``-wide block.

    The block starts after the first ``anchor`` entries; mirroring both flanks
    about the centre is a reversal of ``2 * flank + center`` consecutive entries.
    """
    out = np.array(design, copy=True)
    stop = anchor + 2 * flank + center
    if anchor < 0 or flank < 1 or stop > len(out):
        raise ValueError("symmetry block out of range")
    out[anchor:stop] = out[anchor:stop][::-1]
    return out


# -- random operators ---------------------------------------------------------

def op_swap(design, m_a: int, se: int, rng: np.random.Generator) -> np.ndarray:
    x = np.asarray(design)
    n = len(x)
    cand = np.tile(x, (se, 1))
    if n < 2:
        log.debug("swap skipped: design has %d entries", n)
        return cand
    k_max = min(m_a, n)
    order = np.argsort(rng.random((se, n)), axis=1)
    if k_max == 2:
        rows = np.arange(se)
        a, b = order[:, 0], order[:, 1]
        cand[rows, a], cand[rows, b] = x[b], x[a]
        return cand
    ks = rng.integers(2, k_max + 1, size=se)
    for i in range(se):
        cand[i] = swap_at(x, order[i, :ks[i]])
    return cand


def op_shift(design, m_b: int, se: int, rng: np.random.Generator) -> np.ndarray:
    x = np.asarray(design)
    n = len(x)
    if n < 2:
        log.debug("shift skipped: design has %d entries", n)
        return np.tile(x, (se, 1))
    cand = np.empty((se, n), dtype=x.dtype)
    l_max = min(m_b, n - 1)
    for i in range(se):
        length = 1 if l_max == 1 else int(rng.integers(1, l_max + 1))
        start = int(rng.integers(0, n - length + 1))
        insert = int(rng.integers(0, n - length + 1))
        cand[i] = shift_at(x, start, length, insert)
    return cand


def op_symmetry(design, m_c: int, se: int, rng: np.random.Generator) -> np.ndarray:
    x = np.asarray(design)
    n = len(x)
    if n < 2:
        log.debug("symmetry skipped: design has %d entries", n)
        return np.tile(x, (se, 1))
    cand = np.empty((se, n), dtype=x.dtype)
    for i in range(se):
        anchor = int(rng.integers(0, n - 1))
        room = n - anchor
        center = int(rng.integers(0, min(m_c, room - 2) + 1))
        flank = int(rng.integers(1, (room - center) // 2 + 1))
        cand[i] = symmetry_at(x, anchor, flank, center)
    return cand


def op_substitute(design, m_d: int, se: int, rng: np.random.Generator,
                  catalog_size: int) -> np.ndarray:
    x = np.asarray(design)
    n = len(x)
    cand = np.tile(x, (se, 1))
    if catalog_size < 2 or n == 0:
        return cand
    k_max = min(m_d, n)
    if k_max == 1:
        rows = np.arange(se)
        pos = rng.integers(0, n, size=se)
        new = rng.integers(1, catalog_size, size=se)
        new += new >= x[pos]
        cand[rows, pos] = new
        return cand
    for i in range(se):
        k = int(rng.integers(1, k_max + 1))
        pos = rng.choice(n, size=k, replace=False)
        new = rng.integers(1, catalog_size, size=k)
        new += new >= x[pos]
        cand[i, pos] = new
    return cand


# -- search loop ----------------------------------------------------------------

@dataclass
class TraceRow:
    iteration: int
    archive_cost: float
    working_cost: float
    pc: float
    feasible: bool
    evaluations: int
    improved_by: str = ""


@dataclass(frozen=True, eq=False)
class Incumbent:
    """A design with its cached objective and penalised violation."""

    design: np.ndarray
    objective: float
    violation: float
    hydraulic_ok: bool

    def cost(self, pc: float) -> float:
        return self.objective + pc * self.violation

    @property
    def feasible(self) -> bool:
        return self.hydraulic_ok and self.violation == 0.0


def _pick(cand: np.ndarray, result, k: int) -> Incumbent:
    return Incumbent(cand[k], float(result.objective[k]), float(result.violation[k]),
                     bool(result.hydraulic_ok[k]))


@dataclass
class SearchState:
    """Working incumbent ``best`` and archive, both scored at the current ``pc``.

    Costs are recomputed from cached objective and violation whenever the
    penalty coefficient changes, so a ramped schedule never compares totals
    taken under different coefficients.
    """

    best: Incumbent
    archive: Incumbent
    rng: np.random.Generator
    pc: float
    iteration: int = 0
    evaluations: int = 0
    trace: List[TraceRow] = field(default_factory=list)
    records: List[tuple] = field(default_factory=list)
    last_improvement: str = ""

    @property
    def best_cost(self) -> float:
        return self.best.cost(self.pc)

    @property
    def archive_cost(self) -> float:
        return self.archive.cost(self.pc)

    def note(self) -> None:
        """Log a new lowest working cost with the evaluation count that found it."""
        cost = self.best_cost
        if not self.records or cost < self.records[-1][1]:
            self.records.append((self.evaluations, cost, self.best.feasible))


def _candidates(state: SearchState, operator: str, config: SearchConfig, catalog_size: int):
    if operator == "swap":
        return op_swap(state.best.design, config.m_a, config.se, state.rng)
    if operator == "shift":
        return op_shift(state.best.design, config.m_b, config.se, state.rng)
    if operator == "symmetry":
        return op_symmetry(state.best.design, config.m_c, config.se, state.rng)
    if operator == "substitute":
        return op_substitute(state.best.design, config.m_d, config.se, state.rng, catalog_size)
    raise ValueError(f"unknown operator {operator!r}")


def apply_operator(state: SearchState, operator: str, config: SearchConfig,
                   evaluate_fn: Callable, catalog_size: int) -> SearchState:
    """One operator application with greedy acceptance and risk in probability.

    ``evaluate_fn`` maps an (se, n) index array to a :class:`BatchResult`.
    The fittest candidate (first on ties) replaces the working design if it
    is strictly cheaper at ``state.pc``; otherwise one draw decides whether
    it is taken anyway with probability ``p2``.
    """
    cand = _candidates(state, operator, config, catalog_size)
    result = evaluate_fn(cand)
    totals = result.totals(state.pc)
    k = int(np.argmin(totals))
    state.evaluations += len(cand)
    accept = totals[k] < state.best_cost
    if accept:
        state.last_improvement = operator
    elif state.rng.random() < config.p2:
        accept = True
    if accept:
        state.best = _pick(cand, result, k)
        state.note()
    return state


@dataclass(eq=False)
class StaResult:
    design: Design
    evaluation: Evaluation
    trace: List[TraceRow]
    evaluations: int
    records: List[tuple]
    config: SearchConfig
    schedule: PenaltySchedule
    run_index: Optional[int] = None
    wall_time: float = 0.0

    def evaluations_to_reach(self, cost: float, tol: float = 1e-6) -> Optional[int]:
        """Evaluation count at which a feasible design costing <= ``cost`` first appeared."""
        for evals, c, feasible in self.records:
            if feasible and c <= cost + tol:
                return evals
        return None


def make_evaluator(net: Network, schedule: PenaltySchedule,
                   settings: SolverSettings = SolverSettings()) -> BatchEvaluator:
    return BatchEvaluator(net, settings, rho=schedule.rho, deficit_unit=deficit_factor(schedule, net))


def run_sta(net: Network, schedule: PenaltySchedule, config: SearchConfig,
            evaluator: Optional[BatchEvaluator] = None, run_index: Optional[int] = None,
            settings: SolverSettings = SolverSettings()) -> StaResult:
    started = time.perf_counter()
    if evaluator is None:
        evaluator = make_evaluator(net, schedule, settings)
    rng = make_rng(config.seed, run_index)
    n, size, budget = net.n_decisions, len(net.catalog), config.max_iterations

    pc = pc_at(schedule, 0, budget)
    init = rng.integers(1, size + 1, size=(config.se, n))
    result = evaluator(init)
    first = _pick(init, result, int(np.argmin(result.totals(pc))))
    state = SearchState(first, first, rng, pc, evaluations=config.se)
    state.note()
    state.trace.append(TraceRow(0, state.archive_cost, state.best_cost, pc,
                                state.archive.feasible, state.evaluations))

    for it in range(1, budget + 1):
        state.iteration = it
        state.pc = pc_at(schedule, it, budget)
        state.last_improvement = ""
        for op in OPERATORS:
            apply_operator(state, op, config, evaluator, size)
        if state.best_cost < state.archive_cost:
            state.archive = state.best
        if rng.random() < config.p1:
            state.best = state.archive
        state.trace.append(TraceRow(it, state.archive_cost, state.best_cost, state.pc,
                                    state.archive.feasible, state.evaluations,
                                    state.last_improvement))

    design = Design(state.archive.design)
    final = evaluate(design, net, schedule, budget, evaluator.settings, budget)
    return StaResult(design, final, state.trace, state.evaluations, state.records, config,
                     schedule, run_index, time.perf_counter() - started)


def _run_one(args):
    net, schedule, config, run_index, settings = args
    return run_sta(net, schedule, config, run_index=run_index, settings=settings)


def run_many(net: Network, schedule: PenaltySchedule, config: SearchConfig, runs: int,
             jobs: int = 1, settings: SolverSettings = SolverSettings()) -> List[StaResult]:
    """``runs`` independent seeded runs, returned in run order."""
    if jobs <= 1 or runs <= 1:
        evaluator = make_evaluator(net, schedule, settings)
        out = []
        for i in range(runs):
            evaluator.count = 0
            out.append(run_sta(net, schedule, config, evaluator, run_index=i, settings=settings))
        return out
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_one, [(net, schedule, config, i, settings) for i in range(runs)]))


def summarize(results: List[StaResult]) -> dict:
    """Mean and std of final total cost, feasibility percentage, best design."""
    totals = np.array([r.evaluation.total for r in results])
    feasible = np.array([r.evaluation.feasible for r in results])
    best = min(results, key=lambda r: (not r.evaluation.feasible, r.evaluation.total))
    feas_costs = totals[feasible]
    return {
        "runs": len(results),
        "mean": float(totals.mean()) if len(totals) else float("nan"),
        "std": float(totals.std(ddof=1)) if len(totals) > 1 else 0.0,
        "feasible_pct": 100.0 * float(feasible.mean()) if len(totals) else 0.0,
        "mean_feasible": float(feas_costs.mean()) if len(feas_costs) else float("nan"),
        "best_total": float(best.evaluation.total),
        "best_feasible": bool(best.evaluation.feasible),
        "best_design": list(best.design.indices),
        "best_run": best.run_index,
    }


def config_dict(config: SearchConfig) -> dict:
    return asdict(config)


TRACE_COLUMNS = ("iteration", "archive_cost", "working_cost", "pc", "feasible_flag")


def trace_to_csv(trace: List[TraceRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for row in trace:
        w.writerow([row.iteration, repr(row.archive_cost), repr(row.working_cost),
                    repr(row.pc), int(row.feasible)])
    return buf.getvalue()
