"""Penalised cost of a design: pipe cost plus pc * sum(deficit ** rho).

Deficits are charged in the head unit declared by the network file (feet
for an imperial network) unless the schedule asks for metres.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .hydraulics import (
    HydraulicError, SolverSettings, check_pressure, decompose, solve_flows,
)
from .network import Design, Network, design_cost

DEFICIT_UNITS = ("network", "m")


@dataclass(frozen=True)
class PenaltySchedule:
    """Penalty coefficient, constant or ramped linearly over ``budget`` iterations."""

    mode: str = "fixed"
    pc: float = 2e4
    pc_end: Optional[float] = None
    rho: float = 1.0
    budget: Optional[int] = None
    deficit_unit: str = "network"

    def __post_init__(self):
        if self.mode not in ("fixed", "linear"):
            raise ValueError(f"unknown penalty mode {self.mode!r}")
        if self.deficit_unit not in DEFICIT_UNITS:
            raise ValueError(f"deficit_unit must be one of {DEFICIT_UNITS}")
        if not self.pc > 0:
            raise ValueError("pc must be positive")
        if self.mode == "linear":
            if self.pc_end is None or self.pc_end < self.pc:
                raise ValueError("linear schedule needs pc_end >= pc")

    @classmethod
    def fixed(cls, pc: float, rho: float = 1.0, deficit_unit: str = "network") -> "PenaltySchedule":
        return cls("fixed", pc, None, rho, None, deficit_unit)

    @classmethod
    def linear(cls, start: float, end: float, budget: Optional[int] = None,
               rho: float = 1.0, deficit_unit: str = "network") -> "PenaltySchedule":
        return cls("linear", start, end, rho, budget, deficit_unit)

    @classmethod
    def parse(cls, text: str, rho: float = 1.0, deficit_unit: str = "network") -> "PenaltySchedule":
        """``"2e4"`` (fixed) or ``"1e4:1e5"`` (linear)."""
        if ":" in text:
            a, b = text.split(":", 1)
            return cls.linear(float(a), float(b), rho=rho, deficit_unit=deficit_unit)
        return cls.fixed(float(text), rho=rho, deficit_unit=deficit_unit)

    def label(self) -> str:
        if self.mode == "fixed":
            return f"{self.pc:g}"
        return f"{self.pc:g}:{self.pc_end:g}"


def pc_at(schedule: PenaltySchedule, iteration: int, budget: Optional[int] = None) -> float:
    if schedule.mode == "fixed":
        return schedule.pc
    budget = schedule.budget if budget is None else budget
    if not budget:
        return schedule.pc_end
    frac = min(max(iteration, 0), budget) / budget
    return schedule.pc + (schedule.pc_end - schedule.pc) * frac


@dataclass(frozen=True, eq=False)
class Evaluation:
    total: float
    objective: float
    penalty: float
    feasible: bool
    deficits: np.ndarray
    hydraulic_ok: bool
    heads: Optional[np.ndarray] = None
    flows: Optional[np.ndarray] = None
    message: str = ""


def deficit_factor(schedule: PenaltySchedule, net: Network) -> float:
    """Metres per penalised unit of deficit."""
    return net.units.head_factor if schedule.deficit_unit == "network" else 1.0


def failure_deficit(net: Network, factor: float = 1.0) -> float:
    """Sentinel deficit charged to designs the solver cannot evaluate."""
    return float(sum(net.nodes[i].min_head_value for i in net.junction_indices)) / factor


def penalty_units(deficits: np.ndarray, rho: float, factor: float) -> float:
    d = deficits[deficits > 0] / factor
    return float(np.sum(d ** rho))


def evaluate(design: Design, net: Network, schedule: PenaltySchedule = PenaltySchedule(),
             iteration: int = 0, settings: SolverSettings = SolverSettings(),
             budget: Optional[int] = None) -> Evaluation:
    """Penalised cost; ``deficits`` in the result are always metres."""
    pc = pc_at(schedule, iteration, budget)
    factor = deficit_factor(schedule, net)
    objective = design_cost(design, net)
    try:
        state = solve_flows(net, design, settings)
    except HydraulicError as err:
        penalty = pc * failure_deficit(net, factor)
        return Evaluation(objective + penalty, objective, penalty, False,
                          np.zeros(len(net.nodes)), False, message=str(err))
    deficits = check_pressure(state, net)
    penalty = pc * penalty_units(deficits, schedule.rho, factor)
    return Evaluation(objective + penalty, objective, penalty, penalty == 0.0, deficits, True,
                      state.heads, state.flows)


@dataclass(frozen=True, eq=False)
class BatchResult:
    objective: np.ndarray
    violation: np.ndarray
    hydraulic_ok: np.ndarray

    def totals(self, pc: float) -> np.ndarray:
        return self.objective + pc * self.violation

    @property
    def feasible(self) -> np.ndarray:
        return self.hydraulic_ok & (self.violation == 0.0)


class BatchEvaluator:
    """Vectorised :func:`evaluate` for many designs of one network.

    The full-network decomposition is built once; designs that close a tree
    link (zero diameter) fall back to a per-design decomposition.  ``count``
    tallies every design evaluated.
    """

    def __init__(self, net: Network, settings: SolverSettings = SolverSettings(), rho: float = 1.0,
                 deficit_unit: float = 1.0):
        self.net = net
        self.settings = settings
        self.rho = float(rho)
        self.deficit_unit = float(deficit_unit)
        self.count = 0
        self.decomp = decompose(net)
        self._csr = kernels.to_csr(self.decomp.coeff)
        links = net.links
        self._dec_link = net.decision_links
        self._link_k = np.array([net.hazen_williams_omega * l.length / l.roughness ** net.alpha
                                 for l in links])
        self._link_d = np.array([0.0 if l.diameter is None else l.diameter for l in links])
        self._cat_d = np.asarray(net.catalog.diameters, dtype=float)
        self._cat_cost = np.asarray(net.catalog.unit_costs, dtype=float)
        self._dec_len = np.array([net.arcs[a].length for a in net.decision_arcs])
        self._res_nodes = np.array(net.reservoir_indices, dtype=np.int64)
        self._res_heads = np.array([r.fixed_head for r in net.reservoirs])
        self._junctions = np.array(net.junction_indices, dtype=np.int64)
        self._required = np.array([n.required_head for n in net.nodes])
        self._sentinel = failure_deficit(net, self.deficit_unit)
        self._fallback_cache = {}

    def __call__(self, indices) -> BatchResult:
        """Evaluate a (n, n_decisions) array of 1-based catalog indices."""
        idx = np.atleast_2d(np.asarray(indices, dtype=np.int64)) - 1
        d, s = self.decomp, self.settings
        objective, violation, status, _ = kernels.evaluate_batch(
            idx, self._dec_link, self._link_k, self._link_d, self._cat_d, self._cat_cost,
            self._dec_len, d.base, d.coeff, *self._csr, d.chords, d.head_offset,
            self._res_nodes, self._res_heads, d.tree, d.parent, d.child, d.sign,
            self._junctions, self._required, self.net.alpha, self.net.beta, self.rho,
            s.tolerance, s.max_iterations, s.max_halvings, s.q_epsilon)
        if self.deficit_unit != 1.0:
            violation = violation / self.deficit_unit ** self.rho
        for i in np.flatnonzero(status == kernels.NEEDS_TREE):
            violation[i], status[i] = self._fallback(idx[i] + 1)
        ok = status == kernels.OK
        violation = np.where(ok, violation, self._sentinel)
        self.count += idx.shape[0]
        return BatchResult(objective, violation, ok)

    def _fallback(self, design):
        key = design.tobytes()
        if key not in self._fallback_cache:
            if len(self._fallback_cache) > 4096:
                self._fallback_cache.clear()
            try:
                state = solve_flows(self.net, design, self.settings)
            except HydraulicError as err:
                code = kernels.DISCONNECTED if "disconnected" in str(err) else kernels.NONCONVERGED
                self._fallback_cache[key] = (0.0, code)
            else:
                deficits = check_pressure(state, self.net)
                self._fallback_cache[key] = (penalty_units(deficits, self.rho, self.deficit_unit), kernels.OK)
        return self._fallback_cache[key]
