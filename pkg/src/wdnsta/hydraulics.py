"""Loop-flow hydraulics.

Continuity is solved exactly by choosing a spanning tree rooted at the merged
reservoirs: every tree flow is an affine function of the chord (non-tree)
flows.  Only the chord flows remain unknown, one per independent loop or
reservoir-to-reservoir path, and they are found by Newton-Raphson on the
energy equations.  Heads follow by walking the tree outwards from the
reservoirs.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .network import Design, Network


class HydraulicError(RuntimeError):
    """Base class for designs the solver cannot evaluate."""


class HydraulicDisconnection(HydraulicError):
    pass


class HydraulicNonConvergence(HydraulicError):
    pass


@dataclass(frozen=True)
class SolverSettings:
    tolerance: float = 1e-8
    max_iterations: int = 100
    max_halvings: int = 30
    q_epsilon: float = 1e-10

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass(frozen=True, eq=False)
class FlowDecomposition:
    """Tree/chord split of the active links.

    ``base`` and ``coeff`` give every link flow (declared direction) as
    ``base + coeff @ chord_flows``; column ``c`` of ``coeff`` is also the signed
    fundamental cycle (or path) closed by chord ``c``.  Closed links have zero
    rows.  ``tree`` lists tree links in breadth-first order with their parent
    and child node and ``sign`` = +1 when declared parent -> child.
    """

    active: np.ndarray
    tree: np.ndarray
    parent: np.ndarray
    child: np.ndarray
    sign: np.ndarray
    chords: np.ndarray
    base: np.ndarray
    coeff: np.ndarray
    head_offset: np.ndarray

    @property
    def n_chords(self) -> int:
        return len(self.chords)

    def flows(self, chord_flows) -> np.ndarray:
        return self.base + self.coeff @ np.asarray(chord_flows, dtype=float)

    def describe(self, net: Network) -> str:
        """Plain-text dump of tree links, chords and cycle signs."""
        names = [link.id for link in net.links]
        nodes = [n.id for n in net.nodes]
        lines = ["tree:"]
        for j, p, c, s in zip(self.tree, self.parent, self.child, self.sign):
            lines.append(f"  {names[j]}: {nodes[p]} -> {nodes[c]} ({'+' if s > 0 else '-'})")
        lines.append("chords:")
        for k, j in enumerate(self.chords):
            members = [f"{'+' if self.coeff[i, k] > 0 else '-'}{names[i]}"
                       for i in np.flatnonzero(self.coeff[:, k])]
            lines.append(f"  {names[j]}: " + " ".join(members))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class HydraulicState:
    flows: np.ndarray
    heads: np.ndarray
    residual: float
    iterations: int

    def pressure_heads(self, net: Network) -> np.ndarray:
        return self.heads - np.array([n.ground_level for n in net.nodes])


def _active_mask(net: Network, design) -> np.ndarray:
    if design is None:
        return np.ones(len(net.links), dtype=bool)
    return net.link_diameters(design) > 0


def decompose(net: Network, design: Design | Sequence[int] | None = None,
              priority: Optional[Sequence[int]] = None) -> FlowDecomposition:
    """Spanning tree by breadth-first search from the merged reservoirs.

    Links incident to a node are scanned in ascending link order, or in the
    order given by ``priority`` (a permutation of link indices).  Chords are
    returned in ascending link order.  ``design=None`` keeps every link open.
    """
    links = net.links
    n_nodes, n_links = len(net.nodes), len(links)
    active = _active_mask(net, design)
    order = range(n_links) if priority is None else priority
    incident = [[] for _ in range(n_nodes)]
    for j in order:
        if active[j]:
            incident[links[j].from_idx].append(j)
            incident[links[j].to_idx].append(j)

    reservoirs = net.reservoir_indices
    is_res = np.zeros(n_nodes, dtype=bool)
    is_res[list(reservoirs)] = True
    visited = is_res.copy()
    in_tree = np.zeros(n_links, dtype=bool)
    tree, parent, child, sign = [], [], [], []
    queue = deque(reservoirs)
    while queue:
        u = queue.popleft()
        for j in incident[u]:
            link = links[j]
            v = link.to_idx if link.from_idx == u else link.from_idx
            if visited[v]:
                continue
            visited[v] = True
            in_tree[j] = True
            tree.append(j)
            parent.append(u)
            child.append(v)
            sign.append(1 if link.from_idx == u else -1)
            queue.append(v)
    if not visited.all():
        missing = [net.nodes[i].id for i in np.flatnonzero(~visited)]
        raise HydraulicDisconnection(f"hydraulically disconnected design: nodes {missing} unreachable")

    chords = np.array([j for j in range(n_links) if active[j] and not in_tree[j]], dtype=np.int64)
    m = len(chords)
    demand = np.array([0.0 if is_res[i] else net.nodes[i].demand for i in range(n_nodes)])
    acc_base = demand.copy()
    acc_coeff = np.zeros((n_nodes, m))
    for c, j in enumerate(chords):
        acc_coeff[links[j].from_idx, c] += 1.0
        acc_coeff[links[j].to_idx, c] -= 1.0
    acc_coeff[is_res] = 0.0

    base = np.zeros(n_links)
    coeff = np.zeros((n_links, m))
    for c, j in enumerate(chords):
        coeff[j, c] = 1.0
    for k in range(len(tree) - 1, -1, -1):
        j, p, v, s = tree[k], parent[k], child[k], sign[k]
        base[j] = s * acc_base[v]
        coeff[j] = s * acc_coeff[v]
        if not is_res[p]:
            acc_base[p] += acc_base[v]
            acc_coeff[p] += acc_coeff[v]

    res_head = np.zeros(n_nodes)
    for r in net.reservoirs:
        res_head[net.node_index[r.node_id]] = r.fixed_head
    offset = np.array([res_head[link.from_idx] - res_head[link.to_idx] for link in links])
    # exact zeros keep -0.0 out of sign comparisons
    base[np.abs(base) == 0] = 0.0
    return FlowDecomposition(active, np.array(tree, dtype=np.int64), np.array(parent, dtype=np.int64),
                             np.array(child, dtype=np.int64), np.array(sign, dtype=np.float64),
                             chords, base, coeff, offset)


def resistances(net: Network, design) -> np.ndarray:
    """Resistance per link; closed links get 0 and carry no flow."""
    d = net.link_diameters(design)
    k = np.array([net.hazen_williams_omega * l.length / l.roughness ** net.alpha for l in net.links])
    out = np.zeros(len(d))
    open_ = d > 0
    out[open_] = k[open_] / d[open_] ** net.beta
    return out


def head_loss(r, q, alpha):
    return r * q * np.abs(q) ** (alpha - 1.0)


def loop_residuals(decomp: FlowDecomposition, chord_flows, net: Network, design) -> np.ndarray:
    """Energy residual (m) around each fundamental loop or reservoir path."""
    x = np.asarray(chord_flows, dtype=float)
    if x.shape != (decomp.n_chords,):
        raise ValueError(f"expected {decomp.n_chords} chord flows, got {x.shape}")
    q = decomp.flows(x)
    h = head_loss(resistances(net, design), q, net.alpha)
    return decomp.coeff.T @ (h - decomp.head_offset)


def _heads(net: Network, decomp: FlowDecomposition, r, q) -> np.ndarray:
    res_nodes = np.array(net.reservoir_indices, dtype=np.int64)
    res_heads = np.array([r_.fixed_head for r_ in net.reservoirs])
    return kernels.head_walk(len(net.nodes), res_nodes, res_heads, decomp.tree, decomp.parent,
                             decomp.child, decomp.sign, r, q, net.alpha)


def solve_flows(net: Network, design, settings: SolverSettings = SolverSettings(),
                decomp: Optional[FlowDecomposition] = None) -> HydraulicState:
    """Flows and heads for ``design``.

    Raises :class:`HydraulicDisconnection` or :class:`HydraulicNonConvergence`.
    """
    if decomp is None:
        decomp = decompose(net, design)
    r = resistances(net, design)
    x, q, res, iters, status = kernels.newton_chords(
        decomp.base, decomp.coeff, r, decomp.head_offset, net.alpha,
        settings.tolerance, settings.max_iterations, settings.max_halvings, settings.q_epsilon)
    if status != kernels.OK:
        raise HydraulicNonConvergence(
            f"hydraulic non-convergence: residual {res:.3e} m after {iters} iterations")
    heads = _heads(net, decomp, r, q)
    return HydraulicState(np.asarray(q), heads, float(res), int(iters))


def check_pressure(state: HydraulicState, net: Network) -> np.ndarray:
    """Per-node shortfall below the required head (m); zero at reservoirs."""
    out = np.zeros(len(net.nodes))
    for i in net.junction_indices:
        out[i] = max(0.0, net.nodes[i].required_head - state.heads[i])
    return out

