"""Network, catalog and design types plus the sectioned plain-text network format.

All quantities are held in SI after parsing: metres, cubic metres per second,
and currency per metre of pipe.  The declared input units are kept on the
network so reports can convert back (the New York benchmark is tabulated in
feet).
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

LENGTH_UNITS = {"m": 1.0, "ft": 0.3048}
DIAMETER_UNITS = {"m": 1.0, "mm": 1e-3, "in": 0.0254}
DEMAND_UNITS = {"m3/s": 1.0, "m3/h": 1.0 / 3600.0, "L/s": 1e-3, "ft3/s": 0.0283168}

# Hazen-Williams conversion constant -> (flow exponent, diameter exponent).
# 10.5088 is paired with the rounded exponents it was fitted with.
HW_CONVENTIONS = {
    10.6744: (1.852, 4.871),
    10.5088: (1.85, 4.87),
}

MIN_HEAD_KINDS = ("pressure", "total")
ARC_KINDS = ("decision", "fixed", "parallel")


class NetworkError(ValueError):
    """Invalid network data.  ``line`` is the 1-based source line when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        self.reason = message
        super().__init__(f"line {line}: {message}" if line is not None else message)


class ClosedArcError(ValueError):
    """Raised when a resistance is requested for a zero-diameter (absent) pipe."""


@dataclass(frozen=True)
class Units:
    length: str = "m"
    diameter: str = "m"
    demand: str = "m3/s"
    head: str = "m"

    def __post_init__(self):
        for value, table, what in (
            (self.length, LENGTH_UNITS, "length"),
            (self.diameter, DIAMETER_UNITS, "diameter"),
            (self.demand, DEMAND_UNITS, "demand"),
            (self.head, LENGTH_UNITS, "head"),
        ):
            if value not in table:
                raise NetworkError(f"unknown {what} unit {value!r}")

    @property
    def length_factor(self) -> float:
        return LENGTH_UNITS[self.length]

    @property
    def diameter_factor(self) -> float:
        return DIAMETER_UNITS[self.diameter]

    @property
    def demand_factor(self) -> float:
        return DEMAND_UNITS[self.demand]

    @property
    def head_factor(self) -> float:
        return LENGTH_UNITS[self.head]


@dataclass(frozen=True)
class NodeRecord:
    """A node.  ``demand`` in m^3/s; levels and head floors in metres."""

    id: str
    demand: float
    ground_level: float
    min_pressure_head: Optional[float] = None
    min_total_head: Optional[float] = None

    def __post_init__(self):
        if (self.min_pressure_head is None) == (self.min_total_head is None):
            raise NetworkError(f"node {self.id}: exactly one minimum head kind must be set")

    @property
    def required_head(self) -> float:
        """Minimum total head (m) implied by whichever floor is set."""
        if self.min_total_head is not None:
            return self.min_total_head
        return self.ground_level + self.min_pressure_head

    @property
    def min_head_value(self) -> float:
        if self.min_total_head is not None:
            return self.min_total_head
        return self.min_pressure_head


@dataclass(frozen=True)
class Reservoir:
    node_id: str
    fixed_head: float


@dataclass(frozen=True)
class PipeArc:
    """A declared pipe.

    ``kind`` is ``decision`` (diameter chosen from the catalog), ``fixed``
    (``diameter`` given), or ``parallel`` (an existing pipe of ``diameter`` that
    may receive a duplicate chosen from the catalog).
    """

    id: str
    from_node: str
    to_node: str
    length: float
    roughness: float
    kind: str = "decision"
    diameter: Optional[float] = None

    @property
    def is_decision(self) -> bool:
        return self.kind in ("decision", "parallel")


@dataclass(frozen=True)
class DiameterCatalog:
    """Commercial sizes in metres and unit costs per metre; indexed from 1."""

    diameters: tuple
    unit_costs: tuple

    def __post_init__(self):
        if len(self.diameters) != len(self.unit_costs) or not self.diameters:
            raise NetworkError("catalog needs matching, non-empty diameter and cost lists")
        for a, b in zip(self.diameters, self.diameters[1:]):
            if not b > a:
                raise NetworkError("catalog diameters must be strictly increasing")
        for a, b in zip(self.unit_costs, self.unit_costs[1:]):
            if b < a:
                raise NetworkError("catalog costs must be non-decreasing")

    def __len__(self) -> int:
        return len(self.diameters)

    def diameter(self, index: int) -> float:
        return self.diameters[index - 1]

    def cost(self, index: int) -> float:
        return self.unit_costs[index - 1]

    def index_of(self, diameter: float, rel_tol: float = 1e-9) -> int:
        """1-based index of ``diameter`` (metres); ``KeyError`` if absent."""
        for i, d in enumerate(self.diameters, start=1):
            if math.isclose(d, diameter, rel_tol=rel_tol, abs_tol=1e-12):
                return i
        raise KeyError(diameter)


@dataclass(frozen=True)
class Design:
    """Catalog indices (1-based), one per decision arc in declaration order."""

    indices: tuple

    def __init__(self, indices: Iterable[int]):
        object.__setattr__(self, "indices", tuple(int(i) for i in indices))

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.int64)


@dataclass(frozen=True)
class Link:
    """One pipe of the hydraulic multigraph.

    A ``parallel`` arc yields two links: the existing pipe (fixed diameter)
    and the optional duplicate (``decision`` set).
    """

    id: str
    arc: int
    from_idx: int
    to_idx: int
    length: float
    roughness: float
    diameter: Optional[float]
    decision: Optional[int]


@dataclass(frozen=True)
class Network:
    nodes: tuple
    reservoirs: tuple
    arcs: tuple
    catalog: DiameterCatalog
    hazen_williams_omega: float = 10.6744
    alpha: float = 1.852
    beta: float = 4.871
    units: Units = field(default_factory=Units)
    name: str = ""

    def __post_init__(self):
        validate(self)

    # -- lookups ----------------------------------------------------------
    @cached_property
    def node_index(self) -> dict:
        return {n.id: i for i, n in enumerate(self.nodes)}

    @cached_property
    def reservoir_indices(self) -> tuple:
        return tuple(self.node_index[r.node_id] for r in self.reservoirs)

    @cached_property
    def junction_indices(self) -> tuple:
        res = set(self.reservoir_indices)
        return tuple(i for i in range(len(self.nodes)) if i not in res)

    @cached_property
    def decision_arcs(self) -> tuple:
        """Indices into ``arcs`` of decision pipes; this is the Design order."""
        return tuple(i for i, a in enumerate(self.arcs) if a.is_decision)

    @property
    def n_decisions(self) -> int:
        return len(self.decision_arcs)

    @cached_property
    def links(self) -> tuple:
        out = []
        position = {a: k for k, a in enumerate(self.decision_arcs)}
        for i, a in enumerate(self.arcs):
            u, v = self.node_index[a.from_node], self.node_index[a.to_node]
            if a.kind == "fixed":
                out.append(Link(a.id, i, u, v, a.length, a.roughness, a.diameter, None))
            elif a.kind == "decision":
                out.append(Link(a.id, i, u, v, a.length, a.roughness, None, position[i]))
            else:
                out.append(Link(a.id, i, u, v, a.length, a.roughness, a.diameter, None))
                out.append(Link(a.id + "+", i, u, v, a.length, a.roughness, None, position[i]))
        return tuple(out)

    @cached_property
    def decision_links(self) -> np.ndarray:
        """Link index carrying each design position."""
        out = np.empty(self.n_decisions, dtype=np.int64)
        for j, link in enumerate(self.links):
            if link.decision is not None:
                out[link.decision] = j
        return out

    @property
    def cycle_dimension(self) -> int:
        """Independent loops plus reservoir-to-reservoir paths, all links present."""
        return len(self.links) - len(self.junction_indices)

    @property
    def total_demand(self) -> float:
        return sum(self.nodes[i].demand for i in self.junction_indices)

    def with_omega(self, omega: float, alpha: Optional[float] = None,
                   beta: Optional[float] = None) -> "Network":
        """Copy using ``omega``; exponents default to the convention paired with it."""
        pa, pb = HW_CONVENTIONS.get(omega, (self.alpha, self.beta))
        return replace(self, hazen_williams_omega=omega,
                       alpha=pa if alpha is None else alpha,
                       beta=pb if beta is None else beta)

    def link_diameters(self, design: Design | Sequence[int] | np.ndarray) -> np.ndarray:
        idx = np.asarray(tuple(design) if isinstance(design, Design) else design, dtype=np.int64)
        if idx.shape != (self.n_decisions,):
            raise ValueError(f"design has {idx.size} entries, network has {self.n_decisions} decision pipes")
        if idx.size and (idx.min() < 1 or idx.max() > len(self.catalog)):
            raise ValueError("design index outside catalog range")
        cat = np.asarray(self.catalog.diameters)
        d = np.empty(len(self.links))
        for j, link in enumerate(self.links):
            d[j] = link.diameter if link.decision is None else cat[idx[link.decision] - 1]
        return d


def validate(net: Network) -> None:
    """Structural checks shared by the parser and programmatic construction."""
    ids = [n.id for n in net.nodes]
    if len(set(ids)) != len(ids):
        raise NetworkError("duplicate node id")
    known = set(ids)
    if not net.reservoirs:
        raise NetworkError("at least one reservoir is required")
    for r in net.reservoirs:
        if r.node_id not in known:
            raise NetworkError(f"unknown node {r.node_id!r} in reservoir")
        if not r.fixed_head > 0:
            raise NetworkError(f"reservoir {r.node_id}: fixed head must be positive")
    arc_ids = [a.id for a in net.arcs]
    if len(set(arc_ids)) != len(arc_ids):
        raise NetworkError("duplicate pipe id")
    for a in net.arcs:
        for end in (a.from_node, a.to_node):
            if end not in known:
                raise NetworkError(f"pipe {a.id}: unknown node {end!r}")
        if a.from_node == a.to_node:
            raise NetworkError(f"pipe {a.id}: from and to nodes coincide")
        if not (a.length > 0 and a.roughness > 0):
            raise NetworkError(f"pipe {a.id}: length and roughness must be positive")
        if a.kind not in ARC_KINDS:
            raise NetworkError(f"pipe {a.id}: unknown kind {a.kind!r}")
        if a.kind in ("fixed", "parallel") and not (a.diameter and a.diameter > 0):
            raise NetworkError(f"pipe {a.id}: {a.kind} pipe needs a positive diameter")
    cut_off = unreachable_nodes(net.nodes, net.reservoirs, net.arcs)
    if cut_off:
        raise NetworkError(f"disconnected graph: node(s) {', '.join(cut_off)} cannot be reached "
                           "from a reservoir")
    if len(net.reservoirs) == 1:
        total = sum(n.demand for n in net.nodes)
        scale = max(1.0, sum(abs(n.demand) for n in net.nodes))
        res_demand = net.nodes[net.node_index[net.reservoirs[0].node_id]].demand
        if res_demand != 0.0 and abs(total) > 1e-9 * scale:
            raise NetworkError(f"demands do not balance: net sum {total:.3e} m3/s")


def unreachable_nodes(nodes, reservoirs, arcs) -> list:
    """Ids of nodes with no pipe path to any reservoir."""
    idx = {n.id: i for i, n in enumerate(nodes)}
    adj = [[] for _ in nodes]
    for a in arcs:
        adj[idx[a.from_node]].append(idx[a.to_node])
        adj[idx[a.to_node]].append(idx[a.from_node])
    seen = {idx[r.node_id] for r in reservoirs}
    queue = deque(seen)
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return [n.id for i, n in enumerate(nodes) if i not in seen]


def resistance_factor(link: Link | PipeArc, diameter: float, net: Network) -> float:
    """Hazen-Williams resistance r with head loss = r * Q * |Q|**(alpha - 1)."""
    if diameter <= 0:
        raise ClosedArcError(f"pipe {link.id} is closed (zero diameter)")
    return (net.hazen_williams_omega * link.length
            / (link.roughness ** net.alpha * diameter ** net.beta))


def design_cost(design: Design | Sequence[int], net: Network) -> float:
    idx = tuple(design)
    if len(idx) != net.n_decisions:
        raise ValueError("design length does not match the network")
    total = 0.0
    for k, arc_i in enumerate(net.decision_arcs):
        total += net.arcs[arc_i].length * net.catalog.cost(idx[k])
    return total


# -- text format ------------------------------------------------------------

_SECTIONS = ("META", "NODES", "RESERVOIRS", "PIPES", "CATALOG")


def _num(token: str, lineno: int, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise NetworkError(f"malformed {what}: {token!r} is not a number", lineno) from None
    if not math.isfinite(value):
        raise NetworkError(f"malformed {what}: {token!r}", lineno)
    return value


def parse_network(text: str, name: str = "") -> Network:
    """Parse the sectioned network format; see README for the grammar."""
    rows = {s: [] for s in _SECTIONS}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or line[1:-1].strip().upper() not in _SECTIONS:
                raise NetworkError(f"malformed section header {line!r}", lineno)
            section = line[1:-1].strip().upper()
            continue
        if section is None:
            raise NetworkError("malformed section: data before any section header", lineno)
        rows[section].append((lineno, line.split()))

    meta = {}
    for lineno, tok in rows["META"]:
        if len(tok) != 2:
            raise NetworkError("malformed META entry, expected 'key value'", lineno)
        meta[tok[0].lower()] = (tok[1], lineno)
    try:
        units = Units(
            length=meta.get("length", ("m",))[0],
            diameter=meta.get("diameter", ("m",))[0],
            demand=meta.get("demand", ("m3/s",))[0],
            head=meta.get("head", meta.get("length", ("m",)))[0],
        )
    except NetworkError as err:
        raise NetworkError(err.reason, meta.get("length", (None, None))[1]) from None
    omega = _num(meta["omega"][0], meta["omega"][1], "omega") if "omega" in meta else 10.6744
    default_a, default_b = HW_CONVENTIONS.get(omega, (1.852, 4.871))
    alpha = _num(meta["alpha"][0], meta["alpha"][1], "alpha") if "alpha" in meta else default_a
    beta = _num(meta["beta"][0], meta["beta"][1], "beta") if "beta" in meta else default_b
    if "name" in meta:
        name = meta["name"][0]

    lf, df, qf, hf = units.length_factor, units.diameter_factor, units.demand_factor, units.head_factor

    nodes, seen = [], {}
    for lineno, tok in rows["NODES"]:
        if len(tok) != 5:
            raise NetworkError("malformed NODES row, expected 'id demand ground kind value'", lineno)
        nid, kind = tok[0], tok[3].lower()
        if nid in seen:
            raise NetworkError(f"duplicate node {nid!r}", lineno)
        if kind not in MIN_HEAD_KINDS:
            raise NetworkError(f"malformed NODES row: minimum head kind {kind!r}", lineno)
        demand = _num(tok[1], lineno, "demand") * qf
        ground = _num(tok[2], lineno, "ground level") * hf
        value = _num(tok[4], lineno, "minimum head") * hf
        seen[nid] = lineno
        nodes.append(NodeRecord(nid, demand, ground,
                                value if kind == "pressure" else None,
                                value if kind == "total" else None))

    reservoirs = []
    for lineno, tok in rows["RESERVOIRS"]:
        if len(tok) != 2:
            raise NetworkError("malformed RESERVOIRS row, expected 'node head'", lineno)
        if tok[0] not in seen:
            raise NetworkError(f"unknown node {tok[0]!r} in reservoir", lineno)
        head = _num(tok[1], lineno, "fixed head") * hf
        if not head > 0:
            raise NetworkError("reservoir fixed head must be positive", lineno)
        reservoirs.append(Reservoir(tok[0], head))
    if not reservoirs:
        raise NetworkError("malformed section: RESERVOIRS is empty")

    arcs, arc_ids = [], set()
    for lineno, tok in rows["PIPES"]:
        if len(tok) not in (6, 7):
            raise NetworkError("malformed PIPES row, expected 'id from to length roughness kind [diameter]'", lineno)
        pid, a, b, kind = tok[0], tok[1], tok[2], tok[5].lower()
        for end in (a, b):
            if end not in seen:
                raise NetworkError(f"pipe {pid}: unknown node {end!r}", lineno)
        if pid in arc_ids:
            raise NetworkError(f"duplicate pipe {pid!r}", lineno)
        if kind not in ARC_KINDS:
            raise NetworkError(f"malformed PIPES row: kind {kind!r}", lineno)
        if a == b:
            raise NetworkError(f"pipe {pid}: from and to nodes coincide", lineno)
        length = _num(tok[3], lineno, "length") * lf
        rough = _num(tok[4], lineno, "roughness")
        if not (length > 0 and rough > 0):
            raise NetworkError(f"pipe {pid}: length and roughness must be positive", lineno)
        diameter = None
        if kind in ("fixed", "parallel"):
            if len(tok) != 7:
                raise NetworkError(f"pipe {pid}: {kind} pipe needs a diameter", lineno)
            diameter = _num(tok[6], lineno, "diameter") * df
        elif len(tok) == 7:
            raise NetworkError(f"pipe {pid}: decision pipe takes no diameter", lineno)
        arc_ids.add(pid)
        arcs.append(PipeArc(pid, a, b, length, rough, kind, diameter))

    diameters, costs, prev_no = [], [], 0
    for lineno, tok in rows["CATALOG"]:
        if len(tok) != 3:
            raise NetworkError("malformed CATALOG row, expected 'index diameter cost'", lineno)
        no = int(_num(tok[0], lineno, "catalog index"))
        if no != prev_no + 1:
            raise NetworkError("catalog indices must run 1, 2, 3, ...", lineno)
        prev_no = no
        d = _num(tok[1], lineno, "diameter") * df
        c = _num(tok[2], lineno, "unit cost") / lf
        if diameters and not d > diameters[-1]:
            raise NetworkError("non-increasing catalog diameters", lineno)
        if costs and c < costs[-1]:
            raise NetworkError("non-increasing catalog costs", lineno)
        diameters.append(d)
        costs.append(c)
    if not diameters:
        raise NetworkError("malformed section: CATALOG is empty")

    try:
        return Network(tuple(nodes), tuple(reservoirs), tuple(arcs),
                       DiameterCatalog(tuple(diameters), tuple(costs)),
                       omega, alpha, beta, units, name)
    except NetworkError as err:
        if err.line is not None:
            raise
        # whole-network checks: point at the first node involved
        line = None
        if err.reason.startswith("disconnected graph"):
            line = seen[unreachable_nodes(nodes, reservoirs, arcs)[0]]
        elif reservoirs:
            line = seen[reservoirs[0].node_id]
        raise NetworkError(err.reason, line) from None


def load_network(path) -> Network:
    from pathlib import Path

    p = Path(path)
    return parse_network(p.read_text(), name=p.stem)


def serialize_network(net: Network, units: Optional[Units] = None) -> str:
    """Render ``net`` in the text format, in ``units`` (default: its own)."""
    u = units or net.units
    lf, df, qf, hf = u.length_factor, u.diameter_factor, u.demand_factor, u.head_factor
    out = ["[META]"]
    if net.name:
        out.append(f"name {net.name}")
    out += [f"omega {net.hazen_williams_omega!r}", f"alpha {net.alpha!r}", f"beta {net.beta!r}",
            f"length {u.length}", f"diameter {u.diameter}", f"demand {u.demand}", f"head {u.head}",
            "", "[NODES]"]
    for n in net.nodes:
        kind = "pressure" if n.min_pressure_head is not None else "total"
        out.append(f"{n.id} {n.demand / qf!r} {n.ground_level / hf!r} {kind} {n.min_head_value / hf!r}")
    out += ["", "[RESERVOIRS]"]
    out += [f"{r.node_id} {r.fixed_head / hf!r}" for r in net.reservoirs]
    out += ["", "[PIPES]"]
    for a in net.arcs:
        row = f"{a.id} {a.from_node} {a.to_node} {a.length / lf!r} {a.roughness!r} {a.kind}"
        if a.diameter is not None:
            row += f" {a.diameter / df!r}"
        out.append(row)
    out += ["", "[CATALOG]"]
    for i, (d, c) in enumerate(zip(net.catalog.diameters, net.catalog.unit_costs), start=1):
        out.append(f"{i} {d / df!r} {c * lf!r}")
    return "\n".join(out) + "\n"
