"""Least-cost pipe sizing for water distribution networks.

Loop-flow Newton-Raphson hydraulics plus a discrete state transition search
over commercial diameters.
"""
from .network import (
    Design, DiameterCatalog, Network, NetworkError, NodeRecord, PipeArc, Reservoir,
    design_cost, load_network, parse_network, resistance_factor, serialize_network,
)
from .hydraulics import (
    FlowDecomposition, HydraulicState, SolverSettings, check_pressure, decompose,
    loop_residuals, solve_flows,
)

__version__ = "0.1.0"
