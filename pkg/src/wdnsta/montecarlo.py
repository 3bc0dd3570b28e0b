"""Toy risk/restore experiment on a scalar maximised by uniform draws.

Each run starts from ``f* = f = 0.5``.  Every iteration draws ``r1, r2, r3``
uniform on [0, 1): ``f`` takes ``r1`` if that is higher, or with probability
``p2`` regardless; ``f*`` keeps the maximum seen; ``f`` is reset to ``f*``
with probability ``p1``.  Cells report the optimality gap ``1 - f*``.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from . import kernels

DEFAULT_GRID = (0.1, 0.3, 0.5, 0.7, 0.9)


@dataclass(frozen=True)
class MonteCarloCell:
    p1: float
    p2: float
    mean_gap: float
    std_gap: float
    runs: int
    iterations: int


def exact_mean_gap_greedy(iterations: int) -> float:
    """E[1 - max(0.5, U_1..U_n)] for n uniforms, the p2 = 0, p1 = 1 limit."""
    n = iterations
    return (1.0 - 0.5 ** (n + 1)) / (n + 1)


def simulate_gaps(p1: float, p2: float, iterations: int, runs: int,
                  rng: np.random.Generator, chunk: int = 2000) -> np.ndarray:
    """Gap ``1 - f*`` for each of ``runs`` independent runs."""
    out = np.empty(runs)
    done = 0
    while done < runs:
        n = min(chunk, runs - done)
        draws = rng.random((n, iterations, 3))
        out[done:done + n] = 1.0 - kernels.mc_runs(draws, p1, p2)
        done += n
    return out


def monte_carlo_study(p1_grid: Sequence[float] = DEFAULT_GRID, p2_grid: Sequence[float] = DEFAULT_GRID,
                      iterations: int = 1000, runs: int = 10_000, seed: int = 0) -> List[MonteCarloCell]:
    """One cell per (p1, p2) pair; cell ``(i, j)`` uses stream ``spawn_key=(i, j)``."""
    if not len(p1_grid) or not len(p2_grid):
        raise ValueError("probability grids must be non-empty")
    if iterations < 0 or runs < 1:
        raise ValueError("need iterations >= 0 and runs >= 1")
    cells = []
    for i, p1 in enumerate(p1_grid):
        for j, p2 in enumerate(p2_grid):
            rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(i, j))))
            gaps = simulate_gaps(float(p1), float(p2), iterations, runs, rng)
            std = float(gaps.std(ddof=1)) if runs > 1 else 0.0
            cells.append(MonteCarloCell(float(p1), float(p2), float(gaps.mean()), std, runs, iterations))
    return cells


def cells_to_csv(cells: Sequence[MonteCarloCell]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["p1", "p2", "mean_gap", "std_gap", "runs", "iterations"])
    for c in cells:
        w.writerow([c.p1, c.p2, repr(c.mean_gap), repr(c.std_gap), c.runs, c.iterations])
    return buf.getvalue()


def format_table(cells: Sequence[MonteCarloCell]) -> str:
    """Grid with p1 down the rows and p2 across, ``mean +- std`` per cell."""
    p1s = sorted({c.p1 for c in cells})
    p2s = sorted({c.p2 for c in cells})
    lookup = {(c.p1, c.p2): c for c in cells}
    lines = ["p1\\p2 " + " ".join(f"{p2:>23g}" for p2 in p2s)]
    for p1 in p1s:
        row = [f"{lookup[p1, p2].mean_gap:.4e} +- {lookup[p1, p2].std_gap:.4e}" for p2 in p2s]
        lines.append(f"{p1:<6g} " + " ".join(f"{r:>23s}" for r in row))
    return "\n".join(lines) + "\n"
