"""Exact 0/1 knapsack solver used to anchor the profit axis of the archive."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instance import TtpInstance

DEFAULT_MEMORY_BUDGET = 2 * 1024 ** 3  # bytes for the DP keep table


class KnapsackCapacityError(MemoryError):
    """DP table would exceed the memory budget; use solve_kp_greedy instead."""


@dataclass(frozen=True)
class KpResult:
    g_star: float
    selection: np.ndarray  # (m,) bool
    exact: bool = True


def solve_kp(inst: TtpInstance, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> KpResult:
    """Optimal knapsack profit and one optimal selection, by capacity DP.

    Requires integral weights and capacity (benchmark instances are integral).
    O(m*W) time, O(W) profit array plus an m*(W+1) boolean keep table for
    selection reconstruction.
    """
    w = inst.item_weight
    W = inst.capacity
    if not float(W).is_integer() or not np.all(w == np.floor(w)):
        raise ValueError("knapsack DP requires integer weights and capacity")
    W = int(W)
    m = inst.m
    table_bytes = m * (W + 1)
    if table_bytes > memory_budget:
        raise KnapsackCapacityError(
            f"DP keep table needs {table_bytes} bytes > budget {memory_budget}; "
            "use solve_kp_greedy for a near-optimal bound")

    profit = inst.item_profit
    weights = w.astype(np.int64)
    best = np.zeros(W + 1)
    keep = np.zeros((m, W + 1), dtype=bool)
    for j in range(m):
        wj = int(weights[j])
        pj = profit[j]
        if wj > W:
            continue
        if wj == 0:
            if pj > 0:
                best += pj
                keep[j, :] = True
            continue
        take = best[: W + 1 - wj] + pj
        improves = take > best[wj:]
        keep[j, wj:] = improves
        best[wj:] = np.where(improves, take, best[wj:])

    selection = np.zeros(m, dtype=bool)
    c = W
    for j in range(m - 1, -1, -1):
        if keep[j, c]:
            selection[j] = True
            c -= int(weights[j])
    return KpResult(g_star=float(best[W]), selection=selection, exact=True)


def solve_kp_greedy(inst: TtpInstance) -> KpResult:
    """Greedy profit/weight fallback for instances beyond the DP memory budget."""
    w = inst.item_weight
    p = inst.item_profit
    ratio = np.where(w > 0, p / np.maximum(w, 1e-300), np.inf)
    order = np.argsort(-ratio, kind="stable")
    selection = np.zeros(inst.m, dtype=bool)
    total = 0.0
    for j in order:
        if total + w[j] <= inst.capacity:
            selection[j] = True
            total += float(w[j])
    return KpResult(g_star=float(p[selection].sum()), selection=selection, exact=False)
