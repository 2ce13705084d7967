"""Edge-assembly crossover, single AB-cycle variant (EAX-1AB).

The crossover works on undirected edge sets: AB-cycles partition the
symmetric difference of the parents' edges into closed alternating cycles;
exchanging one cycle inside parent A yields a 2-regular intermediate graph
whose sub-tours are then spliced back into a single Hamiltonian cycle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instance import Tour, TtpInstance, distance

# Above this city count the merge step restricts reconnection candidates to
# edges near e1's endpoints instead of scanning every foreign edge.
MERGE_EXHAUSTIVE_LIMIT = 500
MERGE_NEIGHBORS = 10


@dataclass(frozen=True)
class AbCycle:
    """Closed alternating cycle; steps are (u, v, origin) edges, origin 'A'/'B'."""

    steps: tuple[tuple[int, int, str], ...]

    def a_edges(self) -> list[tuple[int, int]]:
        return [(min(u, v), max(u, v)) for u, v, o in self.steps if o == "A"]

    def b_edges(self) -> list[tuple[int, int]]:
        return [(min(u, v), max(u, v)) for u, v, o in self.steps if o == "B"]

    def __len__(self) -> int:
        return len(self.steps)


@dataclass
class IntermediateTour:
    """2-regular graph left by an AB-cycle exchange, split into sub-tours."""

    neighbors: list[list[int]]   # index by city, two neighbors each (index 0 unused)
    subtours: list[list[int]]    # node sequences, each a closed cycle

    def edge_set(self) -> set[tuple[int, int]]:
        seen = set()
        for seq in self.subtours:
            for u, v in zip(seq, seq[1:] + seq[:1]):
                seen.add((u, v) if u < v else (v, u))
        return seen


def _edge_set(tour: Tour) -> set[tuple[int, int]]:
    return set(tour.edges())


def build_ab_cycles(parent_a: Tour, parent_b: Tour, rng: np.random.Generator) -> list[AbCycle]:
    """Decompose the parents' edge symmetric difference into AB-cycles.

    Walks alternate between unused A-origin and B-origin edges; at degree-4
    nodes the continuation edge is picked via rng.  Identical parents give an
    empty list.
    """
    ea = _edge_set(parent_a)
    eb = _edge_set(parent_b)
    a_only = ea - eb
    b_only = eb - ea
    if not a_only:
        return []

    n = parent_a.n
    a_adj: list[list[int]] = [[] for _ in range(n + 1)]
    b_adj: list[list[int]] = [[] for _ in range(n + 1)]
    for u, v in sorted(a_only):
        a_adj[u].append(v)
        a_adj[v].append(u)
    for u, v in sorted(b_only):
        b_adj[u].append(v)
        b_adj[v].append(u)

    cycles: list[AbCycle] = []
    for start in range(1, n + 1):
        while a_adj[start]:
            steps: list[tuple[int, int, str]] = []
            cur = start
            need = "A"
            while True:
                adj = a_adj if need == "A" else b_adj
                options = adj[cur]
                if not options:
                    raise AssertionError("alternating walk stuck; parents not valid tours?")
                k = int(rng.integers(len(options))) if len(options) > 1 else 0
                nxt = options.pop(k)
                adj[nxt].remove(cur)
                steps.append((cur, nxt, need))
                cur = nxt
                need = "B" if need == "A" else "A"
                if cur == start and need == "A":
                    break
            cycles.append(AbCycle(tuple(steps)))
    return cycles


def apply_ab_cycle(parent_a: Tour, cycle: AbCycle) -> IntermediateTour:
    """Exchange the cycle's A-edges for its B-edges inside parent A's tour."""
    n = parent_a.n
    order = parent_a.order
    neighbors: list[list[int]] = [[] for _ in range(n + 1)]
    for i in range(n):
        u = int(order[i])
        v = int(order[(i + 1) % n])
        neighbors[u].append(v)
        neighbors[v].append(u)
    for u, v, origin in cycle.steps:
        if origin == "A":
            neighbors[u].remove(v)
            neighbors[v].remove(u)
        else:
            neighbors[u].append(v)
            neighbors[v].append(u)

    subtours: list[list[int]] = []
    visited = [False] * (n + 1)
    for s in range(1, n + 1):
        if visited[s]:
            continue
        seq = [s]
        visited[s] = True
        prev, cur = s, neighbors[s][0]
        while cur != s:
            seq.append(cur)
            visited[cur] = True
            nb = neighbors[cur]
            nxt = nb[1] if nb[0] == prev else nb[0]
            prev, cur = cur, nxt
        subtours.append(seq)
    return IntermediateTour(neighbors=neighbors, subtours=subtours)


def _replace_neighbor(neighbors: list[list[int]], u: int, old: int, new: int) -> None:
    nb = neighbors[u]
    nb[nb.index(old)] = new


def _walk_cycle(neighbors: list[list[int]], start: int) -> list[int]:
    seq = [start]
    prev, cur = start, neighbors[start][0]
    while cur != start:
        seq.append(cur)
        nb = neighbors[cur]
        nxt = nb[1] if nb[0] == prev else nb[0]
        prev, cur = cur, nxt
    return seq


def merge_subtours(inst: TtpInstance, intermediate: IntermediateTour) -> Tour:
    """Splice all sub-tours into one Hamiltonian cycle.

    Repeatedly takes the sub-tour r with fewest edges and removes one edge
    e1=(a,b) from r and one edge e2=(c,d) from the rest, reconnecting with
    the pair of new edges minimizing -d(e1)-d(e2)+d(e3)+d(e4).  Ties go to
    the first candidate in iteration order, so merges are deterministic.
    """
    subtours = [list(s) for s in intermediate.subtours]
    if len(subtours) == 1:
        return Tour(subtours[0])
    neighbors = [list(nb) for nb in intermediate.neighbors]
    n = sum(len(s) for s in subtours)
    D = inst.dist_matrix

    while len(subtours) > 1:
        r_i = min(range(len(subtours)), key=lambda i: len(subtours[i]))
        r_seq = subtours[r_i]
        ra = np.array(r_seq, dtype=np.int64)
        rb = np.roll(ra, -1)

        owner: list[int] = []
        ca_l: list[int] = []
        cb_l: list[int] = []
        for t_i, seq in enumerate(subtours):
            if t_i == r_i:
                continue
            for u, v in zip(seq, seq[1:] + seq[:1]):
                owner.append(t_i)
                ca_l.append(u)
                cb_l.append(v)
        ca = np.array(ca_l, dtype=np.int64)
        cb = np.array(cb_l, dtype=np.int64)

        if D is not None and n <= MERGE_EXHAUSTIVE_LIMIT:
            base = -D[ra, rb][:, None] - D[ca, cb][None, :]
            cost1 = base + D[ra[:, None], ca[None, :]] + D[rb[:, None], cb[None, :]]
            cost2 = base + D[ra[:, None], cb[None, :]] + D[rb[:, None], ca[None, :]]
            k1 = int(np.argmin(cost1))
            k2 = int(np.argmin(cost2))
            if cost1.flat[k1] <= cost2.flat[k2]:
                ei, ej, straight = divmod(k1, len(ca))[0], k1 % len(ca), True
            else:
                ei, ej, straight = divmod(k2, len(ca))[0], k2 % len(ca), False
        else:
            ei, ej, straight = _restricted_merge_search(inst, ra, rb, ca, cb)

        a, b = int(ra[ei]), int(rb[ei])
        c, d = int(ca[ej]), int(cb[ej])
        if straight:
            _replace_neighbor(neighbors, a, b, c)
            _replace_neighbor(neighbors, c, d, a)
            _replace_neighbor(neighbors, b, a, d)
            _replace_neighbor(neighbors, d, c, b)
        else:
            _replace_neighbor(neighbors, a, b, d)
            _replace_neighbor(neighbors, d, c, a)
            _replace_neighbor(neighbors, b, a, c)
            _replace_neighbor(neighbors, c, d, b)

        merged = _walk_cycle(neighbors, a)
        t_i = owner[ej]
        subtours = [s for i, s in enumerate(subtours) if i not in (r_i, t_i)]
        subtours.append(merged)
    return Tour(subtours[0])


def _restricted_merge_search(inst: TtpInstance, ra: np.ndarray, rb: np.ndarray,
                             ca: np.ndarray, cb: np.ndarray) -> tuple[int, int, bool]:
    """Merge search restricted to e2 edges near e1's endpoints (large n)."""
    D = inst.dist_matrix
    coords = inst.coords

    def nearest(u: int) -> np.ndarray:
        if D is not None:
            row = D[u]
        else:
            row = np.hypot(coords[:, 0] - coords[u, 0], coords[:, 1] - coords[u, 1])
        k = min(MERGE_NEIGHBORS + 1, row.shape[0] - 1)
        return np.argpartition(row[1:], k)[:k] + 1

    best = (np.inf, 0, 0, True)
    for ei in range(ra.shape[0]):
        a, b = int(ra[ei]), int(rb[ei])
        near = set(nearest(a).tolist()) | set(nearest(b).tolist())
        cand = np.flatnonzero(np.isin(ca, list(near)) | np.isin(cb, list(near)))
        if cand.size == 0:
            cand = np.arange(ca.shape[0])
        d1 = distance(inst, a, b)
        for ej in cand:
            c, d = int(ca[ej]), int(cb[ej])
            base = -d1 - distance(inst, c, d)
            g1 = base + distance(inst, a, c) + distance(inst, b, d)
            g2 = base + distance(inst, a, d) + distance(inst, b, c)
            if g1 < best[0]:
                best = (g1, ei, int(ej), True)
            if g2 < best[0]:
                best = (g2, ei, int(ej), False)
    return best[1], best[2], best[3]


def eax_1ab(inst: TtpInstance, parent_a: Tour, parent_b: Tour,
            rng: np.random.Generator) -> Tour:
    """One EAX-1AB offspring: apply one random AB-cycle, then merge sub-tours.

    Identical parents (empty symmetric difference) return a copy of parent A.
    """
    cycles = build_ab_cycles(parent_a, parent_b, rng)
    if not cycles:
        return Tour(parent_a.order)
    cycle = cycles[int(rng.integers(len(cycles)))]
    intermediate = apply_ab_cycle(parent_a, cycle)
    if len(intermediate.subtours) == 1:
        return Tour(intermediate.subtours[0])
    return merge_subtours(inst, intermediate)
