"""Traveling thief problem instances, tours, packings and objective functions.

A TTP instance couples a symmetric Euclidean TSP with a 0/1 knapsack: the
thief follows a cyclic tour, picks items at their home cities, and pays
knapsack rent per unit of travel time.  Speed drops linearly with the weight
carried so far, from ``nu_max`` (empty) down to ``nu_min`` (full knapsack).
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable

import numpy as np

# Above this size the full distance matrix is not cached (memory grows as n^2).
_DIST_MATRIX_LIMIT = 2048


class ParseError(ValueError):
    """Raised when an instance file is malformed; message names the line."""


class InfeasiblePackingError(ValueError):
    """Raised when a packing exceeds the knapsack capacity."""


@dataclass(eq=False)
class TtpInstance:
    """Immutable TTP problem definition.

    Arrays are 1-based for cities (row 0 of ``coords`` is unused) and 0-based
    for items.  Instances are immutable after construction and safe to share
    across threads/processes.
    """

    name: str
    coords: np.ndarray            # (n+1, 2) float64, row 0 unused
    edge_weight_type: str         # "CEIL_2D" | "EUC_2D"
    item_profit: np.ndarray       # (m,) float64
    item_weight: np.ndarray       # (m,) float64
    item_city: np.ndarray         # (m,) int64, values in 2..n
    capacity: float
    nu_min: float
    nu_max: float
    renting_ratio: float

    def __post_init__(self) -> None:
        self.coords = np.ascontiguousarray(self.coords, dtype=np.float64)
        self.item_profit = np.ascontiguousarray(self.item_profit, dtype=np.float64)
        self.item_weight = np.ascontiguousarray(self.item_weight, dtype=np.float64)
        self.item_city = np.ascontiguousarray(self.item_city, dtype=np.int64)
        for a in (self.coords, self.item_profit, self.item_weight, self.item_city):
            a.setflags(write=False)
        n, m = self.n, self.m
        if n < 3:
            raise ValueError(f"need at least 3 cities, got {n}")
        if m < 1:
            raise ValueError("need at least one item")
        if not (0 < self.nu_min < self.nu_max):
            raise ValueError("speeds must satisfy 0 < nu_min < nu_max")
        if self.capacity <= 0:
            raise ValueError("capacity must be positive")
        if self.renting_ratio < 0:
            raise ValueError("renting ratio must be non-negative")
        if self.edge_weight_type not in ("CEIL_2D", "EUC_2D"):
            raise ValueError(f"unsupported edge weight type {self.edge_weight_type!r}")
        if np.any(self.item_city < 2) or np.any(self.item_city > n):
            raise ValueError("items must live in cities 2..n")
        if np.any(self.item_profit < 0) or np.any(self.item_weight < 0):
            raise ValueError("item profits and weights must be non-negative")

    @property
    def n(self) -> int:
        return self.coords.shape[0] - 1

    @property
    def m(self) -> int:
        return self.item_profit.shape[0]

    @property
    def nu(self) -> float:
        """Speed loss per unit of carried weight: (nu_max - nu_min) / W."""
        return (self.nu_max - self.nu_min) / self.capacity

    @cached_property
    def dist_matrix(self) -> np.ndarray | None:
        """Full (n+1, n+1) distance matrix, or None when n is too large."""
        if self.n > _DIST_MATRIX_LIMIT:
            return None
        xy = self.coords
        d = np.hypot(xy[:, 0, None] - xy[None, :, 0], xy[:, 1, None] - xy[None, :, 1])
        if self.edge_weight_type == "CEIL_2D":
            d = np.ceil(d)
        else:
            d = np.floor(d + 0.5)
        np.fill_diagonal(d, 0.0)
        d[0, :] = 0.0
        d[:, 0] = 0.0
        return d


class Tour:
    """A cyclic permutation of cities 1..n, stored starting at city 1.

    Orientation is preserved: a tour and its reversal are distinct objects
    with equal length.
    """

    __slots__ = ("order",)

    def __init__(self, order: Iterable[int]):
        arr = np.ascontiguousarray(list(order) if not isinstance(order, np.ndarray) else order,
                                   dtype=np.int64)
        n = arr.shape[0]
        if n < 3:
            raise ValueError("a tour needs at least 3 cities")
        counts = np.bincount(arr, minlength=n + 1)
        if counts[0] != 0 or arr.max() != n or np.any(counts[1:] != 1):
            raise ValueError("tour must be a permutation of 1..n")
        start = int(np.flatnonzero(arr == 1)[0])
        if start != 0:
            arr = np.roll(arr, -start)
        arr.setflags(write=False)
        self.order = arr

    @property
    def n(self) -> int:
        return self.order.shape[0]

    def positions(self) -> np.ndarray:
        """pos[city] = index of city in the tour (pos[0] unused)."""
        pos = np.empty(self.n + 1, dtype=np.int64)
        pos[self.order] = np.arange(self.n)
        pos[0] = -1
        return pos

    def edges(self) -> list[tuple[int, int]]:
        """The n undirected edges as canonical (min, max) pairs."""
        o = self.order
        nxt = np.roll(o, -1)
        lo = np.minimum(o, nxt)
        hi = np.maximum(o, nxt)
        return list(zip(lo.tolist(), hi.tolist()))

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Tour) and np.array_equal(self.order, other.order)

    def __hash__(self) -> int:
        return hash(self.order.tobytes())

    def __repr__(self) -> str:
        body = ",".join(map(str, self.order[:8]))
        tail = ",..." if self.n > 8 else ""
        return f"Tour([{body}{tail}])"


def distance(inst: TtpInstance, u: int, v: int) -> float:
    """Distance between cities u and v under the instance's rounding rule."""
    d = inst.dist_matrix
    if d is not None:
        return float(d[u, v])
    raw = math.hypot(inst.coords[u, 0] - inst.coords[v, 0],
                     inst.coords[u, 1] - inst.coords[v, 1])
    if inst.edge_weight_type == "CEIL_2D":
        return float(math.ceil(raw))
    return float(math.floor(raw + 0.5))


def leg_distances(inst: TtpInstance, tour: Tour) -> np.ndarray:
    """Distances of the n consecutive legs, closing edge last."""
    o = tour.order
    nxt = np.roll(o, -1)
    d = inst.dist_matrix
    if d is not None:
        return d[o, nxt]
    return np.array([distance(inst, int(u), int(v)) for u, v in zip(o, nxt)])


def tour_length(inst: TtpInstance, tour: Tour) -> float:
    return float(leg_distances(inst, tour).sum())


def packing_profit_weight(inst: TtpInstance, packing: np.ndarray) -> tuple[float, float]:
    """Total (profit, weight) of the selected items."""
    y = np.asarray(packing, dtype=bool)
    if y.shape != (inst.m,):
        raise ValueError(f"packing must have length {inst.m}")
    return float(inst.item_profit[y].sum()), float(inst.item_weight[y].sum())


def packing_feasible(inst: TtpInstance, packing: np.ndarray) -> bool:
    return packing_profit_weight(inst, packing)[1] <= inst.capacity


def travel_time(inst: TtpInstance, tour: Tour, packing: np.ndarray) -> float:
    """Total travel time of the loaded thief along the tour."""
    y = np.asarray(packing, dtype=bool)
    pos = tour.positions()
    w_by_pos = np.bincount(pos[inst.item_city[y]], weights=inst.item_weight[y],
                           minlength=tour.n)
    carried = np.cumsum(w_by_pos)
    speeds = inst.nu_max - inst.nu * carried
    return float((leg_distances(inst, tour) / speeds).sum())


def ttp_objective(inst: TtpInstance, tour: Tour, packing: np.ndarray) -> float:
    """TTP objective z = profit - renting_ratio * travel time.

    Raises InfeasiblePackingError when the packing exceeds capacity; an
    infeasible packing never yields a silent number.
    """
    profit, weight = packing_profit_weight(inst, packing)
    if weight > inst.capacity:
        raise InfeasiblePackingError(
            f"packing weight {weight} exceeds capacity {inst.capacity}")
    return profit - inst.renting_ratio * travel_time(inst, tour, packing)


@dataclass(frozen=True)
class Solution:
    """A tour plus packing with cached objective scores."""

    tour: Tour
    packing: np.ndarray
    f: float      # tour length
    g: float      # packing profit
    weight: float
    z: float      # TTP objective

    def __post_init__(self) -> None:
        y = np.ascontiguousarray(self.packing, dtype=bool)
        y.setflags(write=False)
        object.__setattr__(self, "packing", y)

    @classmethod
    def evaluate(cls, inst: TtpInstance, tour: Tour, packing: np.ndarray) -> "Solution":
        f = tour_length(inst, tour)
        g, w = packing_profit_weight(inst, packing)
        if w > inst.capacity:
            raise InfeasiblePackingError(
                f"packing weight {w} exceeds capacity {inst.capacity}")
        z = g - inst.renting_ratio * travel_time(inst, tour, packing)
        return cls(tour=tour, packing=packing, f=f, g=g, weight=w, z=z)

    def selected_items(self) -> list[int]:
        return np.flatnonzero(self.packing).tolist()


# ---------------------------------------------------------------------------
# Instance file parsing
# ---------------------------------------------------------------------------

_HEADER_KEYS = {
    "PROBLEM NAME": "name",
    "KNAPSACK DATA TYPE": "knapsack_data_type",
    "DIMENSION": "dimension",
    "NUMBER OF ITEMS": "number_of_items",
    "CAPACITY OF KNAPSACK": "capacity",
    "MIN SPEED": "min_speed",
    "MAX SPEED": "max_speed",
    "RENTING RATIO": "renting_ratio",
    "EDGE_WEIGHT_TYPE": "edge_weight_type",
}


def _fail(lineno: int, message: str) -> "ParseError":
    return ParseError(f"line {lineno}: {message}")


def parse_instance(text: str | io.TextIOBase) -> TtpInstance:
    """Parse the TTP benchmark text format into a TtpInstance.

    Headers are ``KEY: value`` lines; the coordinate and item sections follow
    with one whitespace-separated record per line.  Indices are 1-based.
    Errors name the offending line number.
    """
    if hasattr(text, "read"):
        text = text.read()
    lines = text.splitlines()
    header: dict[str, str] = {}
    coords: np.ndarray | None = None
    items: np.ndarray | None = None
    seen_cities: np.ndarray | None = None
    seen_items: np.ndarray | None = None

    def _int_header(key: str, lineno: int) -> int:
        try:
            return int(header[key])
        except ValueError:
            raise _fail(lineno, f"{key} must be an integer, got {header[key]!r}") from None

    i = 0
    nlines = len(lines)
    while i < nlines:
        line = lines[i].strip()
        i += 1
        if not line or line.upper() == "EOF":
            continue
        upper = line.upper()
        if upper.startswith("NODE_COORD_SECTION"):
            if "dimension" not in header:
                raise _fail(i, "NODE_COORD_SECTION before DIMENSION header")
            n = _int_header("dimension", i)
            if n < 3:
                raise _fail(i, f"DIMENSION must be at least 3, got {n}")
            coords = np.zeros((n + 1, 2))
            seen_cities = np.zeros(n + 1, dtype=bool)
            for _ in range(n):
                if i >= nlines:
                    raise _fail(nlines, "file truncated inside NODE_COORD_SECTION")
                parts = lines[i].split()
                i += 1
                if len(parts) < 3:
                    raise _fail(i, f"expected 'index x y', got {lines[i - 1]!r}")
                try:
                    idx = int(parts[0])
                    x, y = float(parts[1]), float(parts[2])
                except ValueError:
                    raise _fail(i, f"non-numeric coordinate record {lines[i - 1]!r}") from None
                if not (1 <= idx <= n):
                    raise _fail(i, f"city index {idx} out of range 1..{n}")
                if seen_cities[idx]:
                    raise _fail(i, f"duplicate city index {idx}")
                seen_cities[idx] = True
                coords[idx] = (x, y)
        elif upper.startswith("ITEMS SECTION"):
            if "number_of_items" not in header:
                raise _fail(i, "ITEMS SECTION before NUMBER OF ITEMS header")
            if coords is None:
                raise _fail(i, "ITEMS SECTION before NODE_COORD_SECTION")
            m = _int_header("number_of_items", i)
            if m < 1:
                raise _fail(i, f"NUMBER OF ITEMS must be at least 1, got {m}")
            n = coords.shape[0] - 1
            items = np.zeros((m + 1, 3))
            seen_items = np.zeros(m + 1, dtype=bool)
            for _ in range(m):
                if i >= nlines:
                    raise _fail(nlines, "file truncated inside ITEMS SECTION")
                parts = lines[i].split()
                i += 1
                if len(parts) < 4:
                    raise _fail(i, f"expected 'index profit weight city', got {lines[i - 1]!r}")
                try:
                    idx = int(parts[0])
                    profit, weight = float(parts[1]), float(parts[2])
                    city = int(parts[3])
                except ValueError:
                    raise _fail(i, f"non-numeric item record {lines[i - 1]!r}") from None
                if not (1 <= idx <= m):
                    raise _fail(i, f"item index {idx} out of range 1..{m}")
                if seen_items[idx]:
                    raise _fail(i, f"duplicate item index {idx}")
                if city == 1:
                    raise _fail(i, "items may not be assigned to city 1")
                if not (2 <= city <= n):
                    raise _fail(i, f"item city {city} out of range 2..{n}")
                seen_items[idx] = True
                items[idx] = (profit, weight, city)
        elif ":" in line:
            key, _, value = line.partition(":")
            key = key.strip().upper()
            if key in _HEADER_KEYS:
                header[_HEADER_KEYS[key]] = value.strip()
            # unknown headers are ignored for forward compatibility
        else:
            raise _fail(i, f"unrecognized line {line!r}")

    for key, label in (("dimension", "DIMENSION"),
                       ("number_of_items", "NUMBER OF ITEMS"),
                       ("capacity", "CAPACITY OF KNAPSACK"),
                       ("min_speed", "MIN SPEED"),
                       ("max_speed", "MAX SPEED"),
                       ("renting_ratio", "RENTING RATIO")):
        if key not in header:
            raise _fail(nlines, f"missing mandatory header {label}")
    if coords is None:
        raise _fail(nlines, "missing NODE_COORD_SECTION")
    if items is None:
        raise _fail(nlines, "file truncated before ITEMS SECTION")
    assert seen_cities is not None and seen_items is not None
    if not seen_cities[1:].all():
        missing = int(np.flatnonzero(~seen_cities[1:])[0]) + 1
        raise _fail(nlines, f"city {missing} has no coordinate record")
    if not seen_items[1:].all():
        missing = int(np.flatnonzero(~seen_items[1:])[0]) + 1
        raise _fail(nlines, f"item {missing} has no record")

    try:
        capacity = float(header["capacity"])
        nu_min = float(header["min_speed"])
        nu_max = float(header["max_speed"])
        renting = float(header["renting_ratio"])
    except ValueError as exc:
        raise _fail(nlines, f"non-numeric header value: {exc}") from None
    try:
        return TtpInstance(
            name=header.get("name", "unnamed"),
            coords=coords,
            edge_weight_type=header.get("edge_weight_type", "CEIL_2D"),
            item_profit=items[1:, 0],
            item_weight=items[1:, 1],
            item_city=items[1:, 2].astype(np.int64),
            capacity=capacity,
            nu_min=nu_min,
            nu_max=nu_max,
            renting_ratio=renting,
        )
    except ValueError as exc:
        raise _fail(nlines, str(exc)) from None


def load_instance(path: str | Path) -> TtpInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_instance(fh.read())
