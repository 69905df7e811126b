"""Communication clusters and the inter-robot repulsion point used as global best."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .core import Point, wrap_angle


@dataclass(frozen=True)
class CommGraph:
    n: int
    edges: tuple[tuple[int, int], ...]
    distances: tuple[float, ...]

    def neighbors(self, i: int) -> list[int]:
        out = []
        for a, b in self.edges:
            if a == i:
                out.append(b)
            elif b == i:
                out.append(a)
        return sorted(out)


@dataclass(frozen=True)
class Cluster:
    members: tuple[int, ...]

    def __len__(self):
        return len(self.members)


@dataclass(frozen=True)
class RepulsionResult:
    d_sum: float
    r_theta: float
    p_gb: Point
    # Neighbors closer than the coincidence guard were clamped to it.
    coincident: int = 0


def comm_graph(positions: Sequence[Point], comm_range: float) -> CommGraph:
    edges, dists = [], []
    for i in range(len(positions)):
        xi, yi = positions[i]
        for j in range(i + 1, len(positions)):
            d = math.hypot(positions[j][0] - xi, positions[j][1] - yi)
            if d <= comm_range:
                edges.append((i, j))
                dists.append(d)
    return CommGraph(len(positions), tuple(edges), tuple(dists))


class _DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # Smaller root wins so representatives are deterministic.
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def build_clusters(positions: Sequence[Point], comm_range: float) -> list[Cluster]:
    """Connected components of the radius graph, sorted by smallest member id."""
    if not positions:
        raise ValueError("positions must be non-empty")
    dsu = _DisjointSet(len(positions))
    for a, b in comm_graph(positions, comm_range).edges:
        dsu.union(a, b)
    groups: dict[int, list[int]] = {}
    for i in range(len(positions)):
        groups.setdefault(dsu.find(i), []).append(i)
    return sorted((Cluster(tuple(sorted(m))) for m in groups.values()), key=lambda c: c.members[0])


def repulsion(self_pos: Point, neighbor_positions: Sequence[Point], aggregate: str = "sum",
              eps: float = 0.06) -> RepulsionResult:
    """Repulsion magnitude, direction and the displaced global-best point.

    Magnitude is the sum (or mean) of inverse neighbor distances; direction is
    the angle of the summed unit vectors pointing away from each neighbor.
    ``eps`` replaces a zero distance. When the away-vectors cancel (a robot
    exactly between symmetric neighbors) the direction is undefined and
    falls back to 0 rad.
    """
    if not neighbor_positions:
        return RepulsionResult(0.0, 0.0, self_pos)
    x, y = self_pos
    inv_sum = 0.0
    ax = ay = 0.0
    coincident = 0
    for px, py in neighbor_positions:
        dx, dy = x - px, y - py
        d = math.hypot(dx, dy)
        if d == 0.0:
            coincident += 1
            inv_sum += 1.0 / eps
        else:
            inv_sum += 1.0 / d
            ax += dx / d
            ay += dy / d
    d_sum = inv_sum / len(neighbor_positions) if aggregate == "mean" else inv_sum
    r_theta = wrap_angle(math.atan2(ay, ax))
    p_gb = (x + d_sum * math.cos(r_theta), y + d_sum * math.sin(r_theta))
    return RepulsionResult(d_sum, r_theta, p_gb, coincident)


def neighbors_within(i: int, positions: Sequence[Point], comm_range: float) -> list[Point]:
    """Positions of robots in direct communication range of robot ``i``."""
    xi, yi = positions[i]
    return [p for j, p in enumerate(positions)
            if j != i and math.hypot(p[0] - xi, p[1] - yi) <= comm_range]
