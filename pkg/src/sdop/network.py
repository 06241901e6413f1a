"""Switching directed communication graphs.

Arcs are ``(j, i)`` pairs meaning "node ``i`` receives from node ``j``",
with nodes numbered ``0..n-1`` internally. Scenario files and the
:func:`from_one_based` helper use 1-based labels.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class ScheduleExhausted(ValueError):
    """Time lies past the end of a non-periodic schedule."""


class UndecidableError(ValueError):
    """UJSC cannot be decided without an explicit horizon."""


@dataclass(frozen=True)
class DirectedGraph:
    n: int
    arcs: frozenset

    def __init__(self, n: int, arcs: Iterable[tuple[int, int]] = ()):
        arcs = frozenset((int(j), int(i)) for j, i in arcs)
        if n < 1:
            raise ValueError("graph needs at least one node")
        for j, i in arcs:
            if not (0 <= j < n and 0 <= i < n):
                raise ValueError(f"arc {(j, i)} references a node outside 0..{n - 1}")
            if i == j:
                raise ValueError(f"self-arc at node {i}")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "arcs", arcs)

    @classmethod
    def from_one_based(cls, n: int, arcs, undirected: bool = False) -> "DirectedGraph":
        arcs = [(j - 1, i - 1) for j, i in arcs]
        if undirected:
            arcs = arcs + [(i, j) for j, i in arcs]
        return cls(n, arcs)

    @classmethod
    def complete(cls, n: int) -> "DirectedGraph":
        return cls(n, [(j, i) for i in range(n) for j in range(n) if i != j])

    def neighbors(self, i: int) -> list[int]:
        """In-neighbors of ``i``: the nodes it receives from."""
        return sorted(j for j, k in self.arcs if k == i)

    @property
    def is_undirected(self) -> bool:
        return all((i, j) in self.arcs for j, i in self.arcs)

    def union(self, other: "DirectedGraph") -> "DirectedGraph":
        if other.n != self.n:
            raise ValueError("cannot union graphs on different node sets")
        return DirectedGraph(self.n, self.arcs | other.arcs)


def laplacian(graph: DirectedGraph) -> np.ndarray:
    """In-degree Laplacian: ``-1`` at ``(i, j)`` for each in-neighbor ``j`` of ``i``."""
    L = np.zeros((graph.n, graph.n))
    for j, i in graph.arcs:
        L[i, j] = -1.0
        L[i, i] += 1.0
    return L


def strongly_connected_components(graph: DirectedGraph) -> list[list[int]]:
    """Tarjan's algorithm, iterative so deep graphs do not hit the recursion limit."""
    succ = [[] for _ in range(graph.n)]
    for j, i in sorted(graph.arcs):
        succ[j].append(i)

    index = [-1] * graph.n
    low = [0] * graph.n
    on_stack = [False] * graph.n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0

    for root in range(graph.n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, k = work.pop()
            if k == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            recurse = False
            for idx in range(k, len(succ[v])):
                w = succ[v][idx]
                if index[w] == -1:
                    work.append((v, idx + 1))
                    work.append((w, 0))
                    recurse = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comps.append(sorted(comp))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return comps


def is_strongly_connected(graph: DirectedGraph) -> bool:
    return len(strongly_connected_components(graph)) == 1


class GraphSchedule:
    """Piecewise-constant graph process built from ``(graph, duration)`` segments.

    A non-periodic schedule may end with an infinite duration, which makes
    its last graph the permanent tail. Lookups are right-continuous: at a
    switching instant the new graph is already active.
    """

    def __init__(self, segments: Sequence[tuple[DirectedGraph, float]], periodic: bool = False):
        if not segments:
            raise ValueError("schedule needs at least one segment")
        graphs = [g for g, _ in segments]
        durations = [float(d) for _, d in segments]
        n = graphs[0].n
        if any(g.n != n for g in graphs):
            raise ValueError("all graphs in a schedule must share the node set")
        if any(not d > 0 for d in durations):
            raise ValueError("segment durations must be positive")
        if any(math.isinf(d) for d in durations[:-1]):
            raise ValueError("only the last segment may last forever")
        if periodic and math.isinf(durations[-1]):
            raise ValueError("a periodic schedule needs finite durations")
        self.graphs = tuple(graphs)
        self.durations = tuple(durations)
        self.periodic = bool(periodic)
        self.n = n
        self._starts = [0.0]
        for d in durations[:-1]:
            self._starts.append(self._starts[-1] + d)

    @classmethod
    def constant(cls, graph: DirectedGraph) -> "GraphSchedule":
        return cls([(graph, math.inf)])

    @property
    def period(self) -> float:
        return float(sum(self.durations))

    @property
    def dwell_time(self) -> float:
        """Shortest gap between switches that actually occur."""
        if len(self.durations) == 1:
            return math.inf if not self.periodic else self.durations[0]
        return min(self.durations)

    @property
    def is_undirected(self) -> bool:
        return all(g.is_undirected for g in self.graphs)

    def segment_index(self, t: float) -> int:
        if t < 0:
            raise ValueError("time must be nonnegative")
        total = self.period
        if t >= total:
            if not self.periodic:
                raise ScheduleExhausted(f"t={t} is past the schedule end {total}")
            t = math.fmod(t, total)
        return bisect.bisect_right(self._starts, t) - 1

    def graph_at(self, t: float) -> DirectedGraph:
        return self.graphs[self.segment_index(t)]

    def pieces(self):
        """Yield ``(start, end, graph)`` for every segment in time order.

        Infinite for periodic schedules; the tail segment of a non-periodic
        schedule has ``end = inf``.
        """
        cycle = 0
        while True:
            base = cycle * self.period if cycle else 0.0
            for k, g in enumerate(self.graphs):
                start = base + self._starts[k]
                yield start, start + self.durations[k], g
            if not self.periodic:
                return
            cycle += 1

    def segments_until(self, horizon: float):
        """Yield ``(start, end, graph)`` pieces covering ``[0, horizon]``, clipped at the horizon."""
        end = 0.0
        for start, end, g in self.pieces():
            if start >= horizon:
                return
            yield start, min(end, horizon), g
        if end < horizon:
            raise ScheduleExhausted(f"schedule ends at {end} before horizon {horizon}")

    def switching_instants(self, horizon: float) -> list[float]:
        """Times in ``(0, horizon]`` where one segment hands over to the next."""
        if not horizon > 0:
            raise ValueError("horizon must be positive")
        if len(self.graphs) == 1:
            return []
        out = []
        pieces = self.pieces()
        prev = next(pieces)
        for cur in pieces:
            t = prev[1]
            if t > horizon:
                break
            out.append(t)
            prev = cur
        return out


def _window_union(schedule: GraphSchedule, start: float, window: float) -> DirectedGraph:
    arcs = set()
    for _, end, g in schedule.segments_until(start + window):
        if end > start:
            arcs |= g.arcs
    return DirectedGraph(schedule.n, arcs)


def is_ujsc(schedule: GraphSchedule, window: float, horizon: float | None = None) -> bool:
    """True iff every window ``[t, t + window)`` has a strongly connected union graph.

    The union only changes when ``t`` crosses a switching instant, so the
    window starts checked are 0 and every switching instant of one period
    (periodic), every instant up to the tail (tail schedules), or every
    instant up to ``horizon - window`` (finite schedules with a horizon).
    """
    if not window > 0:
        raise ValueError("window must be positive")
    if schedule.periodic:
        starts = [0.0] + list(schedule._starts[1:])
    elif math.isinf(schedule.durations[-1]):
        starts = list(schedule._starts)
    else:
        if horizon is None:
            raise UndecidableError(
                "finite non-periodic schedule: pass an explicit horizon to check UJSC")
        last = horizon - window
        if last < 0:
            raise ValueError("horizon shorter than the window")
        starts = [s for s in schedule._starts if s <= last]
        if not starts or starts[-1] < last:
            starts.append(last)
    for s in starts:
        if not is_strongly_connected(_window_union(schedule, s, window)):
            return False
    return True
