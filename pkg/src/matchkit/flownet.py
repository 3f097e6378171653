"""Minimum cost flow on small networks with arbitrary precision costs.

Profile objectives encode lexicographic comparisons as exponential edge
weights, which overflow fixed-width integers almost immediately.  Python
ints are exact at any size, so the solver below works directly on them.
"""

from collections import deque


class FlowNetwork:
    """Residual graph with integer capacities and big-int costs."""

    def __init__(self, num_nodes: int):
        self.num_nodes = num_nodes
        self._adj: list[list[int]] = [[] for _ in range(num_nodes)]
        self._to: list[int] = []
        self._cap: list[int] = []
        self._cost: list[int] = []

    def add_edge(self, u: int, v: int, capacity: int, cost: int = 0) -> int:
        """Add a directed edge and return its id (reverse edge is id ^ 1)."""
        if capacity < 0:
            raise ValueError("capacity must be nonnegative")
        eid = len(self._to)
        self._to.append(v)
        self._cap.append(capacity)
        self._cost.append(cost)
        self._adj[u].append(eid)
        self._to.append(u)
        self._cap.append(0)
        self._cost.append(-cost)
        self._adj[v].append(eid + 1)
        return eid

    def flow_on(self, eid: int) -> int:
        """Units pushed through the forward edge `eid`."""
        return self._cap[eid ^ 1]

    def reachable_from(self, s: int) -> set[int]:
        """Nodes reachable from s over edges with residual capacity.

        After run() this is the source side of a minimum cut.
        """
        seen = {s}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for eid in self._adj[u]:
                v = self._to[eid]
                if self._cap[eid] > 0 and v not in seen:
                    seen.add(v)
                    queue.append(v)
        return seen

    def _shortest_path(self, s: int, t: int):
        # label-correcting search; costs may be negative but the residual
        # graph of a min-cost flow never holds a negative cycle
        dist = [None] * self.num_nodes
        prev_edge = [-1] * self.num_nodes
        in_queue = [False] * self.num_nodes
        dist[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            in_queue[u] = False
            du = dist[u]
            for eid in self._adj[u]:
                if self._cap[eid] <= 0:
                    continue
                v = self._to[eid]
                nd = du + self._cost[eid]
                if dist[v] is None or nd < dist[v]:
                    dist[v] = nd
                    prev_edge[v] = eid
                    if not in_queue[v]:
                        in_queue[v] = True
                        queue.append(v)
        if dist[t] is None:
            return None, None
        return dist[t], prev_edge

    def run(self, s: int, t: int, improve_only: bool = False) -> tuple[int, int]:
        """Push flow along successive cheapest paths from s to t.

        Returns (total flow, total cost).  With improve_only the search
        stops as soon as the cheapest augmenting path has nonnegative
        cost, i.e. it maximises -cost instead of flow value.
        """
        total_flow = 0
        total_cost = 0
        while True:
            path_cost, prev_edge = self._shortest_path(s, t)
            if path_cost is None:
                break
            if improve_only and path_cost >= 0:
                break
            bottleneck = None
            v = t
            while v != s:
                eid = prev_edge[v]
                if bottleneck is None or self._cap[eid] < bottleneck:
                    bottleneck = self._cap[eid]
                v = self._to[eid ^ 1]
            v = t
            while v != s:
                eid = prev_edge[v]
                self._cap[eid] -= bottleneck
                self._cap[eid ^ 1] += bottleneck
                v = self._to[eid ^ 1]
            total_flow += bottleneck
            total_cost += bottleneck * path_cost
        return total_flow, total_cost
