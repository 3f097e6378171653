"""Flow solver checks against hand-worked and scipy-computed answers."""

import numpy as np
import pytest

from matchkit.flownet import FlowNetwork

scipy_sparse = pytest.importorskip("scipy.sparse")
from scipy.optimize import linear_sum_assignment  # noqa: E402
from scipy.sparse.csgraph import maximum_flow  # noqa: E402


def test_single_edge():
    net = FlowNetwork(2)
    e = net.add_edge(0, 1, 3, cost=5)
    flow, cost = net.run(0, 1)
    assert (flow, cost) == (3, 15)
    assert net.flow_on(e) == 3


def test_chooses_cheaper_path_first():
    # two parallel two-hop routes, capacities force both to be used
    net = FlowNetwork(4)
    net.add_edge(0, 1, 1, cost=1)
    net.add_edge(0, 2, 1, cost=4)
    net.add_edge(1, 3, 1, cost=1)
    net.add_edge(2, 3, 1, cost=1)
    flow, cost = net.run(0, 3)
    assert (flow, cost) == (2, 7)


def test_negative_cost_rerouting():
    # cheapest max flow must push one unit through the expensive middle
    net = FlowNetwork(4)
    net.add_edge(0, 1, 2, cost=0)
    net.add_edge(1, 2, 1, cost=-10)
    net.add_edge(1, 3, 1, cost=0)
    net.add_edge(2, 3, 2, cost=0)
    flow, cost = net.run(0, 3)
    assert (flow, cost) == (2, -10)


def test_improve_only_stops_before_losing_value():
    # matching a2 to its valuable partner beats matching both agents
    net = FlowNetwork(6)  # s=0, a1=1, a2=2, h1=3, h2=4, t=5
    net.add_edge(0, 1, 1, 0)
    net.add_edge(0, 2, 1, 0)
    net.add_edge(1, 3, 1, cost=-1)
    net.add_edge(2, 3, 1, cost=-1000)
    net.add_edge(2, 4, 1, cost=-1)
    net.add_edge(3, 5, 1, 0)
    net.add_edge(4, 5, 1, 0)
    flow, cost = net.run(0, 5, improve_only=True)
    assert (flow, cost) == (1, -1000)


def test_improve_only_matches_plain_run_when_all_paths_negative():
    # here the rerouted second path still gains weight, so flow reaches 2
    net = FlowNetwork(6)
    net.add_edge(0, 1, 1, 0)
    net.add_edge(0, 2, 1, 0)
    net.add_edge(1, 3, 1, cost=-5)
    net.add_edge(2, 3, 1, cost=-7)
    net.add_edge(2, 4, 1, cost=-4)
    net.add_edge(3, 5, 1, 0)
    net.add_edge(4, 5, 1, 0)
    flow, cost = net.run(0, 5, improve_only=True)
    assert (flow, cost) == (2, -9)


def test_big_integer_costs_stay_exact():
    # one route is cheaper by a single unit at 10^60 scale
    big = 10**60
    net = FlowNetwork(4)
    net.add_edge(0, 1, 1, cost=big)
    net.add_edge(0, 2, 1, cost=big - 1)
    net.add_edge(1, 3, 1, cost=0)
    net.add_edge(2, 3, 1, cost=0)
    flow, cost = net.run(0, 3)
    assert flow == 2
    assert cost == 2 * big - 1
    # with capacity to spare, only the cheaper route carries flow
    net = FlowNetwork(4)
    a = net.add_edge(0, 1, 1, cost=big)
    b = net.add_edge(0, 2, 1, cost=big - 1)
    net.add_edge(1, 3, 2, cost=0)
    net.add_edge(2, 3, 2, cost=0)
    net.add_edge(0, 2, 0, cost=0)
    flow, cost = net.run(0, 3, improve_only=False)
    assert net.flow_on(b) == 1 and net.flow_on(a) == 1


def test_max_flow_matches_scipy_on_random_graphs():
    rng = np.random.default_rng(404)
    for _ in range(25):
        n = int(rng.integers(4, 9))
        dense = rng.integers(0, 4, size=(n, n))
        np.fill_diagonal(dense, 0)
        graph = scipy_sparse.csr_matrix(dense)
        expected = maximum_flow(graph, 0, n - 1).flow_value
        net = FlowNetwork(n)
        for u in range(n):
            for v in range(n):
                if dense[u, v]:
                    net.add_edge(u, v, int(dense[u, v]), cost=0)
        flow, cost = net.run(0, n - 1)
        assert flow == expected
        assert cost == 0


def test_assignment_cost_matches_scipy_on_random_instances():
    rng = np.random.default_rng(808)
    for _ in range(25):
        n = int(rng.integers(2, 7))
        costs = rng.integers(1, 50, size=(n, n))
        rows, cols = linear_sum_assignment(costs)
        expected = int(costs[rows, cols].sum())
        net = FlowNetwork(2 * n + 2)
        s, t = 2 * n, 2 * n + 1
        for i in range(n):
            net.add_edge(s, i, 1, cost=0)
            net.add_edge(n + i, t, 1, cost=0)
            for j in range(n):
                net.add_edge(i, n + j, 1, cost=int(costs[i, j]))
        flow, cost = net.run(s, t)
        assert flow == n
        assert cost == expected
