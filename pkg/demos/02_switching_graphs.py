"""
Switching communication graphs
==============================

Agents talk over a graph that changes in time. Neither graph below is
strongly connected on its own; over any window of two time units their
union is a directed cycle, and that is what consensus needs.
"""

from sdop import DirectedGraph, GraphSchedule, is_strongly_connected, is_ujsc, laplacian

# arcs are (j, i): agent i receives from agent j; labels start at 1 here
e1 = DirectedGraph.from_one_based(3, [(2, 1), (3, 2)])
e2 = DirectedGraph.from_one_based(3, [(1, 3)])
schedule = GraphSchedule([(e1, 1.0), (e2, 1.0)], periodic=True)

print("E1 strongly connected:", is_strongly_connected(e1))
print("E2 strongly connected:", is_strongly_connected(e2))
print("switches up to t = 5:", schedule.switching_instants(5.0))
print("graph at t = 3.5 is E2:", schedule.graph_at(3.5) == e2)

# the Laplacian row of agent i carries -1 for each agent it hears from
print("Laplacian of E1:\n", laplacian(e1))

for window in (1.0, 2.0, 3.0):
    print(f"jointly strongly connected over windows of {window}:", is_ujsc(schedule, window))

# drop the second graph and agent 3 never hears from anyone
broken = GraphSchedule([(e1, 1.0), (DirectedGraph(3), 1.0)], periodic=True)
print("with E2 removed:", [is_ujsc(broken, w) for w in (2.0, 10.0, 100.0)])
