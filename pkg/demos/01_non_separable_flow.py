"""Why a vector flow is not a sum of scalar flows.

A single track passes two observations with capacities (0.5, 0.2) and
(0.1, 0.9).  Each dimension is limited by its own bottleneck, so the track
carries (0.1, 0.2): total 0.3.  Summing each edge's capacity first would give
min(0.7, 1.0) = 0.7, which no feasible flow reaches.
"""

from nsflow import flow_from_paths, solve, validate
from nsflow.instances import single_path

net = single_path(((0.5, 0.2), (0.1, 0.9)))
print(net)

result = solve(net)
print(f"optimal objective       : {result.value:.6f}")
print(f"scalar-of-sums estimate : {min(0.5 + 0.2, 0.1 + 0.9):.6f}")

sol = flow_from_paths(net, result.cover)
for (u, v), f in sorted(sol.flows.items()):
    print(f"  flow {u:>2} -> {v:<2} = {tuple(round(float(x), 3) for x in f)}")
print("violations:", validate(net, sol) or "none")
