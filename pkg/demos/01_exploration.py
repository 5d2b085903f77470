"""Sampling a random cubic graph and watching BFS from one vertex.

Every step of the exploration reveals one half-edge.  A step that lands on a
vertex already seen is a collision; the frontier then shrinks by two instead
of growing by d-2, which is exactly what the recursion for delta_t predicts.
The collisions inside a ball are summarised by its cycle structure, whose
probability can be computed exactly.
"""

from __future__ import annotations

from shotgun.cycle_structure import (
    approx_structure_probability, cycle_structure_of, label_count, structure_probability,
)
from shotgun.exploration import bfs_explore, delta_recursion, distance_sequence
from shotgun.graph_core import is_simple, sample_configuration

n, d, R = 2000, 3, 6
g = sample_configuration(n, d, seed=1)
print(f"configuration model: n={n}, d={d}, simple={is_simple(g)}")

# find a vertex whose ball has a couple of cycles
for v in range(n):
    dag = bfs_explore(g, [v], R)
    if dag.num_collisions >= 2:
        break
print(f"vertex {v}: {dag.num_steps} BFS steps to radius {R}, {dag.num_collisions} collisions")
for c in dag.collisions:
    print(f"  step {c.time}: depth {c.depth_u} -> depth {c.depth_w}, collision depth {c.collision_depth}")

flags = [a.collision for a in dag.arrows]
assert dag.delta_series == delta_recursion(d, flags)
print("frontier sizes follow delta_t = d + (d-2)t - d * (earlier collisions)")
print("distance sequence:", distance_sequence(g, v, R))

c = cycle_structure_of(g, [v], R)
print(f"cycle structure: {c.num_vertices} vertices, {c.num_edges} edges, gamma={c.gamma}")

# exact probability only needs the structure; the graph size enters as a parameter
small = cycle_structure_of(g, [v], 3)
if small.gamma:
    for size in (200, 2000, 20000):
        exact = structure_probability(small, None, size, d)
        approx = approx_structure_probability(small, None, size, d)
        print(f"  n={size}: exact {float(exact):.3e}, leading order {approx:.3e}")
    print(f"  labelings of the radius-3 structure: {label_count(small, d)}")
