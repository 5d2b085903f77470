"""The four-edge switch behind the lower bound.

Two vertices u, v with the right cycle pattern let us cut four edges and
re-pair them so that every (R-1)-neighbourhood is unchanged while the
R-neighbourhoods of u and v trade places.  The radius-(R-1) deck therefore
cannot tell G from the switched graph.
"""

from __future__ import annotations

from shotgun.graph_core import sample_configuration
from shotgun.neighborhood import extract_ball, isomorphic
from shotgun.switch_lab import (
    apply_switch, expected_witness_count, find_switch_witnesses, plant_switch_structure,
    reverse_witness, verify_deck_invariance,
)

n, R = 10_000, 5
g = sample_configuration(n, 3, seed=3)
G, w = plant_switch_structure(g, R, seed=0)
Gp = apply_switch(G, w)
print(f"planted witness u={w.u}, v={w.v}")
print("  cut:", w.cut_edges)
print("  add:", w.added_edges)

low = verify_deck_invariance(G, Gp, R - 1)
high = verify_deck_invariance(G, Gp, R)
print(f"(R-1)-deck unchanged: {low.equal} ({low.checked} balls compared)")
print(f"R-deck unchanged: {high.equal}; {len(high.differing)} vertices change type")
print("B_R(u; G') ~ B_R(v; G):", isomorphic(extract_ball(Gp, w.u, R), extract_ball(G, w.v, R)))
print("switching back restores G:", apply_switch(Gp, reverse_witness(w)) == G)

found = find_switch_witnesses(g, R)
print(f"witnesses occurring naturally at R={R}: {len(found)}; "
      f"estimated {expected_witness_count(n, 3, R):.1f}")
