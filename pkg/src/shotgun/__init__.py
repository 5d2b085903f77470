"""Shotgun assembly of random regular graphs.

Modules:

* ``graph_core``: configuration-model multigraphs, sampling and the text format.
* ``exploration``: BFS exploration DAGs, rooted balls and directed balls.
* ``cycle_structure``: cycle structures, BFS labelings and exact probabilities.
* ``neighborhood``: canonical type codes, decks and the membership predicates.
* ``assembly``: reconstruction from deck pieces, distinctness radius, certificates.
* ``switch_lab``: the four-edge switch, planted witnesses and deck invariance.
* ``harness``: radius window, threshold scans and collision statistics.
"""

from .graph_core import (
    Multigraph, read_graph, sample_configuration, sample_simple, write_graph,
)
from .exploration import RootedBall, bfs_explore
from .cycle_structure import CycleStructure, cycle_structure_of, structure_probability
from .neighborhood import all_types_distinct, build_deck, canonical_code, extract_ball
from .assembly import assemble, make_deck_pieces, r_distinct
from .switch_lab import apply_switch, plant_switch_structure, verify_deck_invariance
from .harness import radius_formulas

__version__ = "0.1.0"

__all__ = [
    "Multigraph", "read_graph", "write_graph", "sample_configuration", "sample_simple",
    "RootedBall", "bfs_explore", "CycleStructure", "cycle_structure_of", "structure_probability",
    "all_types_distinct", "build_deck", "canonical_code", "extract_ball",
    "assemble", "make_deck_pieces", "r_distinct",
    "apply_switch", "plant_switch_structure", "verify_deck_invariance", "radius_formulas",
]
