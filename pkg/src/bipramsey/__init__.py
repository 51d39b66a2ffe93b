"""Distinct induced-subgraph sizes in bipartite Ramsey graphs."""

from .graph import (BipartiteGraph, GraphError, Selection, VertexId, VertexPack, build_graph,
                    complete_bipartite, empty_bipartite, induced_edge_count, parse_graph,
                    random_bipartite, read_graph, serialize_graph, write_graph)
from .numtheory import SizeSet, hxyz, multiplication_table, phi_complete_bipartite
from .ramsey import diversity_check, find_induced_biclique, is_c_bipartite_ramsey, richness_check_exact
from .spectrum import phi_exact, phi_sampled

__version__ = "0.1.0"
