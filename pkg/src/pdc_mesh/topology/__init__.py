"""Agent graphs, Laplacians and spectra."""

from pdc_mesh.topology.graph import (
    Graph,
    build_cycle,
    build_random_connected,
    read_edge_list,
    write_edge_list,
)
from pdc_mesh.topology.matrices import (
    GraphMatrices,
    SpectralSummary,
    derive_matrices,
    spectral_summary,
)

__all__ = [
    "Graph",
    "GraphMatrices",
    "SpectralSummary",
    "build_cycle",
    "build_random_connected",
    "derive_matrices",
    "read_edge_list",
    "spectral_summary",
    "write_edge_list",
]
