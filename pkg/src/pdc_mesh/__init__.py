"""pdc-mesh - decentralized proximal dual consensus for linearly coupled problems."""

from pdc_mesh.engine.runner import run
from pdc_mesh.engine.state import IterationTrace, SolverConfig
from pdc_mesh.problems.coupled import CoupledProblem
from pdc_mesh.topology.graph import Graph

__version__ = "0.1.0"
__all__ = ["CoupledProblem", "Graph", "IterationTrace", "SolverConfig", "__version__", "run"]
