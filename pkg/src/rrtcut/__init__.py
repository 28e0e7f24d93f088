"""Random cutting, isolation and percolation on random recursive trees."""

from .core_tree import IncreasingTree, VertexSet, sample_rrt

__all__ = ["IncreasingTree", "VertexSet", "sample_rrt"]
__version__ = "0.1.0"
