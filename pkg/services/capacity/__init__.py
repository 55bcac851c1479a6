from .curve import average_curve
from .matrix import BinningRule, ChannelMatrix, build_matrix
from .report import CapacityReport, analyze, bandwidth
from .shuffle import shuffle_bound, shuffle_capacities
from .solver import batched_capacity, blahut_arimoto, shannon_capacity

__all__ = [
    "BinningRule",
    "CapacityReport",
    "ChannelMatrix",
    "analyze",
    "average_curve",
    "bandwidth",
    "batched_capacity",
    "blahut_arimoto",
    "build_matrix",
    "shannon_capacity",
    "shuffle_bound",
    "shuffle_capacities",
]
