from .algorithm_threshold import AlgorithmThreshold
from .codegen_equivalence import CodegenEquivalence
from .el_accounting import ElAccounting
from .lazy_differential import LazyDifferential
from .nram_corruption import NramCorruption
from .tableau_corruption import TableauCorruption
from .tower_space import TowerSpace
from .vector_sweep import VectorSweep
