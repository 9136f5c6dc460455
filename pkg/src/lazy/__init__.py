from .evaluator import (
    LazyEvaluator,
    LazyMode,
    SpaceMeter,
    SpaceReport,
    aln_omegas,
    compare_indices,
    enumerate_indices,
    eval_bit,
    next_index,
    nonzero_lazy,
    position_oracle,
    space_report,
    substitute_aln,
)
from .index import FormalVar, Ordering, PobitIndex, balanced_digits, formal_vars
