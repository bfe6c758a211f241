"""Sequence-space norms, extreme/denting probes and exact certificates."""

from .norms import MLUR3, NONSYM, Q, SPREAD, SUP, ConvexBody, LurRenormConfig, get_norm, lur_oracle, mlur_gauge, nonsym_sup_norm
from .search import SearchBudget
from .seqspace import FinFunctional, IndexSeq, SeqVec, basis, constant, make_vec, sup_norm

__all__ = [
    "MLUR3",
    "NONSYM",
    "Q",
    "SPREAD",
    "SUP",
    "ConvexBody",
    "FinFunctional",
    "IndexSeq",
    "LurRenormConfig",
    "SearchBudget",
    "SeqVec",
    "basis",
    "constant",
    "get_norm",
    "lur_oracle",
    "make_vec",
    "mlur_gauge",
    "nonsym_sup_norm",
    "sup_norm",
]
