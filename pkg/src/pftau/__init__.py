"""Partition functions of deformed matrix ensembles as Pfaffian Schur series,
with brute-force eigenvalue oracles and bilinear-identity checks."""

from .moments import EnsembleSpec
from .partitions import Partition
from .symfun import CouplingSeq

__all__ = ["EnsembleSpec", "Partition", "CouplingSeq"]
__version__ = "0.1.0"
