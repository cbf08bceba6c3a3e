"""Exact two-genome duplication-loss alignment.

Computes a minimum-cost labeled alignment of two gene-order sequences
under the duplication/loss model, by branch-and-cut over an integer
program with lazily separated valid inequalities, plus an iterative
baseline, an exhaustive oracle, and instance generators.
"""

from duploss.instance import (
    SIDE_A,
    SIDE_B,
    AlignmentEdge,
    CostModel,
    Duplication,
    Genome,
    Instance,
    Interval,
    LabeledAlignment,
    LossCandidate,
    ValidationReport,
    all_losses_labeling,
    build_instance,
    edges_incompatible,
    has_duplication_cycle,
    instance_from_strings,
    labeling_cost,
    reconstruct_ancestor,
    validate_labeling,
)

__version__ = "0.1.0"
