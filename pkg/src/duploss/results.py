"""Common result record returned by every solving method."""

from dataclasses import dataclass, field
from fractions import Fraction

from duploss.instance import Genome, LabeledAlignment

OPTIMAL = "OPTIMAL"
TIME_LIMIT = "TIME_LIMIT"


@dataclass
class SolveResult:
    """Outcome of a solve: the labeling, its exact cost, and search statistics.

    ``bound`` is the best proven lower bound; for OPTIMAL results it
    equals ``cost``.  ``num_optima`` is filled by the exhaustive oracle
    only.  ``cuts`` carries every inequality the solver generated, for
    post-hoc validity auditing.
    """

    labeling: LabeledAlignment
    cost: Fraction
    ancestor: Genome
    status: str
    stats: dict = field(default_factory=dict)
    bound: Fraction = None
    num_optima: int = None
    cuts: list = field(default_factory=list)
