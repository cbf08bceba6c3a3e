"""Iterative baseline: re-solve the program, adding cycle rows between solves.

The integer program is solved to optimality WITHOUT any duplication-cycle
constraints; every low-weight cycle induced by the integral optimum is
then added as a row and the program is re-solved, until the optimum is
cycle-free.  The inner solves reuse the branch-and-bound engine with all
fractional separators and the lazy in-tree cycle check disabled, so the
cutting planes are the only difference from the main solver.
"""

from dataclasses import dataclass, field

from duploss.branch_and_cut import SolverConfig, _Search
from duploss.instance import (
    SIDES,
    find_duplication_cycle,
    validate_labeling,
)
from duploss.ilp import LE, LinearConstraint
from duploss.results import OPTIMAL, TIME_LIMIT, SolveResult
from duploss.separation import PLAIN_CYCLE, Cut, enumerate_violated_cycles


@dataclass
class IterationTrace:
    """Per-iteration log: objective, cycles found, cumulative cycle rows."""

    entries: list = field(default_factory=list)

    def record(self, objective, cycles_found, total_rows):
        self.entries.append(
            {
                "objective": objective,
                "cycles_found": cycles_found,
                "total_cycle_rows": total_rows,
            }
        )

    def __len__(self):
        return len(self.entries)

    def to_json(self):
        return [
            {
                "objective": str(e["objective"]),
                "cycles_found": e["cycles_found"],
                "total_cycle_rows": e["total_cycle_rows"],
            }
            for e in self.entries
        ]


def solve_iterative(instance, config=None):
    """Optimal labeling via the iterative scheme; returns (result, trace)."""
    config = config or SolverConfig()
    trace = IterationTrace()
    cycle_rows = []
    seen_keys = set()
    all_cuts = []
    total_nodes = 0
    total_lp = 0

    while True:
        search = _Search(
            instance,
            config,
            enforce_cycles=False,
            use_separators=False,
            extra_rows=cycle_rows,
        )
        inner = search.run()
        total_nodes += inner.stats["nodes"]
        total_lp += inner.stats["lp_solves"]
        if inner.status == TIME_LIMIT:
            inner.stats["iterations"] = len(trace) + 1
            inner.stats["total_nodes"] = total_nodes
            inner.stats["cyclic_incumbent"] = (
                validate_labeling(instance, inner.labeling) is not None
            )
            return inner, trace

        point = search.model.labeling_to_point(inner.labeling)
        cuts, truncated = enumerate_violated_cycles(
            instance, point, budget=config.cycle_budget, model=search.model
        )
        fresh = [c for c in cuts if c.row.key() not in seen_keys]
        if not fresh and truncated:
            # ensure progress: take one witness cycle straight off the labeling
            for side in SIDES:
                cycle = find_duplication_cycle(inner.labeling.dups_on(side))
                if cycle:
                    row = LinearConstraint.make(
                        {search.model.dup_var(d): 1 for d in cycle},
                        LE,
                        len(cycle) - 1,
                        "cycle",
                    )
                    if row.key() not in seen_keys:
                        fresh = [Cut(row, PLAIN_CYCLE, 1.0, {"fallback": True})]
                        break

        trace.record(inner.cost, len(fresh), len(cycle_rows) + len(fresh))
        if not fresh:
            report = validate_labeling(instance, inner.labeling)
            if report is not None:
                raise RuntimeError(
                    "iterative solve ended on an invalid labeling: %s" % report
                )
            stats = dict(inner.stats)
            stats["iterations"] = len(trace)
            stats["total_nodes"] = total_nodes
            stats["total_lp_solves"] = total_lp
            stats["cycle_rows"] = len(cycle_rows)
            return (
                SolveResult(
                    labeling=inner.labeling,
                    cost=inner.cost,
                    ancestor=inner.ancestor,
                    status=OPTIMAL,
                    stats=stats,
                    bound=inner.cost,
                    cuts=all_cuts,
                ),
                trace,
            )

        for cut in fresh:
            seen_keys.add(cut.row.key())
            cycle_rows.append(cut.row)
            all_cuts.append(cut)
