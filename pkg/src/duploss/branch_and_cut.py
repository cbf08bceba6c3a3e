"""Exact solver: LP-based branch-and-bound with cutting planes.

Each search node solves the LP relaxation over the base rows plus a
global pool of generated cuts.  Fractional points are attacked by the
class separators in configured order; integral points are checked
lazily for duplication cycles, whose rows are the only constraints not
present in the base model.  Costs and incumbents are compared in exact
arithmetic; LP values only steer the search.
"""

import heapq
import math
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

from duploss.ilp import (
    LE,
    LOSS,
    MATCH,
    DUP,
    LinearConstraint,
    build_base_model,
    check_integral_feasible,
)
from duploss.instance import (
    LabeledAlignment,
    all_losses_labeling,
    find_duplication_cycle,
    labeling_cost,
    reconstruct_ancestor,
    validate_labeling,
)
from duploss.results import OPTIMAL, TIME_LIMIT, SolveResult
from duploss.separation import (
    DUP_ISLAND,
    LIFTED_CYCLE,
    MAX_CLIQUE,
    PLAIN_CYCLE,
    Cut,
    SeparationContext,
    enumerate_violated_cycles,
    separate_dup_island,
    separate_lifted_cycle,
    separate_max_clique,
)
from duploss.simplex import (
    INFEASIBLE,
    LpProblem,
    SolverFailure,
    add_rows_and_resolve,
    solve_lp,
)
from duploss.simplex import OPTIMAL as LP_OPTIMAL
from duploss.tolerances import INTEGRALITY_EPS, VIOLATION_EPS

MOST_FRACTIONAL = "MOST_FRACTIONAL"
FIRST_FRACTIONAL = "FIRST_FRACTIONAL"
BEST_BOUND = "BEST_BOUND"
DFS = "DFS"

_SEPARATORS = {
    MAX_CLIQUE: separate_max_clique,
    DUP_ISLAND: separate_dup_island,
    LIFTED_CYCLE: separate_lifted_cycle,
}

#: Branching considers variable kinds in this order.
_KIND_PRIORITY = (MATCH, DUP, LOSS)

#: A cut this slack for this many consecutive solves leaves the active LP.
_STALE_SLACK = 0.1
_STALE_SOLVES = 50

#: Rebuild the LP only once this many stale cuts have accumulated.
_REBUILD_BATCH = 64


@dataclass
class SolverConfig:
    """Search knobs; the defaults match the shipped benchmarks."""

    cut_rounds: int = 10
    cut_classes: tuple = (MAX_CLIQUE, LIFTED_CYCLE, DUP_ISLAND)
    violation_eps: float = VIOLATION_EPS
    integrality_eps: float = INTEGRALITY_EPS
    branching: str = MOST_FRACTIONAL
    node_selection: str = BEST_BOUND
    time_limit: float = None
    node_limit: int = None
    cycle_budget: int = 10_000
    max_cuts_per_class: int = 50
    verbose: bool = False

    def __post_init__(self):
        if self.cut_rounds < 0:
            raise ValueError("cut_rounds must be nonnegative")
        unknown = set(self.cut_classes) - set(_SEPARATORS)
        if unknown:
            raise ValueError("unknown cut classes: %s" % sorted(unknown))
        if self.branching not in (MOST_FRACTIONAL, FIRST_FRACTIONAL):
            raise ValueError("bad branching rule")
        if self.node_selection not in (BEST_BOUND, DFS):
            raise ValueError("bad node selection rule")


@dataclass(frozen=True)
class SearchNode:
    """Open subproblem: inherited bound plus variable fixings."""

    fixings: tuple  # ((var_index, value), ...)
    bound: Fraction
    depth: int


class _TimeLimit(Exception):
    pass


def extract_labeling(instance, point, model=None):
    """Labeling encoded by an integral point; raises on any violation."""
    model = model or point.model
    outcome = check_integral_feasible(model, instance, point)
    if not isinstance(outcome, LabeledAlignment):
        raise ValueError("point does not encode a valid labeling: %s" % (outcome,))
    return outcome


class _Search:
    """One branch-and-bound run; behaviour toggles cover the baseline reuse."""

    def __init__(self, instance, config, enforce_cycles=True, use_separators=True,
                 extra_rows=()):
        self.instance = instance
        self.config = config
        self.enforce_cycles = enforce_cycles
        self.use_separators = use_separators

        self.model = build_base_model(instance)
        self.ctx = SeparationContext(instance)
        self.extra_rows = list(extra_rows)
        self.problem = self._fresh_problem([])

        denominators = [c.denominator for c in self.model.objective.values()] or [1]
        self.quantum = math.lcm(*denominators)

        self.pool = {}          # row key -> Cut, everything ever generated
        self.active = {}        # row key -> stale-solve streak, cuts in the LP
        self.stats = {
            "nodes": 0,
            "lp_solves": 0,
            "cuts": {MAX_CLIQUE: 0, DUP_ISLAND: 0, LIFTED_CYCLE: 0, PLAIN_CYCLE: 0},
            "cut_rounds": 0,
            "cuts_retired": 0,
        }
        self.start_time = None
        self.root_lp_objective = None
        self._node_bound = None

    def _fresh_problem(self, cut_rows):
        problem = LpProblem.from_model(self.model)
        if self.extra_rows:
            problem.add_rows(self.extra_rows)
        if cut_rows:
            problem.add_rows(cut_rows)
        return problem

    # -- helpers -----------------------------------------------------------

    def _now_exceeded(self):
        limit = self.config.time_limit
        return limit is not None and time.monotonic() - self.start_time > limit

    def _round_bound(self, lp_objective):
        """Smallest cost-lattice value at or above the LP bound."""
        q = self.quantum
        return Fraction(math.ceil((lp_objective - 1e-6) * q), q)

    def _solve_current(self, warm):
        self.stats["lp_solves"] += 1
        sol = solve_lp(self.problem, warm_start=warm)
        if sol.status == LP_OPTIMAL and self.root_lp_objective is None:
            self.root_lp_objective = sol.objective
        if sol.status not in (LP_OPTIMAL, INFEASIBLE):
            raise SolverFailure("LP backend returned %s" % sol.status)
        if sol.status == LP_OPTIMAL:
            self._age_cuts(sol)
        return sol

    def _age_cuts(self, sol):
        """Retire cuts that stayed slack for many consecutive solves."""
        if not self.active:
            return
        stale = []
        for key, streak in self.active.items():
            cut = self.pool[key]
            slack = -cut.row.violation(sol.value)
            self.active[key] = streak + 1 if slack > _STALE_SLACK else 0
            if self.active[key] > _STALE_SOLVES:
                stale.append(key)
        if len(stale) >= _REBUILD_BATCH:
            for key in stale:
                del self.active[key]
            self.stats["cuts_retired"] += len(stale)
            self.problem = self._fresh_problem(
                [self.pool[key].row for key in self.active]
            )

    def _add_cuts(self, cuts, sol):
        """Install cuts not currently in the LP; returns (solution, added)."""
        fresh = []
        for cut in cuts:
            key = cut.row.key()
            if key in self.active:
                continue
            if key not in self.pool:
                self.pool[key] = cut
                self.stats["cuts"][cut.cut_class] += 1
            self.active[key] = 0
            fresh.append(cut)
        if not fresh:
            return None
        self.stats["lp_solves"] += 1
        new_sol = add_rows_and_resolve(self.problem, [c.row for c in fresh], sol)
        if new_sol.status == LP_OPTIMAL:
            self._age_cuts(new_sol)
        return new_sol, fresh

    def _separate_fractional(self, point):
        for cls in self.config.cut_classes:
            cuts = _SEPARATORS[cls](
                self.instance,
                point,
                ctx=self.ctx,
                eps=self.config.violation_eps,
                max_cuts=self.config.max_cuts_per_class,
                model=self.model,
            )
            cuts = [c for c in cuts if c.row.key() not in self.active]
            if cuts:
                return cuts
        return []

    def _integral_cycle_cuts(self, point):
        cuts, truncated = enumerate_violated_cycles(
            self.instance,
            point,
            ctx=self.ctx,
            budget=self.config.cycle_budget,
            model=self.model,
        )
        cuts = [c for c in cuts if c.row.key() not in self.active]
        if cuts or not truncated:
            return cuts
        # truncated search found nothing new: fall back to one witness cycle
        lab = self.model.point_to_labeling(point)
        for side_dups in (lab.dups_on("a"), lab.dups_on("b")):
            cycle = find_duplication_cycle(side_dups)
            if cycle:
                row = LinearConstraint.make(
                    {self.model.dup_var(d): 1 for d in cycle}, LE, len(cycle) - 1,
                    "cycle",
                )
                if row.key() not in self.active:
                    return [Cut(row, PLAIN_CYCLE, 1.0, {"fallback": True})]
        return []

    def _candidate_labeling(self, point):
        """Labeling at an integral point, skipping the cycle check when allowed."""
        lab = self.model.point_to_labeling(point)
        report = validate_labeling(
            self.instance, lab, check_cycles=self.enforce_cycles
        )
        if report is not None:
            raise SolverFailure("integral LP point fails validation: %s" % report)
        return lab

    def _branch_variable(self, point):
        eps = self.config.integrality_eps
        arr = point.array
        for kind in _KIND_PRIORITY:
            best = None
            for idx, var in enumerate(self.model.variables):
                if var.kind != kind:
                    continue
                value = arr[idx]
                frac = abs(value - round(value))
                if frac <= eps:
                    continue
                if self.config.branching == FIRST_FRACTIONAL:
                    return idx
                score = abs(value - 0.5)
                if best is None or score < best[0]:
                    best = (score, idx)
            if best is not None:
                return best[1]
        return None

    def _apply_fixings(self, fixings):
        self.problem.reset_bounds()
        for idx, val in fixings:
            self.problem.fix(self.model.variables[idx], val)

    def _log(self, message):
        if self.config.verbose:
            print(message, file=sys.stderr)

    # -- main loop ----------------------------------------------------------

    def run(self):
        self.start_time = time.monotonic()
        instance = self.instance
        incumbent = all_losses_labeling(instance)
        incumbent_cost = labeling_cost(instance, incumbent)

        if not self.model.variables:
            return self._result(incumbent, incumbent_cost, OPTIMAL, incumbent_cost)

        counter = 0
        root = SearchNode((), bound=None, depth=0)
        use_heap = self.config.node_selection == BEST_BOUND
        heap = [(0.0, 0, root)] if use_heap else None
        stack = None if use_heap else [root]
        last_sol = None

        def pop_node():
            if use_heap:
                return heapq.heappop(heap)[2] if heap else None
            return stack.pop() if stack else None

        def push_node(node):
            nonlocal counter
            counter += 1
            if use_heap:
                heapq.heappush(heap, (float(node.bound), counter, node))
            else:
                stack.append(node)

        def remaining_bound():
            nodes = [entry[2] for entry in heap] if use_heap else list(stack)
            bounds = [n.bound for n in nodes if n.bound is not None]
            if self._node_bound is not None:
                bounds.append(self._node_bound)
            bounds.append(incumbent_cost)
            return min(bounds)

        try:
            while True:
                node = pop_node()
                if node is None:
                    break
                self._node_bound = node.bound
                if self._now_exceeded():
                    raise _TimeLimit
                if (
                    self.config.node_limit is not None
                    and self.stats["nodes"] >= self.config.node_limit
                ):
                    raise _TimeLimit
                if node.bound is not None and node.bound >= incumbent_cost:
                    self._node_bound = None
                    continue
                self.stats["nodes"] += 1

                self._apply_fixings(node.fixings)
                sol = self._solve_current(last_sol)
                if sol.status == INFEASIBLE:
                    self._node_bound = None
                    continue
                last_sol = sol
                bound = self._round_bound(sol.objective)
                self._node_bound = bound
                if bound >= incumbent_cost:
                    self._node_bound = None
                    continue

                rounds = 0
                prune = False
                while True:
                    if self._now_exceeded():
                        raise _TimeLimit
                    point = sol.primal
                    if point.is_integral(self.config.integrality_eps):
                        cuts = (
                            self._integral_cycle_cuts(point)
                            if self.enforce_cycles
                            else []
                        )
                        if cuts:
                            outcome = self._add_cuts(cuts, sol)
                            if outcome is None:
                                raise SolverFailure(
                                    "cyclic integral point but no new cycle rows"
                                )
                            sol, _ = outcome
                            if sol.status == INFEASIBLE:
                                prune = True
                                break
                            last_sol = sol
                            bound = self._round_bound(sol.objective)
                            self._node_bound = bound
                            if bound >= incumbent_cost:
                                prune = True
                                break
                            continue
                        lab = self._candidate_labeling(point)
                        cost = labeling_cost(instance, lab)
                        if cost < incumbent_cost:
                            incumbent, incumbent_cost = lab, cost
                            self._log(
                                "incumbent %s after %d nodes"
                                % (cost, self.stats["nodes"])
                            )
                        prune = True
                        break

                    if not self.use_separators or rounds >= self.config.cut_rounds:
                        break
                    cuts = self._separate_fractional(point)
                    if not cuts:
                        break
                    rounds += 1
                    self.stats["cut_rounds"] += 1
                    outcome = self._add_cuts(cuts, sol)
                    if outcome is None:
                        break
                    sol, fresh = outcome
                    if sol.status == INFEASIBLE:
                        prune = True
                        break
                    last_sol = sol
                    self._log(
                        "node %d: +%d %s cuts, lp %.4f"
                        % (self.stats["nodes"], len(fresh), fresh[0].cut_class,
                           sol.objective)
                    )
                    bound = self._round_bound(sol.objective)
                    self._node_bound = bound
                    if bound >= incumbent_cost:
                        prune = True
                        break

                self._node_bound = None
                if prune:
                    continue
                point = sol.primal
                if point.is_integral(self.config.integrality_eps):
                    continue  # incumbent handling already done
                branch_idx = self._branch_variable(point)
                if branch_idx is None:
                    raise SolverFailure("no fractional variable to branch on")
                for value in (0, 1):
                    push_node(
                        SearchNode(
                            node.fixings + ((branch_idx, value),),
                            bound=bound,
                            depth=node.depth + 1,
                        )
                    )
        except _TimeLimit:
            return self._result(
                incumbent, incumbent_cost, TIME_LIMIT, remaining_bound()
            )

        return self._result(incumbent, incumbent_cost, OPTIMAL, incumbent_cost)

    def _result(self, labeling, cost, status, bound):
        ancestor = None
        if validate_labeling(self.instance, labeling) is None:
            ancestor = reconstruct_ancestor(self.instance, labeling)
        wall = time.monotonic() - self.start_time if self.start_time else 0.0
        stats = dict(self.stats)
        stats["wall_ms"] = wall * 1000.0
        stats["root_lp_objective"] = self.root_lp_objective
        stats["pool_size"] = len(self.pool)
        return SolveResult(
            labeling=labeling,
            cost=cost,
            ancestor=ancestor,
            status=status,
            stats=stats,
            bound=bound,
            cuts=list(self.pool.values()),
        )


def solve(instance, config=None):
    """Minimum-cost labeled alignment by branch-and-cut, with proof of optimality."""
    config = config or SolverConfig()
    return _Search(instance, config, enforce_cycles=True, use_separators=True).run()
