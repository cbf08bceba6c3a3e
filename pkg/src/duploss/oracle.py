"""Exponential-time ground truth for tiny instances.

Enumerates every valid labeled alignment by combining monotone match
sets with exact tilings of the unmatched positions by losses and
duplication targets, filtering duplication cycles.  Also solves Max-2SAT
by brute force for the hardness-gadget identities.
"""

from dataclasses import dataclass
from fractions import Fraction

from duploss.instance import (
    SIDE_A,
    SIDE_B,
    SIDES,
    LabeledAlignment,
    has_duplication_cycle,
    labeling_cost,
    reconstruct_ancestor,
)
from duploss.results import OPTIMAL, SolveResult


@dataclass
class SearchBudget:
    """Hard limits protecting the exhaustive search from blowing up."""

    max_genome_length: int = 8
    max_states: int = 10_000_000


class BudgetExceeded(Exception):
    """The exhaustive search hit its genome-length or state budget."""


class _Counter:
    __slots__ = ("states", "limit")

    def __init__(self, limit):
        self.states = 0
        self.limit = limit

    def tick(self):
        self.states += 1
        if self.states > self.limit:
            raise BudgetExceeded("state budget of %d exceeded" % self.limit)


def _check_budget(instance, budget):
    if max(instance.n, instance.m) > budget.max_genome_length:
        raise BudgetExceeded(
            "genome length %d exceeds oracle budget %d"
            % (max(instance.n, instance.m), budget.max_genome_length)
        )


def _match_sets(edges, counter):
    """Yield every set of pairwise-compatible alignment edges.

    Compatible sets are exactly the chains that are strictly increasing
    in both genome positions, so checking against the last chosen edge
    suffices.
    """
    chain = []

    def rec(lo):
        counter.tick()
        yield tuple(chain)
        for idx in range(lo, len(edges)):
            e = edges[idx]
            if chain and not (chain[-1].i < e.i and chain[-1].j < e.j):
                continue
            chain.append(e)
            yield from rec(idx + 1)
            chain.pop()

    yield from rec(0)


def _side_coverings(instance, side, uncovered, counter, cost_cap=None):
    """All exact tilings of ``uncovered`` positions by losses and dup targets.

    Returns a list of (cost, dups, losses) triples; selections whose
    duplications form a cycle are dropped, and partial tilings costing
    more than ``cost_cap`` are pruned (never ones that tie it).
    """
    by_start = {}
    for d in instance.dups_on(side):
        by_start.setdefault(d.target.start, []).append(d)
    uncov = tuple(sorted(uncovered))
    out = []
    dups, losses = [], []

    def rec(idx, cost):
        counter.tick()
        if cost_cap is not None and cost > cost_cap:
            return
        if idx == len(uncov):
            out.append((cost, tuple(dups), tuple(losses)))
            return
        p = uncov[idx]
        loss = instance.loss_lookup[(side, p)]
        losses.append(loss)
        rec(idx + 1, cost + loss.cost)
        losses.pop()
        for d in by_start.get(p, ()):
            size = d.target.size
            # the target must sit inside a contiguous run of uncovered positions
            if idx + size > len(uncov) or uncov[idx + size - 1] != p + size - 1:
                continue
            dups.append(d)
            if not has_duplication_cycle(dups):
                rec(idx + size, cost + d.cost)
            dups.pop()

    rec(0, Fraction(0))
    return out


def _uncovered(instance, matches):
    taken_a = {e.i for e in matches}
    taken_b = {e.j for e in matches}
    unc_a = [p for p in instance.positions(SIDE_A) if p not in taken_a]
    unc_b = [p for p in instance.positions(SIDE_B) if p not in taken_b]
    return unc_a, unc_b


def enumerate_valid_labelings(instance, budget=None):
    """Yield every valid labeled alignment of the instance exactly once."""
    budget = budget or SearchBudget()
    _check_budget(instance, budget)
    counter = _Counter(budget.max_states)
    for matches in _match_sets(instance.edges, counter):
        unc_a, unc_b = _uncovered(instance, matches)
        cov_a = _side_coverings(instance, SIDE_A, unc_a, counter)
        if not cov_a:
            continue
        cov_b = _side_coverings(instance, SIDE_B, unc_b, counter)
        for _, dups_a, losses_a in cov_a:
            for _, dups_b, losses_b in cov_b:
                counter.tick()
                yield LabeledAlignment.of(
                    matches=matches,
                    losses=losses_a + losses_b,
                    dups=dups_a + dups_b,
                )


def solve_exhaustive(instance, budget=None):
    """Provably optimal labeling of a tiny instance, with the optimum count.

    Per match set, the two sides tile independently, so the per-side
    minima combine additively and the number of optima is the product of
    the per-side counts at the minimum.
    """
    budget = budget or SearchBudget()
    _check_budget(instance, budget)
    counter = _Counter(budget.max_states)

    best = None
    best_count = 0
    best_lab = None

    for matches in _match_sets(instance.edges, counter):
        mcost = sum((e.cost for e in matches), Fraction(0))
        if best is not None and mcost > best:
            continue
        unc_a, unc_b = _uncovered(instance, matches)
        cap = None if best is None else best - mcost
        cov_a = _side_coverings(instance, SIDE_A, unc_a, counter, cost_cap=cap)
        if not cov_a:
            continue
        min_a = min(c for c, _, _ in cov_a)
        cap_b = None if cap is None else cap - min_a
        cov_b = _side_coverings(instance, SIDE_B, unc_b, counter, cost_cap=cap_b)
        if not cov_b:
            continue
        min_b = min(c for c, _, _ in cov_b)
        total = mcost + min_a + min_b
        if best is not None and total > best:
            continue
        count_a = sum(1 for c, _, _ in cov_a if c == min_a)
        count_b = sum(1 for c, _, _ in cov_b if c == min_b)
        if best is None or total < best:
            best = total
            best_count = count_a * count_b
            pick_a = next(t for t in cov_a if t[0] == min_a)
            pick_b = next(t for t in cov_b if t[0] == min_b)
            best_lab = LabeledAlignment.of(
                matches=matches,
                losses=pick_a[2] + pick_b[2],
                dups=pick_a[1] + pick_b[1],
            )
        else:
            best_count += count_a * count_b

    assert best_lab is not None  # the all-losses labeling always exists
    assert labeling_cost(instance, best_lab) == best
    return SolveResult(
        labeling=best_lab,
        cost=best,
        ancestor=reconstruct_ancestor(instance, best_lab),
        status=OPTIMAL,
        stats={"states": counter.states},
        bound=best,
        num_optima=best_count,
    )


def max2sat_brute_force(formula):
    """Maximum number of satisfiable clauses, by trying all assignments."""
    if formula.num_vars > 20:
        raise ValueError("brute force limited to 20 variables")
    best = 0
    for bits in range(2 ** formula.num_vars):
        assignment = {
            var: bool(bits >> (var - 1) & 1) for var in range(1, formula.num_vars + 1)
        }
        best = max(best, formula.satisfied_count(assignment))
    return best
