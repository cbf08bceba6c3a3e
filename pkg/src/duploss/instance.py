"""Problem instances for two-genome duplication-loss alignment.

An instance holds two gene-order sequences together with every candidate
event an alignment may use: gene-to-gene alignment edges between the
genomes, block duplications inside a single genome, and single-gene
losses.  A ``LabeledAlignment`` selects a subset of those events; this
module validates such selections, prices them, and reconstructs the
implied ancestral genome.

Positions are 1-based throughout.  Event costs are exact rationals so
that optimal costs can be compared without floating-point slack.
"""

import warnings
from dataclasses import dataclass
from fractions import Fraction

SIDE_A = "a"
SIDE_B = "b"
SIDES = (SIDE_A, SIDE_B)

#: Sentinel returned by a match-cost function for pairs that may not align.
DISALLOWED = None

#: Default cap on the number of enumerated duplication candidates.
DEFAULT_DUP_BUDGET = 1_000_000


class Genome:
    """An ordered sequence of gene symbols with 1-based positions."""

    __slots__ = ("genes",)

    def __init__(self, genes):
        genes = tuple(genes)
        for g in genes:
            if not isinstance(g, str) or not g:
                raise ValueError("gene symbols must be non-empty strings: %r" % (g,))
        self.genes = genes

    @classmethod
    def from_text(cls, text):
        """Build a genome from whitespace-separated symbols."""
        return cls(text.split())

    def symbol(self, pos):
        """Gene symbol at 1-based position ``pos``."""
        return self.genes[pos - 1]

    def __len__(self):
        return len(self.genes)

    def __iter__(self):
        return iter(self.genes)

    def __eq__(self, other):
        return isinstance(other, Genome) and self.genes == other.genes

    def __hash__(self):
        return hash(self.genes)

    def __repr__(self):
        return "Genome(%s)" % " ".join(self.genes)


@dataclass(frozen=True, order=True)
class Interval:
    """Closed 1-based interval of genome positions."""

    start: int
    end: int

    def __post_init__(self):
        if self.start < 1 or self.end < self.start:
            raise ValueError("bad interval [%d, %d]" % (self.start, self.end))

    @property
    def size(self):
        return self.end - self.start + 1

    def contains(self, pos):
        return self.start <= pos <= self.end

    def overlaps(self, other):
        return self.start <= other.end and other.start <= self.end

    def positions(self):
        return range(self.start, self.end + 1)


@dataclass(frozen=True, order=True)
class AlignmentEdge:
    """Candidate alignment of gene ``i`` in genome A to gene ``j`` in genome B."""

    i: int
    j: int
    cost: Fraction


@dataclass(frozen=True, order=True)
class LossCandidate:
    """Candidate single-gene loss at ``position`` on one side."""

    side: str
    position: int
    cost: Fraction


@dataclass(frozen=True, order=True)
class Duplication:
    """Candidate block copy from ``origin`` to the disjoint ``target`` interval.

    Both intervals live in the same genome (``side``), have equal length
    and identical gene content position by position.
    """

    side: str
    origin: Interval
    target: Interval
    cost: Fraction


class CostModel:
    """Pricing of events: per-pair match costs plus flat loss and duplication costs."""

    __slots__ = ("match_cost", "loss_cost", "dup_cost")

    def __init__(self, match_cost=None, loss_cost=1, dup_cost=1):
        self.match_cost = match_cost if match_cost is not None else equal_match_cost
        self.loss_cost = Fraction(loss_cost)
        self.dup_cost = Fraction(dup_cost)
        if self.loss_cost < 0 or self.dup_cost < 0:
            raise ValueError("costs must be nonnegative")


def equal_match_cost(sym_a, sym_b):
    """Free alignment of identical symbols; anything else is disallowed."""
    return Fraction(0) if sym_a == sym_b else DISALLOWED


def _longest_common_extension(genes):
    """lce[i][j] = length of the longest common prefix of suffixes i and j (0-based)."""
    n = len(genes)
    lce = [[0] * (n + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row = lce[i]
        nxt = lce[i + 1]
        gi = genes[i]
        for j in range(n - 1, -1, -1):
            if gi == genes[j]:
                row[j] = nxt[j + 1] + 1
    return lce


def _enumerate_duplications(side, genome, dup_cost, max_len):
    """All ordered pairs of disjoint, content-equal intervals in one genome.

    Pairs are produced shortest first so that a budget cut keeps every
    single-gene candidate before any longer one.
    """
    genes = list(genome)
    n = len(genes)
    lce = _longest_common_extension(genes)
    by_len = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            limit = min(lce[i][j], abs(i - j))
            if max_len is not None:
                limit = min(limit, max_len)
            for length in range(1, limit + 1):
                by_len.append(
                    Duplication(
                        side,
                        Interval(i + 1, i + length),
                        Interval(j + 1, j + length),
                        dup_cost,
                    )
                )
    by_len.sort(key=lambda d: (d.origin.size, d.origin.start, d.target.start))
    return by_len


class Instance:
    """Two genomes plus the full candidate event sets and the cost model.

    Treat as immutable after construction; lookups are precomputed so the
    object is safe for concurrent reads.
    """

    def __init__(self, genome_a, genome_b, edges, losses, dups, cost_model):
        self.genome_a = genome_a
        self.genome_b = genome_b
        self.edges = tuple(sorted(edges))
        self.losses = tuple(sorted(losses))
        self.dups = tuple(sorted(dups))
        self.cost_model = cost_model

        self.edge_lookup = {(e.i, e.j): e for e in self.edges}
        self.loss_lookup = {(l.side, l.position): l for l in self.losses}
        self.dup_lookup = {(d.side, d.origin, d.target): d for d in self.dups}
        self._dups_by_side = {
            side: tuple(d for d in self.dups if d.side == side) for side in SIDES
        }
        self._edges_at = {}
        for e in self.edges:
            self._edges_at.setdefault((SIDE_A, e.i), []).append(e)
            self._edges_at.setdefault((SIDE_B, e.j), []).append(e)

    @property
    def n(self):
        return len(self.genome_a)

    @property
    def m(self):
        return len(self.genome_b)

    def genome(self, side):
        return self.genome_a if side == SIDE_A else self.genome_b

    def length(self, side):
        return len(self.genome(side))

    def positions(self, side):
        return range(1, self.length(side) + 1)

    def dups_on(self, side):
        return self._dups_by_side[side]

    def edges_at(self, side, pos):
        """Alignment edges touching position ``pos`` on ``side``."""
        return tuple(self._edges_at.get((side, pos), ()))

    def __eq__(self, other):
        return (
            isinstance(other, Instance)
            and self.genome_a == other.genome_a
            and self.genome_b == other.genome_b
            and self.edges == other.edges
            and self.losses == other.losses
            and self.dups == other.dups
        )

    def __repr__(self):
        return "Instance(n=%d, m=%d, edges=%d, dups=%d)" % (
            self.n,
            self.m,
            len(self.edges),
            len(self.dups),
        )


def build_instance(genome_a, genome_b, cost_model=None, *, max_dup_length=None,
                   dup_budget=DEFAULT_DUP_BUDGET):
    """Enumerate all candidate events for a pair of genomes.

    Edges connect every pair of positions whose symbols the cost model
    allows; losses cover every position on both sides; duplications are
    all ordered pairs of disjoint content-equal intervals within one
    genome, up to ``max_dup_length``.  If more than ``dup_budget``
    duplication candidates exist the list is truncated (shortest kept)
    with a warning, since the model is then no longer exact.
    """
    cost_model = cost_model or CostModel()
    edges = []
    for i in range(1, len(genome_a) + 1):
        for j in range(1, len(genome_b) + 1):
            cost = cost_model.match_cost(genome_a.symbol(i), genome_b.symbol(j))
            if cost is not DISALLOWED:
                cost = Fraction(cost)
                if cost < 0:
                    raise ValueError("negative match cost for (%d, %d)" % (i, j))
                edges.append(AlignmentEdge(i, j, cost))

    losses = [
        LossCandidate(side, pos, cost_model.loss_cost)
        for side in SIDES
        for pos in range(1, len(genome_a if side == SIDE_A else genome_b) + 1)
    ]

    dups = []
    for side, genome in ((SIDE_A, genome_a), (SIDE_B, genome_b)):
        dups.extend(
            _enumerate_duplications(side, genome, cost_model.dup_cost, max_dup_length)
        )
    if len(dups) > dup_budget:
        warnings.warn(
            "duplication candidates truncated: %d enumerated, budget %d; "
            "optimality is no longer guaranteed" % (len(dups), dup_budget),
            RuntimeWarning,
        )
        dups = dups[:dup_budget]

    return Instance(genome_a, genome_b, edges, losses, dups, cost_model)


def instance_from_strings(text_a, text_b, cost_model=None, **kwargs):
    """Shorthand used throughout the tests: genomes given as token strings."""
    return build_instance(
        Genome.from_text(text_a), Genome.from_text(text_b), cost_model, **kwargs
    )


def edges_incompatible(e1, e2):
    """Whether two alignment edges cross or share an endpoint.

    Edges (i, j) and (k, l) can coexist in an alignment only if they are
    strictly ordered the same way in both genomes.
    """
    return (e1.i <= e2.i and e2.j <= e1.j) or (e1.i >= e2.i and e2.j >= e1.j)


def _dup_overlap_digraph(dups):
    """Adjacency d -> successors whose origin overlaps d's target."""
    dups = list(dups)
    adj = {}
    for d in dups:
        adj[d] = [d2 for d2 in dups if d2 is not d and d2.origin.overlaps(d.target)]
    return adj


def find_duplication_cycle(dups_one_side):
    """Return one directed cycle of duplications, or None.

    Duplication d' depends on d when origin(d') overlaps target(d); a
    cycle in that dependency digraph has no consistent chronological
    order, so such selections are infeasible.
    """
    adj = _dup_overlap_digraph(dups_one_side)
    WHITE, GREY, BLACK = 0, 1, 2
    color = {d: WHITE for d in adj}
    for root in sorted(adj):
        if color[root] != WHITE:
            continue
        stack = [(root, iter(adj[root]))]
        color[root] = GREY
        path = [root]
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if color[nxt] == GREY:
                    return path[path.index(nxt):]
                if color[nxt] == WHITE:
                    color[nxt] = GREY
                    stack.append((nxt, iter(adj[nxt])))
                    path.append(nxt)
                    advanced = True
                    break
            if not advanced:
                color[node] = BLACK
                stack.pop()
                path.pop()
    return None


def has_duplication_cycle(dups_one_side):
    """Whether a set of same-side duplications contains a dependency cycle."""
    return find_duplication_cycle(dups_one_side) is not None


@dataclass(frozen=True)
class LabeledAlignment:
    """A chosen set of matches, losses and duplications.

    Valid when every position of both genomes is covered exactly once
    (by a match endpoint, its loss, or membership in a chosen
    duplication's target), matches are pairwise compatible, and neither
    side's duplications form a cycle.
    """

    matches: frozenset
    losses: frozenset
    dups: frozenset

    @classmethod
    def of(cls, matches=(), losses=(), dups=()):
        return cls(frozenset(matches), frozenset(losses), frozenset(dups))

    def dups_on(self, side):
        return [d for d in self.dups if d.side == side]


UNCOVERED = "UNCOVERED"
MULTI_COVERED = "MULTI_COVERED"
CROSSING = "CROSSING"
CYCLE = "CYCLE"


@dataclass
class ValidationReport:
    """First violated feasibility condition of a labeled alignment."""

    kind: str
    position: tuple = None  # (side, pos) for cover violations
    edges: tuple = None     # offending edge pair for CROSSING
    cycle: tuple = None     # witness duplication cycle

    def __str__(self):
        if self.kind in (UNCOVERED, MULTI_COVERED):
            return "%s(%s:%d)" % (self.kind, self.position[0], self.position[1])
        if self.kind == CROSSING:
            return "CROSSING(%s, %s)" % self.edges
        return "CYCLE(%d dups)" % len(self.cycle)


def validate_labeling(instance, lab, check_cycles=True):
    """Return None when ``lab`` is a valid labeling, else a ValidationReport.

    Raises ValueError if the labeling references events that are not
    candidates of the instance.
    """
    for e in lab.matches:
        if (e.i, e.j) not in instance.edge_lookup:
            raise ValueError("unknown alignment edge %r" % (e,))
    for l in lab.losses:
        if (l.side, l.position) not in instance.loss_lookup:
            raise ValueError("unknown loss %r" % (l,))
    for d in lab.dups:
        if (d.side, d.origin, d.target) not in instance.dup_lookup:
            raise ValueError("unknown duplication %r" % (d,))

    for side in SIDES:
        count = [0] * (instance.length(side) + 1)
        for e in lab.matches:
            count[e.i if side == SIDE_A else e.j] += 1
        for l in lab.losses:
            if l.side == side:
                count[l.position] += 1
        for d in lab.dups:
            if d.side == side:
                for p in d.target.positions():
                    count[p] += 1
        for pos in instance.positions(side):
            if count[pos] == 0:
                return ValidationReport(UNCOVERED, position=(side, pos))
            if count[pos] > 1:
                return ValidationReport(MULTI_COVERED, position=(side, pos))

    matches = sorted(lab.matches)
    for a in range(len(matches)):
        for b in range(a + 1, len(matches)):
            if edges_incompatible(matches[a], matches[b]):
                return ValidationReport(CROSSING, edges=(matches[a], matches[b]))

    if check_cycles:
        for side in SIDES:
            cycle = find_duplication_cycle(lab.dups_on(side))
            if cycle is not None:
                return ValidationReport(CYCLE, cycle=tuple(cycle))
    return None


def labeling_cost(instance, lab):
    """Total exact cost of a labeling (matches + losses + duplications)."""
    total = Fraction(0)
    for e in lab.matches:
        total += e.cost
    for l in lab.losses:
        total += l.cost
    for d in lab.dups:
        total += d.cost
    return total


def all_losses_labeling(instance):
    """The always-feasible labeling that loses every gene on both sides."""
    return LabeledAlignment.of(losses=instance.losses)


def reconstruct_ancestor(instance, lab):
    """Ancestral genome implied by a valid labeling.

    Scanning alignment columns left to right: a match column contributes
    the shared gene, a loss column contributes the lost gene (present in
    the ancestor, lost on the other branch), and duplication-target
    columns contribute nothing (the copy arose after the ancestor).
    """
    report = validate_labeling(instance, lab)
    if report is not None:
        raise ValueError("invalid labeling: %s" % report)

    role = {}
    for l in lab.losses:
        role[(l.side, l.position)] = "loss"
    for d in lab.dups:
        for p in d.target.positions():
            role[(d.side, p)] = "dup"

    out = []

    def emit(side, lo, hi):
        genome = instance.genome(side)
        for p in range(lo, hi + 1):
            if role.get((side, p)) == "loss":
                out.append(genome.symbol(p))

    a_prev, b_prev = 0, 0
    for e in sorted(lab.matches):
        emit(SIDE_A, a_prev + 1, e.i - 1)
        emit(SIDE_B, b_prev + 1, e.j - 1)
        out.append(instance.genome_a.symbol(e.i))
        a_prev, b_prev = e.i, e.j
    emit(SIDE_A, a_prev + 1, instance.n)
    emit(SIDE_B, b_prev + 1, instance.m)
    return Genome(out)
