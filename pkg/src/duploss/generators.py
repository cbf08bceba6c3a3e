"""Instance generators: evolutionary simulation and Max-2SAT hardness gadgets."""

import random
from dataclasses import dataclass, field
from fractions import Fraction

from duploss.instance import Genome


@dataclass
class SimParams:
    """Parameters of the duplication/loss evolution simulator.

    A random ancestor-of-ancestors of length ``n`` over ``alphabet_size``
    symbols receives ``moves`` random events to form the ancestor; each
    extant genome then receives another ``moves`` events.  Duplication
    lengths are Gaussian (rounded, at least 1), start positions uniform.
    """

    n: int
    moves: int
    alphabet_size: int
    dup_len_mean: float = 5.0
    dup_len_sd: float = 2.0
    loss_probability: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.moves < 0 or self.alphabet_size < 1:
            raise ValueError("need n >= 1, moves >= 0, alphabet_size >= 1")
        if not 0.0 <= self.loss_probability <= 1.0:
            raise ValueError("loss_probability must be in [0, 1]")


@dataclass
class SimulationResult:
    ancestor: Genome
    genome_a: Genome
    genome_b: Genome
    move_log: dict


def _raw_dup_length(rng, params):
    """One rounded Gaussian length sample, before any genome-size clamping."""
    return round(rng.gauss(params.dup_len_mean, params.dup_len_sd))


def _sample_dup_length(rng, params, genome_len):
    """Duplication length for a genome of ``genome_len`` genes.

    Samples are clamped up to 1; a sample longer than the genome is
    clamped to one less than the genome length when that is positive,
    otherwise redrawn.
    """
    while True:
        length = max(1, _raw_dup_length(rng, params))
        if length <= genome_len:
            return length
        if genome_len >= 2:
            return genome_len - 1


def _apply_move(genes, rng, params, log):
    """Mutate ``genes`` in place with one loss or duplication."""
    is_loss = rng.random() < params.loss_probability
    if is_loss and len(genes) >= 2:
        pos = rng.randrange(len(genes))
        log.append({"op": "loss", "pos": pos + 1, "gene": genes[pos]})
        del genes[pos]
        return
    # duplication (also the fallback when a loss would empty the genome)
    length = _sample_dup_length(rng, params, len(genes))
    origin = rng.randrange(len(genes) - length + 1)
    block = genes[origin:origin + length]
    # insertion slots outside the origin block keep origin and copy disjoint
    r = rng.randrange(len(genes) - length + 2)
    slot = r if r <= origin else r + length - 1
    genes[slot:slot] = block
    log.append({"op": "dup", "origin": origin + 1, "len": length, "target": slot + 1})


def simulate(params):
    """Generate an (ancestor, genome_a, genome_b) triple plus the move history.

    Deterministic for a fixed seed.
    """
    rng = random.Random(params.seed)
    root = [str(rng.randrange(params.alphabet_size) + 1) for _ in range(params.n)]

    log = {"root": [], "a": [], "b": []}
    ancestor = list(root)
    for _ in range(params.moves):
        _apply_move(ancestor, rng, params, log["root"])
    genome_a = list(ancestor)
    for _ in range(params.moves):
        _apply_move(genome_a, rng, params, log["a"])
    genome_b = list(ancestor)
    for _ in range(params.moves):
        _apply_move(genome_b, rng, params, log["b"])

    return SimulationResult(Genome(ancestor), Genome(genome_a), Genome(genome_b), log)


# --- Max-2SAT reduction -------------------------------------------------

@dataclass(frozen=True)
class Literal:
    """Occurrence of a variable (1-based) with optional negation."""

    var: int
    negated: bool = False

    @classmethod
    def parse(cls, token):
        value = int(token)
        if value == 0:
            raise ValueError("literal 0 is not allowed")
        return cls(abs(value), value < 0)

    def __str__(self):
        return "%s%d" % ("-" if self.negated else "", self.var)


@dataclass
class TwoSatFormula:
    """CNF formula with exactly two literals per clause."""

    num_vars: int
    clauses: list

    def __post_init__(self):
        for clause in self.clauses:
            if len(clause) != 2:
                raise ValueError("every clause needs exactly 2 literals")
            for lit in clause:
                if not 1 <= lit.var <= self.num_vars:
                    raise ValueError("literal %s out of range" % lit)

    @property
    def num_clauses(self):
        return len(self.clauses)

    @classmethod
    def parse(cls, text):
        """Parse clauses like ``"1 -2, 2 3"`` (comma-separated pairs)."""
        clauses = []
        for part in text.split(","):
            tokens = part.split()
            if not tokens:
                continue
            clauses.append(tuple(Literal.parse(t) for t in tokens))
        if not clauses:
            raise ValueError("no clauses given")
        num_vars = max(lit.var for clause in clauses for lit in clause)
        return cls(num_vars, clauses)

    def satisfied_count(self, assignment):
        """Number of clauses satisfied by ``assignment`` (var -> bool)."""
        count = 0
        for l1, l2 in self.clauses:
            v1 = assignment[l1.var] ^ l1.negated
            v2 = assignment[l2.var] ^ l2.negated
            if v1 or v2:
                count += 1
        return count


@dataclass
class SatReduction:
    """Gadget genomes encoding a 2-CNF formula as an alignment instance."""

    genome_x: Genome
    genome_y: Genome
    clause_count: int
    formula: TwoSatFormula
    occurrence: dict = field(default_factory=dict)  # (clause_idx, slot) -> occ number


def _occurrence_numbers(formula):
    """Per-literal occurrence indices, counting repeats of a variable separately.

    Helper symbols are minted per occurrence so that no two consecutive
    symbols repeat inside a gadget string even when a clause mentions the
    same variable twice.
    """
    seen = {}
    occ = {}
    for ci, clause in enumerate(formula.clauses, start=1):
        for slot, lit in enumerate(clause):
            seen[lit.var] = seen.get(lit.var, 0) + 1
            occ[(ci, slot)] = seen[lit.var]
    return occ


def _slot_symbols(lit, occ_number):
    if lit.negated:
        return ["!x%d" % lit.var, "!c%d.%d" % (lit.var, occ_number)]
    return ["x%d" % lit.var, "c%d.%d" % (lit.var, occ_number)]


def variable_gadget(var, occ_count):
    """The two gadget strings for a variable with ``occ_count`` occurrences.

    The first string lists all positive pairs then all negated pairs; the
    second swaps the halves, so an optimal alignment must commit to one
    polarity (the implied truth value).
    """
    pos = []
    neg = []
    for occ in range(1, occ_count + 1):
        pos += ["x%d" % var, "c%d.%d" % (var, occ)]
        neg += ["!x%d" % var, "!c%d.%d" % (var, occ)]
    return pos + neg, neg + pos


def clause_gadget(clause, occ_numbers):
    """The two clause strings: four symbols each, with halves swapped."""
    first = _slot_symbols(clause[0], occ_numbers[0])
    second = _slot_symbols(clause[1], occ_numbers[1])
    return first + second, second + first


def sat_reduction(formula):
    """Encode a 2-CNF formula as a pair of genomes.

    The minimum duplication-loss alignment cost of the pair equals
    ``10 * m - 2 * k`` where m is the clause count and k the maximum
    number of simultaneously satisfiable clauses.
    """
    if not formula.clauses:
        raise ValueError("formula must contain at least one clause")
    occ = _occurrence_numbers(formula)

    counts = {}
    for ci, clause in enumerate(formula.clauses, start=1):
        for lit in clause:
            counts[lit.var] = counts.get(lit.var, 0) + 1

    x_tokens = []
    y_tokens = []
    for var in range(1, formula.num_vars + 1):
        s1, s2 = variable_gadget(var, counts.get(var, 0))
        x_tokens += s1
        y_tokens += s2
    for ci, clause in enumerate(formula.clauses, start=1):
        sep = ["$%d" % ci] * 5
        t1, t2 = clause_gadget(clause, (occ[(ci, 0)], occ[(ci, 1)]))
        x_tokens += sep + t1
        y_tokens += sep + t2

    return SatReduction(
        Genome(x_tokens), Genome(y_tokens), formula.num_clauses, formula, occ
    )
