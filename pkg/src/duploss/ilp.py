"""Binary-program representation of an alignment instance.

One binary variable per candidate event: ``match`` variables select
alignment edges, ``loss`` variables single-gene losses, ``dup``
variables duplications.  The base model carries the objective, one
conflict row per incompatible edge pair, and one cover equality per
genome position.  Duplication-cycle rows are never pre-enumerated (their
number can grow exponentially); they enter later as cuts.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from duploss.instance import (
    SIDE_A,
    SIDE_B,
    LabeledAlignment,
    edges_incompatible,
    validate_labeling,
)
from duploss.tolerances import BOUND_EPS, INTEGRALITY_EPS

MATCH = "match"
LOSS = "loss"
DUP = "dup"

LE = "<="
GE = ">="
EQ = "="

_ONE = Fraction(1)


@dataclass(frozen=True, order=True)
class VariableId:
    """Binary variable for one candidate event; index into the instance set."""

    kind: str
    index: int


@dataclass(frozen=True)
class LinearConstraint:
    """Sparse row: sum of coeff * var  (sense)  rhs."""

    coeffs: tuple  # ((VariableId, Fraction), ...) sorted, no zeros
    sense: str
    rhs: Fraction
    tag: str = ""

    @classmethod
    def make(cls, coeffs, sense, rhs, tag=""):
        items = tuple(
            sorted((v, Fraction(c)) for v, c in dict(coeffs).items() if c != 0)
        )
        return cls(items, sense, Fraction(rhs), tag)

    def evaluate(self, value_of):
        """Left-hand side at a point given as ``value_of(var) -> number``."""
        return sum(float(c) * value_of(v) for v, c in self.coeffs)

    def violation(self, value_of):
        """Positive when the row is violated at the point."""
        lhs = self.evaluate(value_of)
        rhs = float(self.rhs)
        if self.sense == LE:
            return lhs - rhs
        if self.sense == GE:
            return rhs - lhs
        return abs(lhs - rhs)

    def satisfied_exact(self, value_of):
        """Exact-arithmetic check at a rational/integer point."""
        lhs = sum(c * value_of(v) for v, c in self.coeffs)
        if self.sense == LE:
            return lhs <= self.rhs
        if self.sense == GE:
            return lhs >= self.rhs
        return lhs == self.rhs

    def key(self):
        """Canonical identity used for cut deduplication (cached, int-based)."""
        cached = getattr(self, "_key", None)
        if cached is None:
            cached = (
                self.sense,
                self.rhs.numerator,
                self.rhs.denominator,
                tuple(
                    (v.kind, v.index, c.numerator, c.denominator)
                    for v, c in self.coeffs
                ),
            )
            object.__setattr__(self, "_key", cached)
        return cached


class IlpModel:
    """Variables, objective and base rows for one instance."""

    def __init__(self, instance):
        self.instance = instance
        self.variables = (
            [VariableId(MATCH, k) for k in range(len(instance.edges))]
            + [VariableId(LOSS, k) for k in range(len(instance.losses))]
            + [VariableId(DUP, k) for k in range(len(instance.dups))]
        )
        self.var_index = {v: k for k, v in enumerate(self.variables)}
        self.num_matches = len(instance.edges)
        self.num_losses = len(instance.losses)
        self.num_dups = len(instance.dups)

        self._match_of = {e: VariableId(MATCH, k) for k, e in enumerate(instance.edges)}
        self._loss_of = {l: VariableId(LOSS, k) for k, l in enumerate(instance.losses)}
        self._dup_of = {d: VariableId(DUP, k) for k, d in enumerate(instance.dups)}

        self.objective = {}
        for v in self.variables:
            cost = self.event_of(v).cost
            if cost != 0:
                self.objective[v] = cost
        self.constraints = []

    def event_of(self, var):
        inst = self.instance
        if var.kind == MATCH:
            return inst.edges[var.index]
        if var.kind == LOSS:
            return inst.losses[var.index]
        return inst.dups[var.index]

    def match_var(self, edge):
        return self._match_of[edge]

    def loss_var(self, loss):
        return self._loss_of[loss]

    def dup_var(self, dup):
        return self._dup_of[dup]

    def objective_value(self, values):
        """Exact objective at an integer assignment ``values[var] -> 0/1``."""
        return sum((c * values(v) for v, c in self.objective.items()), Fraction(0))

    def labeling_to_point(self, lab):
        """0/1 image of a labeling in model variable order."""
        arr = np.zeros(len(self.variables))
        for e in lab.matches:
            arr[self.var_index[self.match_var(e)]] = 1.0
        for l in lab.losses:
            arr[self.var_index[self.loss_var(l)]] = 1.0
        for d in lab.dups:
            arr[self.var_index[self.dup_var(d)]] = 1.0
        return FractionalPoint(self, arr)

    def point_to_labeling(self, point):
        """Round a near-integral point to the labeling it selects."""
        inst = self.instance
        matches, losses, dups = [], [], []
        for var, value in point.items():
            if value > 0.5:
                if var.kind == MATCH:
                    matches.append(inst.edges[var.index])
                elif var.kind == LOSS:
                    losses.append(inst.losses[var.index])
                else:
                    dups.append(inst.dups[var.index])
        return LabeledAlignment.of(matches, losses, dups)


class FractionalPoint:
    """Values of all model variables, possibly fractional, within [0, 1]."""

    __slots__ = ("model", "array")

    def __init__(self, model, array):
        self.model = model
        self.array = np.asarray(array, dtype=float)
        if len(self.array) != len(model.variables):
            raise ValueError("point length does not match model")
        if (self.array < -BOUND_EPS).any() or (self.array > 1 + BOUND_EPS).any():
            raise ValueError("point leaves [0, 1] bounds")

    @classmethod
    def from_dict(cls, model, values):
        arr = np.zeros(len(model.variables))
        for var, val in values.items():
            arr[model.var_index[var]] = val
        return cls(model, arr)

    def value(self, var):
        return float(self.array[self.model.var_index[var]])

    __getitem__ = value

    def items(self):
        for var, val in zip(self.model.variables, self.array):
            yield var, float(val)

    def as_dict(self):
        return dict(self.items())

    def match_values(self):
        """Slice aligned with ``instance.edges``."""
        return self.array[: self.model.num_matches]

    def loss_values(self):
        n = self.model.num_matches
        return self.array[n: n + self.model.num_losses]

    def dup_values(self):
        n = self.model.num_matches + self.model.num_losses
        return self.array[n:]

    def is_integral(self, eps=INTEGRALITY_EPS):
        return bool(np.all(np.abs(self.array - np.round(self.array)) <= eps))


def build_base_model(instance):
    """Objective, pairwise conflict rows and per-position cover equalities."""
    model = IlpModel(instance)
    rows = model.constraints

    edges = instance.edges
    for a in range(len(edges)):
        va = VariableId(MATCH, a)
        for b in range(a + 1, len(edges)):
            if edges_incompatible(edges[a], edges[b]):
                rows.append(
                    LinearConstraint(
                        ((va, _ONE), (VariableId(MATCH, b), _ONE)), LE, _ONE, "pair"
                    )
                )

    loss_var_at = {
        (l.side, l.position): VariableId(LOSS, k) for k, l in enumerate(instance.losses)
    }
    dup_vars_covering = {}
    for k, d in enumerate(instance.dups):
        for p in d.target.positions():
            dup_vars_covering.setdefault((d.side, p), []).append(VariableId(DUP, k))
    edge_vars_at = {}
    for k, e in enumerate(edges):
        edge_vars_at.setdefault((SIDE_A, e.i), []).append(VariableId(MATCH, k))
        edge_vars_at.setdefault((SIDE_B, e.j), []).append(VariableId(MATCH, k))

    for side, tag in ((SIDE_A, "cover_a"), (SIDE_B, "cover_b")):
        for pos in instance.positions(side):
            coeffs = [(loss_var_at[(side, pos)], _ONE)]
            coeffs += [(v, _ONE) for v in edge_vars_at.get((side, pos), ())]
            coeffs += [(v, _ONE) for v in dup_vars_covering.get((side, pos), ())]
            rows.append(LinearConstraint(tuple(sorted(coeffs)), EQ, _ONE, tag))

    return model


@dataclass
class IntegralityError:
    """Returned when a point is not close enough to 0/1 to round."""

    kind: str
    var: VariableId
    value: float

    def __str__(self):
        return "NOT_INTEGRAL(%s=%s)" % (self.var, self.value)


def check_integral_feasible(model, instance, point, eps=INTEGRALITY_EPS):
    """Round a point and validate the labeling it encodes.

    Returns the LabeledAlignment on success, otherwise the validation
    report (or an IntegralityError when rounding is not safe).
    """
    for var, value in point.items():
        if abs(value - round(value)) > eps:
            return IntegralityError("NOT_INTEGRAL", var, value)
    lab = model.point_to_labeling(point)
    report = validate_labeling(instance, lab)
    if report is not None:
        return report
    return lab


def _lp_var_name(model, var):
    inst = model.instance
    if var.kind == MATCH:
        e = inst.edges[var.index]
        return "x_%d_%d" % (e.i, e.j)
    if var.kind == LOSS:
        l = inst.losses[var.index]
        return "z_%s_%d" % (l.side, l.position)
    d = inst.dups[var.index]
    side_dups = inst.dups_on(d.side)
    return "y_%s_%d" % (d.side, side_dups.index(d))


def export_lp_text(model):
    """Plain-text LP rendering for cross-checking with external solvers."""
    names = {v: _lp_var_name(model, v) for v in model.variables}
    lines = ["Minimize", " obj: " + " + ".join(
        "%s %s" % (c, names[v]) for v, c in sorted(model.objective.items())
    ) if model.objective else " obj: 0"]
    lines.append("Subject To")
    for idx, row in enumerate(model.constraints):
        terms = " + ".join(
            ("%s" % names[v]) if c == 1 else ("%s %s" % (c, names[v]))
            for v, c in row.coeffs
        )
        sense = {LE: "<=", GE: ">=", EQ: "="}[row.sense]
        lines.append(" %s_%d: %s %s %s" % (row.tag or "c", idx, terms, sense, row.rhs))
    lines.append("Bounds")
    for v in model.variables:
        lines.append(" 0 <= %s <= 1" % names[v])
    lines.append("Binary")
    lines.append(" " + " ".join(names[v] for v in model.variables))
    lines.append("End")
    return "\n".join(lines) + "\n"
