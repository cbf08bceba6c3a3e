"""Self-contained LP backend: bounded-variable primal simplex.

Solves the [0,1]-relaxation of the alignment program without any
external solver.  Every row carries a slack column (equalities get a
slack fixed at zero), so the basis matrix always embeds an identity
block and a cold start is always available.  Infeasibility after warm
starts, bound changes or row additions is repaired by a composite
phase 1 that minimizes the total bound violation of the basic variables.

Rows beyond an activation threshold are enforced lazily: the tableau
works on an active subset and re-solves until no stored row is violated,
so the returned point is feasible for the entire row set.  Dantzig
pricing with a switch to Bland's rule after a run of degenerate pivots;
deterministic tie-breaking throughout.
"""

import numpy as np
from scipy import sparse
from scipy.linalg.blas import dger

from duploss.ilp import EQ, GE, LE, FractionalPoint
from duploss.tolerances import FEASIBILITY_EPS, PIVOT_EPS

OPTIMAL = "OPTIMAL"
INFEASIBLE = "INFEASIBLE"
ITER_LIMIT = "ITER_LIMIT"

AT_LO, AT_UP, BASIC = 0, 1, 2

#: Reduced-cost threshold for entering candidates.
DUAL_EPS = 1e-9

#: Problems with at most this many rows keep every row in the tableau.
ACTIVATE_ALL_THRESHOLD = 300

#: Violated inactive rows added per activation round.
ACTIVATION_BATCH = 500

#: Consecutive degenerate pivots before switching to Bland's rule.
DEGENERATE_SWITCH = 200

_INF = float("inf")


class SolverFailure(Exception):
    """Internal LP failure (numerical breakdown or unbounded direction)."""


class LpProblem:
    """Mutable LP over named binary-relaxed variables.

    Rows are append-only; variable bounds may be tightened and reset
    between solves (used for branching fixings).  A single problem is
    single-owner mutable state; distinct problems are independent.
    """

    def __init__(self, variables, objective, rows=(), model=None, max_pivots=1_000_000):
        self.variables = list(variables)
        if not self.variables:
            raise ValueError("LP needs at least one variable")
        self.var_pos = {v: k for k, v in enumerate(self.variables)}
        self.model = model
        self.max_pivots = max_pivots
        n = len(self.variables)
        self.c = np.zeros(n)
        for v, coef in objective.items():
            self.c[self.var_pos[v]] = float(coef)
        self.lo = np.zeros(n)
        self.up = np.ones(n)
        self.rows = []
        self._row_cache = None
        self._row_cache_size = 0
        self._tab = None
        self.add_rows(rows)

    @classmethod
    def from_model(cls, model, max_pivots=1_000_000):
        return cls(
            model.variables,
            model.objective,
            model.constraints,
            model=model,
            max_pivots=max_pivots,
        )

    @property
    def num_rows(self):
        return len(self.rows)

    def add_rows(self, rows):
        rows = list(rows)
        if not rows:
            return
        for row in rows:
            for v, _ in row.coeffs:
                if v not in self.var_pos:
                    raise KeyError("row references unknown variable %r" % (v,))
        self.rows.extend(rows)

    def _build_row_block(self, rows):
        data, indices, indptr = [], [], [0]
        rhs = np.empty(len(rows))
        senses = np.empty(len(rows), dtype=np.int8)
        code = {LE: 0, GE: 1, EQ: 2}
        for k, row in enumerate(rows):
            for v, coef in row.coeffs:
                indices.append(self.var_pos[v])
                data.append(float(coef))
            indptr.append(len(data))
            rhs[k] = float(row.rhs)
            senses[k] = code[row.sense]
        mat = sparse.csr_matrix(
            (np.asarray(data), np.asarray(indices), np.asarray(indptr)),
            shape=(len(rows), len(self.variables)),
        )
        return mat, rhs, senses

    def set_bounds(self, var, lo, up):
        k = self.var_pos[var]
        self.lo[k] = lo
        self.up[k] = up

    def fix(self, var, value):
        self.set_bounds(var, float(value), float(value))

    def reset_bounds(self):
        self.lo.fill(0.0)
        self.up.fill(1.0)

    def _row_matrix(self):
        """CSR of all rows plus rhs/sense arrays, extended incrementally."""
        if self._row_cache is None:
            self._row_cache = self._build_row_block(self.rows)
            self._row_cache_size = len(self.rows)
        elif self._row_cache_size < len(self.rows):
            mat, rhs, senses = self._row_cache
            new_mat, new_rhs, new_senses = self._build_row_block(
                self.rows[self._row_cache_size:]
            )
            self._row_cache = (
                sparse.vstack([mat, new_mat], format="csr"),
                np.concatenate([rhs, new_rhs]),
                np.concatenate([senses, new_senses]),
            )
            self._row_cache_size = len(self.rows)
        return self._row_cache


class LpSolution:
    """Primal solution; OPTIMAL means feasible for every stored row."""

    def __init__(self, status, objective, values, problem, iterations):
        self.status = status
        self.objective = objective
        self.values = values
        self._problem = problem
        self.iterations = iterations

    def value(self, var):
        return float(self.values[self._problem.var_pos[var]])

    def as_dict(self):
        return {v: float(x) for v, x in zip(self._problem.variables, self.values)}

    @property
    def primal(self):
        if self._problem.model is not None:
            return FractionalPoint(self._problem.model, np.clip(self.values, 0.0, 1.0))
        return self.as_dict()

    def basis_status(self):
        """Debug dump: variable -> 'basic' | 'at_lower' | 'at_upper'."""
        tab = self._problem._tab
        if tab is None:
            return {}
        names = {AT_LO: "at_lower", AT_UP: "at_upper", BASIC: "basic"}
        return {
            v: names[int(tab.status[k])]
            for k, v in enumerate(self._problem.variables)
        }


class _Tableau:
    """Dense simplex tableau over the active row subset."""

    def __init__(self, problem, active):
        self.problem = problem
        self.nstruct = len(problem.variables)
        self.active = []
        self.A = np.zeros((0, self.nstruct))
        self.b = np.zeros(0)
        self.slack_lo = np.zeros(0)
        self.slack_up = np.zeros(0)
        # tableau with rhs as the trailing column
        self.T = np.zeros((0, self.nstruct + 1))
        self.basis = np.zeros(0, dtype=np.int64)
        self.status = np.full(self.nstruct, AT_LO, dtype=np.int8)
        self.pivots = 0
        self.degenerate_run = 0
        self.append_rows(active)

    # -- construction ----------------------------------------------------

    def _dense_row(self, row):
        a = np.zeros(self.nstruct)
        for v, coef in row.coeffs:
            a[self.problem.var_pos[v]] = float(coef)
        return a

    def _slack_bounds(self, sense):
        if sense == LE:
            return 0.0, _INF
        if sense == GE:
            return -_INF, 0.0
        return 0.0, 0.0

    def append_rows(self, row_ids):
        """Activate rows, entering their slacks into the basis."""
        row_ids = [k for k in row_ids if k not in set(self.active)]
        if not row_ids:
            return
        old_rows = len(self.active)
        old_cols = self.nstruct + old_rows
        new = len(row_ids)

        A_new = np.array([self._dense_row(self.problem.rows[k]) for k in row_ids])
        b_new = np.array([float(self.problem.rows[k].rhs) for k in row_ids])
        slack_bounds = [self._slack_bounds(self.problem.rows[k].sense) for k in row_ids]

        # eliminate current basic variables from each incoming row;
        # coefficients of new rows on current basis columns (slack cols are 0)
        coef_on_basis = np.zeros((new, old_rows))
        for i in range(old_rows):
            col = self.basis[i]
            if col < self.nstruct:
                coef_on_basis[:, i] = A_new[:, col]
        t_new = np.hstack([A_new, np.zeros((new, old_rows)), b_new[:, None]])
        if old_rows:
            t_new -= coef_on_basis @ self.T

        # grow tableau: insert the new slack columns before the rhs column
        grown = np.zeros((old_rows + new, old_cols + new + 1))
        grown[:old_rows, :old_cols] = self.T[:, :old_cols]
        grown[:old_rows, -1] = self.T[:, -1]
        grown[old_rows:, :old_cols] = t_new[:, :old_cols]
        grown[old_rows:, -1] = t_new[:, -1]
        grown[old_rows:, old_cols: old_cols + new] = np.eye(new)
        self.T = grown

        self.A = np.vstack([self.A, A_new]) if old_rows else A_new
        self.b = np.concatenate([self.b, b_new])
        self.slack_lo = np.concatenate(
            [self.slack_lo, np.array([lb for lb, _ in slack_bounds])]
        )
        self.slack_up = np.concatenate(
            [self.slack_up, np.array([ub for _, ub in slack_bounds])]
        )
        self.basis = np.concatenate(
            [self.basis, np.arange(old_cols, old_cols + new, dtype=np.int64)]
        )
        self.status = np.concatenate(
            [
                self.status[: old_cols],
                np.full(new, BASIC, dtype=np.int8),
            ]
        )
        self.status[self.basis[:old_rows]] = BASIC
        self.active.extend(row_ids)

    # -- state ------------------------------------------------------------

    @property
    def nrows(self):
        return len(self.active)

    @property
    def ncols(self):
        return self.nstruct + self.nrows

    def col_lo(self):
        return np.concatenate([self.problem.lo, self.slack_lo])

    def col_up(self):
        return np.concatenate([self.problem.up, self.slack_up])

    def nonbasic_values(self, lo_c, up_c):
        vals = np.where(self.status == AT_UP, up_c, lo_c)
        vals[self.status == BASIC] = 0.0
        return vals

    def beta(self, vals):
        """Current basic-variable values from the rhs column."""
        out = self.T[:, -1].copy()
        nz = np.nonzero(vals)[0]
        if len(nz):
            out -= self.T[:, nz] @ vals[nz]
        return out

    def structural_solution(self, vals, beta):
        x = vals[: self.nstruct].copy()
        for i in range(self.nrows):
            col = self.basis[i]
            if col < self.nstruct:
                x[col] = beta[i]
        return x

    def refactor(self):
        """Rebuild the tableau from the basis columns (numerical hygiene)."""
        nrows = self.nrows
        B = np.zeros((nrows, nrows))
        for i, col in enumerate(self.basis):
            if col < self.nstruct:
                B[:, i] = self.A[:, col]
            else:
                B[col - self.nstruct, i] = 1.0
        rhs = np.hstack([self.A, np.eye(nrows), self.b[:, None]])
        try:
            self.T = np.linalg.solve(B, rhs)
        except np.linalg.LinAlgError as exc:
            raise SolverFailure("singular basis during refactorization") from exc

    # -- pivoting ---------------------------------------------------------

    def pivot(self, entering, leaving_row, leaving_status):
        piv = self.T[leaving_row, entering]
        if abs(piv) < PIVOT_EPS:
            raise SolverFailure("pivot element too small")
        col = self.T[:, entering].copy()
        col[leaving_row] = 0.0
        row = self.T[leaving_row] / piv
        # in-place rank-1 update: T viewed transposed is Fortran-contiguous
        if not self.T.flags["C_CONTIGUOUS"]:
            self.T = np.ascontiguousarray(self.T)
        dger(-1.0, row, col, a=self.T.T, overwrite_a=1)
        self.T[leaving_row] = row
        self.T[:, entering] = 0.0
        self.T[leaving_row, entering] = 1.0
        left_col = self.basis[leaving_row]
        self.status[left_col] = leaving_status
        self.status[entering] = BASIC
        self.basis[leaving_row] = entering
        self.pivots += 1

    def flip(self, entering):
        self.status[entering] = AT_UP if self.status[entering] == AT_LO else AT_LO
        self.pivots += 1


def _choose_entering(d, status, movable, use_bland):
    """Index and direction of the entering column, or (None, 0)."""
    lo_ok = (status == AT_LO) & movable & (d < -DUAL_EPS)
    up_ok = (status == AT_UP) & movable & (d > DUAL_EPS)
    any_ok = lo_ok | up_ok
    if not any_ok.any():
        return None, 0
    if use_bland:
        j = int(np.nonzero(any_ok)[0][0])
    else:
        score = np.where(any_ok, np.abs(d), -1.0)
        j = int(np.argmax(score))
    return j, (1 if lo_ok[j] else -1)


def _ratio_test(tab, j, direction, beta, lo_c, up_c, phase1, use_bland):
    """Largest step for entering column j; returns (delta, leaving_row, status).

    ``leaving_row`` is None for a bound flip.  In phase 1, basics outside
    their bounds block only when they reach the violated bound (turning
    feasible); feasible basics block at both bounds as usual.
    """
    rate = -direction * tab.T[: tab.nrows, j]
    lb = lo_c[tab.basis]
    ub = up_c[tab.basis]

    deltas = np.full(tab.nrows, _INF)
    leave_at = np.zeros(tab.nrows, dtype=np.int8)

    below = beta < lb - FEASIBILITY_EPS
    above = beta > ub + FEASIBILITY_EPS
    feas = ~(below | above)

    rising = rate > PIVOT_EPS
    falling = rate < -PIVOT_EPS

    sel = feas & rising & (ub < _INF)
    deltas[sel] = (ub[sel] - beta[sel]) / rate[sel]
    leave_at[sel] = AT_UP
    sel = feas & falling & (lb > -_INF)
    deltas[sel] = (beta[sel] - lb[sel]) / -rate[sel]
    leave_at[sel] = AT_LO
    if phase1:
        sel = below & rising
        deltas[sel] = (lb[sel] - beta[sel]) / rate[sel]
        leave_at[sel] = AT_LO
        sel = above & falling
        deltas[sel] = (beta[sel] - ub[sel]) / -rate[sel]
        leave_at[sel] = AT_UP

    np.clip(deltas, 0.0, None, out=deltas)
    flip_delta = up_c[j] - lo_c[j]
    best = deltas.min() if tab.nrows else _INF
    if flip_delta <= best:
        if flip_delta == _INF:
            raise SolverFailure("unbounded direction in LP")
        return flip_delta, None, 0
    ties = np.nonzero(deltas <= best + 1e-12)[0]
    if use_bland:
        row = int(ties[np.argmin(tab.basis[ties])])
    else:
        row = int(ties[np.argmax(np.abs(rate[ties]))])
    return best, int(row), int(leave_at[row])


def _run_phase(tab, phase1, budget):
    """Iterate the simplex until phase optimality; returns pivot count used."""
    used = 0
    bland = False
    # loop invariants: bounds and costs only change between solves
    lo_c = tab.col_lo()
    up_c = tab.col_up()
    cost = None if phase1 else np.concatenate([tab.problem.c, np.zeros(tab.nrows)])
    movable_base = (up_c - lo_c) > 0
    while True:
        if used >= budget:
            return used, ITER_LIMIT
        vals = tab.nonbasic_values(lo_c, up_c)
        beta = tab.beta(vals)
        lb = lo_c[tab.basis]
        ub = up_c[tab.basis]

        if phase1:
            below = beta < lb - FEASIBILITY_EPS
            above = beta > ub + FEASIBILITY_EPS
            if not below.any() and not above.any():
                return used, OPTIMAL
            g = above.astype(float) - below.astype(float)
            d = -(g @ tab.T[:, : tab.ncols])
        else:
            cb = cost[tab.basis]
            d = cost - cb @ tab.T[:, : tab.ncols]

        movable = movable_base.copy()
        movable[tab.basis] = False
        j, direction = _choose_entering(d, tab.status, movable, bland)
        if j is None:
            if phase1:
                return used, INFEASIBLE
            return used, OPTIMAL

        delta, row, leave_status = _ratio_test(
            tab, j, direction, beta, lo_c, up_c, phase1, bland
        )
        if row is None:
            tab.flip(j)
        else:
            tab.pivot(j, row, leave_status)
        used += 1
        if delta <= 1e-12:
            tab.degenerate_run += 1
            if tab.degenerate_run > DEGENERATE_SWITCH:
                bland = True
        else:
            tab.degenerate_run = 0
            bland = False


def _initial_active(problem):
    if len(problem.rows) <= ACTIVATE_ALL_THRESHOLD:
        return list(range(len(problem.rows)))
    return [k for k, row in enumerate(problem.rows) if row.sense == EQ]


def _violated_rows(problem, x, skip):
    mat, rhs, senses = problem._row_matrix()
    lhs = mat @ x
    slack = lhs - rhs
    bad = np.where(
        senses == 0,
        slack > FEASIBILITY_EPS,
        np.where(senses == 1, slack < -FEASIBILITY_EPS, np.abs(slack) > FEASIBILITY_EPS),
    )
    out = [
        (abs(float(slack[k])), k)
        for k in np.nonzero(bad)[0]
        if k not in skip
    ]
    out.sort(reverse=True)
    return [k for _, k in out]


def solve_lp(problem, warm_start=None):
    """Minimize the problem objective over its rows and bounds.

    With ``warm_start`` (any previous solution of the same problem) the
    existing basis is reused; otherwise the tableau is rebuilt.  The
    OPTIMAL solution is primal feasible for every stored row.
    """
    if warm_start is None or problem._tab is None:
        problem._tab = _Tableau(problem, _initial_active(problem))
    tab = problem._tab
    budget = problem.max_pivots
    used_total = 0

    for _ in range(len(problem.rows) + 2):
        used, status = _run_phase(tab, phase1=True, budget=budget - used_total)
        used_total += used
        if status == INFEASIBLE:
            return LpSolution(INFEASIBLE, _INF, None, problem, used_total)
        if status == ITER_LIMIT:
            return LpSolution(ITER_LIMIT, _INF, None, problem, used_total)
        used, status = _run_phase(tab, phase1=False, budget=budget - used_total)
        used_total += used
        if status == ITER_LIMIT:
            return LpSolution(ITER_LIMIT, _INF, None, problem, used_total)

        lo_c = tab.col_lo()
        up_c = tab.col_up()
        vals = tab.nonbasic_values(lo_c, up_c)
        beta = tab.beta(vals)
        x = tab.structural_solution(vals, beta)
        missing = _violated_rows(problem, x, skip=set(tab.active))
        if not missing:
            objective = float(problem.c @ x)
            return LpSolution(OPTIMAL, objective, x, problem, used_total)
        tab.append_rows(missing[:ACTIVATION_BATCH])
    raise SolverFailure("row activation failed to converge")


def add_rows_and_resolve(problem, rows, prev):
    """Append rows and re-solve, warm-starting from ``prev`` when possible."""
    problem.add_rows(rows)
    if prev is not None and prev.status == OPTIMAL and problem._tab is not None:
        # activate the new rows immediately; phase 1 repairs their slacks
        start = len(problem.rows) - len(rows)
        problem._tab.append_rows(range(start, len(problem.rows)))
        return solve_lp(problem, warm_start=prev)
    problem._tab = None
    return solve_lp(problem)
