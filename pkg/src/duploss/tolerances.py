"""Numeric tolerances shared by the LP layer, separators and search.

Every floating-point comparison in the package goes through these
constants; event costs themselves stay exact rationals.
"""

#: Primal feasibility and optimality tolerance of the LP backend.
FEASIBILITY_EPS = 1e-7

#: Variable-bound tolerance for fractional points.
BOUND_EPS = 1e-9

#: A cut must beat its right-hand side by this much to be emitted.
VIOLATION_EPS = 1e-6

#: A value within this distance of 0 or 1 counts as integral.
INTEGRALITY_EPS = 1e-6

#: Smallest pivot element the simplex accepts.
PIVOT_EPS = 1e-9
