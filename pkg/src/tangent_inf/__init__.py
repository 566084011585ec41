"""Exact analysis of polynomial optimization at infinity.

Decides boundedness, attainment, compactness of the solution set and
coercivity of a polynomial objective over a basic closed semi-algebraic set,
and computes the optimal value, from the branches of the tangency curve at
infinity and the finitely many critical values.
"""

__version__ = "0.1.0"
