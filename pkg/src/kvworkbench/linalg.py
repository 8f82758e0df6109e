"""Exact rational affine systems: RREF solve and nullspace bases.

Rows are sparse {variable: Fraction} maps.  Pivoting is deterministic:
variables are processed in the order given (callers may reverse it to get
a second, equally valid solution), and within a column the lowest-index
remaining row wins.  Free variables are set to zero in the particular
solution.  Inconsistency is a return value, not an exception.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

_ZERO = Fraction(0)


@dataclass
class SolveResult:
    consistent: bool
    solution: dict = field(default_factory=dict)
    nullspace: list = field(default_factory=list)
    pivot_variables: list = field(default_factory=list)
    free_variables: list = field(default_factory=list)
    offending_rhs: Fraction = _ZERO


class AffineSystem:
    """A list of sparse rational rows `sum coeff*var = rhs`."""

    def __init__(self, variables):
        self.variables = list(variables)
        self.rows = []
        self.rhs = []

    def add_row(self, coeffs: dict, rhs):
        row = {v: Fraction(c) for v, c in coeffs.items() if c}
        self.rows.append(row)
        self.rhs.append(Fraction(rhs))

    def solve(self, variable_order=None) -> SolveResult:
        order = list(variable_order) if variable_order is not None \
            else list(self.variables)
        if set(order) != set(self.variables):
            raise ValueError("variable_order must permute the variables")
        rows = [dict(r) for r in self.rows]
        rhs = list(self.rhs)
        pivots = []          # (variable, row index)
        used = set()
        for var in order:
            pick = None
            for i in range(len(rows)):
                if i not in used and rows[i].get(var):
                    pick = i
                    break
            if pick is None:
                continue
            used.add(pick)
            pivots.append((var, pick))
            # normalize the pivot row; keeps entries reduced as we eliminate
            inv = 1 / rows[pick][var]
            rows[pick] = {v: c * inv for v, c in rows[pick].items()}
            rhs[pick] *= inv
            for i in range(len(rows)):
                if i == pick:
                    continue
                factor = rows[i].get(var)
                if not factor:
                    continue
                for v, c in rows[pick].items():
                    acc = rows[i].get(v, _ZERO) - factor * c
                    if acc:
                        rows[i][v] = acc
                    else:
                        rows[i].pop(v, None)
                rhs[i] -= factor * rhs[pick]
        for i in range(len(rows)):
            if i not in used and rhs[i]:
                return SolveResult(False, offending_rhs=rhs[i])
        pivot_vars = [v for v, _ in pivots]
        free_vars = [v for v in order if v not in set(pivot_vars)]
        solution = {v: _ZERO for v in order}
        for var, i in pivots:
            solution[var] = rhs[i]
        nullspace = []
        for fv in free_vars:
            vec = {fv: Fraction(1)}
            for var, i in pivots:
                c = rows[i].get(fv)
                if c:
                    vec[var] = -c
            nullspace.append(vec)
        return SolveResult(True, solution, nullspace, pivot_vars, free_vars)


def solve_homogeneous_basis(variables, rows) -> list:
    """Nullspace basis of a homogeneous system given as sparse rows."""
    sys = AffineSystem(variables)
    for row in rows:
        sys.add_row(row, 0)
    return sys.solve().nullspace
