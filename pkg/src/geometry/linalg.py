"""
Exact rational linear algebra on top of FLINT's ``fmpq_mat``.

The rest of the engine works with ``Fraction``; conversion happens only at
this boundary.
"""

from fractions import Fraction
from typing import List, Sequence

from flint import fmpq, fmpq_mat

Matrix = Sequence[Sequence[Fraction]]


def _to_fmpq(value: Fraction) -> fmpq:
    value = Fraction(value)
    return fmpq(value.numerator, value.denominator)


def _to_fraction(value: fmpq) -> Fraction:
    return Fraction(int(value.p), int(value.q))


def to_matrix(rows: Matrix) -> fmpq_mat:
    """Build an ``fmpq_mat`` from a non-empty list of rational rows."""
    n_rows = len(rows)
    n_cols = len(rows[0])
    entries = [_to_fmpq(entry) for row in rows for entry in row]
    return fmpq_mat(n_rows, n_cols, entries)


def from_matrix(matrix: fmpq_mat) -> List[List[Fraction]]:
    """Convert an ``fmpq_mat`` back to nested lists of ``Fraction``."""
    return [[_to_fraction(matrix[i, j]) for j in range(matrix.ncols())]
            for i in range(matrix.nrows())]


def determinant(rows: Matrix) -> Fraction:
    """Exact determinant of a square rational matrix."""
    if not rows:
        return Fraction(1)
    return _to_fraction(to_matrix(rows).det())


def solve(rows: Matrix, rhs: Matrix) -> List[List[Fraction]]:
    """
    Solve A·X = B exactly.

    Args:
        rows: Square invertible matrix A
        rhs: Right-hand side B (same number of rows as A)

    Returns:
        X as nested lists

    Raises:
        ZeroDivisionError: If A is singular
    """
    return from_matrix(to_matrix(rows).solve(to_matrix(rhs)))


def rank(rows: Matrix) -> int:
    """Rank of a rational matrix; an empty row list has rank 0."""
    if not rows:
        return 0
    _, matrix_rank = to_matrix(rows).rref()
    return int(matrix_rank)


def row_echelon(rows: Matrix) -> List[List[Fraction]]:
    """Nonzero rows of the reduced row echelon form; equal row spaces give equal results."""
    if not rows:
        return []
    reduced, matrix_rank = to_matrix(rows).rref()
    return from_matrix(reduced)[:int(matrix_rank)]


def nullspace(rows: Matrix, n_cols: int) -> List[List[Fraction]]:
    """
    Basis of {y : A·y = 0} read off the reduced row echelon form.

    Args:
        rows: Matrix A, possibly empty
        n_cols: Number of columns of A

    Returns:
        List of basis vectors
    """
    if not rows:
        return [[Fraction(int(i == j)) for j in range(n_cols)] for i in range(n_cols)]
    reduced, matrix_rank = to_matrix(rows).rref()
    echelon = from_matrix(reduced)
    pivots = []
    for i in range(int(matrix_rank)):
        pivots.append(next(j for j in range(n_cols) if echelon[i][j] != 0))
    basis = []
    for free in (j for j in range(n_cols) if j not in pivots):
        vector = [Fraction(0)] * n_cols
        vector[free] = Fraction(1)
        for i, pivot in enumerate(pivots):
            vector[pivot] = -echelon[i][free]
        basis.append(vector)
    return basis
