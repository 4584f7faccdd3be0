"""
Fincke–Pohst enumeration of lattice points inside an ellipsoid.

A positive definite real quadratic form Q(x) = xᵀGx on Z^n is rewritten as

    Q(x) = Σ_i q_i · (x_i + Σ_{j>i} μ_ij x_j)²

and the coordinates are fixed from the last one down, each within the interval
left over by the coordinates already chosen. The same decomposition gives an
explicit upper bound for the number of lattice points in {Q ≤ t}, which the
Green and intersection layers use to bound truncation tails.
"""

from fractions import Fraction
from math import ceil, floor, lcm, sqrt
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from .resilience import LatticeError


def ldl_coefficients(gram: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Split a positive definite Gram matrix into Fincke–Pohst coefficients.

    Args:
        gram: Symmetric positive definite n×n matrix

    Returns:
        (q, mu): the diagonal weights q_i and the strictly upper triangular μ_ij

    Raises:
        LatticeError: if the matrix is not positive definite
    """
    g = np.asarray(gram, dtype=float)
    n = g.shape[0]
    if n == 0:
        return np.zeros(0), np.zeros((0, 0))
    try:
        lower = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as e:
        raise LatticeError(f"quadratic form is not positive definite: {e}") from e
    r = lower.T
    diag = np.diag(r).copy()
    mu = r / diag[:, None]
    np.fill_diagonal(mu, 0.0)
    return diag * diag, np.triu(mu, 1)


def short_vectors(gram: np.ndarray, bound: float, slack: float = 1e-9) -> Iterator[Tuple[int, ...]]:
    """
    Yield every integer vector x with Q(x) ≤ bound (up to a relative slack).

    Vectors whose value is within the slack of the bound are included; callers
    that need an exact condition re-check each candidate in exact arithmetic.
    """
    q, mu = ldl_coefficients(gram)
    n = len(q)
    if n == 0:
        yield ()
        return
    if bound < 0:
        return

    tol = slack * max(1.0, abs(bound))
    x: List[int] = [0] * n

    def search(i: int, remaining: float) -> Iterator[Tuple[int, ...]]:
        center = -float(np.dot(mu[i, i + 1:], x[i + 1:])) if i + 1 < n else 0.0
        radius = sqrt(max(remaining, 0.0) / q[i])
        lo = ceil(center - radius - 1e-9)
        hi = floor(center + radius + 1e-9)
        for xi in range(lo, hi + 1):
            rem = remaining - q[i] * (xi - center) ** 2
            if rem < -tol:
                continue
            x[i] = xi
            if i == 0:
                yield tuple(x)
            else:
                yield from search(i - 1, rem)
        x[i] = 0

    yield from search(n - 1, bound + tol)


def count_bound(q: np.ndarray, t: float) -> float:
    """
    Upper bound for #{x ∈ Z^n : Q(x) ≤ t}.

    At each level of the search the admissible interval has length at most
    2·sqrt(t/q_i), hence holds at most 1 + 2·sqrt(t/q_i) integers.
    """
    if t < 0:
        return 0.0
    return float(np.prod(1.0 + 2.0 * np.sqrt(t / np.asarray(q, dtype=float))))


def integral_form(matrix: Sequence[Sequence[Fraction]]) -> Tuple[List[List[int]], int]:
    """
    Clear denominators of a rational symmetric matrix.

    Returns:
        (S, D) with S an integer matrix and D > 0 such that the input equals S/D
    """
    denominators = [Fraction(v).denominator for row in matrix for v in row]
    scale = lcm(*denominators) if denominators else 1
    return [[int(Fraction(v) * scale) for v in row] for row in matrix], scale


def form_value(s: Sequence[Sequence[int]], x: Sequence[int]) -> int:
    """xᵀSx in exact integer arithmetic"""
    n = len(x)
    total = 0
    for i in range(n):
        if x[i] == 0:
            continue
        row = s[i]
        acc = 0
        for j in range(n):
            if x[j]:
                acc += row[j] * x[j]
        total += x[i] * acc
    return total
