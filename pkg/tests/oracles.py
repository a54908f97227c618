"""Independent oracles for cross-checking production numerics.

The production eigenvalue path is LAPACK's Hessenberg QR; the oracle
here goes the long way around: characteristic polynomial coefficients
from the Faddeev-LeVerrier recursion, then roots of that polynomial.
The two share no code beyond numpy itself.
"""

import numpy as np
from scipy.optimize import linear_sum_assignment


def charpoly_coeffs(A):
    """Coefficients [1, c_1, ..., c_n] of det(xI - A), descending powers."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    coeffs = [1.0]
    M = np.zeros_like(A)
    for k in range(1, n + 1):
        M = A @ M + coeffs[-1] * np.eye(n)
        coeffs.append(-np.trace(A @ M) / k)
    return np.asarray(coeffs)


def eig_oracle(A):
    """Eigenvalues as characteristic-polynomial roots."""
    return np.roots(charpoly_coeffs(A))


def matched_distance(a, b):
    """Largest pointwise gap after optimal one-to-one pairing."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    assert a.shape == b.shape
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())
