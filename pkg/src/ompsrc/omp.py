"""Orthogonal Matching Pursuit and the tools used to check it.

`omp_solve` is the greedy solver. `l0_oracle` solves the same sparsest
representation problem exactly by enumerating supports, which is only
feasible for tiny dictionaries, and `mutual_coherence` measures how far
a dictionary is from orthogonal.
"""

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.linalg import solve_triangular

from .errors import DimensionError, EmptyDictionaryError, InvalidInputError, OracleGuardError
from .linalg import RANK_RTOL, as_matrix, as_vector, least_squares

#: Columns must have unit norm up to this slack (or be exactly zero).
UNIT_NORM_TOL = 1e-6

#: The solver stops once the best |correlation| with the residual falls to this.
STAGNATION_TOL = 1e-12

ORACLE_MAX_ATOMS = 24
ORACLE_MAX_K = 4


@dataclass(frozen=True)
class ExactSparsity:
    """Stop after `s` atoms have been selected."""
    s: int

    def __post_init__(self):
        if int(self.s) != self.s or self.s < 1:
            raise InvalidInputError(f"sparsity must be a positive integer, got {self.s!r}")


@dataclass(frozen=True)
class ResidualBound:
    """Stop once the residual norm is at most `t`."""
    t: float

    def __post_init__(self):
        if not np.isfinite(self.t) or self.t < 0:
            raise InvalidInputError(f"residual bound must be >= 0, got {self.t!r}")


@dataclass(frozen=True)
class Noiseless:
    """Stop once the residual is numerically zero."""
    eps: float = 1e-10

    def __post_init__(self):
        if not np.isfinite(self.eps) or self.eps < 0:
            raise InvalidInputError(f"tolerance must be >= 0, got {self.eps!r}")


StoppingRule = ExactSparsity | ResidualBound | Noiseless


@dataclass
class SparseCode:
    """Result of a sparse solve.

    `support` keeps the selection order. `residual_norms` holds ``||y||``
    followed by the residual norm after each iteration, so it has
    ``iterations + 1`` entries.
    """
    support: list
    coeffs: np.ndarray
    final_residual_norm: float
    iterations: int
    residual_norms: list = field(default_factory=list)


def _check_dictionary(A):
    A = as_matrix(A, "A")
    norms = np.linalg.norm(A, axis=0)
    nonzero = norms > 0
    if not nonzero.any():
        raise EmptyDictionaryError("dictionary has no nonzero column")
    bad = nonzero & (np.abs(norms - 1.0) > UNIT_NORM_TOL)
    if bad.any():
        j = int(np.flatnonzero(bad)[0])
        raise InvalidInputError(
            f"column {j} has norm {norms[j]:.6g}; columns must be unit-norm or zero")
    return A


def omp_solve(A, y, rule):
    """Greedy sparse approximation of `y` over the columns of `A`.

    Each iteration picks the column with the largest absolute correlation
    with the current residual (ties go to the smallest index), refits all
    selected coefficients by least squares and recomputes the residual as
    ``y - A[:, S] @ x``.

    Iteration ends when `rule` is satisfied, after ``min(m, p)`` atoms, or
    when no column correlates with the residual any more.

    Parameters
    ----------
    A : array_like, shape (m, p)
        Dictionary with unit-norm or all-zero columns.
    y : array_like, shape (m,)
    rule : ExactSparsity, ResidualBound or Noiseless

    Returns
    -------
    SparseCode
    """
    A = _check_dictionary(A)
    y = as_vector(y, "y")
    m, p = A.shape
    if y.shape[0] != m:
        raise DimensionError(f"A has {m} rows but y has length {y.shape[0]}")
    if not isinstance(rule, (ExactSparsity, ResidualBound, Noiseless)):
        raise InvalidInputError(f"unknown stopping rule {rule!r}")

    max_iter = min(m, p)
    if isinstance(rule, ExactSparsity):
        max_iter = min(max_iter, int(rule.s))
        bound = None
    elif isinstance(rule, ResidualBound):
        bound = rule.t
    else:
        bound = rule.eps

    support = []
    x = np.zeros(0)
    r = y.copy()
    rnorm = float(np.linalg.norm(r))
    history = [rnorm]
    qr = _GrowingQR(m, max_iter)
    while len(support) < max_iter:
        if bound is not None and rnorm <= bound:
            break
        corr = np.abs(A.T @ r)
        best = int(np.argmax(corr))
        if corr[best] <= STAGNATION_TOL or best in support:
            break
        support.append(best)
        As = A[:, support]
        if qr.append(A[:, best], y):
            x = qr.solve()
        else:
            x = least_squares(As, y)
        r = y - As @ x
        rnorm = float(np.linalg.norm(r))
        history.append(rnorm)

    coeffs = np.zeros(p)
    if support:
        coeffs[support] = x
    return SparseCode(support=support, coeffs=coeffs, final_residual_norm=rnorm,
                      iterations=len(support), residual_norms=history)


class _GrowingQR:
    """Thin QR factorization of the selected atoms, extended one column at a time.

    Classical Gram-Schmidt with one reorthogonalization pass. Once a new
    column is numerically dependent on the previous ones the factorization
    is abandoned (``append`` returns False from then on) and the caller
    falls back to the rank-revealing :func:`least_squares`.
    """

    def __init__(self, m, capacity):
        self.Q = np.empty((m, capacity))
        self.R = np.zeros((capacity, capacity))
        self.qty = np.empty(capacity)
        self.k = 0
        self.ok = True

    def append(self, a, y):
        if not self.ok:
            return False
        k = self.k
        Q = self.Q[:, :k]
        h = Q.T @ a
        v = a - Q @ h
        h2 = Q.T @ v
        v -= Q @ h2
        h += h2
        rkk = np.linalg.norm(v)
        diag = np.abs(np.diagonal(self.R)[:k])
        scale = max(diag.max(initial=0.0), np.linalg.norm(a))
        if rkk <= RANK_RTOL * scale:
            self.ok = False
            return False
        self.Q[:, k] = v / rkk
        self.R[:k, k] = h
        self.R[k, k] = rkk
        self.qty[k] = self.Q[:, k] @ y
        self.k = k + 1
        return True

    def solve(self):
        k = self.k
        return solve_triangular(self.R[:k, :k], self.qty[:k], check_finite=False)


def l0_oracle(A, y, max_k, eps):
    """Sparsest representation of `y` by exhaustive support enumeration.

    Supports of size 1 to `max_k` are tried in lexicographic order and the
    first one whose least-squares residual is at most `eps` wins. If none
    qualifies, the size-`max_k` support with the smallest residual is
    returned (the lexicographically first on ties). A `y` with norm at most
    `eps` is already represented by the empty support.

    Only for p <= 24 and max_k <= 4.
    """
    A = as_matrix(A, "A")
    y = as_vector(y, "y")
    m, p = A.shape
    if y.shape[0] != m:
        raise DimensionError(f"A has {m} rows but y has length {y.shape[0]}")
    if p > ORACLE_MAX_ATOMS or not 1 <= max_k <= ORACLE_MAX_K:
        raise OracleGuardError(
            f"exhaustive search limited to p <= {ORACLE_MAX_ATOMS} and "
            f"1 <= max_k <= {ORACLE_MAX_K}; got p={p}, max_k={max_k}")

    ynorm = float(np.linalg.norm(y))
    if ynorm <= eps:
        return SparseCode([], np.zeros(p), ynorm, 0, [ynorm])

    best = None
    for k in range(1, max_k + 1):
        for S in combinations(range(p), k):
            As = A[:, S]
            x = least_squares(As, y)
            res = float(np.linalg.norm(y - As @ x))
            if res <= eps:
                return _code_from(S, x, res, p, ynorm)
            if k == max_k and (best is None or res < best[2]):
                best = (S, x, res)
    S, x, res = best
    return _code_from(S, x, res, p, ynorm)


def _code_from(S, x, res, p, ynorm):
    coeffs = np.zeros(p)
    coeffs[list(S)] = x
    return SparseCode(list(S), coeffs, res, len(S), [ynorm, res])


def mutual_coherence(A):
    """Largest |<a_i, a_j>| over distinct nonzero columns of `A`."""
    A = as_matrix(A, "A")
    cols = A[:, np.linalg.norm(A, axis=0) > 0]
    if cols.shape[1] < 2:
        raise InvalidInputError("mutual coherence needs at least two nonzero columns")
    G = np.abs(cols.T @ cols)
    np.fill_diagonal(G, 0.0)
    return float(G.max())
