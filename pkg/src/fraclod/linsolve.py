"""Sparse solvers: Jacobi-preconditioned CG and saddle point solves."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

log = logging.getLogger(__name__)

DIRECT_LIMIT = 20000
POLISH_RESTARTS = 4


@dataclass
class SolveReport:
    iterations: int
    relative_residual: float
    converged: bool


def cg_solve(op, rhs, tol: float = 1e-10, max_iter: int | None = None, x0=None,
             precondition: bool = True, callback=None):
    """Conjugate gradients with diagonal preconditioning.

    Returns the iterate and a :class:`SolveReport`; non-convergence is
    reported, not raised.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    b = np.asarray(rhs, dtype=float)
    n = len(b)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), SolveReport(0, 0.0, True)
    if max_iter is None:
        max_iter = max(10 * n, 100)
    M = None
    if precondition:
        d = np.asarray(op.diagonal(), dtype=float)
        d[d <= 0] = 1.0
        M = sp.diags(1.0 / d)
    count = [0]

    def cb(xk):
        count[0] += 1
        if callback is not None:
            callback(xk)

    x, _ = spla.cg(op, b, x0=x0, rtol=tol, atol=0.0, maxiter=max_iter, M=M, callback=cb)
    rel = float(np.linalg.norm(b - op @ x) / bnorm)
    # the recursive residual drifts from the true one; restart from the iterate a few times
    for _ in range(POLISH_RESTARTS):
        if rel <= tol or count[0] >= max_iter:
            break
        x, _ = spla.cg(op, b, x0=x, rtol=0.5 * tol, atol=0.0, maxiter=max_iter, M=M, callback=cb)
        rel = float(np.linalg.norm(b - op @ x) / bnorm)
    return x, SolveReport(count[0], rel, rel <= tol)


def independent_rows(C, tol: float = 1e-12) -> np.ndarray:
    """Indices of a maximal set of linearly independent rows (pivoted QR)."""
    dense = C.toarray() if sp.issparse(C) else np.asarray(C, dtype=float)
    if dense.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    _, r, piv = la.qr(dense.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if len(diag) == 0 or diag[0] == 0:
        return np.zeros(0, dtype=np.int64)
    rank = int(np.sum(diag > tol * diag[0]))
    return np.sort(piv[:rank])


class SaddleSolver:
    """Factorized solver for ``[A C^T; C 0] [x; lam] = [b; d]``.

    Dependent constraint rows are removed first.  Systems up to
    ``DIRECT_LIMIT`` unknowns use a sparse LU factorization, larger ones the
    Schur complement on the constraints with a factorized ``A``.
    """

    def __init__(self, A, C=None, deflate: bool = True):
        A = sp.csr_matrix(A)
        n = A.shape[0]
        if C is None:
            C = sp.csr_matrix((0, n))
        C = sp.csr_matrix(C)
        if C.shape[1] != n:
            raise ValueError("constraint matrix has wrong width")
        self.rows = independent_rows(C) if deflate and C.shape[0] else np.arange(C.shape[0])
        self.n_constraints = C.shape[0]
        C = C[self.rows]
        self.n, self.m = n, C.shape[0]
        self.A, self.C = A, C
        if n + self.m <= DIRECT_LIMIT:
            K = sp.bmat([[A, C.T], [C, None]], format="csc")
            try:
                self._lu = spla.splu(K)
            except RuntimeError as exc:
                raise np.linalg.LinAlgError("singular saddle system") from exc
            self._mode = "direct"
        else:
            self._lu = spla.splu(sp.csc_matrix(A))
            if self.m:
                ainv_ct = self._lu.solve(C.T.toarray())
                self._schur = la.cho_factor(C @ ainv_ct)
                self._ainv_ct = ainv_ct
            self._mode = "schur"

    def solve(self, b, d=None, return_multiplier: bool = False):
        b = np.asarray(b, dtype=float)
        multi = b.ndim == 2
        B = b if multi else b[:, None]
        nrhs = B.shape[1]
        if d is None:
            D = np.zeros((self.m, nrhs))
        else:
            D = np.asarray(d, dtype=float).reshape(self.n_constraints, -1)[self.rows]
            if D.shape[1] != nrhs:
                D = np.broadcast_to(D, (self.m, nrhs))
        if self._mode == "direct":
            sol = self._lu.solve(np.vstack([B, D]))
            x, lam = sol[: self.n], sol[self.n :]
        else:
            y = self._lu.solve(B)
            if self.m:
                lam = la.cho_solve(self._schur, self.C @ y - D)
                x = y - self._ainv_ct @ lam
            else:
                x, lam = y, np.zeros((0, nrhs))
        if not multi:
            x, lam = x[:, 0], lam[:, 0]
        return (x, lam) if return_multiplier else x


def constrained_solve(A, C, rhs, d=None):
    """Solve ``A x = rhs`` on ``ker C`` (or the affine set ``C x = d``)."""
    if C is None or (hasattr(C, "shape") and C.shape[0] == 0):
        A = sp.csc_matrix(A)
        return spla.spsolve(A, np.asarray(rhs, dtype=float))
    return SaddleSolver(A, C).solve(rhs, d)


class BlockFactor:
    """Exact solver for a symmetric positive definite block."""

    DENSE_LIMIT = 400

    def __init__(self, A):
        n = A.shape[0]
        self.n = n
        if n <= self.DENSE_LIMIT:
            dense = A.toarray() if sp.issparse(A) else np.asarray(A)
            self._chol = la.cho_factor(dense)
            self._lu = None
        else:
            self._chol = None
            self._lu = spla.splu(sp.csc_matrix(A))

    def solve(self, b):
        if self._chol is not None:
            return la.cho_solve(self._chol, b)
        return self._lu.solve(np.asarray(b, dtype=float))
