"""Localized orthogonal decomposition on broken spaces.

The kernel space is ``V_k = ker Pi_k`` inside the fine space S_K.  The
ideal corrector is the a-orthogonal projection onto V_k; its localized
version replaces the global solve by a damped Richardson iteration
whose preconditioner is the additive sum of local Ritz projections P_G,
one per cell G of Omega^(k).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .linsolve import SaddleSolver
from .problem import Problem
from .projections import ProjectionStack

log = logging.getLogger(__name__)

IDEAL = math.inf
IDEAL_LIMIT = 20000
GRAM_COND_LIMIT = 1e12


class GramConditionError(np.linalg.LinAlgError):
    pass


@dataclass
class CorrectorBasis:
    """Columns (I - C_nu) lambda_p for all coarse dofs p, as fine vectors."""

    k: int
    K: int
    nu: float
    omega: float
    columns: np.ndarray  # (n_fine, n_coarse)
    supports: list = field(default_factory=list)  # per step: list of coarse-cell sets per column
    rank: int | None = None

    @property
    def scale_pair(self):
        return self.k, self.K

    @property
    def n_columns(self) -> int:
        return self.columns.shape[1]


class LocalizedOD:
    """Kernel space tools for one scale pair (k, K)."""

    def __init__(self, problem: Problem, k: int, K: int, stack: ProjectionStack | None = None):
        self.problem = problem
        self.k, self.K = k, K
        self.stack = stack if stack is not None else ProjectionStack(problem, k, K)
        self.fine = problem.discretization(K)
        self.A = self.fine.op.tocsr()
        self.Pi = self.stack.pi_k_matrix().tocsr()
        self.P = problem.prolongation(k, K).tocsr()
        self._ideal = None
        self._local: dict = {}
        coarse = self.stack.coarse
        n_cells = self.stack.n_coarse_cells
        self.cell_fine = [self.stack.cell_dofs_fine(G) for G in range(n_cells)]
        self.cell_coarse = [coarse.cell_dofs(G) for G in range(n_cells)]
        self.neighbors = self.stack.coarse.partition.neighbors

    # -- ideal corrector -----------------------------------------------------------
    def _ideal_solver(self) -> SaddleSolver:
        if self._ideal is None:
            n = self.A.shape[0]
            if n > IDEAL_LIMIT:
                raise ValueError(f"fine dimension {n} too large for the ideal corrector (limit {IDEAL_LIMIT})")
            self._ideal = SaddleSolver(self.A, self.Pi)
        return self._ideal

    def ideal_corrector_apply(self, w: np.ndarray) -> np.ndarray:
        """a-orthogonal projection of ``w`` (vector or column matrix) onto ker Pi_k."""
        return self._ideal_solver().solve(self.A @ w)

    # -- local Ritz projections ----------------------------------------------------
    def _local_solver(self, G: int):
        if G not in self._local:
            idx = self.cell_fine[G]
            solver = None
            if len(idx):
                C = self.Pi[self.cell_coarse[G]][:, idx]
                solver = SaddleSolver(self.A[idx][:, idx], C)
                if solver.m >= len(idx):
                    solver = None  # constraints exhaust the cell, no kernel functions
            self._local[G] = solver
        return self._local[G]

    def local_ritz_correction(self, G: int, residual: np.ndarray) -> np.ndarray:
        """P_G applied to a residual functional given on the fine dofs."""
        out = np.zeros_like(np.asarray(residual, dtype=float))
        solver = self._local_solver(G)
        if solver is None:
            return out
        idx = self.cell_fine[G]
        out[idx] = solver.solve(residual[idx])
        return out

    def apply_T(self, residual: np.ndarray) -> np.ndarray:
        """Additive sum of all local Ritz corrections (fixed cell order)."""
        out = np.zeros_like(np.asarray(residual, dtype=float))
        for G in range(len(self.cell_fine)):
            solver = self._local_solver(G)
            if solver is None:
                continue
            idx = self.cell_fine[G]
            r = residual[idx]
            if not np.any(r):
                continue
            out[idx] = solver.solve(r)
        return out

    # -- correctors ----------------------------------------------------------------
    def hats(self) -> np.ndarray:
        return self.P.toarray()

    def column_cells(self, X: np.ndarray, tol: float = 0.0) -> list:
        """Coarse cells on which each column of ``X`` is nonzero."""
        owner = self.stack.dof_coarse_cell
        nz = np.abs(X) > tol
        return [set(np.unique(owner[nz[:, j]]).tolist()) for j in range(X.shape[1])]

    def layers(self, cells: set, n: int) -> set:
        out = set(cells)
        for _ in range(n):
            out |= {int(b) for a in out for b in self.neighbors[a]}
        return out

    def richardson_correctors(self, nu: int, omega: float = 1.0 / 7.0, track_support: bool = False) -> CorrectorBasis:
        """Damped Richardson iteration C <- C + omega T(I - C) on every coarse hat."""
        if nu < 0:
            raise ValueError("nu must be >= 0")
        if omega <= 0:
            raise ValueError("omega must be positive")
        lam = self.hats()
        c = np.zeros_like(lam)
        supports = []
        for _ in range(nu):
            c = c + omega * self.apply_T(self.A @ (lam - c))
            if track_support:
                supports.append(self.column_cells(c))
        return CorrectorBasis(self.k, self.K, nu, omega, lam - c, supports)

    def ideal_basis(self) -> CorrectorBasis:
        lam = self.hats()
        return CorrectorBasis(self.k, self.K, IDEAL, 0.0, lam - self.ideal_corrector_apply(lam))

    def basis(self, nu, omega: float = 1.0 / 7.0) -> CorrectorBasis:
        return self.ideal_basis() if nu == IDEAL else self.richardson_correctors(int(nu), omega)


def ms_galerkin_solve(basis: CorrectorBasis, A_op, load: np.ndarray, deflate: bool = False,
                      rank_tol: float = 1e-10):
    """Galerkin solve in the span of the basis columns; returns (coefficients, fine vector).

    With ``deflate=False`` an ill-conditioned Gram matrix is an error.  With
    ``deflate=True`` the solve is restricted to the eigenvectors of the Gram
    matrix above ``rank_tol`` times its largest eigenvalue, which gives the
    Galerkin solution in the span and the minimum-norm coefficients.
    """
    B = basis.columns
    gram = B.T @ (A_op @ B)
    gram = 0.5 * (gram + gram.T)
    rhs = B.T @ load
    if deflate:
        w, V = np.linalg.eigh(gram)
        keep = w > rank_tol * w.max()
        basis.rank = int(keep.sum())
        coef = V[:, keep] @ ((V[:, keep].T @ rhs) / w[keep])
        return coef, B @ coef
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > GRAM_COND_LIMIT:
        raise GramConditionError(f"Gram matrix condition {cond:.3e} exceeds {GRAM_COND_LIMIT:.0e} "
                                 f"(k={basis.k}, K={basis.K}, nu={basis.nu}); pass deflate=True to "
                                 f"solve in the span")
    basis.rank = B.shape[1]
    coef = la.solve(gram, rhs, assume_a="pos")
    return coef, B @ coef


@dataclass
class LODRow:
    k: int
    nu: float
    coarse_dofs: int
    fine_dofs: int
    h_error: float
    l2_error: float
    rank: int | None = None

    def as_dict(self) -> dict:
        return {"k": self.k, "nu": "ideal" if self.nu == IDEAL else int(self.nu), "coarse_dofs": self.coarse_dofs,
                "fine_dofs": self.fine_dofs, "h_error": self.h_error, "l2_error": self.l2_error, "rank": self.rank}


def lod_error_study(problem: Problem, k_list, K: int, nu_list, omega: float = 1.0 / 7.0) -> list:
    """Energy and L2 errors of multiscale Galerkin solutions against the fine solution."""
    fine = problem.discretization(K)
    u, _ = problem.reference(K)
    rows = []
    for k in k_list:
        lod = LocalizedOD(problem, k, K)
        for nu in nu_list:
            basis = lod.basis(nu, omega)
            _, uk = ms_galerkin_solve(basis, lod.A, fine.load, deflate=True)
            rows.append(LODRow(k, nu, lod.P.shape[1], fine.n_dofs, fine.norm(u - uk), fine.l2(u - uk), basis.rank))
            log.info("lod k=%d nu=%s error=%.3e", k, nu, rows[-1].h_error)
    return rows


def format_lod_table(rows) -> str:
    lines = [f"{'k':>2} {'nu':>6} {'dim S_k':>8} {'dim S_K':>8} {'energy err':>12} {'L2 err':>12}"]
    for r in rows:
        nu = "ideal" if r.nu == IDEAL else str(int(r.nu))
        lines.append(f"{r.k:>2} {nu:>6} {r.coarse_dofs:>8} {r.fine_dofs:>8} {r.h_error:12.4e} {r.l2_error:12.4e}")
    return "\n".join(lines)


def galerkin_residuals(basis: CorrectorBasis, A_op, load, u_k) -> np.ndarray:
    """a(u_k, b_p) - (f, b_p) for all basis columns."""
    return basis.columns.T @ (A_op @ u_k - load)


def kernel_defect(lod: LocalizedOD, basis: CorrectorBasis) -> float:
    """max |Pi_k C_nu lambda_p| over all columns."""
    corr = lod.hats() - basis.columns
    return float(np.abs(lod.Pi @ corr).max()) if corr.size else 0.0


def sparse_columns(basis: CorrectorBasis, tol: float = 0.0) -> sp.csc_matrix:
    X = np.where(np.abs(basis.columns) > tol, basis.columns, 0.0)
    return sp.csc_matrix(X)
