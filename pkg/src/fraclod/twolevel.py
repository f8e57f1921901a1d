"""Two-level subspace correction with cell blocks and a coarse space.

One sweep visits the cell blocks of Omega^(K) one after another (exact
Ritz corrections, i.e. block Gauss-Seidel) and finishes with a Galerkin
correction in the prolongated coarse space S_l.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp

from .linsolve import BlockFactor
from .problem import Discretization, Problem

log = logging.getLogger(__name__)


@dataclass
class TwoLevelConfig:
    fine_scale: int
    coarse_scale: int = 1
    sweeps: int = 9
    cell_order: str = "descending"
    symmetric: bool = False
    block_scale: int | None = None  # diagnostic: blocks from the cells of Omega^(block_scale)

    def __post_init__(self):
        if self.coarse_scale >= self.fine_scale:
            raise ValueError("coarse scale must be below the fine scale")
        if self.block_scale is not None and not 1 <= self.block_scale <= self.fine_scale:
            raise ValueError("block scale must lie in [1, fine scale]")
        if self.cell_order not in ("ascending", "descending"):
            raise ValueError(f"unknown cell order {self.cell_order!r}")
        if self.sweeps < 1:
            raise ValueError("at least one sweep is required")


class CellBlocks:
    """Factorized diagonal blocks of the fine operator, one per cell.

    By default the blocks are the cells of the fine partition.  ``groups``
    maps every fine cell to a block id to merge cells into larger blocks.
    """

    def __init__(self, disc: Discretization, groups: np.ndarray | None = None):
        space = disc.space
        op = disc.op.tocsr()
        starts = space.cell_start
        if groups is None:
            self.index = [np.arange(a, b) for a, b in zip(starts[:-1], starts[1:])]
        else:
            owner = np.asarray(groups)[space.dof_cell]
            order = np.argsort(owner, kind="stable")
            cuts = np.searchsorted(owner[order], np.arange(owner.max() + 2))
            self.index = [order[a:b] for a, b in zip(cuts[:-1], cuts[1:])]
        self.rows = []
        self.factors = []
        for idx in self.index:
            rows = op[idx]
            self.rows.append(rows)
            self.factors.append(BlockFactor(rows[:, idx]) if len(idx) else None)

    def __len__(self):
        return len(self.index)

    def block_dofs(self, i: int) -> np.ndarray:
        return self.index[i]


class TwoLevelSolver:
    def __init__(self, fine: Discretization, coarse_prolongation: sp.spmatrix, order: str = "descending",
                 symmetric: bool = False, groups: np.ndarray | None = None):
        self.fine = fine
        self.P = sp.csr_matrix(coarse_prolongation)
        self.blocks = CellBlocks(fine, groups)
        A0 = (self.P.T @ fine.op @ self.P).toarray()
        A0 = 0.5 * (A0 + A0.T)
        self.coarse = la.cho_factor(A0)
        n = len(self.blocks)
        self.order = list(range(n - 1, -1, -1)) if order == "descending" else list(range(n))
        self.symmetric = symmetric

    def _block_pass(self, w, f, order):
        for i in order:
            fac = self.blocks.factors[i]
            if fac is None:
                continue
            idx = self.blocks.index[i]
            w[idx] += fac.solve(f[idx] - self.blocks.rows[i] @ w)

    def _coarse(self, w, f):
        r = f - self.fine.op @ w
        w += self.P @ la.cho_solve(self.coarse, self.P.T @ r)

    def sweep(self, w: np.ndarray, f: np.ndarray) -> np.ndarray:
        """One iteration: blocks in the configured order, then the coarse space."""
        w = np.array(w, dtype=float, copy=True)
        self._block_pass(w, f, self.order)
        self._coarse(w, f)
        if self.symmetric:
            self._block_pass(w, f, self.order[::-1])
        return w

    def error_propagation(self) -> np.ndarray:
        """Dense product (I - P_0)(I - P_1)...(I - P_m) for small instances."""
        A = self.fine.op.toarray()
        n = A.shape[0]
        E = np.eye(n)
        steps = []
        for i in self.order:
            idx = self.blocks.block_dofs(i)
            if len(idx) == 0:
                continue
            Q = np.zeros((n, n))
            Q[np.ix_(idx, np.arange(n))] = np.linalg.solve(A[np.ix_(idx, idx)], A[idx])
            steps.append(Q)
        P = self.P.toarray()
        steps.append(P @ np.linalg.solve(P.T @ A @ P, P.T @ A))
        if self.symmetric:
            steps.extend(steps[:-1][::-1])
        for Q in steps:
            E = (np.eye(n) - Q) @ E
        return E


@dataclass
class IterationReport:
    K: int
    n_dofs: int
    errors: np.ndarray
    factors: np.ndarray
    geometric_mean: float
    stopping_index: int | None = None
    threshold: float | None = None
    timings: dict = field(default_factory=dict)

    def asymptotic_factor(self, start: int = 5) -> float:
        """Geometric mean of the per-sweep factors from sweep ``start`` on (the last half if fewer)."""
        f = self.factors[min(start - 1, len(self.factors) // 2) :]
        return float(np.exp(np.mean(np.log(f))))

    def as_dict(self) -> dict:
        return {
            "K": self.K,
            "n_dofs": self.n_dofs,
            "errors": [float(e) for e in self.errors],
            "factors": [float(x) for x in self.factors],
            "geometric_mean": self.geometric_mean,
            "asymptotic_factor": self.asymptotic_factor(),
            "stopping_index": self.stopping_index,
            "threshold": self.threshold,
        }


def cell_groups(problem: Problem, s: int, K: int) -> np.ndarray:
    """Cell of Omega^(s) containing each cell of Omega^(K)."""
    fine = problem.discretization(K).space
    coarse = problem.discretization(s).space
    anc = problem.hierarchy.ancestors(fine.mesh.level, coarse.mesh.level)
    groups = np.empty(fine.partition.n_cells, dtype=np.int64)
    groups[fine.partition.cell_of_triangle] = coarse.partition.cell_of_triangle[anc]
    return groups


def stopping_check(errors, threshold: float | None) -> int:
    """First sweep index whose error is at most the discretization threshold."""
    if threshold is None:
        raise ValueError("a finer reference is required for the stopping check")
    hit = np.flatnonzero(np.asarray(errors) <= threshold)
    return int(hit[0]) if len(hit) else -1


def discretization_gap(problem: Problem, K: int) -> float:
    """Norm at scale K+1 of the difference of the prolongated scale-K solution."""
    uK, _ = problem.reference(K)
    uK1, _ = problem.reference(K + 1)
    P = problem.prolongation(K, K + 1)
    return problem.discretization(K + 1).norm(uK1 - P @ uK)


def run_two_level(problem: Problem, config: TwoLevelConfig, with_stopping: bool = False) -> IterationReport:
    t0 = time.perf_counter()
    K, ell = config.fine_scale, config.coarse_scale
    fine = problem.discretization(K)
    u, _ = problem.reference(K)
    P = problem.prolongation(ell, K)
    groups = None
    if config.block_scale is not None and config.block_scale < K:
        groups = cell_groups(problem, config.block_scale, K)
    solver = TwoLevelSolver(fine, P, config.cell_order, config.symmetric, groups)
    u0_coarse, _ = problem.reference(ell)
    w = P @ u0_coarse
    errors = [fine.norm(u - w)]
    for _ in range(config.sweeps):
        w = solver.sweep(w, fine.load)
        errors.append(fine.norm(u - w))
    errors = np.array(errors)
    factors = errors[1:] / errors[:-1]
    gmean = float((errors[-1] / errors[0]) ** (1.0 / config.sweeps))
    rep = IterationReport(K, fine.n_dofs, errors, factors, gmean)
    if with_stopping:
        rep.threshold = discretization_gap(problem, K)
        rep.stopping_index = stopping_check(errors, rep.threshold)
    rep.timings["sweeps"] = time.perf_counter() - t0
    log.info("K=%d dofs=%d rho=%.4f", K, fine.n_dofs, gmean)
    return rep


def run_convergence_experiment(problem: Problem, K_range, sweeps: int = 9, coarse_scale: int = 1,
                               cell_order: str = "descending", stopping_for=(), block_scale: int | None = None) -> list:
    reports = []
    for K in K_range:
        cfg = TwoLevelConfig(K, coarse_scale, sweeps, cell_order, block_scale=block_scale)
        reports.append(run_two_level(problem, cfg, with_stopping=K in stopping_for))
    return reports


def format_table(reports, title: str = "") -> str:
    """Aligned text table: rows are sweeps, columns are fine scales."""
    lines = []
    if title:
        lines.append(title)
    head = "nu " + "".join(f"{'K=' + str(r.K):>9}" for r in reports)
    lines.append(head)
    n = max(len(r.factors) for r in reports)
    for i in range(n):
        row = f"{i + 1:<3}" + "".join(f"{r.factors[i]:9.3f}" if i < len(r.factors) else " " * 9 for r in reports)
        lines.append(row)
    lines.append("rho" + "".join(f"{r.geometric_mean:9.3f}" for r in reports))
    return "\n".join(lines)
