"""Projections from the fine broken space S_K onto coarser scales.

* ``pi_Hk``: on every cell G of Omega^(k) that carries finer interfaces, the
  fine function is replaced by the P1 function on the fine mesh that is
  continuous in G, has the same mean over G and minimizes the broken H^1
  seminorm distance.  Elsewhere it is the identity.
* ``pi_Sk``: Clement-type averaging over the nodal patches of S_k, each patch
  restricted to the node's own cell.
* ``pi_k = pi_Sk o pi_Hk`` as an explicit sparse matrix.

Fine functions are handled in the extended numbering of the fine space so
that the continuous minimizer may take nonzero values on the outer boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .assembly import element_stiffness, mass_vector
from .linsolve import SaddleSolver
from .problem import Problem


@dataclass(eq=False)
class _CellData:
    vertices: np.ndarray  # fine mesh vertices of the closed cell
    ext: np.ndarray  # fine extended dofs of the cell
    ext_vertex_local: np.ndarray  # position of each ext dof's vertex in ``vertices``
    R: sp.csr_matrix  # broken stiffness: vertex rows, ext columns
    m_V: np.ndarray
    m_E: np.ndarray
    solver: SaddleSolver


class ProjectionStack:
    """Operators between the fine scale K and a coarse scale k < K."""

    def __init__(self, problem: Problem, k: int, K: int):
        if not 0 < k < K:
            raise ValueError("need 0 < k < K")
        self.problem = problem
        self.k, self.K = k, K
        self.fine = problem.discretization(K).space
        self.coarse = problem.discretization(k).space
        hier = problem.hierarchy
        self.h_k = hier.h(k)
        self.anc = hier.ancestors(self.fine.mesh.level, self.coarse.mesh.level)
        fine_cells = self.fine.partition.cell_of_triangle
        self.coarse_cell_of_tri = self.coarse.partition.cell_of_triangle[self.anc]
        owner = np.full(self.fine.partition.n_cells, -1, dtype=np.int64)
        owner[fine_cells] = self.coarse_cell_of_tri
        self.coarse_of_fine_cell = owner
        self.ext_coarse_cell = owner[self.fine.ext_cell]
        self.dof_coarse_cell = self.ext_coarse_cell[self.fine.dof_to_ext]
        n_sub = np.bincount(owner, minlength=self.coarse.partition.n_cells)
        # a coarse cell with a single fine cell holds functions that are already continuous
        self.trivial = n_sub <= 1
        self._ke = element_stiffness(self.fine)
        self._mE = mass_vector(self.fine, ext=True)
        self._cells: dict = {}
        self._clement = None
        self._pi_k = None
        self._pi_hk = None

    # -- Pi_Hk ---------------------------------------------------------------
    @property
    def n_coarse_cells(self) -> int:
        return self.coarse.partition.n_cells

    def cell_ext(self, G: int) -> np.ndarray:
        return np.flatnonzero(self.ext_coarse_cell == G)

    def cell_dofs_fine(self, G: int) -> np.ndarray:
        return np.flatnonzero(self.dof_coarse_cell == G)

    def _cell(self, G: int) -> _CellData:
        if G in self._cells:
            return self._cells[G]
        mesh = self.fine.mesh
        tris = np.flatnonzero(self.coarse_cell_of_tri == G)
        verts, local = np.unique(mesh.triangles[tris], return_inverse=True)
        local = local.reshape(-1, 3)
        ext = self.cell_ext(G)
        ext_local = np.searchsorted(ext, self.fine.tri_ext[tris])
        ke = self._ke[tris]
        nV, nE = len(verts), len(ext)
        r = np.repeat(local, 3, axis=1).ravel()
        cV = np.tile(local, (1, 3)).ravel()
        cE = np.tile(ext_local, (1, 3)).ravel()
        A_G = sp.csr_matrix((ke.ravel(), (r, cV)), shape=(nV, nV))
        A_G = ((A_G + A_G.T) * 0.5).tocsr()
        R = sp.csr_matrix((ke.ravel(), (r, cE)), shape=(nV, nE))
        areas = mesh.areas()[tris]
        m_V = np.bincount(local.ravel(), weights=np.repeat(areas / 3.0, 3), minlength=nV)
        m_E = self._mE[ext]
        solver = SaddleSolver(A_G, sp.csr_matrix(m_V[None, :]), deflate=False)
        ext_vertex_local = np.searchsorted(verts, self.fine.ext_vertex[ext])
        data = _CellData(verts, ext, ext_vertex_local, R, m_V, m_E, solver)
        self._cells[G] = data
        return data

    def apply_pi_Hk_ext(self, x: np.ndarray) -> np.ndarray:
        """Pi_Hk on an extended fine vector (or matrix of column vectors)."""
        out = np.array(x, dtype=float, copy=True)
        for G in range(self.n_coarse_cells):
            if self.trivial[G]:
                continue
            c = self._cell(G)
            xe = out[c.ext]
            rhs = c.R @ xe
            d = c.m_E @ xe
            y = c.solver.solve(rhs, np.atleast_1d(d)[None] if xe.ndim == 2 else d)
            out[c.ext] = y[c.ext_vertex_local]
        return out

    def apply_pi_Hk(self, v: np.ndarray) -> np.ndarray:
        """Pi_Hk of a fine dof vector, returned in the extended numbering."""
        return self.apply_pi_Hk_ext(self.fine.to_ext(v))

    def pi_Hk_matrix(self) -> sp.csr_matrix:
        """Pi_Hk as a sparse matrix on extended fine vectors (desk sizes)."""
        if self._pi_hk is None:
            n = self.fine.n_ext
            rows, cols, vals = [], [], []
            keep = np.ones(n, dtype=bool)
            for G in range(self.n_coarse_cells):
                if self.trivial[G]:
                    continue
                c = self._cell(G)
                keep[c.ext] = False
                B = sp.vstack([c.R, sp.csr_matrix(c.m_E[None, :])]).toarray()
                X = c.solver.solve(B[:-1], B[-1:])[c.ext_vertex_local]
                rr, cc = np.nonzero(X)
                rows.append(c.ext[rr])
                cols.append(c.ext[cc])
                vals.append(X[rr, cc])
            ident = np.flatnonzero(keep)
            rows.append(ident)
            cols.append(ident)
            vals.append(np.ones(len(ident)))
            self._pi_hk = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                                        shape=(n, n))
        return self._pi_hk

    # -- Pi_Sk ---------------------------------------------------------------
    def clement_matrix(self) -> sp.csr_matrix:
        """Patch means: rows are coarse dofs, columns fine extended dofs."""
        if self._clement is None:
            fine, coarse = self.fine, self.coarse
            T = self.anc
            cdofs = coarse.tri_dofs[T]  # (nT_fine, 3)
            fe = fine.tri_ext
            w = fine.mesh.areas() / 3.0
            rows = np.repeat(cdofs, 3, axis=1).ravel()
            cols = np.tile(fe, (1, 3)).ravel()
            vals = np.repeat(np.repeat(w, 3)[:, None], 3, axis=1).ravel()
            ok = rows >= 0
            M = sp.csr_matrix((vals[ok], (rows[ok], cols[ok])), shape=(coarse.n_dofs, fine.n_ext))
            ca = coarse.mesh.areas()
            cd = coarse.tri_dofs.ravel()
            patch = np.bincount(cd[cd >= 0], weights=np.repeat(ca, 3)[cd >= 0], minlength=coarse.n_dofs)
            self._clement = (sp.diags(1.0 / patch) @ M).tocsr()
            self.patch_area = patch
        return self._clement

    def apply_pi_Sk(self, x_ext: np.ndarray) -> np.ndarray:
        return self.clement_matrix() @ x_ext

    # -- Pi_k ----------------------------------------------------------------
    def pi_k_matrix(self) -> sp.csr_matrix:
        """Composite Pi_k as a sparse map from fine dofs to coarse dofs."""
        if self._pi_k is None:
            Cl = self.clement_matrix().tocsr()
            coarse = self.coarse
            rows, cols, vals = [], [], []
            for G in range(self.n_coarse_cells):
                crow = coarse.cell_dofs(G)
                if len(crow) == 0:
                    continue
                ext = self.cell_ext(G)
                ClG = Cl[crow][:, ext].toarray()
                if self.trivial[G]:
                    block = ClG
                else:
                    c = self._cell(G)
                    # Cl_G Sel_G [I 0] S^-1 [R_G; m_E^T] evaluated by one multi-rhs solve
                    Z = np.zeros((len(c.vertices), len(crow)))
                    np.add.at(Z, c.ext_vertex_local, ClG.T)
                    Y, lam = c.solver.solve(Z, np.zeros((1, len(crow))), return_multiplier=True)
                    block = Y.T @ c.R.toarray() + lam.T @ c.m_E[None, :]
                rr, cc = np.nonzero(block)
                rows.append(crow[rr])
                cols.append(ext[cc])
                vals.append(block[rr, cc])
            M = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                              shape=(coarse.n_dofs, self.fine.n_ext))
            self._pi_k = (M @ self.fine.embed()).tocsr()
        return self._pi_k

    def apply_pi_k(self, v: np.ndarray) -> np.ndarray:
        return self.apply_pi_Sk(self.apply_pi_Hk(v))

    # -- diagnostics -----------------------------------------------------------
    def cell_means(self, x_ext: np.ndarray) -> np.ndarray:
        """Integral of an extended fine function over every coarse cell."""
        return np.bincount(self.ext_coarse_cell, weights=self._mE * x_ext, minlength=self.n_coarse_cells)

    def cell_seminorms(self, x_ext: np.ndarray) -> np.ndarray:
        """Broken H^1 seminorm of an extended fine function on every coarse cell."""
        xe = x_ext[self.fine.tri_ext]
        e = np.einsum("ti,tij,tj->t", xe, self._ke, xe)
        return np.sqrt(np.maximum(np.bincount(self.coarse_cell_of_tri, weights=e, minlength=self.n_coarse_cells), 0))


@dataclass
class BoundsReport:
    stability: float
    approximation: float
    trials: int


def verify_projection_bounds(stack: ProjectionStack, trials: int, seed: int = 0) -> BoundsReport:
    """Empirical stability and approximation constants of Pi_k over random vectors."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    prob = stack.problem
    fine = prob.discretization(stack.K)
    P = prob.prolongation(stack.k, stack.K)
    Pi = stack.pi_k_matrix()
    rng = np.random.default_rng(seed)
    stab = approx = 0.0
    for _ in range(trials):
        v = rng.standard_normal(fine.n_dofs)
        nv = fine.norm(v)
        if nv == 0.0:
            continue
        w = P @ (Pi @ v)
        stab = max(stab, fine.norm(w) / nv)
        approx = max(approx, fine.l2(v - w) / (stack.h_k * nv))
    return BoundsReport(float(stab), float(approx), trials)

