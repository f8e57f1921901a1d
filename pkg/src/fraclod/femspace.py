"""Broken P1 spaces with duplicated degrees of freedom on interfaces.

Every (cell, vertex) incidence of a partition carries its own "extended"
degree of freedom.  Extended dofs on the outer boundary are kept in the
extended numbering (the Clement averages and the projection onto continuous
functions need them) but are not degrees of freedom of the space itself.
Both numberings run over cells in ascending id and, within a cell, over
vertices in ascending id, so every cell owns a contiguous dof range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .geometry import CellPartition
from .mesh import MeshHierarchy, Triangulation


@dataclass(eq=False)
class InterfacePairs:
    """Interface edges of levels <= k with the dofs of both one-sided traces.

    ``dofs[:, 0:2]`` are the minus-side dofs at the two edge endpoints and
    ``dofs[:, 2:4]`` the plus-side dofs (-1 on the outer boundary).  The plus
    side is the one the unit normal points into; the normal is fixed by
    ``nu_x > 0`` or, for horizontal edges, ``nu_y > 0``.
    """

    edge: np.ndarray
    level: np.ndarray
    minus_cell: np.ndarray
    plus_cell: np.ndarray
    dofs: np.ndarray
    ext: np.ndarray
    length: np.ndarray
    midpoint: np.ndarray

    def __len__(self) -> int:
        return len(self.edge)


@dataclass(eq=False)
class BrokenSpace:
    scale: int
    mesh: Triangulation
    partition: CellPartition
    ext_cell: np.ndarray
    ext_vertex: np.ndarray
    ext_to_dof: np.ndarray
    tri_ext: np.ndarray
    interface: InterfacePairs

    def __post_init__(self):
        self.dof_to_ext = np.flatnonzero(self.ext_to_dof >= 0)
        self.tri_dofs = self.ext_to_dof[self.tri_ext]
        self.cell_start = np.searchsorted(self.ext_cell[self.dof_to_ext],
                                          np.arange(self.partition.n_cells + 1))
        self.cell_ext_start = np.searchsorted(self.ext_cell, np.arange(self.partition.n_cells + 1))

    @property
    def n_dofs(self) -> int:
        return len(self.dof_to_ext)

    @property
    def n_ext(self) -> int:
        return len(self.ext_cell)

    @property
    def dof_cell(self) -> np.ndarray:
        return self.ext_cell[self.dof_to_ext]

    @property
    def dof_vertex(self) -> np.ndarray:
        return self.ext_vertex[self.dof_to_ext]

    def dofs(self):
        """(cell, vertex) pairs of all dofs."""
        return np.stack([self.dof_cell, self.dof_vertex], axis=1)

    def dof_index(self, cell: int, vertex: int) -> int:
        e = self.ext_index(cell, vertex)
        return int(self.ext_to_dof[e]) if e >= 0 else -1

    def ext_index(self, cell, vertex):
        key = np.asarray(cell, dtype=np.int64) * self.mesh.n_vertices + np.asarray(vertex, dtype=np.int64)
        keys = self.ext_cell * self.mesh.n_vertices + self.ext_vertex
        pos = np.clip(np.searchsorted(keys, key), 0, len(keys) - 1)
        return np.where(keys[pos] == key, pos, -1)

    def cell_dofs(self, cell: int) -> np.ndarray:
        return np.arange(self.cell_start[cell], self.cell_start[cell + 1])

    def embed(self) -> sp.csr_matrix:
        """Sparse map from dof vectors to extended vectors (zero on the boundary)."""
        n = self.n_dofs
        return sp.csr_matrix((np.ones(n), (self.dof_to_ext, np.arange(n))), shape=(self.n_ext, n))

    def to_ext(self, v: np.ndarray) -> np.ndarray:
        out = np.zeros((self.n_ext,) + np.shape(v)[1:])
        out[self.dof_to_ext] = v
        return out

    def from_ext(self, x: np.ndarray) -> np.ndarray:
        return x[self.dof_to_ext]

    def interpolate(self, func) -> np.ndarray:
        """Dof vector of the nodal interpolant of a globally defined function."""
        return np.asarray(func(self.mesh.points[self.dof_vertex]), dtype=float)


def build_broken_space(mesh: Triangulation, partition: CellPartition) -> BrokenSpace:
    nv = mesh.n_vertices
    cell = partition.cell_of_triangle
    keys = (cell[:, None] * nv + mesh.triangles).ravel()
    ukeys, inverse = np.unique(keys, return_inverse=True)
    ext_cell, ext_vertex = ukeys // nv, ukeys % nv
    tri_ext = inverse.reshape(-1, 3)
    on_bnd = mesh.boundary_vertices()[ext_vertex]
    ext_to_dof = np.full(len(ukeys), -1, dtype=np.int64)
    ext_to_dof[~on_bnd] = np.arange(int((~on_bnd).sum()))

    pairs = _interface_pairs(mesh, partition, ukeys, ext_to_dof)
    return BrokenSpace(partition.level, mesh, partition, ext_cell, ext_vertex, ext_to_dof, tri_ext, pairs)


def _interface_pairs(mesh, partition, ukeys, ext_to_dof) -> InterfacePairs:
    nv = mesh.n_vertices
    et = mesh.edge_tris
    lev = partition.edge_level
    sel = np.flatnonzero((lev > 0) & (et[:, 1] >= 0))
    a, b = mesh.edges[sel, 0], mesh.edges[sel, 1]
    pa, pb = mesh.points[a], mesh.points[b]
    d = pb - pa
    nu = np.stack([d[:, 1], -d[:, 0]], axis=1)
    flip = (nu[:, 0] < 0) | ((nu[:, 0] == 0) & (nu[:, 1] < 0))
    nu[flip] *= -1
    t0, t1 = et[sel, 0], et[sel, 1]
    c0 = mesh.points[mesh.triangles[t0]].mean(axis=1)
    t0_plus = np.einsum("ij,ij->i", c0 - pa, nu) > 0
    tp = np.where(t0_plus, t0, t1)
    tm = np.where(t0_plus, t1, t0)
    cell = partition.cell_of_triangle
    cm, cp = cell[tm], cell[tp]

    def ext(c, v):
        return np.searchsorted(ukeys, c * nv + v)

    ext4 = np.stack([ext(cm, a), ext(cm, b), ext(cp, a), ext(cp, b)], axis=1)
    return InterfacePairs(
        edge=sel,
        level=lev[sel],
        minus_cell=cm,
        plus_cell=cp,
        dofs=ext_to_dof[ext4],
        ext=ext4,
        length=np.linalg.norm(d, axis=1),
        midpoint=0.5 * (pa + pb),
    )


def jump_values(space: BrokenSpace, v: np.ndarray) -> np.ndarray:
    """Jumps (plus minus minus) at both endpoints of every interface edge."""
    x = space.to_ext(v)
    e = space.interface.ext
    return np.stack([x[e[:, 2]] - x[e[:, 0]], x[e[:, 3]] - x[e[:, 1]]], axis=1)


def barycentric_lattice(mesh: Triangulation, tri: np.ndarray, xy: np.ndarray) -> np.ndarray:
    """Barycentric coordinates of points ``xy`` (float, unit square) in triangles ``tri``."""
    p = mesh.points[mesh.triangles[tri]]
    v0, v1, v2 = p[:, 0], p[:, 1], p[:, 2]
    det = (v1[:, 0] - v0[:, 0]) * (v2[:, 1] - v0[:, 1]) - (v1[:, 1] - v0[:, 1]) * (v2[:, 0] - v0[:, 0])
    l1 = ((xy[:, 0] - v0[:, 0]) * (v2[:, 1] - v0[:, 1]) - (xy[:, 1] - v0[:, 1]) * (v2[:, 0] - v0[:, 0])) / det
    l2 = ((v1[:, 0] - v0[:, 0]) * (xy[:, 1] - v0[:, 1]) - (v1[:, 1] - v0[:, 1]) * (xy[:, 0] - v0[:, 0])) / det
    lam = np.stack([1.0 - l1 - l2, l1, l2], axis=1)
    # values are dyadic; snap tiny rounding residue
    lam[np.abs(lam) < 1e-14] = 0.0
    return lam


@dataclass(eq=False)
class Prolongation:
    from_scale: int
    to_scale: int
    matrix: sp.csr_matrix

    def __matmul__(self, other):
        return self.matrix @ other


def _ext_prolongation(coarse: BrokenSpace, fine: BrokenSpace, hierarchy: MeshHierarchy) -> sp.csr_matrix:
    """Rows: fine extended dofs; columns: coarse extended dofs."""
    anc = hierarchy.ancestors(fine.mesh.level, coarse.mesh.level)
    # cells refine and never merge
    fine_cell = fine.partition.cell_of_triangle
    coarse_cell = coarse.partition.cell_of_triangle[anc]
    owner = np.full(fine.partition.n_cells, -1, dtype=np.int64)
    owner[fine_cell] = coarse_cell
    if np.any(owner[fine_cell] != coarse_cell):
        raise ValueError("fine cells are not nested in coarse cells")

    _, first = np.unique(fine.tri_ext.ravel(), return_index=True)
    t, first_loc = first // 3, first % 3
    T = anc[t]
    xy = fine.mesh.points[fine.mesh.triangles[t, first_loc]]
    lam = barycentric_lattice(coarse.mesh, T, xy)
    cols = coarse.tri_ext[T]
    rows = np.repeat(np.arange(fine.n_ext), 3)
    lam, cols = lam.ravel(), cols.ravel()
    keep = lam != 0
    return sp.csr_matrix((lam[keep], (rows[keep], cols[keep])), shape=(fine.n_ext, coarse.n_ext))


def build_prolongation(coarse: BrokenSpace, fine: BrokenSpace, hierarchy: MeshHierarchy) -> Prolongation:
    """P1 interpolation of coarse broken functions on the fine broken space."""
    if coarse.scale > fine.scale:
        raise ValueError("coarse scale exceeds fine scale")
    if coarse.mesh.level > fine.mesh.level or hierarchy.level(fine.mesh.level) is not fine.mesh:
        raise ValueError("spaces do not belong to this mesh hierarchy")
    pe = _ext_prolongation(coarse, fine, hierarchy)
    mat = pe[fine.dof_to_ext][:, coarse.dof_to_ext].tocsr()
    mat.eliminate_zeros()
    return Prolongation(coarse.scale, fine.scale, mat)


def prolongation_ext(coarse: BrokenSpace, fine: BrokenSpace, hierarchy: MeshHierarchy) -> sp.csr_matrix:
    """Extended-dof version (boundary entries included) used by projections."""
    return _ext_prolongation(coarse, fine, hierarchy)
