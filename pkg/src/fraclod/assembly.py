"""Assembly of the broken gradient form, the weighted jump form and loads.

The bilinear form on a broken space S_k is

    a(v, w) = sum_T int_T A grad v . grad w
              + sum_{j<=k} w_j int_{Gamma_j} B [v][w]

with level weights ``w_j = (1 + c)**j C_j``.  All matrices act on dof
vectors; boundary dofs are excluded rather than penalized.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.io
import scipy.sparse as sp

from .femspace import BrokenSpace
from .geometry import NetworkConstants

_EDGE_MASS = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0
# jump of the two endpoint traces from (minus_a, minus_b, plus_a, plus_b)
_JUMP = np.array([[-1.0, 0.0, 1.0, 0.0], [0.0, -1.0, 0.0, 1.0]])
_JUMP_LOCAL = _JUMP.T @ _EDGE_MASS @ _JUMP


def _one(xy):
    return np.ones(len(xy))


@dataclass
class Coefficients:
    """Coefficient fields; each callable maps an ``(n, 2)`` point array.

    ``A`` returns ``(n, 2, 2)`` symmetric matrices (``None`` means identity),
    ``B`` and ``f`` return ``(n,)`` values.
    """

    A: Callable | None = None
    B: Callable | None = None
    f: Callable = _one
    c_frak: float = 1.0
    f_name: str = "one"

    @property
    def is_identity(self) -> bool:
        return self.A is None and self.B is None


def _symmetrize(m: sp.spmatrix) -> sp.csr_matrix:
    m = m.tocsr()
    out = ((m + m.T) * 0.5).tocsr()
    out.sort_indices()
    out.eliminate_zeros()
    return out


def _scatter(rows_local: np.ndarray, vals: np.ndarray, n: int) -> sp.csr_matrix:
    """Assemble element matrices given per-element dof lists (-1 = dropped)."""
    k = rows_local.shape[1]
    r = np.repeat(rows_local, k, axis=1).ravel()
    c = np.tile(rows_local, (1, k)).ravel()
    v = vals.reshape(len(rows_local), -1).ravel()
    keep = (r >= 0) & (c >= 0)
    return sp.coo_matrix((v[keep], (r[keep], c[keep])), shape=(n, n)).tocsr()


def element_gradients(space: BrokenSpace):
    """Barycentric gradients (nT, 3, 2) and areas of all triangles."""
    mesh = space.mesh
    p = mesh.points[mesh.triangles]
    jac = np.stack([p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]], axis=2)  # columns are edge vectors
    inv = np.linalg.inv(jac)
    ref = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])
    grads = np.einsum("ij,tjk->tik", ref, inv)
    areas = mesh.areas()
    if np.any(areas <= 0):
        raise ValueError("degenerate or inverted triangle in mesh")
    return grads, areas


def element_stiffness(space: BrokenSpace, A: Callable | None = None) -> np.ndarray:
    grads, areas = element_gradients(space)
    if A is None:
        ke = np.einsum("tik,tjk->tij", grads, grads)
    else:
        centroids = space.mesh.points[space.mesh.triangles].mean(axis=1)
        amat = np.asarray(A(centroids), dtype=float).reshape(-1, 2, 2)
        ke = np.einsum("tik,tkl,tjl->tij", grads, amat, grads)
    ke = 0.5 * (ke + np.swapaxes(ke, 1, 2))
    return ke * areas[:, None, None]


def assemble_gradient(space: BrokenSpace, coeff: Coefficients | None = None, ext: bool = False) -> sp.csr_matrix:
    """Broken P1 stiffness; triangles only couple dofs of their own cell."""
    A = coeff.A if coeff is not None else None
    ke = element_stiffness(space, A)
    idx = space.tri_ext if ext else space.tri_dofs
    n = space.n_ext if ext else space.n_dofs
    return _symmetrize(_scatter(idx, ke, n))


def jump_weights_for(space: BrokenSpace, constants: NetworkConstants) -> np.ndarray:
    w = constants.jump_weights
    lev = space.interface.level
    if len(lev) and lev.max() >= len(w):
        raise ValueError("constants do not cover all interface levels")
    return w[lev]


def assemble_jump(space: BrokenSpace, constants: NetworkConstants, coeff: Coefficients | None = None) -> sp.csr_matrix:
    """Weighted interface jump form with the exact P1 edge mass matrix."""
    pairs = space.interface
    n = space.n_dofs
    if len(pairs) == 0:
        return sp.csr_matrix((n, n))
    w = jump_weights_for(space, constants)
    if coeff is not None and coeff.B is not None:
        w = w * np.asarray(coeff.B(pairs.midpoint), dtype=float)
    scale = w * pairs.length
    vals = scale[:, None, None] * _JUMP_LOCAL[None]
    return _symmetrize(_scatter(pairs.dofs, vals, n))


def assemble_operator(space: BrokenSpace, constants: NetworkConstants, coeff: Coefficients | None = None) -> sp.csr_matrix:
    """The full operator G + J of the bilinear form a(., .)."""
    return _symmetrize(assemble_gradient(space, coeff) + assemble_jump(space, constants, coeff))


def assemble_load(space: BrokenSpace, f: Callable | None) -> np.ndarray:
    """Load vector by the edge-midpoint rule on every triangle."""
    n = space.n_dofs
    if f is None:
        return np.zeros(n)
    mesh = space.mesh
    p = mesh.points[mesh.triangles]
    mids = np.stack([0.5 * (p[:, 0] + p[:, 1]), 0.5 * (p[:, 1] + p[:, 2]), 0.5 * (p[:, 2] + p[:, 0])], axis=1)
    fm = np.asarray(f(mids.reshape(-1, 2)), dtype=float).reshape(-1, 3)
    areas = mesh.areas()
    # hat i is 1/2 on the two midpoints adjacent to vertex i and 0 on the third
    loc = np.stack([fm[:, 0] + fm[:, 2], fm[:, 0] + fm[:, 1], fm[:, 1] + fm[:, 2]], axis=1)
    loc *= (areas / 6.0)[:, None]
    idx = space.tri_dofs.ravel()
    keep = idx >= 0
    return np.bincount(idx[keep], weights=loc.ravel()[keep], minlength=n)


def assemble_mass(space: BrokenSpace, ext: bool = False) -> sp.csr_matrix:
    """Broken P1 mass matrix."""
    areas = space.mesh.areas()
    m = (np.ones((3, 3)) + np.eye(3)) / 12.0
    vals = areas[:, None, None] * m[None]
    idx = space.tri_ext if ext else space.tri_dofs
    n = space.n_ext if ext else space.n_dofs
    return _symmetrize(_scatter(idx, vals, n))


def mass_vector(space: BrokenSpace, ext: bool = True) -> np.ndarray:
    """Integrals of the (broken) nodal basis functions."""
    areas = space.mesh.areas()
    idx = (space.tri_ext if ext else space.tri_dofs).ravel()
    n = space.n_ext if ext else space.n_dofs
    w = np.repeat(areas / 3.0, 3)
    keep = idx >= 0
    return np.bincount(idx[keep], weights=w[keep], minlength=n)


def _check(space: BrokenSpace, v: np.ndarray):
    if np.shape(v)[0] != space.n_dofs:
        raise ValueError(f"vector of length {np.shape(v)[0]} does not match {space.n_dofs} dofs")


def energy(op: sp.spmatrix, v: np.ndarray) -> float:
    return float(max(v @ (op @ v), 0.0))


def h_norm(space: BrokenSpace, constants: NetworkConstants, v: np.ndarray, op: sp.spmatrix | None = None) -> float:
    """Norm of the scalar product with A = I and B = 1."""
    _check(space, v)
    if op is None:
        op = assemble_operator(space, constants)
    return float(np.sqrt(energy(op, v)))


def a_norm(space: BrokenSpace, constants: NetworkConstants, coeff: Coefficients, v: np.ndarray,
           op: sp.spmatrix | None = None) -> float:
    _check(space, v)
    if op is None:
        op = assemble_operator(space, constants, coeff)
    return float(np.sqrt(energy(op, v)))


def l2_norm(space: BrokenSpace, v: np.ndarray, mass: sp.spmatrix | None = None) -> float:
    _check(space, v)
    if mass is None:
        mass = assemble_mass(space)
    return float(np.sqrt(energy(mass, v)))


def export_matrix(op: sp.spmatrix, path, comment: str = "") -> None:
    """Matrix Market coordinate export (1-based indices)."""
    scipy.io.mmwrite(str(path), sp.coo_matrix(op), comment=comment, symmetry="general")
