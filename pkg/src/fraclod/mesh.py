"""Nested triangulations of the unit square.

All meshes descend from the two-triangle partition of (0, 1)^2 by uniform
red refinement.  Vertex coordinates are kept as integers on the dyadic
lattice ``2**-level`` so that containment tests (interface resolution,
point location) are exact; floating point coordinates are derived on demand.

Every mesh of the family is the structured grid with all diagonals parallel
to (1, 1), which is what :meth:`Triangulation.locate` relies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(eq=False)
class Triangulation:
    """Conforming triangulation on the lattice ``2**-level``.

    Attributes
    ----------
    ij : (nV, 2) int array
        Integer vertex coordinates; the point is ``ij / 2**level``.
    triangles : (nT, 3) int array
        Positively oriented vertex triples.
    level : int
        Number of refinements applied to the base mesh.
    parent : (nT,) int array or None
        Parent triangle in the next coarser mesh.
    """

    ij: np.ndarray
    triangles: np.ndarray
    level: int
    parent: np.ndarray | None = None
    edges: np.ndarray = field(init=False, repr=False)
    tri_edges: np.ndarray = field(init=False, repr=False)
    edge_tris: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.ij = np.asarray(self.ij, dtype=np.int64)
        self.triangles = np.asarray(self.triangles, dtype=np.int64)
        self._build_connectivity()
        self._lookup = None
        self._vertex_tris = None

    # -- connectivity -----------------------------------------------------
    def _build_connectivity(self):
        t = self.triangles
        # local edge i joins vertex i and vertex i+1
        pairs = np.stack([t, np.roll(t, -1, axis=1)], axis=2).reshape(-1, 2)
        pairs = np.sort(pairs, axis=1)
        nv = len(self.ij)
        keys = pairs[:, 0] * nv + pairs[:, 1]
        ukeys, inverse = np.unique(keys, return_inverse=True)
        self.edges = np.stack([ukeys // nv, ukeys % nv], axis=1)
        self.tri_edges = inverse.reshape(-1, 3)
        self._edge_keys = ukeys

        edge_tris = np.full((len(ukeys), 2), -1, dtype=np.int64)
        tri_ids = np.repeat(np.arange(len(t)), 3)
        order = np.argsort(inverse, kind="stable")
        sorted_edges = inverse[order]
        first = np.ones(len(order), dtype=bool)
        first[1:] = sorted_edges[1:] != sorted_edges[:-1]
        edge_tris[sorted_edges[first], 0] = tri_ids[order[first]]
        edge_tris[sorted_edges[~first], 1] = tri_ids[order[~first]]
        self.edge_tris = edge_tris

    # -- basic geometry ---------------------------------------------------
    @property
    def n(self) -> int:
        """Lattice resolution: number of grid intervals per side."""
        return 2**self.level

    @property
    def points(self) -> np.ndarray:
        return self.ij / float(self.n)

    @property
    def n_vertices(self) -> int:
        return len(self.ij)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def areas(self) -> np.ndarray:
        p = self.points[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def twice_areas_lattice(self) -> np.ndarray:
        """Exact doubled signed areas in lattice units."""
        p = self.ij[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]

    def diameter(self) -> float:
        """Largest edge length, i.e. h of the mesh."""
        p = self.points
        return float(np.max(np.linalg.norm(p[self.edges[:, 0]] - p[self.edges[:, 1]], axis=1)))

    def edge_lengths(self) -> np.ndarray:
        p = self.points
        return np.linalg.norm(p[self.edges[:, 0]] - p[self.edges[:, 1]], axis=1)

    def boundary_vertices(self) -> np.ndarray:
        """Mask of vertices on the boundary of the unit square."""
        n = self.n
        x, y = self.ij[:, 0], self.ij[:, 1]
        return (x == 0) | (y == 0) | (x == n) | (y == n)

    def boundary_edges(self) -> np.ndarray:
        return self.edge_tris[:, 1] < 0

    # -- lookup -----------------------------------------------------------
    def vertex_id(self, ij) -> np.ndarray:
        """Vertex ids of integer lattice points (-1 where absent)."""
        ij = np.asarray(ij, dtype=np.int64)
        n = self.n
        if self._lookup is None:
            lk = np.full((n + 1) * (n + 1), -1, dtype=np.int64)
            lk[self.ij[:, 0] * (n + 1) + self.ij[:, 1]] = np.arange(self.n_vertices)
            self._lookup = lk
        out = np.full(ij.shape[:-1], -1, dtype=np.int64)
        ok = np.all((ij >= 0) & (ij <= n), axis=-1)
        out[ok] = self._lookup[ij[ok][..., 0] * (n + 1) + ij[ok][..., 1]]
        return out

    def edge_id(self, a, b) -> np.ndarray:
        """Edge ids for vertex pairs (-1 if the pair is not a mesh edge)."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        keys = lo * self.n_vertices + hi
        pos = np.searchsorted(self._edge_keys, keys)
        pos = np.clip(pos, 0, len(self._edge_keys) - 1)
        found = (self._edge_keys[pos] == keys) & (a >= 0) & (b >= 0)
        return np.where(found, pos, -1)

    def vertex_triangles(self):
        """CSR-style (offsets, triangle ids) incidence of vertices."""
        if self._vertex_tris is None:
            flat = self.triangles.ravel()
            order = np.argsort(flat, kind="stable")
            counts = np.bincount(flat, minlength=self.n_vertices)
            offsets = np.concatenate([[0], np.cumsum(counts)])
            self._vertex_tris = (offsets, order // 3)
        return self._vertex_tris

    def locate(self, xy_lattice) -> np.ndarray:
        """Triangle ids containing points given in lattice units.

        Points on shared edges resolve to one of the incident triangles.
        """
        xy = np.atleast_2d(np.asarray(xy_lattice, dtype=float))
        n = self.n
        if not hasattr(self, "_square_lookup"):
            p = self.ij[self.triangles]
            corner = p.min(axis=1)
            rel = p - corner[:, None, :]
            lower = np.any((rel[:, :, 0] == 1) & (rel[:, :, 1] == 0), axis=1)
            lk = np.full((n, n, 2), -1, dtype=np.int64)
            lk[corner[:, 0], corner[:, 1], np.where(lower, 0, 1)] = np.arange(self.n_triangles)
            self._square_lookup = lk
        i = np.clip(np.floor(xy[:, 0]).astype(np.int64), 0, n - 1)
        j = np.clip(np.floor(xy[:, 1]).astype(np.int64), 0, n - 1)
        half = np.where(xy[:, 0] - i >= xy[:, 1] - j, 0, 1)
        return self._square_lookup[i, j, half]

    def segment_edges(self, seg, denom_exp: int) -> tuple[np.ndarray, np.ndarray]:
        """Split lattice segments into mesh edges.

        Parameters
        ----------
        seg : (m, 4) int array
            Segments ``x1 y1 x2 y2`` on the lattice ``2**-denom_exp``.

        Returns
        -------
        edge_ids : int array
            Mesh edge ids of all pieces; -1 for pieces that are not mesh edges.
        owner : int array
            Index of the segment each piece belongs to.
        """
        seg = np.asarray(seg, dtype=np.int64).reshape(-1, 4)
        if len(seg) == 0:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        shift = self.level - denom_exp
        if shift >= 0:
            s = seg * (1 << shift)
            exact = np.ones(len(seg), dtype=bool)
        else:
            q = 1 << (-shift)
            exact = np.all(seg % q == 0, axis=1)
            s = seg // q
        d = s[:, 2:] - s[:, :2]
        length = np.max(np.abs(d), axis=1)
        length = np.maximum(length, 1)
        step = d // length[:, None]
        # a straight piece must follow a lattice direction of the mesh family
        straight = np.all(step * length[:, None] == d, axis=1)
        direction_ok = (
            ((np.abs(step[:, 0]) == 1) & (step[:, 1] == 0))
            | ((step[:, 0] == 0) & (np.abs(step[:, 1]) == 1))
            | ((step[:, 0] == step[:, 1]) & (np.abs(step[:, 0]) == 1))
        )
        valid = exact & straight & direction_ok
        owner = np.repeat(np.arange(len(seg)), length)
        offs = np.arange(len(owner)) - np.repeat(np.cumsum(length) - length, length)
        start = s[owner, :2] + offs[:, None] * step[owner]
        a = self.vertex_id(start)
        b = self.vertex_id(start + step[owner])
        eid = self.edge_id(a, b)
        eid[~valid[owner]] = -1
        return eid, owner


def base_mesh() -> Triangulation:
    """The unit square split along the diagonal from (0, 0) to (1, 1)."""
    ij = np.array([[0, 0], [1, 0], [1, 1], [0, 1]])
    tris = np.array([[0, 1, 2], [0, 2, 3]])
    return Triangulation(ij, tris, level=0)


def refine_uniform(mesh: Triangulation) -> Triangulation:
    """Red refinement: every triangle is split into four via edge midpoints."""
    nv = mesh.n_vertices
    ij = np.concatenate([2 * mesh.ij, mesh.ij[mesh.edges[:, 0]] + mesh.ij[mesh.edges[:, 1]]])
    t = mesh.triangles
    m = nv + mesh.tri_edges  # m[:, i] is the midpoint of (v_i, v_{i+1})
    v0, v1, v2 = t[:, 0], t[:, 1], t[:, 2]
    m01, m12, m20 = m[:, 0], m[:, 1], m[:, 2]
    children = np.stack(
        [
            np.stack([v0, m01, m20], axis=1),
            np.stack([m01, v1, m12], axis=1),
            np.stack([m20, m12, v2], axis=1),
            np.stack([m01, m12, m20], axis=1),
        ],
        axis=1,
    ).reshape(-1, 3)
    parent = np.repeat(np.arange(len(t)), 4)
    return Triangulation(ij, children, level=mesh.level + 1, parent=parent)


def check_resolution(network, k: int, mesh: Triangulation) -> bool:
    """True iff every interface edge of levels ``1..k`` is a union of mesh edges."""
    for j in range(1, min(k, network.k_max) + 1):
        eid, _ = mesh.segment_edges(network.level_edges(j), network.denom_exp)
        if np.any(eid < 0):
            return False
    return True


class MeshHierarchy:
    """Lazily built sequence of uniformly refined meshes.

    ``scale_to_mesh`` maps an interface scale k to the refinement level of the
    mesh T^(k) that resolves Gamma^(k) for the given network kind.
    """

    def __init__(self, kind: str = "localized"):
        if kind not in ("localized", "geological"):
            raise ValueError(f"unknown network kind {kind!r}")
        self.kind = kind
        self.meshes = [base_mesh()]

    def scale_to_mesh(self, k: int) -> int:
        if k < 0:
            raise ValueError("scale must be nonnegative")
        if self.kind == "localized":
            return 2 * k
        return 0 if k == 0 else 3 + k

    def level(self, m: int) -> Triangulation:
        while len(self.meshes) <= m:
            self.meshes.append(refine_uniform(self.meshes[-1]))
        return self.meshes[m]

    def mesh_for_scale(self, k: int) -> Triangulation:
        return self.level(self.scale_to_mesh(k))

    def h(self, k: int) -> float:
        return np.sqrt(2.0) * 2.0 ** (-self.scale_to_mesh(k))

    def ancestors(self, fine_level: int, coarse_level: int) -> np.ndarray:
        """Ancestor in ``coarse_level`` of every triangle of ``fine_level``."""
        if coarse_level > fine_level:
            raise ValueError("coarse level must not exceed fine level")
        anc = np.arange(self.level(fine_level).n_triangles)
        for m in range(fine_level, coarse_level, -1):
            anc = self.level(m).parent[anc]
        return anc


def write_mesh(mesh: Triangulation, path) -> None:
    """Plain text export.

    Format::

        # fraclod mesh level <m>
        vertices <nV>
        <x> <y>            (floating point, one per line)
        triangles <nT>
        <a> <b> <c>        (0-based vertex ids)
    """
    p = mesh.points
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# fraclod mesh level {mesh.level}\n")
        fh.write(f"vertices {mesh.n_vertices}\n")
        for x, y in p:
            fh.write(f"{x!r} {y!r}\n")
        fh.write(f"triangles {mesh.n_triangles}\n")
        for a, b, c in mesh.triangles:
            fh.write(f"{a} {b} {c}\n")
