"""Interface networks, their cell partitions and geometric constants.

Two network kinds are provided:

* ``localized``: the self-similar network whose first level consists of the
  lines x = 1/4, y = 1/4 and the stubs x = 1/2 (y < 1/4), y = 1/2 (x < 1/4);
  every further level places quarter-scale copies of the current network in
  the three squares adjacent to the origin.
* ``geological``: a seeded random "crystal" network.  Each cell that is
  refined is cut into four subcells by lattice paths running from its left,
  top, right and bottom boundary to a center vertex.

Interface edges are stored as integer segments ``x1 y1 x2 y2`` on the lattice
``2**-denom_exp`` so that every containment test is exact.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import ConvexHull

from .mesh import MeshHierarchy, Triangulation

log = logging.getLogger(__name__)

MAX_LEVEL = 6
PATH_BIAS = 8.0
MAX_BACKTRACKS = 100
MAX_ATTEMPTS = 50

_DIRECTIONS = np.array([[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1], [-1, -1]])


class NetworkError(ValueError):
    """Raised for invalid network requests or failed constructions."""


@dataclass(eq=False)
class InterfaceNetwork:
    """Leveled sets of lattice-aligned interface edges.

    ``levels[j - 1]`` holds the edges of Gamma_j as an ``(n, 4)`` integer array
    on the lattice ``2**-denom_exp``; each row is one edge of the mesh that
    first resolves level j, canonically ordered.
    """

    kind: str
    levels: list
    denom_exp: int
    seed: int | None = None

    @property
    def k_max(self) -> int:
        return len(self.levels)

    def level_edges(self, j: int) -> np.ndarray:
        if not 1 <= j <= self.k_max:
            raise NetworkError(f"level {j} outside 1..{self.k_max}")
        return self.levels[j - 1]

    def edges_up_to(self, k: int) -> np.ndarray:
        if k <= 0:
            return np.zeros((0, 4), dtype=np.int64)
        return np.concatenate([self.level_edges(j) for j in range(1, min(k, self.k_max) + 1)])

    def points_float(self, j: int) -> np.ndarray:
        return self.level_edges(j) / float(2**self.denom_exp)

    def hierarchy(self) -> MeshHierarchy:
        return MeshHierarchy(self.kind)

    def digest(self) -> str:
        import hashlib

        h = hashlib.sha256()
        h.update(f"{self.kind}:{self.seed}:{self.denom_exp}".encode())
        for lev in self.levels:
            h.update(np.ascontiguousarray(lev, dtype=np.int64).tobytes())
            h.update(b"|")
        return h.hexdigest()


@dataclass(eq=False)
class CellPartition:
    """Cells of Omega^(k) as connected groups of triangles of one mesh."""

    level: int
    mesh: Triangulation
    cell_of_triangle: np.ndarray
    edge_level: np.ndarray  # interface level of each mesh edge, 0 if none
    touches_boundary: np.ndarray
    invariant: np.ndarray
    neighbors: list
    areas: np.ndarray
    diameters: np.ndarray

    @property
    def n_cells(self) -> int:
        return len(self.areas)

    def triangles_of(self, cell: int) -> np.ndarray:
        return np.flatnonzero(self.cell_of_triangle == cell)

    def cell(self, i: int) -> dict:
        return {
            "triangles": self.triangles_of(i),
            "touches_boundary": bool(self.touches_boundary[i]),
            "invariant": bool(self.invariant[i]),
            "neighbors": self.neighbors[i],
        }

    @property
    def diameter_bound(self) -> float:
        """Largest diameter of a non-invariant cell (0 if all are invariant)."""
        mask = ~self.invariant
        return float(self.diameters[mask].max()) if mask.any() else 0.0

    def max_neighbors(self) -> int:
        return max((len(nb) for nb in self.neighbors), default=0)

    def interior_cell_of_vertex(self) -> np.ndarray:
        """Cell id of every vertex interior to a cell; -1 on cell boundaries."""
        mesh = self.mesh
        offsets, tris = mesh.vertex_triangles()
        cells = self.cell_of_triangle[tris]
        lo = np.minimum.reduceat(cells, offsets[:-1])
        hi = np.maximum.reduceat(cells, offsets[:-1])
        out = np.where(lo == hi, lo, -1)
        out[mesh.boundary_vertices()] = -1
        return out

    def shape_regularity(self) -> float:
        """Diagnostic max over cells of (max/min) boundary distance from the center vertex."""
        mesh = self.mesh
        inner = self.interior_cell_of_vertex()
        pts = mesh.points
        worst = 1.0
        for c in range(self.n_cells):
            centre = cell_center(self, c, inner)
            if centre < 0:
                continue
            verts = np.unique(mesh.triangles[self.cell_of_triangle == c])
            bnd = verts[inner[verts] != c]
            d = np.linalg.norm(pts[bnd] - pts[centre], axis=1)
            worst = max(worst, float(d.max() / d.min()))
        return worst


# ---------------------------------------------------------------------------
# edge bookkeeping


def _canonical(seg: np.ndarray) -> np.ndarray:
    seg = np.asarray(seg, dtype=np.int64).reshape(-1, 4)
    swap = (seg[:, 0] > seg[:, 2]) | ((seg[:, 0] == seg[:, 2]) & (seg[:, 1] > seg[:, 3]))
    out = seg.copy()
    out[swap] = seg[swap][:, [2, 3, 0, 1]]
    return out


def _unique_edges(seg: np.ndarray) -> np.ndarray:
    seg = _canonical(seg)
    if len(seg) == 0:
        return seg
    return np.unique(seg, axis=0)


def subdivide(seg: np.ndarray, factor: int) -> np.ndarray:
    """Rescale unit lattice edges by ``factor`` and split them into unit edges."""
    seg = np.asarray(seg, dtype=np.int64).reshape(-1, 4) * factor
    if len(seg) == 0:
        return seg
    d = seg[:, 2:] - seg[:, :2]
    length = np.max(np.abs(d), axis=1)
    step = d // np.maximum(length, 1)[:, None]
    owner = np.repeat(np.arange(len(seg)), length)
    offs = np.arange(len(owner)) - np.repeat(np.cumsum(length) - length, length)
    start = seg[owner, :2] + offs[:, None] * step[owner]
    return _canonical(np.concatenate([start, start + step[owner]], axis=1))


def _edge_set_difference(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = _unique_edges(a)
    if len(b) == 0 or len(a) == 0:
        return a
    b = _unique_edges(b)
    view = np.dtype((np.void, a.dtype.itemsize * 4))
    mask = ~np.isin(np.ascontiguousarray(a).view(view), np.ascontiguousarray(b).view(view))
    return a[mask.ravel()]


def edge_levels_on_mesh(levels, denom_exp: int, mesh: Triangulation, k: int) -> np.ndarray:
    """Interface level of each mesh edge for levels ``1..k``.

    Raises
    ------
    NetworkError
        If the mesh does not resolve one of these levels.
    """
    lev = np.zeros(mesh.n_edges, dtype=np.int64)
    for j in range(1, min(k, len(levels)) + 1):
        eid, _ = mesh.segment_edges(levels[j - 1], denom_exp)
        if np.any(eid < 0):
            raise NetworkError(f"mesh level {mesh.level} does not resolve interface level {j}")
        lev[eid] = j
    return lev


# ---------------------------------------------------------------------------
# cells


def _components(mesh: Triangulation, edge_level: np.ndarray) -> np.ndarray:
    et = mesh.edge_tris
    link = (et[:, 1] >= 0) & (edge_level == 0)
    a, b = et[link, 0], et[link, 1]
    nt = mesh.n_triangles
    graph = coo_matrix((np.ones(len(a)), (a, b)), shape=(nt, nt))
    _, labels = connected_components(graph, directed=False)
    # number cells by their smallest triangle id
    first = np.full(labels.max() + 1, nt, dtype=np.int64)
    np.minimum.at(first, labels, np.arange(nt))
    rank = np.empty_like(first)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[labels]


def _cell_diameters(mesh: Triangulation, cell_of_triangle: np.ndarray, n_cells: int) -> np.ndarray:
    pts = mesh.points
    diam = np.zeros(n_cells)
    order = np.argsort(cell_of_triangle, kind="stable")
    bounds = np.searchsorted(cell_of_triangle[order], np.arange(n_cells + 1))
    for c in range(n_cells):
        verts = np.unique(mesh.triangles[order[bounds[c] : bounds[c + 1]]])
        p = pts[verts]
        if len(p) > 8:
            try:
                p = p[ConvexHull(p).vertices]
            except Exception:  # degenerate hull, fall back to all points
                pass
        diff = p[:, None, :] - p[None, :, :]
        diam[c] = np.sqrt((diff**2).sum(-1).max())
    return diam


def partition_from_levels(levels, denom_exp: int, k: int, mesh: Triangulation) -> CellPartition:
    """Cell partition of ``mesh`` cut by levels ``1..k`` of a (partial) level list."""
    k_stored = len(levels)
    edge_level = edge_levels_on_mesh(levels, denom_exp, mesh, k)
    cell = _components(mesh, edge_level)
    n_cells = int(cell.max()) + 1
    et = mesh.edge_tris

    bnd = et[:, 1] < 0
    touches = np.zeros(n_cells, dtype=bool)
    touches[cell[et[bnd, 0]]] = True

    iface = (edge_level > 0) & ~bnd
    c1, c2 = cell[et[iface, 0]], cell[et[iface, 1]]
    pairs = np.unique(np.sort(np.stack([c1, c2], axis=1), axis=1), axis=0)
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    neighbors = [[] for _ in range(n_cells)]
    for a, b in pairs:
        neighbors[a].append(int(b))
        neighbors[b].append(int(a))
    neighbors = [np.array(sorted(nb), dtype=np.int64) for nb in neighbors]

    invariant = np.ones(n_cells, dtype=bool)
    scale = 2.0 ** (mesh.level - denom_exp)
    for j in range(k + 1, k_stored + 1):
        seg = levels[j - 1]
        if len(seg) == 0:
            continue
        mid = 0.5 * (seg[:, :2] + seg[:, 2:]) * scale
        invariant[cell[mesh.locate(mid)]] = False

    areas = np.bincount(cell, weights=mesh.areas(), minlength=n_cells)
    diam = _cell_diameters(mesh, cell, n_cells)
    return CellPartition(k, mesh, cell, edge_level, touches, invariant, neighbors, areas, diam)


def extract_cells(network: InterfaceNetwork, k: int, mesh: Triangulation) -> CellPartition:
    """Cells of Omega^(k) on a mesh that resolves Gamma^(k)."""
    if k < 0 or k > network.k_max:
        raise NetworkError(f"scale {k} outside 0..{network.k_max}")
    return partition_from_levels(network.levels, network.denom_exp, k, mesh)


def cell_center(part: CellPartition, c: int, inner: np.ndarray | None = None) -> int:
    """Interior vertex of cell ``c`` closest to its area centroid (-1 if none)."""
    mesh = part.mesh
    if inner is None:
        inner = part.interior_cell_of_vertex()
    cand = np.flatnonzero(inner == c)
    if len(cand) == 0:
        return -1
    tris = part.triangles_of(c)
    a = mesh.areas()[tris]
    centroid = (mesh.points[mesh.triangles[tris]].mean(axis=1) * a[:, None]).sum(0) / a.sum()
    d = np.linalg.norm(mesh.points[cand] - centroid, axis=1)
    # ties broken by smallest vertex id for determinism
    return int(cand[np.argmin(d)])


# ---------------------------------------------------------------------------
# localized network


def _localized_level1() -> np.ndarray:
    seg = []
    for t in range(4):
        seg.append([1, t, 1, t + 1])  # x = 1/4
        seg.append([t, 1, t + 1, 1])  # y = 1/4
    seg.append([2, 0, 2, 1])  # x = 1/2, y < 1/4
    seg.append([0, 2, 1, 2])  # y = 1/2, x < 1/4
    return _unique_edges(np.array(seg))


def build_localized_network(k_max: int, max_level: int = MAX_LEVEL) -> InterfaceNetwork:
    """Deterministic self-similar network with levels ``1..k_max``.

    Level j is stored as unit edges of the lattice ``4**-j`` (rescaled to the
    common lattice ``4**-k_max``).
    """
    if not 1 <= k_max <= max_level:
        raise NetworkError(f"k_max must lie in 1..{max_level}, got {k_max}")
    native = [_localized_level1()]
    total = native[0]
    for k in range(1, k_max):
        n = 4**k
        tilde = np.concatenate([total, total + [n, 0, n, 0], total + [0, n, 0, n]])
        prev = subdivide(total, 4)
        new = _edge_set_difference(tilde, prev)
        native.append(new)
        total = _unique_edges(np.concatenate([prev, new]))
    levels = [_unique_edges(e * 4 ** (k_max - j)) for j, e in enumerate(native, start=1)]
    return InterfaceNetwork("localized", levels, denom_exp=2 * k_max)


# ---------------------------------------------------------------------------
# geological network


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


def _ray_hit(mesh: Triangulation, inner: np.ndarray, cell: int, start_ij, direction) -> int:
    p = np.array(start_ij, dtype=np.int64)
    while True:
        p = p + direction
        v = int(mesh.vertex_id(p))
        if v < 0:
            return -1
        if inner[v] != cell:
            return v


def _seg_dist(p, a, b) -> np.ndarray:
    ab = b - a
    t = np.clip(((p - a) @ ab) / max(ab @ ab, 1e-300), 0.0, 1.0)
    return np.linalg.norm(p - (a + t[:, None] * ab), axis=1)


def _walk(mesh, inner, cell, s, c, blocked, rng, bias, max_backtracks):
    """Biased depth-first lattice walk from boundary vertex s to center c."""
    ij = mesh.ij
    cij = ij[c]
    sf, cf = ij[s].astype(float), cij.astype(float)

    def candidates(v):
        nb = ij[v] + _DIRECTIONS
        ids = mesh.vertex_id(nb)
        d_old = np.sum((ij[v] - cij) ** 2)
        d_new = np.sum((nb - cij) ** 2, axis=1)
        ok = (ids >= 0) & (d_new < d_old)
        ok &= (ids == c) | ((inner[np.maximum(ids, 0)] == cell) & ~np.isin(ids, list(blocked)))
        ids = ids[ok]
        if len(ids) == 0:
            return []
        mid = 0.5 * (ij[v] + ij[ids])
        w = np.exp(-bias * _seg_dist(mid, sf, cf))
        order = []
        ids = list(ids)
        w = list(w)
        while ids:  # weighted sampling without replacement
            p = np.array(w) / np.sum(w)
            i = int(rng.choice(len(ids), p=p))
            order.append(int(ids.pop(i)))
            w.pop(i)
        return order

    path = [s]
    stack = [candidates(s)]
    backtracks = 0
    while stack:
        if path[-1] == c:
            return path
        if not stack[-1]:
            stack.pop()
            path.pop()
            backtracks += 1
            if backtracks > max_backtracks:
                return None
            continue
        w = stack[-1].pop(0)
        path.append(w)
        stack.append([] if w == c else candidates(w))
    return None


def _split_cell(mesh, part, inner, cell, centre, seed, key, bias):
    """Four vertex paths from the cell's left/top/right/bottom boundary to its center."""
    cij = mesh.ij[centre]
    starts = [_ray_hit(mesh, inner, cell, cij, d) for d in ([-1, 0], [0, 1], [1, 0], [0, -1])]
    if min(starts) < 0 or len(set(starts)) < 4:
        return None
    for attempt in range(MAX_ATTEMPTS):
        rng = _rng(seed, *key, attempt)
        blocked: set[int] = set()
        paths = []
        for s in starts:
            path = _walk(mesh, inner, cell, s, centre, blocked, rng, bias, MAX_BACKTRACKS)
            if path is None:
                break
            paths.append(path)
            blocked.update(path[:-1])
        if len(paths) == 4:
            return paths
    raise NetworkError(f"path construction failed for cell {cell} (key {key})")


def build_geological_network(k_max: int, seed: int, bias: float = PATH_BIAS) -> InterfaceNetwork:
    """Seeded random crystal-like network with levels ``1..k_max``.

    Level j consists of lattice paths in the mesh T^(j), obtained by
    ``3 + j`` uniform refinements of the base mesh.  A newly created cell with
    center (c1, c2) is refined on the next level with probability
    ``(1 - min(c1, c2))**2``, the upper tail of the density 2 (1 - xi).
    """
    if not 1 <= k_max <= MAX_LEVEL:
        raise NetworkError(f"k_max must lie in 1..{MAX_LEVEL}, got {k_max}")
    seed = int(seed)
    hier = MeshHierarchy("geological")
    denom = 3 + k_max
    levels: list = []
    native: list = []

    mesh = hier.mesh_for_scale(1)
    part = partition_from_levels([], mesh.level, 0, mesh)
    inner = part.interior_cell_of_vertex()
    centre = int(mesh.vertex_id([mesh.n // 2, mesh.n // 2]))
    active = {0: centre}

    for j in range(1, k_max + 1):
        edges = []
        for idx, (cell, centre) in enumerate(sorted(active.items())):
            paths = _split_cell(mesh, part, inner, cell, centre, seed, (j, idx, 1), bias)
            if paths is None:
                continue
            for path in paths:
                p = mesh.ij[np.array(path)]
                edges.append(np.concatenate([p[:-1], p[1:]], axis=1))
        seg = _unique_edges(np.concatenate(edges)) if edges else np.zeros((0, 4), dtype=np.int64)
        native.append((mesh.level, seg))
        levels.append(seg * (1 << (denom - mesh.level)))
        log.debug("geological level %d: %d cells split, %d edges", j, len(active), len(seg))
        if j == k_max:
            break

        finer = hier.mesh_for_scale(j + 1)
        new_part = partition_from_levels(levels, denom, j, finer)
        new_inner = new_part.interior_cell_of_vertex()
        parent_cell = part.cell_of_triangle[finer.parent]
        fresh = np.unique(new_part.cell_of_triangle[np.isin(parent_cell, list(active))])
        next_active = {}
        for idx, c in enumerate(fresh):
            cv = cell_center(new_part, int(c), new_inner)
            if cv < 0:
                continue
            m = float(min(finer.points[cv]))
            if _rng(seed, j, int(c), 0).random() < (1.0 - m) ** 2:
                next_active[int(c)] = cv
        mesh, part, inner, active = finer, new_part, new_inner, next_active

    return InterfaceNetwork("geological", levels, denom_exp=denom, seed=seed)


# ---------------------------------------------------------------------------
# constants


def estimate_Cj(network: InterfaceNetwork, j: int, n_lines: int, seed: int = 0,
                chunk: int = 256) -> float:
    """Largest number of crossings of a random chord with Gamma_j.

    Chord endpoints are uniform on the boundary of the unit square.  The
    chords are drawn from one stream, so a larger ``n_lines`` extends the
    sample and the estimate never decreases.
    """
    if n_lines < 1:
        raise ValueError("n_lines must be >= 1")
    seg = network.points_float(j)
    if len(seg) == 0:
        return 0.0
    u = _rng(seed, 7919, j).random((n_lines, 2))
    ends = boundary_points(4.0 * u)
    best = 0
    a, b = seg[:, :2], seg[:, 2:]
    for s in range(0, n_lines, chunk):
        p = ends[s : s + chunk, 0][:, None, :]
        q = ends[s : s + chunk, 1][:, None, :]
        best = max(best, int(count_crossings(p, q, a, b).max()))
    return float(best)


def boundary_points(t: np.ndarray) -> np.ndarray:
    """Map perimeter parameters in [0, 4) to points on the unit square boundary."""
    t = np.asarray(t, dtype=float)
    side = np.floor(t).astype(int) % 4
    s = t - np.floor(t)
    x = np.choose(side, [s, np.ones_like(s), 1.0 - s, np.zeros_like(s)])
    y = np.choose(side, [np.zeros_like(s), s, np.ones_like(s), 1.0 - s])
    return np.stack([x, y], axis=-1)


def count_crossings(p, q, a, b) -> np.ndarray:
    """Number of proper crossings of chords p-q with segments a-b (broadcast)."""

    def cross(o, u, v):
        return (u[..., 0] - o[..., 0]) * (v[..., 1] - o[..., 1]) - (u[..., 1] - o[..., 1]) * (v[..., 0] - o[..., 0])

    d1 = cross(p, q, a)
    d2 = cross(p, q, b)
    d3 = cross(a, b, p)
    d4 = cross(a, b, q)
    return np.sum((d1 * d2 < 0) & (d3 * d4 < 0), axis=-1)


@dataclass
class NetworkConstants:
    """Geometric constants of a network; arrays are indexed by level (index 0 unused)."""

    c_frak: float
    C: np.ndarray
    d: np.ndarray
    r: np.ndarray
    kind: str = "localized"
    notes: dict = field(default_factory=dict)

    @property
    def k_max(self) -> int:
        return len(self.C) - 1

    @property
    def jump_weights(self) -> np.ndarray:
        j = np.arange(len(self.C))
        w = (1.0 + self.c_frak) ** j * self.C
        w[0] = 0.0
        return w

    def weight(self, j: int) -> float:
        return float((1.0 + self.c_frak) ** j * self.C[j])

    def smallcl(self, k: int) -> bool:
        """r_k (1 + c)^-k <= d_k."""
        return bool(self.r[k] * (1.0 + self.c_frak) ** (-k) <= self.d[k])

    def qdec_values(self) -> np.ndarray:
        """d_k * sum_{l<=k} (1 + c)^l C_l for k = 1..k_max."""
        partial = np.cumsum(self.jump_weights)[1:]
        return self.d[1:] * partial

    def qdec(self, C_gamma: float) -> bool:
        return bool(np.all(self.qdec_values() <= C_gamma))


def localized_C(j: int, formula: str = "experiment") -> float:
    if formula == "experiment":
        return float(2**j)
    if formula == "analysis":
        return float(2**j + 2 ** (j - 1) - 2)
    raise ValueError(f"unknown C_k formula {formula!r}")


def constants_for(network: InterfaceNetwork, c_frak: float, k_max: int | None = None, *,
                  C_formula: str = "experiment", n_lines: int = 2000, seed: int = 0) -> NetworkConstants:
    """Jump-weight constants and cell sizes for levels ``1..k_max``."""
    if c_frak <= 0:
        raise ValueError("material constant must be positive")
    k_max = network.k_max if k_max is None else k_max
    if k_max > network.k_max:
        raise NetworkError("constants requested beyond the stored depth")
    ks = np.arange(k_max + 1)
    if network.kind == "localized":
        C = np.array([np.nan] + [localized_C(j, C_formula) for j in ks[1:]])
        d = np.sqrt(2.0) * 4.0 ** (-ks.astype(float))
        r = 2.0 ** (1.0 - ks.astype(float))
        d[0] = r[0] = np.nan
        return NetworkConstants(c_frak, C, d, r, kind="localized", notes={"C_formula": C_formula})

    C = np.array([np.nan] + [estimate_Cj(network, int(j), n_lines, seed) for j in ks[1:]])
    d = np.full(k_max + 1, np.nan)
    hier = network.hierarchy()
    for k in ks[1:]:
        part = extract_cells(network, int(k), hier.mesh_for_scale(int(k)))
        if k < network.k_max:
            d[k] = part.diameter_bound
        else:
            # cells created on the last stored level are the next refinement candidates
            prev = extract_cells(network, int(k) - 1, part.mesh)
            created = np.unique(part.cell_of_triangle[~prev.invariant[prev.cell_of_triangle]])
            d[k] = float(part.diameters[created].max()) if len(created) else 0.0
    r = np.full(k_max + 1, np.nan)
    return NetworkConstants(c_frak, C, d, r, kind="geological",
                            notes={"n_lines": n_lines, "chord_seed": seed})


# ---------------------------------------------------------------------------
# serialization


def write_network(network: InterfaceNetwork, path) -> None:
    """Write one edge per line as ``j x1 y1 x2 y2`` with exact rational coordinates."""
    q = 2**network.denom_exp
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# fraclod interface network\n")
        fh.write(f"# kind {network.kind}\n")
        fh.write(f"# seed {network.seed if network.seed is not None else '-'}\n")
        fh.write(f"# k_max {network.k_max}\n")
        fh.write(f"# denom_exp {network.denom_exp}\n")
        for j, seg in enumerate(network.levels, start=1):
            for row in seg:
                coords = " ".join(_frac(int(v), q) for v in row)
                fh.write(f"{j} {coords}\n")


def _frac(p: int, q: int) -> str:
    f = Fraction(p, q)
    return f"{f.numerator}/{f.denominator}"


def read_network(path) -> InterfaceNetwork:
    header = {}
    rows: dict[int, list] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2:
                    header[parts[0]] = parts[1]
                continue
            j, *coords = line.split()
            rows.setdefault(int(j), []).append([Fraction(c) for c in coords])
    denom = int(header["denom_exp"])
    k_max = int(header["k_max"])
    q = 2**denom
    levels = []
    for j in range(1, k_max + 1):
        data = rows.get(j, [])
        arr = np.array([[int(c * q) for c in r] for r in data], dtype=np.int64).reshape(-1, 4)
        levels.append(arr)
    seed = None if header.get("seed", "-") == "-" else int(header["seed"])
    return InterfaceNetwork(header["kind"], levels, denom_exp=denom, seed=seed)

