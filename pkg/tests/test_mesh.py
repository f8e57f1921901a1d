import numpy as np
import pytest
from hypothesis import given, strategies as st

from fraclod.mesh import MeshHierarchy, base_mesh, refine_uniform


def test_base_mesh_counts():
    m = base_mesh()
    assert (m.n_vertices, m.n_edges, m.n_triangles) == (4, 5, 2)
    assert m.boundary_vertices().all()


def test_one_refinement_counts():
    m = refine_uniform(base_mesh())
    assert (m.n_vertices, m.n_edges, m.n_triangles) == (9, 16, 8)
    assert m.boundary_vertices().sum() == 8


@given(st.integers(min_value=0, max_value=6))
def test_refined_mesh_invariants(level):
    m = MeshHierarchy().level(level)
    n = 2**level
    assert m.n_vertices == (n + 1) ** 2
    assert m.n_triangles == 2 * n * n
    assert m.n_vertices - m.n_edges + m.n_triangles == 1
    twice = m.twice_areas_lattice()
    assert np.all(twice == 1)
    assert np.isclose(m.areas().sum(), 1.0, rtol=0, atol=1e-14)
    # every interior edge has two triangles, boundary edges one
    interior = m.edge_tris[:, 1] >= 0
    assert interior.sum() + m.boundary_edges().sum() == m.n_edges
    assert m.boundary_edges().sum() == 4 * n


def test_parent_and_ancestors():
    h = MeshHierarchy()
    fine = h.level(3)
    anc = h.ancestors(3, 1)
    coarse = h.level(1)
    c_f = fine.points[fine.triangles].mean(axis=1)
    c_c = coarse.points[coarse.triangles]
    # centroid of each fine triangle lies inside its ancestor (barycentric test)
    a, b, c = c_c[anc, 0], c_c[anc, 1], c_c[anc, 2]
    m = np.stack([b - a, c - a], axis=2)
    lam = np.linalg.solve(m, (c_f - a)[..., None])[..., 0]
    assert np.all(lam >= -1e-12) and np.all(lam.sum(axis=1) <= 1 + 1e-12)
    with pytest.raises(ValueError):
        h.ancestors(1, 3)


@given(st.floats(0.01, 7.99), st.floats(0.01, 7.99))
def test_locate_returns_containing_triangle(x, y):
    m = MeshHierarchy().level(3)
    t = m.locate([[x, y]])[0]
    p = m.ij[m.triangles[t]].astype(float)
    mat = np.stack([p[1] - p[0], p[2] - p[0]], axis=1)
    lam = np.linalg.solve(mat, np.array([x, y]) - p[0])
    assert lam.min() >= -1e-9 and lam.sum() <= 1 + 1e-9


def test_scale_to_mesh_maps():
    assert [MeshHierarchy("localized").scale_to_mesh(k) for k in range(4)] == [0, 2, 4, 6]
    assert [MeshHierarchy("geological").scale_to_mesh(k) for k in range(4)] == [0, 4, 5, 6]
    assert MeshHierarchy().h(1) == pytest.approx(np.sqrt(2) / 4)
    with pytest.raises(ValueError):
        MeshHierarchy("other")
    with pytest.raises(ValueError):
        MeshHierarchy().scale_to_mesh(-1)


def test_segment_edges_cover_segment():
    m = MeshHierarchy().level(2)
    eid, _ = m.segment_edges(np.array([[0, 2, 4, 2]]), 2)
    assert len(eid) == 4
    lengths = m.edge_lengths()[eid]
    assert lengths.sum() == pytest.approx(1.0)
