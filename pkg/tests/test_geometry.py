import numpy as np
import pytest
from hypothesis import given, strategies as st

from fraclod.geometry import (NetworkError, boundary_points, build_geological_network, build_localized_network,
                              constants_for, count_crossings, estimate_Cj, extract_cells, localized_C, read_network,
                              subdivide, write_network)


def _maximal_segments(edges):
    """Merge collinear, touching unit edges into maximal segments (test helper)."""
    segs = set()
    horiz = edges[edges[:, 1] == edges[:, 3]]
    vert = edges[edges[:, 0] == edges[:, 2]]
    for arr, fixed, lo, hi in ((horiz, 1, 0, 2), (vert, 0, 1, 3)):
        for c in np.unique(arr[:, fixed]):
            run = sorted((min(r[lo], r[hi]), max(r[lo], r[hi])) for r in arr[arr[:, fixed] == c])
            start, end = run[0]
            for a, b in run[1:]:
                if a == end:
                    end = b
                else:
                    segs.add((fixed, c, start, end))
                    start, end = a, b
            segs.add((fixed, c, start, end))
    return segs


def test_localized_level_one_has_four_segments():
    net = build_localized_network(1)
    assert len(_maximal_segments(net.level_edges(1))) == 4


def test_localized_cell_counts_and_sizes(loc_net):
    hier = loc_net.hierarchy()
    counts = [extract_cells(loc_net, k, hier.mesh_for_scale(k)).n_cells for k in range(1, 5)]
    assert counts == [6, 21, 66, 201]
    c = constants_for(loc_net, 1.0)
    assert c.d[1:4] == pytest.approx([0.35355339, 0.08838835, 0.02209709])
    assert c.C[1:5].tolist() == [2.0, 4.0, 8.0, 16.0]


def test_localized_neighbor_counts(loc_net):
    hier = loc_net.hierarchy()
    nb = [extract_cells(loc_net, k, hier.mesh_for_scale(k)).max_neighbors() for k in range(1, 5)]
    # measured: neighbor counts grow with k
    assert nb == [4, 8, 14, 22]


def test_localized_levels_are_disjoint(loc_net):
    seen = set()
    for j in range(1, loc_net.k_max + 1):
        rows = {tuple(r) for r in loc_net.level_edges(j)}
        assert not rows & seen
        seen |= rows


def test_network_depth_limits():
    with pytest.raises(NetworkError):
        build_localized_network(0)
    with pytest.raises(NetworkError):
        build_localized_network(7)
    net = build_localized_network(2)
    with pytest.raises(NetworkError):
        net.level_edges(3)
    with pytest.raises(NetworkError):
        constants_for(net, 1.0, k_max=3)
    with pytest.raises(ValueError):
        constants_for(net, 0.0)


def test_geological_is_deterministic(geo_net):
    again = build_geological_network(4, seed=0)
    assert again.digest() == geo_net.digest()
    assert [len(l) for l in geo_net.levels] == [33, 33, 96, 288]
    other = build_geological_network(2, seed=3)
    assert other.digest() != build_geological_network(2, seed=0).digest()


def test_geological_cells_nested(geo_net):
    hier = geo_net.hierarchy()
    mesh = hier.mesh_for_scale(4)
    parts = [extract_cells(geo_net, k, mesh) for k in range(1, 5)]
    for coarse, fine in zip(parts, parts[1:]):
        # every fine cell lies in exactly one coarse cell
        pairs = np.unique(np.stack([fine.cell_of_triangle, coarse.cell_of_triangle], axis=1), axis=0)
        assert len(np.unique(pairs[:, 0])) == len(pairs)
        assert fine.n_cells >= coarse.n_cells


@pytest.mark.parametrize("kind", ["localized", "geological"])
def test_serialization_round_trip(tmp_path, kind, loc_net, geo_net):
    net = loc_net if kind == "localized" else geo_net
    path = tmp_path / "net.txt"
    write_network(net, path)
    back = read_network(path)
    assert back.digest() == net.digest()
    assert back.kind == kind


def test_subdivide_preserves_length():
    seg = np.array([[0, 0, 0, 2], [1, 1, 2, 1]])
    out = subdivide(seg, 4)
    assert len(out) == 12
    assert np.abs(out[:, 2:] - out[:, :2]).sum() == 12


def test_count_crossings_known_cases():
    a = np.array([[0.5, 0.0], [0.0, 0.25]])
    b = np.array([[0.5, 1.0], [1.0, 0.25]])
    chords = np.array([[[0.0, 0.5], [1.0, 0.5]],
                       [[0.2, 0.0], [0.2, 1.0]],
                       [[0.0, 0.0], [1.0, 1.0]],
                       [[0.6, 0.0], [1.0, 0.2]]])
    got = count_crossings(chords[:, 0][:, None], chords[:, 1][:, None], a, b)
    assert got.tolist() == [1, 1, 2, 0]


@given(st.floats(0, 3.999))
def test_boundary_points_on_square(t):
    x, y = boundary_points(np.array([t]))[0]
    assert min(x, y) >= 0 and max(x, y) <= 1
    assert min(x, y, 1 - x, 1 - y) == pytest.approx(0.0, abs=1e-12)


def test_chord_estimate_monotone_in_lines(geo_net):
    small = estimate_Cj(geo_net, 3, 100)
    large = estimate_Cj(geo_net, 3, 1000)
    assert 1 <= small <= large
    with pytest.raises(ValueError):
        estimate_Cj(geo_net, 3, 0)


def test_constants_weights_and_predicates(loc_net):
    c = constants_for(loc_net, 1.0)
    assert c.weight(3) == pytest.approx(2**3 * 8)
    assert c.jump_weights[0] == 0.0
    assert localized_C(3, "analysis") == 10.0
    with pytest.raises(ValueError):
        localized_C(1, "other")
    q = c.qdec_values()
    assert q[0] == pytest.approx(np.sqrt(2) / 4 * 4)
    assert c.qdec(q.max()) and not c.qdec(q.max() * 0.99)
    # r_k (1+c)^-k = 2^(1-2k) against d_k = sqrt(2) 4^-k: fails for c = 1
    assert not any(c.smallcl(k) for k in range(1, 5))
    assert constants_for(loc_net, 3.0).smallcl(1)
