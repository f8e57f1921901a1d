import numpy as np
import pytest
from hypothesis import given, strategies as st
from helpers import localized_problem

from fraclod.femspace import build_prolongation, jump_values, prolongation_ext


def test_dof_counts(loc):
    counts = [loc.discretization(k).n_dofs for k in (1, 2, 3)]
    assert counts == [18, 301, 4374]


def test_cell_ranges_are_contiguous(loc):
    space = loc.discretization(2).space
    for c in range(space.partition.n_cells):
        dofs = space.cell_dofs(c)
        assert np.all(space.dof_cell[dofs] == c)
        assert np.all(np.diff(dofs) == 1)
    assert space.cell_start[-1] == space.n_dofs


def test_ext_round_trip(loc, rng):
    space = loc.discretization(2).space
    v = rng.standard_normal(space.n_dofs)
    x = space.to_ext(v)
    assert np.all(x[space.ext_to_dof < 0] == 0)
    assert np.array_equal(space.from_ext(x), v)
    assert np.allclose(space.embed() @ v, x)


def test_interface_pairs_orientation(loc):
    pairs = loc.discretization(2).space.interface
    assert len(pairs) > 0
    assert np.all(pairs.minus_cell != pairs.plus_cell)
    assert set(np.unique(pairs.level)) == {1, 2}


def test_jumps_vanish_for_continuous_interpolants(loc):
    space = loc.discretization(3).space
    v = space.interpolate(lambda xy: np.cos(xy[:, 0]) * xy[:, 1])
    assert np.abs(jump_values(space, v)).max() == 0.0


def test_jump_of_cell_indicator(loc):
    space = loc.discretization(1).space
    c = 0
    v = (space.dof_cell == c).astype(float)
    jv = jump_values(space, v)
    on = (space.interface.minus_cell == c) | (space.interface.plus_cell == c)
    assert np.all(jv[~on] == 0)
    # sign: +1 when c is the minus side would give -1 jumps
    signs = np.where(space.interface.minus_cell[on] == c, -1.0, 1.0)
    nz = jv[on] != 0
    assert np.all(np.sign(jv[on][nz]) == np.repeat(signs[:, None], 2, axis=1)[nz])


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
def test_prolongation_reproduces_linear_functions(a, b, c):
    prob = localized_problem()
    f = lambda xy: a + b * xy[:, 0] + c * xy[:, 1]  # noqa: E731
    coarse, fine = prob.discretization(1).space, prob.discretization(3).space
    P = build_prolongation(coarse, fine, prob.hierarchy)
    pe = prolongation_ext(coarse, fine, prob.hierarchy)
    xc = f(coarse.mesh.points[coarse.ext_vertex])
    xf = f(fine.mesh.points[fine.ext_vertex])
    assert np.allclose(pe @ xc, xf, atol=1e-13)
    assert P.matrix.shape == (fine.n_dofs, coarse.n_dofs)


def test_prolongation_rejects_wrong_order(loc):
    with pytest.raises(ValueError):
        build_prolongation(loc.discretization(2).space, loc.discretization(1).space, loc.hierarchy)


def test_prolongation_rows_sum_to_one_inside(loc):
    P = loc.prolongation(1, 2)
    fine = loc.discretization(2).space
    pe = prolongation_ext(loc.discretization(1).space, fine, loc.hierarchy)
    assert np.allclose(np.asarray(pe.sum(axis=1)).ravel(), 1.0)
    assert P.nnz > 0
