import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, strategies as st

import fraclod.linsolve as ls
from fraclod.linsolve import BlockFactor, SaddleSolver, cg_solve, constrained_solve, independent_rows


def _spd(n, seed):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n, n))
    return B @ B.T + n * np.eye(n)


def _kkt(A, C, b, d):
    m = C.shape[0]
    K = np.block([[A, C.T], [C, np.zeros((m, m))]])
    return np.linalg.solve(K, np.concatenate([b, d]))


@given(st.integers(2, 40), st.integers(0, 10**6))
def test_cg_matches_dense(n, seed):
    A = _spd(n, seed)
    b = np.random.default_rng(seed + 1).standard_normal(n)
    x, rep = cg_solve(sp.csr_matrix(A), b, tol=1e-13)
    assert rep.converged
    assert np.allclose(x, np.linalg.solve(A, b), rtol=0, atol=1e-9 * np.abs(np.linalg.solve(A, b)).max())


def test_cg_zero_rhs_and_bad_tol():
    A = sp.identity(3, format="csr")
    x, rep = cg_solve(A, np.zeros(3))
    assert np.all(x == 0) and rep.iterations == 0
    with pytest.raises(ValueError):
        cg_solve(A, np.ones(3), tol=0)


def test_cg_reports_nonconvergence():
    A = sp.csr_matrix(_spd(50, 3))
    _, rep = cg_solve(A, np.ones(50), tol=1e-14, max_iter=2, precondition=False)
    assert not rep.converged


@given(st.integers(4, 30), st.integers(1, 3), st.integers(0, 10**6))
def test_saddle_matches_dense_kkt(n, m, seed):
    rng = np.random.default_rng(seed)
    A = _spd(n, seed)
    C = rng.standard_normal((m, n))
    b, d = rng.standard_normal(n), rng.standard_normal(m)
    x = SaddleSolver(A, C).solve(b, d)
    ref = _kkt(A, C, b, d)[:n]
    assert np.allclose(x, ref, atol=1e-9 * max(1.0, np.abs(ref).max()))


def test_saddle_schur_path_and_multiple_rhs(monkeypatch):
    monkeypatch.setattr(ls, "DIRECT_LIMIT", 5)
    rng = np.random.default_rng(0)
    A, C = _spd(20, 1), rng.standard_normal((3, 20))
    S = SaddleSolver(A, C)
    assert S._mode == "schur"
    B = rng.standard_normal((20, 4))
    X, lam = S.solve(B, return_multiplier=True)
    for j in range(4):
        ref = _kkt(A, C, B[:, j], np.zeros(3))
        assert np.allclose(X[:, j], ref[:20], atol=1e-9)
        assert np.allclose(lam[:, j], ref[20:], atol=1e-9)


def test_dependent_constraints_are_removed():
    rng = np.random.default_rng(2)
    A = _spd(10, 2)
    c = rng.standard_normal(10)
    C = np.stack([c, 2 * c, rng.standard_normal(10)])
    assert independent_rows(C).tolist() == [0, 2] or len(independent_rows(C)) == 2
    x = SaddleSolver(A, C).solve(rng.standard_normal(10))
    assert np.abs(C @ x).max() < 1e-10
    assert len(independent_rows(np.zeros((2, 3)))) == 0


def test_constrained_solve_without_constraints():
    A = _spd(6, 4)
    b = np.arange(6.0)
    assert np.allclose(constrained_solve(A, None, b), np.linalg.solve(A, b))
    with pytest.raises(ValueError):
        SaddleSolver(A, np.ones((1, 5)))


@pytest.mark.parametrize("n", [10, 500])
def test_block_factor_paths(n):
    A = sp.diags([-1.0, 2.5, -1.0], [-1, 0, 1], shape=(n, n)).tocsr()
    f = BlockFactor(A)
    b = np.linspace(0, 1, n)
    assert np.allclose(A @ f.solve(b), b)
    assert (f._lu is None) == (n <= BlockFactor.DENSE_LIMIT)
