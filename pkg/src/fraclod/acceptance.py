"""Evaluators for the acceptance criteria.

Each ``criterion_*`` function computes the measured quantities, compares
them with the stated targets at the stated tolerances and returns a
:class:`CriterionResult`.  Nothing is tuned here: failures are reported
as failures together with the measured values.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from .assembly import assemble_jump
from .geometry import build_geological_network, build_localized_network, constants_for
from .harness import SHIPPED_SEED
from .lod import LocalizedOD, ms_galerkin_solve
from .linsolve import SaddleSolver, cg_solve
from .problem import Problem
from .projections import ProjectionStack
from .twolevel import TwoLevelConfig, TwoLevelSolver, run_two_level

log = logging.getLogger(__name__)

TABLE1_RHO = {2: 0.222, 3: 0.259, 4: 0.264, 5: 0.264}
TABLE1_ASYM = {2: 0.224, 3: 0.261, 4: 0.266, 5: 0.266}
RHO_TOL, ASYM_TOL = 0.03, 0.02
STOP_LOCALIZED, STOP_GEOLOGICAL = 3, 5
LOCALIZED_STOP_K, GEOLOGICAL_STOP_K = 3, 5


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    measured: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)  # (label, ok, detail)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        failed = [c[0] for c in self.checks if not c[1]]
        tail = f" (failed: {', '.join(failed)})" if failed else ""
        return f"[{tag}] criterion {self.number}: {self.title}{tail}"

    def report(self) -> str:
        lines = [self.line()]
        for label, ok, detail in self.checks:
            lines.append(f"    {'ok ' if ok else 'BAD'} {label}: {detail}")
        return "\n".join(lines)


def _result(number, title, checks, measured) -> CriterionResult:
    return CriterionResult(number, title, all(c[1] for c in checks), measured, checks)


class Context:
    """Problems shared between criteria within one process."""

    def __init__(self, geological_seed: int = SHIPPED_SEED):
        self.seed = geological_seed
        self._loc = None
        self._geo = None
        self._reports: dict = {}

    @property
    def localized(self) -> Problem:
        if self._loc is None:
            net = build_localized_network(5)
            self._loc = Problem(net, constants_for(net, 1.0))
        return self._loc

    @property
    def geological(self) -> Problem:
        if self._geo is None:
            net = build_geological_network(6, self.seed)
            self._geo = Problem(net, constants_for(net, 1.0))
        return self._geo

    def report(self, kind: str, K: int, stopping: bool = False):
        key = (kind, K)
        rep = self._reports.get(key)
        if rep is None or (stopping and rep.stopping_index is None):
            prob = self.localized if kind == "localized" else self.geological
            rep = run_two_level(prob, TwoLevelConfig(K), with_stopping=stopping)
            self._reports[key] = rep
        return rep


_CTX: Context | None = None


def context() -> Context:
    global _CTX
    if _CTX is None:
        _CTX = Context()
    return _CTX


# -- 1 ----------------------------------------------------------------------------------

def criterion_1(ctx: Context | None = None, include_k5: bool | None = None) -> CriterionResult:
    ctx = ctx or context()
    if include_k5 is None:
        include_k5 = os.environ.get("FRACLOD_ACCEPT_K5", "") == "1"
    Ks = [2, 3, 4] + ([5] if include_k5 else [])
    checks, measured = [], {}
    for K in Ks:
        rep = ctx.report("localized", K)
        rho, asym = rep.geometric_mean, rep.asymptotic_factor()
        measured[K] = {"rho": rho, "asymptotic": asym, "factors": rep.factors.tolist()}
        checks.append((f"rho_{K}", abs(rho - TABLE1_RHO[K]) <= RHO_TOL,
                       f"{rho:.4f} vs {TABLE1_RHO[K]:.3f} +- {RHO_TOL}"))
        checks.append((f"asym_{K}", abs(asym - TABLE1_ASYM[K]) <= ASYM_TOL,
                       f"{asym:.4f} vs {TABLE1_ASYM[K]:.3f} +- {ASYM_TOL}"))
    return _result(1, "localized two-level rates", checks, measured)


# -- 2 ----------------------------------------------------------------------------------

def criterion_2(ctx: Context | None = None) -> CriterionResult:
    ctx = ctx or context()
    checks, measured = [], {}
    for kind, K, target in (("localized", LOCALIZED_STOP_K, STOP_LOCALIZED),
                            ("geological", GEOLOGICAL_STOP_K, STOP_GEOLOGICAL)):
        rep = ctx.report(kind, K, stopping=True)
        measured[kind] = {"K": K, "index": rep.stopping_index, "threshold": rep.threshold,
                          "errors": rep.errors.tolist()}
        ok = rep.stopping_index >= 0 and abs(rep.stopping_index - target) <= 1
        checks.append((f"{kind} K={K}", ok, f"index {rep.stopping_index} vs {target} +- 1 "
                                             f"(threshold {rep.threshold:.3e})"))
    return _result(2, "stopping index", checks, measured)


# -- 3 ----------------------------------------------------------------------------------

def criterion_3(ctx: Context | None = None) -> CriterionResult:
    ctx = ctx or context()
    Ks = [2, 3, 4, 5, 6]
    rho = {K: ctx.report("geological", K).geometric_mean for K in Ks}
    vals = [rho[K] for K in Ks]
    checks = [(f"rho_{K} in (0.60, 0.87)", 0.60 < rho[K] < 0.87, f"{rho[K]:.4f}") for K in Ks]
    checks.append(("monotone", all(b > a for a, b in zip(vals, vals[1:])), " ".join(f"{v:.4f}" for v in vals)))
    checks.append(("saturation", rho[6] - rho[5] <= 0.01, f"rho_6 - rho_5 = {rho[6] - rho[5]:.4f}"))
    return _result(3, f"geological rates (seed {ctx.seed})", checks, {"rho": rho})


# -- 4 ----------------------------------------------------------------------------------

def projection_checks(prob: Problem, K: int, k: int, n_vectors: int = 100, seed: int = 0) -> dict:
    stack = ProjectionStack(prob, k, K)
    rng = np.random.default_rng(seed)
    idem = mean = semi = 0.0
    for _ in range(n_vectors):
        v = rng.standard_normal(stack.fine.n_dofs)
        ve = stack.fine.to_ext(v)
        x = stack.apply_pi_Hk_ext(ve)
        idem = max(idem, float(np.abs(stack.apply_pi_Hk_ext(x) - x).max()))
        mean = max(mean, float(np.abs(stack.cell_means(x) - stack.cell_means(ve)).max()))
        s0, s1 = stack.cell_seminorms(ve), stack.cell_seminorms(x)
        semi = max(semi, float(np.max(s1 / np.maximum(s0, 1e-300))))
    Pi = stack.pi_k_matrix().tocoo()
    owner = stack.dof_coarse_cell
    local = bool(np.all(owner[Pi.col] == stack.coarse.dof_cell[Pi.row]))
    return {"idempotency": idem, "mean": mean, "seminorm_ratio": semi, "local": local}


def criterion_4(ctx: Context | None = None, n_vectors: int = 100) -> CriterionResult:
    ctx = ctx or context()
    checks, measured = [], {}
    for K, k in ((2, 1), (3, 1), (3, 2)):
        m = projection_checks(ctx.localized, K, k, n_vectors)
        measured[f"{K},{k}"] = m
        checks += [(f"({K},{k}) idempotency", m["idempotency"] <= 1e-10, f"{m['idempotency']:.2e}"),
                   (f"({K},{k}) means", m["mean"] <= 1e-10, f"{m['mean']:.2e}"),
                   (f"({K},{k}) seminorm", m["seminorm_ratio"] <= 1 + 1e-10, f"{m['seminorm_ratio']:.12f}"),
                   (f"({K},{k}) locality", m["local"], str(m["local"]))]
    return _result(4, "projection suite", checks, measured)


# -- 5 ----------------------------------------------------------------------------------

def lod_measurements(prob: Problem, K: int = 3, k_list=(1, 2), nu_max: int = 8) -> dict:
    fine = prob.discretization(K)
    u, _ = prob.reference(K)
    out = {}
    for k in k_list:
        lod = LocalizedOD(prob, k, K)
        basis = lod.ideal_basis()
        _, uk = ms_galerkin_solve(basis, lod.A, fine.load, deflate=True)
        Cu = lod.ideal_corrector_apply(u)
        identity = fine.norm(u - uk - Cu) / fine.norm(u)
        lam = lod.hats()
        C_ideal = lam - basis.columns
        errs = []
        support_ok = True
        rich = lod.richardson_correctors(nu_max, track_support=True)
        home = [{int(c)} for c in lod.stack.coarse.dof_cell]
        c = np.zeros_like(lam)
        prev = [set() for _ in home]
        for nu in range(nu_max + 1):
            if nu > 0:
                c = c + rich.omega * lod.apply_T(lod.A @ (lam - c))
                cur = rich.supports[nu - 1]
                for p, cells in enumerate(cur):
                    if not cells <= lod.layers(prev[p] | home[p], 1) or not cells <= lod.layers(home[p], nu):
                        support_ok = False
                prev = cur
            D = C_ideal - c
            errs.append(max(fine.norm(D[:, j]) for j in range(D.shape[1])))
        errs = np.array(errs)
        ratios = errs[1:] / errs[:-1]
        out[k] = {"identity": identity, "error": fine.norm(u - uk), "rank": basis.rank,
                  "corrector_errors": errs.tolist(), "q": float(np.exp(np.mean(np.log(ratios)))),
                  "q_max": float(ratios.max()), "support_ok": support_ok}
    return out


def criterion_5(ctx: Context | None = None) -> CriterionResult:
    ctx = ctx or context()
    m = lod_measurements(ctx.localized)
    ratio = m[2]["error"] / m[1]["error"]
    checks = []
    for k in (1, 2):
        checks += [(f"k={k} ideal identity", m[k]["identity"] <= 1e-8, f"{m[k]['identity']:.2e}"),
                   (f"k={k} Richardson decay", m[k]["q"] < 1 and m[k]["q_max"] < 1,
                    f"q = {m[k]['q']:.4f}, max step ratio {m[k]['q_max']:.4f}"),
                   (f"k={k} support growth", m[k]["support_ok"], str(m[k]["support_ok"]))]
    checks.append(("error ratio k=2/k=1", 1 / 6 <= ratio <= 1 / 2.5, f"{ratio:.4f} vs [0.1667, 0.4000]"))
    m["ratio"] = ratio
    return _result(5, "LOD suite (localized, K=3)", checks, m)


# -- 6 ----------------------------------------------------------------------------------

def criterion_6(ctx: Context | None = None) -> CriterionResult:
    ctx = ctx or context()
    prob = ctx.localized
    d = prob.discretization(2)
    P = prob.prolongation(1, 2)
    solver = TwoLevelSolver(d, P)
    E = solver.error_propagation()
    u, _ = prob.reference(2)
    rng = np.random.default_rng(6)
    w = rng.standard_normal(d.n_dofs)
    sweep_err = float(np.abs((u - solver.sweep(w, d.load)) - E @ (u - w)).max() / np.abs(u - w).max())

    A = d.op.toarray()
    x_dense = la.cho_solve(la.cho_factor(A), d.load)
    x_cg, _ = cg_solve(d.op, d.load, tol=1e-13)
    cg_err = float(np.abs(x_cg - x_dense).max() / np.abs(x_dense).max())

    stack = ProjectionStack(prob, 1, 2)
    C = stack.pi_k_matrix()
    b = rng.standard_normal(d.n_dofs)
    x_s = SaddleSolver(d.op, C).solve(b)
    Cd = C.toarray()
    m = Cd.shape[0]
    KKT = np.block([[A, Cd.T], [Cd, np.zeros((m, m))]])
    x_d = np.linalg.solve(KKT, np.concatenate([b, np.zeros(m)]))[: d.n_dofs]
    saddle_err = float(np.abs(x_s - x_d).max() / np.abs(x_d).max())

    checks = [("sweep vs dense propagation", sweep_err <= 1e-12, f"{sweep_err:.2e}"),
              ("CG vs dense Cholesky", cg_err <= 1e-9, f"{cg_err:.2e}"),
              ("constrained vs dense KKT", saddle_err <= 1e-9, f"{saddle_err:.2e}")]
    return _result(6, "oracle equivalences", checks,
                   {"sweep": sweep_err, "cg": cg_err, "saddle": saddle_err})


# -- 7 ----------------------------------------------------------------------------------

def _continuous(xy):
    return xy[:, 0] * (1 - xy[:, 0]) * xy[:, 1] * (1 - xy[:, 1]) + np.sin(3 * xy[:, 0] + xy[:, 1])


def structural_checks(prob: Problem, scales) -> list:
    checks = []
    for k in scales:
        d = prob.discretization(k)
        op = d.op
        asym = abs(op - op.T).max() if op.nnz else 0.0
        checks.append((f"k={k} symmetric", asym == 0.0, f"max |G+J - (G+J)^T| = {asym:.1e}"))
        if k <= 2:
            try:
                la.cholesky(op.toarray())
                pd = True
            except la.LinAlgError:
                pd = False
            checks.append((f"k={k} Cholesky", pd, str(pd)))
        space = d.space
        v = space.interpolate(_continuous)
        J = assemble_jump(space, prob.constants)
        je = float(v @ (J @ v))
        checks.append((f"k={k} jump energy of continuous function", abs(je) <= 1e-12, f"{je:.2e}"))
        mesh = space.mesh
        euler = mesh.n_vertices - mesh.n_edges + mesh.n_triangles
        twice = mesh.twice_areas_lattice()
        area_ok = bool(np.all(twice > 0)) and int(twice.sum()) == 2 * mesh.n ** 2
        part = space.partition
        counts = np.bincount(part.cell_of_triangle, minlength=part.n_cells)
        cover = bool(np.all(counts > 0)) and int(counts.sum()) == mesh.n_triangles
        checks.append((f"k={k} Euler", euler == 1, f"V - E + T = {euler}"))
        checks.append((f"k={k} lattice area", area_ok, f"sum of twice areas = {int(twice.sum())}"))
        checks.append((f"k={k} partition", cover and abs(part.areas.sum() - 1.0) <= 1e-12,
                       f"{part.n_cells} cells, area {part.areas.sum():.15f}"))
    return checks


def criterion_7(ctx: Context | None = None) -> CriterionResult:
    ctx = ctx or context()
    checks = [("localized " + c[0], c[1], c[2]) for c in structural_checks(ctx.localized, (1, 2, 3))]
    checks += [("geological " + c[0], c[1], c[2]) for c in structural_checks(ctx.geological, (1, 2, 3))]
    return _result(7, "structural invariants", checks, {})


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
            7: criterion_7}


def run_all(numbers=None, ctx: Context | None = None) -> list:
    ctx = ctx or context()
    results = []
    for n in numbers or sorted(CRITERIA):
        results.append(CRITERIA[n](ctx))
    return results

