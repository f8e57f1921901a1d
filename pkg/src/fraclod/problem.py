"""Discretizations of the interface problem on a given network."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .assembly import Coefficients, assemble_load, assemble_mass, assemble_operator
from .femspace import BrokenSpace, build_broken_space, build_prolongation
from .geometry import InterfaceNetwork, NetworkConstants, extract_cells
from .linsolve import SolveReport, cg_solve
from .mesh import MeshHierarchy

log = logging.getLogger(__name__)


@dataclass(eq=False)
class Discretization:
    """Space, operator and load vector at one scale k."""

    scale: int
    space: BrokenSpace
    op: sp.csr_matrix
    load: np.ndarray
    _mass: sp.csr_matrix | None = None

    @property
    def n_dofs(self) -> int:
        return self.space.n_dofs

    @property
    def mass(self) -> sp.csr_matrix:
        if self._mass is None:
            self._mass = assemble_mass(self.space)
        return self._mass

    def norm(self, v) -> float:
        return float(np.sqrt(max(v @ (self.op @ v), 0.0)))

    def l2(self, v) -> float:
        return float(np.sqrt(max(v @ (self.mass @ v), 0.0)))


@dataclass(eq=False)
class Problem:
    """Network, constants and coefficients with cached discretizations."""

    network: InterfaceNetwork
    constants: NetworkConstants
    coeff: Coefficients = field(default_factory=Coefficients)
    hierarchy: MeshHierarchy | None = None
    timings: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.hierarchy is None:
            self.hierarchy = self.network.hierarchy()
        self._disc: dict = {}
        self._prol: dict = {}
        self._ref: dict = {}

    def _tick(self, key, t0):
        self.timings[key] = self.timings.get(key, 0.0) + time.perf_counter() - t0

    def discretization(self, k: int) -> Discretization:
        if k not in self._disc:
            if k > self.constants.k_max and k > 0:
                raise ValueError(f"scale {k} exceeds the constants' depth {self.constants.k_max}")
            t0 = time.perf_counter()
            mesh = self.hierarchy.mesh_for_scale(k)
            self._tick("mesh", t0)
            t0 = time.perf_counter()
            part = extract_cells(self.network, k, mesh)
            self._tick("geometry", t0)
            t0 = time.perf_counter()
            space = build_broken_space(mesh, part)
            op = assemble_operator(space, self.constants, self.coeff)
            load = assemble_load(space, self.coeff.f)
            self._tick("assembly", t0)
            log.info("scale %d: %d cells, %d dofs", k, part.n_cells, space.n_dofs)
            self._disc[k] = Discretization(k, space, op, load)
        return self._disc[k]

    def prolongation(self, k: int, K: int) -> sp.csr_matrix:
        if (k, K) not in self._prol:
            P = build_prolongation(self.discretization(k).space, self.discretization(K).space, self.hierarchy)
            self._prol[(k, K)] = P.matrix
        return self._prol[(k, K)]

    def reference(self, k: int, tol: float = 1e-12) -> tuple[np.ndarray, SolveReport]:
        """Discrete solution at scale k by preconditioned CG."""
        if k not in self._ref:
            d = self.discretization(k)
            t0 = time.perf_counter()
            u, rep = cg_solve(d.op, d.load, tol=tol)
            self._tick("reference", t0)
            if not rep.converged:
                log.warning("reference solve at scale %d stopped at residual %.2e", k, rep.relative_residual)
            self._ref[k] = (u, rep)
        return self._ref[k]

    def set_reference(self, k: int, u: np.ndarray, rep: SolveReport) -> None:
        self._ref[k] = (u, rep)
