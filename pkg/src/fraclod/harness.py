"""Experiment configuration, cached runs, archives and rendered output.

A configuration is a small INI file (see ``presets/*.ini``).  Every run
writes its tables, CSV files, SVG renders and a JSON archive through
temp-file-then-rename, and tags each output with the config hash.
"""

from __future__ import annotations

import configparser
import csv
import hashlib
import io
import json
import logging
import math
import os
import tempfile
import time
import xml.etree.ElementTree as ET
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .assembly import Coefficients
from .femspace import build_broken_space
from .geometry import (InterfaceNetwork, NetworkConstants, build_geological_network, build_localized_network,
                       constants_for, extract_cells, read_network, write_network)
from .linsolve import SolveReport
from .problem import Problem

log = logging.getLogger(__name__)

PRESETS = ("table1", "table2", "lod-study", "projection-study")
STUDIES = ("twolevel", "lod", "projections")
SHIPPED_SEED = 0


class ConfigError(ValueError):
    pass


# -- coefficient modes ----------------------------------------------------------------

def _a_oscillating(xy):
    s = 2.0 + np.sin(32.0 * np.pi * xy[:, 0]) * np.sin(32.0 * np.pi * xy[:, 1])
    return s[:, None, None] * np.eye(2)[None]


def _b_linear(xy):
    return 1.0 + xy[:, 0]


def _f_one(xy):
    return np.ones(len(xy))


def _f_sine(xy):
    return np.sin(np.pi * xy[:, 0]) * np.sin(np.pi * xy[:, 1])


A_MODES = {"identity": None, "oscillating": _a_oscillating}
B_MODES = {"one": None, "linear": _b_linear}
F_MODES = {"one": _f_one, "sine": _f_sine}


# -- configuration --------------------------------------------------------------------

def _ints(text: str) -> list:
    text = text.strip()
    if not text:
        return []
    if ".." in text:
        a, b = text.split("..")
        return list(range(int(a), int(b) + 1))
    return [int(t) for t in text.replace(",", " ").split()]


def _nus(text: str) -> list:
    out = []
    for t in text.replace(",", " ").split():
        out.append(math.inf if t == "ideal" else int(t))
    return out


def _pairs(text: str) -> list:
    out = []
    for t in text.replace(",", " ").split():
        K, k = t.split(":")
        out.append((int(K), int(k)))
    return out


@dataclass
class ExperimentConfig:
    """Validated experiment parameters.

    Sections of the INI file: ``network`` (kind, seed, k_max), ``model``
    (c_frak, A, B, f, C_formula, chord_lines, chord_seed), ``solver``
    (reference_tol, sweeps, coarse_scale, cell_order, symmetric,
    block_scale, omega), ``study`` (kind, K_range, stopping_for, K, k_list,
    nu_list, pairs, trials, seed) and ``output`` (dir, cache).
    """

    kind: str = "localized"
    seed: int = SHIPPED_SEED
    k_max: int = 5
    c_frak: float = 1.0
    A: str = "identity"
    B: str = "one"
    f: str = "one"
    C_formula: str = "experiment"
    chord_lines: int = 2000
    chord_seed: int = 0
    reference_tol: float = 1e-12
    sweeps: int = 9
    coarse_scale: int = 1
    cell_order: str = "descending"
    symmetric: bool = False
    block_scale: int | None = None
    omega: float = 1.0 / 7.0
    study: str = "twolevel"
    K_range: list = field(default_factory=lambda: [2, 3, 4])
    stopping_for: list = field(default_factory=list)
    K: int = 3
    k_list: list = field(default_factory=lambda: [1, 2])
    nu_list: list = field(default_factory=lambda: [0, 1, 2, 4, 8, math.inf])
    pairs: list = field(default_factory=lambda: [(2, 1), (3, 1), (3, 2)])
    trials: int = 100
    study_seed: int = 0
    out: str = "runs/default"
    cache: bool = True
    name: str = "custom"

    def validate(self) -> "ExperimentConfig":
        if self.kind not in ("localized", "geological"):
            raise ConfigError(f"network.kind must be localized or geological, got {self.kind!r}")
        if not 1 <= self.k_max <= 6:
            raise ConfigError("network.k_max must lie in 1..6")
        if self.c_frak <= 0:
            raise ConfigError("model.c_frak must be positive")
        for key, modes in (("A", A_MODES), ("B", B_MODES), ("f", F_MODES)):
            if getattr(self, key) not in modes:
                raise ConfigError(f"model.{key} must be one of {sorted(modes)}")
        if self.C_formula not in ("experiment", "analysis"):
            raise ConfigError("model.C_formula must be experiment or analysis")
        if not 0 < self.reference_tol < 1:
            raise ConfigError("solver.reference_tol must lie in (0, 1)")
        if self.sweeps < 1:
            raise ConfigError("solver.sweeps must be >= 1")
        if self.cell_order not in ("ascending", "descending"):
            raise ConfigError("solver.cell_order must be ascending or descending")
        if self.omega <= 0:
            raise ConfigError("solver.omega must be positive")
        if self.study not in STUDIES:
            raise ConfigError(f"study.kind must be one of {STUDIES}")
        if self.study == "twolevel":
            if not self.K_range:
                raise ConfigError("study.K_range is empty")
            if min(self.K_range) <= self.coarse_scale:
                raise ConfigError("every K must exceed solver.coarse_scale")
            if max(self.K_range) > self.k_max:
                raise ConfigError("study.K_range exceeds network.k_max")
            for K in self.stopping_for:
                if K not in self.K_range or K + 1 > self.k_max:
                    raise ConfigError(f"stopping check at K={K} needs K in K_range and K+1 <= k_max")
        if self.study == "lod":
            if self.K > self.k_max or not self.k_list or any(not 0 < k < self.K for k in self.k_list):
                raise ConfigError("lod study needs 0 < k < K <= k_max")
        if self.study == "projections":
            if not self.pairs or any(not 0 < k < K <= self.k_max for K, k in self.pairs):
                raise ConfigError("projection pairs must satisfy 0 < k < K <= k_max")
            if self.trials < 1:
                raise ConfigError("study.trials must be >= 1")
        return self

    def canonical(self) -> dict:
        d = asdict(self)
        d.pop("out")
        d.pop("cache")
        d["nu_list"] = ["ideal" if v == math.inf else v for v in self.nu_list]
        d["pairs"] = [list(p) for p in self.pairs]
        if self.kind == "localized":
            d["seed"] = None
        return d

    def hash(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()

    def coefficients(self) -> Coefficients:
        return Coefficients(A=A_MODES[self.A], B=B_MODES[self.B], f=F_MODES[self.f], c_frak=self.c_frak,
                            f_name=self.f)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        cp["network"] = {"kind": self.kind, "seed": str(self.seed), "k_max": str(self.k_max)}
        cp["model"] = {"c_frak": repr(self.c_frak), "A": self.A, "B": self.B, "f": self.f,
                       "C_formula": self.C_formula, "chord_lines": str(self.chord_lines),
                       "chord_seed": str(self.chord_seed)}
        cp["solver"] = {"reference_tol": repr(self.reference_tol), "sweeps": str(self.sweeps),
                        "coarse_scale": str(self.coarse_scale), "cell_order": self.cell_order,
                        "symmetric": str(self.symmetric).lower(),
                        "block_scale": "" if self.block_scale is None else str(self.block_scale),
                        "omega": repr(self.omega)}
        cp["study"] = {"kind": self.study, "name": self.name,
                       "K_range": " ".join(map(str, self.K_range)),
                       "stopping_for": " ".join(map(str, self.stopping_for)), "K": str(self.K),
                       "k_list": " ".join(map(str, self.k_list)),
                       "nu_list": " ".join("ideal" if v == math.inf else str(v) for v in self.nu_list),
                       "pairs": " ".join(f"{K}:{k}" for K, k in self.pairs), "trials": str(self.trials),
                       "seed": str(self.study_seed)}
        cp["output"] = {"dir": self.out, "cache": str(self.cache).lower()}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


_SECTIONS = {
    "network": {"kind": str, "seed": int, "k_max": int},
    "model": {"c_frak": float, "a": str, "b": str, "f": str, "c_formula": str, "chord_lines": int,
              "chord_seed": int},
    "solver": {"reference_tol": float, "sweeps": int, "coarse_scale": int, "cell_order": str,
               "symmetric": "bool", "block_scale": "optint", "omega": float},
    "study": {"kind": str, "name": str, "k_range": _ints, "stopping_for": _ints, "k": int, "k_list": _ints,
              "nu_list": _nus, "pairs": _pairs, "trials": int, "seed": int},
    "output": {"dir": str, "cache": "bool"},
}
_FIELD = {("model", "a"): "A", ("model", "b"): "B", ("model", "c_formula"): "C_formula",
          ("study", "kind"): "study", ("study", "k_range"): "K_range", ("study", "k"): "K",
          ("study", "seed"): "study_seed", ("output", "dir"): "out"}


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate INI text; unknown sections or keys are errors."""
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    cfg = ExperimentConfig()
    for sec in cp.sections():
        if sec not in _SECTIONS:
            raise ConfigError(f"unknown section [{sec}]")
        for key, raw in cp[sec].items():
            conv = _SECTIONS[sec].get(key)
            if conv is None:
                raise ConfigError(f"unknown key {sec}.{key}")
            try:
                if conv == "bool":
                    val = cp[sec].getboolean(key)
                elif conv == "optint":
                    val = int(raw) if raw.strip() else None
                else:
                    val = conv(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {sec}.{key}: {raw!r}") from exc
            setattr(cfg, _FIELD.get((sec, key), key), val)
    return cfg.validate()


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {PRESETS}")
    return resources.files("fraclod").joinpath("presets", f"{name}.ini").read_text(encoding="utf-8")


def load_config(path=None, preset: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    if (path is None) == (preset is None):
        raise ConfigError("give exactly one of a config file or a preset")
    text = Path(path).read_text(encoding="utf-8") if path is not None else preset_text(preset)
    cfg = parse_config(text)
    for key, val in (overrides or {}).items():
        if val is not None:
            setattr(cfg, key, val)
    return cfg.validate()


# -- atomic output ---------------------------------------------------------------------

def atomic_write(path, data) -> None:
    """Write text or bytes to ``path`` through a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"encoding": "utf-8", "newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows, meta: dict | None = None) -> str:
    """RFC 4180 CSV (CRLF line ends); metadata goes into leading ``key,value`` rows."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    for k, v in (meta or {}).items():
        w.writerow([f"# {k}", v])
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# -- networks and caches ---------------------------------------------------------------

def build_network(cfg: ExperimentConfig, cache_dir: Path | None = None) -> InterfaceNetwork:
    if cfg.kind == "localized":
        return build_localized_network(cfg.k_max)
    path = None
    if cache_dir is not None:
        path = cache_dir / f"network_geological_s{cfg.seed}_k{cfg.k_max}.txt"
        if path.exists():
            return read_network(path)
    net = build_geological_network(cfg.k_max, cfg.seed)
    if path is not None:
        tmp = path.with_suffix(".partial")
        write_network(net, tmp)
        os.replace(tmp, path)
    return net


def build_problem(cfg: ExperimentConfig, network: InterfaceNetwork | None = None,
                  cache_dir: Path | None = None) -> Problem:
    net = network if network is not None else build_network(cfg, cache_dir)
    const = constants_for(net, cfg.c_frak, C_formula=cfg.C_formula, n_lines=cfg.chord_lines, seed=cfg.chord_seed)
    return Problem(net, const, cfg.coefficients())


def model_key(cfg: ExperimentConfig, problem: Problem) -> str:
    h = hashlib.sha256()
    h.update(problem.network.digest().encode())
    h.update(json.dumps({"c": cfg.c_frak, "A": cfg.A, "B": cfg.B, "f": cfg.f, "C": cfg.C_formula,
                         "lines": cfg.chord_lines, "chord_seed": cfg.chord_seed,
                         "tol": cfg.reference_tol}, sort_keys=True).encode())
    h.update(np.nan_to_num(problem.constants.jump_weights).tobytes())
    return h.hexdigest()


class ReferenceCache:
    """On-disk cache of reference solutions keyed by (model hash, K)."""

    def __init__(self, directory: Path, key: str):
        self.dir = Path(directory)
        self.key = key

    def path(self, K: int) -> Path:
        return self.dir / f"ref_{self.key[:16]}_K{K}.npz"

    def load(self, K: int):
        p = self.path(K)
        if not p.exists():
            return None
        with np.load(p) as data:
            if str(data["key"]) != self.key:
                return None
            rep = SolveReport(int(data["iterations"]), float(data["residual"]), bool(data["converged"]))
            return data["u"].copy(), rep

    def store(self, K: int, u: np.ndarray, rep: SolveReport) -> None:
        buf = io.BytesIO()
        np.savez(buf, u=u, key=np.array(self.key), iterations=rep.iterations, residual=rep.relative_residual,
                 converged=rep.converged)
        atomic_write(self.path(K), buf.getvalue())

    def attach(self, problem: Problem, Ks, tol: float) -> None:
        """Load cached references into the problem and compute and store the missing ones."""
        for K in sorted(set(Ks)):
            hit = self.load(K)
            if hit is not None:
                problem.set_reference(K, *hit)
                continue
            u, rep = problem.reference(K, tol=tol)
            self.store(K, u, rep)


# -- SVG --------------------------------------------------------------------------------

def render_network_svg(network: InterfaceNetwork, k: int, size: int = 512) -> str:
    """Gamma^(k-1) in black with Gamma_k highlighted, as an SVG 1.1 document."""
    if not 1 <= k <= network.k_max:
        raise ValueError(f"level {k} outside 1..{network.k_max}")
    pad = 8
    span = size - 2 * pad
    svg = ET.Element("svg", {"xmlns": "http://www.w3.org/2000/svg", "version": "1.1",
                             "width": str(size), "height": str(size), "viewBox": f"0 0 {size} {size}"})
    ET.SubElement(svg, "title").text = f"{network.kind} interface network, levels 1..{k}"
    ET.SubElement(svg, "rect", {"x": str(pad), "y": str(pad), "width": str(span), "height": str(span),
                                "fill": "white", "stroke": "black", "stroke-width": "1.5"})

    def draw(j, colour, width):
        seg = network.points_float(j)
        if len(seg) == 0:
            return
        x = pad + span * seg[:, [0, 2]]
        y = pad + span * (1.0 - seg[:, [1, 3]])
        d = " ".join(f"M{a:.3f},{b:.3f}L{c:.3f},{e:.3f}" for a, b, c, e in zip(x[:, 0], y[:, 0], x[:, 1], y[:, 1]))
        ET.SubElement(svg, "path", {"d": d, "stroke": colour, "stroke-width": width, "fill": "none",
                                    "stroke-linecap": "round", "class": f"level-{j}"})

    for j in range(1, k):
        draw(j, "black", "1.5")
    draw(k, "#d62728", "2")
    body = ET.tostring(svg, encoding="unicode")
    return '<?xml version="1.0" encoding="UTF-8" standalone="no"?>\n' + body + "\n"


# -- planning and running -------------------------------------------------------------

def planned_scales(cfg: ExperimentConfig) -> list:
    if cfg.study == "twolevel":
        scales = set(cfg.K_range) | {cfg.coarse_scale} | {K + 1 for K in cfg.stopping_for}
    elif cfg.study == "lod":
        scales = {cfg.K, *cfg.k_list}
    else:
        scales = {s for p in cfg.pairs for s in p}
    return sorted(scales)


def dry_run(cfg: ExperimentConfig, cache_dir: Path | None = None) -> list:
    """Cell and dof counts per planned scale; builds meshes and spaces but solves nothing."""
    net = build_network(cfg, cache_dir)
    hier = net.hierarchy()
    rows = []
    for k in planned_scales(cfg):
        mesh = hier.mesh_for_scale(k)
        part = extract_cells(net, k, mesh)
        space = build_broken_space(mesh, part)
        rows.append({"scale": k, "mesh_level": hier.scale_to_mesh(k), "triangles": mesh.n_triangles,
                     "cells": part.n_cells, "dofs": space.n_dofs})
    return rows


@dataclass
class RunArchive:
    config_hash: str
    config: dict
    network_digest: str
    version: str
    study: str
    results: dict
    timings: dict = field(default_factory=dict)
    files: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=_jsonable)


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, set):
        return sorted(x)
    return str(x)


def _meta(cfg: ExperimentConfig) -> dict:
    return {"config_hash": cfg.hash(), "seed": cfg.seed if cfg.kind == "geological" else "-", "f": cfg.f,
            "omega": repr(cfg.omega), "reference_tol": repr(cfg.reference_tol)}


def _meta_lines(cfg: ExperimentConfig) -> str:
    return "\n".join(f"# {k}: {v}" for k, v in _meta(cfg).items())


def _run_twolevel(cfg, problem, out: Path) -> tuple[dict, list]:
    from .twolevel import TwoLevelConfig, format_table, run_two_level

    reports = []
    for K in cfg.K_range:
        tc = TwoLevelConfig(K, cfg.coarse_scale, cfg.sweeps, cfg.cell_order, cfg.symmetric, cfg.block_scale)
        reports.append(run_two_level(problem, tc, with_stopping=K in cfg.stopping_for))
    table = format_table(reports, title=f"{cfg.kind} network, error reduction factors")
    extra = ["asym" + "".join(f"{r.asymptotic_factor():9.3f}" for r in reports)]
    stops = [f"stopping index at K={r.K}: {r.stopping_index} (threshold {r.threshold:.3e})"
             for r in reports if r.stopping_index is not None]
    text = "\n".join([_meta_lines(cfg), table, *extra, *stops]) + "\n"
    header = ["nu"] + [f"K={r.K}" for r in reports]
    rows = [[i + 1] + [f"{r.factors[i]:.6f}" for r in reports] for i in range(cfg.sweeps)]
    rows.append(["rho"] + [f"{r.geometric_mean:.6f}" for r in reports])
    rows.append(["asymptotic"] + [f"{r.asymptotic_factor():.6f}" for r in reports])
    atomic_write(out / "table.txt", text)
    atomic_write(out / "table.csv", csv_text(header, rows, _meta(cfg)))
    return {"reports": [r.as_dict() for r in reports]}, ["table.txt", "table.csv"]


def _run_lod(cfg, problem, out: Path) -> tuple[dict, list]:
    from .lod import format_lod_table, lod_error_study

    rows = lod_error_study(problem, cfg.k_list, cfg.K, cfg.nu_list, cfg.omega)
    text = _meta_lines(cfg) + "\n" + format_lod_table(rows) + "\n"
    header = ["k", "nu", "coarse_dofs", "fine_dofs", "h_error", "l2_error"]
    body = [[r.k, "ideal" if r.nu == math.inf else int(r.nu), r.coarse_dofs, r.fine_dofs, f"{r.h_error:.10e}",
             f"{r.l2_error:.10e}"] for r in rows]
    atomic_write(out / "lod.txt", text)
    atomic_write(out / "lod.csv", csv_text(header, body, _meta(cfg)))
    return {"rows": [r.as_dict() for r in rows]}, ["lod.txt", "lod.csv"]


def _run_projections(cfg, problem, out: Path) -> tuple[dict, list]:
    from .projections import ProjectionStack, verify_projection_bounds

    results = []
    for K, k in cfg.pairs:
        stack = ProjectionStack(problem, k, K)
        rep = verify_projection_bounds(stack, cfg.trials, cfg.study_seed)
        results.append({"K": K, "k": k, "stability": rep.stability, "approximation": rep.approximation,
                        "trials": rep.trials})
    lines = [_meta_lines(cfg), f"{'K':>3} {'k':>3} {'stability':>12} {'approximation':>14}"]
    lines += [f"{r['K']:>3} {r['k']:>3} {r['stability']:12.5f} {r['approximation']:14.5f}" for r in results]
    header = ["K", "k", "stability", "approximation", "trials"]
    body = [[r["K"], r["k"], f"{r['stability']:.10e}", f"{r['approximation']:.10e}", r["trials"]] for r in results]
    atomic_write(out / "projections.txt", "\n".join(lines) + "\n")
    atomic_write(out / "projections.csv", csv_text(header, body, _meta(cfg)))
    return {"pairs": results}, ["projections.txt", "projections.csv"]


def run(cfg: ExperimentConfig, out: Path | str | None = None) -> RunArchive:
    """Run the configured study end to end and write every output under ``out``."""
    cfg.validate()
    out = Path(out if out is not None else cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    cache_dir = out / "cache" if cfg.cache else None
    if cache_dir is not None:
        cache_dir.mkdir(exist_ok=True)
    t0 = time.perf_counter()
    problem = build_problem(cfg, cache_dir=cache_dir)
    problem.timings["network"] = time.perf_counter() - t0
    if cache_dir is not None and cfg.study == "twolevel":
        cache = ReferenceCache(cache_dir, model_key(cfg, problem))
        need = set(cfg.K_range) | {cfg.coarse_scale} | {K + 1 for K in cfg.stopping_for}
        cache.attach(problem, need, cfg.reference_tol)
    runner = {"twolevel": _run_twolevel, "lod": _run_lod, "projections": _run_projections}[cfg.study]
    results, files = runner(cfg, problem, out)
    for k in range(1, problem.network.k_max + 1):
        name = f"network_k{k}.svg"
        atomic_write(out / name, render_network_svg(problem.network, k))
        files.append(name)
    atomic_write(out / "config.ini", cfg.to_ini())
    files.append("config.ini")
    results["constants"] = {"C": problem.constants.C, "d": problem.constants.d,
                            "jump_weights": problem.constants.jump_weights}
    archive = RunArchive(cfg.hash(), cfg.canonical(), problem.network.digest(), __version__, cfg.study, results,
                         dict(problem.timings), files)
    atomic_write(out / "archive.json", archive.to_json())
    log.info("run %s finished in %.1fs", cfg.hash()[:12], time.perf_counter() - t0)
    return archive


def inspect_network(cfg: ExperimentConfig, cache_dir: Path | None = None) -> str:
    """Text summary: edges per level, cells and neighbor counts per scale, constants."""
    net = build_network(cfg, cache_dir)
    const: NetworkConstants = constants_for(net, cfg.c_frak, C_formula=cfg.C_formula, n_lines=cfg.chord_lines,
                                            seed=cfg.chord_seed)
    hier = net.hierarchy()
    lines = [f"kind {net.kind}  seed {net.seed}  k_max {net.k_max}  digest {net.digest()[:16]}",
             f"{'k':>2} {'edges':>7} {'cells':>7} {'max nbrs':>8} {'d_k':>9} {'C_k':>6} {'weight':>9}"]
    for k in range(1, net.k_max + 1):
        part = extract_cells(net, k, hier.mesh_for_scale(k))
        lines.append(f"{k:>2} {len(net.level_edges(k)):>7} {part.n_cells:>7} {part.max_neighbors():>8} "
                     f"{const.d[k]:9.4f} {const.C[k]:6.1f} {const.weight(k):9.1f}")
    q = const.qdec_values()
    lines.append("qdec values " + " ".join(f"{v:.3f}" for v in q))
    if net.kind == "localized":
        lines.append("smallcl " + " ".join(str(const.smallcl(k)) for k in range(1, net.k_max + 1)))
    return "\n".join(lines)
