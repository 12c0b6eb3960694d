"""Deterministic 1D/2D parameter sweeps.

Cells are independent pure computations; results are assembled in row-major
cell order regardless of worker count, so identical specs produce identical
tables.  Supported modes:

* ``root-count`` / ``stable-count`` — steady-state branches with stability
  verdicts per cell (SystemParams base),
* ``branch-curve``  — 1D branch list with continuation-consistent labels,
* ``cooling``       — phonon numbers and dark-mode overlap per cell
  (LinearizedParams base).
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import Optional, Union

import numpy as np

from .cooling import (ZeroCoupling, build_noise_model, dark_mode_diagnostics,
                      solve_lyapunov)
from .params import LinearizedParams, SystemParams, validate_params
from .stability import (build_drift_matrix, classify_branch_stability,
                        derive_linearized)
from .steady_state import Diagnostic, solve_branches

MODES = ("root-count", "stable-count", "branch-curve", "cooling")


class InvalidSpec(ValueError):
    """Malformed sweep specification."""


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    points: int
    scale: str = "linear"        # or "log"

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.lo, self.hi, self.points)
        return np.linspace(self.lo, self.hi, self.points)


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple[Axis, ...]
    base: Union[SystemParams, LinearizedParams]
    mode: str
    oracle_mode: bool = True
    gamma_fallback: bool = True
    scan_points: int = 4096
    with_damping: bool = False
    threads: int = 1
    options: dict = field(default_factory=dict)


@dataclass
class BranchRow:
    """One (cell, branch) record; cooling cells carry a single row."""

    branch_index: int
    n_p: Optional[float]
    stable: Optional[bool]
    n1f: Optional[float] = None
    n2f: Optional[float] = None
    dark_overlap: Optional[float] = None
    residual: Optional[float] = None


@dataclass
class CellResult:
    index: tuple[int, ...]
    values: tuple[float, ...]
    root_count: int
    stable_count: int
    branches: list[BranchRow]


@dataclass
class SweepResult:
    spec: SweepSpec
    cells: list[CellResult]
    diagnostics: list[Diagnostic]


def _field_names(record) -> set[str]:
    return {f.name for f in fields(record)}


def validate_spec(spec: SweepSpec) -> SweepSpec:
    if spec.mode not in MODES:
        raise InvalidSpec(f"unknown mode {spec.mode!r}")
    if not 1 <= len(spec.axes) <= 2:
        raise InvalidSpec("a sweep needs 1 or 2 axes")
    if spec.mode == "branch-curve" and len(spec.axes) != 1:
        raise InvalidSpec("branch-curve sweeps are 1D")
    if spec.mode == "cooling" and not isinstance(spec.base, LinearizedParams):
        raise InvalidSpec("cooling sweeps take a LinearizedParams base")
    if spec.mode != "cooling" and not isinstance(spec.base, SystemParams):
        raise InvalidSpec(f"{spec.mode} sweeps take a SystemParams base")
    names = _field_names(spec.base)
    for ax in spec.axes:
        if ax.name not in names:
            raise InvalidSpec(f"axis parameter {ax.name!r} is not a field "
                              f"of {type(spec.base).__name__}")
        if ax.points < 2:
            raise InvalidSpec("each axis needs at least 2 points")
        if not (ax.lo < ax.hi):
            raise InvalidSpec("axis requires lo < hi")
        if ax.scale not in ("linear", "log"):
            raise InvalidSpec(f"unknown axis scale {ax.scale!r}")
        if ax.scale == "log" and ax.lo <= 0.0:
            raise InvalidSpec("log axis requires lo > 0")
    return spec


def _cell_params(spec: SweepSpec, values: tuple[float, ...]):
    updates = {}
    for ax, v in zip(spec.axes, values):
        cur = getattr(spec.base, ax.name)
        updates[ax.name] = complex(v) if isinstance(cur, complex) else float(v)
    return replace(spec.base, **updates)


def _eval_steady_cell(spec: SweepSpec, index, values) -> tuple[CellResult, list[Diagnostic]]:
    diags: list[Diagnostic] = []
    try:
        p = validate_params(_cell_params(spec, values))
        branches = solve_branches(p, oracle_mode=spec.oracle_mode,
                                  scan_points=spec.scan_points,
                                  with_damping=spec.with_damping,
                                  diagnostics=diags)
    except Exception as exc:   # per-cell failures never abort the sweep
        diags.append(Diagnostic("cell-error", f"{type(exc).__name__}: {exc}"))
        branches = []
        p = None
    rows: list[BranchRow] = []
    stable_count = 0
    for k, b in enumerate(branches):
        lp = derive_linearized(b, p)
        verdict = classify_branch_stability(lp, spec.gamma_fallback)
        if verdict.verdict_flipped:
            diags.append(Diagnostic(
                "marginal-verdict",
                f"stability verdict at n_p={b.n_p:.6g} flips between "
                f"gamma=0 and the fallback damping"))
        stable_count += verdict.stable
        rows.append(BranchRow(branch_index=k, n_p=b.n_p, stable=verdict.stable,
                              residual=b.residual))
    for d in diags:
        d.cell = tuple(index)
    cell = CellResult(index=tuple(index), values=tuple(values),
                      root_count=len(branches), stable_count=stable_count,
                      branches=rows)
    return cell, diags


def _eval_cooling_cell(spec: SweepSpec, index, values) -> tuple[CellResult, list[Diagnostic]]:
    diags: list[Diagnostic] = []
    lp = _cell_params(spec, values)
    try:
        dark = dark_mode_diagnostics(lp).dark_overlap
    except ZeroCoupling:
        dark = None
    try:
        cov = solve_lyapunov(build_drift_matrix(lp), build_noise_model(lp))
        stable = cov.physical
        n1f, n2f = (cov.n1f, cov.n2f) if stable else (None, None)
        residual = cov.lyap_residual
        if not stable:
            diags.append(Diagnostic("unstable-cell",
                                    "drift matrix unstable; cell excluded "
                                    "from phonon statistics"))
    except Exception as exc:
        diags.append(Diagnostic("cell-error", f"{type(exc).__name__}: {exc}"))
        stable, n1f, n2f, residual = False, None, None, None
    for d in diags:
        d.cell = tuple(index)
    row = BranchRow(branch_index=0, n_p=None, stable=stable,
                    n1f=n1f, n2f=n2f, dark_overlap=dark, residual=residual)
    cell = CellResult(index=tuple(index), values=tuple(values),
                      root_count=1, stable_count=int(bool(stable)),
                      branches=[row])
    return cell, diags


def _eval_chunk(spec: SweepSpec, chunk: list[tuple[tuple, tuple]]):
    evaluate = _eval_cooling_cell if spec.mode == "cooling" else _eval_steady_cell
    return [evaluate(spec, idx, vals) for idx, vals in chunk]


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Evaluate the sweep grid; deterministic row-major assembly."""
    spec = validate_spec(spec)
    axes_vals = [ax.values() for ax in spec.axes]
    if len(axes_vals) == 1:
        cells_iter = [((i,), (float(a),)) for i, a in enumerate(axes_vals[0])]
    else:
        cells_iter = [((i, j), (float(a), float(b)))
                      for i, a in enumerate(axes_vals[0])
                      for j, b in enumerate(axes_vals[1])]
    results: list[tuple[CellResult, list[Diagnostic]]]
    if spec.threads > 1 and len(cells_iter) > 8:
        chunk_size = max(8, math.ceil(len(cells_iter) / (spec.threads * 16)))
        chunks = [cells_iter[i:i + chunk_size]
                  for i in range(0, len(cells_iter), chunk_size)]
        results = []
        with ProcessPoolExecutor(max_workers=spec.threads) as pool:
            for part in pool.map(_eval_chunk, [spec] * len(chunks), chunks):
                results.extend(part)
    else:
        results = _eval_chunk(spec, cells_iter)
    cells = [r[0] for r in results]
    diagnostics = [d for r in results for d in r[1]]
    result = SweepResult(spec=spec, cells=cells, diagnostics=diagnostics)
    if spec.mode == "branch-curve":
        _assign_continuation_labels(result)
    return result


def _assign_continuation_labels(result: SweepResult) -> None:
    """Relabel branches of a 1D curve by nearest-n_p continuation.

    Ties break toward the lower previous index; branches with no antecedent
    get fresh labels.  Labels stay unique within each cell.
    """
    prev: dict[int, float] = {}
    next_label = 0
    for cell in result.cells:
        rows = cell.branches
        if not prev:
            for row in rows:
                row.branch_index = next_label
                prev[next_label] = row.n_p
                next_label += 1
            continue
        pairs = sorted(
            (abs(row.n_p - np_prev), label, k)
            for k, row in enumerate(rows)
            for label, np_prev in sorted(prev.items()))
        taken_labels: set[int] = set()
        taken_rows: set[int] = set()
        assignment: dict[int, int] = {}
        for dist, label, k in pairs:
            if label in taken_labels or k in taken_rows:
                continue
            assignment[k] = label
            taken_labels.add(label)
            taken_rows.add(k)
        new_prev: dict[int, float] = {}
        for k, row in enumerate(rows):
            if k in assignment:
                row.branch_index = assignment[k]
            else:
                row.branch_index = next_label
                next_label += 1
            new_prev[row.branch_index] = row.n_p
        prev = new_prev


def branch_curve(spec: SweepSpec) -> SweepResult:
    """1D branch curve with stability flags and continuation labels."""
    if spec.mode != "branch-curve":
        spec = replace(spec, mode="branch-curve")
    return run_sweep(spec)


def cooling_map(spec: SweepSpec) -> SweepResult:
    """Cooling sweep over direct linearized parameters."""
    if spec.mode != "cooling":
        spec = replace(spec, mode="cooling")
    return run_sweep(spec)
