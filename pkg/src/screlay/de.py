"""Section-wise density evolution for protograph codes on the BEC.

Every nonzero base-matrix entry (i, j) is a *section*.  ``x`` holds the
variable-to-check erasure probability of each section and ``y`` the
check-to-variable one.  Sections are stored in row-major order.
"""

from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numba import njit

from .base_matrix import BaseMatrix
from .relay import ChannelParams, JointRelayGraph, eps_vector

log = logging.getLogger(__name__)

SUCCESS, STALLED, MAX_ITER = 0, 1, 2
_REASONS = {SUCCESS: "converged", STALLED: "stalled", MAX_ITER: "max_iter"}


@dataclass(frozen=True)
class DEConfig:
    success_tol: float = 1e-10
    stall_tol: float = 1e-15
    max_iter: int = 200_000
    window: int = 100

    def __post_init__(self):
        if not 0 < self.stall_tol < self.success_tol < 1:
            raise ValueError("need 0 < stall_tol < success_tol < 1")
        if self.max_iter < 1 or self.window < 1:
            raise ValueError("max_iter and window must be positive")


class Sections:
    """Edge-type topology of a base matrix, laid out for the DE kernels."""

    def __init__(self, base: BaseMatrix, target_columns=None):
        B = base.entries
        self.base = base
        self.rows, self.cols = np.nonzero(B)
        self.mult = B[self.rows, self.cols].astype(np.int64)
        self.row_ptr = np.searchsorted(self.rows, np.arange(B.shape[0] + 1)).astype(np.int64)
        self.col_order = np.lexsort((self.rows, self.cols)).astype(np.int64)
        self.col_ptr = np.searchsorted(self.cols[self.col_order], np.arange(B.shape[1] + 1)).astype(np.int64)
        if target_columns is None:
            target_columns = np.arange(B.shape[1])
        self.target_cols = np.asarray(target_columns, dtype=np.int64)
        self.target = np.flatnonzero(np.isin(self.cols, self.target_cols)).astype(np.int64)

    def __len__(self):
        return len(self.rows)

    def keys(self) -> list[tuple[int, int]]:
        return list(zip(self.rows.tolist(), self.cols.tolist()))


def sections_of(graph) -> Sections:
    if isinstance(graph, Sections):
        return graph
    if isinstance(graph, JointRelayGraph):
        return Sections(graph.base, graph.target_columns)
    if isinstance(graph, BaseMatrix):
        return Sections(graph)
    return Sections(BaseMatrix(graph))


@dataclass
class DEState:
    x: np.ndarray
    y: np.ndarray
    iteration: int = 0
    sections: Sections | None = field(default=None, repr=False, compare=False)

    def as_dict(self) -> dict:
        keys = self.sections.keys()
        return {"x": dict(zip(keys, self.x.tolist())), "y": dict(zip(keys, self.y.tolist()))}


@njit(cache=True, nogil=True, inline="always")
def _ipow(b, n):
    p = 1.0
    for _ in range(n):
        p *= b
    return p


@njit(cache=True, nogil=True)
def _check_update(row_ptr, mult, x, y):
    # prefix/suffix products give the excluded-self product without division
    for i in range(len(row_ptr) - 1):
        lo, hi = row_ptr[i], row_ptr[i + 1]
        acc = 1.0
        for e in range(lo, hi):
            y[e] = acc
            acc *= _ipow(1.0 - x[e], mult[e])
        acc = 1.0
        for e in range(hi - 1, lo - 1, -1):
            y[e] = 1.0 - y[e] * acc * _ipow(1.0 - x[e], mult[e] - 1)
            acc *= _ipow(1.0 - x[e], mult[e])


@njit(cache=True, nogil=True)
def _variable_update(col_ptr, col_order, mult, eps, y, x):
    for j in range(len(col_ptr) - 1):
        lo, hi = col_ptr[j], col_ptr[j + 1]
        acc = eps[j]
        for a in range(lo, hi):
            e = col_order[a]
            x[e] = acc
            acc *= _ipow(y[e], mult[e])
        acc = 1.0
        for a in range(hi - 1, lo - 1, -1):
            e = col_order[a]
            x[e] = x[e] * acc * _ipow(y[e], mult[e] - 1)
            acc *= _ipow(y[e], mult[e])


@njit(cache=True, nogil=True)
def _run(row_ptr, col_ptr, col_order, mult, target_cols, target, eps, x, y,
         success_tol, stall_tol, max_iter, window):
    snapshot = x.copy()
    it = 0
    while it < max_iter:
        _check_update(row_ptr, mult, x, y)
        _variable_update(col_ptr, col_order, mult, eps, y, x)
        it += 1
        # a-posteriori erasure of column j is x_e * y_e for any of its edges e
        worst = 0.0
        for j in target_cols:
            if col_ptr[j] == col_ptr[j + 1]:
                app = eps[j]
            else:
                e = col_order[col_ptr[j]]
                app = x[e] * y[e]
            if app > worst:
                worst = app
        if worst < success_tol:
            return SUCCESS, it
        if it % window == 0:
            drop = 0.0
            for t in target:
                d = snapshot[t] - x[t]
                if d > drop:
                    drop = d
                snapshot[t] = x[t]
            if drop < stall_tol:
                return STALLED, it
    return MAX_ITER, it


def initial_state(graph, eps) -> DEState:
    sec = sections_of(graph)
    eps = np.asarray(eps, dtype=np.float64)
    x = eps[sec.cols].copy()
    return DEState(x, np.ones_like(x), 0, sec)


def de_step(graph, eps, state: DEState) -> DEState:
    """One check update followed by one variable update."""
    sec = sections_of(graph) if state.sections is None else state.sections
    eps = np.asarray(eps, dtype=np.float64)
    x = state.x.copy()
    y = np.empty_like(x)
    _check_update(sec.row_ptr, sec.mult, x, y)
    _variable_update(sec.col_ptr, sec.col_order, sec.mult, eps, y, x)
    return DEState(x, y, state.iteration + 1, sec)


@dataclass
class DEResult:
    achievable: bool
    state: DEState
    reason: str
    max_x: float
    column_erasure: np.ndarray

    @property
    def iterations(self) -> int:
        return self.state.iteration


def column_erasure(sec: Sections, eps, y) -> np.ndarray:
    """A-posteriori erasure probability eps_j * prod_i y_ij^B(i,j) per column."""
    eps = np.asarray(eps, dtype=np.float64)
    logs = np.zeros(len(eps))
    zero = np.zeros(len(eps), dtype=bool)
    with np.errstate(divide="ignore"):
        ly = np.log(y)
    np.add.at(logs, sec.cols, sec.mult * np.where(y > 0, ly, 0.0))
    np.logical_or.at(zero, sec.cols, y <= 0)
    out = eps * np.exp(logs)
    out[zero] = 0.0
    return out


def run_de(graph, eps, config: DEConfig = DEConfig()) -> DEResult:
    """Iterate from x = eps_j until the a-posteriori erasure probability of
    every target column drops below ``success_tol``.

    The run is declared a failure when no target section improves by more
    than ``stall_tol`` over ``window`` iterations, or at ``max_iter``.
    """
    state = initial_state(graph, eps)
    sec = state.sections
    eps = np.asarray(eps, dtype=np.float64)
    code, iters = _run(sec.row_ptr, sec.col_ptr, sec.col_order, sec.mult, sec.target_cols, sec.target, eps,
                       state.x, state.y, config.success_tol, config.stall_tol,
                       config.max_iter, config.window)
    state.iteration = int(iters)
    max_x = float(state.x[sec.target].max()) if len(sec.target) else 0.0
    app = column_erasure(sec, eps, state.y)
    return DEResult(code == SUCCESS, state, _REASONS[int(code)], max_x, app)


class BracketError(ValueError):
    pass


@dataclass
class ThresholdResult:
    threshold: float
    bracket: tuple[float, float]
    de_runs: int
    iterations: int

    @property
    def width(self) -> float:
        return self.bracket[1] - self.bracket[0]


def bisect_threshold(graph, eps_of: Callable[[float], np.ndarray], config: DEConfig = DEConfig(),
                     lo: float = 0.0, hi: float = 1.0, tol: float = 1e-6,
                     check_bracket: bool = True) -> ThresholdResult:
    """Largest achievable value of a single free channel parameter.

    ``eps_of`` maps the free parameter to a per-column erasure vector.
    The returned threshold is the achievable end of the final bracket.
    """
    sec = sections_of(graph)
    runs = 0
    iters = 0
    if check_bracket:
        lo_res = run_de(sec, eps_of(lo), config)
        hi_res = run_de(sec, eps_of(hi), config)
        runs += 2
        if not lo_res.achievable:
            raise BracketError(f"lower end {lo} is not achievable")
        if hi_res.achievable:
            raise BracketError(f"upper end {hi} is achievable")
        iters = lo_res.iterations
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        res = run_de(sec, eps_of(mid), config)
        runs += 1
        if res.achievable:
            lo, iters = mid, res.iterations
        else:
            hi = mid
    return ThresholdResult(lo, (lo, hi), runs, iters)


def standalone_eps(graph: JointRelayGraph) -> Callable[[float], np.ndarray]:
    """Free parameter drives the source columns; relay columns stay erased,
    as they are when the relay decodes the source word on its own."""
    return lambda p: eps_vector(graph, ChannelParams(eps_sd=p, eps_rd=1.0))


def sd_eps(graph: JointRelayGraph, eps_rd: float) -> Callable[[float], np.ndarray]:
    return lambda p: eps_vector(graph, ChannelParams(eps_sd=p, eps_rd=eps_rd))


@dataclass
class RegionPoint:
    eps_rd: float
    eps_sd_max: float
    iterations: int
    de_runs: int


@dataclass
class RegionResult:
    points: list[RegionPoint]
    config: DEConfig
    bisect_tol: float

    @property
    def eps_rd(self) -> np.ndarray:
        return np.array([p.eps_rd for p in self.points])

    @property
    def eps_sd_max(self) -> np.ndarray:
        return np.array([p.eps_sd_max for p in self.points])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eps_rd", "eps_sd_max", "iters", "de_runs"])
        for p in self.points:
            w.writerow([f"{p.eps_rd:.9g}", f"{p.eps_sd_max:.9g}", p.iterations, p.de_runs])
        return buf.getvalue()


def _region_point(sec: Sections, graph: JointRelayGraph, eps_rd: float,
                  config: DEConfig, tol: float) -> RegionPoint:
    eps_of = sd_eps(graph, eps_rd)
    top = run_de(sec, eps_of(1.0), config)
    if top.achievable:
        return RegionPoint(eps_rd, 1.0, top.iterations, 1)
    bottom = run_de(sec, eps_of(0.0), config)
    if not bottom.achievable:
        return RegionPoint(eps_rd, 0.0, bottom.iterations, 2)
    res = bisect_threshold(sec, eps_of, config, 0.0, 1.0, tol, check_bracket=False)
    return RegionPoint(eps_rd, res.threshold, res.iterations, res.de_runs + 2)


def sweep_region(graph: JointRelayGraph, grid: Sequence[float], config: DEConfig = DEConfig(),
                 bisect_tol: float = 1e-6, workers: int = 1) -> RegionResult:
    """Boundary of the achievable (eps_rd, eps_sd) region, one bisection
    over eps_sd per grid value of eps_rd, in grid order."""
    sec = sections_of(graph)
    grid = [float(v) for v in grid]
    if any(not 0.0 <= v <= 1.0 for v in grid):
        raise ValueError("grid values must lie in [0, 1]")

    def point(v):
        p = _region_point(sec, graph, v, config, bisect_tol)
        log.info("eps_rd=%.6f eps_sd_max=%.9f", p.eps_rd, p.eps_sd_max)
        return p

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            points = list(pool.map(point, grid))
    else:
        points = [point(v) for v in grid]
    return RegionResult(points, config, bisect_tol)


def threshold_csv(eps_rd: float, result: ThresholdResult) -> str:
    return RegionResult([RegionPoint(eps_rd, result.threshold, result.iterations, result.de_runs)],
                        DEConfig(), result.width).to_csv()


__all__ = [
    "DEConfig", "DEState", "DEResult", "Sections", "ThresholdResult", "RegionPoint",
    "RegionResult", "BracketError", "initial_state", "de_step", "run_de", "bisect_threshold",
    "sweep_region", "standalone_eps", "sd_eps", "column_erasure", "sections_of", "threshold_csv",
]
