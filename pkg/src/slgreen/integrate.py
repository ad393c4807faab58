"""
Fixed-step classical RK4 for -p y'' + q y = λ y on one subinterval.

The equation is integrated as the first-order system y' = v,
v' = g(x) y with g = (q - λ)/p. The same stepping loop runs on Python
floats (one λ, full trajectory recorded) and on numpy arrays (many λ at
once, terminal values only).
"""
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Tuple, Union

import numpy as np
import structlog
from scipy.interpolate import CubicHermiteSpline

from .errors import DivergedSolutionError, OutOfSpanError, PathMismatchError
from .metrics import integration_sweeps
from .problem import ProblemConfig, Side, eval_expression

logger = structlog.get_logger()

DIVERGENCE_LIMIT = 1e300
SPAN_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class SolutionPath:
    """One solution on one subinterval at fixed λ, nodes stored ascending."""

    lam: float
    side: Side
    xs: np.ndarray
    y: np.ndarray
    yp: np.ndarray
    # (q - λ)/p at the nodes, so yp'' data is available for dense output
    g: np.ndarray
    p: float

    @property
    def span(self) -> Tuple[float, float]:
        return float(self.xs[0]), float(self.xs[-1])

    @property
    def steps(self) -> int:
        return len(self.xs) - 1

    @cached_property
    def _y_spline(self) -> CubicHermiteSpline:
        return CubicHermiteSpline(self.xs, self.y, self.yp)

    @cached_property
    def _yp_spline(self) -> CubicHermiteSpline:
        return CubicHermiteSpline(self.xs, self.yp, self.g * self.y)

    def evaluate(self, x):
        return eval_path(self, x)


def _node_sequence(from_x: float, to_x: float, steps: int) -> np.ndarray:
    lo, hi = min(from_x, to_x), max(from_x, to_x)
    xs = np.linspace(lo, hi, steps + 1)
    return xs if to_x >= from_x else xs[::-1]


def _coefficient_samples(config: ProblemConfig, side: Side, seq: np.ndarray):
    q = config.q_of(side)
    return eval_expression(q, seq), eval_expression(q, 0.5 * (seq[:-1] + seq[1:]))


def _rk4(y, v, h: float, lam, q_nodes, q_mid, p: float, record: bool, guard: bool):
    """Classical RK4 sweep; `guard` checks divergence after every step (scalar mode)."""
    ys, vs = [y], [v]
    half = 0.5 * h
    for i in range(len(q_mid)):
        g0 = (q_nodes[i] - lam) / p
        gm = (q_mid[i] - lam) / p
        g1 = (q_nodes[i + 1] - lam) / p
        k1y, k1v = v, g0 * y
        k2y, k2v = v + half * k1v, gm * (y + half * k1y)
        k3y, k3v = v + half * k2v, gm * (y + half * k2y)
        k4y, k4v = v + h * k3v, g1 * (y + h * k3y)
        y = y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        v = v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        if guard and not (abs(y) <= DIVERGENCE_LIMIT and abs(v) <= DIVERGENCE_LIMIT):
            return None
        if record:
            ys.append(y)
            vs.append(v)
    return (ys, vs) if record else (y, v)


def _check_span(config: ProblemConfig, side: Side, from_x: float, to_x: float):
    lo, hi = config.interval(side)
    if (min(from_x, to_x), max(from_x, to_x)) != (lo, hi):
        raise PathMismatchError(f"[{from_x!r}, {to_x!r}] is not the {side} subinterval [{lo!r}, {hi!r}]")


def integrate(config: ProblemConfig, side: Side, lam: float, from_x: float, to_x: float,
              init: Tuple[float, float]) -> SolutionPath:
    _check_span(config, side, from_x, to_x)
    steps = config.steps
    seq = _node_sequence(from_x, to_x, steps)
    q_nodes, q_mid = _coefficient_samples(config, side, seq)
    p = config.p_of(side)
    h = (to_x - from_x) / steps
    y0, v0 = float(init[0]), float(init[1])
    if not (math.isfinite(y0) and math.isfinite(v0)):
        raise DivergedSolutionError(lam, side)

    integration_sweeps.labels(side=side).inc()
    result = _rk4(y0, v0, h, float(lam), q_nodes.tolist(), q_mid.tolist(), p, record=True, guard=True)
    if result is None:
        logger.warning("Solution diverged", lam=lam, side=side, from_x=from_x, to_x=to_x)
        raise DivergedSolutionError(lam, side)
    ys, vs = np.array(result[0]), np.array(result[1])
    if to_x < from_x:
        seq, ys, vs, q_nodes = seq[::-1], ys[::-1], vs[::-1], q_nodes[::-1]
    return SolutionPath(lam=float(lam), side=side, xs=seq.copy(), y=ys.copy(), yp=vs.copy(),
                        g=(q_nodes - lam) / p, p=p)


def propagate(config: ProblemConfig, side: Side, lams: np.ndarray, from_x: float, to_x: float,
              init: Tuple[np.ndarray, np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """Terminal (y, yp) for a batch of λ; entries that diverge come back as NaN."""
    _check_span(config, side, from_x, to_x)
    steps = config.steps
    seq = _node_sequence(from_x, to_x, steps)
    q_nodes, q_mid = _coefficient_samples(config, side, seq)
    lams = np.asarray(lams, dtype=float)
    y0 = np.broadcast_to(np.asarray(init[0], dtype=float), lams.shape).copy()
    v0 = np.broadcast_to(np.asarray(init[1], dtype=float), lams.shape).copy()

    integration_sweeps.labels(side=side).inc()
    with np.errstate(over="ignore", invalid="ignore"):
        y, v = _rk4(y0, v0, (to_x - from_x) / steps, lams, q_nodes.tolist(), q_mid.tolist(),
                    config.p_of(side), record=False, guard=False)
        bad = ~(np.abs(y) <= DIVERGENCE_LIMIT) | ~(np.abs(v) <= DIVERGENCE_LIMIT)
    y = np.where(bad, np.nan, y)
    v = np.where(bad, np.nan, v)
    return y, v


def eval_path(path: SolutionPath, x: Union[float, np.ndarray]):
    lo, hi = path.span
    tol = SPAN_TOLERANCE * (hi - lo)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < lo - tol) or np.any(xa > hi + tol):
        bad = float(xa[(xa < lo - tol) | (xa > hi + tol)].flat[0]) if xa.ndim else float(xa)
        raise OutOfSpanError(bad, lo, hi)
    xc = np.clip(xa, lo, hi)
    y = path._y_spline(xc)
    yp = path._yp_spline(xc)
    # reproduce stored node values exactly
    idx = np.clip(np.searchsorted(path.xs, xc), 0, path.steps)
    hit = path.xs[idx] == xc
    y = np.where(hit, path.y[idx], y)
    yp = np.where(hit, path.yp[idx], yp)
    if xa.ndim == 0:
        return float(y), float(yp)
    return y, yp


def wronskian(f: SolutionPath, g: SolutionPath, x: float) -> float:
    if f.side != g.side or f.lam != g.lam:
        raise PathMismatchError(
            f"Wronskian needs paths on one side at one λ, got ({f.side}, {f.lam!r}) and ({g.side}, {g.lam!r})")
    fy, fyp = eval_path(f, x)
    gy, gyp = eval_path(g, x)
    return fy * gyp - fyp * gy


def wronskian_drift(f: SolutionPath, g: SolutionPath) -> Tuple[float, float]:
    """Spread of W(f, g; ·) over the nodes and the magnitude it is measured against."""
    if f.side != g.side or f.lam != g.lam or len(f.xs) != len(g.xs):
        raise PathMismatchError("Wronskian drift needs paths on one node grid at one λ")
    terms = (f.y * g.yp, f.yp * g.y)
    w = terms[0] - terms[1]
    scale = max(1.0, float(np.max(np.abs(w))), float(np.max(np.abs(terms[0]) + np.abs(terms[1]))))
    return float(np.max(w) - np.min(w)), scale


def ode_residual(path: SolutionPath) -> float:
    """Max |-p D²y + (q - λ) y| over interior nodes, D² the centered second difference."""
    h = (path.xs[-1] - path.xs[0]) / path.steps
    d2 = (path.y[2:] - 2.0 * path.y[1:-1] + path.y[:-2]) / (h * h)
    return float(np.max(np.abs(path.p * (-d2 + path.g[1:-1] * path.y[1:-1]))))
