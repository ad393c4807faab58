"""
Green's function, resolvent and the carriers for elements of H.

The kernel is G(x, y; λ) = Φ(min(x, y)) Ψ(max(x, y)) / ω(λ), with Φ, Ψ the
piecewise basic solutions. `resolve` solves (λ - ℓ) Y = u together with
the two boundary rows λB'_a[Y] - B_a[Y] = u1 and -λB'_b[Y] - B_b[Y] = u2.
"""
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple, Union

import numpy as np
import structlog
from pydantic import BaseModel
from scipy.integrate import cumulative_simpson, simpson
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .basis import FundamentalSystem, boundary_functionals, jump_forward, omega, refined_fundamental_system
from .errors import AtEigenvalueError, QuadratureError, SLGreenError
from .integrate import SolutionPath
from .metrics import errors
from .problem import ExprAST, ProblemConfig, eval_expression, parse_expression

logger = structlog.get_logger()

AT_EIGENVALUE_TOLERANCE = 1e-10
EIGENVALUE_GUARD = 1e-6
Expression = Union[str, ExprAST]


def _as_ast(expr: Expression) -> ExprAST:
    return parse_expression(expr) if isinstance(expr, str) else expr


# --- H = L2[a,c) ⊕ L2(c,b] ⊕ ℂ² carriers ---
@dataclass(frozen=True, eq=False)
class Samples:
    """Function samples (y, y') on an ascending grid of one subinterval."""

    xs: np.ndarray
    y: np.ndarray
    yp: np.ndarray

    @cached_property
    def _spline(self) -> CubicHermiteSpline:
        return CubicHermiteSpline(self.xs, self.y, self.yp)

    def evaluate(self, x):
        s = self._spline
        x = np.clip(x, self.xs[0], self.xs[-1])
        return s(x), s(x, 1)

    def on(self, xs: np.ndarray) -> "Samples":
        if len(xs) == len(self.xs) and np.array_equal(xs, self.xs):
            return self
        y, yp = self.evaluate(xs)
        return Samples(xs, y, yp)

    @classmethod
    def from_path(cls, path: SolutionPath) -> "Samples":
        return cls(path.xs, path.y, path.yp)


@dataclass(frozen=True, eq=False)
class Piecewise:
    left: Samples
    right: Samples

    @property
    def c(self) -> float:
        return float(self.left.xs[-1])

    def evaluate(self, x):
        """(y, y') at x; x = c gives the c- trace."""
        xa = np.asarray(x, dtype=float)
        on_left = xa <= self.c
        ly, lyp = self.left.evaluate(xa)
        ry, ryp = self.right.evaluate(xa)
        y, yp = np.where(on_left, ly, ry), np.where(on_left, lyp, ryp)
        return (float(y), float(yp)) if xa.ndim == 0 else (y, yp)

    def traces(self) -> Tuple[float, float, float, float]:
        """f(a), f'(a), f(b), f'(b)."""
        return (float(self.left.y[0]), float(self.left.yp[0]),
                float(self.right.y[-1]), float(self.right.yp[-1]))

    def combine(self, other: "Piecewise", s: float, t: float) -> "Piecewise":
        """s·self + t·other on self's grids."""
        ol, orr = other.left.on(self.left.xs), other.right.on(self.right.xs)
        return Piecewise(
            Samples(self.left.xs, s * self.left.y + t * ol.y, s * self.left.yp + t * ol.yp),
            Samples(self.right.xs, s * self.right.y + t * orr.y, s * self.right.yp + t * orr.yp),
        )

    @classmethod
    def from_paths(cls, minus: SolutionPath, plus: SolutionPath) -> "Piecewise":
        return cls(Samples.from_path(minus), Samples.from_path(plus))

    @classmethod
    def from_expressions(cls, config: ProblemConfig, minus: Expression, plus: Expression) -> "Piecewise":
        sides = []
        for side, expr in (("left", minus), ("right", plus)):
            lo, hi = config.interval(side)
            xs = np.linspace(lo, hi, config.steps + 1)
            y = np.asarray(eval_expression(_as_ast(expr), xs), dtype=float)
            sides.append(Samples(xs, y, np.gradient(y, xs, edge_order=2)))
        return cls(*sides)


@dataclass(frozen=True, eq=False)
class HVector:
    """(f, f1, f2); boundary entries on a disabled side are ignored by inner products."""

    function: Piecewise
    f1: float
    f2: float

    def __add__(self, other: "HVector") -> "HVector":
        return HVector(self.function.combine(other.function, 1.0, 1.0), self.f1 + other.f1, self.f2 + other.f2)

    def __mul__(self, k: float) -> "HVector":
        return HVector(self.function.combine(self.function, k, 0.0), k * self.f1, k * self.f2)

    __rmul__ = __mul__

    @classmethod
    def from_function(cls, config: ProblemConfig, function: Piecewise, raw: bool = False) -> "HVector":
        """Boundary entries taken from the traces (f1 = B'_a[f], f2 = -B'_b[f]) unless `raw`."""
        if raw:
            return cls(function, 0.0, 0.0)
        _, bpa, _, bpb = boundary_functionals(config, *function.traces())
        return cls(function, bpa, -bpb)


# --- kernel ---
@dataclass(frozen=True, eq=False)
class GreenGrid:
    lam: float
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray


def _nearest_eigenvalue(fs: FundamentalSystem) -> float:
    config, lam = fs.config, fs.lam
    step = 1e-3 * max(1.0, abs(lam))
    try:
        lo, hi = omega(config, lam - step), omega(config, lam + step)
        if lo * hi < 0:
            return brentq(lambda t: omega(config, t), lam - step, lam + step, xtol=1e-12)
    except (SLGreenError, ValueError) as e:
        logger.warning("Could not refine nearby eigenvalue", lam=lam, error=str(e))
    return lam


def _at_eigenvalue(fs: FundamentalSystem) -> AtEigenvalueError:
    errors.labels(stage="greens").inc()
    return AtEigenvalueError(fs.lam, _nearest_eigenvalue(fs))


def ensure_regular(fs: FundamentalSystem):
    """Reject λ within 1e-6 of an eigenvalue."""
    if abs(fs.omega) <= AT_EIGENVALUE_TOLERANCE * fs.scale:
        raise _at_eigenvalue(fs)
    config, lam = fs.config, fs.lam
    ts = (lam - EIGENVALUE_GUARD, lam, lam + EIGENVALUE_GUARD)
    ws = [omega(config, t) for t in ts]
    for (t0, w0), (t1, w1) in zip(zip(ts, ws), zip(ts[1:], ws[1:])):
        if w0 * w1 > 0:
            continue
        if w0 == 0 or w1 == 0:
            ev = t0 if w0 == 0 else t1
        else:
            ev = brentq(lambda t: omega(config, t), t0, t1, xtol=1e-14)
        errors.labels(stage="greens").inc()
        raise AtEigenvalueError(lam, ev)


def green_eval(fs: FundamentalSystem, x: float, y: float) -> float:
    if abs(fs.omega) <= AT_EIGENVALUE_TOLERANCE * fs.scale:
        raise _at_eigenvalue(fs)
    lo, hi = min(x, y), max(x, y)
    return fs.phi(lo)[0] * fs.psi(hi)[0] / fs.omega


def _kernel_matrix(fs: FundamentalSystem, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    phi_x, psi_x = fs.phi(xs)[0], fs.psi(xs)[0]
    phi_y, psi_y = fs.phi(ys)[0], fs.psi(ys)[0]
    below = xs[:, None] <= ys[None, :]
    return np.where(below, phi_x[:, None] * psi_y[None, :], phi_y[None, :] * psi_x[:, None]) / fs.omega


def band_grid(a: float, b: float, c: float, n: int, eps_c: float) -> np.ndarray:
    """n+1 uniform points on [a, b] with points inside the band |x - c| < eps_c moved to its edge."""
    xs = np.linspace(a, b, n + 1)
    near = np.abs(xs - c) < eps_c
    return np.where(near, np.where(xs <= c, c - eps_c, c + eps_c), xs)


def green_grid(config: ProblemConfig, lam: float, nx: int, ny: int, eps_c: Optional[float] = None) -> GreenGrid:
    if nx < 8 or ny < 8:
        raise ValueError("nx and ny must be at least 8")
    d = config.domain
    eps_c = (d.b - d.a) / 1000 if eps_c is None else eps_c
    fs = refined_fundamental_system(config, lam)
    ensure_regular(fs)
    xs = band_grid(d.a, d.b, d.c, nx, eps_c)
    ys = band_grid(d.a, d.b, d.c, ny, eps_c)
    logger.info("Filling Green's function grid", lam=lam, nx=nx, ny=ny, eps_c=eps_c)
    return GreenGrid(lam=float(lam), xs=xs, ys=ys, values=_kernel_matrix(fs, xs, ys))


# --- resolvent ---
def _check_even(fs: FundamentalSystem):
    if fs.phi_minus.steps % 2 or fs.phi_plus.steps % 2:
        raise QuadratureError("Simpson quadrature needs an even number of steps per side")


def resolve(config: ProblemConfig, lam: float, u_minus: Expression, u_plus: Expression,
            u1: float, u2: float) -> HVector:
    fs = refined_fundamental_system(config, lam)
    ensure_regular(fs)
    _check_even(fs)
    m = config.minors
    w = fs.omega
    pm, pp = config.p.minus, config.p.plus

    lx, rx = fs.phi_minus.xs, fs.phi_plus.xs
    ul = np.asarray(eval_expression(_as_ast(u_minus), lx), dtype=float)
    ur = np.asarray(eval_expression(_as_ast(u_plus), rx), dtype=float)
    phl, psl = fs.phi_minus, fs.psi_minus
    phr, psr = fs.phi_plus, fs.psi_plus

    # ∫_a^x φ- u and ∫_x^c ψ- u
    a_int = cumulative_simpson(phl.y * ul, x=lx, initial=0.0)
    b_run = cumulative_simpson(psl.y * ul, x=lx, initial=0.0)
    b_int = b_run[-1] - b_run
    # ∫_c^x φ+ u and ∫_x^b ψ+ u
    c_int = cumulative_simpson(phr.y * ur, x=rx, initial=0.0)
    d_run = cumulative_simpson(psr.y * ur, x=rx, initial=0.0)
    d_int = d_run[-1] - d_run

    i_minus = simpson(phl.y * ul, x=lx) / pm
    i_plus = simpson(psr.y * ur, x=rx) / pp

    left_coef_phi = m.d34 / (pm * w) * b_int + m.d12 / w * (i_plus - u2)
    left_coef_psi = m.d34 / (pm * w) * a_int + m.d34 * u1 / w
    right_coef_phi = m.d12 / (pp * w) * d_int - m.d12 * u2 / w
    right_coef_psi = m.d12 / (pp * w) * c_int + m.d34 / w * (i_minus + u1)

    left = Samples(lx, left_coef_phi * phl.y + left_coef_psi * psl.y,
                   left_coef_phi * phl.yp + left_coef_psi * psl.yp)
    right = Samples(rx, right_coef_phi * phr.y + right_coef_psi * psr.y,
                    right_coef_phi * phr.yp + right_coef_psi * psr.yp)
    logger.info("Resolvent applied", lam=lam, omega=w, u1=u1, u2=u2)
    return HVector.from_function(config, Piecewise(left, right))


class ResidualReport(BaseModel):
    lam: float
    ode: float
    left_boundary: float
    right_boundary: float
    transmission: float

    @property
    def worst(self) -> float:
        return max(self.ode, self.left_boundary, self.right_boundary, self.transmission)


def _ode_residual(side: Samples, lam: float, p: float, q: ExprAST, u: ExprAST) -> float:
    xs, y = side.xs, side.y
    h = xs[1] - xs[0]
    d2 = (y[2:] - 2.0 * y[1:-1] + y[:-2]) / (h * h)
    inner = xs[1:-1]
    qv = np.asarray(eval_expression(q, inner), dtype=float)
    uv = np.asarray(eval_expression(u, inner), dtype=float)
    # (λ - ℓ) Y = λ Y + p Y'' - q Y
    return float(np.max(np.abs(lam * y[1:-1] + p * d2 - qv * y[1:-1] - uv)))


def verify_resolvent(config: ProblemConfig, lam: float, solution: HVector, u_minus: Expression,
                     u_plus: Expression, u1: float, u2: float) -> ResidualReport:
    f = solution.function
    ba, bpa, bb, bpb = boundary_functionals(config, *f.traces())
    left_trace = (float(f.left.y[-1]), float(f.left.yp[-1]))
    right_trace = (float(f.right.y[0]), float(f.right.yp[0]))
    mapped = jump_forward(config.minors, left_trace)
    return ResidualReport(
        lam=lam,
        ode=max(_ode_residual(f.left, lam, config.p.minus, config.q_of("left"), _as_ast(u_minus)),
                _ode_residual(f.right, lam, config.p.plus, config.q_of("right"), _as_ast(u_plus))),
        left_boundary=abs(lam * bpa - ba - u1),
        right_boundary=abs(-lam * bpb - bb - u2),
        transmission=float(np.hypot(right_trace[0] - mapped[0], right_trace[1] - mapped[1])),
    )


def _side_integral(x: float, phi_path: SolutionPath, psi_path: SolutionPath, u: ExprAST,
                   phi_x: float, psi_x: float) -> float:
    """∫ G(x, t) u(t) dt over one subinterval (without ω), split at x."""
    grid = phi_path.xs
    # nodes closer than h/4 to the split point are dropped to keep Simpson's weights tame
    gap = 0.25 * (grid[1] - grid[0])
    total = 0.0
    if x > grid[0]:
        t = np.append(grid[(grid < x - gap) | (grid == grid[0])], x)
        total += psi_x * simpson(phi_path.evaluate(t)[0] * eval_expression(u, t), x=t)
    if x < grid[-1]:
        t = np.insert(grid[(grid > x + gap) | (grid == grid[-1])], 0, x)
        total += phi_x * simpson(psi_path.evaluate(t)[0] * eval_expression(u, t), x=t)
    return total


def kernel_apply(config: ProblemConfig, lam: float, u_minus: Expression, u_plus: Expression,
                 u1: float, u2: float, xs) -> np.ndarray:
    """
    ∫ G(x, y) u(y) w(y) dy + Δ34 u1 Ψ(x)/ω - Δ12 u2 Φ(x)/ω at the points xs, with
    w = Δ34/p- on [a, c) and Δ12/p+ on (c, b].
    """
    fs = refined_fundamental_system(config, lam)
    ensure_regular(fs)
    m = config.minors
    c = config.domain.c
    um, up = _as_ast(u_minus), _as_ast(u_plus)
    out = []
    for x in np.atleast_1d(np.asarray(xs, dtype=float)):
        phi_x, psi_x = fs.phi(x)[0], fs.psi(x)[0]
        left = _side_integral(min(x, c), fs.phi_minus, fs.psi_minus, um, phi_x, psi_x)
        right = _side_integral(max(x, c), fs.phi_plus, fs.psi_plus, up, phi_x, psi_x)
        total = m.d34 / config.p.minus * left + m.d12 / config.p.plus * right
        out.append((total + m.d34 * u1 * psi_x - m.d12 * u2 * phi_x) / fs.omega)
    return np.asarray(out)
