"""
Eigenvalues as real zeros of ω(λ), normalised eigenfunctions, and the
orthogonality diagnostics.
"""
import math
from dataclasses import dataclass
from typing import List, Literal, Sequence, Tuple

import numpy as np
import structlog
from pydantic import BaseModel
from scipy.optimize import brentq, minimize_scalar

from .basis import boundary_functionals, omega, omega_batch, refined_fundamental_system
from .errors import DegenerateEigenfunctionError, DivergedSolutionError, SLGreenError
from .expansion import inner_product_H
from .greens import HVector, Piecewise
from .metrics import errors, refined_roots, skipped_cells
from .problem import ProblemConfig

__all__ = [
    "Eigenvalue", "Eigenpair", "GramReport", "boundary_functionals", "scan", "eigenpair",
    "eigenpairs", "orthogonality_check", "omega_derivative",
]

logger = structlog.get_logger()

Flag = Literal["simple", "suspect_multiple"]

SUSPECT_RATIO = 1e-3
SIMPLE_DERIVATIVE = 1e-6


@dataclass(frozen=True)
class Eigenvalue:
    lam: float
    residual: float
    omega_derivative: float
    bracket: Tuple[float, float]
    flag: Flag = "simple"


@dataclass(frozen=True, eq=False)
class Eigenpair:
    eigenvalue: Eigenvalue
    function: Piecewise
    f1: float
    f2: float
    h_norm: float
    # sign of [F, F]_H before normalisation; -1 only for an indefinite form
    h_sign: float
    dependency_coefficient: float
    dependency_residual: float
    right_residual: float

    @property
    def lam(self) -> float:
        return self.eigenvalue.lam

    @property
    def vector(self) -> HVector:
        return HVector(self.function, self.f1, self.f2)


def omega_derivative(config: ProblemConfig, lam: float) -> float:
    h = 1e-6 * max(1.0, abs(lam))
    return (omega(config, lam + h) - omega(config, lam - h)) / (2.0 * h)


def _eigenvalue(config: ProblemConfig, lam: float, bracket: Tuple[float, float], flag: Flag = "simple") -> Eigenvalue:
    derivative = omega_derivative(config, lam)
    if flag == "simple" and abs(derivative) <= SIMPLE_DERIVATIVE:
        logger.warning("Refined root has vanishing derivative", lam=lam, omega_derivative=derivative)
        flag = "suspect_multiple"
    return Eigenvalue(lam=float(lam), residual=abs(omega(config, lam)), omega_derivative=float(derivative),
                      bracket=(float(bracket[0]), float(bracket[1])), flag=flag)


def _skip(lo: float, hi: float, reason: str):
    skipped_cells.inc()
    logger.warning("Skipping scan cell", lo=lo, hi=hi, reason=reason)


def scan(config: ProblemConfig, lam_lo: float, lam_hi: float, grid_n: int, tol: float) -> List[Eigenvalue]:
    if not lam_lo < lam_hi:
        raise ValueError("scan range must satisfy lo < hi")
    if grid_n < 2:
        raise ValueError("scan grid needs at least 2 cells")
    if tol <= 0:
        raise ValueError("scan tolerance must be positive")

    lams = np.linspace(lam_lo, lam_hi, grid_n + 1)
    w = omega_batch(config, lams)
    if np.all(np.isnan(w)):
        errors.labels(stage="scan").inc()
        raise DivergedSolutionError(lam_lo, "left and right")
    logger.info("Sampled characteristic function", lo=lam_lo, hi=lam_hi, cells=grid_n,
                diverged=int(np.count_nonzero(np.isnan(w))))

    def fn(t: float) -> float:
        return omega(config, t)

    found: List[Eigenvalue] = []
    for i in range(grid_n + 1):
        if w[i] == 0.0:
            found.append(_eigenvalue(config, lams[i], (lams[i], lams[i])))
    for i in range(grid_n):
        lo, hi = lams[i], lams[i + 1]
        if np.isnan(w[i]) or np.isnan(w[i + 1]):
            _skip(lo, hi, "diverged")
            continue
        if w[i] * w[i + 1] >= 0:
            continue
        try:
            root = brentq(fn, lo, hi, xtol=tol)
        except (SLGreenError, ValueError) as e:
            errors.labels(stage="scan").inc()
            _skip(lo, hi, str(e))
            continue
        refined_roots.inc()
        found.append(_eigenvalue(config, root, (lo, hi)))

    found.extend(_suspected_multiple(config, lams, w, tol))
    found.sort(key=lambda ev: ev.lam)
    unique: List[Eigenvalue] = []
    for ev in found:
        if unique and ev.lam - unique[-1].lam <= 10 * tol:
            continue
        unique.append(ev)
    logger.info("Scan finished", eigenvalues=len(unique))
    return unique


def _suspected_multiple(config: ProblemConfig, lams: np.ndarray, w: np.ndarray, tol: float) -> List[Eigenvalue]:
    """Interior local minima of |ω| far below its median that have no adjacent sign change."""
    mag = np.abs(w)
    finite = mag[np.isfinite(mag)]
    if not len(finite):
        return []
    threshold = SUSPECT_RATIO * float(np.median(finite))
    suspects = []
    for i in range(1, len(lams) - 1):
        window = w[i - 1:i + 2]
        if not np.all(np.isfinite(window)) or w[i] == 0.0:
            continue
        if not (mag[i] < mag[i - 1] and mag[i] < mag[i + 1] and mag[i] < threshold):
            continue
        if w[i - 1] * w[i] <= 0 or w[i] * w[i + 1] <= 0:
            continue
        try:
            res = minimize_scalar(lambda t: abs(omega(config, t)), bounds=(lams[i - 1], lams[i + 1]),
                                  method="bounded", options={"xatol": tol})
        except SLGreenError as e:
            _skip(lams[i - 1], lams[i + 1], str(e))
            continue
        logger.warning("Suspected multiple root", lam=float(res.x), omega=float(res.fun))
        suspects.append(_eigenvalue(config, res.x, (lams[i - 1], lams[i + 1]), flag="suspect_multiple"))
    return suspects


def _first_lobe_sign(ys: np.ndarray, yps: np.ndarray) -> float:
    """Sign of the eigenfunction at its first extremum from a."""
    changes = np.nonzero(np.sign(yps[1:]) * np.sign(yps[:-1]) < 0)[0]
    if len(changes):
        i = changes[0]
        value = ys[i] if abs(yps[i]) <= abs(yps[i + 1]) else ys[i + 1]
    else:
        value = ys[np.argmax(np.abs(ys))]
    return -1.0 if value < 0 else 1.0


def eigenpair(config: ProblemConfig, ev: Eigenvalue) -> Eigenpair:
    lam = ev.lam
    fs = refined_fundamental_system(config, lam)
    phi = np.concatenate([fs.phi_minus.y, fs.phi_plus.y])
    phip = np.concatenate([fs.phi_minus.yp, fs.phi_plus.yp])
    psi = np.concatenate([fs.psi_minus.y, fs.psi_plus.y])

    star = int(np.argmax(np.abs(phi)))
    if abs(phi[star]) < 1e-12 * max(1.0, abs(lam)):
        errors.labels(stage="eigenpair").inc()
        raise DegenerateEigenfunctionError(f"φ vanishes identically at λ={lam!r}")
    k = psi[star] / phi[star]
    psi_sup = float(np.max(np.abs(psi)))
    dependency = float(np.max(np.abs(psi - k * phi)) / psi_sup) if psi_sup else 0.0

    function = Piecewise.from_paths(fs.phi_minus, fs.phi_plus)
    vector = HVector.from_function(config, function)
    norm_sq = inner_product_H(config, vector, vector)
    if norm_sq == 0 or not math.isfinite(norm_sq):
        errors.labels(stage="eigenpair").inc()
        raise DegenerateEigenfunctionError(f"eigenfunction at λ={lam!r} has zero modified norm")
    h_sign = 1.0 if norm_sq > 0 else -1.0
    scale = _first_lobe_sign(phi, phip) / math.sqrt(abs(norm_sq))
    vector = vector * scale

    fa, fpa, fb, fpb = vector.function.traces()
    _, _, bb, bpb = boundary_functionals(config, fa, fpa, fb, fpb)
    if dependency > 1e-4:
        logger.warning("Basic solutions not dependent at eigenvalue", lam=lam, residual=dependency)
    return Eigenpair(
        eigenvalue=ev, function=vector.function, f1=vector.f1, f2=vector.f2,
        h_norm=abs(inner_product_H(config, vector, vector)), h_sign=h_sign,
        dependency_coefficient=float(k), dependency_residual=dependency,
        right_residual=abs(bb + lam * bpb),
    )


def eigenpairs(config: ProblemConfig, evs: Sequence[Eigenvalue]) -> List[Eigenpair]:
    return [eigenpair(config, ev) for ev in evs]


class GramReport(BaseModel):
    matrix: List[List[float]]
    max_off_diagonal: float
    max_diagonal_error: float


def orthogonality_check(config: ProblemConfig, pairs: Sequence[Eigenpair]) -> GramReport:
    vectors = [pair.vector for pair in pairs]
    n = len(vectors)
    gram = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            gram[i, j] = gram[j, i] = inner_product_H(config, vectors[i], vectors[j])
    off = gram - np.diag(np.diag(gram))
    return GramReport(
        matrix=gram.tolist(),
        max_off_diagonal=float(np.max(np.abs(off))) if n > 1 else 0.0,
        max_diagonal_error=float(np.max(np.abs(np.abs(np.diag(gram)) - 1.0))) if n else 0.0,
    )
