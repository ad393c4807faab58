from dataclasses import dataclass, field
from typing import TYPE_CHECKING, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from pydantic import BaseModel
from scipy.integrate import simpson

from .errors import ConfigurationError
from .greens import HVector, Piecewise
from .problem import ProblemConfig

if TYPE_CHECKING:
    from .spectrum import Eigenpair

logger = structlog.get_logger()


def inner_product_H1(config: ProblemConfig, f: Piecewise, g: Piecewise) -> float:
    """[f, g]_H1 = (Δ12/p-) ∫_a^c f g + (Δ34/p+) ∫_c^b f g."""
    m = config.minors
    total = 0.0
    for fs, gs, weight in ((f.left, g.left, m.d12 / config.p.minus),
                           (f.right, g.right, m.d34 / config.p.plus)):
        gs = gs.on(fs.xs)
        total += weight * simpson(fs.y * gs.y, x=fs.xs)
    return float(total)


def boundary_weights(config: ProblemConfig) -> Tuple[float, float]:
    """Weights of f1 g1 and f2 g2 in [F, G]_H; zero for a disabled component."""
    m = config.minors
    weights = []
    for side, theta, delta, p in (("left", config.theta1, m.d12, config.p.minus),
                                  ("right", config.theta2, m.d34, config.p.plus)):
        if not config.component_active(side):
            weights.append(0.0)
        elif theta == 0:
            raise ConfigurationError(f"{side} boundary component is active but θ = 0", field=f"boundary_{side}")
        else:
            weights.append(delta / (p * theta))
    return weights[0], weights[1]


def inner_product_H(config: ProblemConfig, F: HVector, G: HVector) -> float:
    w1, w2 = boundary_weights(config)
    return inner_product_H1(config, F.function, G.function) + w1 * F.f1 * G.f1 + w2 * F.f2 * G.f2


def coefficients(config: ProblemConfig, pairs: Sequence["Eigenpair"], F: HVector,
                 n: Optional[int] = None) -> np.ndarray:
    """c_n = [F, Ψn]_H / [Ψn, Ψn]_H, where the divisor is the stored sign ±1."""
    n = len(pairs) if n is None else n
    if n > len(pairs):
        raise ValueError(f"{n} coefficients requested but only {len(pairs)} eigenpairs available")
    return np.array([pair.h_sign * inner_product_H(config, F, pair.vector) for pair in pairs[:n]])


def indefinite(config: ProblemConfig) -> bool:
    return any(config.component_active(side) and theta < 0
               for side, theta in (("left", config.theta1), ("right", config.theta2)))


class ParsevalReport(BaseModel):
    norm_sq: float
    partial_sums: List[float]
    deficit: float
    indefinite: bool


def parseval_report(config: ProblemConfig, pairs: Sequence["Eigenpair"], F: HVector,
                    n: Optional[int] = None) -> ParsevalReport:
    c = coefficients(config, pairs, F, n)
    norm_sq = inner_product_H(config, F, F)
    signs = np.array([pair.h_sign for pair in pairs[:len(c)]])
    # Σ c_n² [Ψn, Ψn]_H; monotone only for a definite form
    partial = np.cumsum(signs * c ** 2)
    flagged = indefinite(config)
    if flagged:
        logger.warning("Modified inner product is indefinite; partial sums are signed and need not increase",
                       theta1=config.theta1, theta2=config.theta2, negative_modes=int(np.sum(signs < 0)))
    last = float(partial[-1]) if len(partial) else 0.0
    deficit = 1.0 - last / norm_sq if norm_sq else 0.0
    return ParsevalReport(norm_sq=norm_sq, partial_sums=partial.tolist(), deficit=deficit, indefinite=flagged)


def log_spaced_terms(n: int) -> List[int]:
    """Term counts 1..n, roughly log-spaced, always including 1 and n."""
    if n < 1:
        return []
    ks = np.unique(np.round(np.geomspace(1, n, num=min(n, 12))).astype(int))
    return sorted(set(ks.tolist()) | {1, n})


def evaluation_grid(config: ProblemConfig, grid_m: int) -> np.ndarray:
    d = config.domain
    xs = np.linspace(d.a, d.b, grid_m)
    return xs[xs != d.c]


def expansion_error(config: ProblemConfig, pairs: Sequence["Eigenpair"], F: HVector, n: int, grid_m: int,
                    ks: Optional[Sequence[int]] = None) -> List[Tuple[int, float]]:
    """Sup-norm error of the k-term expansion of f on grid_m points, for each k in ks."""
    ks = log_spaced_terms(n) if ks is None else list(ks)
    c = coefficients(config, pairs, F, n)
    xs = evaluation_grid(config, grid_m)
    target = F.function.evaluate(xs)[0]
    basis = np.array([pair.function.evaluate(xs)[0] for pair in pairs[:n]])
    partial = np.cumsum(c[:, None] * basis, axis=0)
    return [(k, float(np.max(np.abs(target - partial[k - 1])))) for k in ks]


@dataclass
class PartialSumRecord:
    terms: int
    energy_ratio: float
    sup_error: float


@dataclass
class SpectralDecomposition:
    pairs: List["Eigenpair"]
    coefficients: np.ndarray
    records: List[PartialSumRecord] = field(default_factory=list)
    parseval: Optional[ParsevalReport] = None


def decompose(config: ProblemConfig, pairs: Sequence["Eigenpair"], F: HVector, n: Optional[int] = None,
              grid_m: int = 401) -> SpectralDecomposition:
    n = len(pairs) if n is None else n
    report = parseval_report(config, pairs, F, n)
    errors_by_k = dict(expansion_error(config, pairs, F, n, grid_m, ks=range(1, n + 1)))
    records = [
        PartialSumRecord(terms=k, energy_ratio=report.partial_sums[k - 1] / report.norm_sq if report.norm_sq else 0.0,
                         sup_error=errors_by_k[k])
        for k in range(1, n + 1)
    ]
    return SpectralDecomposition(pairs=list(pairs[:n]), coefficients=coefficients(config, pairs, F, n),
                                 records=records, parseval=report)
