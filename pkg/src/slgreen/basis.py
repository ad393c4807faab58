from dataclasses import dataclass
from typing import NamedTuple, Tuple

import numpy as np
import structlog
from tenacity import RetryCallState, Retrying, retry_if_exception_type, stop_after_attempt

from .errors import InconsistentSystemError, SingularTransmissionError
from .integrate import SolutionPath, eval_path, integrate, propagate
from .metrics import errors, omega_evaluations, resolution_retries
from .problem import Minors, ProblemConfig

logger = structlog.get_logger()

RELATION_TOLERANCE = 1e-5
RETRY_ATTEMPTS = 3


def initial_left(config: ProblemConfig, lam):
    bl = config.boundary_left
    return bl.alpha11 - lam * bl.alpha11p, bl.alpha10 - lam * bl.alpha10p


def initial_right(config: ProblemConfig, lam):
    br = config.boundary_right
    return br.alpha21 + lam * br.alpha21p, br.alpha20 + lam * br.alpha20p


def jump_forward(m: Minors, uv):
    """Carry (y, y') from c- to c+."""
    if m.d12 == 0:
        raise SingularTransmissionError("left")
    u, v = uv
    return (m.d23 * u + m.d24 * v) / m.d12, -(m.d13 * u + m.d14 * v) / m.d12


def jump_backward(m: Minors, uv):
    """Carry (y, y') from c+ to c-; inverse of jump_forward."""
    if m.d34 == 0:
        raise SingularTransmissionError("right")
    u, v = uv
    return -(m.d14 * u + m.d24 * v) / m.d34, (m.d13 * u + m.d23 * v) / m.d34


@dataclass(frozen=True, eq=False)
class FundamentalSystem:
    lam: float
    config: ProblemConfig
    phi_minus: SolutionPath
    phi_plus: SolutionPath
    psi_minus: SolutionPath
    psi_plus: SolutionPath
    omega_minus: float
    omega_plus: float
    omega: float
    # magnitude of the Wronskian terms at a; consistency and at-eigenvalue checks are relative to it
    scale: float

    @property
    def relation_mismatch(self) -> float:
        m = self.config.minors
        return abs(m.d34 * self.omega_minus - m.d12 * self.omega_plus) / self.scale

    def _piecewise(self, minus: SolutionPath, plus: SolutionPath, x):
        xa = np.asarray(x, dtype=float)
        c = self.config.domain.c
        left = xa <= c
        if xa.ndim == 0:
            return eval_path(minus if left else plus, float(xa))
        y = np.empty_like(xa)
        yp = np.empty_like(xa)
        if np.any(left):
            y[left], yp[left] = eval_path(minus, xa[left])
        if np.any(~left):
            y[~left], yp[~left] = eval_path(plus, xa[~left])
        return y, yp

    def phi(self, x):
        """Φ: φ- on [a, c], φ+ on (c, b]."""
        return self._piecewise(self.phi_minus, self.phi_plus, x)

    def psi(self, x):
        """Ψ: ψ- on [a, c], ψ+ on (c, b]."""
        return self._piecewise(self.psi_minus, self.psi_plus, x)


def fundamental_system(config: ProblemConfig, lam: float) -> FundamentalSystem:
    d = config.domain
    m = config.minors
    phi_minus = integrate(config, "left", lam, d.a, d.c, initial_left(config, lam))
    phi_plus = integrate(config, "right", lam, d.c, d.b,
                         jump_forward(m, (phi_minus.y[-1], phi_minus.yp[-1])))
    psi_plus = integrate(config, "right", lam, d.b, d.c, initial_right(config, lam))
    psi_minus = integrate(config, "left", lam, d.c, d.a,
                          jump_backward(m, (psi_plus.y[0], psi_plus.yp[0])))

    omega_minus = phi_minus.y[0] * psi_minus.yp[0] - phi_minus.yp[0] * psi_minus.y[0]
    omega_plus = phi_plus.y[-1] * psi_plus.yp[-1] - phi_plus.yp[-1] * psi_plus.y[-1]
    scale = max(1.0, abs(m.d34) * (abs(phi_minus.y[0] * psi_minus.yp[0]) + abs(phi_minus.yp[0] * psi_minus.y[0])))
    omega_evaluations.inc()
    fs = FundamentalSystem(
        lam=float(lam), config=config,
        phi_minus=phi_minus, phi_plus=phi_plus, psi_minus=psi_minus, psi_plus=psi_plus,
        omega_minus=float(omega_minus), omega_plus=float(omega_plus),
        omega=float(m.d34 * omega_minus), scale=float(scale),
    )
    if fs.relation_mismatch > RELATION_TOLERANCE:
        errors.labels(stage="fundamental_system").inc()
        raise InconsistentSystemError(lam, fs.relation_mismatch)
    return fs


def _log_retry(retry_state: RetryCallState):
    resolution_retries.inc()
    logger.warning("Characteristic function inconsistent, doubling resolution",
                   attempt=retry_state.attempt_number, error=str(retry_state.outcome.exception()))


def refined_fundamental_system(config: ProblemConfig, lam: float) -> FundamentalSystem:
    """fundamental_system, retried at doubled steps_per_side while the ω relation fails."""
    for attempt in Retrying(stop=stop_after_attempt(RETRY_ATTEMPTS),
                            retry=retry_if_exception_type(InconsistentSystemError),
                            before_sleep=_log_retry, reraise=True):
        with attempt:
            steps = config.steps * 2 ** (attempt.retry_state.attempt_number - 1)
            return fundamental_system(config if steps == config.steps else config.with_steps(steps), lam)


def omega_batch(config: ProblemConfig, lams) -> np.ndarray:
    """ω on many λ at once; diverged entries are NaN."""
    lams = np.asarray(lams, dtype=float)
    d = config.domain
    m = config.minors
    # ψ+ from b to c, across the interface, then ψ- from c to a
    yb, vb = propagate(config, "right", lams, d.b, d.c, initial_right(config, lams))
    ya, va = propagate(config, "left", lams, d.c, d.a, jump_backward(m, (yb, vb)))
    phi_a, phi_pa = initial_left(config, lams)
    omega_evaluations.inc(len(lams))
    return m.d34 * (phi_a * va - phi_pa * ya)


def omega(config: ProblemConfig, lam: float) -> float:
    """ω(λ) = Δ34 W[φ-, ψ-](a); only ψ needs integrating since φ-(a) is known."""
    d = config.domain
    m = config.minors
    psi_plus = integrate(config, "right", lam, d.b, d.c, initial_right(config, lam))
    psi_minus = integrate(config, "left", lam, d.c, d.a, jump_backward(m, (psi_plus.y[0], psi_plus.yp[0])))
    phi_a, phi_pa = initial_left(config, lam)
    omega_evaluations.inc()
    return float(m.d34 * (phi_a * psi_minus.yp[0] - phi_pa * psi_minus.y[0]))


class TransmissionResidual(NamedTuple):
    jump: float
    printed: float
    swapped: float


def transmission_residual(config: ProblemConfig, left_traces: Tuple[float, float],
                          right_traces: Tuple[float, float]) -> TransmissionResidual:
    """
    How well one-sided traces at c satisfy the interface relations.

    `jump` compares the c+ traces with jump_forward of the c- traces.
    `printed` applies the rows of T to (y(c-), y'(c-), y(c+), y'(c+));
    `swapped` applies them with the c- and c+ traces exchanged, which is
    the form the jump maps satisfy.
    """
    beta = np.asarray(config.transmission.beta, dtype=float)
    left = np.asarray(left_traces, dtype=float)
    right = np.asarray(right_traces, dtype=float)
    mapped = np.asarray(jump_forward(config.minors, left))
    return TransmissionResidual(
        jump=float(np.linalg.norm(right - mapped)),
        printed=float(np.linalg.norm(beta @ np.concatenate([left, right]))),
        swapped=float(np.linalg.norm(beta @ np.concatenate([right, left]))),
    )


def boundary_functionals(config: ProblemConfig, fa, fpa, fb, fpb):
    """(B_a, B'_a, B_b, B'_b) of a function with traces f(a), f'(a), f(b), f'(b)."""
    bl, br = config.boundary_left, config.boundary_right
    return (bl.alpha10 * fa - bl.alpha11 * fpa,
            bl.alpha10p * fa - bl.alpha11p * fpa,
            br.alpha20 * fb - br.alpha21 * fpb,
            br.alpha20p * fb - br.alpha21p * fpb)
