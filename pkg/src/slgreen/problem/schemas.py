import hashlib
import json
from pathlib import Path
from typing import Literal, NamedTuple, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from ..errors import ConfigurationError
from .expression import ExprAST, parse_expression

Side = Literal["left", "right"]
Row = Tuple[float, float, float, float]


class Minors(NamedTuple):
    d12: float
    d13: float
    d14: float
    d23: float
    d24: float
    d34: float

    def as_dict(self) -> dict:
        return {f"delta{name[1:]}": value for name, value in self._asdict().items()}


def minors(beta) -> Minors:
    """2x2 minors of the transmission matrix, Δij = T[1,i]T[2,j] − T[1,j]T[2,i]."""
    (r0, r1) = beta

    def det(i: int, j: int) -> float:
        return r0[i] * r1[j] - r0[j] * r1[i]

    return Minors(det(0, 1), det(0, 2), det(0, 3), det(1, 2), det(1, 3), det(2, 3))


class _Frozen(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class DomainSpec(_Frozen):
    a: float
    c: float
    b: float


class SideCoefficients(_Frozen):
    minus: float
    plus: float


class PotentialSpec(_Frozen):
    minus: str
    plus: str

    @field_validator("minus", "plus")
    @classmethod
    def _parses(cls, source: str) -> str:
        try:
            parse_expression(source)
        except ConfigurationError as e:
            raise ValueError(e.message) from e
        return source


class LeftBoundary(_Frozen):
    alpha10: float
    alpha11: float
    alpha10p: float
    alpha11p: float

    @property
    def theta(self) -> float:
        return self.alpha11 * self.alpha10p - self.alpha10 * self.alpha11p

    @property
    def degenerate(self) -> bool:
        return self.alpha10p == 0.0 and self.alpha11p == 0.0

    @property
    def all_zero(self) -> bool:
        return self.degenerate and self.alpha10 == 0.0 and self.alpha11 == 0.0


class RightBoundary(_Frozen):
    alpha20: float
    alpha21: float
    alpha20p: float
    alpha21p: float

    @property
    def theta(self) -> float:
        return self.alpha21 * self.alpha20p - self.alpha20 * self.alpha21p

    @property
    def degenerate(self) -> bool:
        return self.alpha20p == 0.0 and self.alpha21p == 0.0

    @property
    def all_zero(self) -> bool:
        return self.degenerate and self.alpha20 == 0.0 and self.alpha21 == 0.0


class TransmissionSpec(_Frozen):
    beta: Tuple[Row, Row]

    @property
    def minors(self) -> Minors:
        return minors(self.beta)


class IntegratorSettings(_Frozen):
    steps_per_side: int = Field(default=2000, gt=0)

    @field_validator("steps_per_side")
    @classmethod
    def _even(cls, n: int) -> int:
        if n % 2:
            raise ValueError("steps_per_side must be even")
        return n


class ProblemConfig(_Frozen):
    domain: DomainSpec
    p: SideCoefficients
    q: PotentialSpec
    boundary_left: LeftBoundary
    boundary_right: RightBoundary
    transmission: TransmissionSpec
    mode: Literal["strict", "lenient"] = "lenient"
    integrator: IntegratorSettings = IntegratorSettings()

    @property
    def minors(self) -> Minors:
        return self.transmission.minors

    @property
    def theta1(self) -> float:
        return self.boundary_left.theta

    @property
    def theta2(self) -> float:
        return self.boundary_right.theta

    @property
    def steps(self) -> int:
        return self.integrator.steps_per_side

    def interval(self, side: Side) -> Tuple[float, float]:
        d = self.domain
        return (d.a, d.c) if side == "left" else (d.c, d.b)

    def p_of(self, side: Side) -> float:
        return self.p.minus if side == "left" else self.p.plus

    def q_of(self, side: Side) -> ExprAST:
        return parse_expression(self.q.minus if side == "left" else self.q.plus)

    def component_active(self, side: Side) -> bool:
        """Whether the boundary entry of H on this side is in play."""
        boundary = self.boundary_left if side == "left" else self.boundary_right
        return not boundary.degenerate

    def with_steps(self, steps: int) -> "ProblemConfig":
        return self.model_copy(update={"integrator": IntegratorSettings(steps_per_side=steps)})

    def digest(self) -> str:
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _field_path(error: dict) -> str:
    return ".".join(str(part) for part in error["loc"]) or "<root>"


def config_from_dict(data: dict) -> ProblemConfig:
    try:
        return ProblemConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigurationError(first["msg"], field=_field_path(first)) from e


def load_config(path: Union[str, Path]) -> ProblemConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigurationError(f"cannot read config: {e.strerror}", field=str(path)) from e
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from e
    if not isinstance(data, dict):
        raise ConfigurationError("config must be a JSON object")
    return config_from_dict(data)
