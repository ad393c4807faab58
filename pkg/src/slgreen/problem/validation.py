from typing import Dict, List, Literal, Optional

import structlog
from pydantic import BaseModel, computed_field

from ..errors import ConfigurationError, SingularTransmissionError
from .schemas import ProblemConfig

logger = structlog.get_logger()

Status = Literal["pass", "warn", "fail"]


class AssumptionCheck(BaseModel):
    name: str
    status: Status
    message: str = ""


class ValidationReport(BaseModel):
    mode: str
    theta1: float
    theta2: float
    minors: Dict[str, float]
    checks: List[AssumptionCheck]

    @property
    def failures(self) -> List[AssumptionCheck]:
        return [c for c in self.checks if c.status == "fail"]

    @property
    def warnings(self) -> List[AssumptionCheck]:
        return [c for c in self.checks if c.status == "warn"]

    @computed_field
    @property
    def ok(self) -> bool:
        return not self.failures


def _sign_check(name: str, value: float, strict: bool, message: str) -> AssumptionCheck:
    if value > 0:
        return AssumptionCheck(name=name, status="pass")
    return AssumptionCheck(name=name, status="fail" if strict else "warn", message=message)


def _theta_check(label: str, side: str, theta: float, degenerate: bool, strict: bool) -> AssumptionCheck:
    name = f"{label}>0"
    if degenerate:
        return AssumptionCheck(name=name, status="warn", message=f"{label} = 0 (degenerate {side} boundary mode)")
    if theta == 0:
        return AssumptionCheck(name=name, status="fail" if strict else "warn",
                               message=f"{label} = 0 with a λ-dependent {side} condition")
    return _sign_check(name, theta, strict, f"{label} = {theta:g} < 0")


def validate(config: ProblemConfig) -> ValidationReport:
    d = config.domain
    m = config.minors
    strict = config.mode == "strict"
    checks = [
        AssumptionCheck(name="a<c<b", status="pass" if d.a < d.c < d.b else "fail",
                        message="" if d.a < d.c < d.b else f"domain ordering violated: a={d.a:g}, c={d.c:g}, b={d.b:g}"),
        AssumptionCheck(name="p_minus>0", status="pass" if config.p.minus > 0 else "fail",
                        message="" if config.p.minus > 0 else f"p_minus = {config.p.minus:g} is not positive"),
        AssumptionCheck(name="p_plus>0", status="pass" if config.p.plus > 0 else "fail",
                        message="" if config.p.plus > 0 else f"p_plus = {config.p.plus:g} is not positive"),
    ]
    for side, boundary in (("left", config.boundary_left), ("right", config.boundary_right)):
        if boundary.all_zero:
            checks.append(AssumptionCheck(name=f"{side}_boundary_nonzero", status="fail",
                                          message=f"{side} boundary coefficients are all zero"))

    for label, side, value in (("delta12", "left", m.d12), ("delta34", "right", m.d34)):
        if value == 0:
            checks.append(AssumptionCheck(name=f"{label}!=0", status="fail",
                                          message=f"transmission matrix {side} block singular"))
        else:
            checks.append(AssumptionCheck(name=f"{label}!=0", status="pass"))
            checks.append(_sign_check(f"{label}>0", value, strict, f"{label} = {value:g} < 0"))

    checks.append(_theta_check("θ₁", "left", config.theta1, config.boundary_left.degenerate, strict))
    checks.append(_theta_check("θ₂", "right", config.theta2, config.boundary_right.degenerate, strict))

    return ValidationReport(mode=config.mode, theta1=config.theta1, theta2=config.theta2,
                            minors=m.as_dict(), checks=checks)


def require_valid(config: ProblemConfig, report: Optional[ValidationReport] = None) -> ValidationReport:
    """Validate and raise on the first hard failure; warnings are logged."""
    report = report or validate(config)
    for check in report.warnings:
        logger.warning("Assumption not met", check=check.name, detail=check.message, mode=report.mode)
    for check in report.failures:
        if check.name == "delta12!=0":
            raise SingularTransmissionError("left")
        if check.name == "delta34!=0":
            raise SingularTransmissionError("right")
    if report.failures:
        first = report.failures[0]
        raise ConfigurationError(first.message, field=first.name)
    return report
