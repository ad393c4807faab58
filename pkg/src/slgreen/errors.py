from typing import Optional


class SLGreenError(Exception):
    """Base error; `exit_code` is what the CLI returns for it."""

    exit_code = 3

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


# --- invalid configuration (exit 2) ---
class ConfigurationError(SLGreenError):
    exit_code = 2

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class ExpressionSyntaxError(ConfigurationError):
    def __init__(self, source: str, offset: int, expected: str):
        found = source[offset:offset + 1] or "end of input"
        super().__init__(f"syntax error at byte {offset}: expected {expected}, found {found!r}")
        self.source = source
        self.offset = offset
        self.expected = expected


class UnknownIdentifierError(ConfigurationError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier {name!r} at byte {offset}")
        self.name = name
        self.offset = offset


class SingularTransmissionError(ConfigurationError):
    def __init__(self, block: str):
        super().__init__(f"transmission matrix {block} block singular")
        self.block = block


# --- numerical failures (exit 3) ---
class ExpressionDomainError(SLGreenError):
    def __init__(self, node: str, reason: str):
        super().__init__(f"domain error in {node}: {reason}")
        self.node = node
        self.reason = reason


class DivergedSolutionError(SLGreenError):
    def __init__(self, lam: float, side: str):
        super().__init__(f"solution diverged on the {side} side at lambda={lam!r}")
        self.lam = lam
        self.side = side


class OutOfSpanError(SLGreenError):
    def __init__(self, x: float, lo: float, hi: float):
        super().__init__(f"x={x!r} outside path span [{lo!r}, {hi!r}]")
        self.x = x


class PathMismatchError(SLGreenError):
    pass


class InconsistentSystemError(SLGreenError):
    def __init__(self, lam: float, mismatch: float):
        super().__init__(
            f"characteristic function inconsistent at lambda={lam!r} "
            f"(relative mismatch {mismatch:.3e}); integrator resolution too coarse"
        )
        self.lam = lam
        self.mismatch = mismatch


class AtEigenvalueError(SLGreenError):
    def __init__(self, lam: float, eigenvalue: Optional[float] = None):
        near = eigenvalue if eigenvalue is not None else lam
        super().__init__(f"lambda={lam!r} is at an eigenvalue (nearest eigenvalue {near!r})")
        self.lam = lam
        self.eigenvalue = near


class DegenerateEigenfunctionError(SLGreenError):
    pass


class QuadratureError(SLGreenError):
    pass
