from .expression import ExprAST, eval_expression, parse_expression, unparse
from .schemas import (
    DomainSpec,
    IntegratorSettings,
    LeftBoundary,
    Minors,
    PotentialSpec,
    ProblemConfig,
    RightBoundary,
    Side,
    SideCoefficients,
    TransmissionSpec,
    config_from_dict,
    load_config,
    minors,
)
from .validation import AssumptionCheck, ValidationReport, require_valid, validate
