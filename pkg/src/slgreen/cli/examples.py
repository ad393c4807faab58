"""Built-in configurations."""
import math
from typing import Dict, List

from ..problem import ProblemConfig, config_from_dict

EXAMPLES: Dict[str, dict] = {
    # -y'' = λy on [0, π], Dirichlet ends, identity transmission at π/2
    "D": {
        "domain": {"a": 0.0, "c": math.pi / 2, "b": math.pi},
        "p": {"minus": 1.0, "plus": 1.0},
        "q": {"minus": "0", "plus": "0"},
        "boundary_left": {"alpha10": 1.0, "alpha11": 0.0, "alpha10p": 0.0, "alpha11p": 0.0},
        "boundary_right": {"alpha20": 1.0, "alpha21": 0.0, "alpha20p": 0.0, "alpha21p": 0.0},
        "transmission": {"beta": [[1.0, 0.0, -1.0, 0.0], [0.0, 1.0, 0.0, -1.0]]},
        "mode": "lenient",
        "integrator": {"steps_per_side": 2000},
    },
    # y(-1) + λy'(-1) = 0, λy(1) + y'(1) = 0, value continuous and slope halved at 0
    "P": {
        "domain": {"a": -1.0, "c": 0.0, "b": 1.0},
        "p": {"minus": 1.0, "plus": 1.0},
        "q": {"minus": "0", "plus": "0"},
        "boundary_left": {"alpha10": 1.0, "alpha11": 0.0, "alpha10p": 0.0, "alpha11p": 1.0},
        "boundary_right": {"alpha20": 0.0, "alpha21": -1.0, "alpha20p": 1.0, "alpha21p": 0.0},
        "transmission": {"beta": [[1.0, 0.0, -1.0, 0.0], [0.0, 1.0, 0.0, -0.5]]},
        "mode": "lenient",
        "integrator": {"steps_per_side": 2000},
    },
    # y(a) = λy'(a), y(b) = -λy'(b), jump (u, v) -> (2u, v/2); θ1 = θ2 = 1, Δ12 = Δ34 = 1
    "E": {
        "domain": {"a": 0.0, "c": math.pi / 2, "b": math.pi},
        "p": {"minus": 1.0, "plus": 1.0},
        "q": {"minus": "0", "plus": "0"},
        "boundary_left": {"alpha10": 1.0, "alpha11": 0.0, "alpha10p": 0.0, "alpha11p": -1.0},
        "boundary_right": {"alpha20": 1.0, "alpha21": 0.0, "alpha20p": 0.0, "alpha21p": -1.0},
        "transmission": {"beta": [[1.0, 0.0, -2.0, 0.0], [0.0, 1.0, 0.0, -0.5]]},
        "mode": "strict",
        "integrator": {"steps_per_side": 2000},
    },
}

NOTES: Dict[str, List[str]] = {
    "D": ["classical Dirichlet problem; both boundary components of H are disabled (θ1 = θ2 = 0)"],
    "P": [
        "printed transmission conditions are contradictory; encoded as continuity of value plus "
        "halving of the derivative, T = [[1,0,-1,0],[0,1,0,-0.5]], so jump_forward(u, v) = (u, v/2)",
        "figure parameter taken as λ directly; pass --mu-squared to use λ = μ²",
        "θ1 = θ2 = -1 < 0, so the modified inner product is indefinite (lenient mode)",
    ],
    "E": ["eigenparameter-dependent ends with positive θ and Δ12 = Δ34, so H is a genuine Hilbert space"],
}


def example_config(name: str) -> ProblemConfig:
    key = name.upper()
    if key not in EXAMPLES:
        raise KeyError(f"unknown example {name!r}; choose one of {', '.join(sorted(EXAMPLES))}")
    return config_from_dict(EXAMPLES[key])
