import math

import numpy as np
import pytest

from slgreen.errors import DivergedSolutionError, OutOfSpanError, PathMismatchError
from slgreen.integrate import eval_path, integrate, ode_residual, propagate, wronskian, wronskian_drift
from slgreen.problem import config_from_dict


def _free(a=0.0, c=math.pi / 2, b=math.pi, q="0", steps=2000):
    return config_from_dict({
        "domain": {"a": a, "c": c, "b": b},
        "p": {"minus": 1.0, "plus": 1.0},
        "q": {"minus": q, "plus": q},
        "boundary_left": {"alpha10": 1.0, "alpha11": 0.0, "alpha10p": 0.0, "alpha11p": 0.0},
        "boundary_right": {"alpha20": 1.0, "alpha21": 0.0, "alpha20p": 0.0, "alpha21p": 0.0},
        "transmission": {"beta": [[1.0, 0.0, -1.0, 0.0], [0.0, 1.0, 0.0, -1.0]]},
        "integrator": {"steps_per_side": steps},
    })


def test_constant_solution():
    config = _free(a=0.0, c=1.0, b=2.0)
    path = integrate(config, "left", 0.0, 0.0, 1.0, (1.0, 0.0))
    assert np.all(path.y == 1.0)
    assert np.all(path.yp == 0.0)
    assert path.steps == 2000
    assert path.span == (0.0, 1.0)


def test_sine_to_quarter_period():
    config = _free()
    path = integrate(config, "left", 1.0, 0.0, math.pi / 2, (0.0, 1.0))
    assert path.y[-1] == pytest.approx(1.0, abs=1e-10)
    assert path.yp[-1] == pytest.approx(0.0, abs=1e-10)


def test_exponential_growth():
    config = _free(a=0.0, c=1.0, b=2.0)
    path = integrate(config, "left", -1.0, 0.0, 1.0, (1.0, 1.0))
    assert path.y[-1] == pytest.approx(math.e, abs=1e-9)


def test_backward_shooting_stores_ascending_nodes():
    config = _free()
    path = integrate(config, "right", 1.0, math.pi, math.pi / 2, (0.0, -1.0))
    assert np.all(np.diff(path.xs) > 0)
    assert path.xs[0] == math.pi / 2 and path.xs[-1] == math.pi
    # y = sin x with y(π) = 0, y'(π) = -1
    np.testing.assert_allclose(path.y, np.sin(path.xs), atol=1e-10)


def test_direction_symmetry():
    config = _free(q="sin(x)")
    forward = integrate(config, "left", 3.0, 0.0, math.pi / 2, (0.2, 1.0))
    back = integrate(config, "left", 3.0, math.pi / 2, 0.0, (forward.y[-1], forward.yp[-1]))
    assert back.y[0] == pytest.approx(0.2, rel=1e-9)
    assert back.yp[0] == pytest.approx(1.0, rel=1e-9)


def test_span_must_match_subinterval():
    config = _free()
    with pytest.raises(PathMismatchError):
        integrate(config, "left", 1.0, 0.0, math.pi, (0.0, 1.0))


def test_divergence_raises():
    config = _free(a=0.0, c=100.0, b=200.0, steps=20000)
    with pytest.raises(DivergedSolutionError) as info:
        integrate(config, "left", -100.0, 0.0, 100.0, (1.0, 10.0))
    assert info.value.lam == -100.0


def test_eval_path_exact_at_nodes_and_linear_inside():
    config = _free(a=0.0, c=1.0, b=2.0)
    path = integrate(config, "left", 0.0, 0.0, 1.0, (0.0, 1.0))
    assert eval_path(path, path.xs[17]) == (path.y[17], path.yp[17])
    y, yp = eval_path(path, np.array([0.1234, 0.5, 0.98765]))
    np.testing.assert_allclose(y, [0.1234, 0.5, 0.98765], rtol=1e-13)
    np.testing.assert_allclose(yp, 1.0, rtol=1e-13)


def test_eval_path_hermite_accuracy():
    config = _free()
    path = integrate(config, "left", 1.0, 0.0, math.pi / 2, (0.0, 1.0))
    h = path.xs[1] - path.xs[0]
    y, yp = eval_path(path, 0.314159)
    assert abs(y - math.sin(0.314159)) <= 10 * h ** 4
    assert abs(yp - math.cos(0.314159)) <= 10 * h ** 3


def test_eval_path_out_of_span():
    config = _free()
    path = integrate(config, "left", 1.0, 0.0, math.pi / 2, (0.0, 1.0))
    eval_path(path, math.pi / 2 + 1e-14)
    with pytest.raises(OutOfSpanError):
        eval_path(path, 1.6)


def test_wronskian_sin_cos():
    config = _free()
    s = integrate(config, "left", 1.0, 0.0, math.pi / 2, (0.0, 1.0))
    c = integrate(config, "left", 1.0, 0.0, math.pi / 2, (1.0, 0.0))
    for x in (0.0, 0.4, 1.1, math.pi / 2):
        assert wronskian(s, c, x) == pytest.approx(-1.0, abs=1e-10)
    assert wronskian(s, s, 0.7) == 0.0
    spread, scale = wronskian_drift(s, c)
    assert spread <= 1e-8 * scale


def test_wronskian_mismatch():
    config = _free()
    s = integrate(config, "left", 1.0, 0.0, math.pi / 2, (0.0, 1.0))
    t = integrate(config, "left", 2.0, 0.0, math.pi / 2, (0.0, 1.0))
    r = integrate(config, "right", 1.0, math.pi / 2, math.pi, (0.0, 1.0))
    with pytest.raises(PathMismatchError):
        wronskian(s, t, 0.5)
    with pytest.raises(PathMismatchError):
        wronskian(s, r, 1.0)


def test_ode_residual_is_small():
    config = _free(q="x^2")
    path = integrate(config, "left", 4.0, 0.0, math.pi / 2, (0.0, 1.0))
    assert ode_residual(path) < 1e-5


def test_lambda_continuity():
    config = _free(q="cos(x)")
    base = integrate(config, "left", 5.0, 0.0, math.pi / 2, (0.0, 1.0))
    near = integrate(config, "left", 5.0 + 1e-6, 0.0, math.pi / 2, (0.0, 1.0))
    assert np.max(np.abs(near.y - base.y)) < 1e-5


def test_propagate_matches_scalar_sweeps():
    config = _free(q="exp(-x)")
    lams = np.array([-3.0, 0.5, 7.0, 20.0])
    y, v = propagate(config, "right", lams, math.pi, math.pi / 2, (np.zeros(4), np.ones(4)))
    for i, lam in enumerate(lams):
        path = integrate(config, "right", lam, math.pi, math.pi / 2, (0.0, 1.0))
        assert y[i] == pytest.approx(path.y[0], rel=1e-12, abs=1e-14)
        assert v[i] == pytest.approx(path.yp[0], rel=1e-12, abs=1e-14)


def test_propagate_marks_divergence_as_nan():
    config = _free(a=0.0, c=100.0, b=200.0, steps=20000)
    y, v = propagate(config, "left", np.array([1.0, -100.0]), 0.0, 100.0, (1.0, 0.0))
    assert np.isfinite(y[0]) and np.isnan(y[1]) and np.isnan(v[1])
