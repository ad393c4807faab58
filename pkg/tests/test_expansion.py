import json
from dataclasses import replace
import math

import numpy as np
import pytest

from slgreen.cli.examples import EXAMPLES
from slgreen.errors import ConfigurationError
from slgreen.expansion import (boundary_weights, coefficients, decompose, expansion_error, indefinite,
                               inner_product_H, inner_product_H1, log_spaced_terms, parseval_report)
from slgreen.greens import HVector, Piecewise
from slgreen.problem import config_from_dict
from slgreen.spectrum import eigenpair, eigenpairs, scan
from oracles import sine_coefficient


@pytest.fixture(scope="module")
def dirichlet_pairs(config_d):
    evs = scan(config_d, 0.5, 1700.0, 6800, 1e-10)
    assert len(evs) == 41
    return eigenpairs(config_d, evs[:40])


@pytest.fixture(scope="module")
def strict_pairs(config_e):
    return eigenpairs(config_e, scan(config_e, -10.0, 60.0, 2800, 1e-10)[:8])


def _parabola(config):
    return HVector.from_function(config, Piecewise.from_expressions(config, "x*(pi - x)", "x*(pi - x)"))


def test_inner_product_of_constants(config_d):
    one = Piecewise.from_expressions(config_d, "1", "1")
    assert inner_product_H1(config_d, one, one) == pytest.approx(math.pi, rel=1e-12)


def test_inner_product_of_distinct_sines(config_d):
    s1 = Piecewise.from_expressions(config_d, "sin(x)", "sin(x)")
    s2 = Piecewise.from_expressions(config_d, "sin(2*x)", "sin(2*x)")
    assert inner_product_H1(config_d, s1, s2) == pytest.approx(0.0, abs=1e-9)


def test_inner_product_scales_with_minors(config_d):
    data = json.loads(json.dumps(EXAMPLES["D"]))
    data["transmission"]["beta"] = [[2.0, 0.0, -2.0, 0.0], [0.0, 1.0, 0.0, -1.0]]
    doubled = config_from_dict(data)
    f = Piecewise.from_expressions(config_d, "exp(x)", "exp(x)")
    assert inner_product_H1(doubled, f, f) == pytest.approx(2 * inner_product_H1(config_d, f, f), rel=1e-12)


def test_degenerate_components_drop_out(config_d):
    f = Piecewise.from_expressions(config_d, "x", "x^2")
    F, G = HVector(f, 5.0, 7.0), HVector(f, -3.0, 11.0)
    assert boundary_weights(config_d) == (0.0, 0.0)
    assert inner_product_H(config_d, F, G) == inner_product_H1(config_d, f, f)


def test_boundary_entry_weights(config_e, config_p):
    for config, expected in ((config_e, 1.0), (config_p, -1.0)):
        zero = Piecewise.from_expressions(config, "0", "0")
        F = HVector(zero, 1.0, 0.0)
        assert inner_product_H(config, F, F) == pytest.approx(expected)
    assert indefinite(config_p) and not indefinite(config_e)


def test_active_component_with_zero_theta_rejected():
    data = json.loads(json.dumps(EXAMPLES["D"]))
    data["boundary_left"].update(alpha10p=1.0)
    config = config_from_dict(data)
    assert config.theta1 == 0.0 and config.component_active("left")
    with pytest.raises(ConfigurationError):
        boundary_weights(config)


def test_coefficients_of_eigenvectors(config_e, strict_pairs):
    c = coefficients(config_e, strict_pairs, strict_pairs[0].vector)
    np.testing.assert_allclose(c, np.eye(len(strict_pairs))[0], atol=1e-6)
    combo = 2 * strict_pairs[0].vector + 3 * strict_pairs[1].vector
    expected = np.zeros(len(strict_pairs))
    expected[:2] = (2.0, 3.0)
    np.testing.assert_allclose(coefficients(config_e, strict_pairs, combo), expected, atol=1e-5)


def test_too_many_coefficients_requested(config_e, strict_pairs):
    with pytest.raises(ValueError):
        coefficients(config_e, strict_pairs, strict_pairs[0].vector, n=len(strict_pairs) + 1)


def test_dirichlet_fourier_coefficients(config_d, dirichlet_pairs):
    c = coefficients(config_d, dirichlet_pairs, _parabola(config_d))
    for n, (value, pair) in enumerate(zip(c, dirichlet_pairs), start=1):
        sign = math.copysign(1.0, pair.function.evaluate(math.pi / (2 * n))[0])
        assert value == pytest.approx(sign * sine_coefficient(n), abs=1e-5)


def test_dirichlet_parseval_and_uniform_convergence(config_d, dirichlet_pairs):
    F = _parabola(config_d)
    report = parseval_report(config_d, dirichlet_pairs, F)
    assert report.norm_sq == pytest.approx(math.pi ** 5 / 30, rel=1e-8)
    assert 0.0 <= report.deficit <= 2e-2
    assert not report.indefinite
    assert all(b >= a for a, b in zip(report.partial_sums, report.partial_sums[1:]))
    errors = dict(expansion_error(config_d, dirichlet_pairs, F, 40, 401, ks=[10, 40]))
    assert errors[40] < errors[10]


def test_eigenvector_has_no_parseval_deficit(config_d, dirichlet_pairs):
    report = parseval_report(config_d, dirichlet_pairs, dirichlet_pairs[2].vector, n=5)
    assert report.deficit == pytest.approx(0.0, abs=1e-6)
    ((k, err),) = expansion_error(config_d, dirichlet_pairs, dirichlet_pairs[1].vector, 5, 201, ks=[2])
    assert k == 2 and err <= 1e-5


def test_bessel_inequality_on_strict_example(config_e, strict_pairs):
    F = _parabola(config_e)
    assert F.f1 == pytest.approx(math.pi, rel=1e-6) and F.f2 == pytest.approx(math.pi, rel=1e-6)
    report = parseval_report(config_e, strict_pairs, F)
    assert report.partial_sums[-1] <= report.norm_sq * (1 + 1e-6)


def test_quadrature_stable_under_refinement(config_d):
    ev = scan(config_d, 0.5, 2.0, 60, 1e-10)[0]
    coarse = eigenpair(config_d, ev)
    fine = eigenpair(config_d.with_steps(4000), ev)
    a = inner_product_H1(config_d, coarse.function, coarse.function)
    b = inner_product_H1(config_d, fine.function, fine.function)
    assert abs(a - b) <= 1e-6


def test_decompose_records(config_e, strict_pairs):
    result = decompose(config_e, strict_pairs, _parabola(config_e), n=5, grid_m=101)
    assert [r.terms for r in result.records] == [1, 2, 3, 4, 5]
    assert len(result.coefficients) == 5
    assert result.parseval.partial_sums[-1] == pytest.approx(float(np.sum(result.coefficients ** 2)))


def test_log_spaced_terms():
    ks = log_spaced_terms(40)
    assert ks[0] == 1 and ks[-1] == 40
    assert ks == sorted(set(ks))
    assert log_spaced_terms(1) == [1]
    assert log_spaced_terms(0) == []


def test_indefinite_coefficients_divide_by_mode_sign(config_p):
    pairs = eigenpairs(config_p, scan(config_p, 0.1, 40.0, 1596, 1e-10)[:4])
    for k, pair in enumerate(pairs):
        assert coefficients(config_p, pairs, pair.vector)[k] == pytest.approx(1.0, rel=1e-8)
        report = parseval_report(config_p, pairs[k:k + 1], pair.vector)
        assert report.indefinite
        assert report.norm_sq == pytest.approx(pair.h_sign, rel=1e-8)
        assert report.deficit == pytest.approx(0.0, abs=1e-7)


def test_negative_mode_enters_parseval_with_its_sign(config_e, strict_pairs):
    flipped = [replace(strict_pairs[0], h_sign=-1.0), strict_pairs[1], strict_pairs[2]]
    F = strict_pairs[0].vector + strict_pairs[1].vector
    np.testing.assert_allclose(coefficients(config_e, flipped, F), [-1.0, 1.0, 0.0], atol=1e-5)
    report = parseval_report(config_e, flipped, F)
    np.testing.assert_allclose(report.partial_sums, [-1.0, 0.0, 0.0], atol=1e-5)
