import json
import math

import numpy as np
import pytest
from scipy.optimize import brentq

from slgreen.cli.examples import EXAMPLES
from slgreen.problem import config_from_dict
from slgreen.spectrum import eigenpair, eigenpairs, omega_derivative, orthogonality_check, scan
from oracles import halving_omega


def test_dirichlet_spectrum(config_d):
    evs = scan(config_d, 0.5, 30.0, 1180, 1e-10)
    assert [ev.flag for ev in evs] == ["simple"] * 5
    np.testing.assert_allclose([ev.lam for ev in evs], [1.0, 4.0, 9.0, 16.0, 25.0], rtol=1e-7)
    for ev in evs:
        assert ev.bracket[0] <= ev.lam <= ev.bracket[1]
        assert ev.residual < 1e-8


def test_halving_example_spectrum_matches_closed_form(config_p):
    lams = np.linspace(0.1, 40.0, 1597)
    w = np.array([halving_omega(lam) for lam in lams])
    expected = [brentq(halving_omega, lams[i], lams[i + 1], xtol=1e-13)
                for i in range(len(lams) - 1) if w[i] * w[i + 1] < 0]
    evs = scan(config_p, 0.1, 40.0, 1596, 1e-10)
    assert len(evs) == len(expected) > 0
    np.testing.assert_allclose([ev.lam for ev in evs], expected, rtol=1e-6)


def test_refinement_stable_under_tolerance(config_e):
    coarse = scan(config_e, 0.0, 30.0, 1200, 1e-8)
    fine = scan(config_e, 0.0, 30.0, 1200, 5e-9)
    assert len(coarse) == len(fine)
    for a, b in zip(coarse, fine):
        assert abs(a.lam - b.lam) <= 10 * 1e-8


def test_scan_rejects_bad_arguments(config_d):
    with pytest.raises(ValueError):
        scan(config_d, 5.0, 1.0, 100, 1e-10)
    with pytest.raises(ValueError):
        scan(config_d, 0.0, 1.0, 1, 1e-10)
    with pytest.raises(ValueError):
        scan(config_d, 0.0, 1.0, 10, 0.0)


def test_eigenvalues_simple_in_strict_example(config_e):
    evs = scan(config_e, -10.0, 60.0, 2800, 1e-10)
    assert len(evs) >= 6
    for ev in evs:
        assert abs(ev.omega_derivative) > 1e-6
        assert ev.flag == "simple"


def test_omega_derivative_of_dirichlet(config_d):
    # d/dλ sin(√λ π)/√λ at λ = 4: π cos(2π)/(2·4) - sin(2π)/(2·8)
    assert omega_derivative(config_d, 4.0) == pytest.approx(math.pi / 8, rel=1e-6)


def test_dirichlet_eigenfunctions_normalised(config_d):
    pairs = eigenpairs(config_d, scan(config_d, 0.5, 30.0, 1180, 1e-10))
    for n, pair in enumerate(pairs, start=1):
        assert pair.h_norm == pytest.approx(1.0, rel=1e-8)
        assert pair.h_sign == 1.0
        assert pair.dependency_residual <= 1e-4
        xs = np.linspace(0.1, 3.0, 7)
        np.testing.assert_allclose(pair.function.evaluate(xs)[0], math.sqrt(2 / math.pi) * np.sin(n * xs),
                                   atol=1e-6)
    # boundary components are disabled, so their entries do not matter; they are B'_a, -B'_b = 0
    assert pairs[0].f1 == 0.0 and pairs[0].f2 == 0.0


@pytest.mark.parametrize("name", ["config_d", "config_e"])
def test_gram_matrix_is_identity(request, name):
    config = request.getfixturevalue(name)
    evs = scan(config, -10.0, 60.0, 2800, 1e-10)[:6]
    pairs = eigenpairs(config, evs)
    report = orthogonality_check(config, pairs)
    assert len(report.matrix) == 6
    assert report.max_off_diagonal <= 1e-5
    assert report.max_diagonal_error <= 1e-8


def test_eigenpairs_of_strict_example_satisfy_right_condition(config_e):
    for ev in scan(config_e, -10.0, 40.0, 2000, 1e-10)[:5]:
        pair = eigenpair(config_e, ev)
        assert pair.dependency_residual <= 1e-4
        assert pair.right_residual <= 1e-6 * max(1.0, abs(ev.lam))
        assert pair.f1 != 0.0


def test_indefinite_example_normalised_by_modulus(config_p):
    pairs = eigenpairs(config_p, scan(config_p, 0.1, 40.0, 1596, 1e-10)[:4])
    assert all(pair.h_norm == pytest.approx(1.0, rel=1e-8) for pair in pairs)
    assert {pair.h_sign for pair in pairs} <= {1.0, -1.0}


def test_identity_interface_can_sit_anywhere():
    data = json.loads(json.dumps(EXAMPLES["D"]))
    data["domain"]["c"] = 1.0
    moved = config_from_dict(data)
    evs = scan(moved, 0.5, 30.0, 1180, 1e-10)
    np.testing.assert_allclose([ev.lam for ev in evs], [1.0, 4.0, 9.0, 16.0, 25.0], rtol=1e-7)
    assert [ev.flag for ev in evs] == ["simple"] * 5
