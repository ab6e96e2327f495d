import math

import numpy as np
import pytest

from acbm.curvature import build_pi_and_L, verify_curvature_like
from acbm.errors import BadParam, ZeroModulus
from acbm.hypersurface import (
    ExampleFamily,
    ScalarFamily,
    central_difference,
    convergence_order,
    example_fixture,
    scalar_identity_residual,
    recover_one_forms,
    richardson_derivative,
    verify_example,
)

T_HALF = math.acosh(math.sqrt(2.0))  # cosh^2 t = 2


def test_finite_differences_on_known_function():
    f = math.sin
    assert central_difference(f, 0.7, 1e-4) == pytest.approx(math.cos(0.7), abs=1e-8)
    assert richardson_derivative(f, 0.7, 1e-2) == pytest.approx(math.cos(0.7), abs=1e-9)


def test_fixture_at_cosh_squared_two():
    fix = example_fixture(2, T_HALF)
    L1 = build_pi_and_L(fix.structure).L1
    assert np.max(np.abs(fix.K - 0.5 * L1)) < 1e-14
    assert verify_curvature_like(fix.R).max() == 0.0


def test_family_closed_forms():
    fam = ExampleFamily(2)
    assert fam.theta_star_xi(1.0) == pytest.approx(4 / math.cosh(1.0))
    assert fam.tau(0.0) == 8.0
    assert fam.one_forms(1.0).theta_star @ fam.structure.xi == pytest.approx(4 / math.cosh(1.0))


def test_lemma_at_t1():
    r = scalar_identity_residual(ExampleFamily(2), 1.0, 1e-4)
    assert r["first"] < 1e-6 and r["second"] < 1e-6


def test_first_identity_is_trivial_on_family():
    # theta = 0 and tau* = 0, and d tau o phi = 0, so both sides vanish
    for t in (0.3, 1.2, 2.5):
        assert scalar_identity_residual(ExampleFamily(3), t)["first"] == 0.0


def test_halving_step_shrinks_plain_residual():
    fam = ExampleFamily(2)
    coarse = scalar_identity_residual(fam, 1.0, 1e-3, richardson=False).max()
    fine = scalar_identity_residual(fam, 1.0, 5e-4, richardson=False).max()
    assert coarse / fine >= 3.5
    assert convergence_order(fam, 1.0, 1e-3) >= 1.9


def test_recovered_one_forms_at_t1():
    fam = ExampleFamily(2)
    rec = recover_one_forms(fam, 1.0, 1e-4)
    assert np.max(np.abs(rec.theta)) < 1e-8
    assert rec.theta_star @ fam.structure.xi == pytest.approx(2 * 2 / math.cosh(1.0), abs=1e-6)
    assert rec.theta_star @ fam.structure.xi == pytest.approx(2.5922, abs=1e-4)


def test_constant_modulus_pair_has_no_theta_star():
    # tau + i tau* = c exp(i psi(t)) with constant modulus: only theta survives
    n, c = 2, 3.0
    fam = ScalarFamily(n=n, tau=lambda t: c * math.cos(t**2), tau_star=lambda t: c * math.sin(t**2))
    for t in (0.6, 1.0, 1.7):
        rec = recover_one_forms(fam, t, 1e-4)
        assert np.max(np.abs(rec.theta_star)) < 1e-8
        expected = -n * (2 * t / math.sinh(t)) * fam.structure.eta
        assert np.allclose(rec.theta, expected, atol=1e-6)


def test_zero_modulus():
    fam = ScalarFamily(n=2, tau=lambda t: 0.0, tau_star=lambda t: 0.0)
    with pytest.raises(ZeroModulus):
        recover_one_forms(fam, 1.0)


def test_verify_example_n2_grid():
    rep = verify_example(2, [0.5, T_HALF, 1.5], fd_step=1e-4)
    assert rep.passed, rep.failures()
    nu = {round(t, 4): p["measurements"]["nu"] for t, p in rep.points.items()}
    assert nu[round(T_HALF, 4)] == pytest.approx(0.5, abs=1e-9)


def test_verify_example_n3_grid():
    rep = verify_example(3, [0.5, T_HALF, 1.5], fd_step=1e-4)
    assert rep.passed, rep.failures()
    assert any("decomposition skipped" in note for note in rep.notes)
    for t, p in rep.points.items():
        assert p["measurements"]["tau"] == pytest.approx(24 / math.cosh(t) ** 2, abs=1e-10)
        assert "nu" not in p["residuals"]


def test_bad_grids():
    with pytest.raises(BadParam):
        verify_example(2, [0.0, 1.0])
    with pytest.raises(BadParam):
        verify_example(2, [])
    with pytest.raises(BadParam):
        ExampleFamily(1)
    with pytest.raises(BadParam):
        example_fixture(2, -1.0)


def test_report_is_deterministic():
    a = verify_example(2, [0.7, 1.1]).to_dict()
    b = verify_example(2, [0.7, 1.1]).to_dict()
    assert a == b
