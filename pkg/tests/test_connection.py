import math

import numpy as np
import pytest

from acbm.class_f import FTensor, class_template
from acbm.connection import (
    Deformation,
    Torsion,
    k_from_r_f5,
    metricity_residual,
    phi_b_deformation,
    torsion,
    verify_naturality,
    verify_phi_canonical,
)
from acbm.curvature import build_pi_and_L, check_phi_kaehler_type
from acbm.errors import MetricityViolation
from acbm.structure import canonical_structure, random_structure

import oracles


def templates(s, rng):
    omega = rng.standard_normal(s.dim)
    omega -= float(omega @ s.xi) * s.eta
    return {
        "F1": class_template("F1", s, rng.standard_normal(s.dim)),
        "F4": class_template("F4", s, 1.0),
        "F5": class_template("F5", s, 1.0),
        "F11": class_template("F11", s, omega),
    }


def test_zero_f_gives_zero_deformation(canon2):
    q = phi_b_deformation(FTensor(np.zeros((5, 5, 5)), canon2))
    assert not np.any(q.Q_low)
    assert not np.any(torsion(q).T_low)
    r = verify_naturality(q, FTensor(np.zeros((5, 5, 5)), canon2))
    assert r.max() == 0.0


def test_deformation_matches_loop_oracle(rng):
    for s in (canonical_structure(2), random_structure(2, 1)):
        for cid, f in templates(s, rng).items():
            q = phi_b_deformation(f)
            assert np.allclose(q.Q_low, oracles.naive_deformation(f.F, s), atol=1e-12), cid


def test_f5_deformation_shape(canon2):
    c = 1.7
    q = phi_b_deformation(class_template("F5", canon2, c))
    Q = q.Q
    # Q(e_1, e_1) is vertical; Q(xi, .) vanishes on horizontal arguments
    assert np.allclose(Q[0, 0, :4], 0.0, atol=1e-15)
    assert np.allclose(Q[4, :4, :], 0.0, atol=1e-15)


def test_deformation_vector_roundtrip(canon2, rng):
    q = phi_b_deformation(templates(canon2, rng)["F1"])
    again = Deformation.from_vector_valued(q.Q, canon2)
    assert np.allclose(again.Q_low, q.Q_low, atol=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_naturality_and_phi_canonical(n, rng):
    s = random_structure(n, 3)
    for cid, f in templates(s, rng).items():
        q = phi_b_deformation(f)
        assert verify_naturality(q, f).max() < 1e-10, cid
        assert metricity_residual(q.Q_low) < 1e-10
        t = torsion(q)
        assert np.array_equal(t.T_low, -t.T_low.transpose(1, 0, 2))
        assert verify_phi_canonical(t, s).max() < 1e-10, cid


def test_levi_civita_is_not_natural_off_f0(canon2):
    f = class_template("F4", canon2, 1.0)
    zero = Deformation(np.zeros((5, 5, 5)), canon2)
    assert verify_naturality(zero, f)["D_phi"] == pytest.approx(np.max(np.abs(f.F)))


def test_f4_torsion_entry_by_hand(canon2):
    # F4 with c = 1, n = 2: F(x,y,z) = -1/4 {g(phi x, phi y) eta(z) + g(phi x, phi z) eta(y)}
    t = torsion(phi_b_deformation(class_template("F4", canon2, 1.0)))
    T = oracles.naive_deformation(class_template("F4", canon2, 1.0).F, canon2)
    T = T - T.transpose(1, 0, 2)
    assert abs(t.T_low[0, 4, 0] - T[0, 4, 0]) < 1e-12
    assert np.allclose(t.T_low, T, atol=1e-12)


def test_zero_torsion_and_noise(canon2, rng):
    assert verify_phi_canonical(Torsion(np.zeros((5, 5, 5))), canon2).max() == 0.0
    for _ in range(20):
        noise = rng.standard_normal((5, 5, 5))
        noise = noise - noise.transpose(1, 0, 2)
        noise /= np.max(np.abs(noise))
        assert verify_phi_canonical(Torsion(noise), canon2).max() > 1e-3


def test_non_metric_deformation_is_rejected(canon2, rng):
    # a tensor that is not an F of any structure breaks D-metricity
    F = rng.standard_normal((5, 5, 5))
    with pytest.raises(MetricityViolation):
        phi_b_deformation(FTensor(F, canon2))


@pytest.mark.parametrize("n", [2, 3])
def test_k_builder(n):
    s = canonical_structure(n)
    cb = build_pi_and_L(s)
    t = 0.9
    c = 1 / math.cosh(t) ** 2
    K = k_from_r_f5(-c * cb.pi[1], 2 * n / math.cosh(t), -2 * n * c, s)
    assert np.max(np.abs(K - c * cb.L1)) < 1e-14
    assert check_phi_kaehler_type(K, s).max() < 1e-12
    R = 0.3 * cb.pi[2]
    assert np.array_equal(k_from_r_f5(R, 0.0, 0.0, s), R)
