import numpy as np
import pytest

from acbm.curvature import (
    associated,
    build_pi_and_L,
    check_phi_kaehler_type,
    cyclic_sum,
    hybrid_defect,
    kaehler_combos,
    phi_symmetry_defect,
    psi,
    psi_kernel,
    random_constrained_S,
    random_hybrid_S,
    ricci_scalars,
    symmetry_defect,
    unit_violation,
    verify_curvature_like,
    verify_phi_kaehler,
)
from acbm.structure import canonical_structure, random_structure

import oracles

IFF = {1: ("sym",), 4: ("sym",), 2: ("phi_sym",), 5: ("phi_sym",), 3: ("sym", "phi_sym")}


@pytest.mark.parametrize("i", [1, 2, 3, 4, 5])
def test_psi_matches_loop_oracle(i, rng):
    for s in (canonical_structure(1), random_structure(2, 4)):
        S = rng.standard_normal((s.dim, s.dim))
        assert np.allclose(psi(i, S, s), oracles.naive_psi(i, S, s), atol=1e-12)


def test_pi_normalisation(canon2):
    cb = build_pi_and_L(canon2)
    g = canon2.g
    assert np.array_equal(psi(1, g, canon2), 2 * cb.pi[0])
    assert np.array_equal(psi(2, g, canon2), 2 * cb.pi[1])
    assert np.array_equal(psi(4, g, canon2), cb.pi[3])
    assert cb.pi[1][0, 1, 1, 0] == 0.0
    first, _ = kaehler_combos(g, canon2)
    assert np.allclose(first, 2 * cb.pi[0] - 2 * cb.pi[1] - cb.pi[3])


def test_psi4_entry_with_eta_eta(canon2):
    S = np.outer(canon2.eta, canon2.eta)
    assert psi(4, S, canon2)[0, 4, 4, 0] == 0.0


def test_pi_are_curvature_like(n):
    s = canonical_structure(n)
    for p in build_pi_and_L(s).pi:
        assert verify_curvature_like(p).max() == 0.0


def test_L_entries(canon2):
    cb = build_pi_and_L(canon2)
    assert cb.L1[0, 1, 1, 0] == 1.0
    assert cb.L2[0, 1, 1, 0] == 0.0
    assert cb.L2[0, 1, 1, 2] == 1.0


def test_L_are_phi_kaehler(n):
    s = canonical_structure(n)
    cb = build_pi_and_L(s)
    assert check_phi_kaehler_type(cb.L1, s).max() < 1e-14
    assert check_phi_kaehler_type(cb.L2, s).max() < 1e-14


def test_pi1_is_not_phi_kaehler(canon2):
    pi1 = build_pi_and_L(canon2).pi[0]
    assert verify_phi_kaehler(pi1, canon2)["kaehler"] > 0.5


def test_zero_tensor_residuals(canon2):
    Z = np.zeros((5,) * 4)
    assert verify_curvature_like(Z).max() == 0.0
    assert np.array_equal(associated(Z, canon2), Z)


def test_psi1_of_nonsymmetric_fails_bianchi(canon2, rng):
    S = unit_violation(canon2, ("sym",), rng, psi_index=1)
    assert verify_curvature_like(psi(1, S, canon2))["first_bianchi"] > 1e-3


@pytest.mark.parametrize("i", [1, 2, 3, 4, 5])
def test_psi_iff_positive(i, n, rng):
    s = random_structure(n, 1)
    for _ in range(10):
        S = random_constrained_S(s, IFF[i], rng)
        assert verify_curvature_like(psi(i, S, s)).max() < 1e-10


@pytest.mark.parametrize("i", [1, 2, 3, 4, 5])
def test_psi_iff_negative(i, rng):
    for s in (canonical_structure(2), canonical_structure(3)):
        for _ in range(10):
            S = unit_violation(s, IFF[i], rng, psi_index=i)
            assert verify_curvature_like(psi(i, S, s)).max() > 1e-3


def test_violations_really_violate(canon2, rng):
    S = unit_violation(canon2, ("sym",), rng)
    assert symmetry_defect(S) > 1e-3
    S = unit_violation(canon2, ("phi_sym",), rng)
    assert phi_symmetry_defect(S, canon2) > 1e-3


def test_hybrid_combos(rng):
    for s in (canonical_structure(2), random_structure(2, 3)):
        for _ in range(10):
            S = random_hybrid_S(s, rng)
            assert hybrid_defect(S, s) < 1e-12
            first, second = kaehler_combos(S, s)
            assert check_phi_kaehler_type(first, s).max() < 1e-10
            assert check_phi_kaehler_type(second, s).max() < 1e-10
            assert np.max(np.abs(associated(first, s) + second)) < 1e-10 * max(1, np.max(np.abs(first)))
            assert np.max(np.abs(associated(second, s) - first)) < 1e-10 * max(1, np.max(np.abs(first)))


def test_symmetric_non_hybrid_combo_fails(canon2, rng):
    A = rng.standard_normal((5, 5))
    S = A + A.T
    assert hybrid_defect(S, canon2) > 1e-3
    first, _ = kaehler_combos(S, canon2)
    assert check_phi_kaehler_type(first, canon2).max() > 1e-3


def test_associated_matches_loop(canon2, rng):
    L = rng.standard_normal((5,) * 4)
    assert np.allclose(associated(L, canon2), oracles.naive_associated(L, canon2.phi))


def test_L_star_relations(n):
    s = canonical_structure(n)
    cb = build_pi_and_L(s)
    assert np.max(np.abs(associated(cb.L1, s) + cb.L2)) < 1e-14
    assert np.max(np.abs(associated(cb.L2, s) - cb.L1)) < 1e-14
    assert np.max(np.abs(associated(associated(cb.L1, s), s) + cb.L1)) < 1e-14


def test_scalar_curvatures_of_L(n):
    s = canonical_structure(n)
    cb = build_pi_and_L(s)
    _, _, p1 = ricci_scalars(cb.L1, s)
    _, _, p2 = ricci_scalars(cb.L2, s)
    assert p1.tau == pytest.approx(4 * n * (n - 1), abs=1e-12)
    assert p1.tau_star == pytest.approx(0.0, abs=1e-12)
    assert p2.tau == pytest.approx(0.0, abs=1e-12)
    assert p2.tau_star == pytest.approx(4 * n * (n - 1), abs=1e-12)


def test_associated_swaps_scalar_curvatures(rng):
    s = random_structure(2, 8)
    cb = build_pi_and_L(s)
    L = 1.3 * cb.L1 - 0.4 * cb.L2
    rho, rho_s, p = ricci_scalars(L, s)
    rho2, rho2_s, q = ricci_scalars(associated(L, s), s)
    assert q.tau == pytest.approx(p.tau_star, abs=1e-10)
    assert q.tau_star == pytest.approx(-p.tau, abs=1e-10)
    assert np.allclose(rho2, rho_s, atol=1e-10)
    assert np.allclose(rho2_s, -rho, atol=1e-10)


def test_cyclic_sum(canon2, rng):
    cb = build_pi_and_L(canon2)
    assert np.max(np.abs(cyclic_sum(2 * cb.L1 - cb.L2))) < 1e-14
    gg = np.einsum("xy,zw->xyzw", canon2.g, canon2.g)
    out = cyclic_sum(gg)
    assert np.max(np.abs(out)) > 0.5
    assert np.allclose(out, oracles.naive_cyclic(gg))
    L = rng.standard_normal((5,) * 4)
    assert np.allclose(cyclic_sum(L), oracles.naive_cyclic(L))


@pytest.mark.parametrize("i", [1, 2, 3, 4, 5])
def test_psi_kernel_is_really_ignored(i, n):
    s = canonical_structure(n)
    K = psi_kernel(i, s)
    for k in range(K.shape[1]):
        S = K[:, k].reshape(s.dim, s.dim)
        assert np.max(np.abs(psi(i, S, s))) < 1e-12
    if i in (4, 5):
        # psi_4 and psi_5 only see S through eta-weighted slots
        assert K.shape[1] > 0
