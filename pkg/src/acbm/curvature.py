"""Curvature-like and phi-Kaehler-type (0,4)-tensors.

The bracket conventions are applied literally to full tensors:
``{A}[x<->y]`` is ``A - A`` with the first two slots swapped.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import null_space, orth

from .structure import Structure
from .tensor_core import (
    ResidualReport,
    as_tensor,
    contract_ricci,
    relative_residual,
    scalar_from_ricci,
    tensor_norm,
)

def compose_phi(L, s: Structure, *slots: int) -> np.ndarray:
    """L with phi applied to the arguments in ``slots``: e.g. slots (2, 3) gives L(x, y, phi z, phi w)."""
    out = np.asarray(L, dtype=np.float64)
    for slot in slots:
        out = np.einsum(_slot_expr(slot), s.phi, out)
    return out


def _slot_expr(slot: int) -> str:
    idx = list("abcd")
    src = idx.copy()
    src[slot] = "e"
    return f"e{idx[slot]},{''.join(src)}->abcd"


def insert_vector(L, v, slot: int) -> np.ndarray:
    """Rank-3 tensor obtained by feeding the vector ``v`` into ``slot`` of L."""
    return np.tensordot(np.asarray(L), np.asarray(v), axes=([slot], [0]))


def swap_xy(L: np.ndarray) -> np.ndarray:
    return L.transpose(1, 0, 2, 3)


def cyclic_sum(L) -> np.ndarray:
    """Sum of L over the cyclic permutations of its first three arguments."""
    L = as_tensor(L, rank=4)
    # L(x,y,z,w) + L(y,z,x,w) + L(z,x,y,w)
    return L + L.transpose(2, 0, 1, 3) + L.transpose(1, 2, 0, 3)


def verify_curvature_like(L) -> ResidualReport:
    L = as_tensor(L, rank=4)
    return ResidualReport({
        "antisym_xy": relative_residual(L + swap_xy(L), L),
        "antisym_zw": relative_residual(L + L.transpose(0, 1, 3, 2), L),
        "first_bianchi": relative_residual(cyclic_sum(L), L),
    })


def verify_phi_kaehler(L, s: Structure) -> ResidualReport:
    """Residuals of L(x,y,phi z,phi w) = -L and of its consequences for a curvature-like L."""
    L = as_tensor(L, rank=4, dim=s.dim)
    res = {"kaehler": relative_residual(compose_phi(L, s, 2, 3) + L, L)}
    res["phi_xy"] = relative_residual(compose_phi(L, s, 0, 1) + L, L)
    res["phi_yz"] = relative_residual(compose_phi(L, s, 1, 2) + L, L)
    for slot in range(4):
        res[f"xi_slot{slot + 1}"] = relative_residual(insert_vector(L, s.xi, slot), L)
    shifted = [compose_phi(L, s, slot) for slot in range(4)]
    for slot in range(3):
        res[f"phi_shift_{slot + 1}{slot + 2}"] = relative_residual(shifted[slot] - shifted[slot + 1], L)
    return ResidualReport(res)


def check_phi_kaehler_type(L, s: Structure) -> ResidualReport:
    """Curvature-like residuals together with the phi-Kaehler ones."""
    return verify_curvature_like(L).merged(verify_phi_kaehler(L, s))


def _antisym_xy(A: np.ndarray) -> np.ndarray:
    return A - swap_xy(A)


def psi(i: int, S, s: Structure) -> np.ndarray:
    """The tensors psi_1(S) .. psi_5(S) built from g, phi, eta and a (0,2)-tensor S."""
    S = as_tensor(S, rank=2, dim=s.dim)
    g, eta = s.g, s.eta
    g_phi = s.g_phi          # g(x, phi y)
    S_phi = S @ s.phi        # S(x, phi y)
    ee = np.outer(eta, eta)
    # index names: x y z w
    if i == 1:
        A = np.einsum("yz,xw->xyzw", g, S) + np.einsum("xw,yz->xyzw", g, S)
    elif i == 2:
        A = np.einsum("yz,xw->xyzw", g_phi, S_phi) + np.einsum("xw,yz->xyzw", g_phi, S_phi)
    elif i == 3:
        A = -(np.einsum("yz,xw->xyzw", g, S_phi)
              + np.einsum("yz,xw->xyzw", g_phi, S)
              + np.einsum("xw,yz->xyzw", g_phi, S)
              + np.einsum("xw,yz->xyzw", g, S_phi))
    elif i == 4:
        A = np.einsum("yz,xw->xyzw", ee, S) + np.einsum("xw,yz->xyzw", ee, S)
    elif i == 5:
        A = np.einsum("yz,xw->xyzw", ee, S_phi) + np.einsum("xw,yz->xyzw", ee, S_phi)
    else:
        raise ValueError(f"psi index must be in 1..5, got {i}")
    return _antisym_xy(A)


def kaehler_combos(S, s: Structure) -> tuple[np.ndarray, np.ndarray]:
    """(psi_1 - psi_2 - psi_4)(S) and (psi_3 + psi_5)(S)."""
    first = psi(1, S, s) - psi(2, S, s) - psi(4, S, s)
    second = psi(3, S, s) + psi(5, S, s)
    return first, second


def associated(L, s: Structure) -> np.ndarray:
    """L*(x, y, z, w) = L(x, y, z, phi w)."""
    return compose_phi(as_tensor(L, rank=4, dim=s.dim), s, 3)


@dataclass(frozen=True)
class ScalarPair:
    tau: float
    tau_star: float


def ricci_scalars(L, s: Structure) -> tuple[np.ndarray, np.ndarray, ScalarPair]:
    """(rho, rho*, (tau, tau*)) with rho*(y, z) = g^{ij} L(e_i, y, z, phi e_j)."""
    rho = contract_ricci(L, s.g_inv)
    rho_star = contract_ricci(associated(L, s), s.g_inv)
    return rho, rho_star, ScalarPair(scalar_from_ricci(rho, s.g_inv), scalar_from_ricci(rho_star, s.g_inv))


@dataclass(frozen=True, eq=False)
class CurvatureBasis:
    pi: tuple[np.ndarray, ...]
    L1: np.ndarray
    L2: np.ndarray


def build_pi_and_L(s: Structure) -> CurvatureBasis:
    psis = [psi(i, s.g, s) for i in range(1, 6)]
    pi = tuple(0.5 * p if i < 3 else p for i, p in enumerate(psis))
    L1 = pi[0] - pi[1] - pi[3]
    L2 = pi[2] + pi[4]
    return CurvatureBasis(pi=pi, L1=L1, L2=L2)


# -- properties of (0,2)-tensors and seeded samplers -------------------------

def symmetry_defect(S) -> float:
    S = np.asarray(S, dtype=np.float64)
    return tensor_norm(S - S.T)


def phi_symmetry_defect(S, s: Structure) -> float:
    """Size of S(x, phi y) - S(y, phi x)."""
    Sp = np.asarray(S, dtype=np.float64) @ s.phi
    return tensor_norm(Sp - Sp.T)


def hybrid_defect(S, s: Structure) -> float:
    """Size of S(x, y) + S(phi x, phi y)."""
    S = np.asarray(S, dtype=np.float64)
    return tensor_norm(S + s.phi.T @ S @ s.phi)


def _constraint_matrix(s: Structure, kinds: tuple[str, ...]) -> np.ndarray:
    """Matrix mapping vec(S) to the stacked defects of every constraint in ``kinds``."""
    d = s.dim
    eye = np.eye(d * d)
    blocks = []
    for kind in kinds:
        cols = []
        for k in range(d * d):
            E = eye[k].reshape(d, d)
            if kind == "sym":
                C = E - E.T
            elif kind == "phi_sym":
                C = E @ s.phi - (E @ s.phi).T
            else:
                raise ValueError(f"unknown constraint {kind!r}")
            cols.append(C.ravel())
        blocks.append(np.column_stack(cols))
    return np.vstack(blocks)


@lru_cache(maxsize=128)
def _constrained_subspace(s: Structure, kinds: tuple[str, ...]) -> np.ndarray:
    if not kinds:
        return np.eye(s.dim * s.dim)
    return null_space(_constraint_matrix(s, kinds))


def constrained_subspace(s: Structure, kinds: tuple[str, ...]) -> np.ndarray:
    """Orthonormal basis (columns) of vec(S) satisfying every constraint in ``kinds``."""
    return _constrained_subspace(s, tuple(kinds)).copy()


def random_constrained_S(s: Structure, kinds: tuple[str, ...], rng: np.random.Generator) -> np.ndarray:
    basis = constrained_subspace(s, kinds)
    S = (basis @ rng.standard_normal(basis.shape[1])).reshape(s.dim, s.dim)
    return S / max(tensor_norm(S), 1e-300)


@lru_cache(maxsize=128)
def _psi_kernel(i: int, s: Structure) -> np.ndarray:
    d = s.dim
    eye = np.eye(d * d)
    M = np.column_stack([psi(i, eye[k].reshape(d, d), s).ravel() for k in range(d * d)])
    return null_space(M)


def psi_kernel(i: int, s: Structure) -> np.ndarray:
    """Orthonormal basis of the S with psi_i(S) = 0 (entries psi_i never reads)."""
    return _psi_kernel(i, s).copy()


@lru_cache(maxsize=128)
def _excluded_directions(s: Structure, kinds: tuple[str, ...], psi_index: int | None) -> np.ndarray:
    excluded = _constrained_subspace(s, kinds)
    if psi_index is not None:
        excluded = orth(np.hstack([excluded, _psi_kernel(psi_index, s)]))
    return excluded


def unit_violation(s: Structure, kinds: tuple[str, ...], rng: np.random.Generator,
                   psi_index: int | None = None) -> np.ndarray:
    """Random S of max-norm 1 orthogonal to the constraint subspace.

    With ``psi_index`` the draw also avoids the kernel of S -> psi_i(S), so
    the violation lies in entries that psi_i actually uses.
    """
    excluded = _excluded_directions(s, tuple(kinds), psi_index)
    v = rng.standard_normal(s.dim * s.dim)
    v = v - excluded @ (excluded.T @ v)
    S = v.reshape(s.dim, s.dim)
    return S / tensor_norm(S)


def random_hybrid_S(s: Structure, rng: np.random.Generator) -> np.ndarray:
    """Symmetric S with S(x, y) = -S(phi x, phi y).

    A random symmetric S0 supported on ker(eta) is averaged against
    S0(phi., phi.).
    """
    d = s.dim
    A = rng.standard_normal((d, d))
    S0 = A + A.T
    P = -(s.phi @ s.phi)  # projector onto ker(eta) along xi
    S0 = P.T @ S0 @ P
    S = 0.5 * (S0 - s.phi.T @ S0 @ s.phi)
    S = 0.5 * (S + S.T)
    return S / tensor_norm(S)
