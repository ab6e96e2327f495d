"""The phi-B connection built pointwise from F, its torsion and naturality checks.

The connection is D_x y = nabla_x y + Q(x, y) with

    Q(x, y) = 1/2 {(nabla_x phi) phi y + (nabla_x eta)(y) xi} - eta(y) nabla_x xi.

Everything is expressed through F using (nabla_x eta)(y) = F(x, xi, phi y) and
g(nabla_x xi, z) = F(x, xi, phi z), so no derivative data beyond F is needed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .class_f import FTensor
from .curvature import build_pi_and_L, cyclic_sum, verify_curvature_like
from .errors import MetricityViolation
from .structure import Structure
from .tensor_core import ResidualReport, as_tensor, relative_residual

__all__ = [
    "Deformation",
    "Torsion",
    "cyclic_sum",
    "k_from_r_f5",
    "metricity_residual",
    "phi_b_deformation",
    "phi_canonical_defect",
    "torsion",
    "verify_naturality",
    "verify_phi_canonical",
]

METRICITY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class Deformation:
    """Q_low[x, y, z] = g(Q(x, y), z)."""

    Q_low: np.ndarray
    structure: Structure

    @property
    def Q(self) -> np.ndarray:
        """Q[x, y, a]: a-th component of Q(e_x, e_y)."""
        return np.einsum("xyz,za->xya", self.Q_low, self.structure.g_inv)

    @classmethod
    def from_vector_valued(cls, Q, s: Structure) -> "Deformation":
        return cls(np.einsum("xya,az->xyz", np.asarray(Q, dtype=np.float64), s.g), s)


@dataclass(frozen=True, eq=False)
class Torsion:
    """T_low[x, y, z] = g(T(x, y), z)."""

    T_low: np.ndarray


def metricity_residual(Q_low) -> float:
    """g(Q(x,y),z) + g(y,Q(x,z)), i.e. Dg = 0 for D = nabla + Q."""
    Q_low = np.asarray(Q_low)
    return relative_residual(Q_low + Q_low.transpose(0, 2, 1), Q_low)


def phi_b_deformation(f: FTensor, s: Structure | None = None) -> Deformation:
    s = f.structure if s is None else s
    F = f.F
    F_xi_phi = np.einsum("xbc,b,cy->xy", F, s.xi, s.phi)         # F(x, xi, phi y)
    Q_low = (0.5 * np.einsum("xbz,by->xyz", F, s.phi)            # F(x, phi y, z)
             + 0.5 * np.einsum("xy,z->xyz", F_xi_phi, s.eta)     # (nabla_x eta)(y) eta(z)
             - np.einsum("y,xz->xyz", s.eta, F_xi_phi))          # eta(y) g(nabla_x xi, z)
    res = metricity_residual(Q_low)
    if res > METRICITY_TOL:
        raise MetricityViolation(f"D-metricity residual {res:.3e}")
    return Deformation(Q_low, s)


def verify_naturality(q: Deformation, f: FTensor, s: Structure | None = None) -> ResidualReport:
    """Residuals of D phi = 0 and D g = 0."""
    s = q.structure if s is None else s
    Q_low = q.Q_low
    # g((D_x phi) y, z) = F(x, y, z) + g(Q(x, phi y), z) - g(Q(x, y), phi z)
    d_phi = (f.F
             + np.einsum("xbz,by->xyz", Q_low, s.phi)
             - np.einsum("xyc,cz->xyz", Q_low, s.phi))
    return ResidualReport({
        "D_phi": relative_residual(d_phi, f.F),
        "D_g": metricity_residual(Q_low),
    })


def torsion(q: Deformation, s: Structure | None = None) -> Torsion:
    """T(x, y) = Q(x, y) - Q(y, x) (nabla is torsion-free)."""
    return Torsion(q.Q_low - q.Q_low.transpose(1, 0, 2))


def phi_canonical_defect(T_low, s: Structure) -> np.ndarray:
    """Left side of the phi-canonical torsion identity, before the [y<->z] bracket is a zero test.

    Grouping used:

        { T(x,y,z) - T(x,phi y,phi z)
          - eta(x) { T(xi,y,z) - T(xi,phi y,phi z) }
          - eta(y) { T(x,xi,z) - T(x,z,xi) - eta(x) T(z,xi,xi) } }[y<->z]
    """
    T = as_tensor(T_low, rank=3, dim=s.dim)
    phi, xi, eta = s.phi, s.xi, s.eta
    T_phi = np.einsum("xbc,by,cz->xyz", T, phi, phi)
    T_xi = np.einsum("b,byz->yz", xi, T)
    T_xi_phi = np.einsum("b,bcd,cy,dz->yz", xi, T, phi, phi)
    T_x_xi_z = np.einsum("xbz,b->xz", T, xi)
    T_x_z_xi = np.einsum("xzc,c->xz", T, xi)
    T_z_xi_xi = np.einsum("zbc,b,c->z", T, xi, xi)
    A = (T - T_phi
         - np.einsum("x,yz->xyz", eta, T_xi - T_xi_phi)
         - np.einsum("y,xz->xyz", eta, T_x_xi_z - T_x_z_xi)
         + np.einsum("y,x,z->xyz", eta, eta, T_z_xi_xi))
    return A - A.transpose(0, 2, 1)


def verify_phi_canonical(t: Torsion, s: Structure) -> ResidualReport:
    return ResidualReport({
        "phi_canonical": relative_residual(phi_canonical_defect(t.T_low, s), t.T_low),
    })


def k_from_r_f5(R, theta_star_xi: float, xi_theta_star_xi: float, s: Structure) -> np.ndarray:
    """Curvature of the phi-canonical connection on an F5 manifold with closed theta*.

    K = R + (xi theta*(xi) / 2n) pi_4 + (theta*(xi)**2 / 4n**2) pi_1.
    """
    R = as_tensor(R, rank=4, dim=s.dim)
    n = s.n
    pi = build_pi_and_L(s).pi
    K = R + xi_theta_star_xi / (2 * n) * pi[3] + theta_star_xi**2 / (4 * n**2) * pi[0]
    report = verify_curvature_like(K)
    if not report.passed(1e-10):
        raise ValueError(f"K is not curvature-like: {report.failures(1e-10)}")
    return K
