"""The structural tensor F(x, y, z) = g((nabla_x phi) y, z) and the main classes.

Only the classes in which F is expressed through the metrics are modelled:
F0 (F = 0), F1, F4, F5 and F11.  Classification extracts the 1-forms
theta, theta*, omega from F, rebuilds each class template from them and
reports the relative residual.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadParam, FSymmetryViolation
from .structure import Structure
from .tensor_core import ResidualReport, as_tensor, relative_residual, tensor_norm

CLASS_IDS = ("F0", "F1", "F4", "F5", "F11")

SYMMETRY_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class OneForms:
    theta: np.ndarray
    theta_star: np.ndarray
    omega: np.ndarray

    def residuals(self, s: Structure) -> ResidualReport:
        lhs = self.theta_star @ s.phi
        rhs = -(self.theta @ s.phi @ s.phi)
        scale = max(1.0, tensor_norm(self.theta), tensor_norm(self.theta_star))
        return ResidualReport({
            "omega_xi": abs(float(self.omega @ s.xi)) / max(1.0, tensor_norm(self.omega)),
            "theta_star_phi": tensor_norm(lhs - rhs) / scale,
        })

    def to_dict(self) -> dict:
        return {
            "theta": self.theta.tolist(),
            "theta_star": self.theta_star.tolist(),
            "omega": self.omega.tolist(),
        }


@dataclass(frozen=True, eq=False)
class FTensor:
    F: np.ndarray
    structure: Structure

    def __post_init__(self):
        object.__setattr__(self, "F", as_tensor(self.F, rank=3, dim=self.structure.dim))

    def residuals(self) -> ResidualReport:
        return f_symmetry_residuals(self.F, self.structure)


def f_symmetry_residuals(F, s: Structure) -> ResidualReport:
    F = np.asarray(F, dtype=np.float64)
    phi, xi, eta = s.phi, s.xi, s.eta
    F_phi = np.einsum("xbc,by,cz->xyz", F, phi, phi)
    F_xi_mid = np.einsum("xbz,b->xz", F, xi)
    F_xi_last = np.einsum("xyc,c->xy", F, xi)
    rebuilt = (F_phi
               + np.einsum("y,xz->xyz", eta, F_xi_mid)
               + np.einsum("z,xy->xyz", eta, F_xi_last))
    return ResidualReport({
        "yz_symmetry": relative_residual(F - F.transpose(0, 2, 1), F),
        "phi_decomposition": relative_residual(F - rebuilt, F),
    })


def f_from_nabla_phi(s: Structure, nabla_phi) -> FTensor:
    """F from the values of nabla phi at a point.

    ``nabla_phi[x, y, a]`` is the a-th component of (nabla_{e_x} phi) e_y.
    """
    N = as_tensor(nabla_phi, rank=3, dim=s.dim)
    F = np.einsum("xya,az->xyz", N, s.g)
    f = FTensor(F, s)
    report = f.residuals()
    if not report.passed(SYMMETRY_TOL):
        raise FSymmetryViolation(f"F symmetries violated: {report.failures(SYMMETRY_TOL)}")
    return f


def nabla_phi_from_f(F, s: Structure) -> np.ndarray:
    """Inverse of :func:`f_from_nabla_phi`: raise the last slot of F."""
    return np.einsum("xyz,za->xya", np.asarray(F, dtype=np.float64), s.g_inv)


def horizontal_inverse(s: Structure) -> np.ndarray:
    """g^{ij} restricted to ker(eta): the inverse metric minus xi (x) xi.

    In a basis {e_1..e_2n, xi} with e_i in ker(eta) this is the inverse of the
    horizontal block, i.e. the sum over i, j = 1..2n only.
    """
    return s.g_inv - np.outer(s.xi, s.xi)


def one_forms(f: FTensor) -> OneForms:
    """theta, theta* (traced over the horizontal basis) and omega(z) = F(xi, xi, z)."""
    s, F = f.structure, f.F
    h = horizontal_inverse(s)
    theta = np.einsum("ij,ijz->z", h, F)
    theta_star = np.einsum("ij,kj,ikz->z", h, s.phi, F)
    omega = np.einsum("a,b,abz->z", s.xi, s.xi, F)
    return OneForms(theta, theta_star, omega)


def _sym_yz(A: np.ndarray) -> np.ndarray:
    return A + A.transpose(0, 2, 1)


def class_template(class_id: str, s: Structure, params=None) -> FTensor:
    """Build F from the defining formula of a main class.

    params: F1 -> covector theta; F4 -> scalar theta(xi); F5 -> scalar
    theta*(xi); F11 -> covector omega with omega(xi) = 0; F0 -> ignored.
    """
    n, d = s.n, s.dim
    g, phi, eta = s.g, s.phi, s.eta
    if class_id == "F0":
        return FTensor(np.zeros((d, d, d)), s)
    if class_id == "F1":
        theta = as_tensor(params, rank=1, dim=d)
        g_phi = g @ phi
        g_phiphi = phi.T @ g @ phi
        A = (np.einsum("xy,z->xyz", g_phi, theta @ phi)
             + np.einsum("xy,z->xyz", g_phiphi, theta @ phi @ phi))
        return FTensor(_sym_yz(A) / (2 * n), s)
    if class_id == "F4":
        c = float(params)
        g_phiphi = phi.T @ g @ phi
        A = np.einsum("xy,z->xyz", g_phiphi, eta)
        return FTensor(-c / (2 * n) * _sym_yz(A), s)
    if class_id == "F5":
        c = float(params)
        A = np.einsum("xy,z->xyz", g @ phi, eta)
        return FTensor(-c / (2 * n) * _sym_yz(A), s)
    if class_id == "F11":
        omega = as_tensor(params, rank=1, dim=d)
        if abs(float(omega @ s.xi)) > 1e-12 * max(1.0, tensor_norm(omega)):
            raise BadParam("F11 requires omega(xi) = 0")
        A = np.einsum("x,y,z->xyz", eta, eta, omega)
        return FTensor(_sym_yz(A), s)
    raise BadParam(f"unsupported class {class_id!r}; expected one of {CLASS_IDS}")


def template_from_forms(class_id: str, forms: OneForms, s: Structure) -> FTensor:
    """Instantiate a class template with 1-forms extracted from some F."""
    if class_id == "F0":
        return class_template("F0", s)
    if class_id == "F1":
        return class_template("F1", s, forms.theta)
    if class_id == "F4":
        return class_template("F4", s, float(forms.theta @ s.xi))
    if class_id == "F5":
        return class_template("F5", s, float(forms.theta_star @ s.xi))
    if class_id == "F11":
        omega = forms.omega - float(forms.omega @ s.xi) * s.eta
        return class_template("F11", s, omega)
    raise BadParam(f"unsupported class {class_id!r}")


@dataclass(frozen=True)
class Classification:
    residuals: ResidualReport
    members: tuple[str, ...]
    forms: OneForms

    def to_dict(self) -> dict:
        return {
            "residuals": {k: float(self.residuals[k]) for k in CLASS_IDS},
            "members": list(self.members),
            "one_forms": self.forms.to_dict(),
        }


def classify(f: FTensor, tol: float = 1e-10) -> Classification:
    forms = one_forms(f)
    res = {}
    for cid in CLASS_IDS:
        template = template_from_forms(cid, forms, f.structure)
        res[cid] = relative_residual(f.F - template.F, f.F)
    members = tuple(cid for cid in CLASS_IDS if res[cid] < tol)
    return Classification(ResidualReport(res), members, forms)
