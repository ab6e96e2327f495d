"""Totally real sections, sectional curvatures k and k*, and the dimension-5 decomposition.

Any phi-Kaehler-type tensor on a 5-dimensional model space is a combination
nu L1 + nu* L2; :func:`decompose_5d` reads the two coefficients off an adapted
basis and reports how well the combination reproduces the input.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .curvature import build_pi_and_L, check_phi_kaehler_type, compose_phi, cyclic_sum, swap_xy
from .errors import DegenerateSample, DegenerateSection, NotPhiKaehler, WrongDimension
from .structure import MAX_RETRIES, AdaptedBasis, Structure, adapted_phi_basis
from .tensor_core import ResidualReport, as_tensor, relative_residual

SECTION_THRESHOLD = 1e-8
PHI_KAEHLER_TOL = 1e-8
# accept a coefficient vector z only if |z . z| >= this fraction of |z|^2,
# which keeps section vectors O(1) and the quartic evaluation of k accurate
SECTION_CONDITION = 0.5


def section_residuals(x, y, s: Structure) -> ResidualReport:
    phi_x, phi_y = s.phi @ x, s.phi @ y
    return ResidualReport({
        "g_xy": abs(s.inner(x, y)),
        "g_x_phix": abs(s.inner(x, phi_x)),
        "g_x_phiy": abs(s.inner(x, phi_y)),
        "g_y_phiy": abs(s.inner(y, phi_y)),
        "eta_x": abs(float(s.eta @ x)),
        "eta_y": abs(float(s.eta @ y)),
    })


def pi1_value(x, y, s: Structure) -> float:
    """pi_1(x, y, y, x) = g(x, x) g(y, y) - g(x, y)**2."""
    return s.inner(x, x) * s.inner(y, y) - s.inner(x, y) ** 2


@dataclass(frozen=True, eq=False)
class Section:
    x: np.ndarray
    y: np.ndarray
    residuals: ResidualReport

    @classmethod
    def from_vectors(cls, x, y, s: Structure) -> "Section":
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        return cls(x, y, section_residuals(x, y, s))

    def is_totally_real(self, tol: float = 1e-10) -> bool:
        return self.residuals.passed(tol)


def _real_phase(z: np.ndarray) -> np.ndarray:
    """Rotate z so that the complex-bilinear square z . z is real."""
    return z * np.exp(-0.5j * np.angle(z @ z))


def random_totally_real_section(s: Structure, basis: AdaptedBasis, seed) -> Section:
    """Seeded totally real 2-plane orthogonal to xi.

    A horizontal vector u = sum a_i e_i + c_i phi e_i is encoded as z = a + i c.
    Then g(u, v) = -Re(z_u . z_v) and g(u, phi v) = Im(z_u . z_v), so the six
    conditions reduce to z_x . z_y = 0 with z_x . z_x and z_y . z_y real.
    """
    n = basis.n
    if n < 2:
        raise WrongDimension("totally real sections orthogonal to xi need n >= 2")
    rng = np.random.default_rng(seed)
    E = basis.columns[:, :n]
    PE = basis.columns[:, n:2 * n]
    for _ in range(MAX_RETRIES):
        zx = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        zx = _real_phase(zx)
        sq_x = (zx @ zx).real
        if abs(sq_x) < SECTION_CONDITION * np.vdot(zx, zx).real:
            continue
        zy = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        zy = zy - (zy @ zx) / (zx @ zx) * zx
        zy = _real_phase(zy)
        sq_y = (zy @ zy).real
        if abs(sq_y) < SECTION_CONDITION * np.vdot(zy, zy).real:
            continue
        zx = zx / np.sqrt(abs(sq_x))
        zy = zy / np.sqrt(abs(sq_y))
        x = E @ zx.real + PE @ zx.imag
        y = E @ zy.real + PE @ zy.imag
        if abs(pi1_value(x, y, s)) < SECTION_THRESHOLD:
            continue
        return Section.from_vectors(x, y, s)
    raise DegenerateSample("no nondegenerate totally real section after retries")


def sectional_k(L, sec: Section, s: Structure) -> tuple[float, float]:
    """(k, k*) = (L(x,y,y,x), L(x,y,y,phi x)) / pi_1(x,y,y,x)."""
    denom = pi1_value(sec.x, sec.y, s)
    if abs(denom) < SECTION_THRESHOLD:
        raise DegenerateSection(f"pi_1(x, y, y, x) = {denom:.3e}")
    L = np.asarray(L, dtype=np.float64)
    x, y = sec.x, sec.y
    k = np.einsum("abcd,a,b,c,d->", L, x, y, y, x)
    k_star = np.einsum("abcd,a,b,c,d->", L, x, y, y, s.phi @ x)
    return float(k / denom), float(k_star / denom)


# -- projection onto phi-Kaehler-type tensors --------------------------------

def _constraint_blocks(s: Structure):
    """Linear maps whose common kernel is the space of phi-Kaehler-type tensors."""
    yield lambda L: L + swap_xy(L)
    yield lambda L: L + L.transpose(0, 1, 3, 2)
    yield cyclic_sum
    yield lambda L: compose_phi(L, s, 2, 3) + L


def _batched(op, N: int, d: int) -> np.ndarray:
    """Matrix of ``op`` acting on vec(L) (columns are images of unit tensors)."""
    cols = np.empty((N, N))
    eye = np.eye(d**4).reshape(d**4, d, d, d, d)
    for k in range(N):
        cols[:, k] = op(eye[k]).ravel()
    return cols


@lru_cache(maxsize=8)
def _kaehler_subspace(n: int, phi_bytes: bytes) -> np.ndarray:
    d = 2 * n + 1
    phi = np.frombuffer(phi_bytes).reshape(d, d)
    s = Structure(n=n, phi=phi, xi=np.zeros(d), eta=np.zeros(d), g=np.eye(d))
    N = d**4
    gram = np.zeros((N, N))
    for op in _constraint_blocks(s):
        M = _batched(op, N, d)
        gram += M.T @ M
    w, V = np.linalg.eigh(gram)
    return V[:, w < 1e-9 * max(1.0, w[-1])]


@lru_cache(maxsize=32)
def _pushed_kaehler_subspace(s: Structure) -> np.ndarray:
    # The constraints only involve phi, and phi is canonical in an adapted
    # basis B, so the subspace for s is the canonical one pulled back by B^-1.
    # This keeps the dimension exact even when phi is badly conditioned.
    n, d = s.n, s.dim
    canon = np.zeros((d, d))
    for i in range(n):
        canon[n + i, i] = 1.0
        canon[i, n + i] = -1.0
    U0 = _kaehler_subspace(n, canon.tobytes())
    B = adapted_phi_basis(s, 0).columns
    Binv = np.linalg.inv(B)
    k = U0.shape[1]
    W = np.einsum("kijlm,ia,jb,lc,me->kabce", U0.T.reshape((k,) + (d,) * 4), Binv, Binv, Binv, Binv)
    Q, _ = np.linalg.qr(W.reshape(k, -1).T)
    return Q


def kaehler_subspace(s: Structure) -> np.ndarray:
    """Orthonormal basis (columns, over vec(L)) of the phi-Kaehler-type tensors."""
    if s.n > 3:
        raise WrongDimension("dense projection is limited to n <= 3")
    return _pushed_kaehler_subspace(s)


def project_phi_kaehler(T, s: Structure) -> np.ndarray:
    """Least-squares nearest tensor satisfying the antisymmetries, first Bianchi and phi-Kaehler identities."""
    T = as_tensor(T, rank=4, dim=s.dim)
    U = kaehler_subspace(s)
    return (U @ (U.T @ T.ravel())).reshape(T.shape)


def project_phi_kaehler_alternating(T, s: Structure, max_iter: int = 5000, tol: float = 1e-13) -> np.ndarray:
    """Same projection by cycling the four orthogonal projectors (von Neumann).

    Kept as an independent check on :func:`project_phi_kaehler`.
    """
    T = as_tensor(T, rank=4, dim=s.dim)
    d = s.dim
    N = d**4
    K = _batched(lambda L: compose_phi(L, s, 2, 3) + L, N, d)
    kernel_k = np.eye(N) - np.linalg.pinv(K) @ K

    projectors = (
        lambda L: 0.5 * (L - swap_xy(L)),
        lambda L: 0.5 * (L - L.transpose(0, 1, 3, 2)),
        lambda L: L - cyclic_sum(L) / 3.0,
        lambda L: (kernel_k @ L.ravel()).reshape(L.shape),
    )
    L = T.copy()
    for _ in range(max_iter):
        prev = L
        for P in projectors:
            L = P(L)
        if np.max(np.abs(L - prev)) < tol:
            break
    return L


@dataclass(frozen=True)
class Decomposition:
    nu: float
    nu_star: float
    residual: float

    def to_dict(self) -> dict:
        return {"nu": self.nu, "nu_star": self.nu_star, "residual": self.residual}


def decompose_5d(L, s: Structure, seed=0) -> Decomposition:
    """Write a phi-Kaehler-type L on a 5-dimensional space as nu L1 + nu* L2."""
    if s.n != 2:
        raise WrongDimension(f"decomposition needs n = 2 (dimension 5), got n = {s.n}")
    L = as_tensor(L, rank=4, dim=s.dim)
    pre = check_phi_kaehler_type(L, s)
    if not pre.passed(PHI_KAEHLER_TOL):
        raise NotPhiKaehler(f"phi-Kaehler precondition failed: {pre.failures(PHI_KAEHLER_TOL)}")
    B = adapted_phi_basis(s, seed)
    e1, e2, fe1 = B.e(0), B.e(1), B.phi_e(0)
    nu = float(np.einsum("abcd,a,b,c,d->", L, e1, e2, e2, e1))
    nu_star = float(np.einsum("abcd,a,b,c,d->", L, e1, e2, e2, fe1))
    cb = build_pi_and_L(s)
    residual = relative_residual(L - nu * cb.L1 - nu_star * cb.L2, L)
    return Decomposition(nu, nu_star, residual)


def constancy_check(L, s: Structure, samples: int = 100, seed=0) -> ResidualReport:
    """Max deviation of (k, k*) over seeded totally real sections orthogonal to xi.

    In dimension 5 the reference values come from :func:`decompose_5d`;
    otherwise from the first sampled section.  Sections are drawn in the
    coordinates of a seeded adapted basis.
    """
    if s.n < 2:
        raise WrongDimension("constancy needs n >= 2")
    basis = adapted_phi_basis(s, seed)
    # Sample and evaluate in adapted coordinates: section coefficients there
    # are O(1), while in the original frame they inherit the conditioning of g.
    B = basis.columns
    L_adapted = np.einsum("abcd,ai,bj,ck,dl->ijkl", as_tensor(L, rank=4, dim=s.dim), B, B, B, B)
    s_adapted = s.in_basis(B)
    frame = AdaptedBasis(np.eye(s.dim))
    values = [
        sectional_k(L_adapted, random_totally_real_section(s_adapted, frame, [seed, i]), s_adapted)
        for i in range(samples)
    ]
    if s.n == 2:
        dec = decompose_5d(L, s, seed)
        ref = (dec.nu, dec.nu_star)
    else:
        ref = values[0]
    ks = np.array(values)
    return ResidualReport({
        "k": float(np.max(np.abs(ks[:, 0] - ref[0]))),
        "k_star": float(np.max(np.abs(ks[:, 1] - ref[1]))),
    })
