"""Almost contact B-metric structures on a model tangent space.

A :class:`Structure` stores the quadruple (phi, xi, eta, g) in some basis of a
(2n+1)-dimensional vector space.  The canonical model uses the basis
``(e_1..e_n, phi e_1..phi e_n, xi)`` in which ``g = diag(-1_n, +1_n, 1)``;
:func:`random_structure` produces the same structure in a random basis.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import BadParam, DegenerateSample
from .tensor_core import ResidualReport, as_tensor, metric_inverse, relative_residual, tensor_norm

MAX_RETRIES = 100


@dataclass(frozen=True, eq=False)
class Structure:
    n: int
    phi: np.ndarray
    xi: np.ndarray
    eta: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        if int(self.n) < 1:
            raise BadParam(f"n must be >= 1, got {self.n}")
        d = 2 * self.n + 1
        object.__setattr__(self, "phi", as_tensor(self.phi, rank=2, dim=d))
        object.__setattr__(self, "g", as_tensor(self.g, rank=2, dim=d))
        object.__setattr__(self, "xi", as_tensor(self.xi, rank=1, dim=d))
        object.__setattr__(self, "eta", as_tensor(self.eta, rank=1, dim=d))
        for arr in (self.phi, self.g, self.xi, self.eta):
            arr.flags.writeable = False

    @property
    def dim(self) -> int:
        return 2 * self.n + 1

    @cached_property
    def g_inv(self) -> np.ndarray:
        return metric_inverse(self.g)

    @cached_property
    def g_assoc(self) -> np.ndarray:
        return associated_metric(self)

    @cached_property
    def g_phi(self) -> np.ndarray:
        """Matrix of the bilinear form g(x, phi y)."""
        return self.g @ self.phi

    def inner(self, x, y) -> float:
        return float(np.asarray(x) @ self.g @ np.asarray(y))

    def in_basis(self, basis) -> "Structure":
        """The same structure expressed in the coordinates of ``basis`` (columns)."""
        B = np.asarray(basis, dtype=np.float64)
        Binv = np.linalg.inv(B)
        return Structure(
            n=self.n,
            phi=Binv @ self.phi @ B,
            xi=Binv @ self.xi,
            eta=self.eta @ B,
            g=B.T @ self.g @ B,
        )


@dataclass(frozen=True, eq=False)
class AdaptedBasis:
    """Columns ordered (e_1..e_n, phi e_1..phi e_n, xi)."""

    columns: np.ndarray

    @property
    def n(self) -> int:
        return (self.columns.shape[1] - 1) // 2

    def e(self, i: int) -> np.ndarray:
        return self.columns[:, i]

    def phi_e(self, i: int) -> np.ndarray:
        return self.columns[:, self.n + i]

    @property
    def xi(self) -> np.ndarray:
        return self.columns[:, -1]

    def gram(self, s: Structure) -> np.ndarray:
        return self.columns.T @ s.g @ self.columns

    def residuals(self, s: Structure) -> ResidualReport:
        n = self.n
        target = np.diag(np.r_[-np.ones(n), np.ones(n), 1.0])
        E = self.columns[:, :n]
        return ResidualReport({
            "gram": tensor_norm(self.gram(s) - target),
            "phi_chain": tensor_norm(s.phi @ E - self.columns[:, n:2 * n]),
            "eta_horizontal": tensor_norm(s.eta @ self.columns[:, :2 * n]),
            "xi_column": tensor_norm(self.xi - s.xi),
        })


def canonical_structure(n: int) -> Structure:
    n = int(n)
    if n < 1:
        raise BadParam(f"n must be >= 1, got {n}")
    d = 2 * n + 1
    phi = np.zeros((d, d))
    for i in range(n):
        phi[n + i, i] = 1.0   # e_i -> phi e_i
        phi[i, n + i] = -1.0  # phi e_i -> -e_i
    xi = np.zeros(d)
    xi[-1] = 1.0
    eta = xi.copy()
    g = np.diag(np.r_[-np.ones(n), np.ones(n), 1.0])
    return Structure(n=n, phi=phi, xi=xi, eta=eta, g=g)


def verify_structure(s: Structure) -> ResidualReport:
    """Residuals of the structure relations; metric ones are relative to max(1, |g|)."""
    d = s.dim
    phi, xi, eta, g = s.phi, s.xi, s.eta, s.g
    gphi = g @ phi
    return ResidualReport({
        "phi_xi": relative_residual(phi @ xi, xi),
        "phi_squared": relative_residual(phi @ phi + np.eye(d) - np.outer(xi, eta), phi @ phi),
        "eta_phi": relative_residual(eta @ phi, eta),
        "eta_xi": abs(float(eta @ xi) - 1.0),
        "b_metric": relative_residual(g + phi.T @ g @ phi - np.outer(eta, eta), g),
        "phi_g_symmetric": relative_residual(gphi - gphi.T, gphi),
    })


def associated_metric(s: Structure) -> np.ndarray:
    """g~(x, y) = g(x, phi y) + eta(x) eta(y)."""
    return s.g @ s.phi + np.outer(s.eta, s.eta)


def with_associated_metric(s: Structure) -> Structure:
    """The structure (phi, xi, eta, g~), itself an almost contact B-metric structure."""
    return Structure(n=s.n, phi=s.phi, xi=s.xi, eta=s.eta, g=associated_metric(s))


def random_structure(n: int, seed) -> Structure:
    """Canonical structure pushed forward by a seeded random change of basis A.

    New coordinates are ``x' = A x``, so phi' = A phi A^-1, xi' = A xi,
    eta' = eta A^-1 and g' = A^-T g A^-1.
    """
    base = canonical_structure(n)
    d = base.dim
    rng = np.random.default_rng(seed)
    for _ in range(MAX_RETRIES):
        A = rng.standard_normal((d, d))
        if abs(np.linalg.det(A)) > 0.1 and np.linalg.cond(A) < 100.0:
            break
    else:
        raise DegenerateSample("no well-conditioned change of basis drawn")
    return conjugate(base, A)


def conjugate(s: Structure, A) -> Structure:
    A = np.asarray(A, dtype=np.float64)
    Ainv = np.linalg.inv(A)
    g = Ainv.T @ s.g @ Ainv
    return Structure(
        n=s.n,
        phi=A @ s.phi @ Ainv,
        xi=A @ s.xi,
        eta=s.eta @ Ainv,
        g=0.5 * (g + g.T),
    )


def _solve_phi_null(a: float, b: float) -> float:
    """Root s of b - 2 a s - b s**2 = 0 making g(w, phi w) vanish for w = v + s phi v."""
    if b == 0.0:
        return 0.0
    # roots (-a +- r) / b with product -1; take the small one (no cancellation)
    r = float(np.hypot(a, b))
    return b / (a + r) if a >= 0 else -b / (r - a)


def adapted_phi_basis(s: Structure, seed=0) -> AdaptedBasis:
    """Seeded construction of a basis (e_i, phi e_i, xi) with g = diag(-1_n, 1_n, 1)."""
    rng = np.random.default_rng(seed)
    n, d = s.n, s.dim
    g, phi, xi, eta = s.g, s.phi, s.xi, s.eta
    es: list[np.ndarray] = []
    for _ in range(n):
        for _attempt in range(MAX_RETRIES):
            v = rng.standard_normal(d)
            # g-orthogonal complement of span{xi, e_j, phi e_j}; two passes for stability
            for _pass in range(2):
                v = v - float(eta @ v) * xi
                for e in es:
                    fe = phi @ e
                    v = v + (e @ g @ v) * e - (fe @ g @ v) * fe
            a = float(v @ g @ v)
            b = float(v @ g @ (phi @ v))
            w = v + _solve_phi_null(a, b) * (phi @ v)
            gww = float(w @ g @ w)
            scale = max(1.0, float(w @ w))
            if abs(gww) < 1e-6 * scale:
                continue
            if gww > 0:
                w = phi @ w
                gww = -gww
            es.append(w / np.sqrt(-gww))
            break
        else:
            raise DegenerateSample("no nondegenerate starting vector after retries")
    E = np.column_stack(es)
    return AdaptedBasis(np.column_stack([E, phi @ E, xi]))
