"""Dense multilinear algebra on a d-dimensional model tangent space.

Tensors are plain ``numpy`` arrays of float64.  Index ``a`` of a covariant
tensor holds the value on the basis vector ``e_a``, so ``T[a, b, c, d]`` is
``T(e_a, e_b, e_c, e_d)``.  Endomorphisms are matrices acting on column
vectors: ``phi @ x`` is ``phi(x)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NearSingular

NORM_CONVENTION = "max-abs"
SINGULAR_RCOND = 1e-10


@dataclass(frozen=True)
class ResidualReport:
    """Named nonnegative residuals, all measured in the max-abs norm."""

    residuals: dict[str, float] = field(default_factory=dict)
    norm_convention: str = NORM_CONVENTION

    def __post_init__(self):
        for label, value in self.residuals.items():
            if not value >= 0.0:
                raise ValueError(f"residual {label!r} is negative or NaN: {value}")

    def __getitem__(self, label: str) -> float:
        return self.residuals[label]

    def __iter__(self):
        return iter(self.residuals)

    def max(self) -> float:
        return max(self.residuals.values(), default=0.0)

    def passed(self, tol: float) -> bool:
        return self.max() < tol

    def failures(self, tol: float) -> dict[str, float]:
        return {k: v for k, v in self.residuals.items() if not v < tol}

    def merged(self, other: "ResidualReport", prefix: str = "") -> "ResidualReport":
        combined = dict(self.residuals)
        combined.update({prefix + k: v for k, v in other.residuals.items()})
        return ResidualReport(combined, self.norm_convention)

    def to_dict(self) -> dict:
        return {
            "norm_convention": self.norm_convention,
            "residuals": {k: float(self.residuals[k]) for k in sorted(self.residuals)},
        }


def as_tensor(values, rank: int | None = None, dim: int | None = None) -> np.ndarray:
    """Validate and return a float64 array with equal side lengths."""
    arr = np.asarray(values, dtype=np.float64)
    if rank is not None and arr.ndim != rank:
        raise ValueError(f"expected a rank-{rank} tensor, got shape {arr.shape}")
    if arr.ndim and len(set(arr.shape)) != 1:
        raise ValueError(f"tensor sides differ: {arr.shape}")
    if dim is not None and arr.ndim and arr.shape[0] != dim:
        raise ValueError(f"expected dimension {dim}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("tensor has non-finite entries")
    return arr


def tensor_norm(t) -> float:
    """Max-abs norm, the residual norm used throughout the package."""
    arr = np.asarray(t, dtype=np.float64)
    if arr.size == 0:
        return 0.0
    return float(np.max(np.abs(arr)))


def relative_residual(diff, reference) -> float:
    return tensor_norm(diff) / max(1.0, tensor_norm(reference))


def metric_inverse(g) -> np.ndarray:
    g = as_tensor(g, rank=2)
    if tensor_norm(g - g.T) > 1e-12 * max(1.0, tensor_norm(g)):
        raise ValueError("metric is not symmetric")
    # Reciprocal condition number rather than a determinant test: det g mixes
    # the sizes of all singular values and misfires on large, healthy metrics.
    sv = np.linalg.svd(g, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] < SINGULAR_RCOND * sv[0]:
        raise NearSingular(f"sigma_min / sigma_max = {sv[-1] / max(sv[0], 1e-300):.3e} is below {SINGULAR_RCOND}")
    inv = np.linalg.inv(g)
    return 0.5 * (inv + inv.T)


def contract_ricci(L, g_inv) -> np.ndarray:
    """rho(y, z) = g^{ij} L(e_i, y, z, e_j)."""
    L = as_tensor(L, rank=4)
    g_inv = as_tensor(g_inv, rank=2, dim=L.shape[0])
    return np.einsum("ij,iyzj->yz", g_inv, L)


def scalar_from_ricci(rho, g_inv) -> float:
    rho = as_tensor(rho, rank=2)
    g_inv = as_tensor(g_inv, rank=2, dim=rho.shape[0])
    return float(np.einsum("ij,ij->", g_inv, rho))
