"""The F5 hypersurface family S(t), t > 0, realised pointwise.

At each t the tangent data is the canonical structure; every t-dependence is
carried by scalar fields.  Since eta = sinh t dt, a frame vector v sees
dt(v) = eta(v) / sinh t, so the differential of a field f(t) is the covector
f'(t) eta / sinh t.

Closed forms used (with theta*(xi) = 2n / cosh t):

    xi theta*(xi) / 2n = -1 / cosh^2 t,   theta*(xi)^2 / 4n^2 = 1 / cosh^2 t,
    R = -(1 / cosh^2 t) pi_2,             K = (1 / cosh^2 t) L1,
    tau(K) = 4n(n-1) / cosh^2 t,          tau*(K) = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .class_f import FTensor, OneForms, class_template, classify, one_forms
from .connection import k_from_r_f5
from .curvature import build_pi_and_L, check_phi_kaehler_type, ricci_scalars
from .errors import BadParam, ZeroModulus
from .sections_decomp import decompose_5d
from .structure import Structure, canonical_structure
from .tensor_core import ResidualReport, relative_residual, tensor_norm

THRESHOLDS = {
    "nu": 1e-9,
    "nu_star": 1e-9,
    "decomposition": 1e-9,
    "tau": 1e-10,
    "tau_star": 1e-10,
    "scalar_identity_first": 1e-6,
    "scalar_identity_second": 1e-6,
    "recovered_theta": 1e-6,
    "recovered_theta_star_xi": 1e-6,
    "recovered_theta_star_form": 1e-6,
    "closedness": 1e-10,
    "chain_scalars": 1e-10,
    "chain_K": 1e-10,
    "xi_theta_star_fd": 1e-6,
    "K_phi_kaehler": 1e-12,
    "F5_class": 1e-10,
}
MIN_CONVERGENCE_ORDER = 1.9
MIN_T = 0.1


def central_difference(f: Callable[[float], float], t: float, h: float) -> float:
    return (f(t + h) - f(t - h)) / (2.0 * h)


def richardson_derivative(f: Callable[[float], float], t: float, h: float) -> float:
    """One Richardson step on central differences with steps h and h/2."""
    return (4.0 * central_difference(f, t, 0.5 * h) - central_difference(f, t, h)) / 3.0


def default_fd_step(t: float) -> float:
    return 1e-4 * max(1.0, t)


@dataclass(frozen=True)
class ScalarFamily:
    """A pair of scalar curvature fields (tau, tau*) of t on the canonical frame."""

    n: int
    tau: Callable[[float], float]
    tau_star: Callable[[float], float]
    theta: Callable[[float], np.ndarray] | None = None
    theta_star: Callable[[float], np.ndarray] | None = None

    @property
    def structure(self) -> Structure:
        return canonical_structure(self.n)

    def dt(self, t: float) -> np.ndarray:
        """The covector dt = eta / sinh t on the frame."""
        return self.structure.eta / math.sinh(t)


class ExampleFamily(ScalarFamily):
    def __init__(self, n: int):
        if int(n) < 2:
            raise BadParam(f"the example family needs n >= 2, got {n}")
        n = int(n)
        super().__init__(
            n=n,
            tau=lambda t: 4 * n * (n - 1) / math.cosh(t) ** 2,
            tau_star=lambda t: 0.0,
            theta=lambda t: self.one_forms(t).theta,
            theta_star=lambda t: self.one_forms(t).theta_star,
        )

    def theta_star_xi(self, t: float) -> float:
        return 2 * self.n / math.cosh(t)

    def xi_theta_star_xi(self, t: float) -> float:
        """Derivative of theta*(xi) along xi, in closed form."""
        return -2 * self.n / math.cosh(t) ** 2

    def eta_scale(self, t: float) -> float:
        return math.sinh(t)

    def f_tensor(self, t: float) -> FTensor:
        return class_template("F5", self.structure, self.theta_star_xi(t))

    def one_forms(self, t: float) -> OneForms:
        return one_forms(self.f_tensor(t))


class ExampleFixture(NamedTuple):
    structure: Structure
    f: FTensor
    R: np.ndarray
    K: np.ndarray


def _check_t(t: float) -> None:
    if not t > 0:
        raise BadParam(f"t must be > 0, got {t}")


def example_fixture(n: int, t: float) -> ExampleFixture:
    _check_t(t)
    fam = ExampleFamily(n)
    s = fam.structure
    c = 1.0 / math.cosh(t) ** 2
    R = -c * build_pi_and_L(s).pi[1]
    K = k_from_r_f5(R, fam.theta_star_xi(t), fam.xi_theta_star_xi(t), s)
    return ExampleFixture(s, fam.f_tensor(t), R, K)


def _differential(fam: ScalarFamily, f: Callable[[float], float], t: float, h: float,
                  richardson: bool = True) -> np.ndarray:
    deriv = richardson_derivative(f, t, h) if richardson else central_difference(f, t, h)
    return deriv * fam.dt(t)


def scalar_identity_residual(fam: ScalarFamily, t: float, fd_step: float | None = None,
                             richardson: bool = True) -> ResidualReport:
    """Defects of

        d tau o phi  = -d tau* - (tau theta + tau* theta*) / n
        d tau* o phi =  d tau  - (tau* theta - tau theta*) / n

    as covectors on the frame, with derivatives by finite differences.
    """
    h = default_fd_step(t) if fd_step is None else fd_step
    if not t - h > 0:
        raise BadParam("t - fd_step must stay positive")
    s = fam.structure
    n = fam.n
    tau, tau_s = fam.tau(t), fam.tau_star(t)
    d_tau = _differential(fam, fam.tau, t, h, richardson)
    d_tau_s = _differential(fam, fam.tau_star, t, h, richardson)
    theta, theta_s = fam.theta(t), fam.theta_star(t)
    first = d_tau @ s.phi + d_tau_s + (tau * theta + tau_s * theta_s) / n
    second = d_tau_s @ s.phi - d_tau + (tau_s * theta - tau * theta_s) / n
    return ResidualReport({"first": tensor_norm(first), "second": tensor_norm(second)})


def convergence_order(fam: ScalarFamily, t: float, fd_step: float) -> float:
    """Observed order of the plain central-difference scalar-identity residual under step halving."""
    coarse = scalar_identity_residual(fam, t, fd_step, richardson=False).max()
    fine = scalar_identity_residual(fam, t, 0.5 * fd_step, richardson=False).max()
    if fine == 0.0:
        return math.inf
    return math.log2(coarse / fine)


def _unwrap_near(angle: float, ref: float) -> float:
    return angle + 2 * math.pi * round((ref - angle) / (2 * math.pi))


def recover_one_forms(fam: ScalarFamily, t: float, fd_step: float | None = None) -> OneForms:
    """theta = -n (df1 + df2 o phi), theta* = n (df1 o phi - df2).

    f1 is the polar angle of h = tau + i tau*, f2 = ln |h|.
    """
    h = default_fd_step(t) if fd_step is None else fd_step
    s = fam.structure
    n = fam.n
    tau, tau_s = fam.tau(t), fam.tau_star(t)
    if math.hypot(tau, tau_s) < 1e-12:
        raise ZeroModulus(f"|tau + i tau*| = {math.hypot(tau, tau_s):.3e} at t = {t}")

    ref = math.atan2(tau_s, tau)

    def angle(u: float) -> float:
        return _unwrap_near(math.atan2(fam.tau_star(u), fam.tau(u)), ref)

    def log_modulus(u: float) -> float:
        modulus = math.hypot(fam.tau(u), fam.tau_star(u))
        if modulus < 1e-12:
            raise ZeroModulus(f"|h| vanishes near t = {t}")
        return math.log(modulus)

    df1 = _differential(fam, angle, t, h)
    df2 = _differential(fam, log_modulus, t, h)
    theta = -n * (df1 + df2 @ s.phi)
    theta_star = n * (df1 @ s.phi - df2)
    return OneForms(theta=theta, theta_star=theta_star, omega=np.zeros(s.dim))


def closedness_residual(fam: ExampleFamily, t: float, fd_step: float | None = None) -> float:
    """theta* on an F5 manifold is closed iff x theta*(xi) = xi theta*(xi) eta(x)."""
    h = default_fd_step(t) if fd_step is None else fd_step
    s = fam.structure
    d_val = _differential(fam, fam.theta_star_xi, t, h)
    along_xi = float(d_val @ s.xi)
    return tensor_norm(d_val - along_xi * s.eta)


@dataclass
class FamilyReport:
    n: int
    fd_step: float | None
    points: dict[float, dict] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def failures(self) -> dict[float, list[str]]:
        bad = {}
        for t, point in self.points.items():
            names = [k for k, v in point["residuals"].items() if not v < THRESHOLDS[k]]
            if not point["measurements"]["convergence_order"] >= MIN_CONVERGENCE_ORDER:
                names.append("convergence_order")
            if not point["measurements"]["phi_holomorphic_defect"] > 0:
                names.append("phi_holomorphic_defect")
            if names:
                bad[t] = names
        return bad

    @property
    def passed(self) -> bool:
        return not self.failures()

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "fd_step": self.fd_step,
            "thresholds": dict(sorted(THRESHOLDS.items())),
            "min_convergence_order": MIN_CONVERGENCE_ORDER,
            "notes": list(self.notes),
            "points": [
                {
                    "t": t,
                    "residuals": dict(sorted(p["residuals"].items())),
                    "measurements": dict(sorted(p["measurements"].items())),
                }
                for t, p in sorted(self.points.items())
            ],
            "failures": {repr(t): v for t, v in sorted(self.failures().items())},
            "passed": self.passed,
        }


def _evaluate_point(fam: ExampleFamily, t: float, fd_step: float | None) -> dict:
    n = fam.n
    h = default_fd_step(t) if fd_step is None else fd_step
    fix = example_fixture(n, t)
    s = fix.structure
    c = 1.0 / math.cosh(t) ** 2
    res: dict[str, float] = {}
    meas: dict[str, float] = {}

    if n == 2:
        dec = decompose_5d(fix.K, s)
        res["nu"] = abs(dec.nu - c)
        res["nu_star"] = abs(dec.nu_star)
        res["decomposition"] = dec.residual
        meas["nu"] = dec.nu
        meas["nu_star"] = dec.nu_star

    _, _, pair = ricci_scalars(fix.K, s)
    res["tau"] = abs(pair.tau - 4 * n * (n - 1) * c)
    res["tau_star"] = abs(pair.tau_star)
    meas["tau"] = pair.tau
    meas["tau_star"] = pair.tau_star

    lemma = scalar_identity_residual(fam, t, h)
    res["scalar_identity_first"] = lemma["first"]
    res["scalar_identity_second"] = lemma["second"]
    meas["convergence_order"] = convergence_order(fam, t, h)

    rec = recover_one_forms(fam, t, h)
    d_log_h_xi = float(_differential(fam, lambda u: math.log(abs(fam.tau(u))), t, h) @ s.xi)
    res["recovered_theta"] = tensor_norm(rec.theta)
    res["recovered_theta_star_xi"] = abs(float(rec.theta_star @ s.xi) - fam.theta_star_xi(t))
    res["recovered_theta_star_form"] = tensor_norm(rec.theta_star - (-n * d_log_h_xi) * s.eta)
    meas["theta_star_xi_recovered"] = float(rec.theta_star @ s.xi)

    res["closedness"] = closedness_residual(fam, t, h)

    ts = fam.theta_star_xi(t)
    xts = fam.xi_theta_star_xi(t)
    res["chain_scalars"] = max(
        abs(xts / (2 * n) + ts**2 / (4 * n**2)),
        abs(xts / (2 * n) + c),
        abs(ts**2 / (4 * n**2) - c),
    )
    res["chain_K"] = relative_residual(fix.K - c * build_pi_and_L(s).L1, fix.K)
    xts_fd = richardson_derivative(fam.theta_star_xi, t, h) / math.sinh(t)
    res["xi_theta_star_fd"] = abs(xts_fd - xts)
    res["K_phi_kaehler"] = check_phi_kaehler_type(fix.K, s).max()
    res["F5_class"] = classify(fix.f).residuals["F5"]

    # phi-holomorphic pairs would need d tau(xi) = -d tau*(phi xi) = 0
    meas["phi_holomorphic_defect"] = abs(float(_differential(fam, fam.tau, t, h) @ s.xi))
    return {"residuals": res, "measurements": meas}


def verify_example(n: int, t_grid, fd_step: float | None = None) -> FamilyReport:
    fam = ExampleFamily(n)
    grid = [float(t) for t in t_grid]
    if not grid:
        raise BadParam("empty t grid")
    if min(grid) < MIN_T:
        raise BadParam(f"t grid must stay >= {MIN_T}")
    if fd_step is not None and not fd_step > 0:
        raise BadParam("fd_step must be positive")
    report = FamilyReport(n=n, fd_step=fd_step)
    if n != 2:
        report.notes.append("decomposition skipped (dimension is not 5)")
    for t in grid:
        report.points[t] = _evaluate_point(fam, t, fd_step)
    return report
