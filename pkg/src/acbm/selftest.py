"""Named invariant checks over every module, used by ``acbm selftest``."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import class_f, connection, curvature, hypersurface, sections_decomp, structure, tensor_core
from .tensor_core import tensor_norm


@dataclass
class Check:
    name: str
    value: float | None
    threshold: float
    mode: str = "lt"  # "lt": value < threshold passes; "gt": value > threshold passes
    status: str = "pass"

    def to_dict(self) -> dict:
        return {"value": self.value, "threshold": self.threshold, "mode": self.mode, "status": self.status}


class Suite:
    def __init__(self):
        self.checks: list[Check] = []

    def add(self, name: str, value: float, threshold: float, mode: str = "lt") -> None:
        value = float(value)
        ok = value < threshold if mode == "lt" else value > threshold
        self.checks.append(Check(name, value, threshold, mode, "pass" if ok else "fail"))

    def skip(self, name: str, reason: str) -> None:
        self.checks.append(Check(name, None, math.nan, status=f"skipped: {reason}"))

    def run(self, name: str, fn: Callable[[], float], threshold: float, mode: str = "lt") -> None:
        try:
            self.add(name, fn(), threshold, mode)
        except Exception as exc:  # a crashing check is a failed check
            self.checks.append(Check(name, None, threshold, mode, f"fail: {type(exc).__name__}: {exc}"))

    @property
    def passed(self) -> bool:
        return all(c.status == "pass" or c.status.startswith("skipped") for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "checks": {c.name: c.to_dict() for c in self.checks},
            "counts": {
                "total": len(self.checks),
                "passed": sum(c.status == "pass" for c in self.checks),
                "skipped": sum(c.status.startswith("skipped") for c in self.checks),
                "failed": sum(not (c.status == "pass" or c.status.startswith("skipped")) for c in self.checks),
            },
            "passed": self.passed,
        }


def _rng(seed, *tag: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), *tag])


def _naive_ricci(L, g_inv) -> np.ndarray:
    d = L.shape[0]
    rho = np.zeros((d, d))
    for y in range(d):
        for z in range(d):
            rho[y, z] = sum(g_inv[i, j] * L[i, y, z, j] for i in range(d) for j in range(d))
    return rho


def _structure_checks(suite: Suite, n: int, seed: int, samples: int) -> None:
    can = structure.canonical_structure(n)
    suite.add("structure.canonical_axioms", structure.verify_structure(can).max(), 1e-12)
    worst = max(structure.verify_structure(structure.random_structure(n, [seed, k])).max()
                for k in range(samples))
    suite.add("structure.random_axioms", worst, 1e-10)
    s = structure.random_structure(n, seed)
    suite.add("structure.associated_metric_is_b_metric",
              structure.verify_structure(structure.with_associated_metric(s)).max(), 1e-10)
    suite.add("structure.associated_metric_symmetric", tensor_norm(s.g_assoc - s.g_assoc.T), 1e-10)
    basis = structure.adapted_phi_basis(s, seed)
    suite.add("structure.adapted_basis", basis.residuals(s).max(), 1e-10)
    in_b = s.in_basis(basis.columns)
    suite.add("structure.adapted_basis_reproduces_canonical",
              max(tensor_norm(in_b.phi - can.phi), tensor_norm(in_b.g - can.g),
                  tensor_norm(in_b.xi - can.xi), tensor_norm(in_b.eta - can.eta)), 1e-10)
    suite.add("structure.trace_phi", abs(np.trace(s.phi)), 1e-10)
    suite.add("structure.rank_phi_defect", abs(np.linalg.matrix_rank(s.phi, tol=1e-8) - 2 * n), 0.5)
    suite.add("structure.g_xi_xi", abs(s.inner(s.xi, s.xi) - 1.0), 1e-10)


def _tensor_core_checks(suite: Suite, n: int, seed: int) -> None:
    s = structure.random_structure(n, seed)
    suite.add("tensor_core.metric_inverse", tensor_norm(s.g @ s.g_inv - np.eye(s.dim)), 1e-12 * max(1.0, tensor_norm(s.g)) * 100)
    suite.add("tensor_core.inverse_involution",
              tensor_norm(tensor_core.metric_inverse(s.g_inv) - s.g) / max(1.0, tensor_norm(s.g)), 1e-12 * 100)
    L = _rng(seed, 1).standard_normal((s.dim,) * 4)
    suite.add("tensor_core.ricci_matches_loop",
              tensor_norm(tensor_core.contract_ricci(L, s.g_inv) - _naive_ricci(L, s.g_inv)), 1e-12)


def _class_f_checks(suite: Suite, n: int, seed: int) -> None:
    s = structure.random_structure(n, seed)
    rng = _rng(seed, 2)
    theta = rng.standard_normal(s.dim)
    omega = rng.standard_normal(s.dim)
    omega -= float(omega @ s.xi) * s.eta
    params = {"F1": theta, "F4": 1.0, "F5": 1.0, "F11": omega}
    for cid, p in params.items():
        f = class_f.class_template(cid, s, p)
        suite.add(f"class_f.{cid}.symmetries", f.residuals().max(), 1e-10)
        cls = class_f.classify(f)
        suite.add(f"class_f.{cid}.classified", cls.residuals[cid], 1e-10)
        forms = class_f.one_forms(f)
        suite.add(f"class_f.{cid}.one_form_relations", forms.residuals(s).max(), 1e-10)
    forms = class_f.one_forms(class_f.class_template("F1", s, theta))
    suite.add("class_f.F1.recovers_theta_horizontal",
              max(tensor_norm(forms.theta @ s.phi - theta @ s.phi),
                  tensor_norm(forms.theta @ s.phi @ s.phi - theta @ s.phi @ s.phi)), 1e-10)
    f11 = class_f.one_forms(class_f.class_template("F11", s, omega))
    suite.add("class_f.F11.vanishing_theta", max(tensor_norm(f11.theta), tensor_norm(f11.theta_star)), 1e-10)
    suite.add("class_f.F11.recovers_omega", tensor_norm(f11.omega - omega), 1e-10)


def _curvature_identity_checks(suite: Suite, s, label: str, tol: float) -> None:
    n = s.n
    cb = curvature.build_pi_and_L(s)
    for i, p in enumerate(cb.pi, start=1):
        suite.add(f"curvature.{label}.pi{i}_curvature_like", curvature.verify_curvature_like(p).max(), tol)
    suite.add(f"curvature.{label}.L1_phi_kaehler", curvature.check_phi_kaehler_type(cb.L1, s).max(), tol)
    suite.add(f"curvature.{label}.L2_phi_kaehler", curvature.check_phi_kaehler_type(cb.L2, s).max(), tol)
    suite.add(f"curvature.{label}.L1_star_is_minus_L2",
              tensor_norm(curvature.associated(cb.L1, s) + cb.L2) / max(1.0, tensor_norm(cb.L2)), tol)
    suite.add(f"curvature.{label}.L2_star_is_L1",
              tensor_norm(curvature.associated(cb.L2, s) - cb.L1) / max(1.0, tensor_norm(cb.L1)), tol)
    double = curvature.associated(curvature.associated(cb.L1, s), s)
    suite.add(f"curvature.{label}.double_star", tensor_norm(double + cb.L1) / max(1.0, tensor_norm(cb.L1)), tol)
    _, _, p1 = curvature.ricci_scalars(cb.L1, s)
    _, _, p2 = curvature.ricci_scalars(cb.L2, s)
    suite.add(f"curvature.{label}.tau_L1", abs(p1.tau - 4 * n * (n - 1)), 1e-10)
    suite.add(f"curvature.{label}.tau_star_L1", abs(p1.tau_star), 1e-10)
    suite.add(f"curvature.{label}.tau_L2", abs(p2.tau), 1e-10)
    L = 2.0 * cb.L1 + 0.7 * cb.L2
    _, _, pl = curvature.ricci_scalars(L, s)
    _, _, ps = curvature.ricci_scalars(curvature.associated(L, s), s)
    suite.add(f"curvature.{label}.associated_scalars", max(abs(ps.tau - pl.tau_star), abs(ps.tau_star + pl.tau)), 1e-10)


def _curvature_checks(suite: Suite, n: int, seed: int, samples: int) -> None:
    _curvature_identity_checks(suite, structure.canonical_structure(n), "canonical", 1e-12)
    _curvature_identity_checks(suite, structure.random_structure(n, seed), "random", 1e-10)
    s = structure.random_structure(n, seed)
    branches = {1: ("sym",), 4: ("sym",), 2: ("phi_sym",), 5: ("phi_sym",), 3: ("sym", "phi_sym")}
    for i, kinds in branches.items():
        rng = _rng(seed, 3, i)
        pos, neg = 0.0, math.inf
        for _ in range(samples):
            S = curvature.random_constrained_S(s, kinds, rng)
            pos = max(pos, curvature.verify_curvature_like(curvature.psi(i, S, s)).max())
            if n < 2:
                continue
            for broken in ([("sym",), ("phi_sym",)] if len(kinds) == 2 else [kinds]):
                E = curvature.unit_violation(s, broken, rng, psi_index=i)
                neg = min(neg, curvature.verify_curvature_like(curvature.psi(i, S + E, s)).max())
        suite.add(f"curvature.psi{i}_iff_positive", pos, 1e-10)
        if n < 2:
            suite.skip(f"curvature.psi{i}_iff_negative", "dimension 3 has undetectable violations")
        else:
            suite.add(f"curvature.psi{i}_iff_negative", neg, 1e-3, mode="gt")

    rng = _rng(seed, 4)
    worst, pair = 0.0, 0.0
    for _ in range(samples):
        S = curvature.random_hybrid_S(s, rng)
        A, B = curvature.kaehler_combos(S, s)
        worst = max(worst, curvature.check_phi_kaehler_type(A, s).max(), curvature.check_phi_kaehler_type(B, s).max())
        scale = max(1.0, tensor_norm(A), tensor_norm(B))
        pair = max(pair, tensor_norm(curvature.associated(A, s) + B) / scale,
                   tensor_norm(curvature.associated(B, s) - A) / scale)
    suite.add("curvature.hybrid_combos_phi_kaehler", worst, 1e-10)
    suite.add("curvature.hybrid_combos_associated_pair", pair, 1e-10)
    S = curvature.random_constrained_S(s, ("sym",), _rng(seed, 5))
    A, _ = curvature.kaehler_combos(S, s)
    suite.add("curvature.non_hybrid_combo_not_kaehler", curvature.verify_phi_kaehler(A, s)["kaehler"], 1e-3, mode="gt")


def _sections_checks(suite: Suite, n: int, seed: int, samples: int) -> None:
    if n < 2:
        suite.skip("sections.constancy", "needs n >= 2")
        suite.skip("sections.decomposition", "dimension is not 5")
        return
    s = structure.random_structure(n, seed)
    cb = curvature.build_pi_and_L(s)
    L = 1.5 * cb.L1 - 0.5 * cb.L2
    suite.add("sections.constancy_span", sections_decomp.constancy_check(L, s, samples, seed).max(), 1e-9)
    if n > 3:
        for name in ("projection_phi_kaehler", "generic_nonconstant"):
            suite.skip(f"sections.{name}", "projector available for n <= 3 only")
    rng = _rng(seed, 6)
    projected = [sections_decomp.project_phi_kaehler(rng.standard_normal((s.dim,) * 4), s)
                 for _ in range(min(samples, 20) if n <= 3 else 0)]
    if projected:
        suite.add("sections.projection_phi_kaehler",
                  max(curvature.check_phi_kaehler_type(P, s).max() for P in projected), 1e-9)
        spread = sections_decomp.constancy_check(projected[-1], s, samples, seed).max()
        if n == 2:
            suite.add("sections.constancy_projected", spread, 1e-9)
        else:
            # above dimension 5 a generic phi-Kaehler tensor is not nu L1 + nu* L2
            suite.add("sections.generic_nonconstant", spread, 1e-3, mode="gt")
    if n != 2:
        for name in ("decomposition", "basis_independence", "nu_of_associated"):
            suite.skip(f"sections.{name}", "dimension is not 5")
        return
    worst_dec, worst_basis, worst_assoc = 0.0, 0.0, 0.0
    for P in projected:
        a = sections_decomp.decompose_5d(P, s, seed)
        b = sections_decomp.decompose_5d(P, s, seed + 1)
        worst_dec = max(worst_dec, a.residual)
        worst_basis = max(worst_basis, abs(a.nu - b.nu), abs(a.nu_star - b.nu_star))
        star = sections_decomp.decompose_5d(curvature.associated(P, s), s, seed)
        worst_assoc = max(worst_assoc, abs(star.nu - a.nu_star))
    suite.add("sections.decomposition", worst_dec, 1e-9)
    suite.add("sections.basis_independence", worst_basis, 1e-9)
    suite.add("sections.nu_of_associated", worst_assoc, 1e-10)


def _connection_checks(suite: Suite, n: int, seed: int) -> None:
    s = structure.random_structure(n, seed)
    rng = _rng(seed, 7)
    theta = rng.standard_normal(s.dim)
    omega = rng.standard_normal(s.dim)
    omega -= float(omega @ s.xi) * s.eta
    params = {"F1": theta, "F4": 1.0, "F5": 1.0, "F11": omega}
    fs = {}
    for cid, p in params.items():
        f = class_f.class_template(cid, s, p)
        fs[cid] = f
        q = connection.phi_b_deformation(f)
        suite.add(f"connection.{cid}.natural", connection.verify_naturality(q, f).max(), 1e-10)
        suite.add(f"connection.{cid}.phi_canonical",
                  connection.verify_phi_canonical(connection.torsion(q), s).max(), 1e-10)
    total = class_f.FTensor(sum(f.F for f in fs.values()), s)
    q_sum = connection.phi_b_deformation(total).Q_low
    q_parts = sum(connection.phi_b_deformation(f).Q_low for f in fs.values())
    suite.add("connection.linear_in_F", tensor_norm(q_sum - q_parts) / max(1.0, tensor_norm(q_sum)), 1e-12)
    if n >= 2:
        noise = rng.standard_normal((s.dim,) * 3)
        noise = noise - noise.transpose(1, 0, 2)
        noise /= tensor_norm(noise)
        suite.add("connection.noise_detected",
                  connection.verify_phi_canonical(connection.Torsion(noise), s).max(), 1e-3, mode="gt")
    else:
        suite.skip("connection.noise_detected", "identity is vacuous for n = 1")
    cb = curvature.build_pi_and_L(s)
    K = connection.k_from_r_f5(-0.5 * cb.pi[1], 2 * n * math.sqrt(0.5), -n, s)
    suite.add("connection.k_builder_gives_L1", tensor_norm(K - 0.5 * cb.L1) / max(1.0, tensor_norm(K)), 1e-12)


def _example_checks(suite: Suite, n: int) -> None:
    if n < 2:
        suite.skip("example.family", "needs n >= 2")
        return
    report = hypersurface.verify_example(n, [0.5, 0.8814, 1.5], 1e-4)
    worst = {}
    for point in report.points.values():
        for key, value in point["residuals"].items():
            worst[key] = max(worst.get(key, 0.0), value)
    for key, value in sorted(worst.items()):
        suite.add(f"example.{key}", value, hypersurface.THRESHOLDS[key])
    order = min(p["measurements"]["convergence_order"] for p in report.points.values())
    suite.add("example.convergence_order", order, hypersurface.MIN_CONVERGENCE_ORDER, mode="gt")


def run_selftest(n: int, seed: int, samples: int) -> Suite:
    suite = Suite()
    for name, fn in (
        ("structure", lambda: _structure_checks(suite, n, seed, samples)),
        ("tensor_core", lambda: _tensor_core_checks(suite, n, seed)),
        ("class_f", lambda: _class_f_checks(suite, n, seed)),
        ("curvature", lambda: _curvature_checks(suite, n, seed, samples)),
        ("sections", lambda: _sections_checks(suite, n, seed, samples)),
        ("connection", lambda: _connection_checks(suite, n, seed)),
        ("example", lambda: _example_checks(suite, n)),
    ):
        try:
            fn()
        except Exception as exc:
            suite.checks.append(Check(f"{name}.suite", None, math.nan, status=f"fail: {type(exc).__name__}: {exc}"))
    return suite
