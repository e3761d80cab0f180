"""Full verification suite and the versioned JSON report."""

import dataclasses
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from . import __version__
from .config import effective_tolerance, settings
from .conformal import codazzi_residual, schouten, weyl, weyl_trace_residual
from .curvature import (
    CurvatureTensor,
    compatibility_residual,
    connection,
    dim3_ricci_residual,
    phi_sectional,
    ricci_and_scalar,
    riemann_from_connection,
    self_adjoint_residual,
    torsion_residual,
    xi_curvature_residual,
)
from .deformation import apply_deformation, predicted_F_and_coeffs, predicted_kmn
from .geometry import ManifoldSpec, PointFrameData, evaluate_point
from .kmn import DecompositionResult, KmnResult, decomposition_at, extract_kmn_at, oracle_with_h
from .structure import StructurePoint, phi_basis, structure_at, summarize_structure

logger = logging.getLogger(__name__)

IDENTITIES: Dict[str, str] = {
    "eta_xi": "η(ξ) = 1",
    "phi_squared": "φ²X = -X + η(X)ξ",
    "compatibility": "g(φX,φY) = g(X,Y) - η(X)η(Y)",
    "phi_xi": "φξ = 0",
    "eta_phi": "η∘φ = 0",
    "contact": "dη = Φ, Φ(X,Y) = g(X,φY)",
    "k_contact": "∇_X ξ = -φX",
    "sasakian": "(∇_X φ)Y = g(X,Y)ξ - η(Y)X",
    "h_xi": "hξ = 0",
    "nabla_xi": "∇_X ξ = -φX - φhX",
    "h_phi_anticommute": "hφ = -φh",
    "trace_h": "tr h = 0",
    "eta_h": "η∘h = 0",
    "h_symmetric": "g(hX,Y) = g(X,hY)",
    "k_contact_h": "K-contact ⇔ h = 0",
    "metric_compatibility": "∇g = 0",
    "torsion": "∇_X Y - ∇_Y X = [X,Y]",
    "antisymmetry_xy": "R(X,Y,Z,W) = -R(Y,X,Z,W)",
    "antisymmetry_zw": "R(X,Y,Z,W) = -R(X,Y,W,Z)",
    "pair_symmetry": "R(X,Y,Z,W) = R(Z,W,X,Y)",
    "first_bianchi": "R(X,Y)Z + R(Y,Z)X + R(Z,X)Y = 0",
    "ricci_self_adjoint": "g(QX,Y) = g(X,QY)",
    "sasakian_curvature": "R(X,Y)ξ = η(Y)X - η(X)Y",
    "dim3_curvature": "R(X,Y)Z = g(Y,Z)QX - g(X,Z)QY + g(QY,Z)X - g(QX,Z)Y - (τ/2)(g(Y,Z)X - g(X,Z)Y)",
    "phi_sectional_independence": "F(X) independent of unit X ⊥ ξ in dimension 3",
    "kmn_ansatz": "R(X,Y)ξ = κ(η(Y)X - η(X)Y) + μ(η(Y)hX - η(X)hY) + ν(η(Y)φhX - η(X)φhY)",
    "kappa_bound": "κ ≤ 1",
    "lambda_kappa": "λ = √(1 - κ)",
    "constancy": "κ, μ constant and ν = 0 in dimension ≥ 5",
    "theorem": "R = (τ/2 - 2κ)R₁ + (τ/2 - 3κ)R₃ + μR₄ + νR₇",
    "corollary": "R = F R₁ + (F - κ)R₃ + μR₄ + νR₇",
    "forms_difference": "τ-form = F-form",
    "phi_sectional_identity": "F = τ/2 - 2κ",
    "ricci_dim3": "Q = (τ/2 - κ)I + (-τ/2 + 3κ)η⊗ξ + μh + νφh",
    "deformed_kappa": "κ̄ = (κ + a² - 1)/a²",
    "deformed_mu": "μ̄ = (μ + 2a - 2)/a",
    "deformed_nu": "ν̄ = ν/a",
    "deformed_h": "h̄ = h/a",
    "deformed_F": "F̄ = F/a - ((a-1)/a²)(3a + 1 - κ)",
    "deformed_ansatz": "deformed structure is a (κ̄,μ̄,ν̄)-space",
    "composition": "D_b ∘ D_a = D_ab",
    "weyl_trace": "W totally trace-free",
    "weyl_dim3": "W ≡ 0 in dimension 3",
    "conformally_flat": "W ≡ 0 (dimension ≥ 5) or (∇_X L)Y = (∇_Y L)X (dimension 3)",
    "expected": "manifest expected-properties record",
}


class CheckStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    SKIPPED = "skipped"


class CheckResult(BaseModel):
    name: str
    section: str
    identity: str
    max_residual: Optional[float] = None
    tolerance: Optional[float] = None
    status: CheckStatus
    reason: str = ""


class ManifestIdentity(BaseModel):
    name: str
    content_hash: str
    source: Optional[str] = None
    backend: str
    dimension: int


class RunParameters(BaseModel):
    grid: int
    points: int
    fd_step: float
    richardson: bool
    second_step: float
    deformation_factors: List[float]


class ReportSummary(BaseModel):
    passed: int = 0
    failed: int = 0
    skipped: int = 0


class VerificationReport(BaseModel):
    schema_version: str
    tool_version: str
    generated_at: str
    manifest: ManifestIdentity
    parameters: RunParameters
    sections: Dict[str, List[CheckResult]] = Field(default_factory=dict)
    values: Dict[str, Any] = Field(default_factory=dict)
    summary: ReportSummary = Field(default_factory=ReportSummary)

    @property
    def ok(self) -> bool:
        return self.summary.failed == 0

    def checks(self) -> List[CheckResult]:
        return [c for section in self.sections.values() for c in section]

    def find(self, name: str) -> CheckResult:
        for c in self.checks():
            if c.name == name:
                return c
        raise KeyError(name)


@dataclass
class PointAnalysis:
    pd: PointFrameData
    structure: StructurePoint
    curvature: CurvatureTensor
    symmetry: Dict[str, float]
    compatibility: float
    torsion: float
    Q: np.ndarray
    tau: float
    ricci_self_adjoint: float
    xi_curvature: float
    dim3_curvature: Optional[float]
    F: float
    F_rotated: float
    kmn: KmnResult
    decomposition: Optional[DecompositionResult]
    weyl_max: float
    weyl_trace: float


def analyse_point(spec: ManifoldSpec, p: Sequence[float]) -> PointAnalysis:
    pd = evaluate_point(spec, p)
    conn = connection(spec, pd.point)
    structure = structure_at(spec, pd.point, pd, conn)
    pd = pd.with_h(structure.h)
    curvature = CurvatureTensor(pd.point, riemann_from_connection(conn), pd.g)
    Q, tau = ricci_and_scalar(curvature)
    P, _ = phi_basis(pd)
    e, phi_e = P[:, 0], P[:, spec.n]
    kmn = extract_kmn_at(curvature, pd)
    W = weyl(curvature, schouten(Q, tau, spec.n), pd)
    return PointAnalysis(
        pd=pd,
        structure=structure,
        curvature=curvature,
        symmetry=curvature.symmetry_residuals(),
        compatibility=compatibility_residual(conn, pd.g),
        torsion=torsion_residual(conn),
        Q=Q,
        tau=tau,
        ricci_self_adjoint=self_adjoint_residual(Q, pd.g),
        xi_curvature=xi_curvature_residual(curvature, pd),
        dim3_curvature=dim3_ricci_residual(curvature) if spec.dimension == 3 else None,
        F=phi_sectional(curvature, pd, e),
        F_rotated=phi_sectional(curvature, pd, 0.6 * e + 0.8 * phi_e),
        kmn=kmn,
        decomposition=decomposition_at(curvature, pd, kmn) if spec.dimension == 3 else None,
        weyl_max=float(np.abs(W).max()),
        weyl_trace=weyl_trace_residual(W),
    )


class Suite:
    """Accumulates checks section by section."""

    def __init__(self) -> None:
        self.sections: Dict[str, List[CheckResult]] = {}

    def _add(self, result: CheckResult) -> None:
        self.sections.setdefault(result.section, []).append(result)
        if result.status == CheckStatus.FAIL:
            logger.warning(f"Check failed: {result.name} residual {result.max_residual} > {result.tolerance}")

    def residual(self, section: str, name: str, key: str, residual: float, tolerance: float) -> None:
        ok = bool(np.isfinite(residual)) and residual <= tolerance
        self._add(
            CheckResult(
                name=name,
                section=section,
                identity=IDENTITIES[key],
                max_residual=float(residual),
                tolerance=tolerance,
                status=CheckStatus.PASS if ok else CheckStatus.FAIL,
            )
        )

    def flag(
        self, section: str, name: str, key: str, computed: bool, expected: bool, residual: float, tolerance: float
    ) -> None:
        self._add(
            CheckResult(
                name=name,
                section=section,
                identity=IDENTITIES[key],
                max_residual=float(residual),
                tolerance=tolerance,
                status=CheckStatus.PASS if computed == expected else CheckStatus.FAIL,
                reason="" if computed == expected else f"computed {computed}, expected {expected}",
            )
        )

    def skip(self, section: str, name: str, key: str, reason: str) -> None:
        self._add(
            CheckResult(name=name, section=section, identity=IDENTITIES[key], status=CheckStatus.SKIPPED, reason=reason)
        )

    def summary(self) -> ReportSummary:
        summary = ReportSummary()
        for checks in self.sections.values():
            for c in checks:
                if c.status == CheckStatus.PASS:
                    summary.passed += 1
                elif c.status == CheckStatus.FAIL:
                    summary.failed += 1
                else:
                    summary.skipped += 1
        return summary


def _structure_checks(suite: Suite, spec: ManifoldSpec, points: List[PointAnalysis], tol: float) -> Dict[str, Any]:
    report = summarize_structure(spec.name, [a.structure for a in points], tol)
    for key, value in report.axioms.items():
        suite.residual("structure", f"axiom.{key}", key, value, settings.axiom_tolerance)
    expected = spec.expected
    classes = (
        ("contact", report.is_contact, report.contact),
        ("k_contact", report.is_k_contact, report.k_contact),
        ("sasakian", report.is_sasakian, report.sasakian),
    )
    for key, computed, residual in classes:
        declared = getattr(expected, key) if expected is not None else None
        if declared is None:
            suite.skip("structure", f"class.{key}", key, "class not declared in the manifest")
        else:
            suite.flag("structure", f"class.{key}", key, computed, declared, residual, tol)
    for key, value in report.h_identities.items():
        if report.is_contact:
            suite.residual("structure", f"h.{key}", key, value, tol)
        else:
            suite.skip("structure", f"h.{key}", key, "not a contact metric structure")
    if report.is_k_contact:
        suite.residual("structure", "h.k_contact_vanishes", "k_contact_h", report.h_norm, tol)
    else:
        suite.skip("structure", "h.k_contact_vanishes", "k_contact_h", "structure is not K-contact")
    return report.model_dump()


def _curvature_checks(suite: Suite, spec: ManifoldSpec, points: List[PointAnalysis], tol: float, sasakian: bool) -> None:
    suite.residual("curvature", "connection.metric_compatibility", "metric_compatibility", max(a.compatibility for a in points), tol)
    suite.residual("curvature", "connection.torsion", "torsion", max(a.torsion for a in points), tol)
    for key in ("antisymmetry_xy", "antisymmetry_zw", "pair_symmetry", "first_bianchi"):
        suite.residual("curvature", f"riemann.{key}", key, max(a.symmetry[key] for a in points), tol)
    suite.residual("curvature", "ricci.self_adjoint", "ricci_self_adjoint", max(a.ricci_self_adjoint for a in points), tol)
    if sasakian:
        suite.residual("curvature", "riemann.sasakian_xi", "sasakian_curvature", max(a.xi_curvature for a in points), tol)
    else:
        suite.skip("curvature", "riemann.sasakian_xi", "sasakian_curvature", "structure is not Sasakian")
    if spec.dimension == 3:
        suite.residual("curvature", "riemann.dim3_ricci_form", "dim3_curvature", max(a.dim3_curvature or 0.0 for a in points), tol)
        suite.residual(
            "curvature",
            "phi_sectional.independence",
            "phi_sectional_independence",
            max(abs(a.F - a.F_rotated) for a in points),
            tol,
        )
    else:
        suite.skip("curvature", "riemann.dim3_ricci_form", "dim3_curvature", "dimension is not 3")
        suite.skip("curvature", "phi_sectional.independence", "phi_sectional_independence", "dimension is not 3")
    expected = spec.expected
    for field, label, values in (
        ("scalar_curvature", "expected.scalar_curvature", [a.tau for a in points]),
        ("phi_sectional", "expected.phi_sectional", [a.F for a in points]),
    ):
        target = getattr(expected, field) if expected is not None else None
        if target is None:
            suite.skip("curvature", label, "expected", f"{field} not declared in the manifest")
        else:
            suite.residual("curvature", label, "expected", max(abs(v - target) for v in values), settings.expected_tolerance)


def _kmn_checks(suite: Suite, spec: ManifoldSpec, points: List[PointAnalysis], tol: float, contact: bool) -> Dict[str, Any]:
    results = [a.kmn for a in points]
    expected = spec.expected
    declared = expected is not None and expected.kappa is not None
    spread = {
        name: max(getattr(r, name) for r in results) - min(getattr(r, name) for r in results)
        for name in ("kappa", "mu", "nu")
    }
    if not (contact or declared):
        for name, key in (("kmn.ansatz", "kmn_ansatz"), ("kmn.kappa_bound", "kappa_bound"), ("kmn.lambda_kappa", "lambda_kappa")):
            suite.skip("kmn", name, key, "not a contact metric structure and no (kappa, mu, nu) declared")
    else:
        suite.residual("kmn", "kmn.ansatz", "kmn_ansatz", max(r.residual for r in results), tol)
        if contact:
            suite.residual("kmn", "kmn.kappa_bound", "kappa_bound", max(0.0, max(r.kappa for r in results) - 1.0), tol)
        else:
            suite.skip("kmn", "kmn.kappa_bound", "kappa_bound", "not a contact metric structure")
        below = [r for r in results if r.kappa < 1.0 - tol and not r.degenerate]
        if contact and below:
            suite.residual(
                "kmn",
                "kmn.lambda_kappa",
                "lambda_kappa",
                max(abs(r.lam - np.sqrt(1.0 - r.kappa)) for r in below),
                tol,
            )
        else:
            suite.skip("kmn", "kmn.lambda_kappa", "lambda_kappa", "needs a contact structure with kappa < 1")
    for field in ("kappa", "mu", "nu", "lam"):
        target = getattr(expected, field) if expected is not None else None
        usable = [r for r in results if field == "kappa" or field == "lam" or not r.degenerate]
        if target is None or not usable:
            reason = f"{field} not declared in the manifest" if target is None else f"{field} undetermined where h = 0"
            suite.skip("kmn", f"expected.{field}", "expected", reason)
        else:
            suite.residual(
                "kmn", f"expected.{field}", "expected", max(abs(getattr(r, field) - target) for r in usable), settings.expected_tolerance
            )
    if spec.dimension >= 5 and contact:
        suite.residual("kmn", "kmn.constancy", "constancy", max(spread["kappa"], spread["mu"], max(abs(r.nu) for r in results)), tol)
    else:
        suite.skip("kmn", "kmn.constancy", "constancy", "constancy is required only for contact structures in dimension >= 5")
    center = results[len(results) // 2]
    return {"center": center.model_dump(), "spread": spread, "max_residual": max(r.residual for r in results)}


def _decomposition_checks(suite: Suite, points: List[PointAnalysis], tol: float, contact: bool) -> Optional[Dict[str, Any]]:
    keys = ("theorem", "corollary", "forms_difference", "phi_sectional_identity", "ricci_dim3")
    computed = [a.decomposition for a in points if a.decomposition is not None and a.decomposition.status == "computed"]
    if not contact or not computed:
        if not contact:
            reason = "not a contact metric structure"
        elif points[0].decomposition is None:
            reason = "decomposition holds in dimension 3 only"
        else:
            reason = points[0].decomposition.reason
        for key in keys:
            suite.skip("decomposition", f"decomposition.{key}", key, reason)
        return None
    fields = {
        "theorem": "theorem_residual",
        "corollary": "corollary_residual",
        "forms_difference": "forms_difference",
        "phi_sectional_identity": "phi_sectional_identity",
        "ricci_dim3": "ricci_residual",
    }
    for key in keys:
        suite.residual("decomposition", f"decomposition.{key}", key, max(getattr(d, fields[key]) for d in computed), tol)
    center = computed[len(computed) // 2]
    return {"F": center.F, "tau": center.tau, "points": len(computed)}


def _deformation_checks(
    suite: Suite, spec: ManifoldSpec, center: Sequence[float], tol: float, contact: bool, factors: Sequence[float]
) -> Dict[str, Any]:
    if not contact:
        for key in ("deformed_kappa", "deformed_mu", "deformed_nu", "deformed_h", "deformed_F", "deformed_ansatz", "composition"):
            suite.skip("deformation", f"deformation.{key}", key, "deformation laws are stated for contact metric structures")
        return {}
    pd, curvature = oracle_with_h(spec, center)
    base = extract_kmn_at(curvature, pd)
    P, _ = phi_basis(pd)
    base_F = phi_sectional(curvature, pd, P[:, 0])
    values: Dict[str, Any] = {}
    for a in factors:
        deformed = apply_deformation(spec, a)
        pd_a, curvature_a = oracle_with_h(deformed, center)
        kmn_a = extract_kmn_at(curvature_a, pd_a)
        predicted = predicted_kmn(base.kappa, base.mu, base.nu, a)
        tag = f"a={a:g}"
        suite.residual("deformation", f"deformation.kappa[{tag}]", "deformed_kappa", abs(kmn_a.kappa - predicted["kappa"]), tol)
        if base.degenerate or kmn_a.degenerate:
            suite.skip("deformation", f"deformation.mu[{tag}]", "deformed_mu", "mu undetermined where h = 0")
            suite.skip("deformation", f"deformation.nu[{tag}]", "deformed_nu", "nu undetermined where h = 0")
        else:
            suite.residual("deformation", f"deformation.mu[{tag}]", "deformed_mu", abs(kmn_a.mu - predicted["mu"]), tol)
            suite.residual("deformation", f"deformation.nu[{tag}]", "deformed_nu", abs(kmn_a.nu - predicted["nu"]), tol)
        suite.residual("deformation", f"deformation.h[{tag}]", "deformed_h", float(np.abs(pd_a.h - pd.h / a).max()), tol)
        suite.residual("deformation", f"deformation.ansatz[{tag}]", "deformed_ansatz", kmn_a.residual, tol)
        if spec.dimension == 3:
            P_a, _ = phi_basis(pd_a)
            F_a = phi_sectional(curvature_a, pd_a, P_a[:, 0])
            F_pred = predicted_F_and_coeffs(base_F, base.kappa, base.mu, base.nu, a)["F"]
            suite.residual("deformation", f"deformation.F[{tag}]", "deformed_F", abs(F_a - F_pred), tol)
        else:
            suite.skip("deformation", f"deformation.F[{tag}]", "deformed_F", "the F law is stated in dimension 3")
        values[tag] = {"extracted": kmn_a.model_dump(), "predicted": predicted}
    if len(factors) >= 2:
        a, b = factors[0], factors[1]
        twice = apply_deformation(apply_deformation(spec, a), b)
        once = apply_deformation(spec, a * b)
        worst = 0.0
        for p in spec.sample_points()[:10]:
            g1, g2 = twice.metric_at(p), once.metric_at(p)
            scale = max(1.0, float(np.abs(g2).max()))
            worst = max(worst, float(np.abs(g1 - g2).max()) / scale, float(np.abs(twice.xi_at(p) - once.xi_at(p)).max()))
        suite.residual("deformation", "deformation.composition", "composition", worst, settings.composition_tolerance)
    else:
        suite.skip("deformation", "deformation.composition", "composition", "needs two deformation factors")
    return values


def _conformal_checks(suite: Suite, spec: ManifoldSpec, points: List[PointAnalysis], center: Sequence[float], tol: float) -> Dict[str, Any]:
    suite.residual("conformal", "weyl.trace_free", "weyl_trace", max(a.weyl_trace for a in points), tol)
    weyl_max = max(a.weyl_max for a in points)
    values: Dict[str, Any] = {"weyl_max": weyl_max}
    expected_flat = spec.expected.flat if spec.expected is not None else None
    flat_tol = effective_tolerance(settings.oracle_flat_tolerance, spec.fd_step or settings.fd_step)
    if spec.dimension == 3:
        suite.residual("conformal", "weyl.dim3_vanishes", "weyl_dim3", weyl_max, tol)
        codazzi = codazzi_residual(spec, center)
        values["codazzi_center"] = codazzi
        flat_tol = tol
        flat = codazzi < flat_tol
    else:
        suite.skip("conformal", "weyl.dim3_vanishes", "weyl_dim3", "dimension is not 3")
        flat = weyl_max < flat_tol
    values["conformally_flat"] = flat
    if expected_flat is None:
        suite.skip("conformal", "expected.flat", "conformally_flat", "flatness not declared in the manifest")
    else:
        residual = values.get("codazzi_center", weyl_max)
        suite.flag("conformal", "expected.flat", "conformally_flat", flat, expected_flat, residual, flat_tol)
    return values


def run_suite(
    spec: ManifoldSpec,
    grid: Optional[int] = None,
    fd_step: Optional[float] = None,
    deformation_factors: Optional[Sequence[float]] = None,
) -> VerificationReport:
    """Run every check on the manifold's sample grid and assemble the report."""
    if fd_step is not None:
        spec = dataclasses.replace(spec, fd_step=fd_step)
    step = spec.fd_step or settings.fd_step
    resolution = grid or spec.resolution
    points = spec.sample_points(resolution)
    factors = list(deformation_factors if deformation_factors is not None else settings.deformation_factors)
    logger.info(f"Running verification suite on '{spec.name}' ({len(points)} points, fd_step={step:g})")

    with ThreadPoolExecutor(max_workers=settings.workers) as pool:
        analyses = list(pool.map(lambda q: analyse_point(spec, q), points))

    structure_tol = effective_tolerance(settings.structure_tolerance, step)
    oracle_tol = effective_tolerance(settings.oracle_tolerance, step)
    suite = Suite()
    structure = _structure_checks(suite, spec, analyses, structure_tol)
    contact = bool(structure["is_contact"])
    _curvature_checks(suite, spec, analyses, oracle_tol, bool(structure["is_sasakian"]))
    kmn_values = _kmn_checks(suite, spec, analyses, oracle_tol, contact)
    decomposition = _decomposition_checks(suite, analyses, oracle_tol, contact)
    center = spec.center()
    deformation = _deformation_checks(suite, spec, center, oracle_tol, contact, factors)
    conformal = _conformal_checks(suite, spec, analyses, center, oracle_tol)

    middle = analyses[len(analyses) // 2]
    report = VerificationReport(
        schema_version=settings.report_schema_version,
        tool_version=__version__,
        generated_at=datetime.now(timezone.utc).isoformat(),
        manifest=ManifestIdentity(
            name=spec.name,
            content_hash=spec.content_hash,
            source=spec.source_path,
            backend=spec.backend.value,
            dimension=spec.dimension,
        ),
        parameters=RunParameters(
            grid=resolution,
            points=len(points),
            fd_step=step,
            richardson=settings.richardson,
            second_step=settings.second_step,
            deformation_factors=factors,
        ),
        sections=suite.sections,
        values={
            "structure": structure,
            "kmn": kmn_values,
            "scalar_curvature": middle.tau,
            "phi_sectional": middle.F,
            "decomposition": decomposition,
            "deformation": deformation,
            "conformal": conformal,
        },
        summary=suite.summary(),
    )
    logger.info(
        f"Suite finished for '{spec.name}': {report.summary.passed} passed, "
        f"{report.summary.failed} failed, {report.summary.skipped} skipped"
    )
    return report
