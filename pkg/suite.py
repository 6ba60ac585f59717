"""Desk-scale acceptance suite.

Each check returns a CriterionResult; `run_suite` collects them in a fixed
order. Reports contain no timings (those go to the log), so two runs with
the same seed render byte-identical reports.
"""

import logging
import math
import time
from typing import Any, Callable, Optional

import numpy as np
from pydantic import BaseModel, Field

from report_utils import render_json, to_jsonable
from summa.banach import DiagonalSpec, cotype_constant_lower, diag_classify, diag_growth_experiment, hilbert_pinch, phs_vs_pi2_report, table_row
from summa.grothendieck import KG_SANITY, grothendieck_ratio, little_grothendieck_check
from summa.linalg import Operator, SpaceSpec, svd
from summa.pietsch import domination_slack, pi_2_upper, pietsch_factorize
from summa.randsums import M1, RandomPlan, gaussian_moment, rademacher_moment
from summa.sequences import VectorFamily, sign_sup_norm, weak_lp_norm, weak_lp_upper
from summa.summing import SearchBudget, hs_norm, nuclear_bound_gap, pi_p_lower, weak_star_nuclear_rep

logger = logging.getLogger(__name__)


class CriterionResult(BaseModel):
    index: int
    name: str
    passed: bool
    details: dict[str, Any] = Field(default_factory=dict)


class SuiteReport(BaseModel):
    seed: int
    quick: bool
    passed: bool
    criteria: list[CriterionResult]


def _rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([seed, index])


def _budget(seed: int, quick: bool) -> SearchBudget:
    if quick:
        return SearchBudget(restarts=8, refine_steps=50, draws=16, seed=seed)
    return SearchBudget(seed=seed)


def check_hs_consistency(seed: int, quick: bool) -> CriterionResult:
    rng = _rng(seed, 1)
    count = 20 if quick else 100
    worst = 0.0
    for _ in range(count):
        u = Operator.from_matrix(rng.standard_normal((8, 8)))
        frob = hs_norm(u)
        worst = max(worst, abs(frob - float(np.linalg.norm(svd(u).sigma))))
    return CriterionResult(index=1, name="hilbert-schmidt consistency", passed=worst <= 1e-10, details={"count": count, "max_gap": worst})


def check_pietsch_pinch(seed: int, quick: bool) -> CriterionResult:
    budget = _budget(seed, quick)
    rows = []
    ok = True
    for n in range(1, (4 if quick else 8) + 1):
        u = Operator.from_matrix(np.eye(n), p="inf", q=2)
        upper, cert = pi_2_upper(u)
        lower = pi_p_lower(u, 2, budget)
        slack = domination_slack(u, cert)
        residual = pietsch_factorize(u, cert).residual
        target = math.sqrt(n)
        row_ok = (
            abs(upper.value - target) <= 1e-4
            and abs(lower.value - target) <= 1e-4
            and slack >= -1e-8 * cert.constant**2
            and residual <= 1e-8
        )
        ok = ok and row_ok
        rows.append({"n": n, "upper": upper.value, "lower": lower.value, "slack": slack, "residual": residual, "ok": row_ok})
    return CriterionResult(index=2, name="pietsch pinch on l_inf -> l_2 identities", passed=ok, details={"rows": rows})


def check_sign_sup_identity(seed: int, quick: bool) -> CriterionResult:
    rng = _rng(seed, 3)
    count = 50 if quick else 200
    worst = 0.0
    for i in range(count):
        host = ("1", "2", "inf")[i % 3]
        size = int(rng.integers(1, 11))
        dim = int(rng.integers(1, 6))
        fam = VectorFamily.of(rng.standard_normal((size, dim)), p=host, dim=dim)
        weak = weak_lp_upper(fam, 1)
        if weak.kind != "exact":
            return CriterionResult(index=3, name="sign supremum equals weak-l1 norm", passed=False, details={"non_exact_host": host})
        sup = sign_sup_norm(fam)
        worst = max(worst, abs(sup - weak.value))
        if host == "2":
            worst = max(worst, weak_lp_norm(fam, 1, net_size=256).value - sup)
    return CriterionResult(index=3, name="sign supremum equals weak-l1 norm", passed=worst <= 1e-10, details={"count": count, "max_gap": worst})


def check_c0_example(seed: int, quick: bool) -> CriterionResult:
    top = 10 if quick else 16
    flat = SearchBudget(restarts=0, refine_steps=0, seed=seed)
    moments, ratios = [], []
    for n in range(1, top + 1):
        moments.append(rademacher_moment(VectorFamily.basis(n, "inf"), 2))
        ratios.append(cotype_constant_lower(SpaceSpec.lp(n, "inf"), 2, flat).value)
    moment_ok = all(m == 1.0 for m in moments)
    ratio_gap = max(abs(r - math.sqrt(n)) for n, r in enumerate(ratios, start=1))
    return CriterionResult(
        index=4,
        name="c_0 basis: unit Rademacher moment and cotype witness",
        passed=moment_ok and ratio_gap <= 1e-9,
        details={"max_dim": top, "moments_all_one": moment_ok, "max_ratio_gap": ratio_gap},
    )


def check_m1_comparison(seed: int, quick: bool) -> CriterionResult:
    rng = _rng(seed, 5)
    count = 20 if quick else 100
    samples = 20_000 if quick else 100_000
    violations = 0
    worst = -math.inf
    for i in range(count):
        host = ("1", "2", "inf", "1.5", "3")[i % 5]
        dim = int(rng.integers(1, 5))
        fam = VectorFamily.of(rng.standard_normal((int(rng.integers(1, 9)), dim)), p=host, dim=dim)
        rad = rademacher_moment(fam, 2)
        gauss = gaussian_moment(fam, RandomPlan(seed=seed, samples=samples, moment_p=2.0).derived(i))
        margin = (gauss.value + 4.0 * gauss.stderr) / M1 - rad
        worst = max(worst, -margin)
        violations += margin < 0
    return CriterionResult(
        index=5,
        name="rademacher moments below m_1^-1 times gaussian moments",
        passed=violations == 0,
        details={"count": count, "samples": samples, "violations": violations, "worst_excess": worst},
    )


def check_grothendieck(seed: int, quick: bool) -> CriterionResult:
    rng = _rng(seed, 6)
    budget = _budget(seed, quick)
    had = grothendieck_ratio([[1.0, 1.0], [1.0, -1.0]], budget).ratio.value
    count = 15 if quick else 50
    lo, hi = math.inf, -math.inf
    for _ in range(count):
        m, n = int(rng.integers(2, 7)), int(rng.integers(2, 7))
        r = grothendieck_ratio(rng.choice([-1.0, 1.0], size=(m, n)), budget).ratio.value
        lo, hi = min(lo, r), max(hi, r)
    ok = abs(had - math.sqrt(2)) <= 1e-5 and lo >= 1 - 1e-8 and hi <= KG_SANITY
    return CriterionResult(
        index=6,
        name="grothendieck ratios",
        passed=ok,
        details={"hadamard_2x2": had, "count": count, "min_ratio": lo, "max_ratio": hi, "sanity_bound": KG_SANITY},
    )


def check_little_grothendieck(seed: int, quick: bool) -> CriterionResult:
    rng = _rng(seed, 7)
    budget = _budget(seed, quick)
    count = 10 if quick else 50
    worst = 0.0
    failures = 0
    for _ in range(count):
        u = Operator.from_matrix(rng.standard_normal((6, 6)), p=1, q=2)
        report = little_grothendieck_check(u, budget)
        worst = max(worst, report.ratio.value if report.ratio is not None else 0.0)
        failures += not report.passed
    return CriterionResult(index=7, name="little grothendieck on l_1^6 -> l_2^6", passed=failures == 0, details={"count": count, "max_ratio": worst})


def check_nuclear(seed: int, quick: bool) -> CriterionResult:
    rng = _rng(seed, 8)
    count = 20 if quick else 50
    recon, gap, bound = 0.0, 0.0, 0.0
    for _ in range(count):
        m, n = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        rep = weak_star_nuclear_rep(Operator.from_matrix(rng.standard_normal((m, n))))
        recon = max(recon, rep.reconstruction_error)
        gap = max(gap, abs(rep.weak_l1.value - rep.tau_l2.value))
        bound = max(bound, -nuclear_bound_gap(rep, rng.standard_normal(n)))
    ok = recon <= 1e-10 and gap <= 1e-8 and bound <= 1e-10
    return CriterionResult(
        index=8,
        name="weak*-1-nuclear representation",
        passed=ok,
        details={"count": count, "max_reconstruction": recon, "max_weak_gap": gap, "max_bound_excess": bound},
    )


def _direct_membership(spec: DiagonalSpec, r: float, octaves: int = 18) -> bool:
    """σ ∈ ℓ_r read off the partial sums: octave increments must shrink geometrically."""
    sig = np.abs(spec.values(2**octaves))
    if math.isinf(r):
        return float(np.max(sig)) <= float(np.max(sig[: 2 ** (octaves - 1)]))
    partial = np.cumsum(sig**r)
    inc = [partial[2 ** (k + 1) - 1] - partial[2**k - 1] for k in range(octaves - 2, octaves)]
    return inc[1] < (1 - 1e-3) * inc[0]


def check_diagonal_table(seed: int, quick: bool) -> CriterionResult:
    plan = RandomPlan(seed=seed)
    dims = [2, 4, 8, 16, 32, 64]
    converge = diag_growth_experiment(DiagonalSpec.power(2, 2, 0.6), dims, plan)
    diverge = diag_growth_experiment(DiagonalSpec.power(2, 2, 0.4), dims, plan)
    cases = [(1, 1, 0.6), (1, 2, 0.0), (2, 2, 0.0), (2, 2, 0.6), (2, 2, 0.4), (1.5, 2, 0.3), (3, 4, 0.3)]
    mismatches = []
    for p, q, alpha in cases:
        spec = DiagonalSpec.power(p, q, alpha)
        _, r = table_row(spec.p, spec.q)
        predicted = diag_classify(spec).predicted_class == "gamma-radonifying"
        if predicted != _direct_membership(spec, r):
            mismatches.append([p, q, alpha])
    ok = converge.growth_slope.value <= 0.02 and diverge.growth_slope.value >= 0.05 and not mismatches
    return CriterionResult(
        index=9,
        name="diagonal classification table",
        passed=ok,
        details={
            "slope_alpha_0.6": converge.growth_slope.value,
            "slope_alpha_0.4": diverge.growth_slope.value,
            "cases": len(cases),
            "mismatches": mismatches,
        },
    )


def check_phs_pinch(seed: int, quick: bool) -> CriterionResult:
    rng = _rng(seed, 10)
    budget = _budget(seed, quick)
    count = 5 if quick else 20
    bound_failures = 0
    min_pinch = math.inf
    for _ in range(count):
        u = Operator.from_matrix(rng.standard_normal((4, 4)), p=1, q=2)
        report = phs_vs_pi2_report(u, budget)
        bound_failures += not report.bound_ok
        min_pinch = min(min_pinch, report.pinch_ratio.value if report.pinch_ratio is not None else math.inf)
    hilbert = [Operator.from_matrix(np.eye(3)), Operator.from_matrix(rng.standard_normal((3, 3)))]
    hilbert_gap = max(hilbert_pinch(u, budget) for u in hilbert)
    ok = bound_failures == 0 and min_pinch >= 0.5 and hilbert_gap <= 0.05
    return CriterionResult(
        index=10,
        name="pre-hilbert-schmidt against the 2-summing bracket",
        passed=ok,
        details={"count": count, "bound_failures": bound_failures, "min_pinch": min_pinch, "hilbert_max_gap": hilbert_gap},
    )


def _run_checks(checks: list[Callable[..., CriterionResult]], seed: int, quick: bool) -> list[CriterionResult]:
    results = []
    for check in checks:
        start = time.perf_counter()
        result = check(seed, quick)
        dur_ms = (time.perf_counter() - start) * 1000
        logger.info("criterion %s %s passed=%s duration_ms=%.2f", result.index, result.name, result.passed, dur_ms)
        results.append(result)
    return results


def _render(seed: int, quick: bool, results: list[CriterionResult]) -> str:
    report = SuiteReport(seed=seed, quick=quick, passed=all(r.passed for r in results), criteria=results)
    return render_json(to_jsonable(report))


def check_determinism(seed: int, quick: bool, reference: Optional[str] = None) -> CriterionResult:
    """Rerun every other criterion and compare the rendered reports byte for byte.

    `reference` is the render of a run already made; without one the other
    criteria run twice.
    """
    others = [c for c in CHECKS if c is not check_determinism]
    if reference is None:
        reference = _render(seed, quick, _run_checks(others, seed, quick))
    again = _render(seed, quick, _run_checks(others, seed, quick))
    return CriterionResult(
        index=11,
        name="determinism",
        passed=again == reference,
        details={"criteria": len(others), "bytes": len(reference)},
    )


CHECKS: list[Callable[..., CriterionResult]] = [
    check_hs_consistency,
    check_pietsch_pinch,
    check_sign_sup_identity,
    check_c0_example,
    check_m1_comparison,
    check_grothendieck,
    check_little_grothendieck,
    check_nuclear,
    check_diagonal_table,
    check_phs_pinch,
    check_determinism,
]


def run_suite(seed: int = 42, quick: bool = False) -> SuiteReport:
    results = _run_checks([c for c in CHECKS if c is not check_determinism], seed, quick)
    if check_determinism in CHECKS:
        results.append(check_determinism(seed, quick, reference=_render(seed, quick, results)))
    return SuiteReport(seed=seed, quick=quick, passed=all(r.passed for r in results), criteria=results)
