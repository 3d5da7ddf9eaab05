"""One test per acceptance criterion, each at its stated tolerance.

The full default grid runs once; each criterion reads the records it
needs and logs a PASS/FAIL line that appears in the terminal summary.
Families that may lack a verdict for a check are listed explicitly with
the reason, so a check silently going not-applicable elsewhere fails.
"""
import time

import numpy as np
import pytest

from jacobipoly.driver import SuiteConfig, run_suite
from jacobipoly.families import family_ids, get_family, validate_parameters
from jacobipoly.reconstruction import reconstruct
from jacobipoly.spectral import normalization_dn

# the ground-state weight grows without bound on these lattices, so the
# truncated Hamiltonian does not represent the family on l^2
LEAKING = {"dual_q_charlier", "dual_q_meixner"}
NO_SHIFT = {"dual_alternative_q_charlier", "dual_little_q_jacobi", "dual_q_charlier",
            "dual_q_krawtchouk_p", "dual_q_meixner", "dual_quantum_q_krawtchouk"}
# closed-form d_n^2 is not part of the catalog for these
NO_DNSQ = NO_SHIFT
FINITE = set(family_ids("finite"))


@pytest.fixture(scope="module")
def report():
    start = time.perf_counter()
    rep = run_suite(SuiteConfig())
    rep.wall = time.perf_counter() - start
    return rep


def verdict(report, checks, tol, exempt=(), cmp="<="):
    """Every evaluated record meets ``tol``; every non-exempt family has a pass."""
    bad, worst, covered = [], 0.0 if cmp == "<=" else np.inf, {c: set() for c in checks}
    for check in checks:
        for r in report.select(check=check):
            if r.status == "not_applicable":
                continue
            ok = r.status == "pass" and (r.residual <= tol if cmp == "<=" else r.residual >= tol)
            if not ok:
                bad.append((r.family, check, r.residual, r.status))
                continue
            covered[check].add(r.family)
            worst = max(worst, r.residual) if cmp == "<=" else min(worst, r.residual)
    missing = {c: sorted(set(family_ids()) - set(exempt) - fams) for c, fams in covered.items()}
    missing = {c: m for c, m in missing.items() if m}
    return bad, missing, worst


def log(acceptance_log, k, ok, text):
    acceptance_log.append(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {text}")
    return ok


def test_criterion_1_factorization(report, acceptance_log):
    bad, missing, worst = verdict(report, ["factorization", "ground_state"], 1e-13)
    ok = not bad and not missing
    assert log(acceptance_log, 1, ok, f"H = A^dag A and A phi0 = 0, worst {worst:.1e} <= 1e-13"), (bad, missing)


def test_criterion_2_spectrum(report, acceptance_log):
    b1, m1, w1 = verdict(report, ["eigen_closed_form"], 1e-8, LEAKING)
    b2, m2, w2 = verdict(report, ["shape_spectrum", "alpha_spectrum"], 1e-10, NO_SHIFT)
    ok = not (b1 or m1 or b2 or m2)
    text = f"numeric vs closed form {w1:.1e} <= 1e-8; composition/alpha {w2:.1e} <= 1e-10"
    assert log(acceptance_log, 2, ok, text), (b1, m1, b2, m2)


def test_criterion_3_duality(report, acceptance_log):
    bad, missing, worst = verdict(report, ["duality"], 1e-9)
    ok = not bad and not missing
    assert log(acceptance_log, 3, ok, f"P_n(eta(x)) vs Q_x(E(n)), all families, worst {worst:.1e} <= 1e-9"), (bad, missing)


def test_criterion_4_orthogonality(report, acceptance_log):
    b1, m1, w1 = verdict(report, ["orthogonality"], 1e-8, LEAKING)
    b2, m2, w2 = verdict(report, ["completeness"], 1e-8, set(family_ids()) - FINITE)
    ok = not (b1 or m1 or b2 or m2)
    assert log(acceptance_log, 4, ok, f"Gram rows {w1:.1e}, completeness {w2:.1e} <= 1e-8"), (b1, m1, b2, m2)


def test_criterion_5_normalization(report, acceptance_log):
    bad, missing, worst = verdict(report, ["normalization"], 1e-9, NO_DNSQ)
    f = get_family("krawtchouk")
    norm = normalization_dn(f, validate_parameters("krawtchouk", p=0.5, N=2), 2)
    ratio = float(norm.product[1] / norm.product[0])
    ok = not bad and not missing and abs(ratio - 2) <= 1e-9
    assert log(acceptance_log, 5, ok, f"product vs closed form {worst:.1e} <= 1e-9; Krawtchouk d1^2/d0^2 = {ratio!r}"), (bad, missing)


def test_criterion_6_closure(report, acceptance_log):
    b1, m1, w1 = verdict(report, ["closure"], 1e-9)
    b2, m2, w2 = verdict(report, ["closure_negative_control"], 1e-3, cmp=">=")
    ok = not (b1 or m1 or b2 or m2)
    assert log(acceptance_log, 6, ok, f"closure {w1:.1e} <= 1e-9; negative control min {w2:.1e} >= 1e-3"), (b1, m1, b2, m2)


def test_criterion_7_ladder_heisenberg(report, acceptance_log):
    b1, m1, w1 = verdict(report, ["ladder_plus", "ladder_minus"], 1e-8, LEAKING)
    b2, m2, w2 = verdict(report, ["heisenberg"], 1e-7, LEAKING)
    ok = not (b1 or m1 or b2 or m2)
    assert log(acceptance_log, 7, ok, f"ladder action {w1:.1e} <= 1e-8; Heisenberg {w2:.1e} <= 1e-7"), (b1, m1, b2, m2)


def test_criterion_8_recurrence_from_closure(report, acceptance_log):
    b1, m1, w1 = verdict(report, ["recurrence_from_closure"], 1e-10)
    b2, m2, w2 = verdict(report, ["a0_relation"], 1e-12)
    ok = not (b1 or m1 or b2 or m2)
    assert log(acceptance_log, 8, ok, f"A_n, C_n {w1:.1e} <= 1e-10; A_0 E(1) + B(0) eta(1) {w2:.1e} <= 1e-12"), (b1, m1, b2, m2)


def test_criterion_9_reconstruction(report, acceptance_log):
    b1, m1, w1 = verdict(report, ["roundtrip"], 1e-9)
    b2, m2, w2 = verdict(report, ["ri0cond"], 1e-10)
    # ri0cond must be evaluated at every point, not only somewhere per family
    every = all(r.status == "pass" for r in report.select(check="ri0cond"))
    f = get_family("charlier")
    p = validate_parameters("charlier", a=1)
    st = reconstruct(f.closure(p), float(f.eta(1, p)), float(f.B(0, p)), 10)
    x = np.arange(11)
    hand = np.allclose(st.B_tilde, 2.0, rtol=1e-14) and np.allclose(st.D_tilde, 2 * x, rtol=1e-14)
    ok = not (b1 or m1 or b2 or m2) and every and hand
    text = f"round trip {w1:.1e} <= 1e-9; ri0cond {w2:.1e} <= 1e-10; Charlier B~=2a, D~=2x: {hand}"
    assert log(acceptance_log, 9, ok, text), (b1, m1, b2, m2)


def test_criterion_10_rodrigues(report, acceptance_log):
    bad, missing, worst = verdict(report, ["rodrigues"], 1e-8, NO_SHIFT)
    ok = not bad and not missing
    text = f"n <= 5, worst {worst:.1e} <= 1e-8; suite wall time {report.wall:.1f} s"
    assert log(acceptance_log, 10, ok and report.wall < 120, text), (bad, missing, report.wall)
