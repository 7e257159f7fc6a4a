"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines.  Criterion 11's Cauchy clause is implemented exactly as stated and
marked as a strict expected failure: the local boundary combination without
the nonlocal eta-term diverges like e^{2r} (proved in closed form for the
complex-hyperbolic ball, where it equals -1 + 2 sinh(r/2)^4 for every r, and
reproduced numerically by two independent code paths).  See
notes in the README and the test body for the full analysis.
"""

import math
import time

import numpy as np
import pytest

from ache_lab.curvature import (
    S4_VOLUME,
    CurvatureModel,
    frame_brackets,
    identity_metric,
    levi_civita,
    model_connection_oracle,
    round_s4_snapshot,
)
from ache_lab.filling import (
    approximate_ke_metric,
    kahler_form,
    recursion_residual,
    solve_complex_structure,
)
from ache_lab.invariants import (
    PerturbationK,
    cartan_tensor,
    extract_W2minus,
    fit_cartan_constant,
    inject_perturbation,
    mu_from_nu,
    nu_from_filling,
    variation_integrand,
)
from ache_lab.renorm import CollarGeometry, gb_integrand
from ache_lab.series import decay_fit
from ache_lab.structures import heisenberg, s3_standard, su2_torsion

PI2 = math.pi**2


def _report(num, name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] criterion {num}: {name}  {detail}")
    return ok


def test_criterion_1_ch2_exactness(ch2_model):
    t0 = time.perf_counter()
    worst = {"einstein": 0.0, "wminus": 0.0, "kahler": 0.0, "scal": 0.0}
    for r in range(1, 9):
        sn = ch2_model.snapshot(float(r))
        worst["einstein"] = max(worst["einstein"], sn.einstein_residual)
        worst["wminus"] = max(worst["wminus"], float(np.max(np.abs(sn.wminus))))
        worst["kahler"] = max(worst["kahler"], abs(sn.w2_plus - sn.scal**2 / 24.0))
        worst["scal"] = max(worst["scal"], abs(sn.scal + 6.0))
    elapsed = time.perf_counter() - t0
    ok = all(v < 1e-10 for v in worst.values()) and elapsed < 1.0
    assert _report(
        1,
        "complex-hyperbolic exactness",
        ok,
        f"max residuals {worst}, runtime {elapsed:.3f}s",
    )


def test_criterion_2_gauss_bonnet_ball(ch2_geometry):
    t0 = time.perf_counter()
    errs = [abs(ch2_geometry.euler_check(float(r), r0=0.0) - 1.0) for r in range(1, 9)]
    elapsed = time.perf_counter() - t0
    ok = max(errs) < 1e-6 and elapsed < 5.0
    assert _report(
        2,
        "Euler identity on the ball",
        ok,
        f"max |interior+boundary-1| = {max(errs):.2e}, runtime {elapsed:.3f}s",
    )


def test_criterion_3_s4_anchor():
    val = gb_integrand(round_s4_snapshot()) * S4_VOLUME
    ok = abs(val - 2.0) < 1e-10
    assert _report(3, "round-sphere normalization anchor", ok, f"value {val:.12f}")


def test_criterion_4_einstein_order(gbar_s3_model, gbar_torsion_model):
    ok = True
    details = []
    for name, cm in (("s3", gbar_s3_model), ("torsion", gbar_torsion_model)):
        below = cm.einstein_residual_linf_below(5)
        ok &= below < 1e-10
        snaps = [(r, cm.snapshot(r).einstein_residual) for r in np.arange(4.0, 12.5, 1.0)]
        if max(v for _, v in snaps) > 1e-13:
            alpha, _ = decay_fit(snaps)
            ok &= alpha >= 2.4
            details.append(f"{name}: below-q5 {below:.1e}, fit {alpha:.2f}")
        else:
            details.append(f"{name}: residual numerically zero")
    assert _report(4, "approximate-Einstein order", ok, "; ".join(details))


def test_criterion_5_recursion_fidelity():
    s = su2_torsion(0.3 - 0.2j)
    phi = solve_complex_structure(s, order=6)
    A = complex(s.torsion_A)
    ok = phi.coefficient(1) == -1j * A
    ok &= phi.coefficient(2) == s.w_eta * A  # = half the reeb derivative of the torsion
    res = recursion_residual(s, phi)
    lead = res.leading_exponent(1e-13)
    ok &= lead is not None and lead > 12
    assert _report(
        5,
        "integrability recursion fidelity",
        ok,
        f"phi1 exact, phi2 exact, residual exponent {lead} > 12",
    )


def test_criterion_6_kahler_cross_check():
    ok = True
    details = []
    for s in (s3_standard(), su2_torsion(0.3 - 0.2j), heisenberg()):
        kf = kahler_form(s)
        d_om = kf.algebra.d(kf.omega)
        lead = d_om.leading_exponent(1e-11)
        closed = lead is None or lead >= 5
        ok &= kf.mismatch < 1e-10 and closed
        details.append(f"{s.name}: mismatch {kf.mismatch:.1e}")
    assert _report(6, "Kahler-form double construction", ok, "; ".join(details))


def test_criterion_7_connection_oracle():
    ok = True
    details = []
    for s in (s3_standard(), heisenberg(), su2_torsion(0.3 - 0.2j)):
        br = frame_brackets(s, cap=12)
        gamma = levi_civita(identity_metric(12), br)
        oracle = model_connection_oracle(s, cap=12)
        worst = max(
            (gamma[i][j][k] - oracle[i][j][k]).linf()
            for i in range(4)
            for j in range(4)
            for k in range(4)
        )
        ok &= worst < 1e-12
        details.append(f"{s.name}: {worst:.1e}")
    assert _report(7, "closed-form connection oracle", ok, "; ".join(details))


def test_criterion_8_wminus_decay_and_membership(
    gbar_s3_model, gbar_heis_model, gbar_torsion_model
):
    below = max(
        gbar_torsion_model.Wminus[a][b].linf_below(4) for a in range(3) for b in range(3)
    )
    w2, rel = extract_W2minus(gbar_torsion_model)
    spherical = max(extract_W2minus(cm)[0].norm() for cm in (gbar_s3_model, gbar_heis_model))
    ok = below < 1e-10 and rel < 1e-8 and spherical < 1e-12 and w2.norm() > 1e-3
    assert _report(
        8,
        "anti-self-dual Weyl decay and membership",
        ok,
        f"mass below q^4 {below:.1e}, outside-bundle {rel:.1e}, spherical {spherical:.1e}",
    )


def test_criterion_9_cartan_proportionality():
    pairs = []
    for t in (0.01, 0.02, 0.03, 0.04, 0.05):
        s = su2_torsion(t * (1.0 + 0.3j))
        g = approximate_ke_metric(s, cap=12)
        cm = CurvatureModel(g, frame_brackets(s, cap=12))
        pairs.append((extract_W2minus(cm)[0], cartan_tensor(s)))
    fit = fit_cartan_constant(pairs)
    ok = fit.max_rel_residual < 1e-4
    assert _report(
        9,
        "Cartan-tensor proportionality",
        ok,
        f"fitted c_Q = {fit.c_q:.12g}, max relative residual {fit.max_rel_residual:.1e} "
        f"({fit.samples} samples)",
    )


def test_criterion_10_renormalized_convergence(gbar_torsion_model, torsion_struct):
    geo = CollarGeometry(gbar_torsion_model, torsion_struct.total_volume)
    gp = inject_perturbation(gbar_torsion_model.metric, PerturbationK(0.3, -0.2))
    geop = CollarGeometry(
        CurvatureModel(gp, gbar_torsion_model.brackets), torsion_struct.total_volume
    )
    ok = True
    details = []
    for name, gg in (("gbar", geo), ("gbar+k", geop)):
        dens = gg.char_density * gg.vol_density
        samples = [(r, abs(dens.evaluate(r).real)) for r in np.arange(4.0, 12.5, 1.0)]
        alpha, _ = decay_fit(samples)
        I10 = gg.interior_integral("char", 1.0, 10.0)
        I12 = gg.interior_integral("char", 1.0, 12.0)
        gap = abs(I10 - I12) / abs(I12)
        ok &= alpha > 0 and gap < 1e-4
        details.append(f"{name}: density exponent {alpha:.2f}, tail gap {gap:.1e}")
    assert _report(10, "renormalized integral convergence", ok, "; ".join(details))


def test_criterion_11a_nu_local_gauge_independence(gbar_s3_model, s3):
    geo = CollarGeometry(gbar_s3_model, s3.total_volume)
    gp = inject_perturbation(gbar_s3_model.metric, PerturbationK(0.3, -0.2))
    geop = CollarGeometry(CurvatureModel(gp, gbar_s3_model.brackets), s3.total_volume)
    rs = np.arange(4.0, 9.5, 1.0)
    diffs = [(r, abs(geop.nu_local(r) - geo.nu_local(r))) for r in rs]
    alpha, _ = decay_fit(diffs)
    ok = alpha > 0 and diffs[-1][1] < diffs[0][1]
    assert _report(
        11,
        "nu_local gauge independence (difference clause)",
        ok,
        f"difference decay exponent {alpha:.2f}",
    )


@pytest.mark.xfail(
    strict=True,
    reason=(
        "The eta-free local boundary combination is not Cauchy: it diverges "
        "like e^{2r}.  Closed form on the exact complex-hyperbolic ball: "
        "nu_local(r) = -1 + 2 sinh(r/2)^4 for every r (the code reproduces "
        "this to 1e-12), and no sign/scale assignment of the three local "
        "terms removes the growth while keeping the Euler identity of "
        "criterion 2.  The divergence is carried by the omitted nonlocal "
        "eta-term, whose renormalization is the whole point of the boundary "
        "invariant; only differences of nu_local converge (criterion 11a)."
    ),
)
def test_criterion_11b_nu_local_cauchy(gbar_s3_model, s3):
    geo = CollarGeometry(gbar_s3_model, s3.total_volume)
    rs = np.arange(4.0, 10.5, 1.0)
    vals = [geo.nu_local(r) for r in rs]
    diffs = [(rs[i], abs(vals[i + 1] - vals[i])) for i in range(len(rs) - 1)]
    alpha, _ = decay_fit(diffs)
    ok = alpha > 0.4
    _report(
        11,
        "nu_local Cauchy clause (as stated)",
        ok,
        f"fitted exponent {alpha:.2f} (negative: the sequence grows)",
    )
    assert ok


def test_criterion_12_nu_mu_arithmetic(ch2_geometry):
    char_integral = ch2_geometry.interior_integral("char", 0.0, 12.0)
    nu = nu_from_filling(char_integral, chi=1, tau=0)
    mu = mu_from_nu(nu)
    ok = abs(char_integral) < 1e-9 and abs(nu + 1.0) < 1e-9 and abs(mu + 1.0) < 1e-9
    assert _report(
        12,
        "invariant arithmetic on the ball",
        ok,
        f"integral {char_integral:.1e}, nu {nu:.9f}, mu {mu:.9f}",
    )


def test_criterion_13_variation_structure():
    s3 = s3_standard()
    spherical = max(abs(variation_integrand(s3, E)) for E in (1.0, 1j, 0.7 - 0.3j))
    st = su2_torsion(0.3 - 0.2j)
    v1 = variation_integrand(st, 0.5 + 0.25j)
    v2 = variation_integrand(st, 1.0 + 0.5j)
    linearity = abs(v2 - 2.0 * v1)
    base = variation_integrand(st, 0.4 - 0.8j)
    rescale = max(
        abs(variation_integrand(st.rescale_contact_form(lam), 0.4 - 0.8j) - base)
        for lam in (0.5, 2.0)
    )
    ok = spherical < 1e-12 and linearity < 1e-12 and rescale < 1e-8
    assert _report(
        13,
        "variation formula structure",
        ok,
        f"spherical {spherical:.1e}, linearity {linearity:.1e}, rescale {rescale:.1e}",
    )
