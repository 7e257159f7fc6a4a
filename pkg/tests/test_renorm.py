import math

import numpy as np
import pytest

from ache_lab.curvature import (
    S4_VOLUME,
    CurvatureModel,
    identity_metric,
    product_brackets,
    round_s4_snapshot,
)
from ache_lab.errors import DivergentTail, NumericalFailure, ShapeMismatch
from ache_lab.invariants import PerturbationK, inject_perturbation
from ache_lab.renorm import (
    CollarGeometry,
    EtaProvider,
    S_functional,
    T_functional,
    boundary_report,
    char_integrand,
    char_tail_stabilization,
    gb_integrand,
    nu_local_convergence,
    sig_integrand,
)
from ache_lab.series import decay_fit

PI2 = math.pi**2


# -- integrands -----------------------------------------------------------------


def test_char_integrand_vanishes_on_ch2(ch2_model):
    for r in (2.0, 4.0, 6.0):
        assert abs(char_integrand(ch2_model.snapshot(r))) < 1e-12


def test_integrands_on_round_s4():
    sn = round_s4_snapshot()
    assert abs(char_integrand(sn) - 6.0 / (8 * PI2)) < 1e-14
    assert abs(gb_integrand(sn) * S4_VOLUME - 2.0) < 1e-10
    assert abs(sig_integrand(sn)) < 1e-14


def test_sig_integrand_ch2(ch2_model):
    sn = ch2_model.snapshot(3.0)
    assert abs(sig_integrand(sn) - 1.5 / (12 * PI2)) < 1e-12


def test_flat_product_integrands():
    cm = CurvatureModel(identity_metric(12), product_brackets(12))
    sn = cm.snapshot(2.0)
    assert gb_integrand(sn) == 0.0
    assert sig_integrand(sn) == 0.0
    assert char_integrand(sn) == 0.0


# -- interior integrals -----------------------------------------------------------


def test_interior_exact_vs_quadrature(gbar_torsion_geometry):
    exact = gbar_torsion_geometry.interior_integral("gb", 2.0, 8.0)
    quad = gbar_torsion_geometry.interior_integral_quad("gb", 2.0, 8.0)
    assert abs(exact - quad) < 1e-8 * max(1.0, abs(exact))


def test_interior_char_ch2_zero(ch2_geometry):
    for r in (2.0, 5.0, 8.0):
        assert abs(ch2_geometry.interior_integral("char", 0.0, r)) < 1e-10


def test_interior_divergent_tail(gbar_s3_geometry):
    with pytest.raises(DivergentTail):
        gbar_s3_geometry.interior_integral("gb", 2.0, math.inf)


def test_constant_integrand_closed_form():
    # flat product: densities vanish, but the volume factor integrates exactly
    cm = CurvatureModel(identity_metric(12), product_brackets(12))
    geom = CollarGeometry(cm, total_volume=2.0)
    got = geom.vol_density
    from ache_lab.series import radial_antiderivative

    val = radial_antiderivative(got.real(), 1.0, 2.0)
    assert abs(val - 2.0 * (math.exp(4.0) - math.exp(2.0)) / 2.0) < 1e-10


# -- second fundamental form ---------------------------------------------------------


def test_ii_ch2_matches_warped_oracle(ch2_geometry):
    for r in (2.0, 4.0):
        II = ch2_geometry.second_fundamental_form(r)
        expect = np.diag([1.0 / math.tanh(r), 0.5 / math.tanh(r / 2), 0.5 / math.tanh(r / 2)])
        assert np.max(np.abs(II - expect)) < 1e-10


def test_ii_limit(gbar_torsion_geometry):
    II = gbar_torsion_geometry.second_fundamental_form(14.0)
    assert np.max(np.abs(II - np.diag([1.0, 0.5, 0.5]))) < 1e-5


def test_ii_product_zero():
    cm = CurvatureModel(identity_metric(12), product_brackets(12))
    geom = CollarGeometry(cm, 1.0)
    assert np.max(np.abs(geom.second_fundamental_form(3.0))) < 1e-14


# -- multilinear functionals -----------------------------------------------------------


def test_s_functional_symmetric_and_alternating():
    rng = np.random.default_rng(6)
    sym = rng.normal(size=(3, 3, 3))
    sym = sym + np.transpose(sym, (1, 2, 0)) + np.transpose(sym, (2, 0, 1))
    sym = sym + np.transpose(sym, (1, 0, 2))  # fully symmetric now? ensure cyclic at least
    F = np.ones((3, 3, 3))
    assert np.allclose(S_functional(F), 3 * F)
    alt = np.zeros((3, 3, 3))
    for (i, j, k), s in (
        ((0, 1, 2), 1), ((1, 2, 0), 1), ((2, 0, 1), 1),
        ((0, 2, 1), -1), ((2, 1, 0), -1), ((1, 0, 2), -1),
    ):
        alt[i, j, k] = s
    assert np.allclose(S_functional(alt), 3 * alt)
    with pytest.raises(ShapeMismatch):
        S_functional(np.ones((2, 3, 3)))


def test_t_functional_volume_pairing():
    vol = np.zeros((3, 3, 3))
    for (i, j, k), s in (
        ((0, 1, 2), 1), ((1, 2, 0), 1), ((2, 0, 1), 1),
        ((0, 2, 1), -1), ((2, 1, 0), -1), ((1, 0, 2), -1),
    ):
        vol[i, j, k] = s / 6.0
    rho = 2.5
    assert abs(T_functional(rho, vol * 6.0 / 6.0) - rho) < 1e-14
    simple = np.zeros((3, 3, 3))
    simple[0, 1, 2] = 1.0
    assert abs(T_functional(1.0, simple) - 1.0) < 1e-14
    with pytest.raises(ShapeMismatch):
        T_functional(1.0, np.ones((2, 2, 2)))


# -- boundary identities ----------------------------------------------------------------


def test_euler_identity_ch2(ch2_geometry):
    for r in range(1, 9):
        assert abs(ch2_geometry.euler_check(float(r), r0=0.0) - 1.0) < 1e-6


def test_nu_local_ch2_closed_form(ch2_geometry):
    # the local combination alone follows -1 + 2 sinh(r/2)^4 exactly: the
    # divergence is carried by the (omitted) nonlocal eta-term
    for r in (2.0, 3.0, 5.0):
        pred = -1.0 + 2.0 * math.sinh(r / 2.0) ** 4
        assert abs(ch2_geometry.nu_local(r) - pred) < 1e-8 * max(1.0, abs(pred))


def test_implied_eta_ch2_closed_form(ch2_geometry):
    # tau(ball) = 0 rearranged: eta(S_r) = -(2/3) sinh(r/2)^4
    for r in (2.0, 4.0):
        pred = -(2.0 / 3.0) * math.sinh(r / 2.0) ** 4
        assert abs(ch2_geometry.implied_eta(r, 0.0, 0.0) - pred) < 1e-8 * max(1.0, abs(pred))


def test_collar_identities(torsion_struct):
    # chi([r0,r1] x X) = 0: interior plus boundary-difference closes up to the
    # series truncation tail, which the e^{2r} area factor amplifies; the
    # defect must shrink like the tail as r0 grows
    from ache_lab.curvature import frame_brackets
    from ache_lab.filling import approximate_ke_metric

    cap = 20
    g = approximate_ke_metric(torsion_struct, cap=cap)
    geom = CollarGeometry(
        CurvatureModel(g, frame_brackets(torsion_struct, cap=cap)),
        torsion_struct.total_volume,
    )
    d3 = geom.collar_euler_defect(3.0, 7.0)
    d5 = geom.collar_euler_defect(5.0, 7.0)
    assert abs(d3) < 1e-6
    assert abs(d5) < abs(d3) * 1e-2
    # the signature defect equals the (implied) eta-difference; finite here
    assert np.isfinite(geom.collar_signature_defect(3.0, 7.0))


def test_boundary_terms_product_metric():
    cm = CurvatureModel(identity_metric(12), product_brackets(12))
    geom = CollarGeometry(cm, 1.0)
    assert abs(geom.gb_boundary(3.0)) < 1e-13
    assert abs(geom.sig_boundary_local(3.0)) < 1e-13
    assert abs(geom.nu_local(3.0)) < 1e-13


def test_gauge_difference_of_nu_local(gbar_s3_model, gbar_s3_geometry, s3):
    # metric perturbation at the undetermined order changes nu_local by o(1)
    gp = inject_perturbation(gbar_s3_model.metric, PerturbationK(0.3, -0.2))
    geop = CollarGeometry(CurvatureModel(gp, gbar_s3_model.brackets), s3.total_volume)
    rs = np.arange(4.0, 9.5, 1.0)
    diffs = [(r, abs(geop.nu_local(r) - gbar_s3_geometry.nu_local(r))) for r in rs]
    alpha, _ = decay_fit(diffs)
    assert alpha > 0.1
    assert diffs[-1][1] < diffs[0][1] * 1e-2


def test_eta_providers(tmp_path):
    assert EtaProvider.zero()(3.0) == 0.0
    assert EtaProvider.constant(1.5)(7.0) == 1.5
    table = tmp_path / "eta.csv"
    table.write_text("r,eta\n1.0,0.0\n2.0,1.0\n3.0,4.0\n")
    prov = EtaProvider.from_spec(f"table:{table}")
    assert abs(prov(1.5) - 0.5) < 1e-14
    assert abs(prov(2.5) - 2.5) < 1e-14
    with pytest.raises(NumericalFailure):
        prov(5.0)


def test_boundary_report_fields(ch2_geometry):
    rep = boundary_report(ch2_geometry, 3.0, r0=0.0, tau_target=0.0)
    assert abs(rep.euler_check - (rep.interior_gb + rep.gb_boundary)) < 1e-12
    assert abs(rep.euler_check - 1.0) < 1e-6
    assert abs(rep.implied_eta - (0.0 - rep.interior_sig - rep.sig_boundary_local)) < 1e-12


def test_char_tail_diagnostics(gbar_torsion_geometry):
    rs = list(np.arange(4.0, 10.5, 1.0))
    out = char_tail_stabilization(gbar_torsion_geometry, rs, 12.0)
    assert out["integrand_fit_alpha"] is not None and out["integrand_fit_alpha"] > 0


def test_nu_local_convergence_diagnostic(ch2_geometry):
    out = nu_local_convergence(ch2_geometry, np.arange(2.0, 7.0, 1.0))
    # honest diagnostic: for the exact ball the local part diverges, so the
    # fitted "decay" exponent is negative
    assert out["fit_alpha"] is not None and out["fit_alpha"] < 0


def test_ball_density_vanishes_at_origin(ch2_geometry):
    # the exact ball closes smoothly at r = 0: the volume density (hence any
    # integrand against dr) vanishes there like the euclidean r^3 factor
    for r in (1e-3, 1e-2):
        dens = ch2_geometry.vol_density.evaluate(r).real
        assert abs(dens) < 30.0 * r**3 * ch2_geometry.total_volume
    gb = (ch2_geometry.gb_density * ch2_geometry.vol_density).evaluate(1e-3).real
    assert abs(gb) < 1e-6


def test_json_format_grid(tmp_path):
    from ache_lab.cli import main
    import json as _json

    out = tmp_path / "gb.json"
    assert main(["gauss-bonnet", "--model", "ch2-ball", "--r", "1..3", "--format", "json", "--out", str(out)]) == 0
    doc = _json.loads(out.read_text())
    assert abs(doc["rows"][0]["euler_check"] - 1.0) < 1e-6
