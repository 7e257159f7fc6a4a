import json
import math

import numpy as np
import pytest

from ache_lab.errors import DeformationTooLarge, Inconsistent, NonContact, UnsupportedDirection
from ache_lab.structures import (
    CoframeD,
    InvariantTensor,
    S3_TOTAL_VOLUME,
    STANDARD_S3_WEBSTER_R,
    deform_cr,
    derive_webster_data,
    heisenberg,
        make_webster_derivative,
        structure_from_json,
    structure_to_json,
    su2_torsion,
    sublaplacian,
    validate_structure,
)


def test_heisenberg_webster_data(heis):
    assert heis.webster_R == 0.0
    assert heis.torsion_A == 0.0
    assert all(abs(w) == 0.0 for w in heis.connection_w)


def test_s3_webster_data(s3):
    assert abs(s3.torsion_A) < 1e-12
    assert s3.webster_R == STANDARD_S3_WEBSTER_R
    assert abs(s3.w_eta + 1j * STANDARD_S3_WEBSTER_R) < 1e-14


def test_torsion_deformed_data():
    s = su2_torsion(0.25 - 0.5j, webster_R=3.0)
    assert abs(s.torsion_A - (0.25 - 0.5j)) < 1e-14
    assert abs(s.webster_R - 3.0) < 1e-12


def test_structure_equation_reconstruction(s3, torsion_struct):
    # rebuilding d(theta1) from (omega, tau) reproduces the input coefficients
    for s in (s3, torsion_struct, heisenberg()):
        rebuilt = np.array([-s.w_eta, s.torsion_A, s.w_1b])
        given = np.array(s.coframe_d.d_theta1, dtype=complex)
        assert np.max(np.abs(rebuilt - given)) < 1e-12


def test_validate_passes_builtins(s3, heis, torsion_struct):
    for s in (s3, heis, torsion_struct):
        rep = validate_structure(s)
        assert rep.passed, rep.checks


def test_noncontact_flagged():
    with pytest.raises(NonContact):
        derive_webster_data(CoframeD(d_eta=(0.0, 0.0, 0.0), d_theta1=(0.0, 0.0, 0.0)))


def test_broken_jacobi_flagged():
    # a real part in the eta^theta1 slot of d(theta1) violates d^2(eta) = 0
    cd = CoframeD(d_eta=(0.0, 0.0, 1j), d_theta1=(0.3 + 4j, 0.0, 0.0))
    with pytest.raises(Inconsistent):
        derive_webster_data(cd)


def test_webster_derivative_rules(s3, torsion_struct):
    d = make_webster_derivative(torsion_struct)
    # scalars are annihilated in every direction
    R = InvariantTensor(torsion_struct.webster_R, weight=0)
    for direction in ("1", "1b", "0"):
        assert d(R, direction).value == 0.0
    # the torsion component has weight 2: reeb derivative is 2 w_eta A
    A = InvariantTensor(torsion_struct.torsion_A, weight=2)
    got = d(A, "0").value
    assert abs(got - 2 * torsion_struct.w_eta * torsion_struct.torsion_A) < 1e-14
    # horizontal derivatives vanish when the connection has no horizontal part
    assert d(A, "1").value == 0.0
    assert d(d(A, "1"), "1").value == 0.0
    with pytest.raises(UnsupportedDirection):
        d(A, "2")


def test_sublaplacian(s3, torsion_struct):
    assert sublaplacian(s3, InvariantTensor(s3.webster_R, 0)) == 0.0
    assert sublaplacian(s3, InvariantTensor(0.0, 0)) == 0.0
    # composition oracle: -(D1 D1b + D1b D1) applied by hand
    d = make_webster_derivative(torsion_struct)
    t = InvariantTensor(1.25 - 0.5j, weight=2)
    by_hand = -(d(d(t, "1b"), "1").value + d(d(t, "1"), "1b").value)
    assert sublaplacian(torsion_struct, t) == by_hand


def test_torsion_endomorphism_shape(torsion_struct):
    m = torsion_struct.torsion_endomorphism().matrix()
    assert abs(np.trace(m)) == 0.0
    assert np.array_equal(m, m.T)
    assert m[0, 0] == torsion_struct.torsion_A.real
    assert m[0, 1] == torsion_struct.torsion_A.imag


def test_deform_cr_identity(s3):
    s = deform_cr(s3, 0.7 - 0.2j, 0.0)
    assert np.max(np.abs(np.array(s.coframe_d.d_theta1) - np.array(s3.coframe_d.d_theta1))) < 1e-14


def test_deform_cr_produces_torsion(s3):
    E = 1.0 + 0.0j
    s = deform_cr(s3, E, 0.05)
    assert abs(s.torsion_A) > 1e-3
    assert validate_structure(s).passed


def test_deform_cr_smooth_in_t(s3):
    # second-order finite differences of A(t) converge: A is smooth in t
    E = 0.8 + 0.4j

    def A(t):
        return complex(deform_cr(s3, E, t).torsion_A)

    h1, h2 = 1e-3, 5e-4
    d1 = (A(h1) - A(-h1)) / (2 * h1)
    d2 = (A(h2) - A(-h2)) / (2 * h2)
    # Richardson: error drops by ~4 when halving h
    d_extrap = (4 * d2 - d1) / 3
    assert abs(d2 - d_extrap) < abs(d1 - d_extrap) / 3.5


def test_deform_too_large(s3):
    with pytest.raises(DeformationTooLarge):
        deform_cr(s3, 2.0, 0.6)


def test_json_roundtrip(torsion_struct):
    doc = structure_to_json(torsion_struct)
    s2 = structure_from_json(json.loads(json.dumps(doc)))
    assert abs(s2.torsion_A - torsion_struct.torsion_A) < 1e-14
    assert abs(s2.webster_R - torsion_struct.webster_R) < 1e-12
    assert s2.total_volume == torsion_struct.total_volume
    assert structure_from_json({"model": "heisenberg"}).name == "heisenberg"
    assert structure_from_json({"model": "su2"}).name == "s3-standard"


def test_rescale_contact_form(torsion_struct):
    lam = 2.5
    s2 = torsion_struct.rescale_contact_form(lam)
    assert abs(s2.webster_R - torsion_struct.webster_R / lam) < 1e-12
    assert abs(s2.torsion_A - torsion_struct.torsion_A / lam) < 1e-14
    assert abs(s2.total_volume - torsion_struct.total_volume * lam * lam) < 1e-12
    assert validate_structure(s2).passed


def test_s3_total_volume_hopf_oracle():
    """Independent quadrature of eta ^ d(eta) over the Hopf parametrization.

    eta = (x1 dy1 - y1 dx1 + x2 dy2 - y2 dx2) / 2 on the unit 3-sphere; the
    3-form is evaluated on numerical Jacobian columns of the embedding, so
    nothing from the structure module enters.
    """

    def embed(t, p1, p2):
        return np.array(
            [
                math.cos(t) * math.cos(p1),
                math.cos(t) * math.sin(p1),
                math.sin(t) * math.cos(p2),
                math.sin(t) * math.sin(p2),
            ]
        )

    def eta_at(pt, v):
        x1, y1, x2, y2 = pt
        return 0.5 * (x1 * v[1] - y1 * v[0] + x2 * v[3] - y2 * v[2])

    def deta(u, v):
        return (u[0] * v[1] - u[1] * v[0]) + (u[2] * v[3] - u[3] * v[2])

    def integrand(t, p1, p2, h=1e-6):
        pt = embed(t, p1, p2)
        cols = []
        for dt, dp1, dp2 in ((h, 0, 0), (0, h, 0), (0, 0, h)):
            cols.append((embed(t + dt, p1 + dp1, p2 + dp2) - embed(t - dt, p1 - dp1, p2 - dp2)) / (2 * h))
        t1, t2, t3 = cols
        return (
            eta_at(pt, t1) * deta(t2, t3)
            - eta_at(pt, t2) * deta(t1, t3)
            + eta_at(pt, t3) * deta(t1, t2)
        )

    nt, np_ = 24, 12
    xs, ws = np.polynomial.legendre.leggauss(nt)
    ts = (xs + 1) * (math.pi / 4)
    wt = ws * (math.pi / 4)
    xq, wq = np.polynomial.legendre.leggauss(np_)
    ps = (xq + 1) * math.pi
    wp = wq * math.pi
    total = 0.0
    for t, w1 in zip(ts, wt):
        for p1, w2 in zip(ps, wp):
            for p2, w3 in zip(ps, wp):
                total += integrand(t, p1, p2) * w1 * w2 * w3
    assert abs(abs(total) - S3_TOTAL_VOLUME) < 1e-6


def test_real_brackets_s3(s3):
    br = s3.real_brackets()
    R0 = STANDARD_S3_WEBSTER_R
    # [T, h] = -R0 Jh, [T, Jh] = R0 h, [h, Jh] = -T
    assert np.allclose(br[0, 1], [0.0, 0.0, -R0])
    assert np.allclose(br[0, 2], [0.0, R0, 0.0])
    assert np.allclose(br[1, 2], [-1.0, 0.0, 0.0])
