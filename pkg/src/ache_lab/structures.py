"""Homogeneous pseudohermitian 3-manifolds via invariant coframe constants.

Conventions (used consistently across the whole library)
---------------------------------------------------------
An invariant coframe (eta, theta1, theta1b) with theta1b = conj(theta1) is
normalized so that

    d(eta) = i * theta1 ^ theta1b.

Exterior derivatives of invariant 1-forms are encoded by constant complex
coefficients in the 2-form basis (eta^theta1, eta^theta1b, theta1^theta1b).
The dual frame is (T, Z1, Z1b) with T the Reeb field.  Real horizontal frame:

    h  = (Z1 + Z1b) / sqrt(2),      Jh = i (Z1 - Z1b) / sqrt(2),

which is unit for the Levi metric gamma = d(eta)(. , J .).  The canonical
connection form omega_1^1 is purely imaginary, the torsion tau1 = A theta1b
is a (0,1)-form, and they satisfy

    d(theta1) = theta1 ^ omega_1^1 + eta ^ tau1.

The scalar curvature R is read off d(omega_1^1) = R theta1 ^ theta1b + (...)^eta.
With A = alpha + i beta, the torsion endomorphism of H in the (h, Jh) frame is
[[alpha, beta], [beta, -alpha]].

Only homogeneous (constant-coefficient) structures are supported: every
derived series coefficient is then an exact scalar, and covariant derivatives
of invariant tensors are pure connection action.
"""

from __future__ import annotations

import dataclasses
import json
import math
from typing import Optional

import numpy as np

from .errors import (
    DeformationTooLarge,
    Inconsistent,
    NonContact,
    SchemaError,
    UnsupportedDirection,
)

_SQRT2 = math.sqrt(2.0)

#: Webster scalar curvature of the standard unit-volume-normalized 3-sphere.
#: Pinned by requiring the exact complex-hyperbolic metric
#: dr^2 + 4 sinh(r)^2 eta^2 + 4 sinh(r/2)^2 gamma (holomorphic sectional
#: curvature -1) to be Einstein over this structure; see the curvature tests.
STANDARD_S3_WEBSTER_R = 4.0

#: Total contact volume of the standard 3-sphere, integral of eta ^ d(eta).
#: Computed once by direct Hopf-coordinate quadrature of the round sphere
#: (see tests/test_structures.py::test_s3_total_volume_hopf_oracle).
S3_TOTAL_VOLUME = math.pi**2


@dataclasses.dataclass(frozen=True)
class CoframeD:
    """Exterior derivative of the invariant coframe.

    d_eta and d_theta1 are complex triples over the 2-form basis
    (eta^theta1, eta^theta1b, theta1^theta1b); d_theta1b is implied by
    conjugation.
    """

    d_eta: tuple
    d_theta1: tuple

    def d_theta1b(self) -> tuple:
        c1, c2, c3 = self.d_theta1
        return (np.conj(c2), np.conj(c1), -np.conj(c3))


def _d_oneform(coef_eta, coef_t1, coef_t1b, cd: CoframeD) -> tuple:
    """d of a constant-coefficient 1-form, in the standard 2-form basis."""
    out = np.zeros(3, dtype=complex)
    out += np.asarray(cd.d_eta, dtype=complex) * coef_eta
    out += np.asarray(cd.d_theta1, dtype=complex) * coef_t1
    out += np.asarray(cd.d_theta1b(), dtype=complex) * coef_t1b
    return tuple(out)


def _d_twoform(c: tuple, cd: CoframeD) -> complex:
    """d of a constant-coefficient 2-form; returns the eta^theta1^theta1b part.

    d(eta^theta1) = -c11b * vol,  d(eta^theta1b) = +conj(c11b) * vol,
    d(theta1^theta1b) = (c_e1 + conj(c_e1)) * vol,
    where (c_e1, c_e1b, c11b) are the d_theta1 coefficients.
    """
    ce1, _, c11b = cd.d_theta1
    return -c[0] * c11b + c[1] * np.conj(c11b) + c[2] * (ce1 + np.conj(ce1))


@dataclasses.dataclass(frozen=True)
class TorsionEndomorphism:
    """Torsion of the canonical connection acting on H in the (h, Jh) frame."""

    alpha: float
    beta: float

    def matrix(self) -> np.ndarray:
        return np.array([[self.alpha, self.beta], [self.beta, -self.alpha]])


@dataclasses.dataclass(frozen=True)
class DeformationTensor:
    """Anti-complex-linear endomorphism of H, component E in the theta1 frame."""

    E: complex

    def matrix(self) -> np.ndarray:
        """As a real bilinear form k on (h, Jh); satisfies k(J., J.) = -k(., .)."""
        a, b = self.E.real, self.E.imag
        return np.array([[a, b], [b, -a]])


@dataclasses.dataclass(frozen=True)
class PseudohermitianStructure:
    name: str
    coframe_d: CoframeD
    webster_R: float
    torsion_A: complex
    connection_w: tuple  # omega_1^1 coefficients along (eta, theta1, theta1b)
    total_volume: float

    @property
    def w_eta(self) -> complex:
        return self.connection_w[0]

    @property
    def w_1(self) -> complex:
        return self.connection_w[1]

    @property
    def w_1b(self) -> complex:
        return self.connection_w[2]

    def torsion_endomorphism(self) -> TorsionEndomorphism:
        A = complex(self.torsion_A)
        return TorsionEndomorphism(A.real, A.imag)

    def complex_brackets(self):
        """Lie brackets of the dual frame (T, Z1, Z1b) as coefficient triples.

        Uses theta([X, Y]) = -d(theta)(X, Y) for constant pairings.
        Returns a dict keyed by ('T1', '11b') -> components over (T, Z1, Z1b).
        """
        ce1, ce1b, c11b = self.coframe_d.d_theta1
        # [T, Z1]: eta-component -d_eta(T, Z1) = 0 for a contact coframe
        t_z1 = np.array([0.0, -ce1, -np.conj(ce1b)], dtype=complex)
        # [Z1, Z1b]
        de = np.asarray(self.coframe_d.d_eta, dtype=complex)
        z1_z1b = np.array([-de[2], -c11b, np.conj(c11b)], dtype=complex)
        return {"T1": t_z1, "11b": z1_z1b}

    def real_brackets(self) -> np.ndarray:
        """Structure constants of (T, h, Jh): br[i][j] = components of [f_i, f_j]."""
        cb = self.complex_brackets()
        # change of basis: columns of P are (T, h, Jh) in the (T, Z1, Z1b) frame,
        # with h = (Z1 + Z1b)/sqrt2 and Jh = i(Z1 - Z1b)/sqrt2
        P = np.array(
            [
                [1, 0, 0],
                [0, 1 / _SQRT2, 1j / _SQRT2],
                [0, 1 / _SQRT2, -1j / _SQRT2],
            ],
            dtype=complex,
        )
        Pinv = np.linalg.inv(P)

        def bracket(u, v):
            # bilinear extension from the two independent complex brackets
            out = np.zeros(3, dtype=complex)
            pairs = [(1, 2, cb["11b"]), (0, 1, cb["T1"]), (0, 2, np.conj(cb["T1"])[[0, 2, 1]])]
            # [T, Z1b] = conj of [T, Z1] with Z1 <-> Z1b swapped
            for i, j, c in pairs:
                out += (u[i] * v[j] - u[j] * v[i]) * c
            return out

        br = np.zeros((3, 3, 3))
        for i in range(3):
            for j in range(3):
                w = bracket(P[:, i], P[:, j])
                w_real_frame = Pinv @ w
                if np.max(np.abs(w_real_frame.imag)) > 1e-12:
                    raise Inconsistent("real frame brackets came out non-real")
                br[i, j] = w_real_frame.real
        return br

    def rescale_contact_form(self, lam: float) -> "PseudohermitianStructure":
        """Structure for eta' = lam * eta (theta1' = sqrt(lam) theta1).

        Webster data scale as R -> R/lam, A -> A/lam, volume -> lam^2 volume.
        """
        if lam <= 0:
            raise Inconsistent("contact rescaling requires lam > 0")
        s = math.sqrt(lam)
        ce1, ce1b, c11b = self.coframe_d.d_theta1
        # basis: eta^theta1 -> lam*s, eta^theta1b -> lam*s, theta^thetab -> lam
        # d(theta1') = s * d(theta1); re-express in primed basis
        new_d_theta1 = (ce1 / lam, ce1b / lam, c11b / s)
        cd = CoframeD(d_eta=(0.0, 0.0, 1j), d_theta1=new_d_theta1)
        return make_structure(f"{self.name}-rescaled", cd, self.total_volume * lam * lam)


@dataclasses.dataclass(frozen=True)
class InvariantTensor:
    """Frame component of an invariant tensor with its connection weight.

    The weight m counts (upper 1) - (lower 1) - (upper 1b) + (lower 1b)
    indices; the canonical connection acts on the component as m * w(V).
    The torsion component A = tau^1_{1b} has m = +2.
    """

    value: complex
    weight: int


def derive_webster_data(coframe_d: CoframeD, tol: float = 1e-12):
    """Solve the structure equations for (omega_1^1, tau1, R).

    The decomposition d(theta1) = theta1 ^ omega + eta ^ tau with omega purely
    imaginary and tau of type (0,1) is unique.  Raises NonContact when d(eta)
    is not i theta1 ^ theta1b, and Inconsistent when no purely imaginary
    solution exists (equivalently d^2(eta) != 0).
    """
    de = np.asarray(coframe_d.d_eta, dtype=complex)
    if abs(de[2]) < tol:
        raise NonContact("d(eta) is degenerate")
    if abs(de[0]) > tol or abs(de[1]) > tol or abs(de[2] - 1j) > tol:
        raise NonContact("coframe is not normalized to d(eta) = i theta1^theta1b")

    ce1, ce1b, c11b = coframe_d.d_theta1
    w_eta = -ce1
    if abs(w_eta + np.conj(w_eta)) > tol:
        raise Inconsistent("no purely imaginary connection solves the structure equation")
    A = complex(ce1b)
    w_1b = complex(c11b)
    w_1 = -np.conj(w_1b)
    connection_w = (complex(w_eta), complex(w_1), complex(w_1b))

    # scalar curvature from d(omega): coefficient of theta1 ^ theta1b
    domega = _d_oneform(w_eta, w_1, w_1b, coframe_d)
    R = domega[2]
    if abs(R.imag) > tol * max(1.0, abs(R)):
        raise Inconsistent("scalar curvature came out non-real")
    return connection_w, A, float(R.real)


def make_structure(
    name: str,
    coframe_d: CoframeD,
    total_volume: float,
    tol: float = 1e-12,
) -> PseudohermitianStructure:
    connection_w, A, R = derive_webster_data(coframe_d, tol=tol)
    if total_volume <= 0:
        raise Inconsistent("total contact volume must be positive")
    return PseudohermitianStructure(
        name=name,
        coframe_d=coframe_d,
        webster_R=R,
        torsion_A=A,
        connection_w=connection_w,
        total_volume=float(total_volume),
    )


@dataclasses.dataclass
class ValidationReport:
    checks: dict
    passed: bool

    def to_dict(self):
        return {"passed": self.passed, "checks": self.checks}


def validate_structure(s: PseudohermitianStructure, tol: float = 1e-10) -> ValidationReport:
    """Check the defining invariants; failures are reported, not raised."""
    checks = {}
    de = np.asarray(s.coframe_d.d_eta, dtype=complex)
    checks["contact_normalization"] = float(
        abs(de[0]) + abs(de[1]) + abs(de[2] - 1j)
    )
    # rebuild d(theta1) from (omega, tau): -w_eta eta^t1 + A eta^t1b + w_1b t1^t1b
    rebuilt = np.array([-s.w_eta, s.torsion_A, s.w_1b], dtype=complex)
    given = np.asarray(s.coframe_d.d_theta1, dtype=complex)
    checks["structure_equation"] = float(np.max(np.abs(rebuilt - given)))
    checks["d2_eta"] = float(abs(2 * np.real(s.coframe_d.d_theta1[0])))
    d2t1 = _d_twoform(np.asarray(s.coframe_d.d_theta1, dtype=complex), s.coframe_d)
    # d(d theta1) also receives d(eta)-wedge terms; for the normalized basis the
    # whole obstruction sits in the volume component computed above
    checks["d2_theta1"] = float(abs(d2t1))
    checks["connection_imaginary"] = float(
        abs(s.w_eta + np.conj(s.w_eta)) + abs(s.w_1 + np.conj(s.w_1b))
    )
    passed = all(v < tol for v in checks.values())
    return ValidationReport(checks=checks, passed=passed)


_DIRECTION_SHIFT = {"1": -1, "1b": +1, "0": 0}


def webster_derivative(
    s: PseudohermitianStructure, t: InvariantTensor, direction: str
) -> InvariantTensor:
    """Covariant derivative of an invariant tensor component.

    On a homogeneous structure the frame components are constants, so the
    derivative is pure connection action: m * w(V) * value.  The direction
    adds one covariant index ('1' lowers the weight, '1b' raises it, '0'
    leaves it).
    """
    if direction not in _DIRECTION_SHIFT:
        raise UnsupportedDirection(
            f"direction must be one of '1','1b','0', got {direction!r}"
        )
    w = {"1": s.w_1, "1b": s.w_1b, "0": s.w_eta}[direction]
    return InvariantTensor(t.weight * w * t.value, t.weight + _DIRECTION_SHIFT[direction])


def make_webster_derivative(s: PseudohermitianStructure):
    """Curried form of webster_derivative bound to one structure."""

    def deriv(t: InvariantTensor, direction: str) -> InvariantTensor:
        return webster_derivative(s, t, direction)

    return deriv


def sublaplacian(s: PseudohermitianStructure, t: InvariantTensor) -> complex:
    """Horizontal Laplacian on an invariant component: -(D_1 D_1b + D_1b D_1).

    Vanishes on any invariant scalar (weight 0); for weighted components it is
    the algebraic composition of two connection actions.
    """
    d = make_webster_derivative(s)
    return -(d(d(t, "1b"), "1").value + d(d(t, "1"), "1b").value)


def deform_cr(
    s: PseudohermitianStructure, E: complex, t: float
) -> PseudohermitianStructure:
    """Deform the complex structure on H along E, keeping the contact form.

    First-order convention: theta1 -> theta1 + t*conj(E)*theta1b, followed by
    the rescaling that restores d(eta) = i theta1^theta1b.  The derivative of
    the deformed complex structure at t = 0 is E.
    """
    E = complex(E)
    sq = 1.0 - (t * abs(E)) ** 2
    if sq <= 1e-12:
        raise DeformationTooLarge(f"|t * E| = {abs(t * E):.3g} too large to renormalize")
    rs = math.sqrt(sq)
    tEb = t * np.conj(E)

    ce = np.asarray(s.coframe_d.d_theta1, dtype=complex)
    cb = np.asarray(s.coframe_d.d_theta1b(), dtype=complex)
    num = (ce + tEb * cb) / rs  # d(theta1') in the OLD basis

    # old basis 2-forms in the new basis:
    #   eta^theta1  = (eta^theta1' - t conj(E) eta^theta1b') / rs
    #   eta^theta1b = (eta^theta1b' - t E eta^theta1') / rs
    #   theta1^theta1b = theta1'^theta1b'   (exact)
    new = np.zeros(3, dtype=complex)
    new[0] = (num[0] - t * E * num[1]) / rs
    new[1] = (num[1] - tEb * num[0]) / rs
    new[2] = num[2]

    cd = CoframeD(d_eta=(0.0, 0.0, 1j), d_theta1=tuple(new))
    return make_structure(f"{s.name}-deformed", cd, s.total_volume)


# -- built-in models -----------------------------------------------------------


def heisenberg(total_volume: float = 1.0) -> PseudohermitianStructure:
    """Flat model: d(theta1) = 0, vanishing torsion and curvature."""
    cd = CoframeD(d_eta=(0.0, 0.0, 1j), d_theta1=(0.0, 0.0, 0.0))
    return make_structure("heisenberg", cd, total_volume)


def s3_standard() -> PseudohermitianStructure:
    """The standard sphere: omega = -i R0 eta, zero torsion, R0 = 4."""
    r0 = STANDARD_S3_WEBSTER_R
    cd = CoframeD(d_eta=(0.0, 0.0, 1j), d_theta1=(1j * r0, 0.0, 0.0))
    return make_structure("s3-standard", cd, S3_TOTAL_VOLUME)


def su2_torsion(A: complex, webster_R: float = STANDARD_S3_WEBSTER_R) -> PseudohermitianStructure:
    """Left-invariant torsion deformation of the standard sphere.

    d(theta1) = i R eta^theta1 + A eta^theta1b is integrable for every
    constant (R, A); the derived data are exactly (R, A).
    """
    cd = CoframeD(d_eta=(0.0, 0.0, 1j), d_theta1=(1j * webster_R, complex(A), 0.0))
    return make_structure(f"su2-torsion[{A:.6g}]", cd, S3_TOTAL_VOLUME)


# -- JSON I/O -----------------------------------------------------------------


def _c2pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _pair2c(p) -> complex:
    return complex(p[0], p[1])


def structure_to_json(s: PseudohermitianStructure) -> dict:
    return {
        "name": s.name,
        "model": "custom",
        "coframe_d": {
            "d_eta": [_c2pair(z) for z in s.coframe_d.d_eta],
            "d_theta1": [_c2pair(z) for z in s.coframe_d.d_theta1],
        },
        "torsion": _c2pair(s.torsion_A),
        "total_volume": s.total_volume,
    }


def structure_from_json(doc: dict) -> PseudohermitianStructure:
    model = doc.get("model", "custom")
    if model == "heisenberg":
        return heisenberg(total_volume=float(doc.get("total_volume", 1.0)))
    if model == "su2":
        A = _pair2c(doc.get("torsion", [0.0, 0.0]))
        R = float(doc.get("webster_R", STANDARD_S3_WEBSTER_R))
        if A == 0 and R == STANDARD_S3_WEBSTER_R:
            return s3_standard()
        return su2_torsion(A, R)
    if model == "custom":
        try:
            cf = doc["coframe_d"]
            cd = CoframeD(
                d_eta=tuple(_pair2c(p) for p in cf["d_eta"]),
                d_theta1=tuple(_pair2c(p) for p in cf["d_theta1"]),
            )
            return make_structure(
                doc.get("name", "custom"), cd, float(doc["total_volume"])
            )
        except KeyError as exc:
            raise SchemaError(f"missing structure field: {exc}") from exc
    raise SchemaError(f"unknown structure model {model!r}")


def load_structure(path: str) -> PseudohermitianStructure:
    with open(path, "r", encoding="utf-8") as fh:
        return structure_from_json(json.load(fh))


def builtin_structure(name: str) -> Optional[PseudohermitianStructure]:
    if name in ("s3-standard", "s3", "ch2", "ch2-ball"):
        return s3_standard()
    if name == "heisenberg":
        return heisenberg()
    return None
