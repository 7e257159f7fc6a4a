"""Frame-based Levi-Civita connection and curvature on the collar.

Geometry is carried by the weighted adapted frame

    E1 = d/dr,  E2 = exp(-r) T,  E3 = exp(-r/2) h,  E4 = exp(-r/2) Jh,

whose Lie brackets have FormalSeries coefficients in q = exp(-r/2): the
radial brackets are exact ([E1,E2] = -E2, [E1,E3] = -E3/2, [E1,E4] = -E4/2)
and the tangential ones carry the boundary structure constants with weights
q^(w_a + w_b - w_k).  A FrameMetric is a symmetric 4x4 matrix of series in
this frame; the model metric dr^2 + e^{2r} eta^2 + e^r gamma is the identity.

Curvature sign convention: R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y], and
R[a,b,c,d] = < R(e_a,e_b) e_c , e_d > in the orthonormalized frame, so that
sectional curvature is R[a,b,b,a].

Curvature operator and norms: the operator matrix on Lambda^2 is expressed in
the orthonormal self-dual/anti-self-dual basis

    w+_1 = (e1^e2 + e3^e4)/sqrt2,  w+_2 = (e1^e3 - e2^e4)/sqrt2,
    w+_3 = (e1^e4 + e2^e3)/sqrt2,  and w-_k with the opposite signs,

and W+/W- are the trace-adjusted diagonal blocks.  All curvature norms are
Frobenius norms of these blocks (|Ric0|^2 of the orthonormal-frame matrix).
This is the normalization in which the closed-manifold Euler integrand
(1/8 pi^2)(|W|^2 - |Ric0|^2/2 + Scal^2/24) integrates to chi (= 2 on the
round 4-sphere) and complex space forms satisfy |W+|^2 = Scal^2/24.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .errors import NotPositive, SingularMetric
from .series import (
    DEFAULT_CAP,
    FormalSeries,
    mat_cholesky_lower,
    mat_inverse,
    mat_lower_inverse,
)
from .structures import PseudohermitianStructure, s3_standard

#: q-weights of the frame fields (e^{-w r/2} against the boundary frame).
FRAME_WEIGHTS = (0, 2, 1, 1)

#: Ordered index pairs spanning Lambda^2.
PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))

_S = 1.0 / math.sqrt(2.0)
#: Columns: the orthonormal (w+_1, w+_2, w+_3, w-_1, w-_2, w-_3) in the PAIRS basis.
LAMBDA2_BASIS = np.array(
    [
        [_S, 0, 0, _S, 0, 0],
        [0, _S, 0, 0, _S, 0],
        [0, 0, _S, 0, 0, _S],
        [0, 0, _S, 0, 0, -_S],
        [0, -_S, 0, 0, _S, 0],
        [_S, 0, 0, -_S, 0, 0],
    ]
)


@dataclasses.dataclass(frozen=True)
class FrameBrackets:
    """Structure series c[i][j][k] with [E_i, E_j] = sum_k c[i][j][k] E_k."""

    c: list

    def jacobi_residual(self) -> float:
        """Max coefficient of the cyclic Jacobi sum (should vanish through cap)."""
        worst = 0.0
        for i in range(4):
            for j in range(4):
                for k in range(4):
                    acc = [FormalSeries.zero() for _ in range(4)]
                    for (a, b, c) in ((i, j, k), (j, k, i), (k, i, j)):
                        # [[Ea,Eb],Ec] = sum_m c[a][b][m] [Em, Ec] - (d/dr terms)
                        for m in range(4):
                            coef = self.c[a][b][m]
                            if coef.is_zero:
                                continue
                            for l in range(4):
                                acc[l] = acc[l] + coef * self.c[m][c][l]
                            # Ec differentiates the series coefficient when c == 0
                            if c == 0:
                                acc[m] = acc[m] - coef.d_dr()
                    worst = max(worst, max(a_.linf() for a_ in acc))
        return worst


def frame_brackets(s: PseudohermitianStructure, cap: int = DEFAULT_CAP) -> FrameBrackets:
    """Collar brackets of the weighted adapted frame over a structure."""
    rb = s.real_brackets()  # indices over (T, h, Jh)
    c = [[[FormalSeries.zero(cap) for _ in range(4)] for _ in range(4)] for _ in range(4)]

    def setb(i, j, k, series):
        c[i][j][k] = series
        c[j][i][k] = -series

    for j in (1, 2, 3):
        setb(0, j, j, FormalSeries.term(-FRAME_WEIGHTS[j] / 2.0, 0, cap))
    for a in (1, 2, 3):
        for b in (1, 2, 3):
            if a >= b:
                continue
            for k in (1, 2, 3):
                coef = rb[a - 1, b - 1, k - 1]
                if coef == 0.0:
                    continue
                power = FRAME_WEIGHTS[a] + FRAME_WEIGHTS[b] - FRAME_WEIGHTS[k]
                setb(a, b, k, FormalSeries.term(coef, power, cap))
    return FrameBrackets(c=c)


def product_brackets(cap: int = DEFAULT_CAP) -> FrameBrackets:
    """All-zero brackets: the collar of a flat product metric dr^2 + flat 3-torus."""
    c = [[[FormalSeries.zero(cap) for _ in range(4)] for _ in range(4)] for _ in range(4)]
    return FrameBrackets(c=c)


@dataclasses.dataclass(frozen=True)
class FrameMetric:
    """Symmetric 4x4 matrix of FormalSeries in the weighted adapted frame."""

    g: list

    def __post_init__(self):
        lead = self.leading()
        sym = max(
            (self.g[i][j] - self.g[j][i]).linf() for i in range(4) for j in range(4)
        )
        if sym > 1e-10:
            raise SingularMetric(f"frame metric is not symmetric (residual {sym:.2e})")
        try:
            ev = np.linalg.eigvalsh(lead)
        except np.linalg.LinAlgError as exc:
            raise SingularMetric("metric leading term is singular") from exc
        if np.min(ev) <= 0:
            raise NotPositive(f"metric leading term not positive definite (min ev {np.min(ev):.3g})")

    def leading(self) -> np.ndarray:
        out = np.zeros((4, 4))
        for i in range(4):
            for j in range(4):
                e = self.g[i][j]
                if not e.is_zero and e.kmin <= 0 <= e.kmin + e.coeffs.shape[0] - 1:
                    v = e.coeff(0)
                    out[i, j] = v.real
                if not e.is_zero and e.kmin < 0:
                    raise SingularMetric("frame metric entries must have kmin >= 0")
        return out

    def evaluate(self, r: float) -> np.ndarray:
        out = np.zeros((4, 4))
        for i in range(4):
            for j in range(4):
                out[i, j] = self.g[i][j].evaluate_real(r)
        return out

    def cap(self) -> int:
        return min(min(e.cap for e in row) for row in self.g)


def identity_metric(cap: int = DEFAULT_CAP) -> FrameMetric:
    """The model metric dr^2 + e^{2r} eta^2 + e^r gamma in its own frame."""
    g = [
        [FormalSeries.const(1.0 if i == j else 0.0, cap) for j in range(4)]
        for i in range(4)
    ]
    return FrameMetric(g=g)


def ch2_metric(cap: int = 60) -> FrameMetric:
    """Exact complex-hyperbolic metric in geodesic polar form.

    dr^2 + 4 sinh(r)^2 eta^2 + 4 sinh(r/2)^2 gamma over the standard sphere:
    diag(1, (1-q^4)^2, (1-q^2)^2, (1-q^2)^2) in the weighted frame, using
    2 sinh(r) e^{-r} = 1 - e^{-2r}.  The entries are exact polynomials; the
    cap only bounds downstream arithmetic.  The default is generous so that
    evaluations stay accurate down to r ~ 1.
    """
    b = FormalSeries.from_items([(0, 1.0), (4, -2.0), (8, 1.0)], cap)
    c = FormalSeries.from_items([(0, 1.0), (2, -2.0), (4, 1.0)], cap)
    zero = FormalSeries.zero(cap)
    one = FormalSeries.const(1.0, cap)
    g = [
        [one, zero, zero, zero],
        [zero, b, zero, zero],
        [zero, zero, c, zero],
        [zero, zero, zero, c],
    ]
    return FrameMetric(g=g)


def ch2_structure() -> PseudohermitianStructure:
    return s3_standard()


# -- Levi-Civita connection ------------------------------------------------------


def levi_civita(metric: FrameMetric, brackets: FrameBrackets):
    """Connection coefficients Gamma[i][j][k] with nabla_{E_i} E_j = Gamma^k_{ij} E_k.

    Koszul formula in a homogeneous frame: the only metric derivatives are
    radial.  Raises SingularMetric via the inverse when the leading term
    degenerates.
    """
    g = metric.g
    ginv = mat_inverse(g)
    c = brackets.c
    dg = [[g[i][j].d_dr() for j in range(4)] for i in range(4)]

    def br_g(i, j, l):
        s = FormalSeries.zero()
        for m in range(4):
            if not c[i][j][m].is_zero:
                s = s + c[i][j][m] * g[m][l]
        return s

    K = [[[None] * 4 for _ in range(4)] for _ in range(4)]
    for i in range(4):
        for j in range(4):
            for l in range(4):
                t = FormalSeries.zero()
                if i == 0:
                    t = t + dg[j][l]
                if j == 0:
                    t = t + dg[i][l]
                if l == 0:
                    t = t - dg[i][j]
                t = t + br_g(i, j, l) - br_g(i, l, j) - br_g(j, l, i)
                K[i][j][l] = t * 0.5
    gamma = [[[None] * 4 for _ in range(4)] for _ in range(4)]
    for i in range(4):
        for j in range(4):
            for k in range(4):
                s = FormalSeries.zero()
                for l in range(4):
                    s = s + ginv[k][l] * K[i][j][l]
                gamma[i][j][k] = s
    return gamma


def metricity_residual(metric: FrameMetric, brackets: FrameBrackets, gamma) -> float:
    """Max series coefficient of nabla g (exact identity through the cap)."""
    g = metric.g
    worst = 0.0
    for i in range(4):
        for j in range(4):
            for k in range(4):
                t = g[j][k].d_dr() if i == 0 else FormalSeries.zero()
                for m in range(4):
                    t = t - gamma[i][j][m] * g[m][k] - gamma[i][k][m] * g[j][m]
                worst = max(worst, t.linf())
    return worst


def torsion_residual(brackets: FrameBrackets, gamma) -> float:
    """Max series coefficient of Gamma^k_ij - Gamma^k_ji - c^k_ij."""
    worst = 0.0
    for i in range(4):
        for j in range(4):
            for k in range(4):
                t = gamma[i][j][k] - gamma[j][i][k] - brackets.c[i][j][k]
                worst = max(worst, t.linf())
    return worst


# -- model connection oracle -----------------------------------------------------


def model_connection_oracle(s: PseudohermitianStructure, cap: int = DEFAULT_CAP):
    """Closed-form connection of the model metric g0 (identity frame metric).

    nabla = nabla^W + a: the canonical-connection part acts by the horizontal
    rotation rho(V) = -i omega(V) and kills T and d/dr; the correction a has
    constant coefficients plus torsion terms of order e^{-r}:

        a_{E2} = [[0,-1,0,0],[1,0,0,0],[0,0,0,-1/2],[0,0,1/2,0]]
        a_{E3} = [[0,0,-1/2,0],[0,0,-q^2 a,-1/2 - q^2 b],
                  [1/2, q^2 a,0,0],[0,1/2 + q^2 b,0,0]]
        a_{E4} = [[0,0,0,-1/2],[0,0,1/2 - q^2 b, q^2 a],
                  [0,-1/2 + q^2 b,0,0],[1/2,-q^2 a,0,0]]

    with (a, b) = (Re A, Im A) and matrices acting on columns:
    a_{E_i}(E_j) = sum_k (a_{E_i})[k][j] E_k.  Returned as Gamma[i][j][k].
    """
    A = complex(s.torsion_A)
    al, be = A.real, A.imag

    def S(x):  # constant
        return FormalSeries.const(x, cap)

    def Q2(x):  # x * e^{-r}
        return FormalSeries.term(x, 2, cap)

    Z = FormalSeries.zero(cap)
    a2 = [[Z, S(-1), Z, Z], [S(1), Z, Z, Z], [Z, Z, Z, S(-0.5)], [Z, Z, S(0.5), Z]]
    a3 = [
        [Z, Z, S(-0.5), Z],
        [Z, Z, Q2(-al), S(-0.5) + Q2(-be)],
        [S(0.5), Q2(al), Z, Z],
        [Z, S(0.5) + Q2(be), Z, Z],
    ]
    a4 = [
        [Z, Z, Z, S(-0.5)],
        [Z, Z, S(0.5) + Q2(-be), Q2(al)],
        [Z, S(-0.5) + Q2(be), Z, Z],
        [S(0.5), Q2(-al), Z, Z],
    ]
    a_mats = [None, a2, a3, a4]

    # canonical-connection rotation coefficients rho(f) = -i omega(f) on (T,h,Jh)
    rho = [
        complex(-1j * s.w_eta),
        complex(-1j * (s.w_1 + s.w_1b) / math.sqrt(2.0)),
        complex(-1j * 1j * (s.w_1 - s.w_1b) / math.sqrt(2.0)),
    ]
    for r_ in rho:
        if abs(r_.imag) > 1e-12:
            raise SingularMetric("canonical connection rotation must be real")
    rho = [r_.real for r_ in rho]

    gamma = [[[FormalSeries.zero(cap) for _ in range(4)] for _ in range(4)] for _ in range(4)]
    # Webster part: nabla_{E_a} E_b for tangential a, horizontal b
    for ai in (1, 2, 3):
        for bj in (2, 3):
            # nabla_{f_{ai}} of h (bj=2) or Jh (bj=3): rotation by rho
            tgt = 3 if bj == 2 else 2
            sign = 1.0 if bj == 2 else -1.0
            coef = sign * rho[ai - 1]
            if coef != 0.0:
                power = FRAME_WEIGHTS[ai] + FRAME_WEIGHTS[bj] - FRAME_WEIGHTS[tgt]
                gamma[ai][bj][tgt] = gamma[ai][bj][tgt] + FormalSeries.term(coef, power, cap)
    # correction part
    for i in (1, 2, 3):
        for j in range(4):
            for k in range(4):
                gamma[i][j][k] = gamma[i][j][k] + a_mats[i][k][j]
    return gamma


# -- orthonormal curvature pipeline ------------------------------------------------


def _zero44():
    return [[FormalSeries.zero() for _ in range(4)] for _ in range(4)]


class CurvatureModel:
    """Symbolic (series) curvature of one FrameMetric; snapshots evaluate it.

    Built once per metric: the orthonormalization A = L^{-1} (Gram-Schmidt in
    frame order), orthonormal brackets and connection, the full Riemann
    tensor, Ricci, scalar, the Lambda^2 operator blocks and the second
    fundamental form of the r-slices.
    """

    def __init__(self, metric: FrameMetric, brackets: FrameBrackets):
        self.metric = metric
        self.brackets = brackets
        g = metric.g
        self.L = mat_cholesky_lower(g)
        self.A = mat_lower_inverse(self.L)
        A = self.A
        dA = [[A[i][j].d_dr() for j in range(4)] for i in range(4)]
        c = brackets.c

        # orthonormal-frame brackets: [e_a, e_b] = chat[a][b][c] e_c
        D = [[[FormalSeries.zero() for _ in range(4)] for _ in range(4)] for _ in range(4)]
        for a in range(4):
            for b in range(a + 1, 4):
                for k in range(4):
                    t = FormalSeries.zero()
                    for i in range(4):
                        if A[a][i].is_zero:
                            continue
                        for j in range(4):
                            if c[i][j][k].is_zero or A[b][j].is_zero:
                                continue
                            t = t + A[a][i] * A[b][j] * c[i][j][k]
                    t = t + A[a][0] * dA[b][k] - A[b][0] * dA[a][k]
                    D[a][b][k] = t
                    D[b][a][k] = -t
        chat = [[[FormalSeries.zero() for _ in range(4)] for _ in range(4)] for _ in range(4)]
        for a in range(4):
            for b in range(4):
                for cc in range(4):
                    t = FormalSeries.zero()
                    for k in range(4):
                        if not D[a][b][k].is_zero:
                            t = t + D[a][b][k] * self.L[k][cc]
                    chat[a][b][cc] = t
        self.chat = chat

        # orthonormal connection: Ghat[a][b][c] = <nabla_{e_a} e_b, e_c>
        Ghat = [[[None] * 4 for _ in range(4)] for _ in range(4)]
        for a in range(4):
            for b in range(4):
                for cc in range(4):
                    Ghat[a][b][cc] = (
                        chat[a][b][cc] - chat[b][cc][a] + chat[cc][a][b]
                    ) * 0.5
        self.Ghat = Ghat

        # Riemann: R[a][b][c][d] = <R(e_a,e_b)e_c, e_d>
        dG = [
            [[Ghat[a][b][cc].d_dr() for cc in range(4)] for b in range(4)]
            for a in range(4)
        ]
        R = [[[[None] * 4 for _ in range(4)] for _ in range(4)] for _ in range(4)]
        for a in range(4):
            for b in range(4):
                if b < a:
                    continue
                for cc in range(4):
                    for d in range(4):
                        t = FormalSeries.zero()
                        # e_a(Ghat_bcd) - e_b(Ghat_acd); e_x(f) = A[x][0] f'
                        if not A[a][0].is_zero:
                            t = t + A[a][0] * dG[b][cc][d]
                        if not A[b][0].is_zero:
                            t = t - A[b][0] * dG[a][cc][d]
                        for m in range(4):
                            t = t + Ghat[b][cc][m] * Ghat[a][m][d]
                            t = t - Ghat[a][cc][m] * Ghat[b][m][d]
                            if not chat[a][b][m].is_zero:
                                t = t - chat[a][b][m] * Ghat[m][cc][d]
                        R[a][b][cc][d] = t
        for a in range(4):
            for b in range(a):
                for cc in range(4):
                    for d in range(4):
                        R[a][b][cc][d] = -R[b][a][cc][d]
        self.R = R

        # Ricci, scalar
        Ric = _zero44()
        for b in range(4):
            for cc in range(4):
                t = FormalSeries.zero()
                for a in range(4):
                    t = t + R[a][b][cc][a]
                Ric[b][cc] = t
        self.Ric = Ric
        scal = FormalSeries.zero()
        for b in range(4):
            scal = scal + Ric[b][b]
        self.Scal = scal

        # Lambda^2 operator in the pairs basis, then in the w+/w- basis
        M6 = [[None] * 6 for _ in range(6)]
        for I, (i, j) in enumerate(PAIRS):
            for J, (k, l) in enumerate(PAIRS):
                M6[I][J] = R[i][j][l][k]
        P = LAMBDA2_BASIS
        Mw = [[FormalSeries.zero() for _ in range(6)] for _ in range(6)]
        for a in range(6):
            for b in range(6):
                t = FormalSeries.zero()
                for I in range(6):
                    if P[I][a] == 0.0:
                        continue
                    for J in range(6):
                        if P[J][b] == 0.0:
                            continue
                        t = t + M6[I][J] * float(P[I][a] * P[J][b])
                Mw[a][b] = t
        self.Mw = Mw
        s12 = self.Scal * (1.0 / 12.0)
        self.Wplus = [
            [Mw[a][b] - (s12 if a == b else 0) for b in range(3)] for a in range(3)
        ]
        self.Wminus = [
            [Mw[3 + a][3 + b] - (s12 if a == b else 0) for b in range(3)]
            for a in range(3)
        ]

        # second fundamental form of the r-slices (unit normal e_1 ~ d/dr)
        self.II = [[Ghat[a][0][b] for b in (1, 2, 3)] for a in (1, 2, 3)]

        # volume density sqrt(det g)
        det = FormalSeries.const(1.0)
        for i in range(4):
            det = det * self.L[i][i]
        self.sqrt_det = det

    # -- derived series ---------------------------------------------------------

    def einstein_residual(self):
        """Series matrix Ric + (3/2) delta in the orthonormal frame."""
        return [
            [self.Ric[a][b] + (1.5 if a == b else 0.0) for b in range(4)]
            for a in range(4)
        ]

    def einstein_residual_linf_below(self, k: int) -> float:
        res = self.einstein_residual()
        return max(res[a][b].linf_below(k) for a in range(4) for b in range(4))

    def ric0(self):
        s4 = self.Scal * 0.25
        return [
            [self.Ric[a][b] - (s4 if a == b else 0) for b in range(4)] for a in range(4)
        ]

    def norm2_series(self, block) -> FormalSeries:
        t = FormalSeries.zero()
        for row in block:
            for e in row:
                t = t + e * e
        return t

    def snapshot(self, r: float) -> "CurvatureSnapshot":
        def ev(block):
            n = len(block)
            m = len(block[0])
            out = np.zeros((n, m))
            for i in range(n):
                for j in range(m):
                    out[i, j] = block[i][j].evaluate_real(r, tol=1e-6)
            return out

        riem = ev(self.Mw)
        ric = ev(self.Ric)
        scal = self.Scal.evaluate_real(r, tol=1e-6)
        wp = ev(self.Wplus)
        wm = ev(self.Wminus)
        ii = ev(self.II)
        return CurvatureSnapshot(r=r, riem=riem, ric=ric, scal=scal, wplus=wp, wminus=wm, second_form=ii)


@dataclasses.dataclass(frozen=True)
class CurvatureSnapshot:
    """Evaluated curvature data in the orthonormal frame at one radius."""

    r: float
    riem: np.ndarray  # 6x6 operator on Lambda^2 in the (w+, w-) basis
    ric: np.ndarray  # 4x4
    scal: float
    wplus: np.ndarray  # 3x3 trace-free
    wminus: np.ndarray  # 3x3 trace-free
    second_form: np.ndarray | None = None  # 3x3 on the slice frame (e2,e3,e4)

    @property
    def w2_plus(self) -> float:
        return float(np.sum(self.wplus**2))

    @property
    def w2_minus(self) -> float:
        return float(np.sum(self.wminus**2))

    @property
    def ric0_norm2(self) -> float:
        z = self.ric - (self.scal / 4.0) * np.eye(4)
        return float(np.sum(z**2))

    @property
    def einstein_residual(self) -> float:
        return float(np.max(np.abs(self.ric + 1.5 * np.eye(4))))


def riemann_snapshot(metric: FrameMetric, brackets: FrameBrackets, r: float) -> CurvatureSnapshot:
    """One-shot snapshot; build a CurvatureModel directly to amortize over r-grids."""
    return CurvatureModel(metric, brackets).snapshot(r)


def round_s4_snapshot() -> CurvatureSnapshot:
    """Constant-curvature snapshot of the unit round 4-sphere (sec = 1)."""
    return CurvatureSnapshot(
        r=0.0,
        riem=np.eye(6),
        ric=3.0 * np.eye(4),
        scal=12.0,
        wplus=np.zeros((3, 3)),
        wminus=np.zeros((3, 3)),
        second_form=np.zeros((3, 3)),
    )


#: Volume of the unit round 4-sphere.
S4_VOLUME = 8.0 * math.pi**2 / 3.0
