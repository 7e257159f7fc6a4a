"""CR invariants and cross-checks.

The rank-2 bundle of infinitesimal complex-structure deformations sits inside
the symmetric trace-free endomorphisms of the anti-self-dual 2-forms as

    J = span{ (w-_2)^2 - (w-_3)^2 ,  w-_2 w-_3 + w-_3 w-_2 },

i.e. the 3x3 matrices U = diag(0, 1, -1) and V = offdiag(2,3) in the
(w-_1, w-_2, w-_3) basis.  A JSection is a pair (p, q) in this basis,
identified with the complex scalar p + iq.

extract_W2minus reads the exp(-2r) coefficient of the anti-self-dual Weyl
block of an approximately Kahler-Einstein metric; it always lands in J (the
residual outside J is reported and must be tiny).  cartan_tensor evaluates
the classical fourth-order curvature tensor of 3-dimensional CR geometry
from pseudohermitian data; on homogeneous structures only the connection
action survives:

    Q = (1/6) R_{,11} + (i/2) R A - A_{,0} - (2i/3) A_{,1b 1b-raised}

where A is the torsion component (carried here with connection weight -2;
this fixes the phase of the embedding into J, and the conjugation/scale
freedom of the classical normalizations is absorbed by the fitted
proportionality constant).  Both Q and W2- vanish exactly on spherical
structures; on the constant-torsion family they are complex-linear in A and
their ratio is the constant the proportionality fit estimates.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .curvature import CurvatureModel, FrameMetric
from .errors import DegenerateFamily, LeadingOrderTooLow
from .series import FormalSeries
from .structures import InvariantTensor, PseudohermitianStructure, make_webster_derivative

PI2 = math.pi**2

J_BASIS_U = np.diag([0.0, 1.0, -1.0])
J_BASIS_V = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]])


@dataclasses.dataclass(frozen=True)
class JSection:
    """Coordinates in the deformation-bundle basis {U, V} of Sym0^2(Lambda^2_-)."""

    p: float
    q: float

    def embedded(self) -> np.ndarray:
        return self.p * J_BASIS_U + self.q * J_BASIS_V

    def as_complex(self) -> complex:
        return complex(self.p, self.q)

    def norm(self) -> float:
        return abs(self.as_complex())


@dataclasses.dataclass(frozen=True)
class PerturbationK:
    """Trace-free anti-J-invariant slice perturbation, entries (a, b).

    As a quadratic form on the horizontal frame it is [[a, b], [b, -a]]
    carried at one order below the determined metric terms: the frame-metric
    entries shift by 2 q^4 (a, b, -a) on the (3,3), (3,4), (4,4) slots.
    """

    a: float
    b: float

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.b, -self.a]])


def extract_W2minus(model: CurvatureModel, tol_low: float = 1e-9):
    """(JSection, residual outside J) from the q^4 anti-self-dual Weyl block.

    Raises LeadingOrderTooLow when the block has a coefficient below q^4:
    that violates the guaranteed decay of the anti-self-dual curvature and
    always indicates a bug upstream, never a property of the input.
    """
    below = max(model.Wminus[a][b].linf_below(4) for a in range(3) for b in range(3))
    if below > tol_low:
        raise LeadingOrderTooLow(
            f"anti-self-dual Weyl block has mass {below:.2e} below q^4"
        )
    B4 = np.zeros((3, 3))
    for a in range(3):
        for b in range(3):
            c = model.Wminus[a][b].coeff(4)
            if abs(c.imag) > 1e-10:
                raise LeadingOrderTooLow("q^4 Weyl coefficient is not real")
            B4[a, b] = c.real
    p = float(np.sum(B4 * J_BASIS_U) / 2.0)
    q = float(np.sum(B4 * J_BASIS_V) / 2.0)
    resid = np.linalg.norm(B4 - p * J_BASIS_U - q * J_BASIS_V)
    scale = np.linalg.norm(B4)
    rel = resid / scale if scale > 0 else 0.0
    return JSection(p=p, q=q), rel


def cartan_tensor(s: PseudohermitianStructure) -> JSection:
    """Fourth-order CR curvature of a homogeneous structure, in the J-basis.

    Classical pseudohermitian formula (see the module docstring for the
    normalization and phase conventions); every term is connection action on
    constants here.  Vanishes exactly on spherical structures.
    """
    d = make_webster_derivative(s)
    R = float(s.webster_R)
    A = complex(s.torsion_A)

    # scalar curvature horizontal derivatives (zero on invariant scalars)
    Rt = InvariantTensor(R, weight=0)
    R11 = d(d(Rt, "1"), "1").value

    At = InvariantTensor(A, weight=-2)
    A0 = d(At, "0").value
    # second horizontal derivative, (1b) twice with the index raised back
    A1b1b = d(d(At, "1b"), "1b").value

    Qc = (1.0 / 6.0) * R11 + 0.5j * R * A - A0 - (2j / 3.0) * A1b1b
    return JSection(p=float(Qc.real), q=float(Qc.imag))


@dataclasses.dataclass
class CartanFit:
    c_q: float
    max_rel_residual: float
    samples: int


def fit_cartan_constant(pairs) -> CartanFit:
    """Least-squares proportionality fit of W2- sections against Cartan tensors.

    pairs: iterable of (JSection_w2minus, JSection_cartan).  Raises
    DegenerateFamily when the Cartan tensor vanishes across the family.
    """
    ws = []
    qs = []
    for w, q in pairs:
        ws.append(w.as_complex())
        qs.append(q.as_complex())
    ws = np.array(ws)
    qs = np.array(qs)
    if len(ws) == 0 or np.max(np.abs(qs)) < 1e-13:
        raise DegenerateFamily("Cartan tensor vanishes on the whole family")
    c = np.vdot(qs, ws) / np.vdot(qs, qs)  # complex least squares
    resid = np.abs(ws - c * qs)
    scale = np.max(np.abs(ws))
    rel = float(np.max(resid) / scale) if scale > 0 else 0.0
    if abs(c.imag) > 1e-6 * max(1.0, abs(c)):
        # the embeddings are phase-aligned by construction; a complex ratio
        # signals an upstream inconsistency, so surface it in the residual
        rel = max(rel, abs(c.imag))
    return CartanFit(c_q=float(c.real), max_rel_residual=rel, samples=len(ws))


def inject_perturbation(gbar: FrameMetric, k: PerturbationK) -> FrameMetric:
    """gbar plus the slice perturbation, one order below the determined terms.

    Entries (3,3), (3,4), (4,4) shift by 2 q^4 (a, b, -a): the q^4 slot is
    where the formally undetermined deformation of an exactly-Einstein
    filling enters relative to the constructed metric.
    """
    cap = gbar.cap()
    g = [[gbar.g[i][j] for j in range(4)] for i in range(4)]
    da = FormalSeries.term(2.0 * k.a, 4, cap)
    db = FormalSeries.term(2.0 * k.b, 4, cap)
    g[2][2] = g[2][2] + da
    g[3][3] = g[3][3] - da
    g[2][3] = g[2][3] + db
    g[3][2] = g[3][2] + db
    return FrameMetric(g=g)


def variation_integrand(s: PseudohermitianStructure, E: complex) -> float:
    """Derivative of the boundary invariant along a deformation E of J.

    -(3 / 8 pi^2) <Q, E> V with the pointwise Hermitian pairing
    <Q, E> = Re(Q conj(E)) and V the total contact volume.  Linear in E,
    zero on spherical structures, and invariant under constant rescalings of
    the contact form (the lambda^-2 scaling of Q cancels the lambda^2 of V).
    """
    Q = cartan_tensor(s).as_complex()
    pairing = (Q * np.conj(complex(E))).real
    return -(3.0 / (8.0 * PI2)) * pairing * s.total_volume


def nu_from_filling(char_integral: float, chi: int, tau: int) -> float:
    """Boundary invariant from the renormalized bulk integral: I - chi + 3 tau."""
    return char_integral - chi + 3 * tau


def mu_from_nu(nu: float) -> float:
    """The classical boundary invariant normalization: nu = 3 mu + 2."""
    return (nu - 2.0) / 3.0
