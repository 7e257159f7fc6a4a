"""Exterior algebra on the collar with FormalSeries coefficients.

Forms are expanded in the coframe basis (dr, eta, theta1, theta1b), indexed
0..3, with series coefficients in q = exp(-r/2); vectors in the dual frame
(d/dr, T, Z1, Z1b).  The exterior derivative uses d(series) = series' dr plus
the boundary structure constants, so d is exact on retained orders.

The holomorphic coframe of a filling complex structure deformed by the
horizontal series p (phi(Z1b) = p Z1) is

    v0 = exp(-r) dr + i eta,        v1 = theta1 - p theta1b,

together with the conjugates.  Type projections expand forms in this basis;
the almost complex structure acts on vectors by J d/dr = exp(-r) T and the
standard deformation formulas on the horizontal frame.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import IncompatibleShape
from .series import FormalSeries
from .structures import PseudohermitianStructure

# basis tags
DR, ETA, T1, T1B = 0, 1, 2, 3


def _merge(I: tuple, J: tuple):
    """Sorted merge of disjoint index tuples with permutation sign."""
    merged = I + J
    if len(set(merged)) != len(merged):
        return None, 0
    perm = sorted(range(len(merged)), key=lambda t: merged[t])
    sign = 1
    seen = list(perm)
    # count inversions
    inv = sum(
        1
        for a in range(len(seen))
        for b in range(a + 1, len(seen))
        if seen[a] > seen[b]
    )
    sign = -1 if inv % 2 else 1
    return tuple(sorted(merged)), sign


class CollarForm:
    """Differential form on the collar with series coefficients."""

    def __init__(self, degree: int, components: dict | None = None):
        self.degree = degree
        self.components: dict = {}
        if components:
            for I, u in components.items():
                self._add(tuple(I), u)

    def _add(self, I: tuple, u: FormalSeries):
        if len(I) != self.degree:
            raise IncompatibleShape("component index does not match form degree")
        if u.is_zero:
            return
        if I in self.components:
            s = self.components[I] + u
            if s.is_zero:
                del self.components[I]
            else:
                self.components[I] = s
        else:
            self.components[I] = u

    @staticmethod
    def zero(degree: int) -> "CollarForm":
        return CollarForm(degree)

    @staticmethod
    def scalar(u: FormalSeries) -> "CollarForm":
        return CollarForm(0, {(): u})

    def get(self, I: tuple) -> FormalSeries:
        return self.components.get(tuple(I), FormalSeries.zero())

    def __add__(self, other: "CollarForm") -> "CollarForm":
        if self.degree != other.degree:
            raise IncompatibleShape("cannot add forms of different degree")
        out = CollarForm(self.degree, dict(self.components))
        for I, u in other.components.items():
            out._add(I, u)
        return out

    def __sub__(self, other: "CollarForm") -> "CollarForm":
        return self + other.scale(-1.0)

    def scale(self, c) -> "CollarForm":
        return CollarForm(
            self.degree, {I: u * c for I, u in self.components.items()}
        )

    def wedge(self, other: "CollarForm") -> "CollarForm":
        out = CollarForm(self.degree + other.degree)
        for I, u in self.components.items():
            for J, v in other.components.items():
                K, sign = _merge(I, J)
                if sign:
                    out._add(K, u * v * sign)
        return out

    def conj(self) -> "CollarForm":
        """Complex conjugate; swaps theta1 <-> theta1b with re-sorting sign."""
        swap = {DR: DR, ETA: ETA, T1: T1B, T1B: T1}
        out = CollarForm(self.degree)
        for I, u in self.components.items():
            J = tuple(swap[i] for i in I)
            K, sign = _merge(J, ())
            out._add(K, u.conj() * sign)
        return out

    def linf(self) -> float:
        return max((u.linf() for u in self.components.values()), default=0.0)

    def linf_below(self, k: int) -> float:
        return max((u.linf_below(k) for u in self.components.values()), default=0.0)

    def leading_exponent(self, tol: float = 0.0):
        leads = [u.leading_exponent(tol) for u in self.components.values()]
        leads = [l for l in leads if l is not None]
        return min(leads) if leads else None

    def imag_residual(self) -> float:
        """How far the form is from being real: |form - conj(form)|."""
        return (self - self.conj()).linf()

    def evaluate(self, vectors):
        """Pair a p-form with p vectors (components over the dual frame)."""
        vecs = [np.asarray(v) for v in vectors]
        if len(vecs) != self.degree:
            raise IncompatibleShape("wrong number of vectors")
        total = FormalSeries.zero()
        for I, u in self.components.items():
            acc = FormalSeries.zero()
            for perm in itertools.permutations(range(self.degree)):
                sign = _perm_sign(perm)
                term = u
                ok = True
                for slot, idx in enumerate(I):
                    comp = vecs[perm[slot]][idx]
                    if isinstance(comp, FormalSeries):
                        term = term * comp
                    else:
                        if comp == 0:
                            ok = False
                            break
                        term = term * complex(comp)
                if ok:
                    acc = acc + term * sign
            total = total + acc
        return total

    def __repr__(self):
        names = {0: "dr", 1: "eta", 2: "t1", 3: "t1b"}
        parts = [
            "^".join(names[i] for i in I) + f": {u!r}"
            for I, u in sorted(self.components.items())
        ]
        return f"CollarForm(deg={self.degree}; " + "; ".join(parts) + ")"


def _perm_sign(perm) -> int:
    inv = sum(
        1
        for a in range(len(perm))
        for b in range(a + 1, len(perm))
        if perm[a] > perm[b]
    )
    return -1 if inv % 2 else 1


class CollarAlgebra:
    """Exterior derivative and type decomposition over one structure.

    The horizontal deformation series p (default zero) fixes the complex
    structure used for type projections and the J-action on vectors.
    """

    def __init__(self, s: PseudohermitianStructure, p: FormalSeries | None = None):
        self.s = s
        self.p = p if p is not None else FormalSeries.zero()
        ce1, ce1b, c11b = s.coframe_d.d_theta1
        self._dbasis = {
            DR: CollarForm.zero(2),
            ETA: CollarForm(2, {(T1, T1B): FormalSeries.const(1j)}),
            T1: CollarForm(
                2,
                {
                    (ETA, T1): FormalSeries.const(ce1),
                    (ETA, T1B): FormalSeries.const(ce1b),
                    (T1, T1B): FormalSeries.const(c11b),
                },
            ),
        }
        self._dbasis[T1B] = self._dbasis[T1].conj()

    # -- exterior derivative ----------------------------------------------------

    def d(self, form: CollarForm) -> CollarForm:
        out = CollarForm(form.degree + 1)
        for I, u in form.components.items():
            du = u.d_dr()
            if not du.is_zero and DR not in I:
                K, sign = _merge((DR,), I)
                if sign:
                    out._add(K, du * sign)
            for t, idx in enumerate(I):
                dbase = self._dbasis[idx]
                if not dbase.components:
                    continue
                sign_t = -1 if t % 2 else 1
                rest = I[:t] + I[t + 1 :]
                for J, v in dbase.components.items():
                    K, sign = _merge(J, rest)
                    if sign:
                        out._add(K, u * v * (sign * sign_t))
        return out

    # -- holomorphic coframe and type decomposition -------------------------------

    def theta_basis(self):
        """Rows: (v0, v0b, v1, v1b) in the (dr, eta, theta1, theta1b) basis."""
        one = FormalSeries.const(1.0)
        i_ = FormalSeries.const(1j)
        q2 = FormalSeries.term(1.0, 2)
        Z = FormalSeries.zero()
        p = self.p
        return [
            [q2, i_, Z, Z],
            [q2, -1 * i_, Z, Z],
            [Z, Z, one, -1 * p],
            [Z, Z, -1 * p.conj(), one],
        ]

    def coframe_in_theta(self):
        """Rows: (dr, eta, theta1, theta1b) in the (v0, v0b, v1, v1b) basis."""
        half = FormalSeries.const(0.5)
        qm2 = FormalSeries.term(0.5, -2)
        Z = FormalSeries.zero()
        p = self.p
        pb = p.conj()
        det = (FormalSeries.const(1.0) - p * pb).inverse()
        return [
            [qm2, qm2, Z, Z],
            [half * FormalSeries.const(-1j), half * FormalSeries.const(1j), Z, Z],
            [Z, Z, det, p * det],
            [Z, Z, pb * det, det],
        ]

    def oneform_type_split(self, form: CollarForm):
        """Split a 1-form into (1,0) and (0,1) parts (in the coframe basis)."""
        C = self.coframe_in_theta()
        comps = [form.get((i,)) for i in range(4)]
        theta_comps = [FormalSeries.zero() for _ in range(4)]
        for i in range(4):
            if comps[i].is_zero:
                continue
            for A in range(4):
                theta_comps[A] = theta_comps[A] + comps[i] * C[i][A]
        B = self.theta_basis()

        def rebuild(indices):
            out = CollarForm(1)
            for A in indices:
                for i in range(4):
                    out._add((i,), theta_comps[A] * B[A][i])
            return out

        return rebuild((0, 2)), rebuild((1, 3))  # (1,0) on (v0, v1); (0,1) on (v0b, v1b)

    def twoform_type_components(self, form: CollarForm):
        """Components of a 2-form in the v_A ^ v_B basis, keyed by (A, B), A < B.

        Basis order (v0, v0b, v1, v1b): (2,0) parts sit at (0,2), (0,2) parts
        at (1,3), and the (1,1) parts at the remaining four pairs.
        """
        C = self.coframe_in_theta()
        out = {}
        for (i, j), u in form.components.items():
            for A in range(4):
                for Bi in range(4):
                    if A >= Bi:
                        continue
                    coef = C[i][A] * C[j][Bi] - C[i][Bi] * C[j][A]
                    if coef.is_zero:
                        continue
                    out[(A, Bi)] = out.get((A, Bi), FormalSeries.zero()) + u * coef
        return out

    def dbar_scalar(self, radial_part: FormalSeries, linear_coeff: float = 0.0) -> CollarForm:
        """(0,1) part of d(u) for u = linear_coeff * r + radial series."""
        du = radial_part.d_dr() + FormalSeries.const(linear_coeff)
        _, dbar = self.oneform_type_split(CollarForm(1, {(DR,): du}))
        return dbar

    # -- almost complex structure on vectors ---------------------------------------

    def j_matrix(self):
        """J in the frame (d/dr, T, Z1, Z1b): columns are images of frame vectors."""
        p = self.p
        pb = p.conj()
        det = (FormalSeries.const(1.0) - p * pb).inverse()
        a = FormalSeries.const(1j) * (FormalSeries.const(1.0) + p * pb) * det
        b = FormalSeries.const(2j) * pb * det
        Z = FormalSeries.zero()
        q2 = FormalSeries.term(1.0, 2)
        qm2 = FormalSeries.term(-1.0, -2)
        # columns: J(d/dr) = e^{-r} T; J(T) = -e^{r} d/dr; J(Z1) = a Z1 + b Z1b; conj
        return [
            [Z, qm2, Z, Z],
            [q2, Z, Z, Z],
            [Z, Z, a, b.conj()],
            [Z, Z, b, a.conj()],
        ]

    def j_squared_residual(self) -> float:
        J = self.j_matrix()
        worst = 0.0
        for i in range(4):
            for j in range(4):
                t = FormalSeries.zero()
                for k in range(4):
                    t = t + J[i][k] * J[k][j]
                if i == j:
                    t = t + 1.0
                worst = max(worst, t.linf())
        return worst
