"""Exact arithmetic of truncated formal power series in q = exp(-r/2).

All asymptotic objects in this library (metric coefficients, connection and
curvature entries, integrand densities) are truncated series in the single
grading variable q.  Integer powers of exp(-r) sit in the even q-slots and
half-integer orders in the odd slots, so one integer lattice carries every
order that occurs.  Negative exponents (volume growth such as exp(2r) = q^-4)
are allowed.

Order bookkeeping
-----------------
A series stores the window of coefficients [kmin, kmin+len) together with a
reliability cap: coefficients of q^k for k <= cap are exact, anything above
cap is unknown and silently discarded.  Ring operations propagate the cap
pessimistically (a product is reliable only where every contributing pair of
coefficients is), so truncation is tracked rather than extended.  Exactly
known inputs (constants, monomials, polynomials) carry cap = EXACT_CAP and do
not erode the cap of their cofactors.

Coefficients are double-precision complex scalars.  Matrices of series are
plain nested lists handled by the mat_* helpers at the bottom of the module.
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels
from .errors import (
    DivergentTail,
    EmptySeries,
    IncompatibleShape,
    NonPositiveSamples,
    NumericalFailure,
    SingularLeading,
)

#: Sentinel cap for exactly known series (constants, monomials, polynomials).
EXACT_CAP = 10**9

#: Default reliability cap: orders through q^12 = exp(-6r).
DEFAULT_CAP = 12


def _as_array(coeffs) -> np.ndarray:
    a = np.ascontiguousarray(coeffs, dtype=np.complex128)
    if a.ndim != 1:
        raise IncompatibleShape("series coefficients must form a 1-d array")
    return a


class FormalSeries:
    """Truncated formal power series in q = exp(-r/2) with complex coefficients."""

    __slots__ = ("kmin", "coeffs", "cap")

    def __init__(self, kmin: int, coeffs, cap: int = DEFAULT_CAP):
        a = _as_array(coeffs)
        # canonical form: strip exact zeros at both ends, clamp to cap
        nz = np.nonzero(a)[0]
        if nz.size == 0:
            self.kmin = 0
            self.coeffs = np.zeros(0, dtype=np.complex128)
        else:
            lo, hi = nz[0], nz[-1]
            kmin = kmin + int(lo)
            a = a[lo : hi + 1]
            if kmin > cap:
                a = a[:0]
                kmin = 0
            elif kmin + a.shape[0] - 1 > cap:
                a = a[: cap - kmin + 1]
            self.kmin = kmin
            self.coeffs = np.ascontiguousarray(a)
        self.cap = int(cap)

    # -- constructors ---------------------------------------------------------

    @staticmethod
    def zero(cap: int = EXACT_CAP) -> "FormalSeries":
        return FormalSeries(0, [], cap)

    @staticmethod
    def const(c, cap: int = EXACT_CAP) -> "FormalSeries":
        return FormalSeries(0, [c], cap)

    @staticmethod
    def term(c, k: int, cap: int = EXACT_CAP) -> "FormalSeries":
        """c * q^k."""
        return FormalSeries(k, [c], cap)

    @staticmethod
    def from_items(items, cap: int = DEFAULT_CAP) -> "FormalSeries":
        """Build from an iterable of (k, coefficient) pairs."""
        items = list(items)
        if not items:
            return FormalSeries.zero(cap)
        kmin = min(k for k, _ in items)
        kmax = max(k for k, _ in items)
        a = np.zeros(kmax - kmin + 1, dtype=np.complex128)
        for k, c in items:
            a[k - kmin] += c
        return FormalSeries(kmin, a, cap)

    # -- basic queries ----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.coeffs.shape[0] == 0

    def coeff(self, k: int) -> complex:
        """Coefficient of q^k (zero if outside the stored window but <= cap)."""
        if k > self.cap:
            raise EmptySeries(f"coefficient q^{k} beyond reliability cap {self.cap}")
        i = k - self.kmin
        if self.is_zero or i < 0 or i >= self.coeffs.shape[0]:
            return 0.0 + 0.0j
        return complex(self.coeffs[i])

    def leading_exponent(self, tol: float = 0.0):
        """Smallest k with |coefficient| > tol, or None for a (numerically) zero series."""
        if self.is_zero:
            return None
        idx = np.nonzero(np.abs(self.coeffs) > tol)[0]
        if idx.size == 0:
            return None
        return self.kmin + int(idx[0])

    def linf(self) -> float:
        return 0.0 if self.is_zero else float(np.max(np.abs(self.coeffs)))

    def linf_below(self, k: int) -> float:
        """Max |coefficient| over exponents < k (residual-order checks)."""
        if self.is_zero:
            return 0.0
        n = min(max(k - self.kmin, 0), self.coeffs.shape[0])
        return float(np.max(np.abs(self.coeffs[:n]))) if n else 0.0

    # -- ring operations --------------------------------------------------------

    def _promote(self, other):
        if isinstance(other, FormalSeries):
            return other
        if isinstance(other, (int, float, complex, np.complexfloating, np.floating, np.integer)):
            return FormalSeries.const(complex(other))
        return NotImplemented

    def __add__(self, other):
        o = self._promote(other)
        if o is NotImplemented:
            return o
        cap = min(self.cap, o.cap)
        if self.is_zero:
            return FormalSeries(o.kmin, o.coeffs, cap)
        if o.is_zero:
            return FormalSeries(self.kmin, self.coeffs, cap)
        kmin = min(self.kmin, o.kmin)
        kmax = max(self.kmin + self.coeffs.shape[0], o.kmin + o.coeffs.shape[0])
        a = np.zeros(kmax - kmin, dtype=np.complex128)
        a[self.kmin - kmin : self.kmin - kmin + self.coeffs.shape[0]] += self.coeffs
        a[o.kmin - kmin : o.kmin - kmin + o.coeffs.shape[0]] += o.coeffs
        return FormalSeries(kmin, a, cap)

    __radd__ = __add__

    def __neg__(self):
        return FormalSeries(self.kmin, -self.coeffs, self.cap)

    def __sub__(self, other):
        o = self._promote(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._promote(other)
        if o is NotImplemented:
            return o
        if self.is_zero or o.is_zero:
            return FormalSeries.zero(min(self.cap, o.cap))
        # reliable through min(cap_a + kmin_b, cap_b + kmin_a)
        cap = min(self.cap + o.kmin, o.cap + self.kmin, EXACT_CAP)
        kmin = self.kmin + o.kmin
        nout = min(cap - kmin + 1, self.coeffs.shape[0] + o.coeffs.shape[0] - 1)
        if nout <= 0:
            return FormalSeries.zero(cap)
        # monomial operands (very common: weights, brackets) are scaled shifts
        if self.coeffs.shape[0] == 1:
            return FormalSeries(kmin, (self.coeffs[0] * o.coeffs)[:nout], cap)
        if o.coeffs.shape[0] == 1:
            return FormalSeries(kmin, (o.coeffs[0] * self.coeffs)[:nout], cap)
        # SIMD convolution wins on long operands; the compiled kernel on short
        if min(self.coeffs.shape[0], o.coeffs.shape[0]) >= 24:
            full = np.convolve(self.coeffs, o.coeffs)
            return FormalSeries(kmin, full[:nout], cap)
        return FormalSeries(kmin, _kernels.conv(self.coeffs, o.coeffs, nout), cap)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._promote(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def shift(self, j: int) -> "FormalSeries":
        """Multiply by the exact monomial q^j."""
        cap = self.cap if self.cap >= EXACT_CAP else self.cap + j
        return FormalSeries(self.kmin + j, self.coeffs, cap)

    def truncate(self, cap: int) -> "FormalSeries":
        return FormalSeries(self.kmin, self.coeffs, min(self.cap, cap))

    def clean(self, eps: float = 1e-13) -> "FormalSeries":
        """Drop coefficients with |c| <= eps (cancellation dust).

        Long chains of exactly-cancelling products leave O(1e-16) residue in
        coefficients that are zero in exact arithmetic; growth weights such as
        e^{2r} then amplify the dust.  Only use where coefficients of genuine
        signals are far above eps.
        """
        if self.is_zero:
            return self
        a = np.where(np.abs(self.coeffs) <= eps, 0.0, self.coeffs)
        return FormalSeries(self.kmin, a, self.cap)

    def inverse(self) -> "FormalSeries":
        """Multiplicative inverse; leading coefficient must be nonzero."""
        if self.is_zero:
            raise SingularLeading("cannot invert the zero series")
        f0 = self.coeffs[0]
        if abs(f0) < 1e-300:
            raise SingularLeading("leading coefficient too small to invert")
        k = self.kmin
        if self.cap >= EXACT_CAP:
            # the inverse of an exact polynomial is generally not exact:
            # compute a default-length window and cap it there
            nout = max(DEFAULT_CAP + 1, self.coeffs.shape[0])
            cap = -k + nout - 1
        else:
            cap = self.cap - 2 * k
            nout = max(cap + k + 1, 1)
        return FormalSeries(-k, _kernels.inv_unit(self.coeffs, nout), cap)

    def sqrt(self) -> "FormalSeries":
        """Series square root; needs an even leading exponent and nonzero lead."""
        if self.is_zero:
            return FormalSeries.zero(self.cap)
        if abs(self.coeffs[0]) < 1e-300:
            raise SingularLeading("sqrt needs a nonzero leading coefficient")
        if self.kmin % 2:
            raise SingularLeading("sqrt needs an even leading exponent")
        m = self.kmin // 2
        if self.cap >= EXACT_CAP:
            rel = max(DEFAULT_CAP + 1, self.coeffs.shape[0])
            cap = m + rel - 1
        else:
            cap = self.cap - m
            rel = max(cap - m + 1, 1)
        return FormalSeries(m, _kernels.sqrt_unit(self.coeffs, rel), cap)

    # -- calculus ----------------------------------------------------------------

    def d_dr(self) -> "FormalSeries":
        """d/dr, using d/dr q^k = -(k/2) q^k."""
        if self.is_zero:
            return self
        ks = np.arange(self.kmin, self.kmin + self.coeffs.shape[0])
        return FormalSeries(self.kmin, self.coeffs * (-ks / 2.0), self.cap)

    def primitive(self):
        """Exact termwise primitive.

        Returns (series, c0): the q-series part (int q^k dr = -(2/k) q^k for
        k != 0) plus the coefficient c0 of the r-linear part contributed by a
        constant term.
        """
        if self.is_zero:
            return self, 0.0 + 0.0j
        ks = np.arange(self.kmin, self.kmin + self.coeffs.shape[0])
        c0 = self.coeff(0) if self.kmin <= 0 <= self.kmin + self.coeffs.shape[0] - 1 else 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            prim = np.where(ks != 0, self.coeffs * (-2.0 / np.where(ks == 0, 1, ks)), 0.0)
        return FormalSeries(self.kmin, prim, self.cap), complex(c0)

    def conj(self) -> "FormalSeries":
        return FormalSeries(self.kmin, np.conj(self.coeffs), self.cap)

    def real(self) -> "FormalSeries":
        return FormalSeries(self.kmin, self.coeffs.real.astype(np.complex128), self.cap)

    def imag_linf(self) -> float:
        return 0.0 if self.is_zero else float(np.max(np.abs(self.coeffs.imag)))

    def evaluate(self, r: float) -> complex:
        """Numerical value: sum of coeff_k * exp(-k r / 2) over retained orders."""
        if self.is_zero:
            return 0.0 + 0.0j
        ks = np.arange(self.kmin, self.kmin + self.coeffs.shape[0])
        return complex(np.dot(self.coeffs, np.exp(-ks * r / 2.0)))

    def evaluate_real(self, r: float, tol: float = 1e-9) -> float:
        v = self.evaluate(r)
        scale = max(1.0, abs(v))
        if abs(v.imag) > tol * scale:
            raise NumericalFailure(f"series expected real at r={r}, got {v}")
        return v.real

    # -- io -----------------------------------------------------------------------

    def dump(self) -> str:
        """Debug dump, one line per retained coefficient: 'q^k: <re> <im>'."""
        lines = []
        for i, c in enumerate(self.coeffs):
            lines.append(f"q^{self.kmin + i}: {c.real:.17g} {c.imag:.17g}")
        return "\n".join(lines)

    def items(self):
        for i, c in enumerate(self.coeffs):
            yield self.kmin + i, complex(c)

    def __repr__(self):
        if self.is_zero:
            return f"FormalSeries(0; cap={self.cap})"
        terms = ", ".join(f"q^{k}:{c:.6g}" for k, c in list(self.items())[:6])
        more = ", ..." if self.coeffs.shape[0] > 6 else ""
        return f"FormalSeries({terms}{more}; cap={self.cap})"


# -- scalar helpers ------------------------------------------------------------


def radial_antiderivative(f: FormalSeries, from_r: float, to_r: float) -> float:
    """Exact integral of a real series over [from_r, to_r]; to_r may be inf.

    Termwise: int q^k dr = -(2/k) q^k for k != 0, r * c for the constant term.
    An infinite upper limit requires every retained exponent to be positive.
    """
    prim, c0 = f.primitive()
    if math.isinf(to_r):
        lead = f.leading_exponent(tol=0.0)
        if abs(c0) > 0 or (lead is not None and lead < 0):
            raise DivergentTail("integrand has a constant or growing term at to_r = inf")
        upper = 0.0 + 0.0j
    else:
        upper = prim.evaluate(to_r) + c0 * to_r
    lower = prim.evaluate(from_r) + c0 * from_r
    val = upper - lower
    if abs(val.imag) > 1e-9 * max(1.0, abs(val)):
        raise NumericalFailure("integral of a non-real series requested as real")
    return val.real


def decay_fit(samples):
    """Least-squares fit of log|v| against r: v ~ c * exp(-alpha * r).

    Returns (alpha, c). Requires >= 4 samples with strictly positive values.
    """
    samples = list(samples)
    if len(samples) < 4:
        raise NumericalFailure("decay_fit needs at least 4 samples")
    rs = np.array([float(r) for r, _ in samples])
    vs = np.array([float(v) for _, v in samples])
    if np.any(vs <= 0.0):
        raise NonPositiveSamples("decay_fit needs strictly positive sample values")
    slope, intercept = np.polyfit(rs, np.log(vs), 1)
    return float(-slope), float(np.exp(intercept))


# -- matrices of series ----------------------------------------------------------
#
# Nested-list matrices with FormalSeries entries. Sizes are tiny (<= 6x6), so
# plain loops are fine; only the order-by-order inverse uses dense ndarrays.


def mat_zero(n: int, m: int):
    return [[FormalSeries.zero() for _ in range(m)] for _ in range(n)]


def mat_transpose(A):
    return [list(row) for row in zip(*A)]


def mat_mul(A, B):
    n, k, m = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            s = FormalSeries.zero()
            for l in range(k):
                s = s + A[i][l] * B[l][j]
            row.append(s)
        out.append(row)
    return out


def mat_linf(A) -> float:
    return max(e.linf() for row in A for e in row)


def _mat_window(A):
    """Common cap and the dense coefficient tensor of a kmin>=0 matrix."""
    n = len(A)
    cap = min(min(e.cap for e in row) for row in A)
    if cap >= EXACT_CAP:
        cap = max(
            max((e.kmin + e.coeffs.shape[0] - 1) if not e.is_zero else 0 for e in row)
            for row in A
        )
    K = cap + 1
    T = np.zeros((K, n, n), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            e = A[i][j]
            if e.is_zero:
                continue
            if e.kmin < 0:
                raise SingularLeading("matrix inverse requires entries with kmin >= 0")
            hi = min(e.kmin + e.coeffs.shape[0], K)
            if hi > e.kmin:
                T[e.kmin : hi, i, j] = e.coeffs[: hi - e.kmin]
    return cap, T


def mat_inverse(A):
    """Order-by-order inverse of a series matrix with invertible q^0 term."""
    n = len(A)
    cap, T = _mat_window(A)
    K = cap + 1
    try:
        X0 = np.linalg.inv(T[0])
    except np.linalg.LinAlgError as exc:
        raise SingularLeading("matrix leading term is singular") from exc
    X = np.zeros_like(T)
    X[0] = X0
    for k in range(1, K):
        S = np.zeros((n, n), dtype=np.complex128)
        for j in range(1, k + 1):
            S += T[j] @ X[k - j]
        X[k] = -X0 @ S
    return [[FormalSeries(0, X[:, i, j], cap) for j in range(n)] for i in range(n)]


def mat_cholesky_lower(G):
    """Series Cholesky G = L L^T for a symmetric matrix with SPD leading term.

    Row order is the Gram-Schmidt order of the frame (first row first).
    """
    n = len(G)
    L = [[FormalSeries.zero() for _ in range(n)] for _ in range(n)]
    for i in range(n):
        acc = G[i][i]
        for m in range(i):
            acc = acc - L[i][m] * L[i][m]
        L[i][i] = acc.sqrt()
        dinv = L[i][i].inverse()
        for j in range(i + 1, n):
            s = G[j][i]
            for m in range(i):
                s = s - L[j][m] * L[i][m]
            L[j][i] = s * dinv
    return L


def mat_lower_inverse(L):
    """Inverse of a lower-triangular series matrix (forward substitution)."""
    n = len(L)
    A = [[FormalSeries.zero() for _ in range(n)] for _ in range(n)]
    for i in range(n):
        A[i][i] = L[i][i].inverse()
    for i in range(n):
        dinv = A[i][i]
        for j in range(i - 1, -1, -1):
            s = FormalSeries.zero()
            for m in range(j, i):
                s = s + L[i][m] * A[m][j]
            A[i][j] = -s * dinv
    return A
