"""Rational functions and differentials on the Riemann sphere, with Laurent expansions.

Everything is double-precision complex.  A :class:`RationalFunction` carries a
tensor weight: 0 for functions, 1 for coefficients of ``dz``, 2 for coefficients
of ``dz**2``.  The weight decides how the object transforms under a change of
chart, most importantly ``z = 1/w`` at infinity, where ``dz = -dw/w**2``.

Zero tests use ``EPS_ZERO`` relative to the largest coefficient involved.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Number

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import (
    ConstantFunction,
    DivisionByZeroFunction,
    MultivaluedEntry,
    WeightMismatch,
    ZeroFunction,
)

EPS_ZERO = 1e-9
# Terms this small relative to the operands are treated as cancellation noise.
_CANCEL = 1e-12
_CLUSTER = 1e-2
# Local series switch to exact arithmetic when the rounding error of a
# coefficient could exceed this fraction of max(1, |coefficient|).
_ROUNDING = 2.0 ** -52
_EXACT_TRIGGER = 1e-13


class _Infinity:
    """The point at infinity of the Riemann sphere (singleton)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


def is_inf(p) -> bool:
    return p is INF


def same_point(p, q, tol: float = 1e-9) -> bool:
    if is_inf(p) or is_inf(q):
        return is_inf(p) and is_inf(q)
    return abs(complex(p) - complex(q)) <= tol * (1.0 + abs(complex(q)))


def mobius_apply(M, p):
    """Apply the Moebius map of the 2x2 matrix ``M`` to a point of the sphere."""
    a, b, c, d = (complex(x) for x in np.asarray(M).ravel())
    if is_inf(p):
        return INF if c == 0 else a / c
    den = c * p + d
    if den == 0:
        return INF
    return (a * p + b) / den


def _clean(arr: np.ndarray, scale: float) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    if scale > 0:
        arr[np.abs(arr) <= _CANCEL * scale] = 0
    return arr


@dataclass(frozen=True)
class Polynomial:
    """Polynomial with complex coefficients in ascending degree."""

    coeffs: tuple

    def __post_init__(self):
        c = [complex(x) for x in self.coeffs]
        while c and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c) if c else (0j,))

    @classmethod
    def const(cls, c) -> "Polynomial":
        return cls((c,))

    @classmethod
    def identity(cls) -> "Polynomial":
        return cls((0, 1))

    @classmethod
    def from_roots(cls, roots, lead=1.0) -> "Polynomial":
        return cls(tuple(lead * npoly.polyfromroots(list(roots)))) if len(roots) else cls((lead,))

    @property
    def arr(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=complex)

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return -1 if self.is_zero else len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.arr)))

    def __call__(self, z):
        return npoly.polyval(z, self.arr)

    def __add__(self, other):
        return Polynomial(tuple(npoly.polyadd(self.arr, _as_poly(other).arr)))

    def __sub__(self, other):
        return Polynomial(tuple(npoly.polysub(self.arr, _as_poly(other).arr)))

    def __mul__(self, other):
        if isinstance(other, Number):
            return Polynomial(tuple(self.arr * other))
        return Polynomial(tuple(npoly.polymul(self.arr, _as_poly(other).arr)))

    __rmul__ = __mul__

    def __neg__(self):
        return Polynomial(tuple(-self.arr))

    def deriv(self) -> "Polynomial":
        if self.degree <= 0:
            return Polynomial((0,))
        return Polynomial(tuple(npoly.polyder(self.arr)))

    def taylor(self, p) -> np.ndarray:
        """Coefficients of ``t -> self(p + t)``."""
        p = complex(p)
        if p == 0:
            return self.arr
        out = np.zeros(1, dtype=complex)
        for a in reversed(self.coeffs):
            out = npoly.polymul(out, [p, 1.0])
            out[0] += a
        return np.array(out, dtype=complex)

    def deflate(self, c) -> "Polynomial":
        """Quotient of synthetic division by ``z - c``; the remainder is dropped."""
        n = self.degree
        if n <= 0:
            return self
        b = [0j] * n
        acc = 0j
        for i in range(n, 0, -1):
            acc = acc * c + self.coeffs[i]
            b[i - 1] = acc
        return Polynomial(tuple(b))

    def order_at(self, c, tol: float = EPS_ZERO) -> int:
        """Vanishing order at ``c`` judged with relative tolerance ``tol``."""
        if self.is_zero:
            raise ZeroFunction("zero polynomial has no order")
        t = self.taylor(c)
        scale = np.max(np.abs(t))
        k = 0
        while k < len(t) - 1 and abs(t[k]) <= tol * scale:
            k += 1
        return k

    def roots(self) -> np.ndarray:
        if self.degree <= 0:
            return np.zeros(0, dtype=complex)
        return np.roots(self.arr[::-1])


def _as_poly(x) -> Polynomial:
    if isinstance(x, Polynomial):
        return x
    return Polynomial.const(x)


_ROOT_TOL = 1e-9


def _key_match(a: complex, b: complex) -> bool:
    return abs(a - b) <= _ROOT_TOL * (1.0 + abs(b))


def _merge(pairs) -> tuple:
    """Combine (root, multiplicity) pairs whose roots agree within tolerance."""
    keys: list[complex] = []
    mults: list[int] = []
    for a, m in pairs:
        a = complex(a)
        for i, k in enumerate(keys):
            if _key_match(a, k):
                mults[i] += m
                break
        else:
            keys.append(a)
            mults.append(int(m))
    out = [(k, m) for k, m in zip(keys, mults) if m != 0]
    out.sort(key=lambda km: (km[0].real, km[0].imag))
    return tuple(out)


def _root_clusters(roots) -> list[list[complex]]:
    """Group numerically scattered copies of multiple roots."""
    clusters: list[list[complex]] = []
    for r in sorted(roots, key=lambda x: (x.real, x.imag)):
        for cl in clusters:
            c = sum(cl) / len(cl)
            if abs(r - c) <= _CLUSTER * max(1.0, abs(c)):
                cl.append(r)
                break
        else:
            clusters.append([r])
    return clusters


def _refine_multiple_root(poly: Polynomial, c: complex, k: int, spread: float) -> complex:
    """Polish a cluster centroid as a simple root of the (k-1)-th derivative."""
    d = poly
    for _ in range(k - 1):
        d = d.deriv()
    dd = d.deriv()
    x = c
    for _ in range(10):
        fp = dd(x)
        if fp == 0:
            break
        step = d(x) / fp
        x -= step
        if abs(step) <= 1e-16 * (1.0 + abs(x)):
            break
    return complex(x) if abs(x - c) <= 2 * spread + 1e-12 else c


def _polish_simple_root(poly: Polynomial, r: complex) -> complex:
    """A few Newton steps on ``poly``; kept only if the residual shrinks."""
    d = poly.deriv()
    x, best = r, abs(poly(r))
    for _ in range(3):
        fp = d(x)
        if fp == 0:
            break
        y = x - poly(x) / fp
        val = abs(poly(y))
        if val >= best:
            break
        x, best = y, val
    return complex(x)


def _factor(poly: Polynomial, known=()) -> tuple[complex, list]:
    """Split ``poly`` into leading coefficient and (root, multiplicity) pairs.

    Roots at the ``known`` points are removed by exact deflation first, so that
    cancellation against existing factors does not depend on root-finding.
    """
    pairs = []
    for a in known:
        if poly.degree <= 0:
            break
        k = poly.order_at(a)
        for _ in range(k):
            poly = poly.deflate(a)
        if k:
            pairs.append((a, k))
    if poly.degree > 0:
        for cl in _root_clusters(list(poly.roots())):
            center = complex(sum(cl) / len(cl))
            if len(cl) > 1:
                spread = max(abs(r - center) for r in cl)
                center = _refine_multiple_root(poly, center, len(cl), spread)
            if len(cl) == 1:
                pairs.append((_polish_simple_root(poly, center), 1))
            elif poly.order_at(center) >= len(cl):
                pairs.append((center, len(cl)))
            else:
                pairs.extend((_polish_simple_root(poly, complex(r)), 1) for r in cl)
    return poly.coeffs[-1], pairs


def _expand(c: complex, pairs) -> Polynomial:
    out = np.array([c], dtype=complex)
    for a, m in pairs:
        for _ in range(m):
            out = npoly.polymul(out, [-a, 1.0])
    return Polynomial(tuple(out))


class RationalFunction:
    """Rational function ``c * prod (z - a)**m`` of tensor weight ``weight``.

    The factored form is canonical: roots closer than a relative 1e-9 are one
    root, so numerator and denominator never share a root.  ``num`` and ``den``
    give the expanded polynomials with ``den`` monic.
    """

    __slots__ = ("const_factor", "factors", "weight")

    def __init__(self, num=None, den=None, weight: int = 0, *, const_factor=None, factors=None):
        if const_factor is not None:
            c = complex(const_factor)
            pairs = _merge(factors or ())
        else:
            num = _as_poly(num if num is not None else 0)
            den = _as_poly(den if den is not None else 1)
            if den.is_zero:
                raise DivisionByZeroFunction("denominator is identically zero")
            if num.is_zero:
                c, pairs = 0j, ()
            else:
                cn, pn = _factor(num)
                cd, pd = _factor(den)
                c = cn / cd
                pairs = _merge(list(pn) + [(a, -m) for a, m in pd])
        if c == 0:
            pairs = ()
        object.__setattr__(self, "const_factor", c)
        object.__setattr__(self, "factors", pairs)
        object.__setattr__(self, "weight", int(weight))

    def __setattr__(self, name, value):
        raise AttributeError("RationalFunction is immutable")

    def __reduce__(self):
        return (_rebuild, (self.const_factor, self.factors, self.weight))

    # -- constructors -------------------------------------------------
    @classmethod
    def _make(cls, c, pairs, weight) -> "RationalFunction":
        return cls(weight=weight, const_factor=c, factors=pairs)

    @classmethod
    def const(cls, c, weight: int = 0) -> "RationalFunction":
        return cls._make(c, (), weight)

    @classmethod
    def z(cls) -> "RationalFunction":
        return cls._make(1.0, ((0j, 1),), 0)

    @classmethod
    def from_coeffs(cls, num, den=(1,), weight: int = 0) -> "RationalFunction":
        return cls(Polynomial(tuple(num)), Polynomial(tuple(den)), weight)

    def with_weight(self, weight: int) -> "RationalFunction":
        return RationalFunction._make(self.const_factor, self.factors, weight)

    # -- views --------------------------------------------------------
    @property
    def num(self) -> Polynomial:
        return _expand(self.const_factor, [(a, m) for a, m in self.factors if m > 0])

    @property
    def den(self) -> Polynomial:
        return _expand(1.0, [(a, -m) for a, m in self.factors if m < 0])

    @property
    def is_zero(self) -> bool:
        return self.const_factor == 0

    @property
    def is_constant(self) -> bool:
        return not self.factors

    def __repr__(self):
        parts = [f"{self.const_factor:.6g}"]
        parts += [f"(z - {a:.6g})^{m}" for a, m in self.factors]
        return f"RationalFunction({' * '.join(parts)}, weight={self.weight})"

    # -- arithmetic ---------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, Number):
            return RationalFunction.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        # the zero function is zero in every weight
        if other.is_zero:
            return self
        if self.is_zero:
            return other
        if other.weight != self.weight:
            raise WeightMismatch(f"cannot add weights {self.weight} and {other.weight}")
        keys = [a for a, _ in _merge([(a, 1) for a, _ in self.factors + other.factors])]
        mf = _mult_table(self.factors, keys)
        mg = _mult_table(other.factors, keys)
        low = [min(x, y) for x, y in zip(mf, mg)]
        pf = _expand(self.const_factor, [(a, x - l) for a, x, l in zip(keys, mf, low)])
        pg = _expand(other.const_factor, [(a, y - l) for a, y, l in zip(keys, mg, low)])
        scale = max(pf.max_abs(), pg.max_abs())
        s = Polynomial(tuple(_clean(npoly.polyadd(pf.arr, pg.arr), scale)))
        if s.is_zero:
            return RationalFunction.const(0, self.weight)
        c, pairs = _factor(s, known=keys)
        pairs = list(pairs) + [(a, l) for a, l in zip(keys, low)]
        return RationalFunction._make(c, pairs, self.weight)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction._make(-self.const_factor, self.factors, self.weight)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return RationalFunction._make(self.const_factor * other.const_factor,
                                      self.factors + other.factors,
                                      self.weight + other.weight)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero:
            raise DivisionByZeroFunction("division by the zero function")
        return RationalFunction._make(self.const_factor / other.const_factor,
                                      self.factors + tuple((a, -m) for a, m in other.factors),
                                      self.weight - other.weight)

    def __rtruediv__(self, other):
        return RationalFunction.const(other) / self

    def __pow__(self, n: int):
        if n != int(n):
            raise ValueError("only integer powers of rational functions")
        n = int(n)
        if n < 0 and self.is_zero:
            raise DivisionByZeroFunction("negative power of the zero function")
        return RationalFunction._make(self.const_factor ** n,
                                      tuple((a, m * n) for a, m in self.factors),
                                      self.weight * n)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.full(z.shape, self.const_factor, dtype=complex)
        for a, m in self.factors:
            out = out * (z - a) ** m
        return out if out.shape else complex(out)

    # -- calculus -----------------------------------------------------
    def raw_derivative(self) -> "RationalFunction":
        """d/dz of the coefficient, ignoring the tensor weight."""
        if self.is_constant:
            return RationalFunction.const(0, self.weight + 1)
        keys = [a for a, _ in self.factors]
        terms = []
        for i, (a, m) in enumerate(self.factors):
            terms.append(m * _expand(1.0, [(b, 1) for j, b in enumerate(keys) if j != i]).arr)
        scale = max(np.max(np.abs(t)) for t in terms)
        total = np.zeros(1, dtype=complex)
        for t in terms:
            total = npoly.polyadd(total, t)
        bracket = Polynomial(tuple(_clean(total, scale)))
        if bracket.is_zero:
            return RationalFunction.const(0, self.weight + 1)
        c, pairs = _factor(bracket)
        pairs = list(pairs) + [(a, m - 1) for a, m in self.factors]
        return RationalFunction._make(self.const_factor * c, pairs, self.weight + 1)

    def derivative(self) -> "RationalFunction":
        return derivative(self)

    # -- local analysis -----------------------------------------------
    def _local_factors(self, p):
        """``(const, [(c0, c1, m)], e)``: the form is ``t**e * const * prod (c0 + c1 t)**m`` at ``p``."""
        if is_inf(p):
            total = sum(m for _, m in self.factors)
            lins = [(1.0, -r, m) for r, m in self.factors]
            return self.const_factor * (-1) ** self.weight, lins, -total - 2 * self.weight
        p = complex(p)
        lins, e = [], 0
        for r, m in self.factors:
            if _key_match(p, r) or _key_match(r, p):
                e += m
            else:
                lins.append((p - r, 1.0, m))
        return self.const_factor, lins, e

    def _local(self, p):
        """Local form ``t**e * A(t)/B(t)`` at ``p`` with ``A(0), B(0) != 0``."""
        const, lins, e = self._local_factors(p)
        a = np.array([const], dtype=complex)
        b = np.array([1.0], dtype=complex)
        for c0, c1, m in lins:
            for _ in range(abs(m)):
                if m > 0:
                    a = npoly.polymul(a, [c0, c1])
                else:
                    b = npoly.polymul(b, [c0, c1])
        return a, b, e

    def _local_series(self, p, n: int) -> tuple[np.ndarray, int]:
        """First ``n`` Taylor coefficients of ``A/B`` at ``p``, and the order ``e``.

        Far from the other singular points the coefficients can be tiny
        differences of huge terms.  A running bound on the term sizes detects
        this, and the series is then recomputed exactly from the same data.
        """
        const, lins, e = self._local_factors(p)
        a = np.array([const], dtype=complex)
        b = np.array([1.0], dtype=complex)
        a_abs = np.array([abs(const)])
        b_abs = np.array([1.0])
        for c0, c1, m in lins:
            for _ in range(abs(m)):
                if m > 0:
                    a = npoly.polymul(a, [c0, c1])
                    a_abs = npoly.polymul(a_abs, [abs(c0), abs(c1)])
                else:
                    b = npoly.polymul(b, [c0, c1])
                    b_abs = npoly.polymul(b_abs, [abs(c0), abs(c1)])
        if n <= 0:
            return np.zeros(0, dtype=complex), e
        out = _series_div(a, b, n)
        bound = _series_bound(a_abs, b_abs, n)
        if np.any(bound * _ROUNDING > _EXACT_TRIGGER * np.maximum(1.0, np.abs(out))):
            out = _exact_series(const, lins, n)
        return out, e

    def expand_at(self, p, window=None) -> "LaurentExpansion":
        return expand_at(self, p, window)

    def order_at(self, p) -> int:
        return order_at(self, p)

    def residue(self, p) -> complex:
        return residue(self, p)

    def in_chart(self, p, u):
        """Value of the local coefficient in the chart centred at ``p`` (``z = 1/u`` at infinity)."""
        u = np.asarray(u, dtype=complex)
        if is_inf(p):
            return self(1.0 / u) * (-1.0 / u**2) ** self.weight
        return self(complex(p) + u)

    def poles(self) -> list:
        """``(point, pole order)`` pairs over the sphere, INF last."""
        out = [(a, -m) for a, m in self.factors if m < 0]
        if not self.is_zero and self.order_at(INF) < 0:
            out.append((INF, -self.order_at(INF)))
        return out

    def zeros(self) -> list:
        out = [(a, m) for a, m in self.factors if m > 0]
        if not self.is_zero and self.order_at(INF) > 0:
            out.append((INF, self.order_at(INF)))
        return out

    # -- Moebius maps -------------------------------------------------
    def compose_mobius(self, M) -> "RationalFunction":
        """Post-compose a function with a Moebius map: ``sigma o f``."""
        if self.weight != 0:
            raise WeightMismatch("only functions can be post-composed")
        a, b, c, d = (complex(x) for x in np.asarray(M).ravel())
        return (self * a + b) / (self * c + d)

    def pullback(self, M) -> "RationalFunction":
        """Pull back by ``z = phi(u) = (a u + b)/(c u + d)``, including ``phi'**weight``."""
        a, b, c, d = (complex(x) for x in np.asarray(M).ravel())
        det = a * d - b * c
        if det == 0:
            raise ValueError("degenerate Moebius map")
        const = self.const_factor * det ** self.weight
        pairs = []
        total = 0
        for r, m in self.factors:
            lead = a - c * r
            rest = b - d * r
            total += m
            if abs(lead) <= _ROOT_TOL * (abs(a) + abs(c * r)):
                const *= rest ** m
            else:
                const *= lead ** m
                pairs.append((-rest / lead, m))
        # (c u + d) ** -(total + 2 weight)
        k = -(total + 2 * self.weight)
        if c == 0:
            const *= d ** k
        else:
            const *= c ** k
            pairs.append((-d / c, k))
        return RationalFunction._make(const, pairs, self.weight)


def _rebuild(c, pairs, weight):
    return RationalFunction._make(c, pairs, weight)


def _mult_table(pairs, keys) -> list[int]:
    out = [0] * len(keys)
    for a, m in pairs:
        for i, k in enumerate(keys):
            if _key_match(a, k):
                out[i] += m
                break
    return out



def _series_div(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(n, dtype=complex)
    a = np.concatenate([a, np.zeros(max(0, n - len(a)), dtype=complex)])
    b0 = b[0]
    for k in range(n):
        s = a[k]
        for j in range(1, min(k, len(b) - 1) + 1):
            s -= b[j] * out[k - j]
        out[k] = s / b0
    return out


def _series_bound(a_abs: np.ndarray, b_abs: np.ndarray, n: int) -> np.ndarray:
    """Size of the largest term entering each coefficient of ``_series_div``."""
    out = np.zeros(n)
    a_abs = np.concatenate([a_abs, np.zeros(max(0, n - len(a_abs)))])
    for k in range(n):
        s = a_abs[k]
        for j in range(1, min(k, len(b_abs) - 1) + 1):
            s += b_abs[j] * out[k - j]
        out[k] = s / b_abs[0]
    return out


# Exact fallback: complex rationals as (re, im) pairs of Fractions.  Every
# double is a dyadic rational, so the series of the stored data is exact.

def _q(x: complex) -> tuple:
    x = complex(x)
    return Fraction(x.real), Fraction(x.imag)


def _qmul(x, y):
    return x[0] * y[0] - x[1] * y[1], x[0] * y[1] + x[1] * y[0]


def _qpolymul(a: list, b: list) -> list:
    out = [(Fraction(0), Fraction(0))] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            t = _qmul(x, y)
            out[i + j] = (out[i + j][0] + t[0], out[i + j][1] + t[1])
    return out


def _exact_series(const, lins, n: int) -> np.ndarray:
    a, b = [_q(const)], [_q(1)]
    for c0, c1, m in lins:
        lin = [_q(c0), _q(c1)]
        for _ in range(abs(m)):
            if m > 0:
                a = _qpolymul(a, lin)
            else:
                b = _qpolymul(b, lin)
    a = a[:n] + [(Fraction(0), Fraction(0))] * max(0, n - len(a))
    re0, im0 = b[0]
    norm = re0 * re0 + im0 * im0
    inv0 = (re0 / norm, -im0 / norm)
    out = []
    for k in range(n):
        sr, si = a[k]
        for j in range(1, min(k, len(b) - 1) + 1):
            t = _qmul(b[j], out[k - j])
            sr, si = sr - t[0], si - t[1]
        out.append(_qmul((sr, si), inv0))
    return np.array([complex(float(r), float(i)) for r, i in out])


@dataclass(frozen=True)
class LaurentExpansion:
    """Coefficients ``c_n`` for ``n_min <= n <= n_max`` in the local chart at ``center``."""

    center: object
    n_min: int
    n_max: int
    coeffs: tuple
    weight: int
    truncated: bool

    def __getitem__(self, n: int) -> complex:
        if not self.n_min <= n <= self.n_max:
            raise IndexError(f"index {n} outside window [{self.n_min}, {self.n_max}]")
        return self.coeffs[n - self.n_min]

    @property
    def window(self) -> tuple:
        return (self.n_min, self.n_max)

    def leading_order(self):
        """First index with a non-negligible coefficient, or None."""
        scale = max((abs(c) for c in self.coeffs), default=0.0)
        for n, c in zip(range(self.n_min, self.n_max + 1), self.coeffs):
            if abs(c) > EPS_ZERO * scale:
                return n
        return None


# ---------------------------------------------------------------------------
# spec-level operations


def field_ops(a, b, op: str) -> RationalFunction:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def derivative(f):
    if f.weight != 0:
        raise WeightMismatch("only weight-0 functions are differentiated")
    return f.raw_derivative()


def expand_at(f: RationalFunction, p, window=None) -> LaurentExpansion:
    if f.is_zero:
        lo, hi = window if window is not None else (0, 8)
        return LaurentExpansion(p, lo, hi, (0j,) * (hi - lo + 1), f.weight, False)
    order = order_at(f, p)
    lo, hi = window if window is not None else (order - 1, order + 8)
    length = hi - order + 1
    series, _ = f._local_series(p, length)
    coeffs = []
    for n in range(lo, hi + 1):
        k = n - order
        coeffs.append(complex(series[k]) if 0 <= k < length else 0j)
    _, lins, _ = f._local_factors(p)
    degree = sum(m for _, _, m in lins if m > 0)
    terminates = all(m > 0 for _, _, m in lins) and order + degree <= hi
    return LaurentExpansion(p, lo, hi, tuple(coeffs), f.weight, not terminates)


def order_at(f: RationalFunction, p) -> int:
    if f.is_zero:
        raise ZeroFunction("the zero function has no order")
    return f._local_factors(p)[2]


def residue(form: RationalFunction, p) -> complex:
    if form.weight != 1:
        raise WeightMismatch(f"residues are taken of 1-forms, got weight {form.weight}")
    if form.is_zero:
        return 0j
    order = order_at(form, p)
    if order > -1:
        return 0j
    return complex(form._local_series(p, -order)[0][-1])


def schwarzian(f) -> RationalFunction:
    """Schwarzian derivative ``(f''/f')' - (f''/f')**2/2`` as a weight-2 rational form.

    With ``f' = c prod (z - a)**m`` the logarithmic derivative is
    ``sum m/(z - a)``, so the Schwarzian has the exact partial fractions
    ``sum c2/(z - a)**2 + c1/(z - a)``.  Coefficients that vanish (simple poles
    of ``f``, where the Schwarzian is regular) are dropped instead of being left
    to root-finding.
    """
    if f.weight != 0:
        raise WeightMismatch("the Schwarzian is defined for functions")
    f1 = f.raw_derivative()
    if f1.is_zero:
        raise ConstantFunction("Schwarzian of a constant")
    if isinstance(f1, PowerForm):
        pairs = list(f1.rational.factors)
        if f1.exponent != 0:
            pairs = _merge(pairs + [(0j, f1.exponent)])
    else:
        pairs = list(f1.factors)
    pairs = [(complex(a), m) for a, m in pairs if m != 0]
    out = RationalFunction.const(0, 2)
    scale = max([1.0] + [abs(m) for _, m in pairs])
    for i, (a, m) in enumerate(pairs):
        c2 = -m - m * m / 2
        c1 = -m * sum(mb / (a - b) for j, (b, mb) in enumerate(pairs) if j != i)
        near = min([abs(a - b) for j, (b, _) in enumerate(pairs) if j != i] + [1.0])
        if abs(c2) > EPS_ZERO * scale:
            out = out + RationalFunction._make(c2, [(a, -2)], 2)
        if abs(c1) > EPS_ZERO * scale * scale / near:
            out = out + RationalFunction._make(c1, [(a, -1)], 2)
    return out


# ---------------------------------------------------------------------------
# rational function times a real power of z


@dataclass(frozen=True, eq=False)
class PowerForm:
    """``rational(z) * z**exponent`` on the principal branch.

    Stands in for secondary Gauss maps such as ``z**mu`` with non-integer ``mu``.
    Only the integer-exponent case is single-valued around 0 and infinity.
    """

    rational: RationalFunction
    exponent: float

    @classmethod
    def monomial(cls, coeff, exponent, weight: int = 0) -> "PowerForm":
        return cls(RationalFunction.const(coeff, weight), float(exponent))

    @property
    def weight(self) -> int:
        return self.rational.weight

    @property
    def is_zero(self) -> bool:
        return self.rational.is_zero

    @property
    def is_single_valued(self) -> bool:
        return abs(self.exponent - round(self.exponent)) <= 1e-12

    def to_rational(self) -> RationalFunction:
        if not self.is_single_valued:
            raise MultivaluedEntry(f"z**{self.exponent:g} is not single-valued")
        n = int(round(self.exponent))
        zn = RationalFunction.z() ** n if n >= 0 else 1 / RationalFunction.z() ** (-n)
        return self.rational * zn

    def __repr__(self):
        return f"PowerForm({self.rational!r}, exponent={self.exponent:g})"

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return self.rational(z) * np.exp(self.exponent * np.log(z))

    def _coerce(self, other):
        if isinstance(other, PowerForm):
            return other
        if isinstance(other, (RationalFunction, Number)):
            return PowerForm(RationalFunction.const(1) * other, 0.0)
        return NotImplemented

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return _simplify(PowerForm(self.rational * other.rational, self.exponent + other.exponent))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return _simplify(PowerForm(self.rational / other.rational, self.exponent - other.exponent))

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __neg__(self):
        return PowerForm(-self.rational, self.exponent)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        diff = self.exponent - other.exponent
        if abs(diff - round(diff)) > 1e-12:
            raise MultivaluedEntry("cannot add powers of z whose exponents differ by a non-integer")
        shift = int(round(diff))
        z = RationalFunction.z()
        r = self.rational * (z ** shift if shift >= 0 else 1 / z ** (-shift))
        return _simplify(PowerForm(r + other.rational, other.exponent))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __pow__(self, n: int):
        return _simplify(PowerForm(self.rational ** n, self.exponent * n))

    def raw_derivative(self):
        z = RationalFunction.z()
        r = self.rational
        return _simplify(PowerForm(r.raw_derivative() + (r * self.exponent / z).with_weight(r.weight + 1),
                                   self.exponent))

    def derivative(self):
        if self.weight != 0:
            raise WeightMismatch("only weight-0 functions are differentiated")
        return self.raw_derivative()

    def with_weight(self, weight: int) -> "PowerForm":
        return PowerForm(self.rational.with_weight(weight), self.exponent)

    def residue(self, p) -> complex:
        return residue(self.to_rational(), p)

    def in_chart(self, p, u):
        return self.to_rational().in_chart(p, u)


def _simplify(f):
    if isinstance(f, PowerForm) and (f.is_single_valued or f.is_zero):
        return f.to_rational() if not f.is_zero else f.rational
    return f


def as_rational(f) -> RationalFunction:
    """Return ``f`` as a RationalFunction or raise MultivaluedEntry."""
    if isinstance(f, RationalFunction):
        return f
    return f.to_rational()
