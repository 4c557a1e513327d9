"""Analysis of a single end: regularity, Type I/II, normalization, multiplicity.

At an end ``p`` we work in the chart ``u`` with ``u = z - p`` (or ``u = 1/z`` at
infinity) and replace G by ``sigma o G`` for a Moebius ``sigma`` so that
``G(u) = u**l * Ghat(u)`` with ``l > 0`` and ``Ghat(0) != 0``.  Q is unchanged by
``sigma``; the dual form becomes ``omega_sharp(u) = u**k * what(u) du`` with
``what(u) = w0 + w1 u + w2 u**2 + ...``.  The multiplicity is ``m = -k - 1``.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .cmc import SurfaceData, dual_omega
from .errors import (
    DegenerateNormalization,
    InconsistentEndData,
    IrregularEnd,
    NotTypeII,
    UnknownEnd,
    UnsupportedMultiplicity,
)
from .series import EPS_ZERO, RationalFunction, expand_at, is_inf, order_at


class EndType(str, Enum):
    TYPE_I = "TypeI"
    TYPE_II = "TypeII"
    IRREGULAR = "Irregular"


def _is_zero(x: complex, scale: float = 1.0) -> bool:
    return abs(x) <= EPS_ZERO * max(1.0, scale)


def chart_at(p) -> np.ndarray:
    """Moebius matrix of ``z = phi(u)`` centring the chart at ``p``."""
    if is_inf(p):
        return np.array([[0, 1], [1, 0]], dtype=complex)
    return np.array([[1, complex(p)], [0, 1]], dtype=complex)


@dataclass(frozen=True)
class Normalization:
    """The Moebius map applied to G, as an SL(2,C) matrix.

    ``kind`` is ``identity`` (G(p) = 0), ``translation`` (G -> G - G(p)) or
    ``inversion`` (G -> 1/G when G(p) = inf).  The flux of the normalized data
    equals ``matrix @ Fl @ inv(matrix)``.
    """

    kind: str
    matrix: np.ndarray
    shift: complex = 0j

    def conjugate(self, flux: np.ndarray) -> np.ndarray:
        return self.matrix @ flux @ np.linalg.inv(self.matrix)


@dataclass(frozen=True, eq=False)
class NormalizedEnd:
    point: object
    G: RationalFunction
    omega: RationalFunction
    Q: RationalFunction
    normalization: Normalization


def normalize_at_end(data: SurfaceData, p) -> NormalizedEnd:
    chart = chart_at(p)
    G = data.G.pullback(chart)
    Q = data.Q.pullback(chart)
    order = order_at(G, 0)
    if order > 0:
        norm = Normalization("identity", np.eye(2, dtype=complex))
    elif order == 0:
        c = expand_at(G, 0, (0, 0))[0]
        norm = Normalization("translation", np.array([[1, -c], [0, 1]], dtype=complex), c)
    else:
        norm = Normalization("inversion", np.array([[0, 1j], [1j, 0]], dtype=complex))
    if norm.kind != "identity":
        G = G.compose_mobius(norm.matrix)
    return NormalizedEnd(p, G, dual_omega(Q, G), Q, norm)


def direct_w_coefficients(omega: RationalFunction, count: int = 3) -> tuple:
    """Leading Taylor coefficients of ``what`` read off the expansion of omega."""
    if omega.is_zero:
        raise DegenerateNormalization("the dual form vanishes identically")
    k = order_at(omega, 0)
    exp = expand_at(omega, 0, (k, k + count - 1))
    return tuple(exp[k + j] for j in range(count))


def w_coefficients(G: RationalFunction, omega: RationalFunction, Q: RationalFunction) -> tuple:
    """``(w0, w1, w2)`` at a normalized Type II end, cross-checked against Q.

    ``w0`` and ``w1`` are also recovered from the Hopf differential through
    ``Q = -omega_sharp dG``; disagreement beyond 1e-9 raises InconsistentEndData.
    """
    if omega.is_zero or Q.is_zero:
        raise DegenerateNormalization("the dual form vanishes identically")
    l = order_at(G, 0)
    if l <= 0:
        raise DegenerateNormalization(f"G is not normalized (order {l} at the end)")
    gexp = expand_at(G, 0, (l, l + 1))
    g0, g1 = gexp[l], gexp[l + 1]
    if _is_zero(g0):
        raise DegenerateNormalization("Ghat(0) vanishes")
    k = order_at(omega, 0)
    lo = min(-2, l + k - 1)
    qexp = expand_at(Q, 0, (lo, max(0, l + k)))
    scale = max(abs(c) for c in qexp.coeffs)
    if not _is_zero(qexp[-2], scale):
        raise NotTypeII(f"q_-2 = {qexp[-2]:.6g} is nonzero; the end is of Type I")
    w = direct_w_coefficients(omega)
    w0 = -qexp[l + k - 1] / (l * g0)
    w1 = -(qexp[l + k] + (l + 1) * w0 * g1) / (l * g0)
    for direct, recovered, name in ((w[0], w0, "w0"), (w[1], w1, "w1")):
        if abs(direct - recovered) > 1e-9 * max(1.0, abs(direct)):
            raise InconsistentEndData(
                f"{name} from the dual form ({direct:.6g}) disagrees with the Hopf differential ({recovered:.6g})")
    return w


@dataclass(frozen=True, eq=False)
class EndAnalysis:
    p: object
    regular: bool
    end_type: EndType
    q_coeffs: tuple
    l: int | None = None
    k: int | None = None
    m: int | None = None
    w_coeffs: tuple | None = None
    G_hat: tuple | None = None
    log_term_vanishes: bool | None = None
    flux_nonzero_predicted: bool | None = None
    normalization: Normalization | None = None
    pole_order_Q: int = 0


def classify_end(data: SurfaceData, p) -> EndAnalysis:
    if not data.has_end(p):
        raise UnknownEnd(p)
    p = data.ends[data.end_index(p)]
    Q = data.Q.pullback(chart_at(p))
    qexp = expand_at(Q, 0, (-2, 0))
    pole = 0 if Q.is_zero else max(0, -order_at(Q, 0))
    q = (qexp[-2], qexp[-1], qexp[0])
    if pole > 2:
        return EndAnalysis(p, False, EndType.IRREGULAR, q, None, None, None, None, None,
                           None, None, None, pole)
    scale = max(abs(c) for c in q)
    end_type = EndType.TYPE_II if _is_zero(q[0], scale) else EndType.TYPE_I
    ne = normalize_at_end(data, p)
    l = order_at(ne.G, 0)
    gexp = expand_at(ne.G, 0, (l, l + 1))
    g_hat = (gexp[l], gexp[l + 1])
    if ne.omega.is_zero:
        return EndAnalysis(p, True, end_type, q, l, None, None, None, g_hat, None, None,
                           ne.normalization, pole)
    k = order_at(ne.omega, 0)
    e = EndAnalysis(p, True, end_type, q, l, k, -k - 1, direct_w_coefficients(ne.omega),
                    g_hat, None, None, ne.normalization, pole)
    log_term = predicted = None
    if end_type is EndType.TYPE_I:
        predicted = True
    elif e.m in (1, 2):
        log_term = log_term_condition(e)
        predicted = flux_nonvanishing_predicate(e)
    return EndAnalysis(p, True, end_type, q, l, k, e.m, e.w_coeffs, g_hat, log_term,
                       predicted, ne.normalization, pole)


def log_term_condition(e: EndAnalysis) -> bool:
    """True when the end's second-order ODE has no logarithmic solution."""
    if e.end_type is not EndType.TYPE_II:
        raise NotTypeII("the log-term condition is stated for Type II ends")
    _, qm1, q0 = e.q_coeffs
    w0, w1, w2 = e.w_coeffs
    if e.m == 1:
        lhs, rhs = w1, -qm1 * w0
        terms = (w1, qm1 * w0)
    elif e.m == 2:
        lhs, rhs = 4 * w2, -q0 * w0 - 3 * qm1 * w1 - qm1 ** 2 * w0
        terms = (4 * w2, q0 * w0, 3 * qm1 * w1, qm1 ** 2 * w0)
    else:
        raise UnsupportedMultiplicity(f"no log-term condition for multiplicity {e.m}")
    return _is_zero(lhs - rhs, max(abs(t) for t in terms))


def flux_nonvanishing_predicate(e: EndAnalysis) -> bool:
    """Predicted non-vanishing of the flux from the Laurent data of Q and G.

    Type I ends always carry flux.  For Type II ends of multiplicity 2 the
    criterion uses ``4 q0 - 4 (Ghat'(0)/Ghat(0)) q_-1 + q_-1**2``, which equals
    ``-4 w2 / w0`` once the log-term condition holds.
    """
    if not e.regular:
        raise IrregularEnd(f"end {e.p} is irregular")
    if e.end_type is EndType.TYPE_I:
        return True
    _, qm1, q0 = e.q_coeffs
    scale = max(abs(c) for c in e.q_coeffs)
    if e.m == 1:
        return not _is_zero(qm1, scale)
    if e.m == 2:
        g0, g1 = e.G_hat
        if _is_zero(qm1, scale):
            return not _is_zero(q0, scale)
        terms = (4 * q0, 4 * (g1 / g0) * qm1, qm1 ** 2)
        return not _is_zero(terms[0] - terms[1] + terms[2], max(abs(t) for t in terms))
    raise UnsupportedMultiplicity(f"no prediction for Type II multiplicity {e.m}")
