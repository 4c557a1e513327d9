"""Random surface data for property tests.

Every generator takes a ``numpy.random.Generator`` so runs are reproducible.
Type II data are built in the normalized chart, where

    G = u**l * Ghat(u),   omega_sharp = u**k * what(u) du,   Q = -omega_sharp dG,

with ``k = -m - 1`` and ``l >= m + 1`` (Q may have at most a simple pole).  The
coefficient ``w_m`` is solved from the no-log-term condition, and the data is
then moved by a random Moebius map of G and a random change of coordinate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cmc import SurfaceData, surface_alpha_sharp
from .series import INF, Polynomial, RationalFunction, is_inf, same_point


def _cnormal(rng, size=None):
    return rng.normal(size=size) + 1j * rng.normal(size=size)


def _cdisc(rng, radius, size=None):
    r = radius * np.sqrt(rng.uniform(size=size))
    return r * np.exp(2j * np.pi * rng.uniform(size=size))


def _poly(coeffs) -> RationalFunction:
    return RationalFunction.from_coeffs(list(coeffs), [1])


def with_all_ends(G, Q, extra=(), label="", g=None) -> SurfaceData:
    """Data whose ends are every singular point of the dual connection form."""
    probe = SurfaceData(G, Q, tuple(extra), g=g, label=label)
    ends = list(extra)
    for p in surface_alpha_sharp(probe).singular_points():
        if not any(same_point(p, e, 1e-7) for e in ends):
            ends.append(p)
    return SurfaceData(G, Q, tuple(ends), g=g, label=label)


def min_separation(points) -> float:
    """Smallest distance between the points in either sphere chart."""
    best = np.inf
    finite = [complex(p) for p in points if not is_inf(p)]
    for i, a in enumerate(finite):
        for b in finite[i + 1:]:
            best = min(best, abs(a - b))
    if any(is_inf(p) for p in points):
        for a in finite:
            best = min(best, 1.0 / max(abs(a), 1e-300))
    return best


def random_instance(rng: np.random.Generator, min_sep: float = 0.25,
                    max_tries: int = 200) -> SurfaceData:
    """Random rational G and Q with regular ends; ends cover all singularities."""
    for _ in range(max_tries):
        zeros = _cdisc(rng, 1.5, rng.integers(1, 4))
        poles = _cdisc(rng, 1.5, rng.integers(0, 3))
        G = RationalFunction._make(_cnormal(rng), [(a, 1) for a in zeros] + [(b, -1) for b in poles], 0)
        if G.is_constant:
            continue
        q_poles = _cdisc(rng, 1.5, rng.integers(1, 4))
        orders = rng.integers(1, 3, len(q_poles))
        n_zeros = max(0, int(orders.sum()) - 2 - int(rng.integers(0, 2)))
        q_zeros = _cdisc(rng, 1.5, n_zeros)
        Q = RationalFunction._make(_cnormal(rng), [(a, 1) for a in q_zeros]
                                   + [(b, -int(o)) for b, o in zip(q_poles, orders)], 2)
        data = with_all_ends(G, Q, label="random")
        if min_separation(data.ends) >= min_sep and all(
                is_inf(p) or abs(p) <= 1.0 / min_sep for p in data.ends):
            return data
    raise RuntimeError("could not draw a well-separated instance")


def random_type_one(rng: np.random.Generator) -> tuple[SurfaceData, object]:
    """Random data with a double pole of Q (a Type I end) at a random point."""
    data = random_instance(rng)
    p = complex(_cdisc(rng, 1.0))
    Q = data.Q * RationalFunction._make(1.0, [(p, -2)], 0)
    return with_all_ends(data.G, Q, extra=(p,), label="type-one"), p


@dataclass(frozen=True, eq=False)
class TypeTwoInstance:
    data: SurfaceData
    end: object
    m: int
    l: int
    w: tuple
    degenerate: bool

    @property
    def w_m(self) -> complex:
        return self.w[self.m]


def _local_q(l: int, m: int, ghat: np.ndarray, w: np.ndarray) -> tuple[complex, complex]:
    """``(q_-1, q_0)`` of ``Q = -u**(l-m-2) * what * (l Ghat + u Ghat')``."""
    n = len(ghat)
    factor = np.array([(l + j) * ghat[j] for j in range(n)])
    P = np.convolve(w, factor)
    shift = l - m - 2

    def q(i):
        j = i - shift
        return -P[j] if 0 <= j < len(P) else 0j

    return q(-1), q(0)


def _move_value(rng, G: RationalFunction) -> RationalFunction:
    """Post-compose G with a random Moebius map sending 0 to 0, inf or a finite value.

    A scaling, optionally followed by an inversion or a translation.  General
    Moebius maps would turn the high-order pole of G at the image of ``u = inf``
    into a high-order critical point, whose location floating point cannot
    resolve; these maps keep every multiple point an exact factor.
    """
    a = _cnormal(rng)
    G = G * (a / abs(a) * rng.uniform(0.5, 2.0))
    kind = rng.integers(0, 3)
    if kind == 1:
        return 1 / G
    if kind == 2:
        return G + complex(_cnormal(rng))
    return G


def random_type_two(rng: np.random.Generator, m: int, l: int | None = None,
                    degenerate: bool = False, move: bool = True) -> TypeTwoInstance:
    """A log-free Type II end of multiplicity ``m`` in {1, 2}.

    ``degenerate`` (m = 2, l = 3 only) picks ``w1`` so that ``w2 = 0``; the
    flux then vanishes although ``q_-1 != 0``.
    """
    if m not in (1, 2):
        raise ValueError("only multiplicities 1 and 2 are generated")
    if l is None:
        l = int(rng.integers(m + 1, m + 4))
    if l < m + 1:
        raise ValueError("a Type II end needs l >= m + 1")
    ghat = _cnormal(rng, 3)
    ghat[0] = ghat[0] / abs(ghat[0]) * rng.uniform(0.5, 1.5)
    w = _cnormal(rng, m + 3)
    w[0] = w[0] / abs(w[0]) * rng.uniform(0.5, 1.5)
    if degenerate:
        if (m, l) != (2, 3):
            raise ValueError("degenerate instances are generated for m = 2, l = 3")
        g0, g1, w0 = ghat[0], ghat[1], w[0]
        w[1] = (9 * g0 ** 2 * w0 ** 3 - 4 * g1 * w0 ** 2) / (12 * g0 * w0)
    qm1, q0 = _local_q(l, m, ghat, w)
    if m == 1:
        w[1] = -qm1 * w[0]
    else:
        w[2] = (-q0 * w[0] - 3 * qm1 * w[1] - qm1 ** 2 * w[0]) / 4
    if degenerate:
        w[2] = 0j
    u = RationalFunction.z()
    G = _poly(np.concatenate([np.zeros(l), ghat]))
    omega = _poly(w).with_weight(1) / u ** (m + 1)
    Q = -(omega * G.derivative())
    end = 0j
    if move:
        if rng.uniform() < 0.25:
            s = complex(_cdisc(rng, 1.0))
            chart = np.array([[0, 1], [1, -s]], dtype=complex)
            end = INF
        else:
            end = complex(_cdisc(rng, 1.0))
            c = 0.2 * _cnormal(rng)
            chart = np.array([[1, -end], [c, 1]], dtype=complex)
        G = _move_value(rng, G.pullback(chart))
        Q = Q.pullback(chart)
    data = with_all_ends(G, Q, extra=(end,), label=f"type-two-m{m}-l{l}")
    return TypeTwoInstance(data, end, m, l, tuple(complex(x) for x in w), degenerate)
