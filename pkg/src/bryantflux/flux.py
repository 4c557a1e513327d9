"""Flux of a CMC-1 surface at its ends, by residues and by contour quadrature.

``Fl_j`` is the entrywise residue of the dual connection form ``alpha_sharp`` at
the end ``p_j``.  Since ``alpha_sharp = -dF F^{-1}`` this is the loop integral
``-(1/2 pi i) \\oint dF F^{-1}`` taken with the orientation that reproduces the
catenoid cousin's ``((mu^2 - 1)/4) diag(1, -1)`` at ``z = 0``.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .cmc import SL2CForm, SurfaceData, alpha_sharp, surface_alpha, surface_alpha_sharp
from .ends import NormalizedEnd, normalize_at_end
from .errors import MissingSecondaryGaussMap, RadiusTooLarge, UndeclaredPole, UnknownEnd
from .series import INF, as_rational, is_inf, residue, same_point

DEFAULT_TOL = 1e-9


def default_tolerance() -> float:
    """Balancing tolerance, overridable through ``BRYANTFLUX_TOL``."""
    value = os.environ.get("BRYANTFLUX_TOL")
    return float(value) if value else DEFAULT_TOL


@dataclass(frozen=True, eq=False)
class FluxMatrix:
    entries: np.ndarray

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex).reshape(2, 2)
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        if abs(np.trace(m)) > 1e-10 * max(1.0, self.max_norm):
            raise ValueError(f"flux matrix is not trace-free (trace {np.trace(m):.3e})")

    @property
    def max_norm(self) -> float:
        return float(np.max(np.abs(self.entries)))

    def is_zero(self, tol: float = 1e-9) -> bool:
        return self.max_norm <= tol

    def __getitem__(self, ij):
        return self.entries[ij]

    def __add__(self, other: "FluxMatrix") -> "FluxMatrix":
        return FluxMatrix(self.entries + other.entries)

    def __sub__(self, other: "FluxMatrix") -> "FluxMatrix":
        return FluxMatrix(self.entries - other.entries)

    def conjugate_by(self, M) -> "FluxMatrix":
        M = np.asarray(M, dtype=complex)
        return FluxMatrix(M @ self.entries @ np.linalg.inv(M))

    def allclose(self, other, atol: float) -> bool:
        other = other.entries if isinstance(other, FluxMatrix) else np.asarray(other)
        return bool(np.max(np.abs(self.entries - other)) <= atol)


def zero_flux() -> FluxMatrix:
    return FluxMatrix(np.zeros((2, 2)))


@dataclass(frozen=True, eq=False)
class BalanceReport:
    per_end: list
    total: FluxMatrix
    balanced: bool
    tolerance_used: float


def _require_end(data: SurfaceData, p):
    i = data.end_index(p)
    if i < 0:
        raise UnknownEnd(p)
    return data.ends[i]


def _undeclared(data: SurfaceData, form: SL2CForm) -> list:
    return [p for p in form.singular_points() if not data.has_end(p)]


def flux_at_end(data: SurfaceData, p) -> FluxMatrix:
    p = _require_end(data, p)
    return FluxMatrix(surface_alpha_sharp(data).residue_matrix(p))


def balance(data: SurfaceData, tol: float | None = None) -> BalanceReport:
    tol = default_tolerance() if tol is None else tol
    form = surface_alpha_sharp(data)
    missing = _undeclared(data, form)
    if missing:
        raise UndeclaredPole(missing)
    per_end = [(p, FluxMatrix(form.residue_matrix(p))) for p in data.ends]
    total = zero_flux()
    for _, f in per_end:
        total = total + f
    return BalanceReport(per_end, total, total.max_norm <= tol, tol)


def dual_flux_at_end(data: SurfaceData, p) -> FluxMatrix:
    """``Fl#``: minus the residue matrix of ``alpha = F^{-1} dF``."""
    p = _require_end(data, p)
    if data.g is None:
        raise MissingSecondaryGaussMap("the dual flux needs the secondary Gauss map")
    form = surface_alpha(data)
    form.rational_entries()
    return FluxMatrix(-form.residue_matrix(p))


def fl_sharp(data: SurfaceData, p) -> complex:
    """``fl#``: ``-Res_p(g omega)``."""
    p = _require_end(data, p)
    if data.g is None:
        raise MissingSecondaryGaussMap("fl# needs the secondary Gauss map")
    g_omega = surface_alpha(data).entry(0, 0)
    return -residue(as_rational(g_omega), p)


@dataclass(frozen=True)
class EtaResidues:
    per_end: list
    total: complex


def eta_residues(data: SurfaceData) -> EtaResidues:
    """Residues of ``eta = G omega_sharp``, the (1,1) entry of ``alpha_sharp``."""
    form = surface_alpha_sharp(data)
    missing = _undeclared(data, form)
    if missing:
        raise UndeclaredPole(missing)
    eta = form.entry(0, 0)
    per_end = [(p, residue(eta, p)) for p in data.ends]
    return EtaResidues(per_end, complex(sum(r for _, r in per_end)))


def normalized_end_residue(ne: NormalizedEnd) -> FluxMatrix:
    """Residue matrix of ``alpha_sharp`` for the normalized data at ``u = 0``."""
    return FluxMatrix(alpha_sharp(ne.G, ne.omega).residue_matrix(0))


def normalized_flux(data: SurfaceData, p) -> FluxMatrix:
    """Flux of ``(sigma o G, Q)`` at ``p``; conjugate to ``flux_at_end``."""
    return normalized_end_residue(normalize_at_end(data, _require_end(data, p)))


def _chart_coordinate(p, s):
    """Position of the sphere point ``s`` in the chart centred at ``p``."""
    if is_inf(p):
        return INF if same_point(s, 0) else 1.0 / complex(s)
    return INF if is_inf(s) else complex(s) - complex(p)


def singular_distance(data: SurfaceData, p) -> float:
    """Chart distance from ``p`` to the nearest other singularity or end."""
    p = _require_end(data, p)
    others = list(surface_alpha_sharp(data).singular_points()) + list(data.ends)
    best = np.inf
    for s in others:
        if same_point(s, p):
            continue
        u = _chart_coordinate(p, s)
        if not is_inf(u):
            best = min(best, abs(u))
    return float(best)


def contour_flux(data: SurfaceData, p, radius: float | None = None,
                 n_points: int = 1024) -> FluxMatrix:
    """Trapezoidal quadrature of ``(1/2 pi i) \\oint alpha_sharp`` on ``|u| = radius``.

    ``u`` is the chart coordinate at ``p`` (``u = 1/z`` at infinity).  The
    default radius is half the distance to the nearest other singularity,
    capped at 1.
    """
    if n_points < 64:
        raise ValueError("contour quadrature needs at least 64 nodes")
    p = _require_end(data, p)
    dist = singular_distance(data, p)
    if radius is None:
        radius = min(1.0, 0.5 * dist)
    if radius <= 0 or radius >= dist:
        raise RadiusTooLarge(f"radius {radius:g} reaches another singularity at distance {dist:g}")
    u = radius * np.exp(2j * np.pi * np.arange(n_points) / n_points)
    values = surface_alpha_sharp(data).in_chart(p, u)
    # (1/2 pi i) \oint f(u) du  =  mean of f(u) u over equispaced nodes
    m = np.mean(values * u[:, None, None], axis=0)
    return FluxMatrix(m)


def relative_deviation(a: FluxMatrix, b: FluxMatrix) -> float:
    """Max-norm of ``a - b`` relative to ``max(1, |b|)``."""
    return float(np.max(np.abs(a.entries - b.entries)) / max(1.0, b.max_norm))

