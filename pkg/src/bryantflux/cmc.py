"""Surface data (G, g, Q, ends) and the sl(2,C)-valued connection forms built from it.

Conventions: the dual form is ``omega_sharp = -Q/dG`` and the primal form is
``omega = Q/dg``, so swapping ``g <-> G`` together with ``Q -> -Q`` exchanges them.
Both connection forms have the shape ``[[h, -h**2], [1, -h]] * form``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConstantGaussMap, MissingSecondaryGaussMap, WeightMismatch
from .series import (
    PowerForm,
    RationalFunction,
    is_inf,
    residue,
    same_point,
    schwarzian,
)


@dataclass(frozen=True, eq=False)
class SurfaceData:
    """A CMC-1 surface on the punctured sphere: Gauss maps, Hopf differential, ends."""

    G: RationalFunction
    Q: RationalFunction
    ends: tuple
    g: RationalFunction | PowerForm | None = None
    label: str = ""

    def __post_init__(self):
        if self.G.weight != 0:
            raise WeightMismatch("the hyperbolic Gauss map is a function (weight 0)")
        if self.G.is_constant:
            raise ConstantGaussMap("the hyperbolic Gauss map must be nonconstant")
        if self.Q.weight != 2:
            raise WeightMismatch("the Hopf differential has weight 2")
        if self.g is not None and self.g.weight != 0:
            raise WeightMismatch("the secondary Gauss map is a function (weight 0)")
        object.__setattr__(self, "ends", tuple(self.ends))

    def has_end(self, p) -> bool:
        return any(same_point(p, e) for e in self.ends)

    def end_index(self, p) -> int:
        for i, e in enumerate(self.ends):
            if same_point(p, e):
                return i
        return -1


@dataclass(frozen=True, eq=False)
class SL2CForm:
    """2x2 matrix of 1-forms; entries are RationalFunction or PowerForm."""

    entries: tuple

    def entry(self, i: int, j: int):
        return self.entries[i][j]

    def trace(self):
        return self.entries[0][0] + self.entries[1][1]

    def det(self):
        e = self.entries
        return e[0][0] * e[1][1] - e[0][1] * e[1][0]

    def __call__(self, z) -> np.ndarray:
        """Coefficient matrix of ``dz`` at ``z``; shape ``z.shape + (2, 2)``."""
        z = np.asarray(z, dtype=complex)
        out = np.empty(z.shape + (2, 2), dtype=complex)
        for i in range(2):
            for j in range(2):
                out[..., i, j] = self.entries[i][j](z)
        return out

    def in_chart(self, p, u) -> np.ndarray:
        u = np.asarray(u, dtype=complex)
        out = np.empty(u.shape + (2, 2), dtype=complex)
        for i in range(2):
            for j in range(2):
                out[..., i, j] = self.entries[i][j].in_chart(p, u)
        return out

    def rational_entries(self) -> list:
        """Entries as rational functions; raises MultivaluedEntry otherwise."""
        out = []
        for row in self.entries:
            for f in row:
                if isinstance(f, PowerForm):
                    f = f.to_rational()
                out.append(f)
        return out

    def residue_matrix(self, p) -> np.ndarray:
        out = np.zeros((2, 2), dtype=complex)
        for i in range(2):
            for j in range(2):
                f = self.entries[i][j]
                out[i, j] = f.residue(p) if isinstance(f, PowerForm) else residue(f, p)
        return out

    def singular_points(self) -> list:
        """Poles of all entries (rational entries only)."""
        pts: list = []
        for f in self.rational_entries():
            for p, _ in f.poles():
                if not any(same_point(p, q, 1e-7) for q in pts):
                    pts.append(p)
        return pts


def _connection(h, form) -> SL2CForm:
    return SL2CForm(((h * form, -(h * h * form)), (form, -(h * form))))


def dual_omega(Q: RationalFunction, G: RationalFunction) -> RationalFunction:
    """The dual Weierstrass form ``-Q/dG``."""
    if G.is_constant:
        raise ConstantGaussMap("dG vanishes identically")
    return -Q / G.derivative()


def alpha_sharp(G: RationalFunction, omega_sharp: RationalFunction) -> SL2CForm:
    """``[[G, -G^2], [1, -G]] * omega_sharp``; equals ``-dF F^{-1}``."""
    return _connection(G, omega_sharp)


def alpha(g, omega) -> SL2CForm:
    """``[[g, -g^2], [1, -g]] * omega``; equals ``F^{-1} dF``.

    With a power-form ``g`` the entries may carry non-integer powers of z;
    those raise MultivaluedEntry when a residue is requested.
    """
    return _connection(g, omega)


def primal_omega(Q: RationalFunction, g) -> RationalFunction | PowerForm:
    """The Weierstrass form ``Q/dg`` paired with the secondary Gauss map."""
    if g is None:
        raise MissingSecondaryGaussMap("no secondary Gauss map given")
    dg = g.derivative()
    if dg.is_zero:
        raise ConstantGaussMap("the secondary Gauss map must be nonconstant")
    return Q / dg


def hopf_from_maps(g, G) -> RationalFunction:
    """``(S(g) - S(G))/2`` as a weight-2 rational form."""
    out = (schwarzian(g) - schwarzian(G)) * 0.5
    if isinstance(out, PowerForm):
        out = out.to_rational()
    return out


def surface_alpha_sharp(data: SurfaceData) -> SL2CForm:
    return alpha_sharp(data.G, dual_omega(data.Q, data.G))


def surface_alpha(data: SurfaceData) -> SL2CForm:
    return alpha(data.g, primal_omega(data.Q, data.g))


@dataclass
class ValidationReport:
    undeclared_poles: list = field(default_factory=list)
    schwarzian_checked: bool = False
    schwarzian_max_error: float = 0.0
    determinant_max: float = 0.0
    trace_max: float = 0.0
    tolerance: float = 1e-8

    @property
    def ok(self) -> bool:
        return (not self.undeclared_poles
                and self.schwarzian_max_error <= self.tolerance
                and self.determinant_max <= self.tolerance
                and self.trace_max <= self.tolerance)

    @property
    def issues(self) -> list[str]:
        out = []
        for p in self.undeclared_poles:
            out.append(f"pole of Q at {p} is not a declared end")
        if self.schwarzian_max_error > self.tolerance:
            out.append(f"Q differs from (S(g)-S(G))/2 by {self.schwarzian_max_error:.3e}")
        if self.determinant_max > self.tolerance:
            out.append(f"det(alpha_sharp) is not zero ({self.determinant_max:.3e})")
        if self.trace_max > self.tolerance:
            out.append(f"trace(alpha_sharp) is not zero ({self.trace_max:.3e})")
        return out


def sample_points(avoid, n: int = 10, seed: int = 0, radius: float = 2.0) -> np.ndarray:
    """``n`` reproducible random points in a disc, kept away from the points ``avoid``."""
    rng = np.random.default_rng(seed)
    finite = [complex(p) for p in avoid if not is_inf(p)]
    out = []
    while len(out) < n:
        z = complex(*rng.uniform(-radius, radius, 2))
        if all(abs(z - p) > 0.05 for p in finite):
            out.append(z)
    return np.array(out)


def _rel_error(a, b) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))


def validate(data: SurfaceData, tol: float = 1e-8) -> ValidationReport:
    """Consistency report: undeclared poles of Q, Schwarzian relation, null condition."""
    report = ValidationReport(tolerance=tol)
    for p, _ in data.Q.poles():
        if not data.has_end(p):
            report.undeclared_poles.append(p)
    singular = [p for p, _ in data.Q.poles()] + [p for p, _ in data.G.poles()] + list(data.ends)
    zs = sample_points(singular)
    if data.g is not None:
        other = hopf_from_maps(data.g, data.G)
        report.schwarzian_checked = True
        report.schwarzian_max_error = _rel_error(data.Q(zs), other(zs))
    m = surface_alpha_sharp(data)(zs)
    scale = np.maximum(1.0, np.abs(m[:, 0, 0] * m[:, 1, 1]) + np.abs(m[:, 0, 1] * m[:, 1, 0]))
    report.determinant_max = float(np.max(np.abs(np.linalg.det(m)) / scale))
    report.trace_max = float(np.max(np.abs(np.trace(m, axis1=-2, axis2=-1))
                                    / np.maximum(1.0, np.abs(m[:, 0, 0]))))
    return report

