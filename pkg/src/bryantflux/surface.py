"""Numerical immersion: the lift F, points of H^3, meshes in the unit ball.

The lift solves ``dF = F alpha`` (primal, ``alpha = F^{-1} dF``).  Its inverse
``F# = F^{-1}`` solves ``dF# = F# alpha_sharp``, so the dual immersion is
integrated directly from the dual data.  Integration is fixed-step RK4 with
``ceil(steps_per_unit * length)`` steps per path segment, never renormalized.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cmc import SL2CForm, SurfaceData, surface_alpha, surface_alpha_sharp
from .errors import (
    ExcessiveDrift,
    IoFailure,
    MissingSecondaryGaussMap,
    NotPositiveDefinite,
    PathHitsSingularity,
)
from .series import PowerForm, is_inf

STEPS_PER_UNIT = 256
MAX_DRIFT = 1e-6


@dataclass(frozen=True)
class Connection:
    """A matrix-valued 1-form ``A(z) dz`` with known singular points.

    ``branch_cut`` marks forms built from a principal-branch power of z; paths
    must then stay off the closed negative real axis.
    """

    matrix: Callable[[np.ndarray], np.ndarray]
    singular: tuple = ()
    branch_cut: bool = False

    def __call__(self, z) -> np.ndarray:
        return self.matrix(np.asarray(z, dtype=complex))


def _form_singularities(form: SL2CForm) -> tuple[list, bool]:
    pts, branch = [], False
    for row in form.entries:
        for f in row:
            if isinstance(f, PowerForm):
                branch = branch or not f.is_single_valued
                pts.append(0j)
                f = f.rational
            pts.extend(p for p, _ in f.poles() if not is_inf(p))
    return pts, branch


def _connection(form: SL2CForm, data: SurfaceData) -> Connection:
    pts, branch = _form_singularities(form)
    pts += [complex(p) for p in data.ends if not is_inf(p)]
    return Connection(form, tuple(dict.fromkeys(pts)), branch)


def primal_connection(data: SurfaceData) -> Connection:
    if data.g is None:
        raise MissingSecondaryGaussMap("the primal lift needs the secondary Gauss map")
    return _connection(surface_alpha(data), data)


def dual_connection(data: SurfaceData) -> Connection:
    return _connection(surface_alpha_sharp(data), data)


def constant_connection(A, singular=(), power: int = 0) -> Connection:
    """``A z**power dz`` for a constant matrix ``A``; handy for closed-form checks."""
    A = np.asarray(A, dtype=complex)

    def matrix(z):
        return (z ** power)[..., None, None] * A

    if power < 0:
        singular = tuple(singular) + (0j,)
    return Connection(matrix, tuple(singular))


def _as_connection(source) -> Connection:
    if isinstance(source, Connection):
        return source
    if isinstance(source, SurfaceData):
        return primal_connection(source)
    raise TypeError(f"cannot integrate along {type(source).__name__}")


@dataclass(frozen=True, eq=False)
class Frame:
    value: np.ndarray
    at: complex
    det_drift: float = 0.0

    @classmethod
    def identity(cls, at=0j) -> "Frame":
        return cls(np.eye(2, dtype=complex), complex(at), 0.0)


def _segment_distance(a, b, s) -> np.ndarray:
    """Distance from points ``s`` to the segments ``[a, b]`` (broadcasting)."""
    d = b - a
    denom = np.where(np.abs(d) == 0, 1.0, np.abs(d) ** 2)
    t = np.clip(((s - a) * np.conj(d)).real / denom, 0.0, 1.0)
    return np.abs(a + t * d - s)


def _crosses_cut(a, b) -> np.ndarray:
    """True where the segment meets the closed negative real axis."""
    a, b = np.broadcast_arrays(np.asarray(a, complex), np.asarray(b, complex))
    hits = np.zeros(a.shape, dtype=bool)
    on_axis = lambda z: (z.imag == 0) & (z.real <= 0)
    hits |= on_axis(a) | on_axis(b)
    straddle = (a.imag * b.imag) < 0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = a.imag / (a.imag - b.imag)
        x = a.real + t * (b.real - a.real)
    hits |= straddle & (x <= 0)
    return hits


def _check_segments(conn: Connection, a, b, h) -> None:
    if conn.singular:
        s = np.asarray(conn.singular, dtype=complex)
        dist = _segment_distance(np.asarray(a)[..., None], np.asarray(b)[..., None], s)
        if np.any(dist <= 2 * np.abs(np.asarray(h))[..., None]):
            raise PathHitsSingularity("the path passes within two steps of a singular point")
    if conn.branch_cut and np.any(_crosses_cut(a, b)):
        raise PathHitsSingularity("the path crosses the branch cut of a multivalued Gauss map")


def _rk4(conn: Connection, F: np.ndarray, a, b, steps_per_unit: float) -> np.ndarray:
    """RK4 for ``dF = F A(z) dz`` along straight segments ``a -> b`` (batched)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    length = float(np.max(np.abs(b - a))) if a.size else 0.0
    if length == 0.0:
        return F
    n = max(1, math.ceil(steps_per_unit * length))
    h = (b - a) / n
    _check_segments(conn, a, b, h)
    hm = h[..., None, None]
    for i in range(n):
        z = a + i * h
        k1 = F @ conn(z) * hm
        k2 = (F + k1 / 2) @ conn(z + h / 2) * hm
        k3 = (F + k2 / 2) @ conn(z + h / 2) * hm
        k4 = (F + k3) @ conn(z + h) * hm
        F = F + (k1 + 2 * k2 + 2 * k3 + k4) / 6
    return F


def _drift(F: np.ndarray, F0: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.det(F) - np.linalg.det(F0))))


def integrate_frame(source, path, initial: Frame | np.ndarray | None = None,
                    steps_per_unit: float = STEPS_PER_UNIT) -> Frame:
    """Integrate the lift along a polyline of parameter points."""
    conn = _as_connection(source)
    path = [complex(z) for z in path]
    if isinstance(initial, Frame):
        F0, drift0 = initial.value, initial.det_drift
        start = initial.at
    else:
        F0 = np.eye(2, dtype=complex) if initial is None else np.asarray(initial, dtype=complex)
        drift0 = 0.0
        start = path[0] if path else 0j
    if len(path) < 2:
        return Frame(F0.copy(), path[-1] if path else start, drift0)
    F = F0.copy()
    for a, b in zip(path[:-1], path[1:]):
        F = _rk4(conn, F, a, b, steps_per_unit)
    drift = _drift(F, F0)
    if drift > MAX_DRIFT:
        raise ExcessiveDrift(f"det F drifted by {drift:.3e}")
    return Frame(F, path[-1], max(drift0, drift))


def monodromy(source, loop, steps_per_unit: float = STEPS_PER_UNIT) -> np.ndarray:
    """``F(end) F(start)^{-1}`` for the lift started at the identity."""
    loop = [complex(z) for z in loop]
    if len(loop) < 2 or abs(loop[0] - loop[-1]) > 1e-12 * max(1.0, abs(loop[0])):
        raise ValueError("the loop must be a closed polyline")
    return integrate_frame(source, loop, steps_per_unit=steps_per_unit).value


def circle(center, radius: float, n: int = 256, start_angle: float = 0.0) -> list:
    """Closed polygonal loop of ``n`` chords around ``center``."""
    t = start_angle + 2 * np.pi * np.arange(n + 1) / n
    pts = list(complex(center) + radius * np.exp(1j * t))
    pts[-1] = pts[0]
    return pts


def step_halving_ratio(source, path, steps_per_unit: float = 16.0) -> float:
    """``|F_h - F_{h/2}| / |F_{h/2} - F_{h/4}|``; about 16 for a fourth-order method."""
    F = [integrate_frame(source, path, steps_per_unit=steps_per_unit * 2 ** i).value
         for i in range(3)]
    return float(np.max(np.abs(F[0] - F[1])) / np.max(np.abs(F[1] - F[2])))


# -- the hyperbolic space model ------------------------------------------

@dataclass(frozen=True, eq=False)
class HermitianPoint:
    """A point of H^3 as a Hermitian positive-definite matrix of determinant one."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise NotPositiveDefinite("expected a 2x2 matrix")
        scale = max(1.0, float(np.max(np.abs(m))))
        if np.max(np.abs(m - m.conj().T)) > 1e-10 * scale:
            raise NotPositiveDefinite("matrix is not Hermitian")
        if m[0, 0].real <= 0 or m[1, 1].real <= 0:
            raise NotPositiveDefinite("matrix has non-positive trace")
        if abs(np.linalg.det(m) - 1) > 1e-8 * max(1.0, abs(m[0, 0] * m[1, 1])):
            raise NotPositiveDefinite(f"determinant {np.linalg.det(m).real:.12g} is not one")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_frame(cls, F, dual: bool = False) -> "HermitianPoint":
        F = np.asarray(F, dtype=complex)
        if dual:
            F = np.linalg.inv(F)
        return cls(F @ F.conj().T)

    def minkowski(self) -> np.ndarray:
        (a, b), (_, d) = self.matrix
        return np.array([(a + d).real / 2, b.real, b.imag, (a - d).real / 2])


def to_ball(p: HermitianPoint | np.ndarray) -> np.ndarray:
    """Unit-ball coordinates ``(x1, x2, x3)/(1 + x0)`` of a Hermitian model point."""
    if not isinstance(p, HermitianPoint):
        p = HermitianPoint(p)
    x = p.minkowski()
    return x[1:] / (1 + x[0])


def _ball_batch(F: np.ndarray) -> np.ndarray:
    X = F @ np.conj(np.swapaxes(F, -1, -2))
    a, b, d = X[..., 0, 0].real, X[..., 0, 1], X[..., 1, 1].real
    x0 = (a + d) / 2
    out = np.stack([b.real, b.imag, (a - d) / 2], axis=-1) / (1 + x0)[..., None]
    return out


# -- meshes ------------------------------------------------------------------

@dataclass(frozen=True)
class PolarGrid:
    """Samples ``center + r e^{i theta}`` on a rectangle in (r, theta)."""

    center: complex = 0j
    r_min: float = 0.5
    r_max: float = 2.0
    theta_min: float = -0.9 * np.pi
    theta_max: float = 0.9 * np.pi
    n_r: int = 32
    n_theta: int = 32

    def points(self) -> np.ndarray:
        r = np.linspace(self.r_min, self.r_max, self.n_r)
        t = np.linspace(self.theta_min, self.theta_max, self.n_theta)
        return self.center + r[:, None] * np.exp(1j * t)[None, :]

    def record(self) -> dict:
        return {"kind": "polar", "center": [self.center.real, self.center.imag]
                if isinstance(self.center, complex) else [float(self.center), 0.0],
                "r": [self.r_min, self.r_max], "theta": [self.theta_min, self.theta_max],
                "samples": [self.n_r, self.n_theta]}


@dataclass(frozen=True, eq=False)
class Mesh:
    vertices: np.ndarray
    faces: np.ndarray
    domain_record: dict = field(default_factory=dict)
    frames: np.ndarray | None = None


def grid_faces(n_r: int, n_theta: int) -> np.ndarray:
    faces = []
    for i in range(n_r - 1):
        for j in range(n_theta - 1):
            v00, v01 = i * n_theta + j, i * n_theta + j + 1
            v10, v11 = v00 + n_theta, v01 + n_theta
            faces.append((v00, v10, v11))
            faces.append((v00, v11, v01))
    return np.array(faces, dtype=int).reshape(-1, 3)


def grid_frames(conn: Connection, grid: PolarGrid,
                steps_per_unit: float = STEPS_PER_UNIT) -> np.ndarray:
    """Lift at every grid sample, starting from the identity at sample (0, 0).

    The inner ring is integrated along its chords, then every ray outwards.
    """
    Z = grid.points()
    frames = np.empty(Z.shape + (2, 2), dtype=complex)
    F = np.eye(2, dtype=complex)
    frames[0, 0] = F
    for j in range(1, grid.n_theta):
        F = _rk4(conn, F, Z[0, j - 1], Z[0, j], steps_per_unit)
        frames[0, j] = F
    F = frames[0]
    for i in range(1, grid.n_r):
        F = _rk4(conn, F, Z[i - 1], Z[i], steps_per_unit)
        frames[i] = F
    drift = float(np.max(np.abs(np.linalg.det(frames) - 1)))
    if drift > MAX_DRIFT:
        raise ExcessiveDrift(f"det F drifted by {drift:.3e}")
    return frames


def immerse(data: SurfaceData, grid: PolarGrid, which: str = "primal",
            steps_per_unit: float = STEPS_PER_UNIT) -> Mesh:
    """Sample the surface (or its dual) on ``grid`` as a triangulated mesh in the unit ball."""
    # the dual lift F# = F^{-1} is integrated directly, so x# = F# F#^*
    if which == "primal":
        conn = primal_connection(data)
    elif which == "dual":
        conn = dual_connection(data)
    else:
        raise ValueError(f"unknown immersion {which!r}; use 'primal' or 'dual'")
    frames = grid_frames(conn, grid, steps_per_unit)
    flat = frames.reshape(-1, 2, 2)
    verts = _ball_batch(flat)
    if np.any(np.linalg.norm(verts, axis=1) >= 1):
        raise NotPositiveDefinite("a sample left the unit ball")
    record = dict(grid.record(), which=which, model="unit Poincare ball")
    return Mesh(verts, grid_faces(grid.n_r, grid.n_theta), record, frames)


def export_obj(mesh: Mesh, destination) -> None:
    """Write the mesh as Wavefront OBJ (1-indexed faces, LF line endings)."""
    lines = [f"# bryantflux mesh: {len(mesh.vertices)} vertices, {len(mesh.faces)} faces,"
             " unit Poincare ball"]
    lines += [f"v {x:.9g} {y:.9g} {z:.9g}" for x, y, z in np.asarray(mesh.vertices).reshape(-1, 3)]
    lines += [f"f {i + 1} {j + 1} {k + 1}" for i, j, k in np.asarray(mesh.faces).reshape(-1, 3)]
    text = "\n".join(lines) + "\n"
    try:
        if hasattr(destination, "write"):
            destination.write(text)
        else:
            with open(destination, "w", newline="\n") as fh:
                fh.write(text)
    except OSError as exc:
        raise IoFailure(str(exc)) from exc


# -- consistency with the flux engine -----------------------------------------

def _intertwiner(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Invertible ``a`` with ``a A_j = B_j a`` for all j (least squares null vector)."""
    I = np.eye(2)
    rows = [np.kron(I, Aj.T) - np.kron(Bj, I) for Aj, Bj in zip(A, B)]
    vh = np.linalg.svd(np.vstack(rows))[2]
    a = vh[-1].conj().reshape(2, 2)
    return a / np.sqrt(np.linalg.det(a))


def frame_flux(data: SurfaceData, p, radius: float, n: int = 256,
               steps_per_unit: float = STEPS_PER_UNIT) -> np.ndarray:
    """Flux at a finite end from the integrated lift.

    Along a circle around ``p`` the form ``-dF F^{-1} = -F alpha F^{-1}`` equals
    ``a alpha_sharp a^{-1}`` for the constant ``a`` fixed by the initial value;
    ``a`` is recovered from the samples and undone before comparing.
    """
    conn = primal_connection(data)
    loop = circle(p, radius, n)
    z = np.array(loop[:-1])
    F = np.empty((n, 2, 2), dtype=complex)
    frame = Frame.identity(loop[0])
    F[0] = frame.value
    for j in range(1, n):
        frame = integrate_frame(conn, [loop[j - 1], loop[j]], frame, steps_per_unit)
        F[j] = frame.value
    B = -F @ conn(z) @ np.linalg.inv(F)
    A = dual_connection(data)(z)
    a = _intertwiner(A[:: max(1, n // 8)], B[:: max(1, n // 8)])
    quad = np.mean(B * (z - complex(p))[:, None, None], axis=0)
    return np.linalg.inv(a) @ quad @ a

