"""Scan trajectories, detector geometry, and per-view detector frames.

Conventions
-----------
World coordinates are in millimetres. The volume origin sits at the world
origin; sources orbit it. A trajectory is stored fully sampled: positions
``a(lambda)`` and velocities ``a'(lambda)`` at each of ``n_views`` values
of the scan parameter, so downstream modules never depend on the
analytic parameterization.

The per-view detector frame is an orthonormal right-handed triple
``(e_u, e_v, e_w)``: ``e_w`` is the principal ray (unit vector from the
source toward the world origin), ``e_u`` and ``e_v`` are the in-plane
detector axes. The flat detector is centered on the principal ray at
distance ``sdd`` from the source; a pixel ``(i, j)`` has physical
in-plane offsets ``u = (i - (n_u - 1)/2) * du`` and
``v = (j - (n_v - 1)/2) * dv``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

__all__ = [
    "Trajectory",
    "DetectorGeometry",
    "Frame",
    "make_circular_trajectory",
    "make_sinusoidal_trajectory",
    "detector_frame",
    "trajectory_to_json",
    "trajectory_from_json",
    "detector_to_json",
    "detector_from_json",
]


@dataclass(frozen=True)
class Trajectory:
    """Sampled source trajectory a(lambda) with analytic velocities.

    Attributes
    ----------
    lambdas : (n_views,) float64, strictly increasing scan parameters.
    positions : (n_views, 3) float64, source positions a(lambda) in mm.
    velocities : (n_views, 3) float64, derivatives a'(lambda) in mm per
        unit lambda.
    delta_lambda : float, uniform spacing of the lambda samples; enters
        the 3D backprojection as the quadrature weight of the outer
        trajectory integral.
    """

    lambdas: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    delta_lambda: float

    def __post_init__(self) -> None:
        lam = np.asarray(self.lambdas, dtype=np.float64)
        pos = np.asarray(self.positions, dtype=np.float64)
        vel = np.asarray(self.velocities, dtype=np.float64)
        if pos.shape != (lam.size, 3) or vel.shape != (lam.size, 3):
            raise ValueError(
                f"inconsistent trajectory arrays: lambdas {lam.shape}, "
                f"positions {pos.shape}, velocities {vel.shape}"
            )
        if lam.size >= 2 and not np.all(np.diff(lam) > 0):
            raise ValueError("lambdas must be strictly increasing")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "velocities", vel)

    @property
    def n_views(self) -> int:
        return self.lambdas.size


@dataclass(frozen=True)
class DetectorGeometry:
    """Flat-panel detector: pixel counts, pitch (mm) and source-detector
    distance (mm). Orientation comes from :func:`detector_frame`."""

    n_u: int
    n_v: int
    du: float
    dv: float
    sdd: float

    def __post_init__(self) -> None:
        if self.n_u < 1 or self.n_v < 1:
            raise ValueError("detector needs at least one pixel per axis")
        if self.du <= 0 or self.dv <= 0 or self.sdd <= 0:
            raise ValueError("du, dv and sdd must be positive")

    def u_coords(self) -> np.ndarray:
        """Physical u offsets of pixel centers, shape (n_u,)."""
        return (np.arange(self.n_u) - (self.n_u - 1) / 2.0) * self.du

    def v_coords(self) -> np.ndarray:
        """Physical v offsets of pixel centers, shape (n_v,)."""
        return (np.arange(self.n_v) - (self.n_v - 1) / 2.0) * self.dv


class Frame(NamedTuple):
    """Right-handed orthonormal detector frame for one view."""

    e_u: np.ndarray
    e_v: np.ndarray
    e_w: np.ndarray


def make_circular_trajectory(radius: float, n_views: int, arc: float = 2.0 * math.pi) -> Trajectory:
    """Circular source orbit in the z = 0 plane.

    a(lambda) = (R cos lambda, R sin lambda, 0) over ``lambda in
    [0, arc)`` with the endpoint excluded, so a full-circle scan has no
    duplicated view.
    """
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    if n_views < 2:
        raise ValueError(f"need at least 2 views, got {n_views}")
    if arc <= 0:
        raise ValueError(f"arc must be positive, got {arc}")
    dlam = arc / n_views
    lam = np.arange(n_views) * dlam
    cos, sin = np.cos(lam), np.sin(lam)
    positions = np.stack([radius * cos, radius * sin, np.zeros(n_views)], axis=1)
    velocities = np.stack([-radius * sin, radius * cos, np.zeros(n_views)], axis=1)
    return Trajectory(lam, positions, velocities, dlam)


def make_sinusoidal_trajectory(
    radius: float, amplitude: float, periods: int, n_views: int
) -> Trajectory:
    """Circular orbit with a sinusoidal axial oscillation.

    a(lambda) = (R cos lambda, R sin lambda, A sin(p lambda)) over one
    revolution, lambda in [0, 2*pi) with the endpoint excluded. The
    velocities are the analytic derivatives.
    """
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    if amplitude < 0:
        raise ValueError(f"amplitude must be non-negative, got {amplitude}")
    if periods < 1:
        raise ValueError(f"periods must be >= 1, got {periods}")
    if n_views < 2:
        raise ValueError(f"need at least 2 views, got {n_views}")
    dlam = 2.0 * math.pi / n_views
    lam = np.arange(n_views) * dlam
    cos, sin = np.cos(lam), np.sin(lam)
    positions = np.stack(
        [radius * cos, radius * sin, amplitude * np.sin(periods * lam)], axis=1
    )
    velocities = np.stack(
        [-radius * sin, radius * cos, amplitude * periods * np.cos(periods * lam)],
        axis=1,
    )
    return Trajectory(lam, positions, velocities, dlam)


# Seed used to build e_u when the principal ray is (anti)parallel to z.
_Z_AXIS = np.array([0.0, 0.0, 1.0])
_X_AXIS = np.array([1.0, 0.0, 0.0])
_PARALLEL_TOL = 1e-12


def detector_frame(trajectory: Trajectory, view: int, det: DetectorGeometry) -> Frame:
    """Orthonormal detector frame for one view.

    The principal ray ``e_w`` points from the source toward the world
    origin. ``e_u = normalize(z x e_w)`` (global x-axis replaces z when
    the principal ray is parallel to z), ``e_v = e_w x e_u``, giving a
    right-handed frame. Deterministic: identical inputs yield
    bit-identical frames.
    """
    if not 0 <= view < trajectory.n_views:
        raise ValueError(f"view {view} out of range [0, {trajectory.n_views})")
    src = trajectory.positions[view]
    norm = float(np.linalg.norm(src))
    if norm == 0.0:
        raise ValueError("source position coincides with the volume origin")
    e_w = -src / norm
    seed = _Z_AXIS if abs(e_w @ _Z_AXIS) < 1.0 - _PARALLEL_TOL else _X_AXIS
    e_u = np.cross(seed, e_w)
    e_u = e_u / np.linalg.norm(e_u)
    e_v = np.cross(e_w, e_u)
    return Frame(e_u, e_v, e_w)


# ---------------------------------------------------------------------------
# JSON sidecar serialization (arrays row-major)
# ---------------------------------------------------------------------------


def trajectory_to_json(trajectory: Trajectory) -> str:
    return json.dumps(
        {
            "n_views": trajectory.n_views,
            "lambdas": trajectory.lambdas.tolist(),
            "positions": trajectory.positions.tolist(),
            "velocities": trajectory.velocities.tolist(),
            "delta_lambda": trajectory.delta_lambda,
        }
    )


def trajectory_from_json(text: str) -> Trajectory:
    d = json.loads(text)
    traj = Trajectory(
        np.asarray(d["lambdas"], dtype=np.float64),
        np.asarray(d["positions"], dtype=np.float64),
        np.asarray(d["velocities"], dtype=np.float64),
        float(d["delta_lambda"]),
    )
    if traj.n_views != d["n_views"]:
        raise ValueError("n_views disagrees with array lengths")
    return traj


def detector_to_json(det: DetectorGeometry) -> str:
    return json.dumps(
        {"n_u": det.n_u, "n_v": det.n_v, "du": det.du, "dv": det.dv, "sdd": det.sdd}
    )


def detector_from_json(text: str) -> DetectorGeometry:
    d = json.loads(text)
    return DetectorGeometry(
        int(d["n_u"]), int(d["n_v"]), float(d["du"]), float(d["dv"]), float(d["sdd"])
    )
