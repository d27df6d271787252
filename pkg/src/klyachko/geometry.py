"""Pentagram on the circle of the unit sphere where pentagram edges are orthogonal.

Vertex ``k`` (1-based) sits at azimuth ``4*pi*(k-1)/5`` and height ``5**-0.25``,
so consecutive labels are the pentagram edges (12, 23, 34, 45, 51) and labels two
apart are the pentagon edges (14, 42, 25, 53, 31).  The state ``psi`` is the
north pole.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import DEFAULT_TOL, check_unit, check_vertex

PENTAGRAM_EDGES = ((1, 2), (2, 3), (3, 4), (4, 5), (5, 1))
PENTAGON_EDGES = ((1, 4), (4, 2), (2, 5), (5, 3), (3, 1))

GOLDEN_CONJUGATE = (math.sqrt(5.0) - 1.0) / 2.0


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class PentagramFrame:
    """The five vertex directions, the state direction and the derived scalars.

    Attributes
    ----------
    vertices : ndarray, shape (5, 3)
        Unit vectors ``|1>..|5>``; row ``k-1`` is vertex ``k``.
    psi : ndarray, shape (3,)
        Unit vector through the centre ``P`` of the circle.
    r : float
        Length of ``OP``.
    s : float
        Distance from ``P`` to any vertex.
    phi : float
        Angle between ``psi`` and any vertex.
    chi : float
        Angle between two vertices joined by a pentagon edge.
    """

    vertices: np.ndarray
    psi: np.ndarray
    r: float
    s: float
    phi: float
    chi: float

    def vertex(self, label: int) -> np.ndarray:
        return self.vertices[check_vertex(label)]


@dataclass(frozen=True)
class ContextBasis:
    """One measurement context: a pentagram edge plus its orthogonal completion."""

    edge_label: tuple[int, int]
    triple: np.ndarray  # rows: vertex a, vertex b, completion

    @property
    def completion(self) -> np.ndarray:
        return self.triple[2]


def build_pentagram() -> PentagramFrame:
    height = 5.0 ** -0.25
    radius = math.sqrt(1.0 - height * height)
    az = 4.0 * math.pi * np.arange(5) / 5.0
    vertices = np.column_stack([radius * np.cos(az), radius * np.sin(az), np.full(5, height)])
    psi = np.array([0.0, 0.0, 1.0])
    phi = angle_between(psi, vertices[0])
    chi = angle_between(vertices[0], vertices[2])
    return PentagramFrame(
        vertices=_frozen(vertices),
        psi=_frozen(psi),
        r=height,
        s=radius,
        phi=phi,
        chi=chi,
    )


def angle_between(u, v, tol: float = DEFAULT_TOL) -> float:
    """Angle in ``[0, pi]`` between two unit vectors."""
    u = check_unit(u, tol, "u")
    v = check_unit(v, tol, "v")
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch: {u.shape} vs {v.shape}")
    return math.acos(min(1.0, max(-1.0, float(u @ v))))


def context_bases(frame: PentagramFrame, tol: float = DEFAULT_TOL) -> list[ContextBasis]:
    bases = []
    for a, b in PENTAGRAM_EDGES:
        va, vb = frame.vertex(a), frame.vertex(b)
        cross = np.cross(va, vb)
        norm = float(np.linalg.norm(cross))
        # for orthonormal va, vb the cross product is already unit length
        if abs(norm - 1.0) > math.sqrt(tol):
            raise ValueError(f"degenerate context {a}{b}: |v{a} x v{b}| = {norm:.3e}")
        bases.append(ContextBasis((a, b), _frozen(np.stack([va, vb, cross / norm]))))
    return bases


def rotate_z(vectors, angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return np.asarray(vectors, dtype=float) @ rot.T


def frame_residuals(frame: PentagramFrame) -> dict[str, float]:
    """Worst-case deviation of each exact identity the frame should satisfy."""
    v = frame.vertices
    inv_sqrt5 = 1.0 / math.sqrt(5.0)
    s_closed = 1.0 / (math.sqrt(2.0) * math.cos(math.pi / 10.0))
    rolled = np.roll(v, -1, axis=0)
    skip = np.roll(v, -2, axis=0)
    gram_err = max(
        float(np.max(np.abs(b.triple @ b.triple.T - np.eye(3)))) for b in context_bases(frame)
    )
    cyc = rotate_z(v, 4.0 * math.pi / 5.0)
    return {
        "unit_norm": float(np.max(np.abs(np.linalg.norm(v, axis=1) - 1.0))),
        "pentagram_orthogonality": float(np.max(np.abs(np.sum(v * rolled, axis=1)))),
        "psi_overlap_sq": float(np.max(np.abs((v @ frame.psi) ** 2 - inv_sqrt5))),
        "pentagon_overlap": float(np.max(np.abs(np.sum(v * skip, axis=1) - GOLDEN_CONJUGATE))),
        "cos_chi": abs(math.cos(frame.chi) - GOLDEN_CONJUGATE),
        "s_closed_form": abs(frame.s - s_closed),
        "r2_plus_s2": abs(frame.r**2 + frame.s**2 - 1.0),
        "cos_phi_eq_r": abs(math.cos(frame.phi) - frame.r),
        "context_gram": gram_err,
        "cyclic_symmetry": float(np.max(np.abs(cyc - rolled))),
    }
