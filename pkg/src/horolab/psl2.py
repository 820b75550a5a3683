"""Exact algebra of PSL(2,R).

Elements are real 2x2 matrices of determinant 1 modulo global sign. Every
constructor and product renormalizes the determinant and canonicalizes the
sign (first nonzero entry in (a,b,c,d) order made positive), so equality
testing is deterministic. One-parameter subgroups:

    flow "U"     lower-triangular-free shear  [[1, t], [0, 1]]   (contracting horocycle)
    flow "Uplus" opposite shear               [[1, 0], [t, 1]]   (expanding horocycle)
    flow "A"     diagonal                     [[e^{s/2}, 0], [0, e^{-s/2}]]  (geodesic)

A batch layer operating on ndarrays of shape (..., 2, 2) backs the heavy
Monte-Carlo paths elsewhere in the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GroupElement",
    "TimeChange",
    "SingularTimeError",
    "make_flow",
    "identity",
    "compose",
    "inverse",
    "dist_id",
    "dist",
    "change_of_time",
    "conjugate_by_u",
    "mobius_act",
]

DET_TOL = 1e-12

FLOW_KINDS = ("U", "Uplus", "A")


class SingularTimeError(ValueError):
    """Change-of-time denominator 1 - e^{-s} r t is numerically zero."""


def _canonical(mat: np.ndarray) -> np.ndarray:
    """Renormalize to det 1 and make the first nonzero of (a,b,c,d) positive."""
    det = mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]
    if not math.isfinite(det) or det <= 0:
        raise ValueError(f"matrix is not in SL(2,R) up to scale (det={det})")
    out = mat / math.sqrt(det)
    flat = out.reshape(4)
    for v in flat:
        if abs(v) > 1e-14:
            if v < 0:
                out = -out
            break
    out = np.array(out, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class GroupElement:
    """An element of PSL(2,R); immutable, canonicalized on construction."""

    mat: np.ndarray

    def __init__(self, mat) -> None:
        m = np.asarray(mat, dtype=float)
        if m.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
        object.__setattr__(self, "mat", _canonical(m))

    @property
    def a(self) -> float:
        return float(self.mat[0, 0])

    @property
    def b(self) -> float:
        return float(self.mat[0, 1])

    @property
    def c(self) -> float:
        return float(self.mat[1, 0])

    @property
    def d(self) -> float:
        return float(self.mat[1, 1])

    def trace(self) -> float:
        return float(self.mat[0, 0] + self.mat[1, 1])

    def inverse(self) -> "GroupElement":
        m = self.mat
        return GroupElement([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.mat @ other.mat)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupElement):
            return NotImplemented
        d = self.mat - other.mat
        s = self.mat + other.mat
        return min(float(np.abs(d).max()), float(np.abs(s).max())) < 1e-9

    def __hash__(self):
        raise TypeError("GroupElement is unhashable (equality is modulo sign and tolerance)")

    def __repr__(self) -> str:
        m = self.mat
        return f"GroupElement([[{m[0,0]:.12g}, {m[0,1]:.12g}], [{m[1,0]:.12g}, {m[1,1]:.12g}]])"


@dataclass(frozen=True)
class TimeChange:
    """Reparametrized time beta and the correction element gee."""

    beta: float
    gee: GroupElement


def identity() -> GroupElement:
    return GroupElement(np.eye(2))


def make_flow(kind: str, t: float) -> GroupElement:
    """Element of the one-parameter subgroup `kind` at time t."""
    if kind not in FLOW_KINDS:
        raise ValueError(f"unknown flow kind {kind!r}; expected one of {FLOW_KINDS}")
    t = float(t)
    if not math.isfinite(t):
        raise ValueError(f"flow time must be finite, got {t}")
    if kind == "U":
        return GroupElement([[1.0, t], [0.0, 1.0]])
    if kind == "Uplus":
        return GroupElement([[1.0, 0.0], [t, 1.0]])
    e = math.exp(t / 2.0)
    return GroupElement([[e, 0.0], [0.0, 1.0 / e]])


def compose(g: GroupElement, h: GroupElement) -> GroupElement:
    return g @ h


def inverse(g: GroupElement) -> GroupElement:
    return g.inverse()


def dist_id(g: GroupElement) -> float:
    """min(||g - I||_F, ||g + I||_F); zero iff g = +-I.

    Surrogate for the left-invariant metric's distance to the identity; the
    claims consuming it are order-of-magnitude only.
    """
    m = g.mat
    dm = float(np.linalg.norm(m - np.eye(2)))
    dp = float(np.linalg.norm(m + np.eye(2)))
    return min(dm, dp)


def dist(g: GroupElement, h: GroupElement) -> float:
    return dist_id(g @ h.inverse())


def change_of_time(s: float, r: float, t: float) -> TimeChange:
    """Split the perturbed horocycle element into horocycle times correction.

    Returns (beta, gee) with  u+_{-e^{-s} r} u_t  =  u_beta * gee,
    beta = t / (1 - e^{-s} r t).
    """
    q = math.exp(-s) * r
    den = 1.0 - q * t
    if abs(den) <= 1e-9:
        raise SingularTimeError(f"singular time: 1 - e^-s r t = {den:.3e}")
    beta = t / den
    gee = GroupElement([[1.0 / den, 0.0], [-q, den]])
    return TimeChange(beta=beta, gee=gee)


def conjugate_by_u(g: GroupElement, t: float) -> GroupElement:
    """u_{-t} g u_t in closed form; the bottom-left entry is invariant."""
    x, y, z, w = g.a, g.b, g.c, g.d
    return GroupElement(
        [[x - t * z, y + t * (x - w) - t * t * z], [z, w + t * z]]
    )


def mobius_act(g: GroupElement, z: complex) -> complex:
    """Action on the upper half-plane, (az+b)/(cz+d)."""
    z = complex(z)
    if z.imag <= 0:
        raise ValueError(f"point must lie in the upper half-plane, got {z}")
    m = g.mat
    return (m[0, 0] * z + m[0, 1]) / (m[1, 0] * z + m[1, 1])


# ---------------------------------------------------------------------------
# batch layer: raw ndarray kernels used by the flow/joining harnesses
# ---------------------------------------------------------------------------


def batch_renorm(mats: np.ndarray) -> np.ndarray:
    """Divide a (..., 2, 2) stack by sqrt(det) in place-compatible fashion."""
    det = mats[..., 0, 0] * mats[..., 1, 1] - mats[..., 0, 1] * mats[..., 1, 0]
    return mats / np.sqrt(det)[..., None, None]


def batch_flow(kind: str, t: float) -> np.ndarray:
    return np.array(make_flow(kind, t).mat)


def batch_mobius_i(mats: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(x, y) coordinates of m.i for a det-1 stack; y = 1/(c^2 + d^2)."""
    a = mats[..., 0, 0]
    b = mats[..., 0, 1]
    c = mats[..., 1, 0]
    d = mats[..., 1, 1]
    den = c * c + d * d
    return (a * c + b * d) / den, 1.0 / den


def batch_frame_angle(mats: np.ndarray) -> np.ndarray:
    """Frame angle of the unit tangent vector carried by each element.

    For g.(i, up) the tangent direction at g.i is rotated by -2 arg(ci + d).
    """
    c = mats[..., 1, 0]
    d = mats[..., 1, 1]
    return np.mod(-2.0 * np.arctan2(c, d), 2.0 * np.pi)
