"""Heisenberg-type group structures and exact group operations.

A step-two Carnot group is described in logarithmic coordinates: a point is
a pair (z, t) with z in R^m (first layer) and t in R^k (second layer, the
center).  The structure is encoded by k skew-symmetric m x m matrices
b^s with entries b^s_{ij} = <[e_i, e_j], eps_s>.  The group is of
Heisenberg type when every J_s (the matrix with entry (row j, col i) equal
to b^s_{ij}, i.e. J_s = (b^s)^T) is orthogonal with J_s^2 = -Id and the
J_s pairwise anticommute.

All operations here are pure functions over immutable values and are safe
to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GroupSpec",
    "GroupPoint",
    "HTypeReport",
    "GroupValidationError",
    "build_group",
    "heisenberg",
    "quaternionic",
    "custom_group",
    "validate_htype",
    "identity",
    "point",
    "multiply",
    "inverse",
    "dilate",
    "gauge_norm",
    "j_apply",
    "coords_of",
    "point_of_coords",
    "left_quotient_coords",
]

HTYPE_TOL = 1e-10


class GroupValidationError(ValueError):
    """Raised for malformed structure constants or non-H-type input."""


def _readonly(a):
    a = np.ascontiguousarray(np.asarray(a, dtype=float))
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GroupSpec:
    """An H-type group: layer dimensions and structure constants.

    b has shape (k, m, m) with b[s, i, j] = b^s_{ij}; the homogeneous
    dimension is Q = m + 2k.
    """

    m: int
    k: int
    b: np.ndarray

    def __post_init__(self):
        b = _readonly(self.b)
        if b.shape != (self.k, self.m, self.m):
            raise GroupValidationError(
                f"structure constants must have shape ({self.k}, {self.m}, {self.m}), "
                f"got {b.shape}"
            )
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "_j", _readonly(np.transpose(b, (0, 2, 1))))

    @property
    def Q(self) -> int:
        return self.m + 2 * self.k

    @property
    def dim(self) -> int:
        """Topological dimension m + k (length of a coordinate vector)."""
        return self.m + self.k

    @property
    def j_mats(self) -> np.ndarray:
        """The k matrices J_s = (b^s)^T, shape (k, m, m)."""
        return self._j


@dataclass(frozen=True)
class GroupPoint:
    """A group element in logarithmic coordinates (z, t)."""

    z: np.ndarray
    t: np.ndarray

    def __post_init__(self):
        z = _readonly(self.z)
        t = _readonly(self.t)
        if z.ndim != 1 or t.ndim != 1:
            raise ValueError("z and t must be one-dimensional")
        if not (np.all(np.isfinite(z)) and np.all(np.isfinite(t))):
            raise ValueError("point coordinates must be finite")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "t", t)


@dataclass(frozen=True)
class HTypeReport:
    """Result of checking the H-type conditions on structure constants.

    max_defect is the largest absolute entry over all defect matrices
    (skewness, J_s J_s^T - Id, and J_r J_s + J_s J_r for r != s).
    """

    skew_ok: tuple
    orthogonal_ok: tuple
    anticommute_ok: dict
    max_defect: float
    tol: float = HTYPE_TOL

    @property
    def ok(self) -> bool:
        return self.max_defect <= self.tol


def heisenberg(n: int) -> GroupSpec:
    """The Heisenberg group H^n: m = 2n, k = 1, [e_i, e_{n+i}] = eps_1."""
    if n < 1:
        raise GroupValidationError("heisenberg(n) needs n >= 1")
    m = 2 * n
    b = np.zeros((1, m, m))
    for i in range(n):
        b[0, i, n + i] = 1.0
        b[0, n + i, i] = -1.0
    return GroupSpec(m=m, k=1, b=b)


def quaternionic(n: int) -> GroupSpec:
    """The quaternionic Heisenberg group: m = 4n, k = 3.

    J_1, J_2, J_3 act blockwise on R^{4n} as left multiplication by the
    quaternion units i, j, k on each copy of the quaternions.
    """
    if n < 1:
        raise GroupValidationError("quaternionic(n) needs n >= 1")
    li = np.array([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], float)
    lj = np.array([[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]], float)
    lk = np.array([[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]], float)
    eye = np.eye(n)
    # b^s = J_s^T
    b = np.array([np.kron(eye, L).T for L in (li, lj, lk)])
    return GroupSpec(m=4 * n, k=3, b=b)


def custom_group(b, tol: float = HTYPE_TOL) -> GroupSpec:
    """Build a group from explicit structure constants, rejecting non-H-type input.

    b is a sequence of k square m x m matrices (b[s][i][j] = b^s_{ij}).
    """
    b = np.asarray(b, dtype=float)
    if b.ndim != 3 or b.shape[1] != b.shape[2]:
        raise GroupValidationError(
            f"expected k square matrices of equal size, got shape {b.shape}"
        )
    spec = GroupSpec(m=b.shape[1], k=b.shape[0], b=b)
    report = validate_htype(spec, tol=tol)
    if not report.ok:
        bad = [f"J_{s+1} not skew" for s, v in enumerate(report.skew_ok) if not v]
        bad += [f"J_{s+1} not orthogonal" for s, v in enumerate(report.orthogonal_ok) if not v]
        bad += [
            f"J_{r+1}, J_{s+1} do not anticommute"
            for (r, s), v in report.anticommute_ok.items()
            if not v
        ]
        raise GroupValidationError(
            "structure constants fail the H-type conditions "
            f"(max defect {report.max_defect:.3e}): " + "; ".join(bad)
        )
    return spec


def build_group(kind: str, n: int = 1, b=None) -> GroupSpec:
    """Construct a built-in or custom group by name.

    kind is one of "heisenberg", "quaternionic", "custom"; n selects the
    size of the built-ins and b supplies custom structure constants.
    """
    if kind == "heisenberg":
        return heisenberg(n)
    if kind == "quaternionic":
        return quaternionic(n)
    if kind == "custom":
        if b is None:
            raise GroupValidationError("custom group requires structure constants b")
        return custom_group(b)
    raise GroupValidationError(f"unknown group kind {kind!r}")


def validate_htype(spec: GroupSpec, tol: float = HTYPE_TOL) -> HTypeReport:
    """Check skewness, orthogonality of each J_s, and pairwise anticommutation."""
    b, J, m, k = spec.b, spec.j_mats, spec.m, spec.k
    eye = np.eye(m)
    max_defect = 0.0
    skew = []
    orth = []
    anti = {}
    for s in range(k):
        d_skew = np.abs(b[s] + b[s].T).max()
        d_orth = np.abs(J[s] @ J[s].T - eye).max()
        skew.append(d_skew <= tol)
        orth.append(d_orth <= tol)
        max_defect = max(max_defect, d_skew, d_orth)
    for r in range(k):
        for s in range(r + 1, k):
            d = np.abs(J[r] @ J[s] + J[s] @ J[r]).max()
            anti[(r, s)] = d <= tol
            max_defect = max(max_defect, d)
    return HTypeReport(
        skew_ok=tuple(skew),
        orthogonal_ok=tuple(orth),
        anticommute_ok=anti,
        max_defect=float(max_defect),
        tol=tol,
    )


def identity(spec: GroupSpec) -> GroupPoint:
    return GroupPoint(np.zeros(spec.m), np.zeros(spec.k))


def point(spec: GroupSpec, z, t) -> GroupPoint:
    """Build a point, checking dimensions against the spec."""
    g = GroupPoint(np.atleast_1d(np.asarray(z, float)), np.atleast_1d(np.asarray(t, float)))
    _check_dims(spec, g)
    return g


def _check_dims(spec: GroupSpec, g: GroupPoint):
    if g.z.shape != (spec.m,) or g.t.shape != (spec.k,):
        raise ValueError(
            f"point dimensions ({g.z.shape[0]}, {g.t.shape[0]}) do not match "
            f"group (m={spec.m}, k={spec.k})"
        )


def multiply(spec: GroupSpec, g: GroupPoint, h: GroupPoint) -> GroupPoint:
    """Group product from the step-two Baker-Campbell-Hausdorff formula.

    (z, t) (z', t') = (z + z', t + t' + [z, z']/2) with
    [z, z']_s = sum_{ij} b^s_{ij} z_i z'_j.
    """
    _check_dims(spec, g)
    _check_dims(spec, h)
    brack = np.einsum("sij,i,j->s", spec.b, g.z, h.z)
    return GroupPoint(g.z + h.z, g.t + h.t + 0.5 * brack)


def inverse(g: GroupPoint) -> GroupPoint:
    """(z, t)^{-1} = (-z, -t)."""
    return GroupPoint(-g.z, -g.t)


def dilate(spec: GroupSpec, lam: float, g: GroupPoint) -> GroupPoint:
    """Anisotropic dilation delta_lam(z, t) = (lam z, lam^2 t), lam > 0."""
    _check_dims(spec, g)
    if not lam > 0:
        raise ValueError(f"dilation factor must be positive, got {lam}")
    return GroupPoint(lam * g.z, lam * lam * g.t)


def gauge_norm(g: GroupPoint) -> float:
    """The homogeneous gauge N(z, t) = (|z|^4 + 16 |t|^2)^(1/4)."""
    psi = float(g.z @ g.z)
    chi = float(g.t @ g.t)
    return (psi * psi + 16.0 * chi) ** 0.25


def j_apply(spec: GroupSpec, t, z) -> np.ndarray:
    """J(t) z = sum_s t_s J_s z; characterized by <J(t)z, z'> = <[z, z'], t>."""
    t = np.asarray(t, float)
    z = np.asarray(z, float)
    if t.shape != (spec.k,) or z.shape != (spec.m,):
        raise ValueError(
            f"expected t of length {spec.k} and z of length {spec.m}, "
            f"got {t.shape} and {z.shape}"
        )
    return np.einsum("s,sij,j->i", t, spec.j_mats, z)


# --- coordinate-array helpers used by the quadrature-facing modules ---


def coords_of(g: GroupPoint) -> np.ndarray:
    """Concatenate (z, t) into a single coordinate vector."""
    return np.concatenate([g.z, g.t])


def point_of_coords(spec: GroupSpec, x) -> GroupPoint:
    x = np.asarray(x, float)
    return point(spec, x[: spec.m], x[spec.m :])


def left_quotient_coords(spec: GroupSpec, zp: np.ndarray, tp: np.ndarray, g: GroupPoint):
    """Coordinates of (g')^{-1} g for a batch of points g' = (zp, tp).

    zp has shape (n, m), tp has shape (n, k); returns (Zr, Tr) of the same
    shapes.  Used to evaluate translated kernels u(g) = kernel((g')^{-1} g)
    at many integration nodes g' at once.
    """
    # (-z', -t') (z, t) = (z - z', t - t' - [z', z]/2)
    zr = g.z[None, :] - zp
    mats = np.einsum("sij,j->si", spec.b, g.z)  # (k, m): row s = b^s z
    tr = g.t[None, :] - tp - 0.5 * (zp @ mats.T)
    return zr, tr
