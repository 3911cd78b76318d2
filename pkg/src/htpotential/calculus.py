"""Horizontal calculus: gauge primitives, analytic jets, and a finite-difference oracle.

The left-invariant horizontal frame in logarithmic coordinates is

    X_i = d/dz_i + (1/2) sum_s B_is(g) d/dt_s,   B_is = (J_s z)_i,

and a horizontal jet of a function u collects (u, Xu, (X^2 u)^*) where
(X^2 u)^* is the symmetrized horizontal Hessian u_{,ij} = (X_i X_j u +
X_j X_i u)/2.

The closed-form jets implemented here are built from the gauge primitives

    psi = |z|^2, chi = |t|^2, a = psi^2 + 16 chi = N^4,
    A   = psi z + 4 J(t) z          (so that X N = N^-3 A),

with, for any real exponent q,

    X_i N^q    = q N^(q-4) A_i
    (N^q)_,ij  = q N^(q-8) [ (q-4) A_i A_j + a psi d_ij
                             + 2a (z_i z_j + sum_s B_is B_js) ]
    X_i log N  = N^-4 A_i
    (log N)_,ij= N^-8 [ -4 A_i A_j + a psi d_ij
                        + 2a (z_i z_j + sum_s B_is B_js) ].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .groups import GroupPoint, GroupSpec, coords_of, gauge_norm

__all__ = [
    "HorizontalJet",
    "Primitives",
    "ScalarField",
    "SingularityError",
    "primitives",
    "batch_primitives",
    "analytic_jet",
    "batch_power_jet",
    "batch_log_jet",
    "kernel_field",
    "field_from_coords_fn",
    "field_from_point_fn",
    "fd_jet",
    "commutator_defect",
    "KERNELS",
]

KERNELS = ("psi", "chi", "a", "N", "N_pow", "log_N")

# Calibrated central-difference steps (scaled by max(1, N(g))).  Larger
# steps lose the 1e-6 jet-matching tolerance to truncation for steep
# kernels such as N^-3 near N = 0.5.
FD_STEP_GRAD = 1e-5
FD_STEP_HESS = 3e-5

HESS_SYMMETRY_TOL = 1e-13


class SingularityError(ValueError):
    """Raised when a kernel undefined at the identity is evaluated there."""


@dataclass(frozen=True)
class HorizontalJet:
    """Value, horizontal gradient, and symmetrized horizontal Hessian."""

    value: float
    grad: np.ndarray
    hess: np.ndarray

    def __post_init__(self):
        grad = np.asarray(self.grad, float)
        hess = np.asarray(self.hess, float)
        m = grad.shape[0]
        if hess.shape != (m, m):
            raise ValueError(f"hess must be {m} x {m}, got {hess.shape}")
        asym = np.abs(hess - hess.T).max(initial=0.0)
        scale = np.abs(hess).max(initial=0.0) + 1.0
        if asym > HESS_SYMMETRY_TOL * scale:
            raise ValueError(f"hessian not symmetric (defect {asym:.3e})")
        hess = 0.5 * (hess + hess.T)
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "grad", grad)
        object.__setattr__(self, "hess", hess)

    @property
    def grad_norm(self) -> float:
        return float(np.sqrt(self.grad @ self.grad))


@dataclass(frozen=True)
class Primitives:
    """Gauge primitives at a point.

    a = psi^2 + 16 chi = norm^4; b_mat[i, s] = (J_s z)_i; a_vec = psi z +
    4 J(t) z, satisfying |a_vec|^2 = psi * a on H-type groups.
    """

    psi: float
    chi: float
    a: float
    norm: float
    b_mat: np.ndarray
    a_vec: np.ndarray


class PrimitiveArrays(NamedTuple):
    """Batch of primitives at n points: arrays indexed by the point axis."""

    psi: np.ndarray  # (n,)
    chi: np.ndarray  # (n,)
    a: np.ndarray  # (n,)
    norm: np.ndarray  # (n,)
    jz: np.ndarray  # (n, k, m): jz[:, s] = J_s z
    jtz: np.ndarray  # (n, m): J(t) z
    a_vec: np.ndarray  # (n, m)


def batch_primitives(spec: GroupSpec, z: np.ndarray, t: np.ndarray) -> PrimitiveArrays:
    """Vectorized gauge primitives for points given as rows of z (n, m), t (n, k)."""
    psi = np.einsum("ni,ni->n", z, z)
    chi = np.einsum("ns,ns->n", t, t)
    a = psi * psi + 16.0 * chi
    norm = a**0.25
    jz = np.einsum("sij,nj->nsi", spec.j_mats, z)
    jtz = np.einsum("ns,nsi->ni", t, jz)
    a_vec = psi[:, None] * z + 4.0 * jtz
    return PrimitiveArrays(psi, chi, a, norm, jz, jtz, a_vec)


def primitives(spec: GroupSpec, g: GroupPoint) -> Primitives:
    """Gauge primitives at a single point."""
    pa = batch_primitives(spec, g.z[None, :], g.t[None, :])
    return Primitives(
        psi=float(pa.psi[0]),
        chi=float(pa.chi[0]),
        a=float(pa.a[0]),
        norm=float(pa.norm[0]),
        b_mat=pa.jz[0].T.copy(),
        a_vec=pa.a_vec[0].copy(),
    )


def _hess_core(pa: PrimitiveArrays, z: np.ndarray) -> np.ndarray:
    """The shared Hessian building block a psi d_ij + 2a (z z^T + sum_s B_s B_s^T)."""
    n, m = z.shape
    zz = np.einsum("ni,nj->nij", z, z)
    bb = np.einsum("nsi,nsj->nij", pa.jz, pa.jz)
    core = 2.0 * pa.a[:, None, None] * (zz + bb)
    idx = np.arange(m)
    core[:, idx, idx] += (pa.a * pa.psi)[:, None]
    return core


def batch_power_jet(spec: GroupSpec, z: np.ndarray, t: np.ndarray, q: float):
    """Vectorized jet of N^q at rows of (z, t); no points may be the identity
    unless q >= 4.

    Returns (value (n,), grad (n, m), hess (n, m, m)).
    """
    pa = batch_primitives(spec, z, t)
    with np.errstate(divide="ignore", invalid="ignore"):
        value = pa.norm**q
        grad = (q * pa.norm ** (q - 4.0))[:, None] * pa.a_vec
        core = _hess_core(pa, z)
        aa = np.einsum("ni,nj->nij", pa.a_vec, pa.a_vec)
        hess = (q * pa.norm ** (q - 8.0))[:, None, None] * ((q - 4.0) * aa + core)
    at_id = pa.norm == 0.0
    if np.any(at_id):
        if q < 4.0:
            raise SingularityError(f"N^{q} jet undefined at the identity")
        # q >= 4: every term carries a positive power of the vanishing coordinates
        value[at_id] = 0.0
        grad[at_id] = 0.0
        hess[at_id] = 0.0
    return value, grad, hess


def batch_log_jet(spec: GroupSpec, z: np.ndarray, t: np.ndarray):
    """Vectorized jet of log N; raises at the identity."""
    pa = batch_primitives(spec, z, t)
    if np.any(pa.norm == 0.0):
        raise SingularityError("log N jet undefined at the identity")
    value = np.log(pa.norm)
    grad = pa.norm[:, None] ** -4.0 * pa.a_vec
    core = _hess_core(pa, z)
    aa = np.einsum("ni,nj->nij", pa.a_vec, pa.a_vec)
    hess = pa.norm[:, None, None] ** -8.0 * (core - 4.0 * aa)
    return value, grad, hess


def analytic_jet(spec: GroupSpec, g: GroupPoint, kernel: str, q: Optional[float] = None) -> HorizontalJet:
    """Closed-form horizontal jet of a gauge kernel at g.

    kernel is one of "psi", "chi", "a", "N", "N_pow" (requires q), "log_N".
    Kernels undefined at the identity (N, N_pow with q < 4, log_N) raise
    SingularityError there.
    """
    if kernel not in KERNELS:
        raise ValueError(f"unknown kernel {kernel!r}; expected one of {KERNELS}")
    z1 = g.z[None, :]
    t1 = g.t[None, :]
    m = spec.m
    if kernel == "psi":
        return HorizontalJet(float(g.z @ g.z), 2.0 * g.z, 2.0 * np.eye(m))
    if kernel == "chi":
        pa = batch_primitives(spec, z1, t1)
        bb = np.einsum("nsi,nsj->nij", pa.jz, pa.jz)[0]
        return HorizontalJet(float(pa.chi[0]), pa.jtz[0], 0.5 * bb)
    if kernel == "a":
        pa = batch_primitives(spec, z1, t1)
        zz = np.outer(g.z, g.z)
        bb = np.einsum("nsi,nsj->nij", pa.jz, pa.jz)[0]
        hess = 4.0 * pa.psi[0] * np.eye(m) + 8.0 * (zz + bb)
        return HorizontalJet(float(pa.a[0]), 4.0 * pa.a_vec[0], hess)
    if kernel == "N":
        kernel, q = "N_pow", 1.0
    if kernel == "N_pow":
        if q is None:
            raise ValueError("kernel N_pow requires the exponent q")
        value, grad, hess = batch_power_jet(spec, z1, t1, float(q))
        return HorizontalJet(float(value[0]), grad[0], hess[0])
    value, grad, hess = batch_log_jet(spec, z1, t1)
    return HorizontalJet(float(value[0]), grad[0], hess[0])


@dataclass(frozen=True)
class ScalarField:
    """A scalar function of group points, evaluated on coordinate batches.

    evaluate maps an (n, m+k) array of coordinate rows to an (n,) array.
    jet, when present, returns the analytic horizontal jet at a point; tests
    enforce agreement between the two, construction does not.
    """

    evaluate: Callable[[np.ndarray], np.ndarray]
    jet: Optional[Callable[[GroupPoint], HorizontalJet]] = None


def field_from_coords_fn(fn) -> ScalarField:
    return ScalarField(evaluate=fn)


def field_from_point_fn(spec: GroupSpec, fn) -> ScalarField:
    """Wrap a pointwise GroupPoint -> float map; evaluation loops over rows."""

    def evaluate(x):
        x = np.asarray(x, float)
        return np.array([fn(GroupPoint(row[: spec.m], row[spec.m :])) for row in x])

    return ScalarField(evaluate=evaluate)


def kernel_field(spec: GroupSpec, kernel: str, q: Optional[float] = None) -> ScalarField:
    """A ScalarField for one of the named gauge kernels, with its analytic jet."""

    def evaluate(x):
        x = np.asarray(x, float)
        z, t = x[:, : spec.m], x[:, spec.m :]
        pa = batch_primitives(spec, z, t)
        if kernel == "psi":
            return pa.psi
        if kernel == "chi":
            return pa.chi
        if kernel == "a":
            return pa.a
        if kernel == "N":
            return pa.norm
        if kernel == "N_pow":
            return pa.norm ** float(q)
        if kernel == "log_N":
            return np.log(pa.norm)
        raise ValueError(f"unknown kernel {kernel!r}")

    return ScalarField(evaluate=evaluate, jet=lambda g: analytic_jet(spec, g, kernel, q))


def _frame_rows(spec: GroupSpec, z: np.ndarray) -> np.ndarray:
    """E with X_i = sum_d E[i, d] d/dx_d at a point with first-layer part z."""
    m, k = spec.m, spec.k
    e = np.zeros((m, m + k))
    e[:, :m] = np.eye(m)
    e[:, m:] = 0.5 * np.einsum("sij,j->is", spec.j_mats, z)  # B_is / 2... B[:, s] = J_s z
    return e


def _coord_partials(field: ScalarField, x0: np.ndarray, h: float) -> np.ndarray:
    """Central-difference coordinate partials of the field at x0."""
    d = x0.shape[0]
    pts = np.repeat(x0[None, :], 2 * d, axis=0)
    idx = np.arange(d)
    pts[2 * idx, idx] += h
    pts[2 * idx + 1, idx] -= h
    vals = np.asarray(field.evaluate(pts), float)
    return (vals[0::2] - vals[1::2]) / (2.0 * h)


def _fd_grad_at(field: ScalarField, spec: GroupSpec, x0: np.ndarray, h: float) -> np.ndarray:
    partials = _coord_partials(field, x0, h)
    return _frame_rows(spec, x0[: spec.m]) @ partials


def _fd_xixj(spec: GroupSpec, field: ScalarField, g: GroupPoint, h: float) -> np.ndarray:
    """Nested central-difference estimate of the raw matrix X_i X_j field(g)."""
    x0 = coords_of(g)
    d = x0.shape[0]
    dv = np.zeros((d, spec.m))
    for axis in range(d):
        xp = x0.copy()
        xp[axis] += h
        xm = x0.copy()
        xm[axis] -= h
        dv[axis] = (_fd_grad_at(field, spec, xp, h) - _fd_grad_at(field, spec, xm, h)) / (2.0 * h)
    return _frame_rows(spec, g.z) @ dv


def fd_jet(
    spec: GroupSpec,
    field: ScalarField,
    g: GroupPoint,
    h: Optional[float] = None,
    h_hess: Optional[float] = None,
) -> HorizontalJet:
    """Finite-difference horizontal jet, the oracle for the analytic formulas.

    The first-order operator X_i = d/dz_i + (1/2) sum_s B_is d/dt_s is
    applied with central differences; second derivatives use one nested
    application with the frame coefficients re-evaluated at the shifted
    points, then symmetrization.  Steps default to FD_STEP_GRAD and
    FD_STEP_HESS times max(1, N(g)); the field must be evaluable in a
    coordinate ball of radius about 2 h (1 + |z|) around g.
    """
    scale = max(1.0, gauge_norm(g))
    h1 = FD_STEP_GRAD * scale if h is None else float(h)
    h2 = FD_STEP_HESS * scale if h_hess is None else float(h_hess)
    x0 = coords_of(g)
    value = float(np.asarray(field.evaluate(x0[None, :]), float)[0])
    grad = _fd_grad_at(field, spec, x0, h1)
    raw = _fd_xixj(spec, field, g, h2)
    hess = 0.5 * (raw + raw.T)
    return HorizontalJet(value, grad, hess)


def commutator_defect(
    spec: GroupSpec,
    field: ScalarField,
    g: GroupPoint,
    i: int,
    j: int,
    h: Optional[float] = None,
) -> float:
    """Finite-difference residual of [X_i, X_j] f = sum_s b^s_{ij} d f / d t_s.

    Returns (X_i X_j - X_j X_i) f(g) - sum_s b^s_{ij} (d f / d t_s)(g); for
    smooth fields the result is dominated by discretization error.
    """
    if i == j:
        raise ValueError("commutator defect needs i != j")
    scale = max(1.0, gauge_norm(g))
    h2 = FD_STEP_HESS * scale if h is None else float(h)
    raw = _fd_xixj(spec, field, g, h2)
    t_partials = _coord_partials(field, coords_of(g), h2)[spec.m :]
    expected = float(spec.b[:, i, j] @ t_partials)
    return float(raw[i, j] - raw[j, i] - expected)
