"""Sub-Laplacian, horizontal p-Laplacian and infinity-Laplacian on jets,
with the singular fundamental-solution machinery.

On a jet (u, Xu, (X^2 u)^*):

    L u        = trace (X^2 u)^*
    L_inf u    = <(X^2 u)^* Xu, Xu>
    L_p u      = |Xu|^(p-2) L u + (p-2) |Xu|^(p-4) L_inf u,   p > 2.

For p > 2 every term vanishes as |Xu| -> 0, so at critical points L_p is
taken to be zero (the convention below).  The singular solutions are pure
powers of the gauge norm: N^((p-Q)/(p-1)) for p != Q, log N for p = Q,
normalized through sigma_p = Q omega_p with omega_p the integral of
|XN|^p = (psi/N^2)^(p/2) over the unit gauge ball.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .calculus import HorizontalJet, SingularityError, analytic_jet
from .groups import GroupPoint, GroupSpec, gauge_norm, inverse, multiply
from .quadrature import (
    IntegralResult,
    QuadratureConfig,
    QuadratureNotConverged,
    integrate_gauge_ball,
)

__all__ = [
    "OperatorSelector",
    "FundamentalSolutionParams",
    "CRITICAL_GRAD_RTOL",
    "sub_laplacian",
    "infinity_laplacian",
    "p_laplacian",
    "apply_operator",
    "omega_sigma",
    "gauge_ball_volume",
    "gamma_p",
    "harmonicity_residuals",
    "residual_scale",
]

# |Xu| below this times (1 + ||hess||) counts as a critical point
CRITICAL_GRAD_RTOL = 1e-12


@dataclass(frozen=True)
class OperatorSelector:
    """Selects one of sub_laplacian, p_laplacian (p > 2), infinity_laplacian."""

    kind: str
    p: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("sub_laplacian", "p_laplacian", "infinity_laplacian"):
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if self.kind == "p_laplacian":
            if self.p is None or not self.p > 2:
                raise ValueError("p_laplacian requires p > 2")
        elif self.p is not None:
            raise ValueError(f"{self.kind} takes no exponent")


@dataclass(frozen=True)
class FundamentalSolutionParams:
    """Normalization constants for the singular p-harmonic solutions."""

    p: float
    omega_p: float
    sigma_p: float
    omega_error: float = 0.0

    def __post_init__(self):
        if not self.omega_p > 0:
            raise ValueError("omega_p must be positive")


def sub_laplacian(jet: HorizontalJet) -> float:
    return float(np.trace(jet.hess))


def infinity_laplacian(jet: HorizontalJet) -> float:
    return float(jet.grad @ jet.hess @ jet.grad)


def p_laplacian(jet: HorizontalJet, p: float) -> float:
    if not p > 2:
        raise ValueError("p_laplacian requires p > 2")
    gn = jet.grad_norm
    hess_scale = float(np.abs(jet.hess).max(initial=0.0))
    if gn <= CRITICAL_GRAD_RTOL * (1.0 + hess_scale):
        return 0.0
    return gn ** (p - 2.0) * sub_laplacian(jet) + (p - 2.0) * gn ** (p - 4.0) * infinity_laplacian(jet)


def apply_operator(spec: GroupSpec, jet: HorizontalJet, sel: OperatorSelector) -> float:
    """Evaluate the selected operator on a jet."""
    if jet.grad.shape != (spec.m,):
        raise ValueError(f"jet dimension {jet.grad.shape[0]} does not match group m={spec.m}")
    if sel.kind == "sub_laplacian":
        return sub_laplacian(jet)
    if sel.kind == "infinity_laplacian":
        return infinity_laplacian(jet)
    return p_laplacian(jet, sel.p)


def _grad_norm_power_integrand(spec: GroupSpec, p: float):
    def f(x):
        z = x[:, : spec.m]
        t = x[:, spec.m :]
        psi = np.einsum("ni,ni->n", z, z)
        chi = np.einsum("ns,ns->n", t, t)
        n2 = np.sqrt(psi * psi + 16.0 * chi)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(n2 > 0.0, psi / n2, 0.0)
        return ratio ** (p / 2.0)

    return f


def gauge_ball_volume(spec: GroupSpec, config: QuadratureConfig, radius: float = 1.0) -> IntegralResult:
    """Volume of the gauge ball {N < radius}; scales as radius^Q."""
    one = lambda x: np.ones(x.shape[0])
    return integrate_gauge_ball(spec, one, config, radius=radius)


def omega_sigma(spec: GroupSpec, p: float, quad: QuadratureConfig) -> FundamentalSolutionParams:
    """Compute omega_p (gauge-ball integral of |XN|^p) and sigma_p = Q omega_p.

    The integrand (psi/N^2)^(p/2) is bounded by 1 but loses smoothness at
    the identity, so the origin is refined as a declared singular point.
    Raises QuadratureNotConverged if the tolerance cannot be certified.
    """
    if not p > 2:
        raise ValueError("omega_sigma requires p > 2")
    origin = np.zeros(spec.dim)
    res = integrate_gauge_ball(
        spec, _grad_norm_power_integrand(spec, p), quad, singular_points=[origin]
    )
    if not res.converged:
        raise QuadratureNotConverged(res, f"omega_{p:g} did not converge")
    return FundamentalSolutionParams(
        p=float(p),
        omega_p=res.value,
        sigma_p=spec.Q * res.value,
        omega_error=res.error_estimate,
    )


def gamma_p(
    spec: GroupSpec,
    params: FundamentalSolutionParams,
    g: GroupPoint,
    gp: GroupPoint,
) -> float:
    """Singular p-harmonic kernel at (g, g'); symmetric and singular on the diagonal.

        gamma_p = -((p-1)/(Q-p)) sigma_p^(-1/(p-1)) N(g^-1 g')^((p-Q)/(p-1)),  p != Q
        gamma_Q = -sigma_Q^(-1/(Q-1)) log N(g^-1 g')
    """
    p, Q = params.p, spec.Q
    n = gauge_norm(multiply(spec, inverse(g), gp))
    if n == 0.0:
        raise SingularityError("gamma_p is singular at g = g'")
    if p == Q:
        return -params.sigma_p ** (-1.0 / (Q - 1.0)) * math.log(n)
    return -((p - 1.0) / (Q - p)) * params.sigma_p ** (-1.0 / (p - 1.0)) * n ** ((p - Q) / (p - 1.0))


def residual_scale(jet: HorizontalJet, p: float) -> float:
    """Local magnitude of the individual terms entering L_p on a jet.

    Dividing a residual by this makes "approximately zero" meaningful
    across gauge scales.
    """
    hess_fro = float(np.sqrt(np.sum(jet.hess * jet.hess)))
    gn = jet.grad_norm
    if p == math.inf:
        return gn * gn * hess_fro + 1e-300
    return max(p - 1.0, 1.0) * gn ** (p - 2.0) * hess_fro + 1e-300


def harmonicity_residuals(
    spec: GroupSpec,
    p: float,
    pole: GroupPoint,
    samples: Sequence[GroupPoint],
) -> list[float]:
    """Scale-normalized L_p residuals of the singular solution with the given pole.

    The solution is N(pole^-1 g)^((p-Q)/(p-1)) for p != Q and
    log N(pole^-1 g) for p = Q; by left invariance its jet at g is the
    kernel jet at pole^-1 g.  Residuals should vanish to rounding.
    """
    Q = spec.Q
    out = []
    for g in samples:
        rel = multiply(spec, inverse(pole), g)
        if gauge_norm(rel) == 0.0:
            raise SingularityError("sample coincides with the pole")
        if p == Q:
            jet = analytic_jet(spec, rel, "log_N")
        else:
            jet = analytic_jet(spec, rel, "N_pow", q=(p - Q) / (p - 1.0))
        value = p_laplacian(jet, p)
        out.append(value / residual_scale(jet, p))
    return out
