"""Certified adaptive tensor Gauss-Legendre cubature over coordinate boxes.

Integrands are callables f(points) -> values where points is an (n, d)
array of coordinate rows and values is an (n,) array (or (n, c) for the
vector-valued engine, which integrates several components in one adaptive
pass).  Per-cell error is estimated by comparing nested rules of order g
and g + 2; cells are refined dyadically (all axes halved), worst error
first, with a fixed traversal and summation order so identical inputs give
bit-identical results.

Declared singular points are made cell corners by pre-splitting, refined to
singular_refine_depth mandatorily, and may be refined up to
singular_refine_depth extra levels beyond max_depth; Gauss nodes are
interior, so the singularity itself is never evaluated.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from .groups import GroupPoint, GroupSpec, coords_of

__all__ = [
    "QuadratureConfig",
    "IntegralResult",
    "VectorIntegralResult",
    "Box",
    "QuadratureNotConverged",
    "integrate_adaptive",
    "integrate_vector",
    "integrate_gauge_ball",
    "pointwise_integrand",
]

DEFAULT_MAX_CELLS = 200_000


class QuadratureNotConverged(RuntimeError):
    """Raised by callers that require a converged integral and did not get one."""

    def __init__(self, result, msg="quadrature failed to certify the requested tolerance"):
        super().__init__(msg)
        self.result = result


@dataclass(frozen=True)
class QuadratureConfig:
    gauss_order: int = 4
    rel_tol: float = 1e-4
    abs_tol: float = 1e-12
    max_depth: int = 12
    singular_refine_depth: int = 8
    max_cells: int = DEFAULT_MAX_CELLS

    def __post_init__(self):
        if self.gauss_order < 2:
            raise ValueError("gauss_order must be at least 2")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not (self.max_depth >= self.singular_refine_depth >= 0):
            raise ValueError("need max_depth >= singular_refine_depth >= 0")
        if self.max_cells < 1:
            raise ValueError("max_cells must be positive")


@dataclass(frozen=True)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, float)
        hi = np.asarray(self.upper, float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("box bounds must be 1-d arrays of equal length")
        if not np.all(lo < hi):
            raise ValueError("box needs lower < upper componentwise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @property
    def volume(self) -> float:
        return float(np.prod(self.upper - self.lower))


@dataclass(frozen=True)
class IntegralResult:
    value: float
    error_estimate: float
    cells_used: int
    converged: bool


@dataclass(frozen=True)
class VectorIntegralResult:
    values: np.ndarray
    errors: np.ndarray
    cells_used: int
    converged: bool

    def scalar(self) -> IntegralResult:
        if self.values.shape != (1,):
            raise ValueError("not a single-component result")
        return IntegralResult(
            float(self.values[0]), float(self.errors[0]), self.cells_used, self.converged
        )


@lru_cache(maxsize=None)
def _gauss_rule(order: int):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


@lru_cache(maxsize=None)
def _tensor_rule(order: int, dim: int):
    nodes1, w1 = _gauss_rule(order)
    grids = np.meshgrid(*([nodes1] * dim), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    wts = np.ones(pts.shape[0])
    for axis in range(dim):
        wts *= np.meshgrid(*([w1] * dim), indexing="ij")[axis].ravel()
    pts.setflags(write=False)
    wts.setflags(write=False)
    return pts, wts


def _presplit(lower, upper, points):
    """Split a box at each listed point so points end up at cell corners."""
    boxes = [(lower, upper)]
    for p in points:
        new_boxes = []
        for lo, hi in boxes:
            if np.any(p < lo) or np.any(p > hi):
                new_boxes.append((lo, hi))
                continue
            cuts = [(lo[d], p[d], hi[d]) if lo[d] < p[d] < hi[d] else None for d in range(len(lo))]
            if all(c is None for c in cuts):
                new_boxes.append((lo, hi))
                continue
            pieces = [[]]
            for d, c in enumerate(cuts):
                if c is None:
                    pieces = [piece + [(lo[d], hi[d])] for piece in pieces]
                else:
                    pieces = [piece + [(c[0], c[1])] for piece in pieces] + [
                        piece + [(c[1], c[2])] for piece in pieces
                    ]
            for piece in pieces:
                plo = np.array([iv[0] for iv in piece])
                phi = np.array([iv[1] for iv in piece])
                new_boxes.append((plo, phi))
        boxes = new_boxes
    return boxes


def _touches(lo, hi, points) -> bool:
    for p in points:
        if np.all(p >= lo) and np.all(p <= hi):
            return True
    return False


class _CellEval:
    __slots__ = ("vals", "errs", "force_split", "split_axes", "axis_variation")

    def __init__(self, vals, errs, force_split=False, split_axes=None, axis_variation=None):
        self.vals = vals
        self.errs = errs
        self.force_split = force_split
        self.split_axes = split_axes  # None: no explicit restriction
        self.axis_variation = axis_variation  # per-axis integrand variation


def _adaptive_loop(f_eval, root_boxes, config, singular_points, dim, zdim=None,
                   shared_scale=False):
    """Shared refinement loop.

    f_eval(lo, hi, depth) returns a _CellEval or None for cells that are
    exactly zero (outside an indicator's support).  When zdim is given,
    coordinates beyond it scale quadratically under dilations, and cells
    touching a singular point split those axes into quarters so that one
    refinement level halves the gauge size of the cell.
    """
    leaves = {}
    heap = []
    seq = 0
    n_eval_cells = 0
    aborted = False
    must_count = 0
    run_vals = None
    run_errs = None
    final_errs = None  # error locked in cells at their depth limit

    def admit(lo, hi, depth):
        nonlocal seq, n_eval_cells, must_count, run_vals, run_errs, final_errs
        ev = f_eval(lo, hi, depth)
        if ev is None:
            return
        sing = _touches(lo, hi, singular_points)
        limit = config.max_depth + (config.singular_refine_depth if sing else 0)
        must = (ev.force_split or (sing and depth < config.singular_refine_depth)) and depth < limit
        rec = dict(lo=lo, hi=hi, depth=depth, vals=ev.vals, errs=ev.errs,
                   must=must, limit=limit, axes=ev.split_axes, sing=sing,
                   var=ev.axis_variation)
        leaves[seq] = rec
        if must:
            must_count += 1
        if run_vals is None:
            run_vals = ev.vals.copy()
            run_errs = ev.errs.copy()
            final_errs = np.zeros_like(ev.errs)
        else:
            run_vals += ev.vals
            run_errs += ev.errs
        if depth >= limit:
            final_errs += ev.errs
        prio = math.inf if must else float(ev.errs.sum())
        heapq.heappush(heap, (-prio, seq))
        seq += 1
        n_eval_cells += 1

    for lo, hi in root_boxes:
        admit(np.asarray(lo, float), np.asarray(hi, float), 0)

    def targets(vals):
        scale = np.abs(vals).max() if shared_scale else np.abs(vals)
        return np.maximum(config.abs_tol, config.rel_tol * scale)

    def running_ok():
        # cheap incremental check; the final verdict recomputes with fsum
        if run_vals is None:
            return True
        return bool(np.all(run_errs <= targets(run_vals)))

    while heap:
        if must_count == 0 and running_ok():
            break
        if n_eval_cells >= config.max_cells:
            aborted = True
            break
        if must_count == 0 and n_eval_cells > 512 and final_errs is not None:
            # cells at their depth limit can never improve; once their
            # locked-in error alone exceeds the target, stop honestly
            if np.any(final_errs > targets(run_vals)):
                aborted = True
                break
        neg_prio, idx = heapq.heappop(heap)
        rec = leaves.get(idx)
        if rec is None:
            continue
        if rec["depth"] >= rec["limit"]:
            continue  # final leaf: cannot refine further
        del leaves[idx]
        if rec["must"]:
            must_count -= 1
        run_vals -= rec["vals"]
        run_errs -= rec["errs"]
        lo, hi, depth = rec["lo"], rec["hi"], rec["depth"]
        if rec["axes"] is not None:
            parts = [2 if d in rec["axes"] else 1 for d in range(dim)]
        elif rec["sing"] and zdim is not None:
            # gauge-matched refinement: quadratically scaling axes split 4x
            parts = [2 if d < zdim else 4 for d in range(dim)]
        elif rec["var"] is not None and rec["var"].max() > 0.0:
            # split only the axes along which the integrand actually varies
            v = rec["var"]
            parts = [2 if v[d] >= 0.5 * v.max() else 1 for d in range(dim)]
        else:
            parts = [2] * dim
        edges = [np.linspace(lo[d], hi[d], parts[d] + 1) for d in range(dim)]
        for combo in itertools.product(*(range(p) for p in parts)):
            clo = np.array([edges[d][combo[d]] for d in range(dim)])
            chi_ = np.array([edges[d][combo[d] + 1] for d in range(dim)])
            admit(clo, chi_, depth + 1)

    # deterministic final reduction in creation order
    if leaves:
        order = sorted(leaves)
        ncomp = leaves[order[0]]["vals"].shape[0]
        vals = np.array([math.fsum(leaves[i]["vals"][c] for i in order) for c in range(ncomp)])
        errs = np.array([math.fsum(leaves[i]["errs"][c] for i in order) for c in range(ncomp)])
        # rounding floor: cannot certify below accumulated roundoff
        mags = np.array([math.fsum(abs(leaves[i]["vals"][c]) for i in order) for c in range(ncomp)])
        errs = np.maximum(errs, 1e-15 * mags)
    else:
        vals = np.zeros(1)
        errs = np.zeros(1)
    scale = np.abs(vals).max(initial=0.0) if shared_scale else np.abs(vals)
    target = np.maximum(config.abs_tol, config.rel_tol * scale)
    converged = bool(np.all(errs <= target)) and not aborted
    return VectorIntegralResult(vals, errs, n_eval_cells, converged)


def _plain_cell_eval(f, order):
    def ev(lo, hi, depth):
        dim = lo.shape[0]
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        scale = float(np.prod(half))
        out = []
        raw_hi = None
        for o in (order, order + 2):
            nodes, wts = _tensor_rule(o, dim)
            vals = np.asarray(f(mid + nodes * half), float)
            if vals.ndim == 1:
                vals = vals[:, None]
            out.append(scale * (wts @ vals))
            raw_hi = vals
        lo_val, hi_val = out
        # per-axis variation of the integrand on the finer tensor grid
        grid = raw_hi.reshape((order + 2,) * dim + (raw_hi.shape[1],))
        var = np.array([float(np.abs(np.diff(grid, axis=d)).sum()) for d in range(dim)])
        return _CellEval(hi_val, np.abs(hi_val - lo_val), axis_variation=var)

    return ev


def integrate_vector(
    f: Callable[[np.ndarray], np.ndarray],
    box: Box,
    config: QuadratureConfig,
    singular_points: Sequence[np.ndarray] = (),
    zdim: Optional[int] = None,
    shared_scale: bool = False,
) -> VectorIntegralResult:
    """Adaptively integrate a vector-valued integrand over a box.

    All components share one cell tree; convergence requires every
    component to meet max(abs_tol, rel_tol * |component value|), or with
    shared_scale the largest component magnitude replaces the
    componentwise one (appropriate when the components are entries of one
    tensor with a common scale).  zdim marks how many leading coordinates
    scale linearly under dilations; when set, refinement near singular
    points follows the gauge geometry (trailing axes split into quarters).
    """
    sing = [np.asarray(p, float) for p in singular_points]
    roots = _presplit(box.lower, box.upper, sing)
    return _adaptive_loop(_plain_cell_eval(f, config.gauss_order), roots, config, sing, box.dim,
                          zdim=zdim, shared_scale=shared_scale)


def integrate_adaptive(
    f: Callable[[np.ndarray], np.ndarray],
    box: Box,
    config: QuadratureConfig,
    singular_points: Sequence = (),
    zdim: Optional[int] = None,
) -> IntegralResult:
    """Adaptively integrate a scalar integrand over a box.

    f maps an (n, d) coordinate array to an (n,) array; use
    pointwise_integrand to wrap a GroupPoint -> float map.  singular_points
    may be coordinate vectors or GroupPoints; the integrand must be
    absolutely integrable at each of them.  The result is never silently
    wrong: if the tolerance cannot be certified within the depth and cell
    budget, converged is False.
    """
    sing = [coords_of(p) if isinstance(p, GroupPoint) else np.asarray(p, float)
            for p in singular_points]
    res = integrate_vector(f, box, config, sing, zdim=zdim)
    return res.scalar()


def pointwise_integrand(spec: GroupSpec, fn) -> Callable[[np.ndarray], np.ndarray]:
    """Adapt a GroupPoint -> float map to the coordinate-batch integrand form."""

    def f(x):
        x = np.asarray(x, float)
        return np.array([fn(GroupPoint(row[: spec.m], row[spec.m :])) for row in x])

    return f


# --- gauge-ball integration ---


def _minmax_gauge(lo, hi, m):
    lo = np.asarray(lo)
    hi = np.asarray(hi)
    minabs = np.where((lo <= 0) & (hi >= 0), 0.0, np.minimum(np.abs(lo), np.abs(hi)))
    maxabs = np.maximum(np.abs(lo), np.abs(hi))

    def gauge(c):
        psi = float(c[:m] @ c[:m])
        chi = float(c[m:] @ c[m:])
        return (psi * psi + 16.0 * chi) ** 0.25

    return gauge(minabs), gauge(maxabs)


def _ball_cell_eval_k1(f, order, m, radius):
    """Cell rule for k = 1: the t-range is clipped exactly to |t| < r(z).

    For fixed z the ball section is the interval |t| < r(z) with
    r(z) = sqrt(max(R^4 - |z|^4, 0)) / 4, so the indicator is resolved
    exactly and only the Gauss error of the clipped rule remains.
    """
    r4 = radius**4

    def one_order(lo, hi, o):
        znodes, zw = _tensor_rule(o, m)
        zhalf = 0.5 * (hi[:m] - lo[:m])
        zmid = 0.5 * (hi[:m] + lo[:m])
        zpts = zmid + znodes * zhalf
        psi = np.einsum("ni,ni->n", zpts, zpts)
        r = np.sqrt(np.maximum(r4 - psi * psi, 0.0)) / 4.0
        tlo = np.maximum(lo[m], -r)
        thi = np.minimum(hi[m], r)
        tlen = np.maximum(thi - tlo, 0.0)
        tmid = 0.5 * (tlo + thi)
        tn, tw = _gauss_rule(o)
        tpts = tmid[:, None] + 0.5 * tlen[:, None] * tn[None, :]
        pts = np.concatenate(
            [np.repeat(zpts, o, axis=0), tpts.reshape(-1, 1)], axis=1
        )
        wts = (zw[:, None] * (0.5 * tlen[:, None] * tw[None, :])).ravel()
        wts = wts * float(np.prod(zhalf))
        vals = np.asarray(f(pts), float)
        if vals.ndim == 1:
            vals = vals[:, None]
        return wts @ vals

    z_axes = tuple(range(m))

    def has_kink(lo, hi):
        # The clipped section length kinks in z exactly where t = +-r(z)
        # crosses a t-face of the cell; r is monotone in psi = |z|^2, so
        # its range over the cell is available in closed form.
        zlo, zhi = lo[:m], hi[:m]
        minabs = np.where((zlo <= 0) & (zhi >= 0), 0.0, np.minimum(np.abs(zlo), np.abs(zhi)))
        maxabs = np.maximum(np.abs(zlo), np.abs(zhi))
        psi_min = float(minabs @ minabs)
        psi_max = float(maxabs @ maxabs)
        rmax = math.sqrt(max(r4 - psi_min * psi_min, 0.0)) / 4.0
        rmin = math.sqrt(max(r4 - psi_max * psi_max, 0.0)) / 4.0
        for face in (lo[m], hi[m]):
            if rmin <= face <= rmax or rmin <= -face <= rmax:
                return True
        return False

    def ev(lo, hi, depth):
        nmin, nmax = _minmax_gauge(lo, hi, m)
        if nmin >= radius:
            return None
        lo_val = one_order(lo, hi, order)
        hi_val = one_order(lo, hi, order + 2)
        # cells where the clip boundary crosses a t-face have a kink in the
        # z directions only; refining t there cannot reduce it
        axes = z_axes if (nmax >= radius and has_kink(lo, hi)) else None
        return _CellEval(hi_val, np.abs(hi_val - lo_val), split_axes=axes)

    return ev


def _ball_cell_eval_indicator(f, order, m, radius, max_depth):
    """Generic-k cell rule: indicator sampling with a boundary-layer bound.

    Straddling cells are forced down to max_depth; at the depth limit their
    error includes cell volume times the largest sampled |f|, an honest
    bound for the unresolved boundary layer.
    """

    def one_order(lo, hi, o, straddle):
        nodes, wts = _tensor_rule(o, lo.shape[0])
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        pts = mid + nodes * half
        vals = np.asarray(f(pts), float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if straddle:
            psi = np.einsum("ni,ni->n", pts[:, :m], pts[:, :m])
            chi = np.einsum("ni,ni->n", pts[:, m:], pts[:, m:])
            inside = (psi * psi + 16.0 * chi) ** 0.25 < radius
            vals = np.where(inside[:, None], vals, 0.0)
        sup = float(np.abs(vals).max(initial=0.0))
        return float(np.prod(half)) * (wts @ vals), sup

    def ev(lo, hi, depth):
        nmin, nmax = _minmax_gauge(lo, hi, m)
        if nmin >= radius:
            return None
        straddle = nmax >= radius
        lo_val, _ = one_order(lo, hi, order, straddle)
        hi_val, sup = one_order(lo, hi, order + 2, straddle)
        errs = np.abs(hi_val - lo_val)
        if straddle:
            if depth < max_depth:
                return _CellEval(hi_val, errs, force_split=True)
            errs = errs + float(np.prod(hi - lo)) * sup
        return _CellEval(hi_val, errs)

    return ev


def integrate_gauge_ball(
    spec: GroupSpec,
    f: Callable[[np.ndarray], np.ndarray],
    config: QuadratureConfig,
    radius: float = 1.0,
    singular_points: Sequence = (),
) -> IntegralResult:
    """Integrate a bounded integrand over the gauge ball {N < radius}.

    The bounding box is [-R, R]^m x [-R^2/4, R^2/4]^k (N < R forces
    |z| < R and |t| < R^2/4).  For k = 1 the ball boundary is resolved
    exactly by clipping the t-interval per z node; for k >= 2 the
    indicator is sampled and straddling cells carry an explicit
    boundary-layer error bound, so tight tolerances may honestly fail to
    converge.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    m, k = spec.m, spec.k
    lo = np.concatenate([-radius * np.ones(m), -(radius**2) / 4.0 * np.ones(k)])
    hi = -lo
    sing = [coords_of(p) if isinstance(p, GroupPoint) else np.asarray(p, float)
            for p in singular_points]
    roots = _presplit(lo, hi, sing)
    if k == 1:
        ev = _ball_cell_eval_k1(f, config.gauss_order, m, radius)
    else:
        ev = _ball_cell_eval_indicator(f, config.gauss_order, m, radius, config.max_depth)
    res = _adaptive_loop(ev, roots, config, sing, m + k, zdim=m)
    return res.scalar()
