"""Smooth bump fields built by discrete convolution, and their norm scalings.

A bump f is the convolution of a normalized compactly supported kernel of
width eps with the indicator of a ball of radius r + eps/2, so it is 1 on
B(r), 0 outside B(r + eps), and smooth in between.  Sampled on a midpoint
grid, the plateau and tail values are snapped to exactly 1 and 0 after
verifying the raw convolution is within 1e-10, which makes the sandwich
1_B(r) <= f <= 1_B(r+eps) an exact array property.  The same construction
wrapped around a torus point gives the ambient observable field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .errors import (
    GridTooCoarse,
    RadiusTooLarge,
    StencilOutOfRange,
    SupportDoesNotEmbed,
)
from .system import ToralSystem, wrap_diff

SNAP_TOL = 1e-10


def _base_bump(rho_sq: np.ndarray) -> np.ndarray:
    """exp(-1/(1 - rho^2)) inside the unit ball, 0 outside."""
    out = np.zeros_like(rho_sq)
    inside = rho_sq < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - rho_sq[inside]))
    return out


def _radius_sq_grid(axis: np.ndarray, d: int) -> np.ndarray:
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    return sum(g * g for g in grids)


@dataclass(eq=False)
class Mollifier:
    """Sampled bump on R^d with Euclidean-ball plateau and support.

    samples[i_1, ..., i_d] is the value at the midpoint node
    ((i - half_count + 0.5) * grid_step per axis); the grid covers
    B(r + eps) plus pad_steps nodes of zero margin for stencils.
    norm_ledger caches computed Sobolev norms by derivative order.
    """

    d: int
    r: float
    eps: float
    grid_step: float
    samples: np.ndarray
    pad_steps: int
    norm_ledger: dict = field(default_factory=dict)

    @property
    def half_count(self) -> int:
        return self.samples.shape[0] // 2

    @property
    def support_radius(self) -> float:
        return self.r + self.eps

    def node_axis(self) -> np.ndarray:
        m = self.half_count
        return (np.arange(-m, m) + 0.5) * self.grid_step

    @property
    def integral(self) -> float:
        return float(self.samples.sum()) * self.grid_step ** self.d

    def nonzero_indices(self) -> np.ndarray:
        """Signed node indices (N, d) of the nonzero samples."""
        rows = np.argwhere(self.samples > 0.0)
        return (rows - self.half_count).astype(np.int64)

    def value_at(self, x) -> float:
        """Multilinear interpolation with exact plateau and support clamps.

        The true convolution equals 1 on the closed ball of radius r and
        0 wherever the distance is >= r + eps, so those regions return
        the exact constants rather than interpolating across the edge.
        """
        x = np.asarray(x, dtype=float).reshape(self.d)
        rho = float(np.sqrt(np.sum(x * x)))
        if rho <= self.r:
            return 1.0
        if rho >= self.support_radius:
            return 0.0
        pos = x / self.grid_step + (self.half_count - 0.5)
        base = np.floor(pos).astype(int)
        frac = pos - base
        size = self.samples.shape[0]
        vals = np.zeros((2,) * self.d)
        for corner in np.ndindex(*(2,) * self.d):
            idx = base + np.array(corner)
            if np.any(idx < 0) or np.any(idx >= size):
                vals[corner] = 0.0
            else:
                vals[corner] = self.samples[tuple(idx)]
        flat = vals.ravel()
        if np.all(flat == flat[0]):
            return float(flat[0])
        for ax in range(self.d - 1, -1, -1):
            w = frac[ax]
            vals = vals[..., 0] * (1.0 - w) + vals[..., 1] * w
        return float(min(max(vals, 0.0), 1.0))


def _snap_profile(raw: np.ndarray, rho_sq: np.ndarray, r: float,
                  support: float) -> np.ndarray:
    """Snap plateau to 1 and tail to 0 after verifying the raw values."""
    plateau = rho_sq < r * r
    tail = rho_sq >= support * support
    dev_plateau = float(np.max(np.abs(raw[plateau] - 1.0))) if plateau.any() else 0.0
    dev_tail = float(np.max(np.abs(raw[tail]))) if tail.any() else 0.0
    lo = float(raw.min())
    hi = float(raw.max())
    if dev_plateau > SNAP_TOL or dev_tail > SNAP_TOL or lo < -SNAP_TOL \
            or hi > 1.0 + SNAP_TOL:
        raise ArithmeticError(
            f"convolution deviates beyond snap tolerance: plateau {dev_plateau:g}, "
            f"tail {dev_tail:g}, range [{lo:g}, {hi:g}]")
    out = np.clip(raw, 0.0, 1.0)
    out[plateau] = 1.0
    out[tail] = 0.0
    return out


def _normalized_kernel(d: int, eps: float, step: float) -> np.ndarray:
    """Base bump of width eps sampled at integer nodes, unit discrete mass."""
    reach = int(math.ceil(eps / (2.0 * step)))
    axis = np.arange(-reach, reach + 1) * step
    rho_sq = _radius_sq_grid(axis, d) * (2.0 / eps) ** 2
    kern = _base_bump(rho_sq)
    return kern / kern.sum()


def build_mollifier(d: int, r: float, eps: float, grid_step: float,
                    pad_steps: int = 8) -> Mollifier:
    """Convolve the normalized width-eps bump with the B(r + eps/2) indicator.

    The discrete kernel is normalized to unit mass on its own grid, so the
    plateau value is the full kernel mass and snaps to exactly 1.
    """
    if d < 1 or r <= 0 or eps <= 0 or grid_step <= 0:
        raise ValueError("dimension, radius, width, and step must be positive")
    if grid_step > eps / 8:
        raise GridTooCoarse(f"grid_step = {grid_step} must be <= eps/8 = {eps / 8}")
    half = int(math.ceil((r + eps) / grid_step)) + pad_steps
    axis = (np.arange(-half, half) + 0.5) * grid_step
    rho_sq = _radius_sq_grid(axis, d)
    ind_radius = r + eps / 2.0
    indicator = (rho_sq < ind_radius * ind_radius).astype(float)
    kern = _normalized_kernel(d, eps, grid_step)
    if d == 1:
        raw = np.convolve(indicator, kern, mode="same")
    else:
        raw = fftconvolve(indicator, kern, mode="same")
    samples = _snap_profile(raw, rho_sq, r, r + eps)
    return Mollifier(d=d, r=r, eps=eps, grid_step=grid_step, samples=samples,
                     pad_steps=pad_steps)


def _multi_indices(d: int, ell: int) -> list[tuple[int, ...]]:
    """All derivative multi-indices with |alpha| <= ell."""
    out = []

    def rec(prefix, remaining):
        if len(prefix) == d:
            out.append(tuple(prefix))
            return
        for a in range(remaining + 1):
            rec(prefix + [a], remaining - a)

    rec([], ell)
    return out


def _derivative(mol: Mollifier, alpha: tuple[int, ...],
                cache: dict) -> np.ndarray:
    if alpha in cache:
        return cache[alpha]
    if sum(alpha) == 0:
        cache[alpha] = mol.samples
        return mol.samples
    ax = next(i for i, a in enumerate(alpha) if a > 0)
    prev = list(alpha)
    prev[ax] -= 1
    lower = _derivative(mol, tuple(prev), cache)
    darr = np.gradient(lower, mol.grid_step, axis=ax, edge_order=1)
    cache[alpha] = darr
    return darr


def sobolev_norm(mol: Mollifier, ell: int) -> float:
    """Discrete W^2_ell norm: all central-difference derivatives |alpha| <= ell.

    Requires the zero margin to swallow the stencil (pad_steps >= 2 ell),
    so every edge effect lands in the zero region.
    """
    if ell < 0:
        raise ValueError("derivative order must be nonnegative")
    if ell in mol.norm_ledger:
        return mol.norm_ledger[ell]
    if mol.pad_steps < 2 * ell:
        raise StencilOutOfRange(
            f"order {ell} needs a margin of {2 * ell} nodes, have {mol.pad_steps}")
    cache: dict = {}
    total = 0.0
    cell = mol.grid_step ** mol.d
    for alpha in _multi_indices(mol.d, ell):
        darr = _derivative(mol, alpha, cache)
        total += float(np.sum(darr * darr)) * cell
    norm = math.sqrt(total)
    mol.norm_ledger[ell] = norm
    return norm


def grad_sup_norm(mol: Mollifier) -> float:
    """Sup over the grid of the Euclidean norm of the central-difference gradient."""
    acc = np.zeros_like(mol.samples)
    for ax in range(mol.d):
        g = np.gradient(mol.samples, mol.grid_step, axis=ax, edge_order=1)
        acc += g * g
    return float(np.sqrt(acc.max()))


@dataclass(frozen=True)
class ScalingReport:
    """Fit of log norm against log(1/eps) across a geometric eps ladder."""

    d: int
    ell: int
    eps_values: tuple
    norms: tuple
    slope: float
    intercept: float
    bound_slope: float            # (d + ell) + 0.3
    slope_ok: bool
    monotone: bool
    passed: bool


def verify_norm_scaling(d: int, r: float, ell: int, eps_list,
                        grid_ratio: float = 8.0,
                        pad_steps: int = 8) -> ScalingReport:
    """Check that the W^2_ell norm grows no faster than eps^-(d+ell).

    The eps list must be geometric with at least five points.  The grid
    step scales with eps (eps / grid_ratio) so discretization error stays
    proportionally fixed across the ladder.  For ell >= 1 the norm must
    also be nondecreasing as eps shrinks; the order-zero norm is eps-stable
    by the sandwich (it drifts down toward the indicator norm), so
    monotonicity is reported but not required there.
    """
    eps = [float(e) for e in eps_list]
    if len(eps) < 5:
        raise ValueError("need at least five eps values")
    ratios = [eps[i + 1] / eps[i] for i in range(len(eps) - 1)]
    if any(abs(q / ratios[0] - 1.0) > 1e-9 for q in ratios):
        raise ValueError("eps values must form a geometric ladder")
    if not (0 < ratios[0] < 1):
        raise ValueError("eps values must decrease")
    norms = []
    for e in eps:
        mol = build_mollifier(d, r, e, e / grid_ratio, pad_steps=pad_steps)
        norms.append(sobolev_norm(mol, ell))
    x = np.log(1.0 / np.asarray(eps))
    y = np.log(np.asarray(norms))
    slope, intercept = np.polyfit(x, y, 1)
    bound = (d + ell) + 0.3
    slope_ok = bool(slope <= bound)
    monotone = bool(all(norms[i + 1] >= norms[i] * (1.0 - 1e-9)
                        for i in range(len(norms) - 1)))
    passed = slope_ok and (monotone or ell == 0)
    return ScalingReport(d=d, ell=ell, eps_values=tuple(eps), norms=tuple(norms),
                         slope=float(slope), intercept=float(intercept),
                         bound_slope=bound, slope_ok=slope_ok,
                         monotone=monotone, passed=passed)


def _next_pow2(x: float) -> int:
    return 1 << max(0, math.ceil(math.log2(max(1.0, x))))


@dataclass(eq=False)
class PsiField:
    """Torus bump: 1 on the ball of radius r about center, 0 beyond r + eps.

    Evaluation applies the discrete convolution kernel directly, so any
    point whose kernel translates all land inside (outside) the indicator
    ball returns exactly 1.0 (0.0).  integral_mu is the midpoint-rule
    integral over the 1/grid_size torus grid.
    """

    d: int
    center: np.ndarray
    r: float                      # plateau radius
    eps: float
    grid_step: float
    grid_size: int
    offsets: np.ndarray           # kernel node offsets, shape (T, d)
    weights: np.ndarray           # normalized kernel mass per offset, sums to 1
    integral_mu: float = 0.0

    @property
    def support_radius(self) -> float:
        return self.r + self.eps

    @property
    def ind_radius(self) -> float:
        return self.r + self.eps / 2.0

    def value_at(self, points) -> np.ndarray | float:
        pts = np.asarray(points, dtype=float)
        scalar = pts.ndim == 1
        pts = np.atleast_2d(pts)
        rel = pts - self.center
        acc = np.zeros(pts.shape[0])
        hits = np.zeros(pts.shape[0], dtype=np.int64)
        rad_sq = self.ind_radius ** 2
        for off, w in zip(self.offsets, self.weights):
            diff = wrap_diff(rel - off * self.grid_step)
            mask = np.sum(diff * diff, axis=1) < rad_sq
            acc += w * mask
            hits += mask
        nterm = self.offsets.shape[0]
        acc[hits == nterm] = 1.0
        acc[hits == 0] = 0.0
        np.clip(acc, 0.0, 1.0, out=acc)
        return float(acc[0]) if scalar else acc

    def profile(self, points_per_step: int = 2) -> tuple[np.ndarray, np.ndarray]:
        """Radial values along the first axis, for plots and CSV export."""
        step = self.grid_step / points_per_step
        rad = np.arange(0.0, self.support_radius + 2 * self.grid_step, step)
        pts = self.center + rad[:, None] * np.eye(self.d)[0]
        return rad, np.asarray(self.value_at(pts % 1.0))


def build_psi(sys: ToralSystem, hole_center, r: float, eps: float,
              grid_size: int | None = None) -> PsiField:
    """Ambient bump equal to 1 on B^X(center, r/2), 0 outside B^X(center, r/2 + eps).

    Same convolution construction as build_mollifier, in dimension m,
    wrapped around the torus.  The quadrature grid size is a power of two
    with spacing at most eps/8.
    """
    center = np.asarray(hole_center, dtype=float) % 1.0
    if center.shape != (sys.m,):
        raise ValueError(f"center must have shape ({sys.m},)")
    if eps <= 0:
        raise ValueError("smoothing width must be positive")
    if r / 2.0 + eps >= 0.5:
        raise SupportDoesNotEmbed(
            f"support radius r/2 + eps = {r / 2 + eps} must be < 1/2")
    if eps >= r:
        raise ValueError(f"smoothing width {eps} must be below r = {r}")
    if r >= sys.r0:
        raise RadiusTooLarge(f"r = {r} must be < r0 = {sys.r0}")
    if grid_size is None:
        grid_size = _next_pow2(8.0 / eps)
    h = 1.0 / grid_size
    if h > eps / 8:
        raise GridTooCoarse(f"1/grid_size = {h} must be <= eps/8 = {eps / 8}")
    kern = _normalized_kernel(sys.m, eps, h)
    reach = (kern.shape[0] - 1) // 2
    axis = np.arange(-reach, reach + 1)
    mesh = np.meshgrid(*([axis] * sys.m), indexing="ij")
    offsets = np.stack([g.ravel() for g in mesh], axis=1)
    weights = kern.ravel()
    keep = weights > 0.0
    psi = PsiField(d=sys.m, center=center, r=r / 2.0, eps=eps, grid_step=h,
                   grid_size=grid_size, offsets=offsets[keep].astype(float),
                   weights=weights[keep])
    # psi is a convex combination of translated ball indicators, and every
    # radius-R ball with R < 1/2 has Haar measure exactly V_m R^m, so the
    # integral has a closed form (no quadrature bias)
    vm = math.pi ** (sys.m / 2.0) / math.gamma(sys.m / 2.0 + 1.0)
    psi.integral_mu = vm * psi.ind_radius ** sys.m
    return psi
