"""Box-counting dimension of survivor sets and the deficit sweep.

Box counts coarsen a finest-scale cell set: a box at scale s is occupied
when it contains the center of a surviving cell, and the dimension is the
least-squares slope of log N versus log(1/s).  The regression window drops
the coarsest scale (transient) and any starved scale with fewer than ten
boxes.  Survivor enumeration streams the leaf grid in chunks so the finest
desk-scale instances (about 10^8 cells) fit in memory.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .covering import CellSet
from .errors import DegenerateScales, GridTooCoarse, RadiusTooLarge
from .holes import Hole, in_K_points
from .mixing import MixingParams, choose_t
from .system import (Point, ToralSystem, _matpow_mod, leaf_positions,
                     unit_ball_volume)

MIN_BOX_COUNT = 10          # scales with fewer occupied boxes are starved
_CHUNK = 1 << 22

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53)


def _default_base(m: int) -> Point:
    """Generic base point with badly approximable coordinates."""
    if m > len(_PRIMES):
        raise ValueError(f"no default base point beyond {len(_PRIMES)} dimensions")
    return Point.from_floats(tuple(math.sqrt(p) % 1.0 for p in _PRIMES[:m]))


@dataclass(frozen=True)
class DimensionEstimate:
    """Box-count regression: scales, counts, slope, and the window used."""

    scales: tuple
    counts: tuple
    slope: float
    slope_stderr: float
    window: tuple               # (start, stop) index range into scales


@dataclass(frozen=True)
class DeficitRow:
    """One radius of the sweep: dimension, deficit, and both scaling ratios."""

    r: float
    t: int
    dim_estimate: float
    dim_stderr: float
    deficit: float
    theorem_ratio: float        # deficit * log(1/r) / r^m
    conjecture_ratio: float     # deficit / r^m


@dataclass(frozen=True)
class SweepReport:
    """Deficit sweep rows plus the median-fitted scaling constants."""

    rows: tuple
    estimates: tuple            # DimensionEstimate per row, same order
    d_double_prime: float       # median theorem_ratio
    c_conjecture: float         # median conjecture_ratio / V_m
    lambda_prime: float
    p: float
    k_max: int
    points_per_step: int


def _validate_scales(scales) -> list:
    s = [float(v) for v in scales]
    if len(s) < 4:
        raise ValueError("need at least four scales")
    if any(v <= 0 for v in s):
        raise ValueError("scales must be positive")
    s.sort(reverse=True)
    ratios = [s[i + 1] / s[i] for i in range(len(s) - 1)]
    if any(abs(q / ratios[0] - 1.0) > 1e-9 for q in ratios):
        raise ValueError("scales must form a geometric ladder")
    return s


def _regress_counts(scales: list, counts: list) -> DimensionEstimate:
    counts = [int(c) for c in counts]
    if len(set(counts)) <= 1:
        raise DegenerateScales(f"box counts are constant at {counts[0]}")
    start = 1
    while start < len(scales) and counts[start] < MIN_BOX_COUNT:
        start += 1
    if len(scales) - start < 3:
        raise DegenerateScales(
            f"only {len(scales) - start} scales usable after the window rules")
    x = np.log(1.0 / np.asarray(scales[start:]))
    y = np.log(np.asarray(counts[start:], dtype=float))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    dof = x.size - 2
    sxx = float(np.sum((x - x.mean()) ** 2))
    stderr = math.sqrt(float(resid @ resid) / dof / sxx) if dof > 0 else 0.0
    return DimensionEstimate(scales=tuple(scales), counts=tuple(counts),
                             slope=float(slope), slope_stderr=stderr,
                             window=(start, len(scales)))


def box_dimension(cells: CellSet, scales) -> DimensionEstimate:
    """Box-count slope of a cell set across a geometric ladder of scales."""
    s_list = _validate_scales(scales)
    centers = cells.centers()
    counts = []
    for s in s_list:
        if centers.shape[0] == 0:
            counts.append(0)
            continue
        boxes = np.floor(centers / s).astype(np.int64)
        counts.append(int(np.unique(boxes, axis=0).shape[0]))
    return _regress_counts(s_list, counts)


def _box_ranges(r: float, delta: float, scales: list, n: int):
    """Per-scale lower box index and axis size covering all cell centers."""
    lo_center = (math.ceil(-r / delta - 0.5) + 0.5) * delta
    hi_center = (math.floor(r / delta + 0.5) - 0.5) * delta
    ranges = []
    for s in scales:
        lo = math.floor(lo_center / s) - 1
        hi = math.floor(hi_center / s) + 1
        ranges.append((lo, hi - lo + 1))
    return ranges


def survivor_dimension(sys: ToralSystem, hole: Hole, x: Point, t: int,
                       k_max: int, delta: float | None = None,
                       points_per_step: int = 4) -> DimensionEstimate:
    """Dimension of the k_max-horizon survivor set on the leaf ball B(r/2).

    Cells of B^H(hole.radius / 2) whose orbit samples at times t, 2t, ...,
    k_max t stay outside the hole are box-counted over the ladder
    (r/2) e^{-rate min * t * j / points_per_step}, j = 0 .. k_max *
    points_per_step.  The ladder is anchored at the leaf radius so the
    coarsest count is meaningful, and it bottoms out at the finest covering
    scale the horizon justifies.  The grid pitch defaults to half the
    finest scale; enumeration is chunked.
    """
    if t < 1 or k_max < 1:
        raise ValueError("t and k_max must be at least 1")
    if points_per_step < 1:
        raise ValueError("points_per_step must be at least 1")
    r_leaf = hole.radius / 2.0
    rate = float(np.min(sys.unstable_rates))
    n_scales = k_max * points_per_step + 1
    scales = [r_leaf * math.exp(-rate * t * j / points_per_step)
              for j in range(n_scales)]
    if len(scales) < 4:
        raise ValueError("horizon too short: need at least four ladder scales")
    if delta is None:
        delta = scales[-1] / 2.0
    if delta > r_leaf / 10:
        raise GridTooCoarse(f"delta = {delta} must be <= r/20 = {r_leaf / 10}")

    axis = np.arange(math.ceil(-r_leaf / delta - 0.5),
                     math.floor(r_leaf / delta + 0.5) + 1, dtype=np.int64)
    axis = axis[np.abs((axis + 0.5) * delta) < r_leaf]
    n = sys.n
    ranges = _box_ranges(r_leaf, delta, scales, n)
    bitmaps = [np.zeros(size ** n, dtype=bool) for _, size in ranges]

    rows_per_chunk = max(1, _CHUNK // max(1, axis.size ** (n - 1)))
    for lo in range(0, axis.size, rows_per_chunk):
        first = axis[lo:lo + rows_per_chunk]
        if n == 1:
            idx = first[:, None]
        else:
            mesh = np.meshgrid(first, *([axis] * (n - 1)), indexing="ij")
            idx = np.stack([g.ravel() for g in mesh], axis=1)
        alive = idx
        for ell in range(1, k_max + 1):
            if alive.shape[0] == 0:
                break
            pos = leaf_positions(sys, x, t * ell, alive, delta)
            alive = alive[in_K_points(hole, pos)]
        if alive.shape[0] == 0:
            continue
        centers = (alive + 0.5) * delta
        for (blo, size), bmp, s in zip(ranges, bitmaps, scales):
            b = np.floor(centers / s).astype(np.int64) - blo
            flat = b[:, 0]
            for a in range(1, n):
                flat = flat * size + b[:, a]
            bmp[flat] = True
    counts = [int(b.sum()) for b in bitmaps]
    return _regress_counts(scales, counts)


def theoretical_bound(dim_x: float, c: float, mu_ball: float) -> float:
    """Upper bound dim_x + c mu/log(mu); log(mu) < 0 keeps it below dim_x."""
    if not 0.0 < mu_ball < 1.0:
        raise ValueError(f"mu_ball must lie in (0, 1), got {mu_ball}")
    if c < 0:
        raise ValueError("constant must be nonnegative")
    return dim_x + c * mu_ball / math.log(mu_ball)


def _sweep_row(args):
    sys, center, r, x, params, k_max, pps = args
    t = math.ceil(choose_t(sys.m, sys.n, params.p, params.lambda_prime, r))
    est = survivor_dimension(sys, Hole(center, r), x, t, k_max,
                             points_per_step=pps)
    deficit = sys.n - est.slope
    row = DeficitRow(r=r, t=t, dim_estimate=est.slope,
                     dim_stderr=est.slope_stderr, deficit=deficit,
                     theorem_ratio=deficit * math.log(1.0 / r) / r ** sys.m,
                     conjecture_ratio=deficit / r ** sys.m)
    return row, est


def deficit_sweep(sys: ToralSystem, hole_center, r_list, x: Point | None = None,
                  params: MixingParams | None = None, k_max: int = 2,
                  points_per_step: int = 4, workers: int = 1) -> SweepReport:
    """Survivor dimension and deficit per radius, with median-fitted constants.

    The observation time per radius is the ceiling of the chosen horizon
    choose_t(r).  The scaling constants are medians across rows: the
    theorem constant over deficit log(1/r)/r^m, and the conjecture
    constant over deficit/mu(B^X(r)) with mu(B^X(r)) = V_m r^m.
    """
    r_values = [float(r) for r in r_list]
    if len(r_values) < 4:
        raise ValueError("need at least four radii")
    for r in r_values:
        if not 0.0 < r < sys.r0:
            raise RadiusTooLarge(f"sweep radius {r} must lie in (0, r0 = {sys.r0})")
    if params is None:
        params = MixingParams()
    if x is None:
        x = _default_base(sys.m)
    center = tuple(float(c) for c in hole_center)
    jobs = [(sys, center, r, x, params, k_max, points_per_step)
            for r in r_values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_row, jobs))
    else:
        results = [_sweep_row(j) for j in jobs]
    rows = [row for row, _ in results]
    estimates = tuple(est for _, est in results)
    d2 = float(np.median([row.theorem_ratio for row in rows]))
    cc = float(np.median([row.conjecture_ratio for row in rows]))
    cc /= unit_ball_volume(sys.m)
    return SweepReport(rows=tuple(rows), estimates=estimates,
                       d_double_prime=d2, c_conjecture=cc,
                       lambda_prime=params.lambda_prime, p=params.p,
                       k_max=k_max, points_per_step=points_per_step)


def full_space_dimension(sys: ToralSystem, slice_estimate: DimensionEstimate) -> float:
    """Product assembly: stable directions contribute m - n full dimensions."""
    return (sys.m - sys.n) + slice_estimate.slope


def brute_force_dimension(sys: ToralSystem, hole: Hole, *, t: int,
                          k_max: int = 1, grid_log2: int = 13,
                          scale_log2_range=(4, 11)) -> DimensionEstimate:
    """Independent full-space survivor dimension by direct m-d box counting.

    Every torus cell center ((2i+1)/2G per axis, G = 2^grid_log2) is
    stepped exactly with integer matrix powers mod 2G, kept if its orbit
    samples avoid the hole, and counted in dyadic boxes 2^-j for j in
    scale_log2_range.  Exact rational stepping makes this an oracle
    independent of the leaf parametrization.
    """
    g = 1 << grid_log2
    q = 2 * g
    lo_j, hi_j = scale_log2_range
    if hi_j >= grid_log2:
        raise ValueError("finest boxes must be coarser than the grid")
    scales = [2.0 ** -j for j in range(lo_j, hi_j + 1)]
    if len(scales) < 4:
        raise ValueError("need at least four dyadic scales")
    m = sys.m
    mats = []
    for ell in range(1, k_max + 1):
        mats.append(np.array(_matpow_mod(sys.matrix, t * ell, q), dtype=np.int64))
    center = np.asarray(hole.center, dtype=float)
    r_sq = hole.radius ** 2
    bitmaps = {j: np.zeros((1 << j) ** m, dtype=bool) for j in range(lo_j, hi_j + 1)}
    odds = np.arange(1, q, 2, dtype=np.int64)
    rows_per_chunk = max(1, _CHUNK // g ** (m - 1))
    for lo in range(0, g, rows_per_chunk):
        first = odds[lo:lo + rows_per_chunk]
        mesh = np.meshgrid(first, *([odds] * (m - 1)), indexing="ij")
        num = np.stack([a.ravel() for a in mesh], axis=1)
        alive = num
        for mat in mats:
            if alive.shape[0] == 0:
                break
            img = (alive @ mat.T) % q
            d = img / q - center
            d -= np.rint(d)
            alive = alive[np.einsum("ij,ij->i", d, d) >= r_sq]
        if alive.shape[0] == 0:
            continue
        for j in range(lo_j, hi_j + 1):
            b = alive >> (grid_log2 + 1 - j)
            flat = b[:, 0]
            for a in range(1, m):
                flat = (flat << j) + b[:, a]
            bitmaps[j][flat] = True
    counts = [int(bitmaps[j].sum()) for j in range(lo_j, hi_j + 1)]
    return _regress_counts(scales, counts)
