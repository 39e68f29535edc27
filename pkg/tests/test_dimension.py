import math

import numpy as np
import pytest

from opentorus import Hole, Point, make_system
from opentorus.covering import CellSet, SurvivorSpec, grid_indices, survivors
from opentorus.dimension import (DeficitRow, DimensionEstimate, _default_base,
                                 box_dimension, brute_force_dimension,
                                 deficit_sweep, full_space_dimension,
                                 survivor_dimension, theoretical_bound)
from opentorus.errors import DegenerateScales, GridTooCoarse, RadiusTooLarge
from opentorus.system import unit_ball_volume


def cat():
    return make_system([[2, 1], [1, 1]])


X0 = Point.from_floats((math.sqrt(2) % 1.0, math.sqrt(3) % 1.0))


def interval_cells(delta=1e-4):
    idx = np.arange(int(round(1.0 / delta)), dtype=np.int64)
    return CellSet(delta, idx[:, None], 0.5)


def cantor_cells(depth=10):
    # left endpoints of the 2^depth surviving intervals, exact in units 3^-depth
    starts = [0]
    for k in range(depth):
        w = 3 ** (depth - k - 1)
        starts = starts + [s + 2 * w for s in starts]
    delta = 3.0 ** -depth
    idx = np.asarray(sorted(starts), dtype=np.int64)
    return CellSet(delta, idx[:, None], 0.5)


def test_box_dimension_full_interval():
    est = box_dimension(interval_cells(), [0.05 * 2.0 ** -j for j in range(8)])
    assert abs(est.slope - 1.0) <= 0.02
    assert est.slope_stderr < 1e-12
    assert est.window == (1, 8)


def test_box_dimension_cantor_depth10():
    est = box_dimension(cantor_cells(), [3.0 ** -j for j in range(1, 9)])
    # prefix counting makes N(3^-j) = 2^j exactly
    assert est.counts == tuple(2 ** j for j in range(1, 9))
    assert abs(est.slope - math.log(2) / math.log(3)) <= 0.02
    assert est.slope_stderr < 1e-12
    # coarsest scale plus the two starved scales (N = 4, 8) are excluded
    assert est.window == (3, 8)


def test_box_dimension_empty_set_degenerate():
    empty = CellSet(1e-3, np.empty((0, 1), dtype=np.int64), 0.5)
    with pytest.raises(DegenerateScales):
        box_dimension(empty, [0.1 * 2.0 ** -j for j in range(5)])


def test_box_dimension_constant_counts_degenerate():
    one = CellSet(1e-3, np.asarray([[7]], dtype=np.int64), 0.5)
    with pytest.raises(DegenerateScales):
        box_dimension(one, [0.1 * 2.0 ** -j for j in range(5)])


def test_box_dimension_rejects_bad_scales():
    cells = interval_cells(1e-3)
    with pytest.raises(ValueError):
        box_dimension(cells, [0.1, 0.05, 0.025])
    with pytest.raises(ValueError):
        box_dimension(cells, [0.1, 0.05, 0.02, 0.01])
    with pytest.raises(ValueError):
        box_dimension(cells, [0.1, 0.05, -0.025, 0.0125])


def test_box_dimension_starved_window_degenerate():
    # 12 cells never fill 10 boxes beyond the coarsest scales
    idx = np.arange(12, dtype=np.int64) * 800
    cells = CellSet(1e-4, idx[:, None], 0.5)
    with pytest.raises(DegenerateScales):
        box_dimension(cells, [0.5 * 2.0 ** -j for j in range(4)])


def test_dyadic_box_counts_double_at_most():
    sys = cat()
    spec = SurvivorSpec(r=0.075, t=3, k=2, hole=Hole((0.0, 0.0), 0.15), x=X0)
    cells = survivors(sys, spec, 0.075 / 3000)
    est = box_dimension(cells, [0.04 * 2.0 ** -j for j in range(9)])
    for a, b in zip(est.counts, est.counts[1:]):
        assert a <= b <= 2 * a


def test_survivor_dimension_matches_materialized_box_count():
    sys = cat()
    hole = Hole((0.0, 0.0), 0.2)
    est = survivor_dimension(sys, hole, X0, t=3, k_max=2)
    spec = SurvivorSpec(r=0.1, t=3, k=2, hole=hole, x=X0)
    cells = survivors(sys, spec, est.scales[-1] / 2.0)
    ref = box_dimension(cells, list(est.scales))
    assert ref.counts == est.counts
    assert ref.slope == est.slope
    assert ref.slope_stderr == est.slope_stderr


def test_survivor_dimension_ladder_shape():
    sys = cat()
    est = survivor_dimension(sys, Hole((0.0, 0.0), 0.2), X0, t=3, k_max=2,
                             points_per_step=3)
    assert len(est.scales) == 7
    assert est.scales[0] == 0.1
    ratio = est.scales[1] / est.scales[0]
    assert ratio == pytest.approx(math.exp(-sys.lambda0 * 3 / 3.0), rel=1e-12)


def test_survivor_dimension_tiny_hole_is_free():
    est = survivor_dimension(cat(), Hole((0.0, 0.0), 0.01), X0, t=6, k_max=2)
    assert abs(est.slope - 1.0) <= 0.02


def test_survivor_dimension_huge_hole_depletes():
    sys = cat()
    center = tuple(X0.float_coords())
    hole = Hole(center, 0.45)
    est = survivor_dimension(sys, hole, X0, t=4, k_max=3)
    assert est.slope < 0.8
    delta = 0.225 / 3000
    spec = SurvivorSpec(r=0.225, t=4, k=3, hole=hole, x=X0)
    frac = survivors(sys, spec, delta).count / grid_indices(0.225, delta, 1).shape[0]
    assert frac < 0.10


def test_survivor_dimension_base_point_insensitive():
    sys = cat()
    hole = Hole((0.0, 0.0), 0.2)
    y = Point.from_floats((math.sqrt(5) % 1.0, math.sqrt(7) % 1.0))
    a = survivor_dimension(sys, hole, X0, t=6, k_max=2)
    b = survivor_dimension(sys, hole, y, t=6, k_max=2)
    comb = math.hypot(a.slope_stderr, b.slope_stderr)
    assert abs(a.slope - b.slope) <= 2.0 * comb


def test_survivors_monotone_in_hole_radius():
    # same leaf grid, nested holes: surviving the wider hole is harder
    sys = cat()
    delta = 0.075 / 2000
    big = survivors(sys, SurvivorSpec(r=0.075, t=4, k=2,
                                      hole=Hole((0.0, 0.0), 0.2), x=X0), delta)
    small = survivors(sys, SurvivorSpec(r=0.075, t=4, k=2,
                                        hole=Hole((0.0, 0.0), 0.15), x=X0), delta)
    assert big.is_subset_of(small)
    assert big.count <= small.count


def test_survivor_dimension_rejects_bad_args():
    sys = cat()
    hole = Hole((0.0, 0.0), 0.2)
    with pytest.raises(ValueError):
        survivor_dimension(sys, hole, X0, t=0, k_max=2)
    with pytest.raises(ValueError):
        survivor_dimension(sys, hole, X0, t=3, k_max=0)
    with pytest.raises(ValueError):
        survivor_dimension(sys, hole, X0, t=3, k_max=2, points_per_step=0)
    with pytest.raises(GridTooCoarse):
        survivor_dimension(sys, hole, X0, t=3, k_max=2, delta=0.02)


def test_theoretical_bound_examples():
    # dim 2, constant 1, ball measure pi/100
    assert theoretical_bound(2.0, 1.0, math.pi * 0.01) == pytest.approx(
        1.9909214077368598, rel=1e-15)
    assert theoretical_bound(2.0, 1.0, 0.5) < 2.0
    assert theoretical_bound(2.0, 0.0, 0.5) == 2.0


def test_theoretical_bound_rejects_bad_args():
    with pytest.raises(ValueError):
        theoretical_bound(2.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        theoretical_bound(2.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        theoretical_bound(2.0, 1.0, 1.7)
    with pytest.raises(ValueError):
        theoretical_bound(2.0, -1.0, 0.5)


def test_deficit_sweep_fields_and_medians():
    sys = cat()
    r_list = [0.18, 0.19, 0.2, 0.21]
    rep = deficit_sweep(sys, (0.0, 0.0), r_list, x=X0)
    assert [row.r for row in rep.rows] == r_list
    for row in rep.rows:
        assert row.deficit == sys.n - row.dim_estimate
        assert row.theorem_ratio == row.deficit * math.log(1.0 / row.r) / row.r ** sys.m
        assert row.conjecture_ratio == row.deficit / row.r ** sys.m
        assert row.deficit >= -2.0 * row.dim_stderr
        assert row.t >= 1
    assert rep.d_double_prime == float(np.median([r.theorem_ratio for r in rep.rows]))
    expected_c = float(np.median([r.conjecture_ratio for r in rep.rows]))
    assert rep.c_conjecture == expected_c / unit_ball_volume(sys.m)


def test_deficit_sweep_equal_radii_identical_rows():
    rep = deficit_sweep(cat(), (0.0, 0.0), [0.2, 0.2, 0.2, 0.2], x=X0)
    assert all(row == rep.rows[0] for row in rep.rows)


def test_deficit_sweep_workers_deterministic():
    sys = cat()
    r_list = [0.19, 0.2, 0.21, 0.22]
    seq = deficit_sweep(sys, (0.0, 0.0), r_list, x=X0, workers=1)
    par = deficit_sweep(sys, (0.0, 0.0), r_list, x=X0, workers=2)
    assert seq.rows == par.rows
    assert seq.d_double_prime == par.d_double_prime


def test_deficit_sweep_rejects_bad_radii():
    sys = cat()
    with pytest.raises(ValueError):
        deficit_sweep(sys, (0.0, 0.0), [0.1, 0.2, 0.21], x=X0)
    with pytest.raises(RadiusTooLarge):
        deficit_sweep(sys, (0.0, 0.0), [0.1, 0.2, 0.25, 0.3], x=X0)


def test_full_space_dimension_adds_stable_directions():
    est = DimensionEstimate(scales=(0.1, 0.05, 0.025, 0.0125),
                            counts=(10, 20, 40, 80), slope=0.93,
                            slope_stderr=0.01, window=(1, 4))
    assert full_space_dimension(cat(), est) == pytest.approx(1.93)
    block4 = make_system([[3, 1, 0, 0], [2, 1, 0, 0],
                          [0, 0, 2, 1], [0, 0, 1, 1]])
    assert full_space_dimension(block4, est) == pytest.approx(2.93)


def test_brute_force_matches_product_assembly():
    sys = cat()
    hole = Hole((0.0, 0.0), 0.15)
    sl = survivor_dimension(sys, hole, X0, t=4, k_max=1)
    bf = brute_force_dimension(sys, hole, t=4, k_max=1, grid_log2=12,
                               scale_log2_range=(4, 10))
    assert abs(full_space_dimension(sys, sl) - bf.slope) < 0.05


def test_brute_force_rejects_bad_scales():
    sys = cat()
    hole = Hole((0.0, 0.0), 0.15)
    with pytest.raises(ValueError):
        brute_force_dimension(sys, hole, t=4, grid_log2=10,
                              scale_log2_range=(4, 10))
    with pytest.raises(ValueError):
        brute_force_dimension(sys, hole, t=4, grid_log2=12,
                              scale_log2_range=(4, 6))


def test_default_base_point():
    p = _default_base(2)
    assert np.allclose(p.float_coords(),
                       [math.sqrt(2) % 1.0, math.sqrt(3) % 1.0], atol=1e-12)
    with pytest.raises(ValueError):
        _default_base(99)
