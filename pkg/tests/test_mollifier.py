"""Mollifier module: bump construction, sandwich exactness, norm scalings."""

import math

import numpy as np
import pytest

from opentorus import make_system
from opentorus.errors import (
    GridTooCoarse,
    RadiusTooLarge,
    StencilOutOfRange,
    SupportDoesNotEmbed,
)
from opentorus.mollifier import (
    Mollifier,
    build_mollifier,
    build_psi,
    grad_sup_norm,
    sobolev_norm,
    verify_norm_scaling,
)

CAT = [[2, 1], [1, 1]]

EPS_LADDER = [2.0 ** -k for k in range(4, 9)]


def bump1(r=0.1, eps=0.05):
    return build_mollifier(1, r, eps, eps / 8)


# -------------------------------------------------------------- construction


def test_value_one_at_origin():
    assert bump1().value_at([0.0]) == 1.0


def test_value_zero_at_support_edge_and_beyond():
    m = bump1()
    assert m.value_at([0.15]) == 0.0
    assert m.value_at([-0.15]) == 0.0
    assert m.value_at([0.3]) == 0.0


def test_integral_within_sandwich_bounds():
    # d=1, r=0.1, eps=0.05: the sandwich brackets the mass in [2r, 2(r+eps)]
    m = bump1()
    assert 0.2 <= m.integral <= 0.3


def test_sandwich_exact_on_grid_1d():
    m = bump1()
    ax = m.node_axis()
    assert np.all(m.samples[np.abs(ax) < m.r] == 1.0)
    assert np.all(m.samples[np.abs(ax) >= m.support_radius] == 0.0)
    assert m.samples.min() >= 0.0 and m.samples.max() <= 1.0


def test_sandwich_exact_on_grid_2d():
    m = build_mollifier(2, 0.08, 0.04, 0.04 / 8)
    ax = m.node_axis()
    rho = np.sqrt(ax[:, None] ** 2 + ax[None, :] ** 2)
    assert np.all(m.samples[rho < m.r] == 1.0)
    assert np.all(m.samples[rho >= m.support_radius] == 0.0)
    assert m.samples.min() >= 0.0 and m.samples.max() <= 1.0
    assert m.value_at([0.0, 0.0]) == 1.0


def test_values_interpolate_between_plateau_and_tail():
    m = bump1()
    mid = m.value_at([0.125])
    assert 0.0 < mid < 1.0
    # linear interpolation stays between the bracketing samples
    ax = m.node_axis()
    lo = m.samples[ax <= 0.125][-1]
    hi = m.samples[ax > 0.125][0]
    assert min(lo, hi) <= mid <= max(lo, hi)


def test_grid_too_coarse():
    with pytest.raises(GridTooCoarse):
        build_mollifier(1, 0.1, 0.05, 0.05 / 4)


def test_bad_parameters():
    with pytest.raises(ValueError):
        build_mollifier(1, -0.1, 0.05, 0.001)
    with pytest.raises(ValueError):
        build_mollifier(0, 0.1, 0.05, 0.001)


def test_nonzero_indices_cover_support():
    m = bump1()
    idx = m.nonzero_indices()
    coords = (idx[:, 0] + 0.5) * m.grid_step
    assert np.all(np.abs(coords) < m.support_radius)
    # at least the plateau is present
    assert idx.shape[0] >= int(2 * m.r / m.grid_step) - 2


# -------------------------------------------------------------------- norms


def test_sobolev_zero_order_is_l2_norm():
    m = bump1()
    norm = sobolev_norm(m, 0)
    direct = math.sqrt(float(np.sum(m.samples ** 2)) * m.grid_step)
    assert norm == pytest.approx(direct, rel=1e-12)
    assert math.sqrt(0.2) <= norm <= math.sqrt(0.3)


def test_sobolev_zero_field_is_zero():
    m = bump1()
    zero = Mollifier(d=1, r=m.r, eps=m.eps, grid_step=m.grid_step,
                     samples=np.zeros_like(m.samples), pad_steps=m.pad_steps)
    assert sobolev_norm(zero, 2) == 0.0
    assert grad_sup_norm(zero) == 0.0


def test_sobolev_norm_cached_in_ledger():
    m = bump1()
    n1 = sobolev_norm(m, 1)
    assert m.norm_ledger[1] == n1
    assert sobolev_norm(m, 1) == n1


def test_sobolev_orders_nested():
    m = bump1()
    assert sobolev_norm(m, 0) <= sobolev_norm(m, 1) <= sobolev_norm(m, 2)


def test_stencil_margin_guard():
    m = build_mollifier(1, 0.1, 0.05, 0.05 / 8, pad_steps=2)
    with pytest.raises(StencilOutOfRange):
        sobolev_norm(m, 2)


def test_halving_eps_grows_first_order_norm_moderately():
    # the construction's true first-order growth is eps^(-1/2), well under
    # the eps^-(d+l) upper bound; halving eps scales the norm by about
    # sqrt 2, and never by more than the bound's factor 4
    n_coarse = sobolev_norm(bump1(eps=0.05), 1)
    n_fine = sobolev_norm(bump1(eps=0.025), 1)
    ratio = n_fine / n_coarse
    assert 1.1 <= ratio <= 4.0
    assert ratio == pytest.approx(math.sqrt(2), rel=0.1)


def test_grad_sup_scales_like_inverse_eps():
    grads = [grad_sup_norm(bump1(eps=e)) for e in EPS_LADDER]
    x = np.log(1.0 / np.asarray(EPS_LADDER))
    slope = np.polyfit(x, np.log(grads), 1)[0]
    assert 0.7 <= slope <= 1 + 1 + 0.3


def test_grad_sup_insensitive_to_radius():
    g1 = grad_sup_norm(bump1(r=0.1))
    g2 = grad_sup_norm(bump1(r=0.2))
    assert abs(g2 - g1) / g1 < 0.05


# ------------------------------------------------------------------ scaling


def test_scaling_zero_order_is_flat():
    rep = verify_norm_scaling(1, 0.1, 0, EPS_LADDER)
    assert abs(rep.slope) < 0.1
    assert rep.passed


def test_scaling_first_and_second_order_1d():
    for ell in (1, 2):
        rep = verify_norm_scaling(1, 0.1, ell, EPS_LADDER)
        assert rep.slope <= rep.bound_slope == (1 + ell) + 0.3
        assert rep.monotone
        assert rep.passed


def test_scaling_2d_first_order():
    rep = verify_norm_scaling(2, 0.08, 1, EPS_LADDER)
    assert rep.slope <= 3.3
    assert rep.passed


def test_scaling_requires_geometric_ladder():
    with pytest.raises(ValueError):
        verify_norm_scaling(1, 0.1, 1, [0.1, 0.05, 0.03, 0.02, 0.01])
    with pytest.raises(ValueError):
        verify_norm_scaling(1, 0.1, 1, [0.1, 0.05, 0.025, 0.0125])


# --------------------------------------------------------------------- psi


def cat():
    return make_system(CAT)


def test_psi_exact_plateau_and_support():
    psi = build_psi(cat(), (0.0, 0.0), 0.2, 0.02)
    assert psi.value_at(np.array([0.0, 0.0])) == 1.0
    assert psi.value_at(np.array([0.09, 0.0])) == 1.0
    # wrap across the torus seam
    assert psi.value_at(np.array([0.95, 0.98])) == 1.0
    assert psi.value_at(np.array([0.12, 0.0])) == 0.0
    assert psi.value_at(np.array([0.5, 0.5])) == 0.0


def test_psi_values_in_unit_interval():
    psi = build_psi(cat(), (0.3, 0.7), 0.2, 0.02)
    rng = np.random.default_rng(5)
    vals = psi.value_at(rng.random((500, 2)))
    assert np.all(vals >= 0.0) and np.all(vals <= 1.0)


def test_psi_integral_is_exact_mean_ball_measure():
    # convex combination of radius-0.11 ball indicators: pi 0.11^2 exactly,
    # inside the sandwich bracket [pi 0.1^2, pi 0.12^2]
    psi = build_psi(cat(), (0.0, 0.0), 0.2, 0.02)
    assert psi.integral_mu == math.pi * 0.11 ** 2
    assert math.pi * 0.1 ** 2 <= psi.integral_mu <= math.pi * 0.12 ** 2


def test_psi_profile_monotone_region():
    psi = build_psi(cat(), (0.25, 0.5), 0.2, 0.02)
    rad, vals = psi.profile()
    assert vals[0] == 1.0
    assert vals[-1] == 0.0
    assert np.all(vals[rad <= psi.r] == 1.0)
    assert np.all(vals[rad >= psi.support_radius] == 0.0)


def test_psi_guards():
    s = cat()
    with pytest.raises(SupportDoesNotEmbed):
        build_psi(s, (0.0, 0.0), 0.9, 0.1)
    with pytest.raises(RadiusTooLarge):
        build_psi(s, (0.0, 0.0), 0.3, 0.01)
    with pytest.raises(ValueError):
        build_psi(s, (0.0, 0.0), 0.2, 0.25)
    with pytest.raises(GridTooCoarse):
        build_psi(s, (0.0, 0.0), 0.2, 0.02, grid_size=64)
