import math

import numpy as np
import pytest

from parabranch import kernels as K
from parabranch.classify import x0
from parabranch.errors import ParabranchError
from parabranch.phase import (AxisSpec, multimodal_scatter, scatter_rows_to_csv,
                              survival_boundary, sweep)

LN2 = math.log(2.0)


def test_boundary_uniform_closed_form():
    assert survival_boundary(K.Uniform(), 0.0) == pytest.approx(
        3 + 2 * math.sqrt(2), rel=1e-8)


def test_boundary_equal_closed_form():
    for qr in (0.0, 0.4):
        assert survival_boundary(K.Equal(), qr) == pytest.approx(
            x0(qr) * LN2, rel=1e-8)


def test_boundary_above_symmetric_floor():
    rng = np.random.default_rng(1)
    for _ in range(25):
        from conftest import random_kernel
        kern = random_kernel(rng)
        qr = float(rng.uniform(0.0, 0.9))
        assert survival_boundary(kern, qr) >= x0(qr) * LN2 - 1e-8


def test_boundary_deterministic_is_minimum_at_fixed_min_share():
    rng = np.random.default_rng(2)
    vt = 0.22
    det = survival_boundary(K.Deterministic(vt), 0.0)
    for _ in range(50):
        n = int(rng.integers(2, 5))
        # random finite-point kernels with min-share exactly vt
        while True:
            zs = rng.uniform(1e-3, 0.5 - 1e-6, n)
            ws = rng.uniform(0.05, 1.0, n)
            ps = ws / (2 * ws.sum())
            share = 2 * float(np.sum(ps * zs))
            scale = vt / share
            zs = zs * scale
            if np.all(zs < 0.5 - 1e-9):
                break
        kern = K.FinitePoint(tuple(zip(zs.tolist(), ps.tolist())))
        assert abs(K.moments(kern).min_share - vt) < 1e-12
        assert survival_boundary(kern, 0.0) >= det - 1e-6


def test_two_mode_boundary_grows_as_z1_shrinks():
    vt = 0.2
    bounds = []
    for z1 in (1e-2, 1e-4, 1e-6):
        p1 = 0.1
        p2 = 0.4
        z2 = (vt - 2 * p1 * z1) / (2 * p2)
        kern = K.FinitePoint(((z1, p1), (z2, p2)))
        bounds.append(survival_boundary(kern, 0.0))
    assert bounds[0] < bounds[1] < bounds[2]


def test_sweep_colors_and_flip():
    grid = sweep("beta", AxisSpec(0.0, 6.0, 24, log_scaled=True),
                 AxisSpec(-0.9, 12.0, 10), q_over_r=0.0)
    colors = set(grid.color.ravel().tolist())
    assert colors == {"green", "orange", "red"}
    # regime flips at most once (extinction above) along each column
    for j in range(grid.param.shape[0]):
        surv = np.array([reg == "MeanSurvival" for reg in grid.regime_rand[:, j]])
        flips = np.count_nonzero(surv[:-1] != surv[1:])
        assert flips <= 1
        if flips == 1:
            assert surv[0] and not surv[-1]
        surv_d = np.array([reg == "MeanSurvival" for reg in grid.regime_det[:, j]])
        flips_d = np.count_nonzero(surv_d[:-1] != surv_d[1:])
        assert flips_d <= 1


def test_sweep_paired_min_share_consistency():
    grid = sweep("beta", AxisSpec(0.0, 2.0, 3, log_scaled=True),
                 AxisSpec(-0.5, 8.0, 6), q_over_r=0.0)
    for a in grid.param:
        assert K.z_of_alpha(a) == pytest.approx(
            K.moments(K.BetaSym(a)).min_share, abs=1e-10)


def test_sweep_rejects_degenerate():
    with pytest.raises(ParabranchError):
        sweep("beta", AxisSpec(0.0, 6.0, 4), AxisSpec(-0.9, 2.0, 4), q_over_r=1.5)
    with pytest.raises(ParabranchError):
        AxisSpec(1.0, 1.0, 4)


def test_scatter_reproducible_and_on_or_above_deterministic_curve():
    rows = multimodal_scatter(n_modes=2, draws=12, q_over_r=0.0, seed=5)
    rows2 = multimodal_scatter(n_modes=2, draws=12, q_over_r=0.0, seed=5)
    assert rows == rows2
    for vt, boundary, n, seed, k in rows:
        det = survival_boundary(K.Deterministic(vt), 0.0)
        assert boundary >= det - 1e-6
        assert 0.0 < vt < 0.5


def test_scatter_single_mode_degenerates_to_deterministic():
    rows = multimodal_scatter(n_modes=1, draws=6, q_over_r=0.0, seed=9)
    for vt, boundary, *_ in rows:
        det = survival_boundary(K.Deterministic(vt), 0.0)
        assert boundary == pytest.approx(det, rel=1e-7)


def test_scatter_csv_schema():
    rows = multimodal_scatter(n_modes=2, draws=3, q_over_r=0.0, seed=1)
    text = scatter_rows_to_csv(rows)
    lines = text.strip().split("\n")
    assert lines[0] == "vartheta,boundary,n_modes,seed,draw_index"
    assert len(lines) == 4
