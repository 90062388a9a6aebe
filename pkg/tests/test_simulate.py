import math

import numpy as np
import pytest

from parabranch import kernels as K
from parabranch.classify import ModelParams, StableJumpParams
from parabranch.errors import ParabranchError, SnapshotsMissing
from parabranch.simulate import (ModelFunctions, SimConfig, infected_fraction,
                                 simulate_population, _stable_increments)
from parabranch.spine import SpineConfig, mean_cells_via_spine

ST = StableJumpParams(b=-0.5, c=-1.0)


def _bd_model():
    return ModelFunctions.multiplicative(0.0, 0.0, K.Uniform())


# ---------------------------------------------------------------------------
# birth-death backbone


def test_mean_population_pure_birth():
    cfg = SimConfig(t_max=1.5, reps=8000, seed=1, record_times=(1.5,))
    traj = simulate_population(_bd_model(), 1.0, 0.0, cfg)
    m, se = traj.mean_n(1.5)
    assert abs(m - math.exp(1.5)) < 4 * se


def test_birth_death_first_and_second_moments():
    r, q, t = 1.0, 0.5, 1.0
    cfg = SimConfig(t_max=t, reps=20_000, seed=2, record_times=(t,))
    traj = simulate_population(_bd_model(), r, q, cfg)
    m, se = traj.mean_n(t)
    assert abs(m - math.exp((r - q) * t)) < 4 * se
    w2 = (traj.n_cells[:, 0] * math.exp(-(r - q) * t)) ** 2
    exact = 1 + (r + q) / (r - q) * (1 - math.exp(-(r - q) * t))
    assert abs(w2.mean() - exact) < 5 * w2.std() / math.sqrt(cfg.reps)


def test_second_moment_limit_at_t5():
    # E[(N_t e^{-(r-q)t})^2] -> 1 + (r+q)/(r-q)
    r, q, t = 1.0, 0.5, 5.0
    cfg = SimConfig(t_max=t, reps=20_000, seed=3, record_times=(t,))
    traj = simulate_population(_bd_model(), r, q, cfg)
    w2 = (traj.n_cells[:, 0] * math.exp(-(r - q) * t)) ** 2
    limit = 1 + (r + q) / (r - q)
    assert abs(w2.mean() - limit) < 5 * w2.std() / math.sqrt(cfg.reps)


def test_x0_zero_keeps_loads_zero():
    model = ModelFunctions.multiplicative(3.0, 0.8, K.Uniform())
    cfg = SimConfig(t_max=2.0, reps=200, seed=4, x0=0.0, record_times=(1.0, 2.0),
                    snapshots=True)
    traj = simulate_population(model, 1.0, 0.2, cfg)
    assert np.array_equal(traj.n_cells, traj.c_cells)
    for t in (1.0, 2.0):
        _, loads = traj._snapshot(t)
        assert np.all(loads == 0.0)


# ---------------------------------------------------------------------------
# load bookkeeping


def test_branch_load_conservation():
    # pure splitting (g = sigma = q = 0): total load is conserved up to one
    # ulp per division (the complement daughter is x - theta*x by construction)
    model = ModelFunctions.multiplicative(0.0, 0.0, K.BetaSym(1.0))
    cfg = SimConfig(t_max=3.0, reps=200, seed=5, record_times=(3.0,), snapshots=True)
    traj = simulate_population(model, 1.0, 0.0, cfg)
    rep_idx, loads = traj._snapshot(3.0)
    sums = np.zeros(cfg.reps)
    np.add.at(sums, rep_idx, loads)
    assert np.allclose(sums, 1.0, rtol=1e-12, atol=0)


def test_determinism_same_seed():
    model = ModelFunctions.multiplicative(1.0, 0.5, K.Uniform())
    cfg = SimConfig(t_max=2.0, reps=300, seed=6, record_times=(1.0, 2.0), snapshots=True)
    t1 = simulate_population(model, 1.0, 0.3, cfg)
    t2 = simulate_population(model, 1.0, 0.3, cfg)
    assert np.array_equal(t1.n_cells, t2.n_cells)
    assert np.array_equal(t1.c_cells, t2.c_cells)
    for k in range(2):
        assert np.array_equal(t1.snapshots[k][0], t2.snapshots[k][0])
        assert np.array_equal(t1.snapshots[k][1], t2.snapshots[k][1])


def test_determinism_euler_lane():
    model = ModelFunctions.multiplicative(1.0, 0.2, K.Uniform(), stable=ST)
    cfg = SimConfig(t_max=1.0, reps=200, seed=7, dt=0.02, record_times=(1.0,),
                    snapshots=True)
    t1 = simulate_population(model, 1.0, 0.1, cfg)
    t2 = simulate_population(model, 1.0, 0.1, cfg)
    assert np.array_equal(t1.n_cells, t2.n_cells)
    assert np.array_equal(t1.snapshots[0][1], t2.snapshots[0][1])


def test_max_cells_aborts_and_flags():
    model = _bd_model()
    cfg = SimConfig(t_max=6.0, reps=20, seed=8, record_times=(6.0,), max_cells=8)
    traj = simulate_population(model, 2.0, 0.0, cfg)
    assert len(traj.aborted) > 0
    assert all(0 <= r < 20 for r in traj.aborted)


def test_snapshots_missing_raises():
    cfg = SimConfig(t_max=1.0, reps=10, seed=9, record_times=(1.0,), snapshots=False)
    traj = simulate_population(_bd_model(), 1.0, 0.0, cfg)
    with pytest.raises(SnapshotsMissing):
        traj.count_above(1.0, 0.5)


def test_model_function_origin_validation():
    with pytest.raises(ParabranchError):
        ModelFunctions(drift=lambda x: x + 1.0, diffusion2=lambda x: 0.0 * x,
                       jump_rate=lambda x: 0.0 * x)


# ---------------------------------------------------------------------------
# exploded cells


def test_explosions_counted_in_n_not_c():
    model = ModelFunctions.multiplicative(1.0, 0.0, K.Uniform(), stable=ST)
    cfg = SimConfig(t_max=2.0, reps=400, seed=10, dt=0.01, record_times=(2.0,),
                    snapshots=True, explosion_cap=1e6)
    traj = simulate_population(model, 1.0, 0.0, cfg)
    n = traj.n_cells[:, 0].sum()
    c = traj.c_cells[:, 0].sum()
    assert c < n                        # some cells exploded
    _, loads = traj._snapshot(2.0)
    assert np.isinf(loads).sum() == n - c
    assert np.all(traj.c_cells <= traj.n_cells)


def test_explosion_inherited_by_daughters():
    # with a tiny cap every division of an exploded parent produces exploded
    # daughters; C collapses to 0 while N keeps growing like e^{rt}
    model = ModelFunctions.multiplicative(5.0, 0.0, K.Uniform(), stable=ST)
    cfg = SimConfig(t_max=2.0, reps=300, seed=11, dt=0.01, record_times=(2.0,),
                    explosion_cap=1.5, x0=1.0)
    traj = simulate_population(model, 1.0, 0.0, cfg)
    mn, se_n = traj.mean_n(2.0)
    mc, _ = traj.mean_c(2.0)
    assert abs(mn - math.exp(2.0)) < 4 * se_n
    assert mc < 0.2 * mn


def test_cap_sensitivity_within_noise():
    # the cap stands in for +infinity: multiplying it by 100 must not move
    # the mean alive count by more than one standard error of the difference
    base = dict(t_max=2.0, reps=8000, seed=12, dt=0.005, record_times=(2.0,))
    model = ModelFunctions.multiplicative(1.0, 0.0, K.Uniform(), stable=ST)
    t1 = simulate_population(model, 1.0, 0.0, SimConfig(explosion_cap=1e10, **base))
    t2 = simulate_population(model, 1.0, 0.0, SimConfig(explosion_cap=1e12, **base))
    m1, se1 = t1.mean_c(2.0)
    m2, se2 = t2.mean_c(2.0)
    assert abs(m1 - m2) < math.hypot(se1, se2)


# ---------------------------------------------------------------------------
# stable-increment sampler (Laplace-transform oracle)


@pytest.mark.parametrize("lam", [0.5, 1.0, 3.0])
def test_stable_increment_laplace_transform(lam):
    rng = np.random.default_rng(13)
    st = StableJumpParams(b=-0.5, c=-1.0)
    x = np.full(300_000, 2.0)
    h = 0.05
    s = _stable_increments(rng, x, h, st)
    emp = np.exp(-lam * s)
    target = math.exp(h * 2.0 * st.c * lam ** (1 + st.b))
    assert abs(emp.mean() - target) < 4 * emp.std() / math.sqrt(len(s))


def test_stable_increment_other_index():
    rng = np.random.default_rng(14)
    st = StableJumpParams(b=-0.3, c=-0.7)
    x = np.full(300_000, 1.0)
    h = 0.1
    s = _stable_increments(rng, x, h, st)
    for lam in (0.7, 2.0):
        emp = np.exp(-lam * s)
        target = math.exp(h * st.c * lam ** (1 + st.b))
        assert abs(emp.mean() - target) < 4 * emp.std() / math.sqrt(len(s))


# ---------------------------------------------------------------------------
# Euler integrator quality


def test_euler_strong_convergence_order_half():
    # strong error of the Euler scheme against the exact GBM solution on a
    # shared Brownian path halves like sqrt(dt):
    g, sigma, t = 1.0, 0.5, 1.0
    rng = np.random.default_rng(15)
    n_fine = 1 << 12
    dt_fine = t / n_fine
    paths = 400
    dw = rng.standard_normal((paths, n_fine)) * math.sqrt(2 * sigma ** 2 * dt_fine)
    w_total = dw.sum(axis=1)
    x_exact = np.exp((g - sigma ** 2) * t + w_total)
    errs = []
    dts = []
    for level in (4, 5, 6, 7):                 # dt = t / 2^level
        n = 1 << level
        step = n_fine // n
        x = np.ones(paths)
        for k in range(n):
            inc = dw[:, k * step:(k + 1) * step].sum(axis=1)
            x = x + g * x * (t / n) + x * inc
        errs.append(np.abs(np.log(x) - np.log(x_exact)).mean())
        dts.append(t / n)
    slope = np.polyfit(np.log(dts), np.log(errs), 1)[0]
    assert 0.3 <= slope <= 0.7


def test_euler_matches_exact_lane_in_distribution():
    # same multiplicative model via both integrators; means agree within noise
    kern = K.Uniform()
    exact_model = ModelFunctions.multiplicative(1.0, 0.4, kern)
    euler_model = ModelFunctions(drift=lambda x: 1.0 * x,
                                 diffusion2=lambda x: (0.4 * x) ** 2,
                                 jump_rate=lambda x: 0.0 * x, kernel=kern)
    assert not euler_model.is_pure_multiplicative
    cfg_a = SimConfig(t_max=2.0, reps=4000, seed=16, record_times=(2.0,), snapshots=True)
    cfg_b = SimConfig(t_max=2.0, reps=4000, seed=17, dt=0.002,
                      record_times=(2.0,), snapshots=True)
    ta = simulate_population(exact_model, 1.0, 0.2, cfg_a)
    tb = simulate_population(euler_model, 1.0, 0.2, cfg_b)
    fa = ta.functional_sums(2.0, lambda x: np.exp(-x))
    fb = tb.functional_sums(2.0, lambda x: np.exp(-x))
    za = fa.mean() - fb.mean()
    se = math.hypot(fa.std() / math.sqrt(len(fa)), fb.std() / math.sqrt(len(fb)))
    assert abs(za) < 4 * se


# ---------------------------------------------------------------------------
# cross-check against the spine estimator


def test_mean_cells_vs_spine_smoke():
    params = ModelParams(g=1.0, sigma=0.0, r=1.0, q=0.0)
    model = ModelFunctions.multiplicative(1.0, 0.0, K.Uniform(), stable=ST)
    cfg = SimConfig(t_max=2.0, reps=3000, seed=18, dt=0.004, record_times=(2.0,))
    traj = simulate_population(model, 1.0, 0.0, cfg)
    mc, sec = traj.mean_c(2.0)
    est, se = mean_cells_via_spine(params, K.Uniform(), ST, 2.0, 1.0,
                                   SpineConfig(t_max=2.0, reps=10_000, seed=19))
    assert abs(mc - est) < 3 * math.hypot(sec, se)


# ---------------------------------------------------------------------------
# infected fractions


def _fraction_traj():
    model = ModelFunctions.multiplicative(0.2, 0.0, K.Uniform())
    cfg = SimConfig(t_max=4.0, reps=400, seed=20, record_times=(1.0, 4.0), snapshots=True)
    return simulate_population(model, 1.0, 0.3, cfg)


def test_infected_fraction_zero_start():
    model = ModelFunctions.multiplicative(1.0, 0.0, K.Uniform())
    cfg = SimConfig(t_max=2.0, reps=200, seed=21, x0=0.0, record_times=(2.0,),
                    snapshots=True)
    traj = simulate_population(model, 1.0, 0.0, cfg)
    for mode, kw in (("above_growing", {"eta": 1.0, "eps": 0.2}),
                     ("above_const", {"eps": 0.5}), ("positive", {})):
        _, mean, _, _ = infected_fraction(traj, mode, **kw)
        assert np.all(mean == 0.0)


def test_infected_fraction_decreases_subcritical():
    traj = _fraction_traj()   # drift g + 2 r E[ln T] = 0.2 - 2 < 0
    _, mean, _, _ = infected_fraction(traj, "above_const", eps=0.2)
    assert mean[1] < mean[0]


def test_infected_fraction_statement_exponent():
    traj = _fraction_traj()
    t, a, _, _ = infected_fraction(traj, "above_growing", eta=1.0, eps=0.1, r=1.0,
                                   statement_exponent=True)
    t, b, _, _ = infected_fraction(traj, "above_growing", eta=1.0, eps=0.1)
    # statement exponent eta/2r - eps = 0.4 < proof exponent 0.9: lower bar
    assert np.all(a >= b)


def test_infected_fraction_bad_mode():
    traj = _fraction_traj()
    with pytest.raises(ParabranchError):
        infected_fraction(traj, "above_mean")
    with pytest.raises(ParabranchError):
        infected_fraction(traj, "above_const")   # missing eps
