import math

import numpy as np
import pytest

from gogrow.asymptotics import (
    InsufficientDataError,
    SupersolutionParams,
    check_envelopes,
    fit_front_delay,
    fkpp_reference,
    pp_operator_residual,
    pulled_beta_floor,
    pulled_local_defect,
    pulled_operator_residual,
    pulled_profile,
    pulled_profile_slope,
    supersolution_pp_local,
    supersolution_pulled,
    theoretical_delay,
    z_super,
)
from gogrow.diagnostics import FrontTrace
from gogrow.profiles import minimal_speed
from gogrow.solver import Model, make_config, make_state, stable_dt, step


def test_theoretical_delay():
    assert theoretical_delay(2.0) == 0.0
    assert theoretical_delay(1.0) == 0.5
    assert theoretical_delay(0.3) == 1.5


# ---------------------------------------------------------------------------
# delay fitting


def _synthetic_trace(r, b, c=2.0, noise=0.0, seed=0, t_max=400.0):
    t = np.arange(1.0, t_max + 0.5, 0.5)
    x = c * t - r * np.log(t) + b
    if noise:
        x = x + np.random.default_rng(seed).normal(0.0, noise, t.size)
    return FrontTrace(t=t, x_front=x)


def test_fit_exact_recovery():
    tr = _synthetic_trace(1.5, 3.0)
    fit = fit_front_delay(tr, 2.0, (1.0, 400.0))
    assert fit.r == pytest.approx(1.5, abs=1e-10)
    assert fit.b == pytest.approx(3.0, abs=1e-10)
    assert fit.stderr_r <= 1e-10


def test_fit_default_window():
    tr = _synthetic_trace(0.5, -1.0)
    fit = fit_front_delay(tr, 2.0)
    assert fit.window[0] == pytest.approx(50.0)
    assert fit.r == pytest.approx(0.5, abs=1e-9)


def test_fit_stderr_shrinks_with_window():
    tr = _synthetic_trace(1.5, 3.0, noise=0.05, seed=42)
    short = fit_front_delay(tr, 2.0, (50.0, 100.0))
    long = fit_front_delay(tr, 2.0, (50.0, 400.0))
    assert long.stderr_r < short.stderr_r


def test_fit_insufficient_data():
    t = np.arange(1.0, 4.0, 0.5)
    tr = FrontTrace(t=t, x_front=2.0 * t)
    with pytest.raises(InsufficientDataError):
        fit_front_delay(tr, 2.0, (1.0, 3.0))
    with pytest.raises(InsufficientDataError):
        fit_front_delay(_synthetic_trace(1.0, 0.0), 2.0, (0.1, 400.0))


# ---------------------------------------------------------------------------
# pushmi-pullyu supersolution


def test_pp_supersolution_values():
    p = SupersolutionParams(beta=3.0, K=4.5, t0=400.0)
    # plateau on the left
    assert supersolution_pp_local(p, 0.0, -10.0) == 1.0
    # unclipped right part exceeds 1 at z = 0: 3 exp(-4.5/20) ~ 2.396
    assert supersolution_pp_local(p, 0.0, 0.0) == 1.0
    assert 3.0 * math.exp(-4.5 / 20.0) == pytest.approx(2.396, abs=1e-3)
    # Gaussian factor wins far to the right
    assert supersolution_pp_local(p, 0.0, 200.0) < 1e-8


def test_pp_operator_residual_grid():
    p = SupersolutionParams(beta=3.0 * math.e, K=4.5, t0=400.0)
    t, z = np.meshgrid(np.linspace(0.0, 100.0, 41), np.linspace(0.05, 30.0, 160))
    assert float(pp_operator_residual(p, t, z).min()) >= -1e-10


def test_pp_operator_matches_finite_differences():
    p = SupersolutionParams(beta=3.0 * math.e, K=4.5, t0=400.0)

    def r_val(t, z):
        tp = t + p.t0
        return p.beta * math.exp(-z - z * z / (4 * tp) + (z * z / tp - p.K) / math.sqrt(tp))

    h = 1e-4
    for t, z in [(0.0, 1.0), (10.0, 5.0), (100.0, 20.0)]:
        ft = (r_val(t + h, z) - r_val(t - h, z)) / (2 * h)
        fz = (r_val(t, z + h) - r_val(t, z - h)) / (2 * h)
        fzz = (r_val(t, z + h) - 2 * r_val(t, z) + r_val(t, z - h)) / h**2
        lr = ft - fzz - (2.0 - 1.0 / (2.0 * (t + p.t0))) * fz - r_val(t, z)
        assert pp_operator_residual(p, t, z) == pytest.approx(lr / r_val(t, z), abs=5e-7)


# ---------------------------------------------------------------------------
# pulled supersolution


def test_pulled_operator_residual_grid():
    p = SupersolutionParams.pulled(0.0)
    assert p.K == pytest.approx(4.0 + (16.0 + 9.0 / 16.0) / 2.0)
    t, z = np.meshgrid(np.linspace(0.0, 100.0, 41), np.linspace(0.05, 30.0, 160))
    assert float(pulled_operator_residual(p, t, z).min()) >= -1e-10


def test_pulled_operator_matches_finite_differences():
    p = SupersolutionParams.pulled(0.0)
    h = 1e-4
    for t, z in [(0.0, 2.0), (50.0, 10.0)]:
        def r_val(tt, zz):
            return pulled_profile(p, tt, zz)
        ft = (r_val(t + h, z) - r_val(t - h, z)) / (2 * h)
        fz = (r_val(t, z + h) - r_val(t, z - h)) / (2 * h)
        fzz = (r_val(t, z + h) - 2 * r_val(t, z) + r_val(t, z - h)) / h**2
        lr = ft - fzz - (2.0 - 3.0 / (2.0 * (t + p.t0))) * fz - r_val(t, z)
        assert pulled_operator_residual(p, t, z) == pytest.approx(lr / r_val(t, z), abs=5e-7)


def test_pulled_profile_slope_consistent():
    p = SupersolutionParams.pulled(0.5, beta=40.0)
    h = 1e-6
    for t, z in [(0.0, 2.0), (30.0, 4.0)]:
        fd = (pulled_profile(p, t, z + h) - pulled_profile(p, t, z - h)) / (2 * h)
        assert pulled_profile_slope(p, t, z) == pytest.approx(fd, rel=1e-8)


def test_pulled_profile_zero_at_origin():
    p = SupersolutionParams.pulled(0.0)
    assert pulled_profile(p, 5.0, 0.0) == 0.0


def test_z_super_and_cusp_slopes():
    # beta chosen large enough that the cusp slope sits within eps_gap of -1
    for chi, beta in ((0.0, 40.0), (0.5, 130.0)):
        p = SupersolutionParams.pulled(chi, beta=beta)
        for t in (0.0, 10.0, 100.0, 1000.0):
            zs = z_super(p, t)
            assert pulled_profile(p, t, zs) == pytest.approx(1.0, abs=1e-9)
            assert abs(pulled_profile_slope(p, t, zs) + 1.0) < p.eps_gap


def test_z_super_rejects_small_beta():
    p = SupersolutionParams.pulled(0.0, beta=2.0)
    with pytest.raises(ValueError):
        z_super(p, 0.0)


def test_supersolution_pulled_branches():
    p = SupersolutionParams(
        beta=3.0 * math.e, K=4.0 + (16.0 + 9.0 / 16.0) / 2.0, t0=400.0,
        s_slope=0.75, eps_gap=0.125,
    )
    zs = z_super(p, 0.0)
    assert supersolution_pulled(p, Model.LOCAL_U, 0.0, zs - 2.0) == 1.0
    val = supersolution_pulled(p, Model.NONLOCAL_P, 0.0, zs - 2.0)
    assert val == pytest.approx(2.75)
    right = supersolution_pulled(p, Model.NONLOCAL_P, 0.0, zs + 1.0)
    assert right == pytest.approx(pulled_profile(p, 0.0, zs + 1.0))


@pytest.mark.parametrize("chi", [0.0, 0.5])
def test_pulled_local_shape_defect_nonnegative(chi):
    k = 4.0 + (16.0 + 9.0 / 16.0) / 2.0
    beta = 1.05 * pulled_beta_floor(chi, k, 400.0)
    p = SupersolutionParams.pulled(chi, beta=beta)
    for t in (0.0, 10.0, 100.0):
        zs = z_super(p, t)
        z = np.linspace(zs + 1e-9, 40.0, 500)
        assert float(pulled_local_defect(p, chi, t, z).min()) >= -1e-10


# ---------------------------------------------------------------------------
# envelopes and the FKPP reference


def test_check_envelopes_synthetic():
    cp = minimal_speed(2.0)
    t = np.arange(1.0, 51.0, 0.5)
    x = cp.c_star * t + 0.3
    x[10] = math.nan  # a front-less sample is skipped, not fatal
    tr = FrontTrace(t=t, x_front=x)
    rep = check_envelopes(tr, cp, I0=2.0, dx=0.05)
    assert rep.n_skipped == 1
    # bound: c t + 2 log 2 + 0.25 vs x = c t + 0.3
    assert rep.upper_margin_min == pytest.approx(2.0 * math.log(2.0) + 0.25 - 0.3)
    assert rep.upper_ok
    bad = FrontTrace(t=t, x_front=cp.c_star * t + 10.0)
    assert not check_envelopes(bad, cp, I0=2.0, dx=0.05).upper_ok


def test_check_envelopes_fkpp_margin():
    cp = minimal_speed(0.0)
    t = np.arange(1.0, 41.0, 1.0)
    ours = FrontTrace(t=t, x_front=2.0 * t)
    ref = FrontTrace(t=t, x_front=2.0 * t - 1.0)
    rep = check_envelopes(ours, cp, I0=1.0, dx=0.05, fkpp_trace=ref)
    assert rep.fkpp_ok and rep.fkpp_margin_min == pytest.approx(1.25)


def test_fkpp_fixed_points():
    cfg = make_config(model="fkpp", chi=0.0, dx=0.1, t_end=1.0)
    st = make_state(cfg)
    st.field[:] = 0.0
    out = step(st, cfg, stable_dt(cfg))
    assert np.all(out.field == 0.0)
    st.field[:] = 1.0
    out = step(st, cfg, stable_dt(cfg))
    assert np.max(np.abs(out.field[:-1] - 1.0)) <= 1e-14


def test_fkpp_reference_runs():
    cfg = make_config(model="local_u", chi=0.0, dx=0.1, t_end=5.0)
    tr = fkpp_reference(cfg, trace_every=1.0)
    assert tr.t[-1] == pytest.approx(5.0)
    assert np.all(np.isfinite(tr.x_front))
    # half-level front moves right at a speed below 2
    assert 0.0 < tr.x_front[-1] - tr.x_front[0] <= 10.0
