"""The peeling-process differential equations and the density threshold."""

import io

import numpy as np
import pytest

from oracles import classical_core_fixed_point
from wkorient.hypergraph import OrientationParams
from wkorient.models import RngSeed, sample_uniform_multi
from wkorient.ode import (
    OdeParams,
    OdeState,
    derivatives,
    f_star,
    find_threshold,
    integrate,
    trajectory_vs_trace,
)
from wkorient.peeling import rancore
from wkorient.poisson import initial_conditions, poisson_tail

P324 = OrientationParams(3, 2, 4)
FAST = dict(rtol=1e-10, atol=1e-12)


def _solve(p, mu_bar, **kw):
    return integrate(OdeParams(p, mu_bar, **{**FAST, **kw}))


# ---------------------------------------------------------------------------
# pieces


def test_f_star_cases():
    assert f_star(0.0, 0.0, 0.5) == 0.0
    assert f_star(0.2, 0.4, 0.5) == pytest.approx(0.2 * 0.2 / (0.5 * 0.4))
    assert f_star(0.7, 0.4, 0.5) == pytest.approx(0.4 / 0.5)  # a overshoots b
    assert f_star(-0.2, -0.4, 0.5) == pytest.approx(0.2 * 0.2 / (0.5 * 0.4))
    assert f_star(0.3, 0.0, 0.5) == 0.0
    assert f_star(0.2, 0.4, 0.0) == 0.0  # outside the domain, events own it


def test_ode_params_validation():
    with pytest.raises(ValueError):
        OdeParams(P324, -1.0)
    with pytest.raises(ValueError):
        OdeParams(P324, 5.0, rtol=0.0)
    with pytest.raises(ValueError):
        OdeParams(P324, 5.0, samples=1)
    with pytest.raises(ValueError):
        integrate(OdeParams(P324, 5.0), lambda_mode="magic")


def test_state_vector_round_trip():
    params = OdeParams(P324, 6.0, **FAST)
    traj, _ = integrate(params)
    mid = len(traj.x) // 2
    state = OdeState.from_vector(traj.x[mid], traj.y[:, mid], params)
    assert state.to_vector(params) == pytest.approx(traj.y[:, mid], abs=0.0)
    assert state.z_B - state.z_L == pytest.approx(state.mu * state.z_HV)


def test_initial_ball_derivative():
    # one ball is recoloured per unit of x; with w >= 2 nothing else moves
    # at the start, while w = 1 kills the whole remaining edge alongside
    for p, mu_bar, want in [
        (P324, 6.0, -1.0),
        (OrientationParams(4, 3, 2), 8.0, -1.0),
        (OrientationParams(2, 1, 2), 5.0, -2.0),
    ]:
        params = OdeParams(p, mu_bar, **FAST)
        traj, _ = integrate(params)
        i_zB = 2 * (p.w - 1) + 1
        rates = [
            derivatives(OdeState.from_vector(traj.x[i], traj.y[:, i], params), params)[
                i_zB
            ]
            for i in range(len(traj.x))
        ]
        assert rates[0] == pytest.approx(want, abs=1e-9)
        assert max(rates) <= -1.0 + 1e-9


def test_domain_is_checked_up_front():
    with pytest.raises(ValueError, match="not above k\\+2"):
        integrate(OdeParams(P324, 2.0))
    with pytest.raises(ValueError, match="no heavy vertices"):
        integrate(OdeParams(P324, 1e-300))


# ---------------------------------------------------------------------------
# whole trajectories


def test_supercritical_run_keeps_a_core():
    traj, stats = _solve(P324, 6.0)
    assert stats.terminated_by == "z_L"
    assert not stats.empty
    assert 0.0 < stats.alpha <= 1.0
    assert stats.kappa > P324.k  # above the threshold the core is too dense
    assert set(stats.beta) == {3, 2}
    assert all(b >= 0.0 for b in stats.beta.values())
    # density bounds from the size window: every core edge of size s
    # contributes s balls and s-(h-w) sign demands
    assert stats.kappa <= stats.mu_hat * P324.w / P324.h + 1e-12
    assert stats.kappa >= stats.mu_hat / (P324.h - P324.w + 1) - 1e-12


def test_mildly_subcritical_core_is_orientable():
    _, stats = _solve(P324, 5.0)
    assert stats.terminated_by == "z_L"
    assert 0.0 < stats.alpha < 0.5
    assert stats.kappa < P324.k


def test_strongly_subcritical_core_vanishes():
    _, stats = _solve(P324, 4.5)
    assert stats.empty
    assert stats.terminated_by == "mu_floor"
    assert stats.kappa == 0.0 and stats.mu_hat == 0.0


def test_monotone_sample_columns():
    traj, _ = _solve(P324, 5.485)
    cols = traj.columns()
    assert (np.diff(cols["x"]) > 0).all()
    assert (np.diff(cols["z_B"]) < 0).all()
    assert (np.diff(cols["z_L"]) < 0).all()
    assert (cols["z_B"] - cols["z_L"] >= -1e-12).all()
    assert (cols["mu"] > P324.k + 2).all()  # strict until the terminal event
    for s in (3, 2):
        assert (cols[f"z_H_{s}"] >= -1e-9).all()


def test_w1_reduction_matches_classical_fixed_points():
    # with w = 1 the core is the plain min-degree-(k+1) core, whose size
    # solves a scalar fixed-point equation; four pinned cases
    cases = [
        ((2, 2), 5.0, 0.852805964569, 5.29489981673),
        ((3, 2), 6.0, 0.925562444723, 6.07145510553),
        ((3, 3), 9.0, 0.9768450781, 9.02448933921),
        ((2, 3), 6.0, 0.7927389608, 6.24804106049),
    ]
    for (h, k), mu_bar, alpha, mu_hat in cases:
        a_or, m_or = classical_core_fixed_point(h, k, mu_bar)
        assert float(a_or) == pytest.approx(alpha, rel=1e-9)
        assert float(m_or) == pytest.approx(mu_hat, rel=1e-9)
        _, stats = _solve(OrientationParams(h, 1, k), mu_bar)
        assert stats.alpha == pytest.approx(alpha, rel=1e-7)
        assert stats.mu_hat == pytest.approx(mu_hat, rel=1e-7)


def test_lambda_modes_agree():
    _, alg = _solve(P324, 5.485)
    _, via_ode = integrate(OdeParams(P324, 5.485, **FAST), lambda_mode="ode")
    assert via_ode.kappa == pytest.approx(alg.kappa, abs=1e-8)
    assert via_ode.alpha == pytest.approx(alg.alpha, abs=1e-8)
    assert via_ode.x_star == pytest.approx(alg.x_star, abs=1e-8)


def test_almost_everything_is_heavy_at_large_mean():
    # the peelable remnant shrinks like the light tail of the degree law
    for mu_bar in (20.0, 30.0):
        _, stats = _solve(P324, mu_bar)
        slack = 3.0 * (1.0 - poisson_tail(P324.k, mu_bar)) * mu_bar
        assert 0.0 < stats.x_star <= slack
        assert stats.alpha >= 1.0 - 8.0 * slack


def test_all_light_mass_underflows_to_instant_core():
    traj, stats = integrate(OdeParams(P324, 1e4))
    z_l0, _, z_hv0, _ = initial_conditions(1e4, P324.k)
    assert z_l0 == 0.0
    assert stats.x_star == 0.0
    assert stats.alpha == z_hv0
    assert traj.dense is None
    assert len(traj.x) == 1
    with pytest.raises(ValueError):
        trajectory_vs_trace(traj, None)


def test_trajectory_csv_layout():
    traj, _ = _solve(P324, 6.0, samples=16)
    buf = io.StringIO()
    traj.to_csv(buf)
    lines = buf.getvalue().strip().split("\n")
    assert lines[0] == "x,z_L,z_B,z_HV,z_L_3,z_L_2,z_H_3,z_H_2,lambda,mu"
    assert len(lines) >= 17
    first = dict(zip(lines[0].split(","), map(float, lines[1].split(","))))
    z_l0, z_b0, z_hv0, _ = initial_conditions(6.0, P324.k)
    assert first["x"] == 0.0
    assert first["z_L"] == pytest.approx(z_l0, rel=1e-9)
    assert first["z_B"] == pytest.approx(z_b0, rel=1e-9)
    assert first["z_HV"] == pytest.approx(z_hv0, rel=1e-9)


# ---------------------------------------------------------------------------
# the threshold and the simulated process


def test_threshold_brackets_the_known_crossing():
    res = find_threshold(P324, tol=1e-3, rtol=1e-9, atol=1e-11)
    assert 5.4 < res.mu_tilde < 5.6
    assert res.bracket[1] - res.bracket[0] <= 1e-3
    assert res.kappa_lo <= P324.k < res.kappa_hi
    assert res.stats_at_threshold is not None
    assert res.mu_hat == pytest.approx(6.65, abs=0.05)
    with pytest.raises(ValueError):
        find_threshold(P324, tol=0.0)


def test_threshold_stays_below_counting_bound():
    # hk/w balls per vertex is a hard wall; the threshold sits strictly under
    res = find_threshold(OrientationParams(10, 2, 4), tol=1e-3, rtol=1e-9, atol=1e-11)
    assert res.mu_tilde < 10 * 4 / 2


@pytest.mark.slow
def test_simulated_process_converges_to_trajectory():
    traj, _ = _solve(P324, 5.0)
    devs = {}
    for n, seed in [(1000, 3), (10000, 3)]:
        H = sample_uniform_multi(n, round(5.0 * n / 3), 3, RngSeed(seed, 1).generator())
        pr = rancore(H, P324, mode="randomized", rng=RngSeed(seed, 2).generator(), trace=True)
        devs[n] = trajectory_vs_trace(traj, pr.trace)
    assert set(devs[1000]) == set(devs[10000])
    for var, coarse in devs[1000].items():
        assert devs[10000][var] < max(coarse, 0.01)
    assert max(devs[10000].values()) < 0.1
