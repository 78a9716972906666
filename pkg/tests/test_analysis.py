import math

import numpy as np
import pytest
from scipy.special import erfc

from replicator_lab import analysis, dynamics, engine, games
from conftest import random_interior, srd_unit


def fd_check_gradient(field, points, tol=1e-6):
    grad = field.gradient(points)
    assert grad is not None
    h = 1e-6
    for i, row in enumerate(points):
        for a in range(row.size):
            up = [r.copy() for r in points]
            dn = [r.copy() for r in points]
            up[i][a] += h
            dn[i][a] -= h
            fd = (field.value(up) - field.value(dn)) / (2 * h)
            assert grad[i][a] == pytest.approx(fd, abs=tol, rel=1e-4)


# -- scalar fields ------------------------------------------------------------------

def test_coordinate_field_basics():
    f = analysis.CoordinateField(1, 0)
    pts = [np.array([0.2, 0.8]), np.array([0.3, 0.7])]
    assert f.value(pts) == 0.3
    grad = f.gradient(pts)
    assert grad[1].tolist() == [1.0, 0.0]
    assert np.all(grad[0] == 0.0)
    assert np.all(f.hessian_block(pts, 0) == 0.0)


def test_linear_field_gradient_matches_fd():
    f = analysis.LinearField((np.array([1.0, -2.0]), np.array([0.5, 3.0])))
    pts = [np.array([0.2, 0.8]), np.array([0.3, 0.7])]
    assert f.value(pts) == pytest.approx(0.2 - 1.6 + 0.15 + 2.1)
    fd_check_gradient(f, pts)


def test_inverse_y_field_value_and_derivatives():
    lam = (0.5, 1.5)
    f = analysis.InverseYField(anchors=(1, 0), lambdas=lam)
    pts = [np.array([0.3, 0.7]), np.array([0.6, 0.4])]
    manual = (0.3 ** 0.5) / (0.7 ** 0.5) + (0.4 ** 1.5) / (0.6 ** 1.5)
    assert f.value(pts) == pytest.approx(manual, abs=1e-12)
    fd_check_gradient(f, pts, tol=1e-5)
    h = 1e-5
    blk = f.hessian_block(pts, 0)
    for a in range(2):
        for b in range(2):
            up = [r.copy() for r in pts]
            dn = [r.copy() for r in pts]
            up[0][a] += h
            dn[0][a] -= h
            gu = f.gradient(up)[0][b]
            gd = f.gradient(dn)[0][b]
            assert blk[a, b] == pytest.approx((gu - gd) / (2 * h), abs=1e-4, rel=1e-4)


def test_exp_logit_field_value_and_gradient():
    f = analysis.ExpLogitField(anchors=(1, 1), weights=(2.0, 0.5))
    pts = [np.array([0.3, 0.7]), np.array([0.6, 0.4])]
    manual = (0.3 / 0.7) ** 2.0 + (0.6 / 0.4) ** 0.5
    assert f.value(pts) == pytest.approx(manual, abs=1e-12)
    fd_check_gradient(f, pts, tol=1e-5)


def test_exp_logit_needs_dyadic_strategies():
    with pytest.raises(ValueError):
        analysis.ExpLogitField(anchors=(0,), weights=(1.0,)).value([np.array([0.2, 0.3, 0.5])])


def test_potential_field_value(neg_load_game):
    pot = games.rosenthal_potential(neg_load_game)
    f = analysis.PotentialField(potential=pot, offset=pot.at_pure((0, 1)))
    v = games.MixedProfile.vertex((2, 2), (0, 1))
    assert f.value(list(v.points)) == pytest.approx(0.0, abs=1e-12)
    w = games.MixedProfile.vertex((2, 2), (1, 1))
    assert f.value(list(w.points)) == pytest.approx(1.0, abs=1e-12)
    fd_check_gradient(f, [np.array([0.4, 0.6]), np.array([0.3, 0.7])])


def test_batch_value_agrees_with_value(pd_game):
    rng = np.random.default_rng(12)
    fields = [
        analysis.CoordinateField(0, 1),
        analysis.LinearField((np.array([1.0, 2.0]), np.array([0.0, -1.0]))),
        analysis.InverseYField(anchors=(1, 1), lambdas=(1.0, 1.0)),
        analysis.ExpLogitField(anchors=(1, 1), weights=(1.0, 1.0)),
    ]
    profs = [random_interior(rng, (2, 2)) for _ in range(30)]
    stacked = [np.stack([p.points[i] for p in profs]) for i in range(2)]
    for f in fields:
        batch = f.batch_value(stacked)
        solo = np.array([f.value(list(p.points)) for p in profs])
        assert np.allclose(batch, solo, atol=1e-12)


def test_field_from_json_dispatch(pd_game, neg_load_game):
    f = analysis.field_from_json({"name": "coordinate", "player": 0, "strategy": 1}, pd_game)
    assert isinstance(f, analysis.CoordinateField)
    f = analysis.field_from_json(
        {"name": "inverse_y", "anchors": [1, 1], "lambdas": 0.5}, pd_game)
    assert isinstance(f, analysis.InverseYField)
    f = analysis.field_from_json({"name": "exp_logit", "anchors": [1, 1]}, pd_game)
    assert isinstance(f, analysis.ExpLogitField)
    f = analysis.field_from_json({"name": "potential"}, neg_load_game)
    assert isinstance(f, analysis.PotentialField)
    with pytest.raises(ValueError):
        analysis.field_from_json({"name": "mystery"}, pd_game)


# -- the generator ---------------------------------------------------------------------

def test_generator_on_coordinates_is_the_drift(pd_game, pd_srd):
    rng = np.random.default_rng(13)
    for _ in range(10):
        state = random_interior(rng, (2, 2))
        field_val = dynamics.eval_field(pd_srd, pd_game, state)
        for i in range(2):
            for a in range(2):
                lf = analysis.apply_generator(
                    pd_srd, pd_game, analysis.CoordinateField(i, a), state)
                assert lf == pytest.approx(field_val.drift[i][a], abs=1e-12)


def test_generator_is_linear(pd_game, pd_srd):
    # L(c1 f + c2 g) = c1 Lf + c2 Lg within 1e-9
    rng = np.random.default_rng(14)
    f = analysis.InverseYField(anchors=(1, 1), lambdas=(1.0, 1.0))
    g = analysis.CoordinateField(0, 0)
    combo = analysis.LinearCombinationField(((2.5, f), (-1.25, g)))
    for _ in range(10):
        state = random_interior(rng, (2, 2), alpha=2.0)
        lhs = analysis.apply_generator(pd_srd, pd_game, combo, state)
        rhs = 2.5 * analysis.apply_generator(pd_srd, pd_game, f, state) \
            - 1.25 * analysis.apply_generator(pd_srd, pd_game, g, state)
        assert lhs == pytest.approx(rhs, abs=1e-9)


def test_generator_fd_fallback_matches_analytic(pd_game, pd_srd):
    # a field without analytic derivatives must agree through the FD path
    class Opaque(analysis.ScalarField):
        name = "opaque"

        def __init__(self, inner):
            self.inner = inner

        def value(self, points):
            return self.inner.value(points)

    inner = analysis.InverseYField(anchors=(1, 1), lambdas=(1.0, 1.0))
    state = games.MixedProfile((np.array([0.4, 0.6]), np.array([0.55, 0.45])))
    exact = analysis.apply_generator(pd_srd, pd_game, inner, state)
    approx = analysis.apply_generator(pd_srd, pd_game, Opaque(inner), state)
    assert approx == pytest.approx(exact, abs=1e-5, rel=1e-5)


def test_dyadic_chart_identity(pd_game):
    """Lf for the dyadic log-odds exponential has a closed form in the
    y-chart: -sum_i w_i (du_i - w_i eta_i^2 / 2) exp(-w_i y_i) with
    du the payoff gap of the anchor over the other strategy and
    eta_i^2 the summed squared intensities of player i."""
    eta = 0.8
    spec = srd_unit(pd_game, eta)
    weights = (0.7, 1.4)
    f = analysis.ExpLogitField(anchors=(1, 1), weights=weights)
    rng = np.random.default_rng(15)
    for _ in range(25):
        state = random_interior(rng, (2, 2), alpha=2.0)
        lf = analysis.apply_generator(spec, pd_game, f, state)
        total = 0.0
        for i in range(2):
            x = state.points[i]
            u = games.payoff_vector(pd_game, state.points, i)
            du = u[1] - u[0]
            y = math.log(x[1] / x[0])
            e2 = 2 * eta ** 2
            w = weights[i]
            total += -w * (du - 0.5 * w * e2) * math.exp(-w * y)
        assert lf == pytest.approx(total, abs=1e-6)


def test_generator_probe_validation(pd_game, pd_srd, uniform22):
    f = analysis.CoordinateField(0, 0)
    with pytest.raises(ValueError):
        analysis.generator_consistency_probe(pd_srd, pd_game, f, uniform22, h=0.5)
    vertex = games.MixedProfile.vertex((2, 2), (1, 1))
    with pytest.raises(ValueError):
        analysis.generator_consistency_probe(pd_srd, pd_game, f, vertex)


def test_generator_probe_agrees(pd_game, pd_srd, uniform22):
    f = analysis.CoordinateField(0, 0)
    probe = analysis.generator_consistency_probe(
        pd_srd, pd_game, f, uniform22, h=1e-3, n_runs=20_000, seed=1)
    assert abs(probe.empirical - probe.analytic) <= 3 * probe.stderr + 1e-2
    payload = probe.to_json()
    assert set(payload) >= {"point", "function", "analytic", "empirical", "stderr", "runs"}


# -- extinction bounds ------------------------------------------------------------------

def test_erfc_bound_frozen_value():
    b = analysis.erfc_bound(2.0, 0.0, 1.0, 1.0, 2, 4.0)
    assert b.valid
    assert b.threshold_time == pytest.approx(2.0)
    assert b.value == pytest.approx(0.691462461274013, abs=1e-12)


def test_erfc_bound_formula():
    m, h, v, eta, s, t = 3.0, -0.2, 0.7, 1.3, 3, 50.0
    b = analysis.erfc_bound(m, h, v, eta, s, t)
    direct = 0.5 * erfc((m - h - v * t) / (2 * eta * math.sqrt(s * t)))
    assert b.value == pytest.approx(direct, abs=1e-14)


def test_erfc_bound_invalid_before_threshold_time():
    b = analysis.erfc_bound(10.0, 0.0, 1.0, 1.0, 2, 5.0)
    assert b.threshold_time == pytest.approx(10.0)
    assert not b.valid


def test_erfc_bound_requires_noise():
    # a noiseless run needs no probabilistic bound; the report handles that
    # case separately, and the formula itself refuses eta = 0
    with pytest.raises(ValueError):
        analysis.erfc_bound(2.0, 0.0, 1.0, 0.0, 2, 4.0)


def test_rate_adjusted_bound_scales_rate():
    m, h, v, eta, s, t, lam = 3.0, 0.1, 1.0, 1.0, 2, 30.0, 0.5
    b = analysis.rate_adjusted_erfc_bound(m, h, v, eta, s, lam, t)
    direct = 0.5 * erfc((m - h - lam * v * t) / (2 * lam * eta * math.sqrt(s * t)))
    assert b.value == pytest.approx(direct, abs=1e-14)
    assert b.threshold_time == pytest.approx((m - h) / (lam * v))


def test_bound_preconditions():
    with pytest.raises(ValueError):
        analysis.erfc_bound(2.0, 0.0, -1.0, 1.0, 2, 4.0)
    with pytest.raises(ValueError):
        analysis.erfc_bound(2.0, 0.0, 1.0, 1.0, 2, 0.0)
    with pytest.raises(ValueError):
        analysis.rate_adjusted_erfc_bound(2.0, 0.0, 1.0, 1.0, 2, 0.0, 4.0)


def test_dominance_offset_values():
    assert analysis.dominance_offset(np.array([0.5, 0.5]), 0, np.array([0.0, 1.0])) \
        == pytest.approx(0.0, abs=1e-12)
    x = np.array([0.2, 0.8])
    manual = math.log(0.2) - math.log(0.8)
    assert analysis.dominance_offset(x, 0, np.array([0.0, 1.0])) == pytest.approx(manual)
    # a mixed dominator averages the log-shares
    y = np.array([0.5, 0.5])
    manual = math.log(0.2) - (0.5 * math.log(0.2) + 0.5 * math.log(0.8))
    assert analysis.dominance_offset(x, 0, y) == pytest.approx(manual)


# -- divergence series --------------------------------------------------------------------

@pytest.fixture(scope="module")
def pd_small_run(pd_game):
    spec = srd_unit(pd_game)
    cfg = engine.SimConfig(horizon=30.0, dt=1e-2, record_stride=10, seed=4)
    return engine.simulate_scores(spec, pd_game, games.MixedProfile.uniform((2, 2)), cfg)


def test_kl_series_vertex_reference(pd_small_run):
    vals = analysis.kl_series(pd_small_run, 0, np.array([0.0, 1.0]))
    assert np.allclose(vals, -np.log(pd_small_run.states[0][:, 1]), atol=1e-12)


def test_kl_series_general_reference(pd_small_run):
    ref = np.array([0.25, 0.75])
    vals = analysis.kl_series(pd_small_run, 1, ref)
    k = len(vals) // 2
    manual = games.kl_divergence(ref, pd_small_run.states[1][k])
    assert vals[k] == pytest.approx(manual, abs=1e-12)


def test_kl_growth_slope_recovers_line():
    times = np.linspace(0.0, 10.0, 101)
    values = 0.37 * times + 2.0
    slope, intercept = analysis.kl_growth_slope(times, values)
    assert slope == pytest.approx(0.37, abs=1e-12)
    assert intercept == pytest.approx(2.0, abs=1e-10)
    slope, _ = analysis.kl_growth_slope(times, values, window=(2.0, 4.0))
    assert slope == pytest.approx(0.37, abs=1e-12)
    with pytest.raises(ValueError):
        analysis.kl_growth_slope(times, values, window=(11.0, 12.0))


def test_kl_series_csv_header():
    text = analysis.kl_series_to_csv(np.array([0.0, 1.0]), np.array([0.5, 0.25]))
    lines = text.strip().split("\n")
    assert lines[0] == "t,kl"
    assert lines[1] == "0.0,0.5"


# -- potential diagnostics ------------------------------------------------------------------

def test_potential_along_matches_direct(neg_load_game):
    pot = games.rosenthal_potential(neg_load_game)
    spec = dynamics.DynamicsSpec.plain("RD", neg_load_game)
    cfg = engine.SimConfig(horizon=5.0, dt=1e-2, integrator="deterministic_rk4",
                           record_stride=50, seed=0)
    start = games.MixedProfile((np.array([0.6, 0.4]), np.array([0.45, 0.55])))
    traj = engine.simulate_deterministic(spec, neg_load_game, start, cfg)
    series = analysis.potential_along(traj, pot)
    for k in (0, len(series) // 2, len(series) - 1):
        assert series[k] == pytest.approx(pot(list(traj.profile(k).points)), abs=1e-12)


def test_check_potential_condition_flip(neg_load_game):
    pot = games.rosenthal_potential(neg_load_game)
    noise = dynamics.NoiseModel.uniform((2, 2), 1.0)
    low = dynamics.DynamicsSpec("SLRD", (0.1, 0.1), noise)
    high = dynamics.DynamicsSpec("SLRD", (10.0, 10.0), noise)
    rep = analysis.check_potential_condition(neg_load_game, pot, (0, 1), low)
    assert rep.holds
    assert rep.table == ({1: True}, {0: True})
    assert rep.gaps == ({1: pytest.approx(1.0)}, {0: pytest.approx(1.0)})
    rep = analysis.check_potential_condition(neg_load_game, pot, (0, 1), high)
    assert not rep.holds
    assert rep.table == ({1: False}, {0: False})
    payload = rep.to_json()
    assert payload["holds"] is False


def test_check_potential_condition_rejections(neg_load_game, pd_game):
    pot = games.rosenthal_potential(neg_load_game)
    vanish = dynamics.DynamicsSpec.plain(
        "SRD", neg_load_game,
        noise=dynamics.NoiseModel.uniform((2, 2), 1.0, kind=dynamics.OWN_PURE_VANISHING))
    with pytest.raises(ValueError):
        analysis.check_potential_condition(neg_load_game, pot, (0, 1), vanish)
    srd = srd_unit(neg_load_game)
    with pytest.raises(ValueError):
        analysis.check_potential_condition(neg_load_game, pot, (0, 0), srd)


# -- adjusted coordinates ----------------------------------------------------------------

def test_adjusted_coords_anchor_mass_value():
    state = games.MixedProfile((np.array([0.2, 0.3, 0.5]),))
    coords = analysis.adjusted_coords(state, rates=(2.0,), anchor=(0,))
    manual = 0.2 ** 2.0 / (0.3 ** 2.0 + 0.5 ** 2.0)
    assert coords.anchor_mass[0] == pytest.approx(manual, abs=1e-12)
    assert coords.directions[0].sum() == pytest.approx(1.0)


def test_adjusted_coords_roundtrip():
    rng = np.random.default_rng(16)
    for _ in range(50):
        state = random_interior(rng, (3, 2), alpha=1.5)
        rates = tuple(rng.uniform(0.2, 3.0, size=2))
        coords = analysis.adjusted_coords(state, rates=rates, anchor=(0, 1))
        back = analysis.inverse_adjusted(coords)
        for i in range(2):
            assert np.allclose(back.points[i], state.points[i], atol=1e-9)


def test_adjusted_coords_requires_interior():
    vertex = games.MixedProfile.vertex((2,), (0,))
    with pytest.raises(ValueError):
        analysis.adjusted_coords(vertex, rates=(1.0,), anchor=(0,))


# -- vertex sampling and distance -----------------------------------------------------------

def test_sample_near_vertex_within_radius():
    gen = np.random.Generator(np.random.Philox(np.random.SeedSequence(17)))
    for _ in range(200):
        prof = analysis.sample_near_vertex(gen, (2, 3, 2), (0, 2, 1), 0.15)
        assert prof.is_interior()
        dist = sum(2 * (1 - prof.points[i][q]) for i, q in enumerate((0, 2, 1)))
        assert dist <= 0.15 + 1e-12


def test_l1_vertex_distance_series(pd_small_run):
    d = analysis.l1_vertex_distance(pd_small_run.states, (1, 1))
    manual = sum(2 * (1 - pd_small_run.states[i][:, 1]) for i in range(2))
    assert np.allclose(d, manual, atol=1e-12)
    # defection wins from the uniform start, so the distance must shrink
    assert d[-1] < d[0]


# -- certificates ------------------------------------------------------------------------

def test_lyapunov_certificate_inverse_y(lone_diner):
    spec = srd_unit(lone_diner)
    rep = analysis.lyapunov_certificate(
        spec, lone_diner, (0, 0, 1), "inverse_y",
        params={"lambdas": 0.1}, n_samples=300, radius=0.05, seed=2)
    assert rep.decay_rate > 0
    assert rep.holds
    assert rep.violations == ()
    payload = rep.to_json()
    assert payload["family"] == "inverse_y"
    assert payload["params"] == {"lambdas": [0.1, 0.1, 0.1]}


def test_lyapunov_certificate_exp_logit(pd_game):
    spec = srd_unit(pd_game)
    rep = analysis.lyapunov_certificate(
        spec, pd_game, (1, 1), "exp_logit",
        params={"weights": 0.5}, n_samples=300, radius=0.1, seed=3)
    assert rep.decay_rate > 0


def test_lyapunov_certificate_potential_family(neg_load_game):
    spec = srd_unit(neg_load_game, 0.1)
    rep = analysis.lyapunov_certificate(
        spec, neg_load_game, (0, 1), "potential",
        n_samples=300, radius=0.05, seed=4)
    assert rep.decay_rate > 0


def test_lyapunov_certificate_rejections(lone_diner, minority3):
    spec = srd_unit(lone_diner)
    with pytest.raises(ValueError):
        analysis.lyapunov_certificate(spec, lone_diner, (0, 0, 0), "inverse_y")
    with pytest.raises(ValueError):
        analysis.lyapunov_certificate(spec, lone_diner, (0, 0, 1), "inverse_y",
                                      params={"mystery": 1})
    with pytest.raises(ValueError):
        analysis.lyapunov_certificate(spec, lone_diner, (0, 0, 1), "spectral")


# -- stability ---------------------------------------------------------------------------

def test_wilson_interval_formula():
    lo, hi = analysis.wilson_interval(190, 200)
    z = 1.959963984540054
    phat, n = 0.95, 200
    center = (phat + z * z / (2 * n)) / (1 + z * z / n)
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / (1 + z * z / n)
    assert lo == pytest.approx(center - half, abs=1e-12)
    assert hi == pytest.approx(center + half, abs=1e-12)
    assert analysis.wilson_interval(0, 10)[0] == 0.0
    assert analysis.wilson_interval(10, 10)[1] == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        analysis.wilson_interval(5, 0)


def test_stability_probe_pd(pd_game, pd_srd):
    est = analysis.stability_probe(
        pd_srd, pd_game, (1, 1), start_radius=0.05, stay_radius=0.3, tol=1e-2,
        horizon=20.0, n_runs=40, master_seed=9)
    assert est.runs == 40
    assert est.estimate >= 0.9
    assert 0.0 <= est.wilson_low <= est.estimate <= est.wilson_high <= 1.0
    payload = est.to_json()
    assert payload["equilibrium"] == [1, 1]
    assert payload["stay_count"] == round(est.estimate * 40)


def test_stability_probe_deterministic_rd(pd_game):
    spec = dynamics.DynamicsSpec.plain("RD", pd_game)
    est = analysis.stability_probe(
        spec, pd_game, (1, 1), start_radius=0.1, stay_radius=0.3, tol=1e-2,
        horizon=30.0, n_runs=5, master_seed=1)
    assert est.estimate == 1.0


def test_stability_probe_is_reproducible(pd_game, pd_srd):
    kw = dict(start_radius=0.05, stay_radius=0.3, tol=1e-2,
              horizon=10.0, n_runs=10, master_seed=5)
    a = analysis.stability_probe(pd_srd, pd_game, (1, 1), **kw)
    b = analysis.stability_probe(pd_srd, pd_game, (1, 1), **kw)
    assert a.estimate == b.estimate
    assert (a.wilson_low, a.wilson_high) == (b.wilson_low, b.wilson_high)


def test_stability_probe_validation(pd_game, pd_srd, minority3):
    with pytest.raises(ValueError):
        analysis.stability_probe(pd_srd, pd_game, (0, 0), start_radius=0.05,
                                 stay_radius=0.3, tol=1e-2, n_runs=2)
    with pytest.raises(ValueError):
        analysis.stability_probe(pd_srd, pd_game, (1, 1), start_radius=0.5,
                                 stay_radius=0.3, tol=1e-2, n_runs=2)


# -- extinction report ----------------------------------------------------------------------

@pytest.fixture(scope="module")
def pd_mini_ensemble(pd_game):
    spec = srd_unit(pd_game)
    cfg = engine.SimConfig(horizon=30.0, dt=1e-2, record_stride=10, seed=0)
    job = engine.ScoreJob(spec, pd_game, games.MixedProfile.uniform((2, 2)), cfg)
    return engine.ensemble_trajectories(job, 30, master_seed=23)


def test_extinction_report_pd(pd_game, pd_srd, pd_mini_ensemble):
    trace = games.iterated_elimination(pd_game)
    rep = analysis.extinction_report(pd_srd, pd_game, pd_mini_ensemble, trace,
                                     threshold_exponent=3.0)
    assert rep.runs == 30
    assert rep.threshold_exponent == 3.0
    assert {(e.player, e.strategy) for e in rep.entries} == {(0, 0), (1, 0)}
    for e in rep.entries:
        assert e.guaranteed
        assert e.margin == pytest.approx(1.0, abs=1e-9)
        assert e.dominator == pytest.approx([0.0, 1.0], abs=1e-9)
        assert e.offset == pytest.approx(0.0, abs=1e-12)
        assert e.empirical_probability == 1.0
        assert e.bound.valid
        assert e.satisfied
        assert e.mean_first_passage <= 30.0
        assert e.kl_slope is not None
        assert len(e.kl_times) == len(e.kl_values)
    assert rep.all_satisfied


def test_extinction_report_accepts_strategy_pairs(pd_game, pd_srd, pd_mini_ensemble):
    trace = games.iterated_elimination(pd_game)
    by_trace = analysis.extinction_report(pd_srd, pd_game, pd_mini_ensemble, trace)
    by_pairs = analysis.extinction_report(pd_srd, pd_game, pd_mini_ensemble, [(0, 0), (1, 0)])
    for a, b in zip(by_trace.entries, by_pairs.entries):
        assert (a.player, a.strategy) == (b.player, b.strategy)
        assert a.margin == pytest.approx(b.margin, abs=1e-12)
        assert a.empirical_probability == b.empirical_probability


def test_extinction_report_json_schema(pd_game, pd_srd, pd_mini_ensemble):
    rep = analysis.extinction_report(pd_srd, pd_game, pd_mini_ensemble,
                                     games.iterated_elimination(pd_game))
    payload = rep.to_json()
    assert set(payload) == {"threshold_exponent", "horizon", "runs", "strategies"}
    entry = payload["strategies"][0]
    for key in ("player", "strategy", "dominator", "margin", "offset",
                "empirical_probability", "bound", "satisfied", "kl_slope"):
        assert key in entry
