import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import spikemap as sm
from conftest import example1_net, random_net


def quiescent_net(n=3, gamma=0.5, i_ext=0.0):
    return sm.NetworkParams(n=n, gamma=gamma, theta=1.0,
                            weights=np.zeros((n, n)), i_ext=np.full(n, i_ext))


class TestFindPeriodicOrbit:
    def test_neural_death_fixed_point(self):
        net = quiescent_net()
        report = sm.find_periodic_orbit(net, [0.7, -0.2, 0.9], max_transient=200, max_period=50)
        assert report.period == 1
        assert np.max(np.abs(report.states)) <= 1e-12
        assert abs(report.min_threshold_gap - 1.0) <= 1e-12
        assert not report.cycle_raster.any()

    def test_full_activity_fixed_point(self):
        net = sm.NetworkParams(n=2, gamma=0.5, theta=1.0,
                               weights=[[0.6, 0.6], [0.6, 0.6]], i_ext=[0.0, 0.0])
        report = sm.find_periodic_orbit(net, [1.0, 1.4], max_transient=50, max_period=20)
        assert report.period == 1
        assert report.states.tolist() == [[1.2, 1.2]]
        assert report.cycle_raster.all()
        assert abs(report.min_threshold_gap - 0.2) < 1e-15

    def test_alternating_pair(self):
        net = sm.NetworkParams(n=2, gamma=0.3, theta=1.0,
                               weights=[[0.0, 1.2], [1.2, 0.0]], i_ext=[0.05, 0.05])
        report = sm.find_periodic_orbit(net, [1.5, 0.0], max_transient=100, max_period=50)
        assert report.period == 2
        assert sorted(row.tolist() for row in report.cycle_raster) == [[0, 1], [1, 0]]

    def test_ghost_is_undetermined_at_short_horizons(self):
        report = sm.find_periodic_orbit(example1_net(), [0.0], max_transient=10, max_period=5)
        assert report == sm.Undetermined(horizon=20)

    def test_ghost_collapses_onto_threshold_cycle_in_double_precision(self):
        # the true orbit creeps up to the threshold forever, but doubles run out
        # of room below 1.0 after 53 halvings: the simulated path lands exactly
        # on the threshold, fires, and repeats with period 54, gap 0
        report = sm.find_periodic_orbit(example1_net(), [0.0], max_transient=200, max_period=100)
        assert report.period == 54
        assert report.min_threshold_gap == 0.0
        assert report.cycle_raster.sum() == 1

    def test_closure_and_raster_invariants(self):
        rng = np.random.default_rng(21)
        found = 0
        for _ in range(15):
            net = random_net(rng, coupling=2.5, i_ext_high=0.5)
            report = sm.find_periodic_orbit(
                net, rng.uniform(*sm.compute_bounds(net), net.n),
                max_transient=2000, max_period=300, tol=1e-10,
            )
            if isinstance(report, sm.Undetermined):
                continue
            found += 1
            p = report.period
            assert report.min_threshold_gap >= 0.0
            v = report.states[0]
            for k in range(p):
                v = sm.step(net, v)
            assert sm.max_dist(v, report.states[0]) <= 1e-10
            assert np.array_equal(sm.encode(report.states, net.theta), report.cycle_raster)
        assert found >= 10

    def test_against_long_simulation(self):
        # long-run truth: far past the detection horizon the trajectory must sit
        # on the reported orbit, and `transient` steps must land on phase 0
        rng = np.random.default_rng(123)
        checked = 0
        for _ in range(25):
            n = int(rng.integers(2, 12))
            net = sm.NetworkParams(n=n, gamma=float(rng.uniform(0.0, 0.9)), theta=1.0,
                                   weights=rng.normal(0, 2.0 / np.sqrt(n), (n, n)),
                                   i_ext=rng.uniform(0, 0.5, n))
            v0 = rng.uniform(*sm.compute_bounds(net), n)
            report = sm.find_periodic_orbit(net, v0, max_transient=3000, max_period=800)
            if isinstance(report, sm.Undetermined):
                continue
            checked += 1
            v = v0.copy()
            for _ in range(6000):
                v = sm.step(net, v)
            assert min(sm.max_dist(v, s) for s in report.states) <= 1e-9
            v = v0.copy()
            for _ in range(report.transient):
                v = sm.step(net, v)
            assert sm.max_dist(v, report.states[0]) <= 1e-9
        assert checked >= 15

    def test_bad_args(self):
        with pytest.raises(sm.ValidationError):
            sm.find_periodic_orbit(example1_net(), [0.0], max_period=0)
        with pytest.raises(sm.ValidationError):
            sm.find_periodic_orbit(example1_net(), [0.0], tol=-1.0)


class TestOmegaSample:
    def test_neural_death_single_orbit(self):
        sample = sm.omega_sample(quiescent_net(), 6, np.random.default_rng(0),
                                 max_transient=200, max_period=50)
        assert len(sample.orbits) == 1
        assert sample.undetermined == 0

    def test_gamma_zero_resolves_exactly(self):
        # with no leak the state space collapses to finitely many current vectors,
        # so detection succeeds with zero tolerance for every start
        rng = np.random.default_rng(1)
        for trial in range(5):
            net = random_net(rng, n=6, gamma=0.0, coupling=1.5, i_ext_high=0.5)
            sample = sm.omega_sample(net, 5, np.random.default_rng(trial),
                                     max_transient=64, max_period=64, tol=0.0)
            assert sample.undetermined == 0

    def test_single_init(self):
        sample = sm.omega_sample(quiescent_net(), 1, np.random.default_rng(2),
                                 max_transient=100, max_period=20)
        assert len(sample.orbits) <= 1

    def test_num_inits_validated(self):
        with pytest.raises(sm.ValidationError):
            sm.omega_sample(quiescent_net(), 0, np.random.default_rng(0))


class TestDistances:
    def test_ghost_ramp_distance(self):
        traj = sm.simulate(example1_net(), [0.0], 50)
        assert sm.dist_traj_to_S(traj) == 2.0 ** -50

    def test_resting_distance(self):
        traj = sm.simulate(quiescent_net(), np.zeros(3), 10)
        assert sm.dist_traj_to_S(traj) == 1.0

    def test_touching_threshold(self):
        net = quiescent_net()
        traj = sm.simulate(net, [1.0, 0.0, 0.5], 5)
        assert sm.dist_traj_to_S(traj) == 0.0

    def test_attractor_distance_neural_death(self):
        report = sm.find_periodic_orbit(quiescent_net(), [0.4, 0.1, -0.3],
                                        max_transient=200, max_period=20)
        assert abs(sm.dist_attractor_to_S([report]) - 1.0) <= 1e-12

    def test_attractor_distance_with_drive(self):
        gamma, c = 0.6, 0.25
        net = quiescent_net(gamma=gamma, i_ext=c)
        report = sm.find_periodic_orbit(net, [0.1, 0.9, 0.0],
                                        max_transient=300, max_period=20)
        assert abs(sm.dist_attractor_to_S([report]) - (1.0 - c / (1.0 - gamma))) <= 1e-12

    def test_attractor_distance_direct(self):
        states = np.array([[1.2, 1.2]])
        orbit = sm.OrbitReport(transient=0, period=1, states=states,
                               cycle_raster=np.ones((1, 2), dtype=np.uint8),
                               min_threshold_gap=0.2)
        assert sm.dist_attractor_to_S([orbit]) == 0.2

    def test_empty_orbit_list(self):
        with pytest.raises(sm.ValidationError):
            sm.dist_attractor_to_S([])


class TestStableManifoldRadius:
    def test_resting_radius(self):
        traj = sm.simulate(quiescent_net(), np.zeros(3), 10)
        assert sm.stable_manifold_radius(traj) == 1.0

    def test_touching_gives_zero(self):
        traj = sm.simulate(quiescent_net(), [1.0, 0.0, 0.0], 3)
        assert sm.stable_manifold_radius(traj) == 0.0

    def test_certifies_identical_rasters(self):
        rng = np.random.default_rng(3)
        checked = 0
        while checked < 20:
            net = random_net(rng, coupling=2.0, i_ext_high=0.5)
            v0 = rng.uniform(*sm.compute_bounds(net), net.n)
            horizon = 30
            mother = sm.simulate(net, v0, horizon)
            r = sm.stable_manifold_radius(mother)
            if r < 1e-9:
                continue
            other = sm.simulate(net, v0 + rng.uniform(-r / 2, r / 2, net.n), horizon)
            assert np.array_equal(mother.raster, other.raster)
            checked += 1


class TestMarkovHorizon:
    @pytest.mark.parametrize("eps,diam,gamma,expected", [
        (0.01, 2.0, 0.5, 7),
        (2.0, 2.0, 0.5, 0),
        (0.01, 2.0, 0.1, 2),
        (0.5, 2.0, 0.0, 1),
    ])
    def test_examples(self, eps, diam, gamma, expected):
        assert sm.markov_horizon(eps, diam, gamma) == expected

    def test_validation(self):
        with pytest.raises(sm.ValidationError):
            sm.markov_horizon(0.0, 1.0, 0.5)
        with pytest.raises(sm.ValidationError):
            sm.markov_horizon(0.1, 1.0, 1.0)

    @given(st.floats(1e-9, 0.9), st.floats(1e-9, 0.9), st.floats(0.01, 0.99))
    @settings(max_examples=200)
    def test_monotone_in_epsilon(self, eps1, eps2, gamma):
        lo, hi = sorted((eps1, eps2))
        assert sm.markov_horizon(lo, 1.0, gamma) >= sm.markov_horizon(hi, 1.0, gamma)


class TestPeriodBound:
    def test_examples(self):
        assert sm.period_bound(2, 0.25, 0.5) == 16.0
        assert sm.period_bound(6, 0.5, 0.5) == 2.0 ** 6
        assert abs(sm.period_bound_log2(50, 1e-6, 0.5)
                   - 50 * math.log(1e-6) / math.log(0.5)) < 1e-9

    def test_vacuous_above_one(self):
        with pytest.warns(UserWarning):
            assert sm.period_bound(4, 1.5, 0.5) == 1.0

    def test_overflow_to_inf(self):
        assert sm.period_bound(50, 1e-13, 0.99) == math.inf

    def test_validation(self):
        with pytest.raises(sm.ValidationError):
            sm.period_bound(3, 0.5, 0.0)
        with pytest.raises(sm.ValidationError):
            sm.period_bound(3, -0.5, 0.5)

    def test_monotone_in_distance(self):
        vals = [sm.period_bound_log2(10, d, 0.5) for d in np.logspace(-8, -1, 30)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))


class TestClassifyRegime:
    def _death_orbit(self):
        return sm.OrbitReport(transient=0, period=1, states=np.zeros((1, 2)),
                              cycle_raster=np.zeros((1, 2), dtype=np.uint8),
                              min_threshold_gap=1.0)

    def _full_orbit(self):
        return sm.OrbitReport(transient=0, period=1, states=np.full((1, 2), 1.2),
                              cycle_raster=np.ones((1, 2), dtype=np.uint8),
                              min_threshold_gap=0.2)

    def test_paths(self):
        net = quiescent_net(n=2)
        assert str(sm.classify_regime(net, [self._death_orbit()], 0)) == "NeuralDeath"
        assert str(sm.classify_regime(net, [self._full_orbit()], 0)) == "FullActivity"
        label = sm.classify_regime(net, [self._death_orbit()], 3, horizon=500)
        assert label.kind == "Undetermined" and "500" in str(label)
        cyc = sm.OrbitReport(transient=0, period=2, states=np.array([[0.5, 1.2], [1.1, 0.3]]),
                             cycle_raster=np.array([[0, 1], [1, 0]], dtype=np.uint8),
                             min_threshold_gap=0.1)
        assert str(sm.classify_regime(net, [cyc], 0)) == "StablePeriodic"
        tight = sm.OrbitReport(transient=0, period=2, states=np.array([[0.5, 1.2], [1.1, 0.3]]),
                               cycle_raster=np.array([[0, 1], [1, 0]], dtype=np.uint8),
                               min_threshold_gap=1e-9)
        label = sm.classify_regime(net, [tight], 0)
        assert label.kind == "NearSingular" and label.value == 1e-9

    def test_empty_sample_is_internal_error(self):
        with pytest.raises(RuntimeError):
            sm.classify_regime(quiescent_net(), [], 0)

    def test_label_round_trip(self):
        for label in (sm.RegimeLabel("NeuralDeath"), sm.RegimeLabel("NearSingular", 2.5e-8),
                      sm.RegimeLabel("Undetermined", 120000.0)):
            assert sm.RegimeLabel.parse(str(label)).kind == label.kind


class TestEffectiveLyapunov:
    def test_quiescent_equals_log_gamma(self):
        net = quiescent_net(gamma=0.5)
        lam = sm.effective_lyapunov(net, np.zeros(3), 1e-3, 6, 500, np.random.default_rng(0))
        assert abs(lam - math.log(0.5)) <= 1e-9

    def test_contraction_bound_on_attractor(self):
        rng = np.random.default_rng(4)
        for gamma in (0.3, 0.6, 0.9):
            net = quiescent_net(gamma=gamma, i_ext=0.05)
            report = sm.find_periodic_orbit(net, np.zeros(3), max_transient=300, max_period=20)
            ball = report.min_threshold_gap / 2
            lam = sm.effective_lyapunov(net, report.states[0], ball, 6, 400, rng)
            assert lam <= math.log(gamma) + 1e-9

    def test_periodic_orbit_contraction(self):
        net = sm.NetworkParams(n=2, gamma=0.3, theta=1.0,
                               weights=[[0.0, 1.2], [1.2, 0.0]], i_ext=[0.05, 0.05])
        report = sm.find_periodic_orbit(net, [1.5, 0.0], max_transient=100, max_period=50)
        ball = report.min_threshold_gap / 3
        lam = sm.effective_lyapunov(net, report.states[0], ball, 6, 400, np.random.default_rng(5))
        assert lam <= math.log(0.3) + 1e-9

    def test_gamma_zero_total_collapse(self):
        net = quiescent_net(gamma=0.0)
        lam = sm.effective_lyapunov(net, np.zeros(3), 1e-3, 4, 50, np.random.default_rng(6))
        assert lam == -math.inf

    def test_expansion_events_lift_estimate_above_leak_rate(self):
        # ball much larger than the orbit's threshold gap: crossings inject
        # expansion and the estimate exceeds pure contraction (reported only;
        # at this scale the event rate does not reach a positive exponent)
        net = example1_net()
        report = sm.find_periodic_orbit(net, [0.0], max_transient=100, max_period=100)
        assert report.min_threshold_gap == 0.0
        lam = sm.effective_lyapunov(net, report.states[0], 1e-3, 6, 1080,
                                    np.random.default_rng(7))
        print(f"reported finite-ball exponent at radius 1e-3: {lam:.4f}")
        assert lam > math.log(0.5) + 0.01

    def test_validation(self):
        with pytest.raises(sm.ValidationError):
            sm.effective_lyapunov(quiescent_net(), np.zeros(3), 0.0, 4, 10,
                                  np.random.default_rng(0))
        with pytest.raises(sm.ValidationError):
            sm.effective_lyapunov(quiescent_net(), np.zeros(3), 1e-3, 0, 10,
                                  np.random.default_rng(0))
