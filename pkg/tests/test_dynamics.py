import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isingmarket import (ConfigError, MarketState, SimConfig, SpinGrid,
                         local_field, run_simulation, simulate_series, sweep,
                         symmetric_gamma, update_probability, update_site)

# frozen with mpmath (40 digits): 1/(1+exp(-2*beta*h))
P_BETA2_H1 = 0.9820137900379085
P_BETA2_HNEG = 1.2415109982066619e-45  # beta=2, h=-25.85
P_BETA2_H05 = 0.8807970779778824


def brute_local_field(state, config, stock, site):
    """Independent evaluator: neighbor sums via np.roll on the 2-d grid,
    magnetizations recomputed from scratch."""
    side = config.L
    lattice = state.grids[stock].spins.reshape(side, side).astype(np.float64)
    nn = (np.roll(lattice, 1, axis=0) + np.roll(lattice, -1, axis=0)
          + np.roll(lattice, 1, axis=1) + np.roll(lattice, -1, axis=1))
    div = config.norm_divisor
    mags = [g.spins.astype(np.int64).sum() / div for g in state.grids]
    r, c = divmod(site, side)
    h = config.J * nn[r, c] - config.alpha * lattice[r, c] * abs(mags[stock])
    h += sum(config.gamma[j, stock] * mags[j] for j in range(config.K))
    return float(h)


def random_state(config, seed):
    rng = np.random.default_rng(seed)
    grids = [SpinGrid((rng.integers(0, 2, config.n_sites) * 2 - 1).astype(np.int8), config.L)
             for _ in range(config.K)]
    rngs = [np.random.default_rng(seed + 1 + k) for k in range(config.K)]
    return MarketState(grids, rngs)


class TestSimConfig:
    def test_defaults_follow_standard_protocol(self):
        cfg = SimConfig()
        assert (cfg.L, cfg.K, cfg.beta, cfg.alpha, cfg.J) == (120, 2, 2.0, 30.0, 1.0)
        assert cfg.thermalization_sweeps == 10_000
        assert cfg.measurement_sweeps == 500_000
        assert cfg.normalization == "per_site"
        assert np.array_equal(cfg.gamma, np.zeros((2, 2)))
        cfg.validate()

    @pytest.mark.parametrize("kwargs,fragment", [
        (dict(L=1), "L"),
        (dict(K=0), "K"),
        (dict(beta=-0.5), "beta"),
        (dict(alpha=-1.0), "alpha"),
        (dict(measurement_sweeps=0), "measurement_sweeps"),
        (dict(thermalization_sweeps=-1), "thermalization_sweeps"),
        (dict(normalization="raw"), "normalization"),
        (dict(seed=-1), "seed"),
        (dict(seed=2 ** 64), "seed"),
    ])
    def test_validation_names_field(self, kwargs, fragment):
        with pytest.raises(ConfigError, match=fragment):
            SimConfig(**kwargs).validate()

    def test_gamma_validation(self):
        with pytest.raises(ConfigError, match="diagonal"):
            SimConfig(K=2, gamma=[[0.1, 0.2], [0.2, 0.0]]).validate()
        with pytest.raises(ConfigError, match="matrix"):
            SimConfig(K=2, gamma=np.zeros((3, 3))).validate()
        with pytest.raises(ConfigError, match="finite"):
            SimConfig(K=2, gamma=[[0, np.inf], [0, 0]]).validate()

    def test_symmetric_gamma(self):
        g = symmetric_gamma(0.15, 3)
        assert np.array_equal(g, g.T)
        assert np.all(np.diagonal(g) == 0.0)
        assert g[0, 1] == g[1, 2] == 0.15


class TestLocalField:
    def test_uniform_saturated_two_stocks(self):
        cfg = SimConfig(L=4, K=2, gamma=symmetric_gamma(0.15, 2)).validate()
        state = MarketState(
            [SpinGrid.filled(4, 1), SpinGrid.filled(4, 1)],
            [np.random.default_rng(0), np.random.default_rng(1)])
        h = local_field(state, cfg, 0, 5)
        assert abs(h - (4.0 - 30.0 + 0.15)) < 1e-12  # -25.85

    def test_checkerboard_zero_magnetization(self):
        spins = np.array([(-1) ** ((i // 4) + (i % 4)) for i in range(16)], dtype=np.int8)
        cfg = SimConfig(L=4, K=1, gamma=np.zeros((1, 1))).validate()
        state = MarketState([SpinGrid(spins, 4)], [np.random.default_rng(0)])
        site = int(np.flatnonzero(spins == 1)[0])
        assert local_field(state, cfg, 0, site) == -4.0

    def test_matches_brute_force_on_random_states(self):
        rng = np.random.default_rng(77)
        for trial in range(100):
            k_stocks = int(rng.integers(1, 4))
            gamma = rng.uniform(-0.2, 0.2, size=(k_stocks, k_stocks))
            np.fill_diagonal(gamma, 0.0)
            mode = "per_site" if trial % 2 == 0 else "total"
            cfg = SimConfig(L=4, K=k_stocks, gamma=gamma, normalization=mode).validate()
            state = random_state(cfg, int(rng.integers(0, 2 ** 31)))
            stock = int(rng.integers(0, k_stocks))
            site = int(rng.integers(0, 16))
            assert local_field(state, cfg, stock, site) == pytest.approx(
                brute_local_field(state, cfg, stock, site), abs=1e-12)

    def test_global_flip_negates_field(self):
        rng = np.random.default_rng(31)
        cfg = SimConfig(L=5, K=2, gamma=symmetric_gamma(0.1, 2)).validate()
        for _ in range(20):
            state = random_state(cfg, int(rng.integers(0, 2 ** 31)))
            flipped = MarketState(
                [SpinGrid((-g.spins).astype(np.int8), g.side) for g in state.grids],
                state.rngs)
            stock = int(rng.integers(0, 2))
            site = int(rng.integers(0, 25))
            h = local_field(state, cfg, stock, site)
            assert abs(local_field(flipped, cfg, stock, site) + h) < 1e-12


class TestUpdateProbability:
    def test_symmetry_point(self):
        assert update_probability(0.0, 2.0) == 0.5
        assert update_probability(123.4, 0.0) == 0.5

    def test_frozen_high_precision_values(self):
        assert update_probability(1.0, 2.0) == pytest.approx(P_BETA2_H1, rel=1e-14)
        assert update_probability(0.5, 2.0) == pytest.approx(P_BETA2_H05, rel=1e-14)

    def test_large_negative_field_no_overflow(self):
        p = update_probability(-25.85, 2.0)
        assert 0.0 <= p <= 1e-40
        assert p == pytest.approx(P_BETA2_HNEG, rel=1e-12)

    def test_extreme_fields_saturate_cleanly(self):
        assert update_probability(1e6, 2.0) == 1.0
        assert update_probability(-1e6, 2.0) == 0.0
        assert update_probability(700.0, 300.0) == 1.0

    @given(st.floats(min_value=-170.0, max_value=170.0),
           st.floats(min_value=0.0, max_value=2.0))
    @settings(max_examples=200, deadline=None)
    def test_complement_identity(self, h, beta):
        total = update_probability(h, beta) + update_probability(-h, beta)
        assert abs(total - 1.0) <= 1e-15

    @given(st.floats(min_value=-1e6, max_value=1e6),
           st.floats(min_value=0.0, max_value=100.0))
    @settings(max_examples=200, deadline=None)
    def test_always_a_probability(self, h, beta):
        assert 0.0 <= update_probability(h, beta) <= 1.0


def frozen_field_state(h_target, beta):
    """All-up lattice with alpha=0, gamma=0 and J = h/4, so every site feels
    exactly h_target no matter how its own spin evolves."""
    cfg = SimConfig(L=4, K=1, alpha=0.0, J=h_target / 4.0, beta=beta,
                    gamma=np.zeros((1, 1))).validate()
    state = MarketState([SpinGrid.filled(4, 1)], [np.random.default_rng(2024)])
    return state, cfg


class TestUpdateSite:
    def test_beta_zero_is_a_coin_flip(self):
        cfg = SimConfig(L=4, K=1, beta=0.0, gamma=np.zeros((1, 1))).validate()
        state = MarketState([SpinGrid.filled(4, 1)], [np.random.default_rng(5)])
        rng = np.random.default_rng(17)
        n = 100_000
        ups = 0
        for _ in range(n):
            update_site(state, cfg, 0, 5, rng)
            ups += state.grids[0].spin(5) == 1
        assert abs(ups / n - 0.5) < 4 * 0.5 / np.sqrt(n)

    def test_saturated_field_pins_spin(self):
        state, cfg = frozen_field_state(50.0, 2.0)
        rng = np.random.default_rng(3)
        for _ in range(1000):
            update_site(state, cfg, 0, 5, rng)
            assert state.grids[0].spin(5) == 1

    def test_empirical_frequency_matches_closed_form(self):
        state, cfg = frozen_field_state(0.5, 2.0)
        rng = np.random.default_rng(31337)
        n = 100_000
        ups = 0
        site = 5
        for _ in range(n):
            update_site(state, cfg, 0, site, rng)
            ups += state.grids[0].spin(site) == 1
        p = P_BETA2_H05
        assert abs(ups / n - p) < 4 * np.sqrt(p * (1 - p) / n)

    def test_only_target_site_touched(self):
        cfg = SimConfig(L=4, K=2, gamma=symmetric_gamma(0.1, 2)).validate()
        state = random_state(cfg, 9)
        before = [g.spins.copy() for g in state.grids]
        update_site(state, cfg, 1, 7, np.random.default_rng(0))
        assert np.array_equal(state.grids[0].spins, before[0])
        changed = np.flatnonzero(state.grids[1].spins != before[1])
        assert len(changed) <= 1 and (len(changed) == 0 or changed[0] == 7)


class _CountingRng:
    """Duck-typed stand-in recording how many uniforms each stream yields."""

    def __init__(self, seed):
        self._rng = np.random.default_rng(seed)
        self.draws = 0

    def random(self):
        self.draws += 1
        return self._rng.random()


class TestSweep:
    def test_update_count_per_sweep(self):
        cfg = SimConfig(L=6, K=2, gamma=symmetric_gamma(0.1, 2)).validate()
        state = random_state(cfg, 4)
        state.rngs = [_CountingRng(1), _CountingRng(2)]
        sweep(state, cfg)
        # one site draw + one acceptance draw per update, N updates per stock
        assert [r.draws for r in state.rngs] == [2 * 36, 2 * 36]
        assert state.t == 1

    def test_gamma_zero_factorizes_exactly(self):
        # stock 0 of a 2-stock uncoupled market replays the 1-stock run
        cfg2 = SimConfig(L=6, K=2, thermalization_sweeps=5, measurement_sweeps=40,
                         seed=123, gamma=np.zeros((2, 2)))
        cfg1 = SimConfig(L=6, K=1, thermalization_sweeps=5, measurement_sweeps=40,
                         seed=123, gamma=np.zeros((1, 1)))
        m2, st2 = simulate_series(cfg2)
        m1, st1 = simulate_series(cfg1)
        assert np.array_equal(m2[:, 0], m1[:, 0])
        assert np.array_equal(st2.grids[0].spins, st1.grids[0].spins)

    def test_running_sums_match_recount_after_sweeps(self):
        cfg = SimConfig(L=5, K=2, gamma=symmetric_gamma(0.05, 2)).validate()
        state = random_state(cfg, 21)
        for _ in range(5):
            sweep(state, cfg)
            for g in state.grids:
                assert g.sum_spins == g.recount()


class TestRunSimulation:
    def test_records_fencepost(self):
        cfg = SimConfig(L=6, K=2, thermalization_sweeps=3, measurement_sweeps=100,
                        seed=7, gamma=symmetric_gamma(0.1, 2))
        records = []
        run_simulation(cfg, sink=records.append, max_lag=5)
        assert len(records) == 100
        assert records[0].returns is None
        assert sum(r.returns is not None for r in records) == 99
        ts = [r.t for r in records]
        assert ts == list(range(4, 104))
        for prev, cur in zip(records, records[1:]):
            for k in range(2):
                expected = (cur.magnetizations[k] - prev.magnetizations[k]) / 2.0
                assert cur.returns[k] == expected

    def test_deterministic_given_config_and_seed(self):
        cfg = SimConfig(L=8, K=2, thermalization_sweeps=10, measurement_sweeps=60,
                        seed=99, gamma=symmetric_gamma(0.15, 2))
        assert np.array_equal(simulate_series(cfg)[0], simulate_series(cfg)[0])

    def test_seed_changes_output(self):
        base = dict(L=8, K=2, thermalization_sweeps=10, measurement_sweeps=60,
                    gamma=symmetric_gamma(0.15, 2))
        m_a, _ = simulate_series(SimConfig(seed=1, **base))
        m_b, _ = simulate_series(SimConfig(seed=2, **base))
        assert not np.array_equal(m_a, m_b)

    def test_invalid_config_rejected_before_work(self):
        with pytest.raises(ConfigError):
            run_simulation(SimConfig(L=8, beta=-1.0, measurement_sweeps=10))

    def test_sink_failure_propagates(self):
        cfg = SimConfig(L=6, K=1, thermalization_sweeps=0, measurement_sweeps=20,
                        seed=3, gamma=np.zeros((1, 1)))

        def bad_sink(record):
            raise RuntimeError("sink exploded")

        with pytest.raises(RuntimeError, match="sink exploded"):
            run_simulation(cfg, sink=bad_sink, max_lag=2)

    def test_total_normalization_mode(self):
        cfg = SimConfig(L=6, K=2, thermalization_sweeps=5, measurement_sweeps=30,
                        seed=11, normalization="total", gamma=np.zeros((2, 2)))
        m, _ = simulate_series(cfg)
        assert np.all(m == np.round(m))  # totals are integers
        assert np.all(np.abs(m) <= 36)

    def test_initialize_reproducible(self):
        cfg = SimConfig(L=10, K=3, seed=5, gamma=np.zeros((3, 3)))
        a = MarketState.initialize(cfg)
        b = MarketState.initialize(cfg)
        assert a.t == 0
        for ga, gb in zip(a.grids, b.grids):
            assert np.array_equal(ga.spins, gb.spins)
            assert set(np.unique(ga.spins)) <= {-1, 1}
