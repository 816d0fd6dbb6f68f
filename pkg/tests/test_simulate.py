import numpy as np
import pytest

from shadowfit.errors import ConfigError, DataError
from shadowfit.loss import fcs_loss, true_loss
from shadowfit.models import ProfileModel
from shadowfit.qubit import BASES, Projector, PureHypothesis
from shadowfit.simulate import (
    SimConfig,
    exact_table,
    outcome_probabilities,
    outcome_probability,
    sample_events,
    simulate,
    stream,
)

DOMAIN = (800.0, 820.0)
H_TRUTH = ProfileModel.constant(0.0, 0.0, DOMAIN)


def test_outcome_probability_examples():
    assert outcome_probability(PureHypothesis(np.pi / 2, np.pi), Projector.A) == pytest.approx(1.0)
    assert outcome_probability(PureHypothesis(np.pi / 2, 0.0), Projector.H) == pytest.approx(0.5)
    # Bloch inner product oracle
    expected = (1 + np.sin(np.pi / 3) * np.sin(np.pi / 4)) / 2
    assert outcome_probability(PureHypothesis(np.pi / 3, np.pi / 4), Projector.R) == pytest.approx(expected, abs=1e-15)


def test_vectorized_probabilities_match_kets(rng):
    for _ in range(200):
        h = PureHypothesis(rng.uniform(0, np.pi), rng.uniform(-9, 9))
        probs = outcome_probabilities(h.theta, h.phi)
        np.testing.assert_allclose(probs, [outcome_probability(h, p) for p in Projector], atol=1e-12)
        for p, q in BASES:
            assert probs[p] + probs[q] == pytest.approx(1.0)


def test_large_fixed_run_concentrates():
    table = simulate(SimConfig(H_TRUTH, (810.0,), shots_mode="fixed_per_setting", shots=10**6, seed=3))
    n = table.counts[0]
    assert 0.999 <= n[Projector.H] / (n[Projector.H] + n[Projector.V]) <= 1.0
    assert 0.497 <= n[Projector.D] / (n[Projector.D] + n[Projector.A]) <= 0.503


def test_same_seed_same_table():
    config = SimConfig(H_TRUTH, tuple(np.linspace(*DOMAIN, 9)), shots=30, seed=99)
    assert simulate(config) == simulate(config)
    assert simulate(config, threads=4) == simulate(config)
    assert simulate(config, replicate=1) != simulate(config)


def test_exact_mode_is_deterministic_proportions():
    truth = ProfileModel((1.0, 0.2), (0.3, 0.5), DOMAIN)
    xs = np.linspace(*DOMAIN, 5)
    table = exact_table(truth, xs, denominator=3000.0)
    np.testing.assert_allclose(table.totals, 3000.0)
    theta, phi = truth.angles(xs)
    np.testing.assert_allclose(table.fractions(), outcome_probabilities(theta, phi) / 3, atol=1e-15)
    assert fcs_loss(table, truth) == pytest.approx(true_loss(truth, truth, xs), abs=1e-10)
    other = ProfileModel((0.4, -0.1), (2.0, 0.0), DOMAIN)
    assert fcs_loss(table, other) == pytest.approx(true_loss(truth, other, xs), abs=1e-10)


@pytest.mark.parametrize("schedule", ["cycled", "uniform_random"])
def test_count_totals(schedule):
    xs = tuple(np.linspace(*DOMAIN, 6))
    fixed = simulate(SimConfig(H_TRUTH, xs, shots_mode="fixed_per_setting", shots=7, schedule=schedule, seed=1))
    np.testing.assert_array_equal(fixed.totals, 21)
    rand = simulate(SimConfig(H_TRUTH, xs, shots_mode="random_basis", shots=31, schedule=schedule, seed=1))
    np.testing.assert_array_equal(rand.totals, 31)


def test_cycled_schedule_splits_bases_evenly():
    table = simulate(SimConfig(H_TRUTH, (810.0,), shots=30, schedule="cycled", seed=1))
    n = table.counts[0]
    assert [n[p] + n[q] for p, q in BASES] == [10, 10, 10]


def test_poisson_frames_mean():
    truth = ProfileModel.constant(np.pi / 2, 0.0, DOMAIN)
    xs = tuple(np.linspace(*DOMAIN, 400))
    table = simulate(SimConfig(truth, xs, shots_mode="poisson_frames", rate=0.1, frames=50, seed=8))
    # unpolarized-equivalent settings (H, V, R, L) have mean frames * rate = 5
    means = table.counts.mean(axis=0)
    assert means[Projector.H] == pytest.approx(5.0, abs=4 * np.sqrt(5 / 400))
    assert means[Projector.D] == pytest.approx(10.0, abs=4 * np.sqrt(10 / 400))
    assert means[Projector.A] == 0


def test_frequencies_converge(rng):
    m = 10**5
    for k in range(20):
        truth = ProfileModel(rng.uniform(0, np.pi, 2), rng.uniform(-3, 3, 2), DOMAIN)
        xs = tuple(np.linspace(*DOMAIN, 3))
        table = simulate(SimConfig(truth, xs, shots_mode="fixed_per_setting", shots=m, seed=k))
        theta, phi = truth.angles(np.array(xs))
        probs = outcome_probabilities(theta, phi)
        for i in range(len(xs)):
            for p, _ in BASES:
                freq = table.counts[i, p] / m
                se = np.sqrt(probs[i, p] * (1 - probs[i, p]) / m)
                assert abs(freq - probs[i, p]) <= 4 * se + 1e-12


def test_zero_shots_rejected():
    with pytest.raises(DataError):
        simulate(SimConfig(H_TRUTH, (810.0,), shots=0))


def test_config_validation():
    with pytest.raises(ConfigError):
        SimConfig(H_TRUTH, (), shots=3)
    with pytest.raises(ConfigError):
        SimConfig(H_TRUTH, (810.0,), shots_mode="bogus")
    config = SimConfig(H_TRUTH, (810.0, 811.0), shots=5, seed=2**63)
    assert SimConfig.from_dict(config.to_dict()) == config


def test_streams_are_independent_of_order():
    a = stream(5, 0, 3).random(4)
    stream(5, 0, 2).random(100)
    np.testing.assert_array_equal(a, stream(5, 0, 3).random(4))
    assert not np.array_equal(a, stream(5, 1, 3).random(4))


def test_sample_events_marginals():
    truth = ProfileModel.constant(0.0, 0.0, DOMAIN)
    x_idx, proj = sample_events(truth, [800.0, 810.0], 30_000, np.random.default_rng(0))
    assert set(np.unique(x_idx)) == {0, 1}
    assert not np.any(proj == Projector.V)
    counts = np.bincount(proj, minlength=6) / proj.size
    assert counts[Projector.H] == pytest.approx(1 / 3, abs=0.01)
    assert counts[Projector.D] == pytest.approx(1 / 6, abs=0.01)
