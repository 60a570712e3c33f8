import copy
import math

import numpy as np
import pytest

from src.optim.cmaes import (
    CmaesConfig,
    CmaesError,
    MinimizeResult,
    ask,
    default_population,
    init_state,
    minimize,
    tell,
)


def sphere(x):
    return float(np.dot(x, x))


def rosenbrock(x):
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def test_default_population():
    assert default_population(7) == 9
    assert CmaesConfig(dimension=7).lam == 9
    assert CmaesConfig(dimension=7).mu == 4


@pytest.mark.parametrize("kwargs", [
    {"dimension": 2, "lower": [0.0, 1.0], "upper": [1.0, 1.0]},
    {"dimension": 2, "lower": [0.0], "upper": [1.0]},
    {"dimension": 2, "population": 1},
])
def test_invalid_settings_are_rejected(kwargs):
    with pytest.raises(ValueError):
        CmaesConfig(**kwargs)


def test_wrong_start_dimension():
    with pytest.raises(CmaesError):
        init_state([0.0, 0.0], CmaesConfig(dimension=3))


def test_collapsed_step_size_samples_the_mean():
    config = CmaesConfig(dimension=3, sigma0=1e-300, population=6)
    state = init_state([0.1, -0.2, 0.3], config)
    population = ask(state, config)
    assert np.array_equal(population.candidates, np.tile(state.mean, (6, 1)))

    mean = state.mean.copy()
    tell(state, population, np.ones(6), config)
    assert np.array_equal(state.mean, mean)


def test_same_seed_same_samples():
    config = CmaesConfig(dimension=4, seed=42)
    first = ask(init_state(np.zeros(4), config), config)
    second = ask(init_state(np.zeros(4), config), config)
    other = ask(init_state(np.zeros(4), config.model_copy(update={"seed": 43})), config)
    assert np.array_equal(first.samples, second.samples)
    assert not np.array_equal(first.samples, other.samples)


def test_samples_are_centred_on_the_mean():
    config = CmaesConfig(dimension=3, population=20000, sigma0=1.0)
    state = init_state([1.0, -2.0, 0.5], config)
    samples = ask(state, config).samples
    assert samples.mean(axis=0) == pytest.approx([1.0, -2.0, 0.5], abs=0.05)
    assert samples.std(axis=0) == pytest.approx([1.0, 1.0, 1.0], abs=0.05)


def test_candidates_stay_in_the_box():
    config = CmaesConfig(dimension=3, sigma0=0.5, lower=[0.0] * 3, upper=[1.0] * 3, resample_limit=0,
                         population=50)
    state = init_state([0.95, 0.05, 0.5], config)
    population = ask(state, config)
    assert np.all(population.candidates >= 0.0) and np.all(population.candidates <= 1.0)
    assert np.any(population.samples != population.candidates)


@pytest.mark.parametrize("costs", [
    [1.0, float("nan"), 2.0, 3.0, 4.0, 5.0],
    [1.0, float("inf"), 2.0, 3.0, 4.0, 5.0],
    [1.0, 2.0],
])
def test_tell_rejects_bad_costs(costs):
    config = CmaesConfig(dimension=2, population=6)
    state = init_state(np.zeros(2), config)
    with pytest.raises(CmaesError):
        tell(state, ask(state, config), costs, config)


def test_covariance_stays_symmetric_positive_definite():
    config = CmaesConfig(dimension=5, seed=1)
    state = init_state(np.full(5, 3.0), config)
    for _ in range(60):
        population = ask(state, config)
        tell(state, population, [rosenbrock(x) for x in population.candidates], config)
        assert np.allclose(state.C, state.C.T)
        assert np.min(np.linalg.eigvalsh(state.C)) > 0.0
    assert state.generation == 60
    assert state.evaluations == 60 * config.lam


def test_sphere_mean_approaches_the_optimum():
    config = CmaesConfig(dimension=4, seed=5)
    state = init_state(np.full(4, 2.0), config)
    norms = []
    for _ in range(80):
        population = ask(state, config)
        tell(state, population, [sphere(x) for x in population.candidates], config)
        norms.append(np.linalg.norm(state.mean))
    assert norms[-1] < 1e-2 * norms[0]
    assert state.sigma < config.sigma0


def test_step_size_grows_on_a_linear_slope():
    config = CmaesConfig(dimension=3, sigma0=0.1, seed=2)
    state = init_state(np.zeros(3), config)
    for _ in range(20):
        population = ask(state, config)
        tell(state, population, [float(x[0]) for x in population.candidates], config)
    assert state.sigma > 0.1


def test_minimize_sphere_10d():
    config = CmaesConfig(dimension=10, max_generations=300, target_cost=1e-8, seed=0)
    result = minimize(sphere, np.ones(10), 0.5, config)
    assert isinstance(result, MinimizeResult)
    assert result.best_cost < 1e-8
    assert sphere(result.best) == pytest.approx(result.best_cost)
    best = [row.best_cost for row in result.history]
    assert all(a >= b for a, b in zip(best, best[1:]))


@pytest.mark.slow
def test_minimize_rosenbrock_5d():
    config = CmaesConfig(dimension=5, max_generations=2000, target_cost=1e-8, seed=0)
    result = minimize(rosenbrock, np.zeros(5), 0.5, config)
    assert result.best_cost < 1e-6
    assert result.best == pytest.approx(np.ones(5), abs=1e-2)


def test_minimize_finds_a_bound_optimum():
    config = CmaesConfig(dimension=1, max_generations=100, lower=[0.0], upper=[1.0], seed=4)
    result = minimize(lambda x: float((x[0] - 2.0) ** 2), [0.5], 0.3, config)
    assert result.best[0] == pytest.approx(1.0, abs=1e-3)
    assert result.best_cost == pytest.approx(1.0, abs=2e-3)


def test_minimize_uses_the_given_map():
    calls = []

    def recording_map(fn, items):
        items = list(items)
        calls.append(len(items))
        return map(fn, items)

    config = CmaesConfig(dimension=2, max_generations=3, population=5)
    minimize(sphere, [1.0, 1.0], 0.2, config, map_fn=recording_map)
    assert calls == [5, 5, 5]


def reference_update(state, samples, costs, config):
    """One generation of the textbook update, written out longhand."""
    n, lam, mu = config.dimension, config.lam, config.mu
    raw = np.array([math.log((lam + 1) / 2) - math.log(i + 1) for i in range(mu)])
    w = raw / raw.sum()
    mueff = 1 / np.sum(w ** 2)
    cc = (4 + mueff / n) / (n + 4 + 2 * mueff / n)
    cs = (mueff + 2) / (n + mueff + 5)
    c1 = 2 / ((n + 1.3) ** 2 + mueff)
    cmu = min(1 - c1, 2 * (mueff - 2 + 1 / mueff) / ((n + 2) ** 2 + mueff))
    damps = 1 + 2 * max(0, math.sqrt((mueff - 1) / (n + 1)) - 1) + cs
    chi_n = math.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n * n))

    order = sorted(range(lam), key=lambda k: costs[k])
    ys = [(samples[k] - state.mean) / state.sigma for k in order[:mu]]
    y_w = sum(wi * yi for wi, yi in zip(w, ys))
    mean = state.mean + state.sigma * y_w

    eigenvalues, B = np.linalg.eigh(state.C)
    c_inv_sqrt = B @ np.diag(eigenvalues ** -0.5) @ B.T
    ps = (1 - cs) * state.ps + math.sqrt(cs * (2 - cs) * mueff) * c_inv_sqrt @ y_w
    hsig = np.linalg.norm(ps) / math.sqrt(1 - (1 - cs) ** 2) / chi_n < 1.4 + 2 / (n + 1)
    pc = (1 - cc) * state.pc + hsig * math.sqrt(cc * (2 - cc) * mueff) * y_w
    C = (1 - c1 - cmu) * state.C + c1 * (np.outer(pc, pc) + (1 - hsig) * cc * (2 - cc) * state.C)
    C += cmu * sum(wi * np.outer(yi, yi) for wi, yi in zip(w, ys))
    sigma = state.sigma * math.exp(cs / damps * (np.linalg.norm(ps) / chi_n - 1))
    return mean, ps, pc, C, sigma


def test_first_update_matches_reference():
    config = CmaesConfig(dimension=4, seed=9)
    state = init_state([0.3, -0.1, 0.8, 0.0], config)
    population = ask(state, config)
    costs = [rosenbrock(x) for x in population.candidates]

    mean, ps, pc, C, sigma = reference_update(copy.deepcopy(state), population.samples, costs, config)
    tell(state, population, costs, config)

    assert np.allclose(state.mean, mean, rtol=0, atol=1e-12)
    assert np.allclose(state.ps, ps, rtol=0, atol=1e-12)
    assert np.allclose(state.pc, pc, rtol=0, atol=1e-12)
    assert np.allclose(state.C, C, rtol=0, atol=1e-12)
    assert state.sigma == pytest.approx(sigma, rel=1e-12)
