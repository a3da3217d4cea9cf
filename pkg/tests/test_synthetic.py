from pathlib import Path

import numpy as np
import pytest

from lindrecon import io
from lindrecon.channels import amplitude_damping
from lindrecon.core import LindbladParams, is_completely_positive, params_to_generator, propagator
from lindrecon.synthetic import (
    ExperimentDesign,
    MeasurementDataset,
    generate_dataset,
    model_probabilities,
    random_lindbladian,
    sample_counts,
)

GOLDEN = Path(__file__).parent / "data" / "golden_amp_damp_seed7.json"


def test_design_validation():
    with pytest.raises(ValueError):
        ExperimentDesign((), 10)
    with pytest.raises(ValueError):
        ExperimentDesign((0.0, 0.0), 10)
    with pytest.raises(ValueError):
        ExperimentDesign((-1.0, 1.0), 10)
    with pytest.raises(ValueError):
        ExperimentDesign((0.0, 1.0), 0)
    d = ExperimentDesign.uniform(0, 9, 30, 625)
    assert d.n_cells == 360
    assert d.nyquist_rate == pytest.approx(np.pi / (9 / 29))


def test_random_lindbladian_deterministic():
    a = random_lindbladian(123, 0.5, 2.0)
    b = random_lindbladian(123, 0.5, 2.0)
    assert np.array_equal(a.to_flat(), b.to_flat())
    assert not np.array_equal(a.to_flat(), random_lindbladian(124, 0.5, 2.0).to_flat())


def test_random_lindbladian_completely_positive():
    for seed in range(1000):
        G = params_to_generator(random_lindbladian(seed, 1.0, 1.0))
        assert is_completely_positive(propagator(G, 0.5))


def test_random_lindbladian_zero_scale_limit():
    G = params_to_generator(random_lindbladian(9, 0.0, 0.0))
    assert np.all(G == 0)


def test_random_lindbladian_respects_nyquist():
    limit = 2.0
    for seed in range(50):
        G = params_to_generator(random_lindbladian(seed, 5.0, 5.0, nyquist_rate=limit))
        assert np.abs(np.linalg.eigvals(G)).max() <= 0.8 * limit * (1 + 1e-12)


def test_sample_counts_edges():
    assert sample_counts(1.0, 37, 0) == 37
    assert sample_counts(0.0, 37, 0) == 0
    with pytest.raises(ValueError):
        sample_counts(1.2, 10, 0)
    with pytest.raises(ValueError):
        sample_counts(0.5, 0, 0)


def test_sample_counts_binomial_spread():
    M = 10_000
    freqs = np.array([sample_counts(0.5, M, seed) for seed in range(100)]) / M
    assert abs(freqs.std(ddof=1) - 0.005) <= 0.2 * 0.005


def test_zero_generator_dataset():
    design = ExperimentDesign.uniform(0, 5, 6, 250)
    data = generate_dataset(LindbladParams.zeros(), design, 1)
    assert np.all(data.counts[2, 0] == 250)
    assert np.all(data.counts[2, 1] == 0)


def test_large_shot_limit_matches_model():
    p = random_lindbladian(4, 0.2, 1.0)
    design = ExperimentDesign.uniform(0, 5, 10, 1_000_000)
    data = generate_dataset(p, design, 8)
    expected = model_probabilities(params_to_generator(p), design.times)
    assert np.abs(data.probabilities - expected).max() < 0.005


def test_projection_noise_envelope():
    M = 1000
    p = random_lindbladian(2, 0.1, 1.0)
    design = ExperimentDesign.uniform(0, 10, 84, M)
    data = generate_dataset(p, design, 3)
    assert design.n_cells >= 1000
    dev = data.probabilities - model_probabilities(params_to_generator(p), design.times)
    rms = np.sqrt(np.mean(dev**2))
    assert 0.2 / np.sqrt(M) <= rms <= 0.6 / np.sqrt(M)


def test_grid_completeness_and_count_bounds():
    design = ExperimentDesign.uniform(0, 1, 7, 20)
    data = generate_dataset(random_lindbladian(0), design, 0)
    assert len(list(data.records())) == 12 * 7
    with pytest.raises(ValueError):
        MeasurementDataset(design, np.full((3, 4, 7), 21))
    with pytest.raises(ValueError):
        MeasurementDataset(design, np.zeros((3, 4, 6), dtype=int))


def test_golden_dataset_is_reproduced():
    preset = amplitude_damping()
    design = ExperimentDesign.uniform(0, 9, 30, 625)
    data = generate_dataset(preset.params, design, 7)
    assert io.dumps(io.dataset_to_dict(data)) == GOLDEN.read_text()
