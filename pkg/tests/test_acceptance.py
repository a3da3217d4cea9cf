"""Acceptance criteria 1-9.

Each test prints one ``[PASS]``/``[FAIL] criterion N`` line (collected again
in the terminal summary) and then asserts, so a failing criterion is
reported with its measured value rather than hidden.
"""

import re
import time

import numpy as np
import pytest

from lindrecon import io
from lindrecon.channels import PRESETS, get_preset
from lindrecon.cli import main
from lindrecon.core import (
    FIDUCIAL_BLOCH,
    choi_matrix,
    fiducial_trajectories,
    grid_propagators,
    hamiltonian_matrix,
    kossakowski_to_jumps,
    params_to_generator,
)
from lindrecon.reconstruction import (
    CostConfig,
    benchmark_samples,
    c2_pre_metric,
    cost,
    error_infidelity_correlation,
    kl_pre_metric,
    loglog_slope,
    reconstruct,
    stopping_threshold,
    summarize,
)
from lindrecon.synthetic import (
    ExperimentDesign,
    MeasurementDataset,
    generate_dataset,
    model_probabilities,
    random_lindbladian,
)

from conftest import rk_bloch


def run(*argv):
    return main([str(a) for a in argv])


# -- 1 ----------------------------------------------------------------------

def test_criterion_1_amplitude_damping_ratio(tmp_path, capsys, acceptance_report):
    data, result = tmp_path / "amp.json", tmp_path / "result.json"
    start = time.perf_counter()
    assert run("simulate", "amp-damp", "--shots", 625, "--times", "0:9:30", "--seed", 0, "--out", data) == 0
    assert run("reconstruct", data, "--out", result) == 0
    elapsed = time.perf_counter() - start
    out = capsys.readouterr().out
    ratio = float(re.search(r"decay ratio (\S+)", out).group(1))
    passed = 1.35 <= ratio <= 1.75 and elapsed <= 60
    acceptance_report(1, passed, f"coherence/population ratio {ratio:.3f} in [1.35, 1.75], runtime {elapsed:.1f} s <= 60 s")
    assert passed


# -- 2 and 3 ----------------------------------------------------------------

SHOTS = [64, 256, 1024, 4096]


@pytest.fixture(scope="module")
def full_benchmark():
    start = time.perf_counter()
    samples = benchmark_samples(SHOTS, 100, seed=2024)
    return samples, summarize(SHOTS, samples), time.perf_counter() - start


@pytest.mark.slow
def test_criterion_2_infidelity_bound(full_benchmark, acceptance_report):
    _, rows, elapsed = full_benchmark
    ok = [r.mean_infidelity <= r.bound for r in rows]
    detail = ", ".join(f"M={r.shots}: {r.mean_infidelity:.5f} vs {r.bound:.5f}" for r in rows)
    passed = all(ok) and elapsed <= 20 * 60
    acceptance_report(2, passed, f"mean infidelity <= 0.5/sqrt(M) ({detail}); runtime {elapsed:.0f} s <= 1200 s")
    assert passed


@pytest.mark.slow
def test_criterion_3_scaling_law(full_benchmark, acceptance_report):
    samples, rows, _ = full_benchmark
    errors = [r.mean_error for r in rows]
    slope = loglog_slope(SHOTS, errors)
    passed = -0.65 <= slope <= -0.35
    acceptance_report(3, passed, f"log-log slope of mean reconstruction error {slope:.3f} in [-0.65, -0.35]")
    assert passed
    # Companion properties of the same benchmark.
    assert all(b < a for a, b in zip(errors, errors[1:]))
    assert -0.65 <= loglog_slope(SHOTS, [r.mean_infidelity for r in rows]) <= -0.35
    assert error_infidelity_correlation(samples) >= 0.3


# -- 4 ----------------------------------------------------------------------

def test_criterion_4_experimental_noise_floors(acceptance_report):
    parts, passed = [], True
    for seed, name in enumerate(sorted(PRESETS)):
        preset = get_preset(name)
        design = ExperimentDesign.uniform(0.0, preset.time_span, 30, preset.shots)
        result = reconstruct(generate_dataset(preset.params, design, seed=100 + seed))
        limit = 3 * stopping_threshold(preset.shots)
        passed &= result.infidelity <= limit
        parts.append(f"{name} M={preset.shots}: {result.infidelity:.4f} <= {limit:.4f}")
    acceptance_report(4, passed, "; ".join(parts))
    assert passed


# -- 5 ----------------------------------------------------------------------

def test_criterion_5_oracle_equivalence(acceptance_report):
    times = np.linspace(0.0, 10.0, 30)
    rk_worst = 0.0
    for seed in range(20):
        p = random_lindbladian(seed)
        jumps = kossakowski_to_jumps(p.V)
        H = hamiltonian_matrix(p.h)
        traj = fiducial_trajectories(params_to_generator(p), times)
        for k, r0 in enumerate(FIDUCIAL_BLOCH):
            # The oracle's own tolerance must sit well below the 1e-8 target.
            rk = rk_bloch(H, jumps, r0, times, rtol=1e-13, atol=1e-15)
            rk_worst = max(rk_worst, np.abs(traj[:, k] - rk).max())

    cf_worst = 0.0
    for name in PRESETS:
        preset = get_preset(name)
        gamma = preset.jumps[0].rate
        grid = np.linspace(0.0, 5.0 / gamma, 100)
        for t, P in zip(grid, grid_propagators(preset.generator, grid)):
            M, v = preset.closed_form(t)
            cf_worst = max(cf_worst, np.abs(P[1:, 1:] - M).max(), np.abs(P[1:, 0] - v).max())

    passed = rk_worst <= 1e-8 and cf_worst <= 1e-9
    acceptance_report(5, passed, f"exp(Gt) vs Runge-Kutta max deviation {rk_worst:.1e} <= 1e-8; "
                                 f"closed forms {cf_worst:.1e} <= 1e-9")
    assert passed


# -- 6 ----------------------------------------------------------------------

def test_criterion_6_physicality(acceptance_report):
    times = np.linspace(0.0, 5.0, 11)
    directions = np.random.default_rng(6).normal(size=(200, 3))
    pure_states = np.vstack([FIDUCIAL_BLOCH, directions / np.linalg.norm(directions, axis=1, keepdims=True)])
    row0_exact, min_state, min_choi = True, np.inf, np.inf
    for seed in range(1000):
        G = params_to_generator(random_lindbladian(seed))
        row0_exact &= bool(np.all(G[0] == 0))
        for P in grid_propagators(G, times):
            # Smallest density-matrix eigenvalue of an image state is (1 - |r|)/2.
            images = pure_states @ P[1:, 1:].T + P[1:, 0]
            min_state = min(min_state, (1 - np.linalg.norm(images, axis=1).max()) / 2)
            min_choi = min(min_choi, np.linalg.eigvalsh(choi_matrix(P)).min())
    passed = row0_exact and min_state >= -1e-9 and min_choi >= -1e-8
    acceptance_report(6, passed, f"row 0 exactly zero: {row0_exact}; min state eigenvalue bound {min_state:.1e}; "
                                 f"min Choi eigenvalue {min_choi:.1e}")
    assert passed


# -- 7 ----------------------------------------------------------------------

def test_criterion_7_metric_suite(acceptance_report):
    rng = np.random.default_rng(7)
    a = rng.random(10_000)
    b = rng.random(10_000)
    edges = np.array([0.0, 1.0, 0.5, 1e-300, 1 - 1e-16])
    a[:25] = np.repeat(edges, 5)
    b[:25] = np.tile(edges, 5)
    b[25:100] = a[25:100]
    eps = 1e-3
    axioms = True
    for x, y in zip(a, b):
        px, py = [x, 1 - x], [y, 1 - y]
        kl, c2 = kl_pre_metric(px, py, eps), c2_pre_metric(px, py)
        equal_clamped = np.clip(x, eps, 1 - eps) == np.clip(y, eps, 1 - eps)
        axioms &= kl >= 0 and (kl == 0) == equal_clamped
        axioms &= c2 >= 0 and (c2 == 0) == (x == y) and c2 == c2_pre_metric(py, px)
    witness = kl_pre_metric([0.9, 0.1], [0.5, 0.5], eps), kl_pre_metric([0.5, 0.5], [0.9, 0.1], eps)
    asymmetric = abs(witness[0] - witness[1]) > 1e-3

    p = random_lindbladian(3, 0.1, 1.0)
    design = ExperimentDesign.uniform(0.0, 10.0, 30, 10**12)
    exact = model_probabilities(params_to_generator(p), design.times)
    data = MeasurementDataset(design, np.round(exact * design.shots).astype(np.int64))
    zero_noise = cost(p, data, CostConfig.for_dataset(data))

    passed = axioms and asymmetric and zero_noise < 1e-6
    acceptance_report(7, passed, f"axioms on 10^4 pairs: {axioms}; KL witness {witness[0]:.4f} vs {witness[1]:.4f}; "
                                 f"zero-noise cost {zero_noise:.1e} < 1e-6")
    assert passed


# -- 8 ----------------------------------------------------------------------

def test_criterion_8_fixed_point_geometry(acceptance_report):
    def frames(name, times):
        G = get_preset(name).generator
        return [io.bloch_frame(G, t) for t in times]

    amp = frames("amp-damp", [0.2, 1, 3, 9, 60])
    gaps = [np.linalg.norm(np.subtract(f["center"], [0, 0, 1])) for f in amp]
    amp_ok = all(g2 < g1 for g1, g2 in zip(gaps, gaps[1:])) and gaps[-1] < 1e-6

    depol = frames("depol", [1, 6, 16, 37, 400])
    depol_ok = max(np.abs(f["center"]).max() for f in depol) <= 1e-9 and max(depol[-1]["semi_axes"]) < 1e-6

    last = frames("depol-rabi", [53])[0]
    axis = np.asarray(last["principal_directions"][0])
    rabi_ok = abs(axis[0]) > 1 - 1e-9

    passed = amp_ok and depol_ok and rabi_ok
    acceptance_report(8, passed, f"amp-damp center gap {gaps[-1]:.1e}; depol center max "
                                 f"{max(np.abs(f['center']).max() for f in depol):.1e}; "
                                 f"depol-rabi major axis {np.round(axis, 6).tolist()}")
    assert passed


# -- 9 ----------------------------------------------------------------------

def test_criterion_9_cli_determinism(tmp_path, capsys, monkeypatch, acceptance_report):
    def outputs(tag, workers):
        # Relative paths, since frame files record their source path.
        d = tmp_path / tag
        d.mkdir()
        monkeypatch.chdir(d)
        commands = [
            ("simulate", "depol-rabi", "--seed", 3, "--out", "data.json"),
            ("reconstruct", "data.json", "--seed", 3, "--restarts", 3, "--out", "result.json"),
            ("bloch-movie", "result.json", "--times", "0:20:5", "--svg", "--out", "movie.json"),
            ("validate", "result.json"),
            ("benchmark", "--shots", "64,1024", "-n", 10, "--count", 10, "--restarts", 2, "--max-iters", 300,
             "--seed", 3, "--workers", workers, "--out", "bench.csv"),
        ]
        stdout = []
        for argv in commands:
            assert run(*argv) == 0
            stdout.append(capsys.readouterr().out)
        files = {p.name: p.read_bytes() for p in sorted(d.iterdir())}
        return files, stdout

    runs = [outputs("a", 1), outputs("b", 1), outputs("c", 2), outputs("d", 3)]
    passed = all(r == runs[0] for r in runs[1:])
    acceptance_report(9, passed, f"{len(runs[0][0])} output files and stdout byte-identical across 4 runs "
                                 f"(benchmark workers 1, 1, 2, 3)")
    assert passed
