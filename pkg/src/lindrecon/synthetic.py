"""Random Lindbladians and shot-noise-limited synthetic measurement data."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    FIDUCIAL_LABELS,
    OBSERVABLE_LABELS,
    LindbladParams,
    fiducial_trajectories,
    params_to_generator,
)


def child_seed(master, *indices):
    """Independent seed for sub-task ``indices`` of a run seeded by ``master``."""
    return np.random.SeedSequence([int(master), *map(int, indices)])


@dataclass(frozen=True)
class ExperimentDesign:
    """Measurement grid: 4 fiducials x 3 Pauli observables x ``times``.

    ``shots`` is the number of repetitions M per (observable, fiducial, time).
    """

    times: tuple
    shots: int
    fiducials: tuple = FIDUCIAL_LABELS
    observables: tuple = OBSERVABLE_LABELS

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        if not times:
            raise ValueError("design needs at least one time")
        if not all(np.isfinite(times)):
            raise ValueError("times must be finite")
        if times[0] < 0:
            raise ValueError("times must be non-negative")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("times must be strictly ascending")
        if isinstance(self.shots, bool) or int(self.shots) != self.shots or self.shots < 1:
            raise ValueError(f"shots must be a positive integer, got {self.shots!r}")
        if tuple(self.fiducials) != FIDUCIAL_LABELS:
            raise ValueError(f"fiducials must be {FIDUCIAL_LABELS}")
        if tuple(self.observables) != OBSERVABLE_LABELS:
            raise ValueError(f"observables must be {OBSERVABLE_LABELS}")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "shots", int(self.shots))
        object.__setattr__(self, "fiducials", tuple(self.fiducials))
        object.__setattr__(self, "observables", tuple(self.observables))

    @classmethod
    def uniform(cls, start, stop, count, shots):
        return cls(tuple(np.linspace(start, stop, int(count))), shots)

    @property
    def min_step(self):
        if len(self.times) < 2:
            return np.inf
        return float(np.min(np.diff(self.times)))

    @property
    def nyquist_rate(self):
        """``pi / dt_min`` in rad/us; infinite for a single-time design."""
        return np.pi / self.min_step

    @property
    def n_cells(self):
        return len(self.observables) * len(self.fiducials) * len(self.times)


@dataclass(frozen=True)
class MeasurementDataset:
    """Counts of +1 outcomes, indexed ``counts[b, k, n]``.

    ``b`` runs over observables (x, y, z), ``k`` over fiducials
    (0, 1, +, i) and ``n`` over ``design.times``.
    """

    design: ExperimentDesign
    counts: np.ndarray

    def __post_init__(self):
        counts = np.array(self.counts)
        shape = (3, 4, len(self.design.times))
        if counts.shape != shape:
            raise ValueError(f"counts must have shape {shape}, got {counts.shape}")
        if not np.issubdtype(counts.dtype, np.integer):
            if np.any(counts != np.round(counts)):
                raise ValueError("counts must be integers")
        counts = counts.astype(np.int64)
        if counts.min() < 0 or counts.max() > self.design.shots:
            raise ValueError(f"counts must lie in [0, {self.design.shots}]")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def probabilities(self):
        """Empirical P(+1) = count / M, same indexing as ``counts``."""
        return self.counts / self.design.shots

    def records(self):
        """Yield ``(observable, fiducial, time, count_plus)`` in grid order."""
        for b, obs in enumerate(self.design.observables):
            for k, fid in enumerate(self.design.fiducials):
                for n, t in enumerate(self.design.times):
                    yield obs, fid, t, int(self.counts[b, k, n])


def model_probabilities(G, times):
    """Noise-free P(+1) for every cell, indexed ``[b, k, n]``."""
    r = fiducial_trajectories(G, times)  # (n, k, b)
    p = 0.5 * (1.0 + r.transpose(2, 1, 0))
    return np.clip(p, 0.0, 1.0)


def random_lindbladian(seed, rate_scale=1.0, rotation_scale=1.0, nyquist_rate=None):
    """Draw a random completely positive single-qubit Lindbladian.

    Hamiltonian coefficients are normal with standard deviation
    ``rotation_scale``.  Real and imaginary parts of the Kossakowski factor
    are normal with standard deviation ``sqrt(rate_scale)``, with the
    diagonal folded to be non-negative.  When ``nyquist_rate`` is given the
    process is shrunk, if necessary, so that every generator eigenvalue has
    modulus at most ``0.8 * nyquist_rate``.
    """
    if rate_scale < 0 or rotation_scale < 0:
        raise ValueError("scales must be non-negative")
    rng = np.random.default_rng(seed)
    h = rng.normal(0.0, rotation_scale, size=3)
    s = np.sqrt(rate_scale)
    diag = np.abs(rng.normal(0.0, s, size=3))
    lower = rng.normal(0.0, s, size=6)
    params = LindbladParams.from_flat(np.concatenate([h, diag, lower]))
    if nyquist_rate is not None and np.isfinite(nyquist_rate):
        top = np.abs(np.linalg.eigvals(params_to_generator(params))).max()
        limit = 0.8 * nyquist_rate
        if top > limit:
            params = params.scaled(limit / top)
    return params


def sample_counts(p_plus, shots, seed):
    """Binomial number of +1 outcomes in ``shots`` repetitions."""
    p = np.asarray(p_plus, dtype=float)
    if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
        raise ValueError(f"probability out of range: {p_plus}")
    if int(shots) != shots or shots < 1:
        raise ValueError(f"shots must be a positive integer, got {shots}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    out = rng.binomial(int(shots), p)
    return int(out) if np.ndim(out) == 0 else out


def generate_dataset(params, design, seed):
    """Simulate ``design`` on ``params`` with binomial projection noise."""
    p = model_probabilities(params_to_generator(params), design.times)
    return MeasurementDataset(design, sample_counts(p, design.shots, seed))
