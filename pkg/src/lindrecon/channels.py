"""Channel presets modelled on scattering-induced qubit dynamics.

Each preset bundles its parameters, the jump operators it was built from,
and an independent closed-form Bloch map ``t -> (M(t), v(t))`` used to check
the generic propagator.  ``|down> = |0>`` sits at the north pole.

Default rates are calibrated so that the figure snapshot times cover a few
decay constants; they are not measured values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import JumpTerm, hamiltonian_matrix, jumps_to_params, params_to_generator

DOWN_UP = np.array([[0, 1], [0, 0]], dtype=complex)  # |down><up| = |0><1|
UP_DOWN = np.array([[0, 0], [1, 0]], dtype=complex)  # |up><down| = |1><0|
UP_UP = np.array([[0, 0], [0, 1]], dtype=complex)  # |up><up| = |1><1|


@dataclass(frozen=True)
class ChannelPreset:
    name: str
    params: object
    jumps: tuple
    hamiltonian: np.ndarray
    closed_form: Callable
    snapshot_times: tuple
    time_span: float
    shots: int

    @property
    def generator(self):
        return params_to_generator(self.params)


def _positive(name, value):
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")


def amplitude_damping(gamma=0.35):
    """Optical pumping to ``|down>``: decay at ``gamma`` plus dephasing at ``2*gamma``.

    The dephasing jump ``|up><up|`` carries twice the decay rate, so
    coherences decay at ``1.5 * gamma``.
    """
    _positive("gamma", gamma)
    jumps = (JumpTerm(gamma, DOWN_UP), JumpTerm(2 * gamma, UP_UP))
    H = np.zeros((2, 2), dtype=complex)

    def closed_form(t):
        transverse = np.exp(-1.5 * gamma * t)
        pop = np.exp(-gamma * t)
        return np.diag([transverse, transverse, pop]), np.array([0.0, 0.0, 1.0 - pop])

    return ChannelPreset(
        "amp-damp", jumps_to_params(jumps, H), jumps, H, closed_form,
        (0.2, 1.0, 3.0, 9.0), 9.0, 625,
    )


def depolarization(gamma=0.045, stark=0.0):
    """Raman flips in both directions at ``gamma``, optional Stark rotation about z."""
    _positive("gamma", gamma)
    jumps = (JumpTerm(gamma, UP_DOWN), JumpTerm(gamma, DOWN_UP))
    H = hamiltonian_matrix([0.0, 0.0, stark])

    def closed_form(t):
        e = np.exp(-gamma * t)
        c, s = np.cos(stark * t), np.sin(stark * t)
        M = np.array([[e * c, -e * s, 0.0], [e * s, e * c, 0.0], [0.0, 0.0, np.exp(-2 * gamma * t)]])
        return M, np.zeros(3)

    return ChannelPreset(
        "depol", jumps_to_params(jumps, H), jumps, H, closed_form,
        (1.0, 6.0, 16.0, 37.0), 37.0, 200,
    )


def driven_depolarization(gamma=0.045, rabi=0.3):
    """Depolarization with a resonant drive of Rabi frequency ``rabi`` about x."""
    _positive("gamma", gamma)
    if rabi < 0:
        raise ValueError(f"rabi must be non-negative, got {rabi}")
    jumps = (JumpTerm(gamma, UP_DOWN), JumpTerm(gamma, DOWN_UP))
    H = hamiltonian_matrix([rabi, 0.0, 0.0])
    # (r_y, r_z)' = [[-g, -W], [W, -2g]] (r_y, r_z) = (-3g/2 + N) (r_y, r_z)
    # with N**2 = (g**2/4 - W**2) I.
    N = np.array([[0.5 * gamma, -rabi], [rabi, -0.5 * gamma]])
    root = np.sqrt(complex(0.25 * gamma**2 - rabi**2))

    def closed_form(t):
        if abs(root * t) < 1e-12:
            cosh, sinc = 1.0, t
        else:
            cosh, sinc = np.cosh(root * t).real, (np.sinh(root * t) / root).real
        block = np.exp(-1.5 * gamma * t) * (cosh * np.eye(2) + sinc * N)
        M = np.zeros((3, 3))
        M[0, 0] = np.exp(-gamma * t)
        M[1:, 1:] = block
        return M, np.zeros(3)

    return ChannelPreset(
        "depol-rabi", jumps_to_params(jumps, H), jumps, H, closed_form,
        (1.0, 10.0, 23.0, 53.0), 53.0, 200,
    )


PRESETS = {
    "amp-damp": amplitude_damping,
    "depol": depolarization,
    "depol-rabi": driven_depolarization,
}


def get_preset(name, **kwargs):
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return factory(**kwargs)


def coherence_population_ratio(G):
    """Transverse (coherence) decay rate over longitudinal (population) decay rate.

    Read from the diagonal of the Bloch block: ``-(A_xx + A_yy)/2`` over
    ``-A_zz``.
    """
    A = np.asarray(G)[1:, 1:]
    return float(-(A[0, 0] + A[1, 1]) / 2 / -A[2, 2])
