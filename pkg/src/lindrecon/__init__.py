"""Simulate single-qubit Lindblad dynamics and reconstruct the generator from measurements."""

__version__ = "0.1.0"

from .channels import (  # noqa: E402
    PRESETS,
    amplitude_damping,
    coherence_population_ratio,
    depolarization,
    driven_depolarization,
    get_preset,
)
from .core import (  # noqa: E402
    FIDUCIAL_LABELS,
    JumpTerm,
    LindbladParams,
    bloch_snapshot,
    fiducial_trajectories,
    geometric_decomposition,
    jumps_to_params,
    kossakowski_to_jumps,
    lindblad_rhs,
    outcome_distribution,
    params_to_generator,
    propagate,
)
from .reconstruction import (  # noqa: E402
    CostConfig,
    OptimizerConfig,
    benchmark,
    cost,
    infidelity,
    loglog_slope,
    reconstruct,
    reconstruction_error,
    stopping_threshold,
)
from .synthetic import (  # noqa: E402
    ExperimentDesign,
    MeasurementDataset,
    generate_dataset,
    random_lindbladian,
)
