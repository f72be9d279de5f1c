"""Thermodynamic holography: partition functions and free energies at
arbitrary complex parameters from their values on one or two vertical lines,
measured in practice as probe-spin coherence."""
from .coherence import CoherenceTrace, coherence_dynamics, coherence_identity, detect_period, sample_trace
from .errors import (
    ConditioningError,
    ConsistencyError,
    ConvergenceError,
    CutoffError,
    DampingConstantError,
    HolographyError,
    MatrixExponentialError,
    ModelError,
    PeriodError,
    ResonanceError,
    SingularPointError,
)
from .estimators import CoherenceTransporter, FreeEnergyHologram, PartitionHologram
from .holography import (
    ConditioningWarning,
    ExperimentResult,
    FreeEnergyDifference,
    Reconstruction,
    ReconstructionConfig,
    cauchy_disk,
    circle_contour,
    coherence_transport,
    default_damping,
    free_energy_difference,
    reconstruct_from_coherence,
    reconstruct_left_half,
    reconstruct_right_half,
    reconstruct_two_lines,
)
from .models import (
    ModelKind,
    ModelSpec,
    ParamHamiltonian,
    SpinOscillatorParams,
    build_model,
    effective_spin_oscillator,
    eta_coupling,
    full_spin_oscillator,
    measured_dispersive_coupling,
    verify_effective_hamiltonian,
)
from .quadrature import KernelParams, cauchy_kernel_integral, fourier_resum, integrate_truncated
from .spectral import (
    check_bernstein,
    check_vertical_bound,
    free_energy,
    partition_closed_form,
    partition_function,
    partition_trace,
)

__version__ = "0.1.0"
