"""weakval: a numerical laboratory for weak quantum measurements.

Improper (sign-alternating, complex) amplitude distributions and their
moments, classical and quantum meter models, weak values with and without
post-selection, scattering time observables and the local-angular-momentum
decomposition of angular distributions.
"""

from .classical import (
    ClassicalEnsemble,
    GaussianPhaseSpace,
    ImpulsiveSwitching,
    PositionObservable,
    RegionIndicator,
    WindowSwitching,
    convolve_readings,
    estimate_from_noisy_readings,
    functional_distribution,
    noise_scaling_experiment,
)
from .distributions import (
    HybridDistribution,
    MomentReport,
    decompose_complex,
    read_distribution_csv,
    sine_offset_family,
    variance_zero_locus,
    write_distribution_csv,
)
from .errors import (
    ConfigError,
    DegenerateNormalizationError,
    GridResolutionError,
    PreconditionError,
    WeakvalError,
)
from .lam import (
    LamDecomposition,
    PartialWaveSet,
    amplitude,
    decompose,
    differential_cross_section,
    ingest_partial_waves,
    local_angular_momentum,
)
from .pathways import (
    PathAmplitudeSet,
    ShutterReport,
    WatchPartition,
    path_amplitudes,
    shutter_sensitivity,
    watched_probabilities,
)
from .profiles import ApparatusProfile
from .quantum import (
    FiniteSystem,
    ImpulsiveCoupling,
    TransitionSpec,
    WindowCoupling,
    amplitude_distribution,
    evolve_lambda,
    transition_amplitude,
    virtual_path_amplitudes,
    weak_value,
)
from .readout import (
    FinalStateAverage,
    ReadoutResult,
    SharpnessReport,
    asymptotic_moments,
    average_over_final_states,
    read_meter,
    time_integral_moments,
    zero_variance_detector,
)
from .scattering import (
    DeltaBarrier,
    LarmorReadout,
    RadialSquare,
    RectangularBarrier,
    SpinClock,
    WavepacketDelay,
    delay_amplitude,
    larmor_clock,
    phase_time,
    transmission,
    traversal_amplitude,
    traversal_weak_value,
    wavepacket_delay,
)

__version__ = "0.1.0"
