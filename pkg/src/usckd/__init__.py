"""Simulator for classical key distribution over coupled Mach-Zehnder interferometers."""

from .field import (
    IDENTITY,
    INPUT,
    TwoModeField,
    TwoPortOperator,
    apply,
    compose,
    intensities,
    make_bs,
    make_phase,
    total_intensity,
)
from .interferometer import (
    PhaseBasis,
    PhasePair,
    Port,
    PortOutcome,
    basis_outcome,
    chain_transfer,
    coupled_intensities,
    coupled_transfer,
    measure_extrema_spacing,
    mzi_intensities,
    mzi_transfer,
)
from .drive import (
    ArmDrive,
    DriveSchedule,
    GlassRamp,
    NoiseModel,
    Segment,
    Side,
    TimeTrace,
    calibrate_noise,
    dominant_frequency,
    phase_at,
    simulate_trace,
    toggle_level,
)
from .protocol import DetectorConfig, ERASURE, RoundRecord, SessionResult, key_bit, run_session
from .adversary import (
    EveStrategy,
    MonteCarlo,
    Placement,
    StrategyKind,
    TapConfig,
    eve_accuracy,
    mutual_information,
    run_attacked_session,
)

__version__ = "0.1.0"
