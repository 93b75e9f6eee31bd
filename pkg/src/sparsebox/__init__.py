"""sparsebox: periodic-box flow solver with level-set sparseness diagnostics.

A small numpy/scipy library for studying spatial intermittency of spectral
velocity fields: pseudo-spectral integration of the incompressible momentum
equation, super-level-set sparseness at scale (directional and volumetric),
harmonic-measure tuning constants and Monte Carlo oracles, chain-of-derivatives
order diagnostics, and a pipeline that turns runs into reproducible CSV/SVG
experiment records.
"""

from .grid import (
    DEFAULT_K_MAX,
    DerivativeOrderError,
    FieldError,
    Grid,
    MultiIndex,
    NonFiniteFieldError,
    PeriodicField,
    SpectralFilter,
    curl,
    derivative_sup_norm,
    divergence,
    gn_ratio,
    grid_for,
    lp_norm,
    multi_indices,
    spectral_derivative,
    spectral_energy,
    sup_norm,
    trilinear_interpolate,
)
from .solver import (
    CFLViolation,
    IntegrationAborted,
    SolverConfig,
    SolverError,
    SolverState,
    Trajectory,
    analyticity_timespan,
    energy_budget,
    init_field,
    nonlinear_tendency,
    run,
    step,
)
from .sparseness import (
    LevelSetMask,
    SparsenessError,
    SparsenessParams,
    SparsenessReport,
    UnresolvableScaleError,
    all_superlevel_masks,
    apriori_scale,
    best_direction,
    chosen_component,
    occupancy_count_field,
    scale_of_sparseness,
    semi_mixed,
    sparse_1d,
    sparse_vol,
    superlevel_mask,
    weak_lp_tail,
    wkp_test_quantity,
    z_alpha_check,
)
from .harmonic import (
    ArcSet,
    ExclusionInputs,
    HarmonicError,
    McEstimate,
    SegmentSet,
    TuningPair,
    default_ell,
    exclusion_lhs,
    extremal_arcs,
    extremal_h,
    extremal_slits,
    majorize,
    mc_harmonic_measure,
    mc_harmonic_measure_slits,
    solve_tuning_pair,
)
from .chains import (
    AlphaFit,
    ChainError,
    ChainState,
    SectionLadder,
    alpha_fit,
    ascending_chain_condition,
    build_section_ladder,
    chain_from_field,
    chain_timespan,
    chain_value,
    classify_order,
    detect_escape_times,
    label_sections,
    scaling_gap_table,
)
from .config import ConfigError, RunConfig, config_hash, parse_config, serialize_config
from .snapshot import (
    SnapshotChecksumError,
    SnapshotError,
    SnapshotMeta,
    SnapshotTruncatedError,
    SnapshotVersionError,
    load_snapshot,
    save_snapshot,
)
from .pipeline import PipelineResult, run_pipeline

__version__ = "0.1.0"
