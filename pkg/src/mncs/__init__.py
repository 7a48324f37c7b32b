"""Pseudo-spectral simulation and attractor diagnostics for negatively
coupled reaction-diffusion systems on no-flux square domains."""

__version__ = "0.1.0"

from .config import ConfigError, RunConfig, load_config, parse_config, serialize_config
from .diagnostics import (
    DecayFitError,
    DiagnosticsRecord,
    DimensionBoundInputs,
    HopfShiftReport,
    LyapunovSpectrum,
    TraceProbeResult,
    dimension_bound,
    fit_decay_rate,
    hopf_shift_check,
    kaplan_yorke,
    lp_ladder,
    make_record,
    spatial_variance,
    trace_probe,
)
from .etd import (
    EtdTables,
    IntegratorDivergenceError,
    SimState,
    SplitSpec,
    etd_step,
    phi1,
    phi2,
    precompute_tables,
    run_simulation,
)
from .io import (
    SnapshotError,
    compare_csv,
    compare_snapshots,
    export_pgm,
    load_snapshot,
    read_series_csv,
    save_snapshot,
    write_series_csv,
)
from .kinetics import (
    CouplingMatrix,
    CubicKinetics,
    CubicParams,
    DissipativityParams,
    DissipativityReport,
    FhnKinetics,
    FhnParams,
    check_dissipativity,
    coupling_gamma,
    estimate_KA,
    fhn_jacobian,
    fhn_reaction,
    opnorm_2x2,
)
from .lyapunov import leading_mode_basis, lyapunov_spectrum
from .rng import init_field, normal_samples, splitmix64
from .runner import (
    ConvergenceReport,
    PairSummary,
    ScenarioPair,
    SweepEntry,
    SweepResult,
    build_scenario_pair,
    convergence_study,
    gamma_sweep,
    run_scenario_pair,
)
from .spectral import (
    GridSpec,
    LaplacianSymbol,
    RealField,
    SpectralField,
    apply_laplacian,
    dct2_forward,
    dct2_inverse,
    laplacian_symbol,
)
