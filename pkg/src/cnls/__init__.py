"""Numerical laboratory for the weakly coupled focusing NLS system.

Modules: :mod:`~cnls.grid` (periodic spectral grids), :mod:`~cnls.functionals`
(masses, energy, GN quotient, action, virial quantities),
:mod:`~cnls.dynamics` (Strang split-step evolution), :mod:`~cnls.groundstate`
(Nehari gradient flow and radial shooting), :mod:`~cnls.threshold`
(GN constant and critical mass against the coupling), :mod:`~cnls.blowup`
(explicit blow-up family and certificates) and :mod:`~cnls.io` (snapshots,
configs, manifests).
"""
from .grid import BoundaryWarning, ConfigurationError, Grid, make_grid
from .functionals import (
    DiagnosticsRecord,
    FieldPair,
    PhysParams,
    ScalingError,
    ScalingParams,
    action_I,
    coupling_K,
    diagnostics,
    energy,
    gn_quotient_J,
    mass_pair,
    nehari_residual,
    pohozaev_residual,
    scale_pair,
    variance,
    variance_accel,
    variance_rate,
)
from .dynamics import (
    BlowupPolicy,
    CauchyClass,
    StepSchedule,
    Trajectory,
    Verdict,
    adaptive_dt,
    classify_cauchy_data,
    evolve,
    step_strang,
)
from .groundstate import (
    GroundState,
    GroundStateKind,
    MinimizationStalled,
    RadialProfile,
    StartFamily,
    build_test_pair_zhat,
    gn_constant_from_ground_state,
    minimize_action,
    nehari_project,
    shoot_scalar_radial,
    weak_form_certificate,
)
from .threshold import (
    ThresholdReport,
    compute_threshold,
    mass_threshold_from_gn,
    regime_boundary,
    threshold_sweep,
    verify_cci_bounds,
)
from .blowup import BlowupCertificate, explicit_blowup_pair, mass_trap_check, virial_certificate
from .io import read_snapshot, write_snapshot

__version__ = "0.1.0"
