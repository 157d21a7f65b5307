"""Steady states, optical bistability and excitation spectra of a
Bose-Einstein condensate dispersively coupled to a driven lossy cavity.

Two solver tracks share one validated parameter record:

* a homogeneous three-band model (mean-field branches, band structure,
  cavity-coupled zero-quasimomentum modes, collision-renormalized
  two-mode model with its cubic photon-number equation);
* a harmonically trapped real-space model (cavity-coupled ground state,
  hysteresis sweeps, trapped Bogoliubov spectra with parity labels and
  mode tracking).

All frequencies are in recoil units and lengths in optical wavelengths.
"""

__version__ = "0.1.0"

from .params import (
    OMEGA_M,
    OMEGA_R,
    DerivedParams,
    ParameterError,
    SystemParams,
    derive,
    load_config,
    parse_config,
    validate_params,
)
from .errors import SolverError
from .numerics import (
    EigenDecomposition,
    NumericsError,
    RootSet,
    eig_dense,
    find_roots_scan,
    laplacian_1d,
    refine_smallest_eigenpair,
    solve_cubic_real,
)
from .band_meanfield import (
    BandMeanField,
    bistable_window_band,
    consistency_residual,
    solve_branches,
    sweep_branches,
)
from .band_fluctuations import (
    SpectrumPoint,
    band_structure,
    build_Lq,
    build_M,
    goldstone_vector,
    optomech_mode,
    track_modes,
)
from .effective import (
    EffectiveModel,
    bistability_threshold,
    bistable_window,
    cubic_photon_number,
    model_from_params,
    renormalize,
)
from .trapped_meanfield import (
    CondensateProfile,
    Grid1D,
    decompose_envelope,
    default_grid,
    ground_state,
    make_grid,
    measure_tf_radius,
    sweep_trapped,
    tf_radius_estimate,
)
from .trapped_bdg import (
    TrappedSpectrum,
    build_trapped_matrix,
    identify_optomech_track,
    spectrum,
    spectrum_sweep_table,
)
from .sweep_table import SweepTable, write_table
