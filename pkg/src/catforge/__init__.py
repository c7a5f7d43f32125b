"""Heralded optical cat-state generation through double cross-phase modulation.

The package has three numerical layers that must agree with each other:

* ``closedform``: scalar formulas for the branch coherence, cat size, and
  decoherence exponent of the lossy Kerr channel.
* ``engine``: a sliced coherent-dyad evolution of the full dual-rail scheme,
  exact for this Hamiltonian up to time discretization.
* ``fock``: a dense number-basis Lindblad integrator used as an
  approximation-free oracle at small amplitude.

``design`` inverts the closed forms into experiment settings, and ``cli``
exposes everything as the ``catforge`` command.
"""

from ._backend import BACKEND_NAME, USING_NUMBA
from .closedform import (
    ClosedFormPoint,
    big_g,
    cat_size,
    coherence_c,
    discrimination_efficiency,
    evaluate_point,
    log_coherence_c,
    pure_port,
)
from .coherent import (
    CatTarget,
    DyadState,
    DyadTerm,
    beamsplitter_5050,
    cat_norm,
    combine_cgs,
    displace,
    fidelity_to_cat,
    overlap,
)
from .design import (
    CURVE_DEFAULTS,
    DEFAULT_TABLE_GAMMAS,
    UNIT_MODES,
    DesignResult,
    DesignSpec,
    design,
    design_table,
    input_intensity,
    solve_tau,
    sweep_curves,
)
from .engine import (
    CgParams,
    Channel,
    ChannelConfig,
    SchemeOutput,
    XpmParams,
    apply_qubit_phase,
    evolve_sliced,
    herald_qubit,
    qubit_coherence,
    run_asymmetric,
    run_double_xpm,
    run_single_xpm,
    slice_kerr,
    slice_loss,
    trace_out_mode,
    xpm_input_state,
)
from .errors import (
    CatforgeError,
    CutoffError,
    DegenerateCatError,
    EngineError,
    NoSolutionError,
    PoleError,
)
from .fock import (
    FockDensity,
    coherent_vector,
    dyad_to_fock,
    extract_coherence,
    integrate,
    product_density,
    trace_distance,
    xpm_input_density,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME",
    "USING_NUMBA",
    "CURVE_DEFAULTS",
    "DEFAULT_TABLE_GAMMAS",
    "UNIT_MODES",
    "CatTarget",
    "CatforgeError",
    "CgParams",
    "Channel",
    "ChannelConfig",
    "ClosedFormPoint",
    "CutoffError",
    "DegenerateCatError",
    "DesignResult",
    "DesignSpec",
    "DyadState",
    "DyadTerm",
    "EngineError",
    "FockDensity",
    "NoSolutionError",
    "PoleError",
    "SchemeOutput",
    "XpmParams",
    "apply_qubit_phase",
    "beamsplitter_5050",
    "big_g",
    "cat_norm",
    "cat_size",
    "coherence_c",
    "coherent_vector",
    "combine_cgs",
    "design",
    "design_table",
    "discrimination_efficiency",
    "displace",
    "dyad_to_fock",
    "evaluate_point",
    "evolve_sliced",
    "extract_coherence",
    "fidelity_to_cat",
    "herald_qubit",
    "input_intensity",
    "integrate",
    "log_coherence_c",
    "overlap",
    "product_density",
    "pure_port",
    "qubit_coherence",
    "run_asymmetric",
    "run_double_xpm",
    "run_single_xpm",
    "slice_kerr",
    "slice_loss",
    "solve_tau",
    "sweep_curves",
    "trace_distance",
    "trace_out_mode",
    "xpm_input_density",
    "xpm_input_state",
]
