"""Pseudo-spectral tools for the Whitham-Boussinesq water-wave system."""

from .evolution import (
    DiagnosticsRecord,
    WaveState,
    diagnostics,
    dt_max,
    energy_E,
    evolve,
    functional_B,
    hamiltonian,
    means,
    rhs,
    step_rk4,
)
from .experiments import (
    ComparisonReport,
    ReferenceWave,
    apriori_bound,
    build_initial,
    continuous_dependence_test,
    load_reference,
    relative_difference,
    soliton_evolution_experiment,
)
from .solitary import (
    SolitonResult,
    amplitude_speed_sweep,
    apply_L,
    apply_L_inverse,
    apply_N,
    kdv_guess,
    petviashvili_solve,
    stabilization_factor,
)
from .spectral import (
    Grid,
    MultiplierSymbol,
    apply_multiplier,
    backward_transform,
    dealias,
    forward_transform,
    make_grid,
    symbol_absk,
    symbol_deriv,
    symbol_K,
    symbol_Kinv,
    symbol_tanh,
)

__version__ = "0.1.0"
