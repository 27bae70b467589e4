"""Time stepping and conserved/monitored functionals of the Whitham-Boussinesq system.

With ``T`` the real operator of symbol ``-i tanh k`` the system is

    eta_t = -v_x + T(eta v)
    v_t   = T(eta) + T(v^2) / 2

(``T = -i tanh D``), so the linear part oscillates with ``omega^2 = k tanh k``.

Quadratic products are 2/3-dealiased before ``T`` is applied.
"""

from __future__ import annotations

import csv
import math
from dataclasses import astuple, dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import BlowUpError, FieldError, StabilityError
from .spectral import Grid, apply_multiplier, symbol_absk, symbol_Kinv

ENERGY_LIMIT = 1e6
TRACE_HEADER = (
    "time",
    "hamiltonian",
    "energy_E",
    "functional_B",
    "mean_eta",
    "mean_vel",
    "l2_eta",
    "l2_vel",
)


@dataclass(frozen=True, eq=False)
class WaveState:
    grid: Grid
    eta: np.ndarray
    vel: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        eta = np.array(self.eta, dtype=float)
        vel = np.array(self.vel, dtype=float)
        for name, f in (("eta", eta), ("vel", vel)):
            if f.shape != (self.grid.n,):
                raise FieldError(f"{name} has shape {f.shape}, grid expects ({self.grid.n},)")
            f.flags.writeable = False
        if not math.isfinite(self.time) or self.time < 0:
            raise FieldError(f"time must be finite and non-negative, got {self.time}")
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "vel", vel)
        object.__setattr__(self, "time", float(self.time))

    @property
    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.eta)) and np.all(np.isfinite(self.vel)))

    def replace(self, eta=None, vel=None, time=None) -> "WaveState":
        return WaveState(
            self.grid,
            self.eta if eta is None else eta,
            self.vel if vel is None else vel,
            self.time if time is None else time,
        )


@dataclass(frozen=True)
class DiagnosticsRecord:
    time: float
    hamiltonian: float
    energy_E: float
    functional_B: float
    mean_eta: float
    mean_vel: float
    l2_eta: float
    l2_vel: float


class _RhsOperators:
    """Half-spectrum multipliers for one grid (rfft layout)."""

    def __init__(self, grid: Grid):
        m = np.arange(grid.n // 2 + 1)
        k = 2.0 * np.pi * m / grid.length
        t = -1j * np.tanh(k)
        d = 1j * k
        # odd symbols lose the Nyquist coefficient
        t[-1] = 0.0
        d[-1] = 0.0
        mask = 3 * m <= grid.n
        self.n = grid.n
        self.deriv = d
        self.tanh_op = t
        self.tanh_dealiased = t * mask


_OPERATORS: dict[Grid, _RhsOperators] = {}


def _operators(grid: Grid) -> _RhsOperators:
    ops = _OPERATORS.get(grid)
    if ops is None:
        ops = _OPERATORS.setdefault(grid, _RhsOperators(grid))
    return ops


def _check_state(s: WaveState):
    if not s.is_finite:
        raise BlowUpError("state contains non-finite samples", time=s.time)


def _rhs_arrays(grid: Grid, eta: np.ndarray, vel: np.ndarray):
    ops = _operators(grid)
    n = ops.n
    eta_h = np.fft.rfft(eta)
    vel_h = np.fft.rfft(vel)
    flux_h = np.fft.rfft(eta * vel)
    sq_h = np.fft.rfft(vel * vel)
    deta = np.fft.irfft(-ops.deriv * vel_h + ops.tanh_dealiased * flux_h, n=n)
    dvel = np.fft.irfft(ops.tanh_op * eta_h + 0.5 * ops.tanh_dealiased * sq_h, n=n)
    return deta, dvel


def rhs(s: WaveState) -> tuple[np.ndarray, np.ndarray]:
    """Time derivatives ``(eta_t, v_t)`` at state ``s``."""
    _check_state(s)
    return _rhs_arrays(s.grid, s.eta, s.vel)


def dt_max(grid: Grid, cfl: float = 1.0) -> float:
    """Largest admissible RK4 step, ``cfl / sqrt(k_max)``."""
    return cfl / math.sqrt(grid.k_max)


def _rk4(grid, eta, vel, dt):
    k1e, k1v = _rhs_arrays(grid, eta, vel)
    k2e, k2v = _rhs_arrays(grid, eta + 0.5 * dt * k1e, vel + 0.5 * dt * k1v)
    k3e, k3v = _rhs_arrays(grid, eta + 0.5 * dt * k2e, vel + 0.5 * dt * k2v)
    k4e, k4v = _rhs_arrays(grid, eta + dt * k3e, vel + dt * k3v)
    eta = eta + dt / 6.0 * (k1e + 2.0 * k2e + 2.0 * k3e + k4e)
    vel = vel + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return eta, vel


def step_rk4(s: WaveState, dt: float, cfl: float = 1.0) -> WaveState:
    """One classical fourth-order Runge-Kutta step."""
    if not dt > 0:
        raise StabilityError(f"time step must be positive, got {dt}")
    limit = dt_max(s.grid, cfl)
    if dt > limit * (1 + 1e-12):
        raise StabilityError(f"dt={dt:.6g} exceeds the stability bound {limit:.6g} (cfl={cfl:g})")
    _check_state(s)
    eta, vel = _rk4(s.grid, s.eta, s.vel, dt)
    if not (np.all(np.isfinite(eta)) and np.all(np.isfinite(vel))):
        raise BlowUpError(
            f"non-finite samples after step to t={s.time + dt:.6g}", time=s.time + dt, last_state=s
        )
    return WaveState(s.grid, eta, vel, s.time + dt)


# -- functionals --------------------------------------------------------------


def _quadratic_form(symbol, f, grid: Grid) -> float:
    return grid.inner(f, apply_multiplier(symbol, f, grid))


def hamiltonian(s: WaveState) -> float:
    """``1/2 int (eta^2 + v (D/tanh D) v + eta v^2) dx``."""
    _check_state(s)
    g = s.grid
    return 0.5 * (
        g.inner(s.eta, s.eta) + _quadratic_form(symbol_Kinv(), s.vel, g) + g.inner(s.eta, s.vel**2)
    )


def functional_B_fields(eta, vel, grid: Grid) -> float:
    absk = symbol_absk()
    return 0.5 * (_quadratic_form(absk, eta, grid) + _quadratic_form(absk * absk, vel, grid))


def energy_E_fields(eta, vel, grid: Grid) -> float:
    """Energy norm ``E`` of an arbitrary pair of fields (e.g. a difference of states)."""
    sq = 0.5 * grid.inner(eta, eta) + 0.5 * grid.inner(vel, vel) + functional_B_fields(eta, vel, grid)
    return math.sqrt(max(sq, 0.0))


def functional_B(s: WaveState) -> float:
    """``1/2 int (eta |D| eta + v |D|^2 v) dx``."""
    _check_state(s)
    return functional_B_fields(s.eta, s.vel, s.grid)


def energy_E(s: WaveState) -> float:
    _check_state(s)
    return energy_E_fields(s.eta, s.vel, s.grid)


def means(s: WaveState) -> tuple[float, float]:
    _check_state(s)
    return float(np.mean(s.eta)), float(np.mean(s.vel))


def diagnostics(s: WaveState) -> DiagnosticsRecord:
    g = s.grid
    b = functional_B(s)
    l2_eta = g.l2_norm(s.eta)
    l2_vel = g.l2_norm(s.vel)
    e = math.sqrt(max(0.5 * l2_eta**2 + 0.5 * l2_vel**2 + b, 0.0))
    mean_eta, mean_vel = means(s)
    return DiagnosticsRecord(s.time, hamiltonian(s), e, b, mean_eta, mean_vel, l2_eta, l2_vel)


# -- driver -------------------------------------------------------------------


def evolve(
    s0: WaveState,
    t_end: float,
    dt: float,
    sample_every: int = 1,
    cfl: float = 1.0,
    observer: Callable[[WaveState], None] | None = None,
    energy_limit: float = ENERGY_LIMIT,
) -> tuple[WaveState, list[DiagnosticsRecord]]:
    """Integrate from ``s0.time`` to exactly ``t_end``.

    Diagnostics (and ``observer``, if given) are taken at the start, after
    every ``sample_every`` full steps and at the final time. A final partial
    step lands exactly on ``t_end``.

    Raises BlowUpError carrying the last good state when a sample turns
    non-finite or the energy norm exceeds ``energy_limit``.
    """
    if t_end < s0.time:
        raise ValueError(f"t_end={t_end} precedes the initial time {s0.time}")
    if sample_every < 1:
        raise ValueError("sample_every must be a positive integer")
    if not dt > 0 or dt > dt_max(s0.grid, cfl) * (1 + 1e-12):
        raise StabilityError(
            f"dt={dt:.6g} outside (0, {dt_max(s0.grid, cfl):.6g}] for cfl={cfl:g}"
        )
    _check_state(s0)

    trace = []

    def sample(s):
        rec = diagnostics(s)
        if not math.isfinite(rec.energy_E) or rec.energy_E > energy_limit:
            raise BlowUpError(
                f"energy norm {rec.energy_E:.3e} exceeds {energy_limit:.1e} at t={s.time:.6g}",
                time=s.time,
                last_state=s,
            )
        trace.append(rec)
        if observer is not None:
            observer(s)

    sample(s0)
    span = t_end - s0.time
    n_full = int(math.floor(span / dt * (1 + 1e-14)))
    remainder = span - n_full * dt
    if remainder <= 1e-12 * max(dt, 1.0):
        remainder = 0.0

    s = s0
    for i in range(1, n_full + 1):
        s = step_rk4(s, dt, cfl)
        if i == n_full and remainder == 0.0:
            s = s.replace(time=t_end)
        if i % sample_every == 0 or (i == n_full and remainder == 0.0):
            sample(s)
    if remainder > 0.0:
        s = step_rk4(s, remainder, cfl).replace(time=t_end)
        sample(s)
    return s, trace


# -- serialisation ------------------------------------------------------------


def format_float(x: float) -> str:
    return f"{x:.17g}"


def write_trace_csv(trace: Iterable[DiagnosticsRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for rec in trace:
            w.writerow([format_float(v) for v in astuple(rec)])


def read_trace_csv(path) -> list[DiagnosticsRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != TRACE_HEADER:
            raise ValueError(f"unexpected trace header {header}")
        return [DiagnosticsRecord(*map(float, row)) for row in reader if row]

