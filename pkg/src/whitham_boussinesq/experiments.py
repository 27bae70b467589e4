"""Reproduction harnesses built on the evolution and solitary-wave modules.

* relative L2 difference between wave profiles,
* ingestion of externally computed (Euler) solitary waves and their
  evolution under the Whitham-Boussinesq system,
* the a priori energy bound and a fitted growth constant,
* a numerical continuous-dependence (perturbation growth) test.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConvergenceError, PeakTrackingError, ReferenceDataError, WhithamError
from .evolution import (
    DiagnosticsRecord,
    WaveState,
    diagnostics,
    dt_max,
    energy_E_fields,
    evolve,
)
from .solitary import petviashvili_solve
from .spectral import (
    Grid,
    apply_multiplier,
    dealias,
    fourier_resample,
    locate_peak,
    spectral_shift,
    symbol_deriv,
    symbol_K,
    symbol_Kinv,
)

TAIL_THRESHOLD = 1e-4
REFERENCE_HEADER = ("x", "eta0", "u1", "u2")


def relative_difference(eta1, eta2, grid: Grid) -> float:
    """``|eta1 - eta2| / |eta1|`` in the discrete L2 norm."""
    eta1 = grid.check_field(eta1, "eta1")
    eta2 = grid.check_field(eta2, "eta2")
    norm = grid.l2_norm(eta1)
    if norm == 0:
        raise ValueError("relative difference is undefined for a zero reference wave")
    return grid.l2_norm(eta1 - eta2) / norm


# -- reference waves ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ReferenceWave:
    x: np.ndarray
    eta0: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    c: float

    def __post_init__(self):
        arrays = {}
        for name in REFERENCE_HEADER:
            a = np.array(getattr(self, name), dtype=float)
            if a.ndim != 1:
                raise ReferenceDataError(f"{name} must be one-dimensional", kind="schema")
            arrays[name] = a
        lengths = {len(a) for a in arrays.values()}
        if len(lengths) != 1:
            raise ReferenceDataError(f"columns have unequal lengths {sorted(lengths)}", kind="schema")
        if lengths.pop() < 16:
            raise ReferenceDataError("a reference wave needs at least 16 samples", kind="schema")
        for name, a in arrays.items():
            if not np.all(np.isfinite(a)):
                raise ReferenceDataError(f"column {name} has non-finite values", kind="schema")
        if not (math.isfinite(self.c) and self.c > 0):
            raise ReferenceDataError(f"speed c must be positive, got {self.c}", kind="schema")
        if np.any(np.diff(arrays["x"]) <= 0):
            raise ReferenceDataError("abscissae x are not strictly increasing", kind="monotone")
        eta = arrays["eta0"]
        peak = np.max(np.abs(eta))
        if max(abs(eta[0]), abs(eta[-1])) >= 1e-6 * peak:
            raise ReferenceDataError(
                f"eta0 does not decay at the ends: endpoint values {eta[0]:.3e}, {eta[-1]:.3e} "
                f"exceed 1e-6 of max |eta0| = {peak:.3e}",
                kind="decay",
            )
        for name, a in arrays.items():
            a.flags.writeable = False
            object.__setattr__(self, name, a)
        object.__setattr__(self, "c", float(self.c))


def _read_speed_comment(path: Path):
    c = None
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line.startswith("#"):
                continue
            body = line.lstrip("#").strip().replace(" ", "")
            if body.startswith("c="):
                try:
                    c = float(body[2:])
                except ValueError:
                    raise ReferenceDataError(f"malformed speed comment {line!r}", kind="schema") from None
    return c


def load_reference(path) -> ReferenceWave:
    """Read a reference wave from ``x,eta0,u1,u2`` CSV.

    The speed comes from a ``<stem>.json`` sidecar ``{"c": ...}`` or a
    ``# c=<value>`` comment line; the sidecar wins when both are present.
    """
    path = Path(path)
    lines = path.read_text().splitlines()
    rows = [line for line in lines if line.strip() and not line.lstrip().startswith("#")]
    if not rows:
        raise ReferenceDataError(f"{path}: no data", kind="schema")
    header = tuple(h.strip() for h in next(csv.reader([rows[0]])))
    if header != REFERENCE_HEADER:
        raise ReferenceDataError(
            f"{path}: header {','.join(header)!r} != {','.join(REFERENCE_HEADER)!r}", kind="schema"
        )
    try:
        data = np.array([[float(v) for v in r] for r in csv.reader(rows[1:])], dtype=float)
    except ValueError as err:
        raise ReferenceDataError(f"{path}: {err}", kind="schema") from None
    if data.ndim != 2 or data.shape[1] != 4:
        raise ReferenceDataError(f"{path}: expected 4 columns per row", kind="schema")

    c = _read_speed_comment(path)
    sidecar = path.with_suffix(".json")
    if sidecar.exists():
        meta = json.loads(sidecar.read_text())
        if "c" in meta:
            c = float(meta["c"])
    if c is None:
        raise ReferenceDataError(f"{path}: speed c missing (no sidecar and no '# c=' line)", kind="schema")
    return ReferenceWave(data[:, 0], data[:, 1], data[:, 2], data[:, 3], c)


def write_reference(ref: ReferenceWave, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# c={ref.c:.17g}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REFERENCE_HEADER)
        for row in zip(ref.x, ref.eta0, ref.u1, ref.u2):
            w.writerow([f"{v:.17g}" for v in row])


def reference_from_soliton(result) -> ReferenceWave:
    """Reference data whose built initial state is exactly the given soliton."""
    g = result.grid
    return ReferenceWave(
        x=g.nodes.copy(),
        eta0=result.eta,
        u1=apply_multiplier(symbol_Kinv(), result.vel, g),
        u2=np.zeros(g.n),
        c=result.c,
    )


def resample_to_grid(x, values, grid: Grid) -> np.ndarray:
    """Cubic interpolation onto a uniform auxiliary grid, then Fourier resampling."""
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(x) == grid.n and np.allclose(x, grid.nodes, rtol=0, atol=1e-12 * grid.length):
        return values.copy()
    h = float(np.median(np.diff(x)))
    n_aux = max(8, 2 * int(round(0.5 * grid.length / h)))
    aux = Grid(n_aux, grid.length)
    inside = (aux.nodes >= x[0]) & (aux.nodes <= x[-1])
    f = np.zeros(aux.n)
    f[inside] = CubicSpline(x, values)(aux.nodes[inside])
    return fourier_resample(f, aux, grid)


def build_initial(ref: ReferenceWave, grid: Grid) -> WaveState:
    """Initial state ``eta = eta0``, ``v = K(u1 + u2 d/dx eta0)``."""
    half = 0.5 * grid.length
    slack = 1e-9 * grid.length
    if ref.x[0] < -half - slack or ref.x[-1] > half + slack:
        raise ReferenceDataError(
            f"reference support [{ref.x[0]:.6g}, {ref.x[-1]:.6g}] exceeds the grid [-{half:g}, {half:g})",
            kind="support",
        )
    eta0 = resample_to_grid(ref.x, ref.eta0, grid)
    u1 = resample_to_grid(ref.x, ref.u1, grid)
    u2 = resample_to_grid(ref.x, ref.u2, grid)
    slope = apply_multiplier(symbol_deriv(), eta0, grid)
    vel = apply_multiplier(symbol_K(), u1 + dealias(u2 * slope, grid), grid)
    return WaveState(grid, eta0, vel, 0.0)


# -- soliton evolution comparison ---------------------------------------------


@dataclass(frozen=True)
class ComparisonReport:
    d: float
    c_fitted: float
    tail_mass: float
    t: float
    n: int
    length: float
    dt: float
    amplitude: float = math.nan
    peak_position: float = math.nan

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "c_fitted": self.c_fitted,
            "tail_mass": self.tail_mass,
            "t": self.t,
            "grid": {"n": self.n, "L": self.length},
            "dt": self.dt,
        }


def tail_window(eta, grid: Grid, peak_x: float, threshold=TAIL_THRESHOLD) -> np.ndarray:
    """Boolean mask of the symmetric interval around the peak where |eta| > threshold * peak.

    The half-width is the shorter of the two excursions away from the peak,
    so a dispersive tail trailing on one side is cut at the extent of the
    clean front.
    """
    j = int(round((peak_x - grid.nodes[0]) / grid.dx)) % grid.n
    level = threshold * abs(eta[j])
    reach = []
    for direction in (1, -1):
        steps = 0
        while steps < grid.n // 2 and abs(eta[(j + direction * (steps + 1)) % grid.n]) > level:
            steps += 1
        reach.append(steps)
    half = min(reach)
    mask = np.zeros(grid.n, dtype=bool)
    mask[(j + np.arange(-half, half + 1)) % grid.n] = True
    return mask


def _fit_speed(times, positions) -> float:
    times = np.asarray(times)
    positions = np.asarray(positions)
    start = times[0] + 0.75 * (times[-1] - times[0])
    sel = times >= start - 1e-12
    if sel.sum() < 2:
        sel = np.ones_like(times, dtype=bool)
    if sel.sum() < 2:
        raise PeakTrackingError("need at least two peak samples to fit a speed")
    slope, _ = np.polyfit(times[sel], positions[sel], 1)
    return float(slope)


def soliton_evolution_experiment(
    ref: ReferenceWave,
    grid: Grid,
    t_end: float,
    dt: float | None = None,
    sample_every: int | None = None,
    tol: float = 1e-10,
    max_iter: int = 500,
    cfl: float = 1.0,
) -> tuple[ComparisonReport, list[DiagnosticsRecord]]:
    """Evolve reference data and compare the leading wave with a Whitham soliton.

    The leading wave is tracked through the peak of ``eta``; its speed is
    fitted over the last quarter of the run. The dispersive tail is excised
    with :func:`tail_window` and the soliton at the fitted speed, shifted to
    the measured peak, is compared on the same window.
    """
    if t_end < 0:
        raise ValueError(f"t_end must be non-negative, got {t_end}")
    if dt is None:
        dt = dt_max(grid, cfl) / 4
    s0 = build_initial(ref, grid)

    if t_end == 0:
        x_peak, amp = locate_peak(s0.eta, grid)
        soliton = _embedded_solve(ref.c, grid, tol, max_iter)
        eta_s = spectral_shift(soliton.eta, grid, x_peak)
        d = relative_difference(eta_s, s0.eta, grid)
        trace = [diagnostics(s0)]
        return ComparisonReport(d, ref.c, 0.0, 0.0, grid.n, grid.length, dt, amp, x_peak), trace

    if sample_every is None:
        sample_every = max(1, int(t_end / dt) // 200)
    times, peaks = [], []

    def track(state):
        x_peak, _ = locate_peak(state.eta, grid)
        times.append(state.time)
        peaks.append(x_peak)

    final, trace = evolve(s0, t_end, dt, sample_every=sample_every, cfl=cfl, observer=track)
    positions = np.unwrap(np.asarray(peaks), period=grid.length)
    c_fitted = _fit_speed(times, positions)

    x_peak, amp = locate_peak(final.eta, grid)
    window = tail_window(final.eta, grid, x_peak)
    soliton = _embedded_solve(c_fitted, grid, tol, max_iter)
    eta_s = spectral_shift(soliton.eta, grid, x_peak)
    d = relative_difference(eta_s * window, final.eta * window, grid)
    tail_mass = grid.l2_norm((final.eta - eta_s) * ~window)
    report = ComparisonReport(d, c_fitted, tail_mass, final.time, grid.n, grid.length, dt, amp, x_peak)
    return report, trace


def _embedded_solve(c, grid, tol, max_iter):
    if not c > 1:
        raise WhithamError(f"fitted speed {c:.6g} is not supercritical; no solitary wave to compare")
    result = petviashvili_solve(c, grid, tol=tol, max_iter=max_iter)
    if not result.converged:
        raise ConvergenceError(f"embedded solitary solve at c={c:.8g} did not converge: {result.message}")
    return result


# -- a priori bound -----------------------------------------------------------


def blowup_time(E0: float, C: float) -> float:
    return math.log1p(1.0 / E0) / C


def apriori_bound(E0: float, C: float, t):
    """``E0 e^{Ct} / (1 - E0 (e^{Ct} - 1))``, the solution of ``E' = C(E + E^2)``."""
    if not (E0 > 0 and C > 0):
        raise ValueError("E0 and C must be positive")
    t = np.asarray(t, dtype=float)
    if np.any(t >= blowup_time(E0, C)):
        raise ValueError(f"t must stay below the blow-up time {blowup_time(E0, C):.6g}")
    g = np.expm1(C * t)
    out = E0 * (1.0 + g) / (1.0 - E0 * g)
    return float(out) if out.ndim == 0 else out


def fit_apriori_constant(trace) -> float:
    """Smallest ``C`` for which the bound curve dominates every sampled ``E(t)``.

    Inverting the bound for each sample gives ``e^{Ct} = E(1 + E0) / (E0 (1 + E))``.
    """
    t0 = trace[0].time
    E0 = trace[0].energy_E
    if E0 <= 0:
        raise ValueError("E(0) must be positive")
    best = 0.0
    for rec in trace[1:]:
        tau = rec.time - t0
        if tau <= 0:
            continue
        ratio = rec.energy_E * (1.0 + E0) / (E0 * (1.0 + rec.energy_E))
        best = max(best, math.log(ratio) / tau)
    return best


# -- continuous dependence ----------------------------------------------------


@dataclass(frozen=True, eq=False)
class GrowthCurve:
    times: np.ndarray
    ratio: np.ndarray
    rate: float
    slack: float
    bounded: bool
    eps: float


def smooth_perturbation(grid: Grid, eps: float, seed: int, k_cut: float = 2.0):
    """Random smooth pair ``(theta, w)`` with energy norm ``eps``."""
    if not eps > 0:
        raise ValueError(f"perturbation size must be positive, got {eps}")
    rng = np.random.default_rng(seed)
    m = np.arange(grid.n // 2 + 1)
    k = 2.0 * np.pi * m / grid.length
    envelope = np.exp(-0.5 * (k / k_cut) ** 2)
    envelope[-1] = 0.0
    pair = []
    for _ in range(2):
        coeffs = (rng.standard_normal(len(m)) + 1j * rng.standard_normal(len(m))) * envelope
        pair.append(np.fft.irfft(coeffs, n=grid.n))
    scale = eps / energy_E_fields(pair[0], pair[1], grid)
    return pair[0] * scale, pair[1] * scale


def continuous_dependence_test(
    s0: WaveState,
    eps: float,
    t_end: float,
    dt: float,
    seed: int = 0,
    sample_every: int = 1,
    cfl: float = 1.0,
    slack: float = 0.1,
) -> GrowthCurve:
    """Growth ``R(t) = E(theta(t), w(t)) / E(theta(0), w(0))`` of a perturbation.

    ``theta``, ``w`` are the differences between the trajectories from ``s0``
    and from ``s0`` plus a seeded smooth perturbation of energy norm ``eps``.
    The rate is the least-squares slope of ``log R`` through the origin and
    ``bounded`` records whether ``R <= (1 + slack) exp(rate t)`` throughout.
    """
    theta0, w0 = smooth_perturbation(s0.grid, eps, seed)
    s1 = s0.replace(eta=s0.eta + theta0, vel=s0.vel + w0)
    base, pert = [], []
    evolve(s0, t_end, dt, sample_every, cfl, observer=base.append)
    evolve(s1, t_end, dt, sample_every, cfl, observer=pert.append)
    g = s0.grid
    e0 = energy_E_fields(theta0, w0, g)
    times = np.array([a.time - s0.time for a in base])
    ratio = np.array(
        [energy_E_fields(b.eta - a.eta, b.vel - a.vel, g) / e0 for a, b in zip(base, pert)]
    )
    logr = np.log(ratio)
    rate = float(np.dot(times, logr) / np.dot(times, times)) if np.any(times > 0) else 0.0
    bounded = bool(np.all(ratio <= (1.0 + slack) * np.exp(rate * times)))
    return GrowthCurve(times, ratio, rate, slack, bounded, eps)
