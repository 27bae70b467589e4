"""Built-in invariant checks run by ``whitham-bsq validate``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .evolution import WaveState, dt_max, evolve
from .solitary import apply_L, apply_L_inverse, petviashvili_map, petviashvili_solve
from .spectral import Grid


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value < self.threshold)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: {self.value:.3e} (< {self.threshold:.0e})"


def gaussian_pulse(grid: Grid, amplitude=0.3, width=4.0) -> WaveState:
    x = grid.nodes
    return WaveState(grid, amplitude * np.exp(-((x / width) ** 2)), np.zeros(grid.n))


def linear_phase_speed(k: float, eps: float = 1e-8, n: int = 64) -> float:
    """Measured phase speed of a rightward single mode of wavenumber ``k``.

    The domain holds an integer number of wavelengths; the mode is evolved
    until its phase has turned by one radian and the speed is read from the
    phase of its Fourier coefficient.
    """
    length = 2 * np.pi / k * max(1, int(math.ceil(k / 0.5)))
    grid = Grid(n, length)
    m = int(round(k * length / (2 * np.pi)))
    if 3 * m > n:
        raise ValueError(f"k={k} is not resolved on {n} points")
    speed = math.sqrt(math.tanh(k) / k)
    x = grid.nodes
    s0 = WaveState(grid, eps * np.cos(k * x), eps * speed * np.cos(k * x))
    t_end = 1.0 / (k * speed)
    dt = min(dt_max(grid) / 4, t_end / 64)
    final, _ = evolve(s0, t_end, dt, sample_every=10**9)
    turn = np.angle(np.fft.fft(final.eta)[m] / np.fft.fft(s0.eta)[m])
    return -turn / (k * t_end)


def check_dispersion() -> CheckResult:
    worst = 0.0
    for k in (0.5, 1.0, 2.0, 4.0):
        exact = math.sqrt(math.tanh(k) / k)
        worst = max(worst, abs(linear_phase_speed(k) / exact - 1))
    return CheckResult("linear dispersion, max relative phase-speed error", worst, 1e-6)


def check_conservation() -> CheckResult:
    grid = Grid(1024, 128.0)
    _, trace = evolve(gaussian_pulse(grid), 50.0, dt_max(grid) / 4, sample_every=50)
    h = np.array([r.hamiltonian for r in trace])
    return CheckResult("Hamiltonian relative drift, T=50", float(np.max(np.abs(h - h[0])) / abs(h[0])), 1e-8)


def check_L_inverse() -> CheckResult:
    grid = Grid(256, 64.0)
    rng = np.random.default_rng(7)
    worst = 0.0
    for c in (1.1, 1.25, 2.0):
        f, g = rng.standard_normal(grid.n), rng.standard_normal(grid.n)
        eta, vel = apply_L_inverse(c, *apply_L(c, f, g, grid), grid)
        err = math.hypot(grid.l2_norm(eta - f), grid.l2_norm(vel - g)) / math.hypot(
            grid.l2_norm(f), grid.l2_norm(g)
        )
        worst = max(worst, err)
    return CheckResult("L^-1 L identity, relative error", worst, 1e-12)


def check_fixed_point(tol=1e-10) -> CheckResult:
    grid = Grid(1024, 128.0)
    res = petviashvili_solve(1.25, grid, tol=tol)
    if not res.converged:
        return CheckResult("fixed-point re-apply (solver did not converge)", math.inf, 10 * tol)
    eta, vel = petviashvili_map(res)
    move = math.hypot(grid.l2_norm(eta - res.eta), grid.l2_norm(vel - res.vel)) / math.hypot(
        grid.l2_norm(res.eta), grid.l2_norm(res.vel)
    )
    return CheckResult("fixed-point re-apply, relative move", move, 10 * tol)


CHECKS = (check_dispersion, check_conservation, check_L_inverse, check_fixed_point)


def run_checks() -> list[CheckResult]:
    return [check() for check in CHECKS]
