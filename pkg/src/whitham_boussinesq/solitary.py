"""Solitary waves of the Whitham-Boussinesq system by Petviashvili iteration.

A profile travelling at speed ``c`` solves ``L(eta, v) = N(eta, v)`` with

    L(eta, v) = (c eta - v, -K eta + c v)
    N(eta, v) = (K(eta v), K(v^2) / 2)

where ``K = tanh D / D``. The iteration

    (eta, v) <- S^2 L^{-1} N(eta, v),    S = <u, L u> / <u, N u>

keeps the iterate away from both the trivial solution and blow-up.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateIterateError, WhithamError
from .spectral import Grid, dealias, locate_peak, spectral_shift, symbol_K

DEFAULT_N = 2048
DEFAULT_LENGTH = 256.0


@dataclass(frozen=True, eq=False)
class SolitonResult:
    c: float
    grid: Grid
    eta: np.ndarray
    vel: np.ndarray
    amplitude: float
    residual: float
    iterations: int
    s_history: tuple = field(default=())
    converged: bool = True
    tol: float = 1e-10
    message: str = ""


def _check_speed(c):
    if not (math.isfinite(c) and c > 1):
        raise ValueError(f"solitary waves require c > 1 (L is singular otherwise), got c={c}")


def _K_spectrum(grid: Grid) -> np.ndarray:
    return symbol_K().on_lattice(grid).real


def _K(f, grid):
    return np.fft.ifft(np.fft.fft(f) * _K_spectrum(grid)).real


def apply_L(c, eta, vel, grid: Grid):
    eta = grid.check_field(eta, "eta")
    vel = grid.check_field(vel, "vel")
    return c * eta - vel, -_K(eta, grid) + c * vel


def apply_N(eta, vel, grid: Grid):
    eta = grid.check_field(eta, "eta")
    vel = grid.check_field(vel, "vel")
    return _K(dealias(eta * vel, grid), grid), 0.5 * _K(dealias(vel * vel, grid), grid)


def apply_L_inverse(c, f, g, grid: Grid):
    """Solve ``L(eta, v) = (f, g)`` mode by mode (2x2 system per wavenumber)."""
    _check_speed(c)
    fh = np.fft.fft(grid.check_field(f, "f"))
    gh = np.fft.fft(grid.check_field(g, "g"))
    K = _K_spectrum(grid)
    det = c * c - K
    eta = np.fft.ifft((c * fh + gh) / det).real
    vel = np.fft.ifft((K * fh + c * gh) / det).real
    return eta, vel


def _pair_inner(grid, a, b):
    return grid.inner(a[0], b[0]) + grid.inner(a[1], b[1])


def _pair_norm(grid, a):
    return math.sqrt(max(_pair_inner(grid, a, a), 0.0))


def _stabilization(grid, u, Lu, Nu):
    num = _pair_inner(grid, u, Lu)
    den = _pair_inner(grid, u, Nu)
    if abs(den) <= 1e-14 * _pair_inner(grid, u, u):
        raise DegenerateIterateError(
            f"<u, N(u)> = {den:.3e} is negligible against |u|^2; stabilization factor undefined"
        )
    return num / den


def stabilization_factor(c, eta, vel, grid: Grid) -> float:
    u = (grid.check_field(eta, "eta"), grid.check_field(vel, "vel"))
    return _stabilization(grid, u, apply_L(c, *u, grid), apply_N(*u, grid))


def kdv_guess(c, grid: Grid):
    """Long-wave seed ``a sech^2(sqrt(3a)/2 x)`` with ``a = 2(c - 1)`` and ``v = eta``."""
    _check_speed(c)
    a = 2.0 * (c - 1.0)
    eta = a / np.cosh(0.5 * math.sqrt(3.0 * a) * grid.nodes) ** 2
    return eta, eta.copy()


def center_profile(eta, vel, grid: Grid):
    """Shift both fields so the maximum of ``eta`` sits at ``x = 0``."""
    x_peak, _ = locate_peak(eta, grid)
    return spectral_shift(eta, grid, -x_peak), spectral_shift(vel, grid, -x_peak)


def petviashvili_solve(c, grid: Grid, guess=None, tol=1e-10, max_iter=500) -> SolitonResult:
    """Compute the solitary wave of speed ``c``.

    Converges when ``|L u - N u| / |L u| < tol``. Exhausting ``max_iter``
    does not raise; the result is returned with ``converged=False``.
    """
    _check_speed(c)
    if guess is None:
        guess = kdv_guess(c, grid)
    eta = grid.check_field(guess[0], "guess eta").copy()
    vel = grid.check_field(guess[1], "guess vel").copy()

    history = []
    residual = math.inf
    converged = False
    iterations = 0
    while True:
        u = (eta, vel)
        Lu = apply_L(c, eta, vel, grid)
        Nu = apply_N(eta, vel, grid)
        s = _stabilization(grid, u, Lu, Nu)
        history.append(s)
        residual = _pair_norm(grid, (Lu[0] - Nu[0], Lu[1] - Nu[1])) / _pair_norm(grid, Lu)
        if residual < tol:
            converged = True
            break
        if iterations >= max_iter:
            break
        eta, vel = apply_L_inverse(c, s * s * Nu[0], s * s * Nu[1], grid)
        iterations += 1
        if not (np.all(np.isfinite(eta)) and np.all(np.isfinite(vel))):
            raise DegenerateIterateError(f"iterate became non-finite at iteration {iterations}")
        if grid.l2_norm(eta) < 1e-12:
            raise DegenerateIterateError(f"iterate collapsed to zero at iteration {iterations}")

    eta, vel = center_profile(eta, vel, grid)
    return SolitonResult(
        c=float(c),
        grid=grid,
        eta=eta,
        vel=vel,
        amplitude=float(eta[grid.n // 2]),
        residual=float(residual),
        iterations=iterations,
        s_history=tuple(history),
        converged=converged,
        tol=tol,
        message="" if converged else f"residual {residual:.3e} after {iterations} iterations",
    )


def petviashvili_map(result: SolitonResult):
    """One more application of ``S^2 L^{-1} N`` to a converged profile."""
    g, c = result.grid, result.c
    u = (result.eta, result.vel)
    Lu, Nu = apply_L(c, *u, g), apply_N(*u, g)
    s = _stabilization(g, u, Lu, Nu)
    return apply_L_inverse(c, s * s * Nu[0], s * s * Nu[1], g)


def _failed(c, grid, guess, err) -> SolitonResult:
    eta, vel = guess
    return SolitonResult(
        c=float(c),
        grid=grid,
        eta=np.asarray(eta, dtype=float),
        vel=np.asarray(vel, dtype=float),
        amplitude=math.nan,
        residual=math.nan,
        iterations=0,
        converged=False,
        message=str(err),
    )


def _continue(speeds, grid, seed, tol, max_iter):
    out = []
    for c in speeds:
        guess = seed if seed is not None else kdv_guess(c, grid)
        try:
            res = petviashvili_solve(c, grid, guess=guess, tol=tol, max_iter=max_iter)
        except WhithamError as err:
            res = _failed(c, grid, guess, err)
        if res.converged:
            seed = (res.eta, res.vel)
        out.append(res)
    return out


def amplitude_speed_sweep(
    c_min, c_max, steps, grid: Grid, tol=1e-10, max_iter=500, parallel=False, workers=None
) -> list[SolitonResult]:
    """Natural continuation in ``c`` over ``steps`` equispaced speeds, ascending.

    Each point is seeded with the last converged profile. A point that fails
    is kept (``converged=False``) and the sweep moves on. With ``parallel``
    the points after the first are split into contiguous chunks, each chunk
    seeded by the first converged profile and continued in its own process.
    """
    _check_speed(c_min)
    if not c_max > c_min:
        raise ValueError(f"c_max={c_max} must exceed c_min={c_min}")
    if steps < 1 or int(steps) != steps:
        raise ValueError(f"steps must be a positive integer, got {steps}")
    speeds = [float(c) for c in np.linspace(c_min, c_max, int(steps))] if steps > 1 else [float(c_min)]

    if not parallel or len(speeds) < 3:
        return _continue(speeds, grid, None, tol, max_iter)

    first = _continue(speeds[:1], grid, None, tol, max_iter)
    seed = (first[0].eta, first[0].vel) if first[0].converged else None
    rest = speeds[1:]
    workers = workers or 2
    chunks = [list(chunk) for chunk in np.array_split(rest, min(workers, len(rest))) if len(chunk)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_continue, chunk, grid, seed, tol, max_iter) for chunk in chunks]
        results = first
        for fut in futures:
            results.extend(fut.result())
    return results
