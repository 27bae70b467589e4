"""Periodic grids, discrete Fourier transforms and Fourier multipliers.

Fields are plain real ``numpy`` arrays of length ``grid.n``. Spectra use the
forward-normalised DFT, so the coefficient of ``cos(kx)`` at ``+k`` and ``-k``
is 1/2 and a constant field ``c`` has ``c`` at ``k = 0``.

The operators of the model are multipliers in ``D = -i d/dx``: the symbol of
``D`` is the wavenumber ``k`` itself, so ``tanh D`` acts as ``f_k -> tanh(k) f_k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable

import numpy as np

from .errors import FieldError, GridError, NonHermitianError, PeakTrackingError

IMAG_RESIDUE_TOL = 1e-12


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on ``[-L/2, L/2)`` with ``n`` collocation points."""

    n: int
    length: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n % 2:
            raise GridError(f"grid size must be an even integer, got {self.n}")
        if self.n < 8:
            raise GridError(f"grid size must be at least 8, got {self.n}")
        if not np.isfinite(self.length) or self.length <= 0:
            raise GridError(f"domain length must be positive, got {self.length}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "length", float(self.length))

    @property
    def dx(self) -> float:
        return self.length / self.n

    @cached_property
    def nodes(self) -> np.ndarray:
        x = -0.5 * self.length + np.arange(self.n) * self.dx
        x.flags.writeable = False
        return x

    @cached_property
    def modes(self) -> np.ndarray:
        """Signed integer frequencies in FFT order (Nyquist is ``-n/2``)."""
        m = np.fft.fftfreq(self.n, d=1.0 / self.n).astype(np.int64)
        m.flags.writeable = False
        return m

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        k = 2.0 * np.pi * self.modes / self.length
        k.flags.writeable = False
        return k

    @property
    def nyquist_index(self) -> int:
        return self.n // 2

    @property
    def k_max(self) -> float:
        """Magnitude of the Nyquist wavenumber."""
        return np.pi * self.n / self.length

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        mask = 3 * np.abs(self.modes) <= self.n
        mask.flags.writeable = False
        return mask

    def check_field(self, f, name: str = "field") -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != (self.n,):
            raise FieldError(f"{name} has shape {f.shape}, grid expects ({self.n},)")
        if not np.all(np.isfinite(f)):
            raise FieldError(f"{name} contains non-finite samples")
        return f

    def integrate(self, f) -> float:
        # rectangle rule: exact for trigonometric polynomials below Nyquist
        return float(self.dx * np.sum(f))

    def inner(self, f, g) -> float:
        return float(self.dx * np.dot(f, g))

    def l2_norm(self, f) -> float:
        return float(np.sqrt(self.dx * np.dot(f, f)))


def make_grid(n: int, length: float) -> Grid:
    return Grid(n, length)


@dataclass(frozen=True, eq=False)
class MultiplierSymbol:
    """Scalar function of the wavenumber defining a Fourier multiplier.

    ``odd`` marks symbols whose Nyquist coefficient must be dropped: an odd
    symbol has no consistent value on the unpaired Nyquist mode.
    """

    name: str
    func: Callable[[np.ndarray], np.ndarray]
    odd: bool = False

    def __call__(self, k):
        k = np.asarray(k, dtype=float)
        return np.asarray(self.func(k), dtype=complex)

    def __mul__(self, other):
        if isinstance(other, MultiplierSymbol):
            f, g = self.func, other.func
            return MultiplierSymbol(
                f"{self.name}*{other.name}",
                lambda k: np.asarray(f(k), dtype=complex) * g(k),
                self.odd ^ other.odd,
            )
        scale = complex(other)
        f = self.func
        return MultiplierSymbol(
            f"{scale}*{self.name}", lambda k: scale * np.asarray(f(k), dtype=complex), self.odd
        )

    __rmul__ = __mul__

    def is_hermitian(self, k, atol: float = 1e-14) -> bool:
        k = np.asarray(k, dtype=float)
        return bool(np.allclose(self(-k), np.conj(self(k)), rtol=0, atol=atol))

    def on_lattice(self, grid: Grid) -> np.ndarray:
        return _lattice(self, grid)


@lru_cache(maxsize=256)
def _lattice(symbol: MultiplierSymbol, grid: Grid) -> np.ndarray:
    m = symbol(grid.wavenumbers)
    if not np.all(np.isfinite(m)):
        raise NonHermitianError(f"symbol {symbol.name} is not finite on the lattice")
    if symbol.odd:
        m[grid.nyquist_index] = 0.0
    m.flags.writeable = False
    return m


def _tanh_over_k(k):
    out = np.ones_like(k)
    nz = k != 0
    out[nz] = np.tanh(k[nz]) / k[nz]
    return out


def _k_over_tanh(k):
    out = np.ones_like(k)
    nz = k != 0
    out[nz] = k[nz] / np.tanh(k[nz])
    return out


_TANH = MultiplierSymbol("tanh", np.tanh, odd=True)
_K = MultiplierSymbol("K", _tanh_over_k)
_KINV = MultiplierSymbol("Kinv", _k_over_tanh)
_ABSK = MultiplierSymbol("absk", np.abs)
_DERIV = MultiplierSymbol("deriv", lambda k: 1j * k, odd=True)


def symbol_tanh() -> MultiplierSymbol:
    """``tanh D``; real and odd, so only ``-i tanh D`` maps real fields to real fields."""
    return _TANH


def symbol_K() -> MultiplierSymbol:
    """``tanh D / D``, equal to 1 at ``k = 0``."""
    return _K


def symbol_Kinv() -> MultiplierSymbol:
    """``D / tanh D``, equal to 1 at ``k = 0``."""
    return _KINV


def symbol_absk() -> MultiplierSymbol:
    return _ABSK


def symbol_deriv() -> MultiplierSymbol:
    return _DERIV


def forward_transform(f, grid: Grid) -> np.ndarray:
    f = grid.check_field(f)
    return np.fft.fft(f, norm="forward")


def backward_transform(spectrum, grid: Grid) -> np.ndarray:
    """Inverse transform; the imaginary part must be round-off only."""
    spectrum = np.asarray(spectrum, dtype=complex)
    if spectrum.shape != (grid.n,):
        raise FieldError(f"spectrum has shape {spectrum.shape}, grid expects ({grid.n},)")
    return _real_part(np.fft.ifft(spectrum, norm="forward"), spectrum)


def _real_part(values: np.ndarray, spectrum: np.ndarray) -> np.ndarray:
    imag = np.linalg.norm(values.imag)
    scale = np.sqrt(len(values)) * np.linalg.norm(spectrum)
    if imag > IMAG_RESIDUE_TOL * max(scale, np.finfo(float).tiny):
        raise NonHermitianError(
            f"imaginary residue {imag:.3e} exceeds {IMAG_RESIDUE_TOL:g} of field norm {scale:.3e}"
        )
    return values.real.copy()


def apply_multiplier(symbol: MultiplierSymbol, f, grid: Grid) -> np.ndarray:
    """Apply ``f_k -> m(k) f_k`` and return the (real) result.

    Raises NonHermitianError when the output has an imaginary part larger
    than ``1e-12`` of the input norm, i.e. the symbol does not preserve
    realness.
    """
    f = grid.check_field(f)
    spec = np.fft.fft(f, norm="forward") * symbol.on_lattice(grid)
    out = np.fft.ifft(spec, norm="forward")
    imag = np.linalg.norm(out.imag)
    if imag > IMAG_RESIDUE_TOL * max(np.linalg.norm(f), np.finfo(float).tiny):
        raise NonHermitianError(
            f"symbol {symbol.name} left imaginary residue {imag:.3e} on a real field"
        )
    return out.real.copy()


def dealias(f, grid: Grid) -> np.ndarray:
    """2/3-rule projection: drop every coefficient with ``|m| > n/3``."""
    f = grid.check_field(f)
    spec = np.fft.rfft(f)
    spec[~grid.dealias_mask[: len(spec)]] = 0.0
    return np.fft.irfft(spec, n=grid.n)


def spectral_shift(f, grid: Grid, shift: float) -> np.ndarray:
    """Return ``g(x) = f(x - shift)`` for the trigonometric interpolant of ``f``."""
    f = grid.check_field(f)
    spec = np.fft.fft(f, norm="forward")
    k = grid.wavenumbers
    phase = np.exp(-1j * k * shift)
    phase[grid.nyquist_index] = np.cos(k[grid.nyquist_index] * shift)
    return np.fft.ifft(spec * phase, norm="forward").real


def reflect(f) -> np.ndarray:
    """Return samples of ``f(-x)``; node ``x_j`` maps to ``x_{n-j}``."""
    f = np.asarray(f)
    return np.roll(f[::-1], 1)


def interpolate(f, grid: Grid, x, derivative: int = 0) -> np.ndarray:
    """Evaluate the trigonometric interpolant (or its first two derivatives) at ``x``."""
    if derivative not in (0, 1, 2):
        raise ValueError("only derivatives up to order 2 are supported")
    f = grid.check_field(f)
    spec = np.fft.fft(f, norm="forward")
    k = grid.wavenumbers.astype(float)
    nyq = grid.nyquist_index
    s = np.atleast_1d(np.asarray(x, dtype=float)) - grid.nodes[0]
    weights = (1j * k) ** derivative * spec
    weights[nyq] = 0.0
    total = np.exp(1j * np.outer(s, k)) @ weights
    # the unpaired Nyquist mode is interpolated by a cosine so the result stays real
    kn = k[nyq]
    nyq_basis = (np.cos(kn * s), -kn * np.sin(kn * s), -(kn**2) * np.cos(kn * s))
    return np.real(total) + np.real(spec[nyq]) * nyq_basis[derivative]


def locate_peak(f, grid: Grid, rtol: float = 1e-10) -> tuple[float, float]:
    """Sub-grid location and value of the global maximum of ``f``.

    Starts at the largest sample and refines with Newton's method on the
    derivative of the trigonometric interpolant. Raises PeakTrackingError
    when two separated samples share the maximum value.
    """
    f = grid.check_field(f)
    j = int(np.argmax(f))
    top = f[j]
    scale = max(abs(top), np.max(np.abs(f)), np.finfo(float).tiny)
    ties = np.flatnonzero(f >= top - rtol * scale)
    dist = np.minimum(np.abs(ties - j), grid.n - np.abs(ties - j))
    if np.any(dist > 1):
        raise PeakTrackingError(f"{len(ties)} separated samples share the maximum {top:.6g}")

    x = grid.nodes[j]
    for _ in range(50):
        d1 = interpolate(f, grid, x, 1)[0]
        d2 = interpolate(f, grid, x, 2)[0]
        if d2 >= 0:
            break
        step = d1 / d2
        step = float(np.clip(step, -grid.dx, grid.dx))
        x -= step
        if abs(step) < 1e-15 * grid.length:
            break
    if abs(x - grid.nodes[j]) > 1.5 * grid.dx:
        x = grid.nodes[j]
    x = (x + 0.5 * grid.length) % grid.length - 0.5 * grid.length
    return float(x), float(interpolate(f, grid, x)[0])


def fourier_resample(f, source: Grid, target: Grid) -> np.ndarray:
    """Band-limited resampling between two grids of the same length."""
    if not np.isclose(source.length, target.length, rtol=1e-12, atol=0):
        raise GridError("fourier_resample requires equal domain lengths")
    f = source.check_field(f)
    if source.n == target.n:
        return f.copy()
    spec = np.fft.fft(f, norm="forward")
    out = np.zeros(target.n, dtype=complex)
    half = min(source.n, target.n) // 2
    pos = np.arange(half)
    out[pos] = spec[pos]
    out[-pos[1:]] = spec[-pos[1:]]
    if target.n > source.n:
        # split the source Nyquist coefficient between +/- frequencies
        out[half] = 0.5 * spec[half]
        out[-half] = 0.5 * spec[half]
    else:
        out[half] = spec[half] + spec[-half]
    return np.fft.ifft(out, norm="forward").real
