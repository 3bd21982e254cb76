"""Periodic pseudo-spectral grid, fields, and Fourier-multiplier operators.

Conventions
-----------
* The domain is ``[0, L)`` sampled at ``n`` equispaced points, ``n`` a power
  of two.  Real fields are stored through their half (rfft) spectrum: the
  coefficient array has length ``n//2 + 1`` and index ``m`` carries the
  wavenumber ``xi_m = 2*pi*m/L``; Hermitian symmetry of the negative modes
  is implicit, so stored fields are real by construction.
* The forward transform carries the ``1/n`` normalisation.  With that choice
  the zero-mode coefficient is the mean of the field and

      integral |f|^2 dx  ==  L * sum_m w_m |f_hat_m|^2

  where ``w_m`` is 2 for interior modes and 1 for the ``m = 0`` and Nyquist
  entries.  ``SpectralGrid.mode_weights`` holds ``L * w_m`` so mode sums
  convert directly to integral norms.
* Nonlinear products are evaluated pointwise in physical space and cleaned
  with the 2/3 rule (`dealias`): modes ``|m| > n//3`` are zeroed, which
  removes aliasing of quadratic products exactly for band-limited inputs.
"""

from __future__ import annotations

import numpy as np
import scipy.fft as _fft

from .errors import DegenerateInputError, ParameterError

__all__ = [
    "SpectralGrid",
    "Field",
    "fractional_laplacian",
    "riesz_power",
    "derivative",
    "dealias",
]


class SpectralGrid:
    """Uniform periodic grid with cached spectral metadata.

    Args:
        n: number of collocation points, a power of two, at least 8.
        length: box length L > 0.
    """

    def __init__(self, n: int, length: float):
        if n < 8 or (n & (n - 1)) != 0:
            raise ParameterError(f"grid size must be a power of two >= 8, got {n}")
        if not (length > 0.0) or not np.isfinite(length):
            raise ParameterError(f"domain length must be positive, got {length}")
        self.n = int(n)
        self.length = float(length)
        self.dx = self.length / self.n
        self.x = self.dx * np.arange(self.n)
        # Half-spectrum wavenumbers 2*pi*m/L, m = 0 .. n/2.
        self.xi = 2.0 * np.pi * np.arange(self.n // 2 + 1) / self.length
        # L * [1, 2, ..., 2, 1]: converts half-spectrum mode sums to integrals.
        w = np.full(self.n // 2 + 1, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        self.mode_weights = self.length * w
        # Survivors of the 2/3 rule: |m| <= n//3.
        self.dealias_keep = np.arange(self.n // 2 + 1) <= self.n // 3
        self._xi_powers: dict[float, np.ndarray] = {}

    def xi_power(self, p: float) -> np.ndarray:
        """|xi|^p with the zero mode set to 0, cached per exponent."""
        key = float(p)
        out = self._xi_powers.get(key)
        if out is None:
            out = np.zeros_like(self.xi)
            out[1:] = self.xi[1:] ** key
            out.flags.writeable = False
            self._xi_powers[key] = out
        return out

    def forward(self, values: np.ndarray) -> np.ndarray:
        """Physical samples -> normalised half spectrum."""
        return _fft.rfft(values) / self.n

    def inverse(self, spectrum: np.ndarray) -> np.ndarray:
        """Normalised half spectrum -> physical samples."""
        return _fft.irfft(spectrum * self.n, n=self.n)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SpectralGrid)
            and other.n == self.n
            and other.length == self.length
        )

    def __repr__(self) -> str:
        return f"SpectralGrid(n={self.n}, length={self.length!r})"


class Field:
    """A real scalar field on a `SpectralGrid`, stored spectrally."""

    __slots__ = ("grid", "spectrum")

    def __init__(self, grid: SpectralGrid, spectrum: np.ndarray):
        if spectrum.shape != (grid.n // 2 + 1,):
            raise ParameterError(
                f"spectrum length {spectrum.shape} does not match grid {grid.n}"
            )
        self.grid = grid
        self.spectrum = np.asarray(spectrum, dtype=np.complex128)

    @classmethod
    def from_values(cls, grid: SpectralGrid, values: np.ndarray) -> "Field":
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (grid.n,):
            raise ParameterError(
                f"value array of shape {values.shape} does not match grid {grid.n}"
            )
        return cls(grid, grid.forward(values))

    @classmethod
    def zeros(cls, grid: SpectralGrid) -> "Field":
        return cls(grid, np.zeros(grid.n // 2 + 1, dtype=np.complex128))

    @property
    def values(self) -> np.ndarray:
        return self.grid.inverse(self.spectrum)

    @property
    def mean(self) -> float:
        return float(self.spectrum[0].real)

    def l2_norm(self) -> float:
        """Integral L^2 norm, evaluated in spectral space."""
        return float(
            np.sqrt(np.sum(self.grid.mode_weights * np.abs(self.spectrum) ** 2))
        )

    def copy(self) -> "Field":
        return Field(self.grid, self.spectrum.copy())

    def __add__(self, other: "Field") -> "Field":
        return Field(self.grid, self.spectrum + other.spectrum)

    def __sub__(self, other: "Field") -> "Field":
        return Field(self.grid, self.spectrum - other.spectrum)

    def __mul__(self, scalar: float) -> "Field":
        return Field(self.grid, self.spectrum * scalar)

    __rmul__ = __mul__


def fractional_laplacian(f: Field, beta: float) -> Field:
    """Apply (-Laplace)^beta, the Fourier multiplier |xi|^(2 beta).

    ``beta`` must lie in [0, 1]; the zero mode is annihilated for every
    beta (including beta = 0, where the operator is the mean-free
    projection composed with the identity).
    """
    if not (0.0 <= beta <= 1.0):
        raise ParameterError(f"fractional order must be in [0, 1], got {beta}")
    return Field(f.grid, f.grid.xi_power(2.0 * beta) * f.spectrum)


def riesz_power(f: Field, s: float) -> Field:
    """Apply |xi|^s (the s-th power of the mean-free derivative magnitude).

    Negative powers are only defined on mean-free fields: the zero-mode
    coefficient must not exceed 1e-10 of the field's root-mean-square.
    """
    if s < 0.0:
        rms = float(np.sqrt(np.sum(np.abs(f.spectrum) ** 2 * _half_weights(f.grid))))
        if abs(f.spectrum[0]) > 1e-10 * rms:
            raise DegenerateInputError(
                "negative Riesz power needs a mean-free field; "
                f"zero-mode magnitude {abs(f.spectrum[0]):.3e} vs rms {rms:.3e}"
            )
    out = f.grid.xi_power(s) * f.spectrum
    out[0] = 0.0
    return Field(f.grid, out)


def derivative(f: Field) -> Field:
    """Spectral d/dx.  The (unsigned) Nyquist mode is dropped."""
    spec = 1j * f.grid.xi * f.spectrum
    spec[-1] = 0.0
    return Field(f.grid, spec)


def dealias(f: Field) -> Field:
    """Zero every mode with |m| > n//3 (the 2/3 rule)."""
    return Field(f.grid, np.where(f.grid.dealias_keep, f.spectrum, 0.0))


def _half_weights(grid: SpectralGrid) -> np.ndarray:
    return grid.mode_weights / grid.length
