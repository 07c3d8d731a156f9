"""Periodic uniform grids standing in for R^n, with spectral operators.

Fields are plain complex ``numpy`` arrays of shape ``(N,) * n`` in row-major
order; a :class:`Grid` carries everything needed to differentiate, integrate
and resample them.  The box is centred on the origin, ``x_j = -L/2 + j h``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import fft

__all__ = [
    "ConfigurationError",
    "BoundaryWarning",
    "Grid",
    "make_grid",
]


class ConfigurationError(ValueError):
    """Invalid grid or parameter configuration."""


class BoundaryWarning(UserWarning):
    """A field carries non-negligible mass near the box boundary."""


def _is_power_of_two(m: int) -> bool:
    return m > 0 and (m & (m - 1)) == 0


@dataclass(frozen=True)
class Grid:
    n: int
    points: int
    box_length: float

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise ConfigurationError(f"dimension must be 1, 2 or 3, got {self.n}")
        if not isinstance(self.points, (int, np.integer)) or not _is_power_of_two(int(self.points)):
            raise ConfigurationError(f"points must be a power of two, got {self.points}")
        if self.points < 8:
            raise ConfigurationError(f"points must be >= 8, got {self.points}")
        if not self.box_length > 0:
            raise ConfigurationError(f"box_length must be positive, got {self.box_length}")
        object.__setattr__(self, "points", int(self.points))
        object.__setattr__(self, "box_length", float(self.box_length))

    # -- geometry -----------------------------------------------------------
    @property
    def spacing(self) -> float:
        # N is a power of two, so this division is exact and h*N == L.
        return self.box_length / self.points

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.points,) * self.n

    @property
    def size(self) -> int:
        return self.points**self.n

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.n

    @cached_property
    def x1d(self) -> np.ndarray:
        return -0.5 * self.box_length + self.spacing * np.arange(self.points)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Per-dimension wavenumbers ``2 pi m / L`` in FFT order."""
        m = np.fft.fftfreq(self.points, d=1.0 / self.points)
        return 2.0 * np.pi * m / self.box_length

    @property
    def k_max(self) -> float:
        return np.pi * self.points / self.box_length

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.x1d] * self.n), indexing="ij"))

    @cached_property
    def kcoords(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*([self.wavenumbers] * self.n), indexing="ij"))

    @cached_property
    def r2(self) -> np.ndarray:
        return sum(c**2 for c in self.coords)

    @cached_property
    def r(self) -> np.ndarray:
        return np.sqrt(self.r2)

    @cached_property
    def k2(self) -> np.ndarray:
        return sum(k**2 for k in self.kcoords)

    @cached_property
    def rk2(self) -> np.ndarray:
        """``|k|^2`` on the half spectrum used by ``rfftn``."""
        kr = 2.0 * np.pi * np.arange(self.points // 2 + 1) / self.box_length
        ks = [self.wavenumbers] * (self.n - 1) + [kr]
        return sum(k**2 for k in np.meshgrid(*ks, indexing="ij"))

    @cached_property
    def rweights(self) -> np.ndarray:
        """Parseval multiplicities of the half-spectrum modes."""
        w = np.full(self.points // 2 + 1, 2.0)
        w[0] = w[-1] = 1.0
        return np.broadcast_to(w, self.rk2.shape)

    @cached_property
    def _deriv_k(self) -> tuple[np.ndarray, ...]:
        # Nyquist mode dropped for odd derivatives so real fields stay real.
        k = self.wavenumbers.copy()
        k[self.points // 2] = 0.0
        return tuple(np.meshgrid(*([k] * self.n), indexing="ij"))

    @cached_property
    def tail_mask(self) -> np.ndarray:
        cut = (2.0 / 3.0) * self.k_max
        mask = np.zeros(self.shape, dtype=bool)
        for kj in self.kcoords:
            mask |= np.abs(kj) >= cut * (1 - 1e-12)
        return mask

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        """Outer layer of width L/16 on every face of the box."""
        edge = 7.0 * self.box_length / 16.0
        mask = np.zeros(self.shape, dtype=bool)
        for c in self.coords:
            mask |= np.abs(c) >= edge
        return mask

    # -- transforms ---------------------------------------------------------
    def fft(self, f: np.ndarray) -> np.ndarray:
        return fft.fftn(f)

    def ifft(self, fh: np.ndarray) -> np.ndarray:
        return fft.ifftn(fh)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape, dtype=complex)

    def check_shape(self, f: np.ndarray) -> None:
        if np.shape(f) != self.shape:
            raise ValueError(f"field shape {np.shape(f)} does not match grid {self.shape}")

    # -- operators ----------------------------------------------------------
    def laplacian(self, f: np.ndarray) -> np.ndarray:
        return fft.ifftn(-self.k2 * fft.fftn(f))

    def gradient(self, f: np.ndarray) -> list[np.ndarray]:
        fh = fft.fftn(f)
        return [fft.ifftn(1j * k * fh) for k in self._deriv_k]

    def x_dot_grad(self, f: np.ndarray) -> np.ndarray:
        """``x . grad f`` with x measured from the box centre."""
        return sum(c * g for c, g in zip(self.coords, self.gradient(f)))

    def integrate(self, values: np.ndarray) -> float:
        """Rectangle rule ``h^n sum(values)``."""
        return float(self.cell_volume * np.sum(values))

    def lp_power(self, f: np.ndarray, q: float) -> float:
        """``int |f|^q dx`` (the q-th power of the L^q norm)."""
        if q < 1:
            raise ConfigurationError(f"exponent q must be >= 1, got {q}")
        a = np.abs(f)
        if q == 2:
            return self.integrate(a * a)
        return self.integrate(a**q)

    def spectral_mass(self, f: np.ndarray) -> float:
        """``int |f|^2`` evaluated on the Fourier side."""
        return float(self.cell_volume / self.size * np.sum(np.abs(fft.fftn(f)) ** 2))

    def gradient_norm_sq(self, f: np.ndarray) -> float:
        """``int |grad f|^2`` through Parseval."""
        fh = fft.fftn(f)
        return float(self.cell_volume / self.size * np.sum(self.k2 * np.abs(fh) ** 2))

    def spectral_tail_fraction(self, *fields: np.ndarray) -> float:
        """Share of spectral energy in modes with ``|k_j| >= 2/3 k_max`` for some j.

        Several fields are pooled into one ratio.
        """
        total = 0.0
        tail = 0.0
        for f in fields:
            power = np.abs(fft.fftn(f)) ** 2
            total += float(np.sum(power))
            tail += float(np.sum(power[self.tail_mask]))
        if total == 0.0:
            raise ValueError("undefined tail fraction: zero field")
        return tail / total

    def boundary_mass_fraction(self, *fields: np.ndarray) -> float:
        total = sum(float(np.sum(np.abs(f) ** 2)) for f in fields)
        if total == 0.0:
            return 0.0
        edge = sum(float(np.sum(np.abs(f[self.boundary_mask]) ** 2)) for f in fields)
        return edge / total

    def edge_magnitude_ratio(self, f: np.ndarray) -> float:
        """``max |f|`` on the box faces over ``max |f|``."""
        peak = float(np.max(np.abs(f)))
        if peak == 0.0:
            return 0.0
        a = np.abs(f)
        edge = max(float(np.max(np.take(a, 0, axis=ax))) for ax in range(self.n))
        return edge / peak

    def warn_if_boundary(self, *fields: np.ndarray, threshold: float = 1e-6, what: str = "field") -> bool:
        frac = self.boundary_mass_fraction(*fields)
        if frac > threshold:
            warnings.warn(
                f"{what} untrusted near boundary (boundary mass fraction {frac:.2e})",
                BoundaryWarning,
                stacklevel=3,
            )
            return True
        return False

    # -- resampling ---------------------------------------------------------
    def _interp_matrix(self, y: np.ndarray) -> np.ndarray:
        """Rows evaluate the trigonometric interpolant at the points ``y``."""
        k = self.wavenumbers
        phase = np.outer(y + 0.5 * self.box_length, k)
        E = np.exp(1j * phase)
        nyq = self.points // 2
        E[:, nyq] = np.cos(phase[:, nyq])
        F = np.exp(-2j * np.pi * np.outer(np.arange(self.points), np.arange(self.points)) / self.points)
        M = (E @ F) / self.points
        # Points outside the box are set to zero rather than wrapped periodically.
        M[np.abs(y) > 0.5 * self.box_length] = 0.0
        return M

    def dilate(self, f: np.ndarray, lam: float) -> np.ndarray:
        """Sample ``f(lam * x)`` by Fourier interpolation, axis by axis."""
        if lam == 1.0:
            return np.array(f, dtype=complex, copy=True)
        M = self._interp_matrix(lam * self.x1d)
        out = np.asarray(f, dtype=complex)
        for ax in range(self.n):
            out = np.moveaxis(np.tensordot(M, out, axes=([1], [ax])), 0, ax)
        return out


def make_grid(n: int, points: int, box_length: float) -> Grid:
    return Grid(n, points, box_length)
