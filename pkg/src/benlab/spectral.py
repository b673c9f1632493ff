"""Periodic grid, Fourier analysis and multiplier operators.

All fields are real-valued samples on a uniform periodic grid; transforms
use the real FFT. Conventions fixed here and relied on everywhere else:

* wavenumbers xi_k = 2*pi*k/L for k = 0..n/2 (rfft layout),
* Hilbert transform is the multiplier i*sgn(xi) with sgn(0) = 0,
* |xi|^s is the multiplier of the fractional derivative,
* quadrature of integrals is dx * sum, which is spectrally accurate on a
  periodic grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid",
    "Field",
    "make_grid",
    "derivative",
    "hilbert",
    "fractional_derivative",
    "dealias",
    "norm",
    "integrate",
    "inner",
    "shift",
]


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [-L/2, L/2)."""

    n: int
    L: float
    dx: float
    x: np.ndarray
    xi: np.ndarray  # rfft wavenumbers, 2*pi*k/L for k = 0..n/2

    def __post_init__(self):
        self.x.setflags(write=False)
        self.xi.setflags(write=False)

    @property
    def dealias_mask(self) -> np.ndarray:
        k = np.arange(self.n // 2 + 1)
        return k <= self.n // 3

    def __eq__(self, other):
        return (
            isinstance(other, Grid) and self.n == other.n and self.L == other.L
        )


@dataclass(frozen=True, eq=False)
class Field:
    """Real grid function with a lazily computed spectral representation."""

    grid: Grid
    values: np.ndarray
    _hat: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field samples must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def hat(self) -> np.ndarray:
        """rfft coefficients of the samples (cached)."""
        if "hat" not in self._hat:
            h = np.fft.rfft(self.values)
            h.setflags(write=False)
            self._hat["hat"] = h
        return self._hat["hat"]

    @classmethod
    def from_hat(cls, grid: Grid, hat: np.ndarray) -> "Field":
        values = np.fft.irfft(hat, n=grid.n)
        f = cls(grid, values)
        h = np.asarray(hat, dtype=complex).copy()
        h.setflags(write=False)
        f._hat["hat"] = h
        return f

    def __add__(self, other):
        if isinstance(other, Field):
            return Field(self.grid, self.values + other.values)
        return Field(self.grid, self.values + other)

    def __sub__(self, other):
        if isinstance(other, Field):
            return Field(self.grid, self.values - other.values)
        return Field(self.grid, self.values - other)

    def __mul__(self, scalar):
        return Field(self.grid, self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.values)


def make_grid(n: int, L: float) -> Grid:
    """Build a periodic grid with n nodes (power of two, >= 16) on length L."""
    if n < 16 or (n & (n - 1)) != 0:
        raise ValueError(f"n must be a power of two >= 16, got {n}")
    if L <= 0:
        raise ValueError(f"L must be positive, got {L}")
    dx = L / n
    x = -L / 2 + dx * np.arange(n)
    xi = 2 * np.pi * np.fft.rfftfreq(n, d=dx)
    return Grid(n=n, L=L, dx=dx, x=x, xi=xi)


def derivative(u: Field, k: int) -> Field:
    """Spectral derivative of order k in {1, 2, 3}.

    The Nyquist mode is zeroed for odd k so that the output stays the
    transform of a real field with an odd multiplier.
    """
    if k not in (1, 2, 3):
        raise ValueError(f"derivative order must be 1, 2 or 3, got {k}")
    sym = (1j * u.grid.xi) ** k
    if k % 2 == 1:
        sym[-1] = 0.0
    return Field.from_hat(u.grid, sym * u.hat)


def hilbert(u: Field) -> Field:
    """Hilbert transform: multiplier i*sgn(xi), zero on the mean and Nyquist."""
    sym = 1j * np.ones_like(u.grid.xi)
    sym[0] = 0.0
    sym[-1] = 0.0  # sgn is ambiguous at the unpaired Nyquist mode
    return Field.from_hat(u.grid, sym * u.hat)


def fractional_derivative(u: Field, s: float) -> Field:
    """|xi|^s multiplier; s >= 0."""
    if s < 0:
        raise ValueError(f"fractional order must be >= 0, got {s}")
    sym = u.grid.xi ** s
    return Field.from_hat(u.grid, sym * u.hat)


def dealias(u: Field) -> Field:
    """Zero all modes with |k| > n/3 (2/3 rule for quadratic products)."""
    return Field.from_hat(u.grid, u.hat * u.grid.dealias_mask)


def integrate(values: np.ndarray, grid: Grid) -> float:
    """Periodic trapezoidal quadrature (rectangle rule)."""
    return grid.dx * float(np.sum(values))


def inner(u: Field, v: Field) -> float:
    """L2 inner product."""
    return integrate(u.values * v.values, u.grid)


def _rfft_weights(n: int) -> np.ndarray:
    w = np.full(n // 2 + 1, 2.0)
    w[0] = 1.0
    w[-1] = 1.0
    return w


def norm(u: Field, kind: str, interval=None) -> float:
    """Named norm of a field.

    kind is one of 'l2', 'h1', 'hhalf' (seminorm), 'linf',
    'linf-restricted' (requires interval=(a, b) inside the box).
    """
    g = u.grid
    kind = kind.lower()
    if kind == "l2":
        return float(np.sqrt(integrate(u.values**2, g)))
    if kind == "h1":
        ux = derivative(u, 1)
        return float(np.sqrt(integrate(u.values**2 + ux.values**2, g)))
    if kind == "hhalf":
        w = _rfft_weights(g.n)
        return float(np.sqrt(g.L / g.n**2 * np.sum(w * g.xi * np.abs(u.hat) ** 2)))
    if kind == "linf":
        return float(np.max(np.abs(u.values)))
    if kind == "linf-restricted":
        if interval is None:
            raise ValueError("linf-restricted needs interval=(a, b)")
        a, b = interval
        if a < -g.L / 2 or b > g.L / 2 or a >= b:
            raise ValueError(f"interval [{a}, {b}] not inside the box")
        mask = (g.x >= a) & (g.x <= b)
        if not mask.any():
            return 0.0
        return float(np.max(np.abs(u.values[mask])))
    raise ValueError(f"unknown norm kind {kind!r}")


def shift(u: Field, s: float) -> Field:
    """Translate periodically: (shift(u, s))(x) = u(x + s)."""
    phase = np.exp(1j * u.grid.xi * s)
    hat = u.hat * phase
    hat[-1] = hat[-1].real  # keep the Nyquist coefficient real
    return Field.from_hat(u.grid, hat)
