"""Units, masses, spatial grids, and the complex field container.

Everything here is immutable after construction and safe to share between
concurrent workers. The default unit system is dimensionless: hbar = 1,
g = 1, with a reference mass and reference packet width both equal to 1.
Physical (SI) inputs are mapped onto these units through explicit scale
factors, see :meth:`UnitSystem.from_si`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "UnitSystem",
    "MassPair",
    "SpatialGrid",
    "GridField",
    "DEFAULT_UNITS",
    "make_grid",
    "norm",
    "boundary_probability",
]


@dataclass(frozen=True)
class UnitSystem:
    """Simulation units plus optional SI scale factors.

    ``hbar`` and ``g`` set the action and field-strength scales; ``m_ref``
    and ``delta0_ref`` are the reference mass and reference packet width
    from which derived scales (velocity, fall time) are built.
    """

    hbar: float = 1.0
    g: float = 1.0
    m_ref: float = 1.0
    delta0_ref: float = 1.0
    # SI value of one simulation unit of length / mass / time (None = not mapped)
    si_length: float | None = None
    si_mass: float | None = None
    si_time: float | None = None

    def __post_init__(self):
        if not (self.hbar > 0):
            raise ConfigurationError("hbar must be positive")
        if self.g < 0:
            raise ConfigurationError("g must be nonnegative")
        if not (self.m_ref > 0 and self.delta0_ref > 0):
            raise ConfigurationError("reference mass and width must be positive")

    @classmethod
    def from_si(cls, m_ref_si, delta0_ref_si, hbar_si=1.054571817e-34,
                g_si=9.80665):
        """Build dimensionless units anchored to SI reference scales.

        The simulation uses hbar = 1, m_ref = 1, delta0_ref = 1; the time
        unit follows as m_ref_si * delta0_ref_si**2 / hbar_si and the field
        strength g is expressed in the derived acceleration unit.
        """
        t_si = m_ref_si * delta0_ref_si**2 / hbar_si
        g_sim = g_si * t_si**2 / delta0_ref_si
        return cls(hbar=1.0, g=g_sim, m_ref=1.0, delta0_ref=1.0,
                   si_length=delta0_ref_si, si_mass=m_ref_si, si_time=t_si)

    @property
    def velocity_scale(self) -> float:
        """hbar / (m_ref * delta0_ref), the natural mean-velocity scale."""
        return self.hbar / (self.m_ref * self.delta0_ref)

    def fall_time(self, z0: float, g: float | None = None) -> float:
        """sqrt(2 z0 / g), the classical drop time from height z0."""
        g = self.g if g is None else g
        if g <= 0:
            raise ConfigurationError("fall time undefined for g <= 0")
        return math.sqrt(2.0 * z0 / g)

    def diffusion_coefficient(self, mass: float) -> float:
        """hbar / m, the kinematic spreading scale of a mass m packet."""
        return self.hbar / mass


DEFAULT_UNITS = UnitSystem()


@dataclass(frozen=True)
class MassPair:
    """Inertial and gravitational mass of one test particle."""

    m_inertial: float
    m_gravitational: float

    def __post_init__(self):
        if not (self.m_inertial > 0 and self.m_gravitational > 0):
            raise ConfigurationError("masses must be strictly positive")
        if not math.isfinite(self.m_gravitational / self.m_inertial):
            raise ConfigurationError("mass ratio must be finite")

    @property
    def ratio(self) -> float:
        """m_inertial / m_gravitational, the quantity setting the fall time."""
        return self.m_inertial / self.m_gravitational


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform periodic 1-D grid with its spectral wavenumbers.

    The domain is [z_min, z_max) sampled at n_points (a power of two);
    wavenumbers follow the periodic convention k = 2*pi*j/(z_max - z_min)
    with j in [-n/2, n/2).
    """

    z_min: float
    z_max: float
    n_points: int
    points: np.ndarray = field(init=False, repr=False, compare=False)
    wavenumbers: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.z_min < self.z_max:
            raise ConfigurationError(
                f"z_min must be below z_max, got [{self.z_min}, {self.z_max}]")
        if not (_is_power_of_two(self.n_points) and self.n_points >= 2):
            raise ConfigurationError(
                f"n_points must be a power of two >= 2, got {self.n_points}")
        z = self.z_min + self.spacing * np.arange(self.n_points)
        k = 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.spacing)
        z.setflags(write=False)
        k.setflags(write=False)
        object.__setattr__(self, "points", z)
        object.__setattr__(self, "wavenumbers", k)

    @property
    def length(self) -> float:
        return self.z_max - self.z_min

    @property
    def spacing(self) -> float:
        return (self.z_max - self.z_min) / self.n_points

    @property
    def k_max(self) -> float:
        """Nyquist wavenumber pi * n / (z_max - z_min)."""
        return np.pi * self.n_points / self.length


def make_grid(z_min: float, z_max: float, n_points: int) -> SpatialGrid:
    """Construct a spectral grid; n_points must be a power of two >= 16."""
    if not (_is_power_of_two(n_points) and n_points >= 16):
        raise ConfigurationError(
            f"n_points must be a power of two >= 16, got {n_points}")
    return SpatialGrid(z_min, z_max, n_points)


@dataclass(frozen=True)
class GridField:
    """Complex wavefunction sampled on a :class:`SpatialGrid`.

    The amplitude array is copied and frozen at construction.
    """

    grid: SpatialGrid
    amplitudes: np.ndarray = field(compare=False)

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=complex, copy=True)
        if amp.shape != (self.grid.n_points,):
            raise ConfigurationError(
                f"amplitudes must have shape ({self.grid.n_points},), "
                f"got {amp.shape}")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def norm(field: GridField) -> float:
    """L2 norm sqrt(sum |psi_j|^2 dz) under the rectangle rule.

    The rectangle rule is exact for band-limited periodic integrands,
    which is the representation the spectral solver works in.
    """
    return float(np.sqrt(np.sum(field.density()) * field.grid.spacing))


def boundary_probability(field: GridField, cells: int = 5) -> float:
    """Probability mass in the outermost `cells` grid points on each side."""
    rho = field.density() * field.grid.spacing
    return float(np.sum(rho[:cells]) + np.sum(rho[-cells:]))
