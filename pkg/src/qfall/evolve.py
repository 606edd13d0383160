"""Time evolution in a uniform force field, by two independent engines.

The Hamiltonian is H = p^2 / 2 m_i + F z with F = m_g * g in gravity mode
and F = m_i * a in a uniformly accelerated frame: the two modes are the
same operator reached through different parameters, which is exactly the
equivalence-principle statement the experiments exercise.

Engines:

* closed-form moment propagation (`moment_evolution`) - exact, since
  mean values obey the classical equations for a linear potential and a
  uniform force adds nothing to the central moments beyond free spreading;
* an exact wavefunction propagator (`exact_wavefunction`) built from the
  extended Galilean transform: free spectral evolution, a coordinate
  shift by the classical drop, and a linear momentum-kick phase;
* a Strang split-operator spectral solver (`split_step_evolve`).

For a linear potential the Strang commutator defect is a c-number, so the
split solution differs from the exact one by a pure global phase
F^2 dt^3/(24 m hbar) per step; dt halving must shrink the L2 error four-fold
and the solver is unconditionally norm-preserving.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    DEFAULT_UNITS,
    GridField,
    MassPair,
    SpatialGrid,
    UnitSystem,
    boundary_probability,
)
from .errors import (
    BoundaryBreachError,
    ConfigurationError,
    DomainError,
    PreconditionError,
)
from .states import MomentSet, WavepacketSpec, build_wavefunction, numeric_moments

__all__ = [
    "GRAVITY",
    "ACCELERATED_FRAME",
    "LinearPotentialParams",
    "EvolutionResult",
    "moment_evolution",
    "exact_wavefunction",
    "split_step_evolve",
    "default_timestep",
    "refine_timestep",
    "dump_snapshots",
]

GRAVITY = "gravity"
ACCELERATED_FRAME = "accelerated_frame"

# Probability allowed within 5 grid spacings of either boundary before the
# run aborts; prevents silent wraparound on the periodic domain.
BOUNDARY_TOL = 1e-10
BOUNDARY_CELLS = 5


@dataclass(frozen=True)
class LinearPotentialParams:
    """Mass pair, field strength, and which mass couples to the field.

    Gravity couples the gravitational mass (V = m_g g z); a uniformly
    accelerated frame couples the inertial mass (V = m_i a z). The
    effective downward acceleration of the mean is force / m_inertial.
    """

    mass: MassPair
    field_strength: float
    mode: str = GRAVITY

    def __post_init__(self):
        if self.field_strength < 0:
            raise ConfigurationError("field strength must be nonnegative")
        if self.mode not in (GRAVITY, ACCELERATED_FRAME):
            raise ConfigurationError(f"unknown mode {self.mode!r}")

    @property
    def coupling_mass(self) -> float:
        if self.mode == GRAVITY:
            return self.mass.m_gravitational
        return self.mass.m_inertial

    @property
    def force(self) -> float:
        """Magnitude of the uniform force, coupling_mass * field_strength."""
        return self.coupling_mass * self.field_strength

    @property
    def g_eff(self) -> float:
        """Downward acceleration of the mean, force / m_inertial."""
        return self.force / self.mass.m_inertial


@dataclass
class EvolutionResult:
    """Strided record of a split-operator run.

    `times`, `moments`, `norms` and (optionally) `probe_current` share one
    stride; `snapshot_fields` are stored on their own coarser stride. The
    final field is always kept.
    """

    times: np.ndarray
    moments: list[MomentSet]
    norms: np.ndarray
    final_field: GridField
    params: LinearPotentialParams
    dt: float
    probe_z: float | None = None
    probe_current: np.ndarray | None = None
    snapshot_times: np.ndarray | None = None
    snapshot_fields: list[GridField] | None = field(default=None, repr=False)

    def mean_positions(self) -> np.ndarray:
        return np.array([m.mean_z for m in self.moments])

    def mean_momenta(self) -> np.ndarray:
        return np.array([m.mean_p for m in self.moments])


def moment_evolution(m0: MomentSet, params: LinearPotentialParams,
                     t: float) -> MomentSet:
    """Propagate moments exactly for time t under the uniform force.

    Means follow the classical trajectory; the uniform force adds no
    variance, so the second moments spread exactly as in free flight:

        var_z(t) = var_z + 2 cov t / m + var_p t^2 / m^2
        cov(t)   = cov + var_p t / m
        var_p(t) = var_p
    """
    if t < 0:
        raise PreconditionError("evolution time must be nonnegative")
    mi = params.mass.m_inertial
    mean_z = m0.mean_z + m0.mean_p * t / mi - 0.5 * params.g_eff * t**2
    mean_p = m0.mean_p - params.force * t
    var_z = m0.var_z + 2.0 * m0.cov_zp * t / mi + m0.var_p * t**2 / mi**2
    cov_zp = m0.cov_zp + m0.var_p * t / mi
    return MomentSet(mean_z, mean_p, var_z, m0.var_p, cov_zp)


def exact_wavefunction(spec: WavepacketSpec, params: LinearPotentialParams,
                       t: float, grid: SpatialGrid,
                       unit: UnitSystem = DEFAULT_UNITS) -> GridField:
    """Evolve the initial packet exactly via the extended Galilean transform.

    psi(z, t) = exp(-i F t z / hbar - i F^2 t^3 / (6 m hbar))
                * phi(z + g_eff t^2 / 2, t)

    with phi the free spectral evolution of the initial state. The free
    intermediate never falls, so the domain must contain both the fallen
    and the unfallen spread packet; both are checked against the boundary
    guard and a breach raises :class:`DomainError` advising a larger grid.
    """
    if t < 0:
        raise PreconditionError("evolution time must be nonnegative")
    hbar = unit.hbar
    mi = params.mass.m_inertial
    force = params.force
    shift = 0.5 * params.g_eff * t**2
    field0 = build_wavefunction(spec, grid)
    k = grid.wavenumbers
    spectrum = np.fft.fft(field0.amplitudes) * np.exp(
        -1j * hbar * k**2 * t / (2.0 * mi))
    free = GridField(grid, np.fft.ifft(spectrum))
    if boundary_probability(free, BOUNDARY_CELLS) > BOUNDARY_TOL:
        raise DomainError(
            "free-spreading intermediate reaches the boundary; enlarge the "
            "grid above the release point")
    shifted = np.fft.ifft(spectrum * np.exp(1j * k * shift))
    phase = np.exp(-1j * force * t * grid.points / hbar
                   - 1j * force**2 * t**3 / (6.0 * mi * hbar))
    out = GridField(grid, phase * shifted)
    if boundary_probability(out, BOUNDARY_CELLS) > BOUNDARY_TOL:
        raise DomainError(
            "evolved state reaches the boundary; enlarge the grid below the "
            "detector")
    return out


def default_timestep(t_total: float, steps: int = 4096) -> float:
    """Default dt: the total evolution time divided into 4096 steps."""
    if t_total <= 0:
        raise PreconditionError("total time must be positive")
    return t_total / steps


def split_step_evolve(initial: GridField, params: LinearPotentialParams,
                      dt: float, n_steps: int, snapshot_stride: int = 0,
                      *, unit: UnitSystem = DEFAULT_UNITS,
                      probe_z: float | None = None, record_stride: int = 1,
                      boundary_tol: float = BOUNDARY_TOL,
                      nyquist_margin: float = 2.0) -> EvolutionResult:
    """Strang-split spectral evolution: half kick, full drift, half kick.

    Each step applies exp(-i V dt / 2 hbar) in position space, the full
    kinetic phase in the spectral domain, and the second half kick; every
    factor is a pure phase so the norm is conserved to roundoff. Moments,
    norms and (optionally) the probability current at `probe_z` are
    recorded every `record_stride` steps; full field snapshots every
    `snapshot_stride` records (0 = none). Negative dt runs the inverse
    evolution, used for reversibility checks.

    Raises :class:`ConfigurationError` if the grid cannot represent the
    momentum acquired by the end of the run with a factor
    ``nyquist_margin`` to spare, and :class:`BoundaryBreachError` (with
    the step index) if probability reaches the domain edges mid-run.
    """
    if dt == 0:
        raise PreconditionError("dt must be nonzero")
    if n_steps < 0:
        raise PreconditionError("n_steps must be nonnegative")
    if record_stride < 1:
        raise PreconditionError("record_stride must be >= 1")
    grid = initial.grid
    hbar = unit.hbar
    mi = params.mass.m_inertial
    z = grid.points
    k = grid.wavenumbers

    m0 = numeric_moments(initial, unit)
    p_reach = abs(m0.mean_p) + params.force * abs(dt) * n_steps \
        + 5.0 * math.sqrt(m0.var_p)
    if hbar * grid.k_max < nyquist_margin * p_reach:
        raise ConfigurationError(
            f"grid resolves momenta up to {hbar * grid.k_max:.4g} but the run "
            f"acquires {p_reach:.4g} (margin {nyquist_margin}); refine the grid")

    exp_half_v = np.exp(-1j * params.force * z * dt / (2.0 * hbar))
    exp_kinetic = np.exp(-1j * hbar * k**2 * dt / (2.0 * mi))

    if probe_z is not None:
        if not (grid.z_min <= probe_z < grid.z_max):
            raise ConfigurationError(f"probe at {probe_z} outside the domain")
        # Band-limited point evaluation: psi(z_d) = sum_k psihat_k phase_k / n
        probe_phase = np.exp(1j * k * (probe_z - grid.z_min)) / grid.n_points
        probe_dphase = 1j * k * probe_phase

    if snapshot_stride:
        snapshot_stride = max(1, snapshot_stride // record_stride) * record_stride

    times: list[float] = []
    moments: list[MomentSet] = []
    norms: list[float] = []
    currents = [] if probe_z is not None else None
    snap_times: list[float] = []
    snaps: list[GridField] = []

    def record(step: int, psi: np.ndarray):
        psi_k = np.fft.fft(psi)
        rho = np.abs(psi) ** 2 * grid.spacing
        total = float(np.sum(rho))
        mean_z = float(np.sum(z * rho))
        var_z = float(np.sum((z - mean_z) ** 2 * rho))
        wk = np.abs(psi_k) ** 2
        wk = wk / np.sum(wk)
        mean_p = float(np.sum(hbar * k * wk))
        var_p = float(np.sum((hbar * k - mean_p) ** 2 * wk))
        dpsi = np.fft.ifft(1j * k * psi_k)
        cov = hbar * float(np.imag(np.sum(np.conj(psi) * z * dpsi)
                                   * grid.spacing)) - mean_z * mean_p
        times.append(step * dt)
        moments.append(MomentSet(mean_z, mean_p, var_z, var_p, cov))
        norms.append(math.sqrt(total))
        if currents is not None:
            val = probe_phase @ psi_k
            dval = probe_dphase @ psi_k
            currents.append((hbar / mi) * float(np.imag(np.conj(val) * dval)))
        if snapshot_stride and step % snapshot_stride == 0:
            snap_times.append(step * dt)
            snaps.append(GridField(grid, psi))

    psi = initial.amplitudes.copy()
    record(0, psi)
    for step in range(1, n_steps + 1):
        psi = exp_half_v * psi
        psi = np.fft.ifft(exp_kinetic * np.fft.fft(psi))
        psi = exp_half_v * psi
        edge_prob = (np.sum(np.abs(psi[:BOUNDARY_CELLS]) ** 2)
                     + np.sum(np.abs(psi[-BOUNDARY_CELLS:]) ** 2)) * grid.spacing
        if edge_prob > boundary_tol:
            raise BoundaryBreachError(
                f"probability {edge_prob:.3e} reached the domain edge", step)
        if step % record_stride == 0 or step == n_steps:
            record(step, psi)

    return EvolutionResult(
        times=np.array(times),
        moments=moments,
        norms=np.array(norms),
        final_field=GridField(grid, psi),
        params=params,
        dt=dt,
        probe_z=probe_z,
        probe_current=None if currents is None else np.array(currents),
        snapshot_times=np.array(snap_times) if snaps else None,
        snapshot_fields=snaps if snaps else None,
    )


def refine_timestep(spec: WavepacketSpec, params: LinearPotentialParams,
                    t_total: float, grid: SpatialGrid,
                    unit: UnitSystem = DEFAULT_UNITS, dt0: float | None = None,
                    target_error: float = 1e-8,
                    ratio_band: tuple[float, float] = (3.5, 4.5),
                    max_halvings: int = 8) -> dict:
    """Halve dt until the order-check ratio stabilizes and the split-step
    error against the exact propagator drops below `target_error`.

    Returns a dict with the refined ``dt``, the per-level L2 ``errors``
    against :func:`exact_wavefunction`, and the halving ``ratios`` (each
    should sit near 4 for a second-order scheme).
    """
    reference = exact_wavefunction(spec, params, t_total, grid, unit)
    field0 = build_wavefunction(spec, grid)
    dt = default_timestep(t_total) if dt0 is None else dt0
    n = max(1, round(t_total / dt))
    dt = t_total / n

    def l2_error(dt_k, n_k):
        run = split_step_evolve(field0, params, dt_k, n_k,
                                unit=unit, record_stride=n_k)
        diff = run.final_field.amplitudes - reference.amplitudes
        return float(np.sqrt(np.sum(np.abs(diff) ** 2) * grid.spacing))

    errors = [l2_error(dt, n)]
    ratios: list[float] = []
    for _ in range(max_halvings):
        stable = ratios and ratio_band[0] <= ratios[-1] <= ratio_band[1]
        if errors[-1] <= target_error and (stable or errors[-1] < 1e-12):
            break
        dt /= 2.0
        n *= 2
        errors.append(l2_error(dt, n))
        ratios.append(errors[-2] / errors[-1])
    return {"dt": dt, "n_steps": n, "errors": errors, "ratios": ratios}


def dump_snapshots(result: EvolutionResult, directory, fmt: str = "csv"):
    """Write stored snapshots as {t, z, Re psi, Im psi} records.

    `fmt` selects one CSV file per snapshot or a single .npz bundle.
    Returns the list of paths written.
    """
    from pathlib import Path

    if result.snapshot_fields is None:
        raise PreconditionError("run was made without snapshots")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    if fmt == "csv":
        for i, (t, fld) in enumerate(zip(result.snapshot_times,
                                         result.snapshot_fields)):
            path = directory / f"snapshot_{i:06d}.csv"
            with open(path, "w") as fh:
                fh.write("t,z,re_psi,im_psi\n")
                for zj, aj in zip(fld.grid.points, fld.amplitudes):
                    fh.write(f"{float(t)!r},{float(zj)!r},"
                             f"{float(aj.real)!r},{float(aj.imag)!r}\n")
            paths.append(path)
    elif fmt == "npz":
        path = directory / "snapshots.npz"
        np.savez(
            path,
            times=result.snapshot_times,
            z=result.snapshot_fields[0].grid.points,
            psi=np.array([f.amplitudes for f in result.snapshot_fields]),
        )
        paths.append(path)
    else:
        raise ConfigurationError(f"unknown snapshot format {fmt!r}")
    return paths
