import math

import numpy as np
import pytest

from qfall import (
    ACCELERATED_FRAME,
    GRAVITY,
    BoundaryBreachError,
    ConfigurationError,
    LinearPotentialParams,
    MassPair,
    MomentSet,
    PreconditionError,
    WavepacketSpec,
    analytic_moments,
    build_wavefunction,
    default_timestep,
    dump_snapshots,
    exact_wavefunction,
    make_grid,
    moment_evolution,
    numeric_moments,
    split_step_evolve,
)


def params_g(mi=1.0, mg=1.0, g=1.0, mode=GRAVITY):
    return LinearPotentialParams(MassPair(mi, mg), g, mode)


def l2_distance(a, b, dz):
    return math.sqrt(float(np.sum(np.abs(a - b) ** 2) * dz))


# --- parameters --------------------------------------------------------------

def test_coupling_mass_by_mode():
    mass = MassPair(2.0, 3.0)
    grav = LinearPotentialParams(mass, 1.5, GRAVITY)
    accel = LinearPotentialParams(mass, 1.5, ACCELERATED_FRAME)
    assert grav.coupling_mass == 3.0 and accel.coupling_mass == 2.0
    assert math.isclose(grav.g_eff, 1.5 * 3.0 / 2.0)
    assert math.isclose(accel.g_eff, 1.5)


def test_params_validation():
    with pytest.raises(ConfigurationError):
        LinearPotentialParams(MassPair(1, 1), -1.0)
    with pytest.raises(ConfigurationError):
        LinearPotentialParams(MassPair(1, 1), 1.0, "rotating_frame")


# --- moment evolution ---------------------------------------------------------

def test_free_fall_crossing_moment():
    m0 = analytic_moments(WavepacketSpec.gaussian(2.0, 1.0))
    mt = moment_evolution(m0, params_g(), 2.0)
    assert math.isclose(mt.mean_z, 0.0, abs_tol=1e-14)
    assert math.isclose(mt.mean_p, -2.0, rel_tol=1e-14)


def test_variance_independent_of_field_strength():
    m0 = analytic_moments(WavepacketSpec.yurke_stoler(2.0, 1.0, 1.0))
    for t in (0.3, 1.0, 2.7):
        a = moment_evolution(m0, params_g(g=1.0), t)
        b = moment_evolution(m0, params_g(g=2.0), t)
        assert a.var_z == b.var_z
        assert a.var_p == b.var_p
        assert a.cov_zp == b.cov_zp


def test_gaussian_spreading_law():
    m0 = analytic_moments(WavepacketSpec.gaussian(0.0, 1.0))
    for t in (0.5, 1.0, 3.0):
        mt = moment_evolution(m0, params_g(), t)
        assert math.isclose(mt.var_z, 0.5 + 0.5 * t**2, rel_tol=1e-14)


def test_moment_evolution_rejects_negative_time():
    m0 = MomentSet(0.0, 0.0, 0.5, 0.5, 0.0)
    with pytest.raises(PreconditionError):
        moment_evolution(m0, params_g(), -0.1)


def test_mass_ratio_sets_mean_trajectory():
    m0 = analytic_moments(WavepacketSpec.gaussian(2.0, 1.0))
    heavy = moment_evolution(m0, params_g(mi=4.0, mg=1.0), 2.0)
    assert math.isclose(heavy.mean_z, 2.0 - 0.5 * 0.25 * 4.0, rel_tol=1e-14)


# --- exact propagator ---------------------------------------------------------

def test_exact_zero_field_is_free_spreading():
    spec = WavepacketSpec.gaussian(0.0, 1.0)
    grid = make_grid(-40.0, 40.0, 2048)
    out = exact_wavefunction(spec, params_g(g=0.0), 2.0, grid)
    mom = numeric_moments(out)
    assert abs(mom.mean_z) <= 1e-10
    assert abs(mom.var_z - (0.5 + 0.5 * 4.0)) <= 1e-8


def test_exact_at_time_zero_is_identity():
    spec = WavepacketSpec.male_cat(2.0, 1.0, 1.0)
    grid = make_grid(-30.0, 30.0, 2048)
    out = exact_wavefunction(spec, params_g(), 0.0, grid)
    ref = build_wavefunction(spec, grid)
    assert l2_distance(out.amplitudes, ref.amplitudes, grid.spacing) <= 1e-14


def test_exact_moments_track_moment_evolution():
    spec = WavepacketSpec.yurke_stoler(2.0, 1.0, 1.0)
    grid = make_grid(-40.0, 40.0, 4096)
    params = params_g()
    m0 = analytic_moments(spec)
    for t in (0.5, 1.5):
        expected = moment_evolution(m0, params, t)
        got = numeric_moments(exact_wavefunction(spec, params, t, grid))
        assert abs(got.mean_z - expected.mean_z) <= 1e-8
        assert abs(got.mean_p - expected.mean_p) <= 1e-8
        assert abs(got.var_z - expected.var_z) <= 1e-8
        assert abs(got.var_p - expected.var_p) <= 1e-8


# --- split-operator solver ----------------------------------------------------

def test_free_split_step_matches_spreading_law():
    spec = WavepacketSpec.gaussian(0.0, 1.0)
    grid = make_grid(-40.0, 40.0, 2048)
    res = split_step_evolve(build_wavefunction(spec, grid), params_g(g=0.0),
                            2.0 / 512, 512, record_stride=512)
    assert abs(res.moments[-1].var_z - (0.5 + 0.5 * 4.0)) <= 1e-8


def test_single_step_reversibility():
    spec = WavepacketSpec.male_cat(0.0, 1.0, 1.0)
    grid = make_grid(-30.0, 30.0, 2048)
    field0 = build_wavefunction(spec, grid)
    fwd = split_step_evolve(field0, params_g(), 0.01, 1, record_stride=1)
    back = split_step_evolve(fwd.final_field, params_g(), -0.01, 1,
                             record_stride=1)
    assert l2_distance(back.final_field.amplitudes, field0.amplitudes,
                       grid.spacing) <= 1e-12


def test_strang_halving_ratio():
    spec = WavepacketSpec.gaussian(2.0, 1.0)
    grid = make_grid(-25.0, 22.0, 2048)
    params = params_g()
    field0 = build_wavefunction(spec, grid)
    exact = exact_wavefunction(spec, params, 2.0, grid)
    errors = []
    for steps in (512, 1024):
        run = split_step_evolve(field0, params, 2.0 / steps, steps,
                                record_stride=steps)
        errors.append(l2_distance(run.final_field.amplitudes,
                                  exact.amplitudes, grid.spacing))
    assert 3.5 <= errors[0] / errors[1] <= 4.5


def test_equivalence_modes_bitwise_identical():
    spec = WavepacketSpec.yurke_stoler(2.0, 1.0, 1.0)
    grid = make_grid(-30.0, 25.0, 2048)
    field0 = build_wavefunction(spec, grid)
    grav = split_step_evolve(field0, params_g(mode=GRAVITY), 0.002, 500,
                             record_stride=500)
    accel = split_step_evolve(field0, params_g(mode=ACCELERATED_FRAME), 0.002,
                              500, record_stride=500)
    assert np.array_equal(grav.final_field.amplitudes,
                          accel.final_field.amplitudes)


def test_norm_conserved_along_run():
    spec = WavepacketSpec.gaussian(2.0, 1.0)
    grid = make_grid(-30.0, 25.0, 2048)
    res = split_step_evolve(build_wavefunction(spec, grid), params_g(),
                            0.001, 1000, record_stride=10)
    assert float(np.max(np.abs(res.norms - 1.0))) <= 1e-12


def test_split_step_tracks_ehrenfest():
    spec = WavepacketSpec.yurke_stoler(2.0, 1.0, 1.0)
    grid = make_grid(-40.0, 30.0, 4096)
    params = params_g()
    m0 = analytic_moments(spec)
    res = split_step_evolve(build_wavefunction(spec, grid), params,
                            2.0 / 1024, 1024, record_stride=128)
    for t, mom in zip(res.times, res.moments):
        ref = moment_evolution(m0, params, float(t))
        assert abs(mom.mean_z - ref.mean_z) <= 1e-6 * max(1.0, abs(ref.mean_z))
        assert abs(mom.mean_p - ref.mean_p) <= 1e-6 * max(1.0, abs(ref.mean_p))


def test_numeric_variance_independent_of_field_strength():
    spec = WavepacketSpec.male_cat(2.0, 1.0, 1.0)
    grid = make_grid(-30.0, 25.0, 2048)
    field0 = build_wavefunction(spec, grid)
    runs = [split_step_evolve(field0, params_g(g=g), 0.001, 800,
                              record_stride=800) for g in (1.0, 2.0)]
    assert abs(runs[0].moments[-1].var_z - runs[1].moments[-1].var_z) <= 1e-10


def test_boundary_guard_trips_with_step_index():
    spec = WavepacketSpec.gaussian(0.0, 1.0)
    grid = make_grid(-12.0, 12.0, 512)
    field0 = build_wavefunction(spec, grid)
    with pytest.raises(BoundaryBreachError) as excinfo:
        split_step_evolve(field0, params_g(), 0.01, 2000, record_stride=2000)
    assert 0 < excinfo.value.step_index <= 2000


def test_nyquist_guard():
    spec = WavepacketSpec.gaussian(0.0, 1.0)
    field0 = build_wavefunction(spec, make_grid(-20.0, 20.0, 1024))
    # a long strong kick demands far more momentum than the grid resolves
    with pytest.raises(ConfigurationError):
        split_step_evolve(field0, params_g(g=100.0), 0.01, 1000)


def test_default_timestep():
    assert default_timestep(4.096) == 0.001
    with pytest.raises(PreconditionError):
        default_timestep(0.0)


def test_snapshot_dumps(tmp_path):
    spec = WavepacketSpec.gaussian(2.0, 1.0)
    grid = make_grid(-25.0, 20.0, 1024)
    res = split_step_evolve(build_wavefunction(spec, grid), params_g(),
                            0.002, 200, snapshot_stride=100,
                            record_stride=50)
    assert res.snapshot_fields is not None
    assert len(res.snapshot_fields) == 3  # steps 0, 100, 200
    csv_paths = dump_snapshots(res, tmp_path / "csv", fmt="csv")
    assert len(csv_paths) == 3
    header = csv_paths[0].read_text().splitlines()[0]
    assert header == "t,z,re_psi,im_psi"
    npz_paths = dump_snapshots(res, tmp_path / "npz", fmt="npz")
    bundle = np.load(npz_paths[0])
    assert bundle["psi"].shape == (3, 1024)
    with pytest.raises(ConfigurationError):
        dump_snapshots(res, tmp_path, fmt="hdf5")
