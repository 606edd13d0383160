import math

import numpy as np
import pytest

from qfall import (
    InfeasibleTargetError,
    MassPair,
    PreparationTarget,
    WavepacketSpec,
    analytic_moments,
    check_matched,
    match_second_particle,
    velocity_bound,
)
from conftest import random_cat


def test_identical_preparations_match():
    spec = WavepacketSpec.yurke_stoler(2.0, 1.0, 1.0)
    mass = MassPair(1.0, 1.0)
    report = check_matched(spec, mass, spec, mass, tol=1e-12)
    assert report
    assert report.position_residual == 0.0
    assert report.velocity_residual == 0.0


def test_parity_cats_match_for_any_masses():
    # both carry zero mean momentum, so velocities match for free
    spec = WavepacketSpec.male_cat(2.0, 1.0, 1.0)
    assert check_matched(spec, MassPair(1.0, 1.0), spec, MassPair(7.0, 3.0),
                         tol=1e-12)


def test_moving_cat_against_resting_gaussian_fails():
    cat = WavepacketSpec.yurke_stoler(2.0, 1.0, 1.0)
    gauss = WavepacketSpec.gaussian(2.0, 1.0)
    report = check_matched(cat, MassPair(1, 1), gauss, MassPair(1, 1),
                           tol=1e-9)
    assert not report
    assert math.isclose(report.velocity_residual, math.exp(-1.0),
                        rel_tol=1e-12)  # the interference momentum


def test_target_from_state():
    cat = WavepacketSpec.yurke_stoler(2.0, 1.0, 1.0)
    target = PreparationTarget.from_state(cat, MassPair(2.0, 1.0))
    assert math.isclose(target.mean_z, 2.0, abs_tol=1e-15)
    assert math.isclose(target.velocity, math.exp(-1.0) / 2.0, rel_tol=1e-12)


def test_match_resting_cat_with_gaussian_family():
    spec1 = WavepacketSpec.male_cat(1.5, 1.0, 1.0)
    family = WavepacketSpec.gaussian(0.0, 0.8)
    spec2 = match_second_particle(spec1, MassPair(1, 1), family,
                                  MassPair(3, 2))
    assert spec2.kind == "gaussian"
    assert spec2.delta0 == 0.8
    assert math.isclose(analytic_moments(spec2).mean_z, 1.5, abs_tol=1e-14)


def test_match_same_family_at_rest_translates():
    spec1 = WavepacketSpec.male_cat(2.0, 1.0, 1.0)
    family = WavepacketSpec.male_cat(0.0, 1.0, 1.0)
    spec2 = match_second_particle(spec1, MassPair(1, 1), family,
                                  MassPair(2, 2))
    assert spec2.theta == 0.0
    assert check_matched(spec1, MassPair(1, 1), spec2, MassPair(2, 2),
                         tol=1e-9)


def test_match_moving_target_by_phase_solve():
    spec1 = WavepacketSpec.yurke_stoler(2.0, 1.0, 2.0)  # v = e^-1 / 2
    family = WavepacketSpec.male_cat(0.0, 1.2, 0.9)
    mass1, mass2 = MassPair(1.0, 1.0), MassPair(1.0, 2.3)
    assert abs(analytic_moments(spec1).mean_p) < velocity_bound(family, mass2)
    spec2 = match_second_particle(spec1, mass1, family, mass2)
    assert check_matched(spec1, mass1, spec2, mass2, tol=1e-9)
    # geometry and moduli of the family are preserved
    assert spec2.delta == 1.2 and spec2.delta0 == 0.9
    assert math.isclose(abs(spec2.c_plus), abs(family.c_plus), rel_tol=1e-15)


def test_matching_invariant_under_common_mass_rescaling():
    # the velocity condition is a ratio condition
    spec1 = WavepacketSpec.yurke_stoler(1.0, 1.0, 2.0)
    family = WavepacketSpec.male_cat(0.0, 1.0, 1.0)
    a = match_second_particle(spec1, MassPair(2, 1), family, MassPair(2, 5))
    b = match_second_particle(spec1, MassPair(8, 4), family, MassPair(8, 20))
    assert math.isclose(a.theta, b.theta, rel_tol=1e-12)
    assert math.isclose(a.z0, b.z0, rel_tol=1e-12)


def test_zero_velocity_target_returns_parity_phase():
    spec1 = WavepacketSpec.female_cat(3.0, 1.0, 1.0)  # <p> = 0
    family = WavepacketSpec.male_cat(0.0, 0.7, 1.1)
    spec2 = match_second_particle(spec1, MassPair(1, 1), family,
                                  MassPair(2, 1))
    assert spec2.theta in (0.0, math.pi)


def test_gaussian_family_rejects_moving_target():
    spec1 = WavepacketSpec.yurke_stoler(2.0, 1.0, 1.0)
    family = WavepacketSpec.gaussian(0.0, 1.0)
    with pytest.raises(InfeasibleTargetError) as excinfo:
        match_second_particle(spec1, MassPair(1, 1), family, MassPair(1, 1))
    assert excinfo.value.v_max == 0.0


def test_unreachable_velocity_reports_bound():
    spec1 = WavepacketSpec.yurke_stoler(2.0, 1.0, 1.0)  # v = e^-1 ~ 0.368
    family = WavepacketSpec.male_cat(0.0, 3.0, 1.0)     # tiny overlap weight
    mass2 = MassPair(1.0, 1.0)
    bound = velocity_bound(family, mass2)
    assert bound < 0.01
    with pytest.raises(InfeasibleTargetError) as excinfo:
        match_second_particle(spec1, MassPair(1, 1), family, mass2)
    assert math.isclose(excinfo.value.v_max, bound, rel_tol=1e-12)


def test_velocity_bound_attained_at_quarter_phase():
    family = WavepacketSpec.male_cat(0.0, 1.0, 1.0)
    mass = MassPair(1.0, 1.0)
    bound = velocity_bound(family, mass)
    # the Yurke-Stoler member of the family carries exactly the bound
    ys = WavepacketSpec.yurke_stoler(0.0, 1.0, 1.0)
    assert math.isclose(analytic_moments(ys).mean_p / mass.m_inertial, bound,
                        rel_tol=1e-14)


def test_randomized_feasible_matrix():
    rng = np.random.default_rng(7)
    done = 0
    while done < 12:
        spec1 = random_cat(rng)
        mass1 = MassPair(rng.uniform(0.5, 4.0), rng.uniform(0.5, 4.0))
        family = random_cat(rng)
        mass2 = MassPair(rng.uniform(0.5, 4.0), rng.uniform(0.5, 4.0))
        v1 = analytic_moments(spec1).mean_p / mass1.m_inertial
        if abs(v1) > 0.95 * velocity_bound(family, mass2):
            continue
        spec2 = match_second_particle(spec1, mass1, family, mass2)
        assert check_matched(spec1, mass1, spec2, mass2, tol=1e-9)
        done += 1
