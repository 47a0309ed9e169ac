import numpy as np
import pytest

from dicke_dce import DampingModel, NotConverged, PhaseViolation, SystemParams, intracavity_photons
from dicke_dce.model import static_gap
from dicke_dce.oracle import (GaussianState, MomentEquations, Trajectory, cycle_averaged_photons,
                              evolve, floquet_multipliers, ground_state_photons,
                              normal_mode_basis, steady_cycle_average)


def test_normal_mode_basis(ref_params):
    basis = normal_mode_basis(ref_params.replace(lam=0.0))
    assert basis.freqs == pytest.approx([static_gap(ref_params), np.sqrt(1.9)], rel=1e-12)
    # a = sum_s A_s q_s + B_s q_s^dag must keep [a, a^dag] = 1
    assert np.sum(np.abs(basis.a_coeff) ** 2 - np.abs(basis.a_conj_coeff) ** 2) == pytest.approx(1)


def test_ground_state_is_stationary():
    p = SystemParams(g=0.4, gamma0=0.02)
    basis = normal_mode_basis(p)
    n0 = basis.ground_state_moments()
    eqs = MomentEquations(p, DampingModel(0.02))
    k = eqs.drift(0.0)
    dn = k @ n0 + n0 @ k.T + eqs.diff
    assert np.max(np.abs(dn)) < 1e-12
    assert basis.occupations(n0) == pytest.approx([0, 0], abs=1e-12)
    assert GaussianState(n0, 0.0).photons == pytest.approx(ground_state_photons(p), rel=1e-12)


def test_bare_dissipator_leaks_without_drive():
    # the textbook a-decay keeps emitting from the dressed vacuum; the dressed one does not
    p = SystemParams(g=0.4, gamma0=0.02)
    d = DampingModel(0.02)
    n0 = normal_mode_basis(p).ground_state_moments()
    for kind, leaks in (("bare", True), ("dressed", False)):
        traj = evolve(p, d, 2 * p.period, initial=n0, dissipator=kind)
        rate = traj.emission_rate()[-1]
        assert (rate > 1e-4) == leaks


def test_commutators_preserved():
    p = SystemParams(g=0.45, lam=0.02, eta=0.63, gamma0=0.01)
    traj = evolve(p, DampingModel(0.01), 20 * p.period)
    assert max(traj.state(k).commutator_defect() for k in range(0, len(traj.t), 50)) < 1e-7


def test_closed_system_multipliers_on_unit_circle():
    p = SystemParams(g=0.45, lam=0.005, eta=0.9)
    mult = floquet_multipliers(p, DampingModel(0.0))
    assert np.abs(mult) == pytest.approx(np.ones(4), abs=1e-8)
    damped = floquet_multipliers(p.replace(gamma0=0.005), DampingModel(0.005))
    assert np.max(np.abs(damped)) < 1


def test_parametric_instability_detected():
    # strong drive on resonance with a nearly critical mode: multipliers leave the unit disk
    p = SystemParams(g=0.495, lam=0.009, gamma0=0.001)
    p = p.replace(eta=2 * static_gap(p))
    assert np.max(np.abs(floquet_multipliers(p, DampingModel(0.001)))) > 1


def test_supercritical_rejected():
    with pytest.raises(PhaseViolation):
        evolve(SystemParams(g=0.6, gamma0=0.01), DampingModel(0.01), 1.0)


def test_short_trajectory_not_converged():
    p = SystemParams(g=0.3, lam=0.01, gamma0=0.01)
    with pytest.raises(NotConverged):
        steady_cycle_average(evolve(p, DampingModel(0.01), p.period))


@pytest.mark.parametrize("detune", [1.0, 0.7])
def test_matches_frequency_domain_strong_damping(detune):
    p = SystemParams(g=0.35, lam=0.05, gamma0=0.05)
    p = p.replace(eta=2 * static_gap(p) * detune)
    d = DampingModel(0.05)
    n_td, _ = cycle_averaged_photons(p, d, rel_tol=1e-4)
    n_fd = intracavity_photons(p, d, 3, 1e-9)
    assert n_td == pytest.approx(n_fd, rel=2e-3)
