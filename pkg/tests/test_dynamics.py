import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from conftest import dense_propagator, random_vector
from jctransfer.dynamics import (
    AtomFieldState,
    CouplingSchedule,
    JcParams,
    attractor_time,
    check_conditions,
    effective_propagate,
    propagate_exact,
    propagate_scheduled,
)
from jctransfer.errors import ConditionViolated, NotResonant, VacuumField
from jctransfer.fock import FockBasisSpec, make_coherent, make_fock, make_tophat


def _random_state(rng, n_max):
    basis = FockBasisSpec(n_max)
    return AtomFieldState.from_vector(random_vector(rng, 2 * basis.dim), basis)


@pytest.mark.parametrize("picture", ["interaction", "schrodinger"])
def test_matches_dense_expm(picture):
    rng = np.random.default_rng(7)
    params = JcParams(lam=0.8, omega=1.7, picture=picture)
    omega = params.omega if picture == "schrodinger" else 0.0
    for n_max in (1, 4, 8):
        s = _random_state(rng, n_max)
        for t in (0.0, 0.3, 2.9, 17.0):
            ref = dense_propagator(n_max, params.lam, t, omega) @ s.vector()
            got = propagate_exact(s, t, params).vector()
            assert np.max(np.abs(got - ref)) < 1e-12


def test_ground_vacuum_is_dark():
    basis = FockBasisSpec(5)
    s = AtomFieldState.product(1.0, 0.0, make_fock(0, basis))
    out = propagate_exact(s, 3.3, JcParams(2.0))
    assert np.array_equal(out.vector(), s.vector())


def test_single_photon_rabi():
    basis = FockBasisSpec(5)
    s = AtomFieldState.product(0.0, 1.0, make_fock(2, basis))
    t = 0.41
    out = propagate_exact(s, t, JcParams(1.0))
    assert abs(out.amps_e[2]) ** 2 == pytest.approx(math.cos(math.sqrt(3) * t) ** 2, abs=1e-14)


def test_detuned_rejected():
    s = AtomFieldState.product(1.0, 0.0, make_fock(1, FockBasisSpec(3)))
    with pytest.raises(NotResonant):
        propagate_exact(s, 1.0, JcParams(1.0, omega=1.0, omega_a=1.1))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), t=st.floats(0.0, 50.0), n_max=st.integers(1, 40))
def test_norm_and_excitation_blocks_conserved(seed, t, n_max):
    s = _random_state(np.random.default_rng(seed), n_max)
    out = propagate_exact(s, t, JcParams(1.3))
    assert out.norm == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(out.block_masses(), s.block_masses(), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), t1=st.floats(0.0, 20.0), t2=st.floats(0.0, 20.0))
def test_group_property(seed, t1, t2):
    s = _random_state(np.random.default_rng(seed), 12)
    p = JcParams(0.7, omega=2.0, picture="schrodinger")
    two_step = propagate_exact(propagate_exact(s, t1, p), t2, p)
    one_step = propagate_exact(s, t1 + t2, p)
    assert np.max(np.abs(two_step.vector() - one_step.vector())) < 1e-11


def test_gaussian_schedule_against_quadrature():
    sched = CouplingSchedule("gaussian", lambda0=1.5, width=0.2)
    for t in (0.0, 0.5, 3.0, 12.0):
        ref, _ = quad(lambda s: sched.coupling(s), 0.0, t, epsabs=1e-13, epsrel=1e-13)
        assert sched.effective_time(t) == pytest.approx(ref, abs=1e-12)
    assert sched.effective_time(100.0) == pytest.approx(sched.saturation(), rel=1e-12)


def test_scheduled_evolution_freezes_after_pulse():
    basis = FockBasisSpec(10)
    s = AtomFieldState.product(0.0, 1.0, make_fock(3, basis))
    sched = CouplingSchedule("gaussian", lambda0=1.0, width=0.5)
    late = propagate_scheduled(s, 40.0, sched)
    later = propagate_scheduled(s, 80.0, sched)
    assert np.allclose(late.vector(), later.vector(), atol=1e-12)
    const = propagate_scheduled(s, 2.0, CouplingSchedule("constant", 0.9))
    assert np.allclose(const.vector(), propagate_exact(s, 2.0, JcParams(0.9)).vector(), atol=1e-14)


def test_attractor_time():
    field = make_coherent(5.0, FockBasisSpec.for_alpha(5.0))
    assert attractor_time(field, JcParams(2.0)) == pytest.approx(5.0 * math.pi / 2.0)
    assert attractor_time(field, JcParams(1.0), l=2) == pytest.approx(25.0 * math.pi)
    with pytest.raises(VacuumField):
        attractor_time(make_fock(0, FockBasisSpec(3)), JcParams(1.0))


@pytest.mark.parametrize("alpha", [3.0, 5.0, 7.0, 10.0])
def test_coherent_fields_pass_conditions(alpha):
    report = check_conditions(make_coherent(alpha, FockBasisSpec.for_alpha(alpha)))
    assert report.passed, report.problems()


def test_conditions_flag_fock_and_narrow_tophat():
    fock = check_conditions(make_fock(25, FockBasisSpec(40)))
    assert not fock.phase_ok and not fock.sparse_ok
    narrow = check_conditions(make_tophat(49, 5, FockBasisSpec(80), closed="right"))
    assert not narrow.spread_ok
    assert check_conditions(make_tophat(49, 20, FockBasisSpec(80), closed="right")).passed


def test_effective_warns_or_raises():
    field = make_fock(25, FockBasisSpec(40))
    p = JcParams(1.0)
    with pytest.warns(ConditionViolated):
        effective_propagate(1.0, 0.0, field, 0.0, 1.0, p)
    with pytest.raises(ConditionViolated):
        effective_propagate(1.0, 0.0, field, 0.0, 1.0, p, strict=True)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        effective_propagate(1.0, 0.0, field, 0.0, 1.0, p, check=False)


def test_effective_initial_state_and_accuracy():
    alpha = 8.0
    field = make_coherent(alpha, FockBasisSpec.for_alpha(alpha))
    p = JcParams(1.0)
    c1, c2 = 0.6, 0.8j
    start = AtomFieldState.product(c1, c2, field)
    at0 = effective_propagate(c1, c2, field, 0.0, 0.0, p)
    assert np.allclose(at0.vector(), start.vector(), atol=1e-15)
    tau = attractor_time(field, p)
    exact = propagate_exact(start, tau, p)
    approx = effective_propagate(c1, c2, field, 0.0, tau, p)
    assert abs(exact.inner(approx)) > 0.99


def test_effective_schrodinger_adds_free_phases():
    alpha = 6.0
    field = make_coherent(alpha, FockBasisSpec.for_alpha(alpha))
    pi = JcParams(1.0)
    ps = JcParams(1.0, omega=3.0, picture="schrodinger")
    t = 4.0
    a = propagate_exact(AtomFieldState.product(1.0, 0.0, field), t, ps)
    b = effective_propagate(1.0, 0.0, field, 0.0, t, ps)
    c = propagate_exact(AtomFieldState.product(1.0, 0.0, field), t, pi)
    d = effective_propagate(1.0, 0.0, field, 0.0, t, pi)
    assert a.inner(b) == pytest.approx(c.inner(d), abs=1e-12)
