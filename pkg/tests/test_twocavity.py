import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from scipy.linalg import expm

from conftest import jc_dense, random_vector
from jctransfer.dynamics import CouplingSchedule, JcParams
from jctransfer.fock import FieldState, FockBasisSpec
from jctransfer.twocavity import (
    TwoCavityState,
    cat_tau,
    fitted_pa,
    fitted_pab,
    make_bell_initial,
    product_state,
    propagate_two_cavity,
    purity_curve,
    purity_fields,
    purity_single,
    revival_width,
)


def _random_two(rng, n_max):
    basis = FockBasisSpec(n_max)
    d = basis.dim
    return TwoCavityState(random_vector(rng, 4 * d * d).reshape(2, 2, d, d), basis)


def _dense_two(n_max, lam_a, lam_b, t):
    d = n_max + 1
    ha, hb = jc_dense(n_max, lam_a), jc_dense(n_max, lam_b)
    eye = np.eye(2 * d)
    u = expm(-1j * t * (np.kron(ha, eye) + np.kron(eye, hb)))
    return u


def _to_kron(amps):
    # (A, B, na, nb) -> (A, na, B, nb)
    return np.transpose(amps, (0, 2, 1, 3)).ravel()


def _from_kron(vec, d):
    return np.transpose(vec.reshape(2, d, 2, d), (0, 2, 1, 3))


def test_two_cavity_matches_dense_expm():
    rng = np.random.default_rng(11)
    for n_max in (1, 3, 6):
        d = n_max + 1
        s = _random_two(rng, n_max)
        for t in (0.2, 1.7, 9.0):
            u = _dense_two(n_max, 1.0, 0.6, t)
            ref = _from_kron(u @ _to_kron(s.amps), d)
            got = propagate_two_cavity(s, t, JcParams(1.0), JcParams(0.6)).amps
            assert np.max(np.abs(got - ref)) < 1e-11


def _explicit_rhos(state):
    psi = state.amps  # (A, B, na, nb)
    rho_ab = np.einsum("ijab,ijcd->abcd", psi, psi.conj())
    d = state.basis.dim
    rho_ab_m = rho_ab.reshape(d * d, d * d)
    rho_a = np.einsum("abcb->ac", rho_ab)
    rho_b = np.einsum("abad->bd", rho_ab)
    return rho_ab_m, rho_a, rho_b


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), t=st.floats(0.0, 20.0))
def test_purities_match_explicit_density_matrices(seed, t):
    s = propagate_two_cavity(_random_two(np.random.default_rng(seed), 4), t, JcParams(1.0))
    rho_ab, rho_a, rho_b = _explicit_rhos(s)
    assert purity_fields(s) == pytest.approx(np.trace(rho_ab @ rho_ab).real, abs=1e-12)
    pa, pb = purity_single(s)
    assert pa == pytest.approx(np.trace(rho_a @ rho_a).real, abs=1e-12)
    assert pb == pytest.approx(np.trace(rho_b @ rho_b).real, abs=1e-12)


def test_initial_purities_and_symmetry():
    basis = FockBasisSpec.for_alpha(3.0)
    s0 = make_bell_initial(3.0, basis)
    assert s0.norm == pytest.approx(1.0)
    assert purity_fields(s0) == pytest.approx(1.0)
    assert purity_single(s0) == pytest.approx((1.0, 1.0))
    s = propagate_two_cavity(s0, 4.0, JcParams(1.0))
    pa, pb = purity_single(s)
    assert pa == pytest.approx(pb, abs=1e-12)
    assert np.allclose(s.block_masses(), s0.block_masses(), atol=1e-12)


def test_product_state_layout():
    basis = FockBasisSpec(3)
    fa = FieldState(np.array([0.5, 0.5j, -0.5, 0.5]), basis)
    atoms = np.array([[0.0, 1.0], [0.0, 0.0]])
    s = product_state(atoms, fa, fa)
    assert np.allclose(s.amps[0, 1], np.outer(fa.amps, fa.amps))
    assert np.count_nonzero(s.amps[1]) == 0


def test_fits_and_width_helpers():
    assert fitted_pa(0.0, 10.0, 1.0) == 1.0
    tau = cat_tau(10.0, JcParams(1.0))
    assert fitted_pab(tau, 10.0, 1.0) == pytest.approx(0.5 + 0.5 * math.exp(-(math.pi**2) / 800))
    t = np.linspace(0.0, 2.0, 2001)
    sigma = 0.3
    y = 0.5 + 0.4 * np.exp(-((t - 1.0) ** 2) / (2 * sigma**2))
    assert revival_width(t, y) == pytest.approx(2 * math.sqrt(2 * math.log(2)) * sigma, rel=1e-4)


def test_purity_curve_small_alpha():
    curve = purity_curve(3.0, np.linspace(0.0, 2.0, 21), JcParams(1.0))
    assert curve.p_ab[0] == pytest.approx(1.0)
    assert np.all(curve.p_a <= 1.0 + 1e-12)
    assert curve.to_csv().startswith("t_over_tau,p_ab,p_a,p_b\n")
    assert curve.meta["tau"] == pytest.approx(3.0 * math.pi)


def test_staggered_schedules_match_separate_constant_couplings():
    s0 = make_bell_initial(2.0, FockBasisSpec.for_alpha(2.0))
    t = 3.0
    late = CouplingSchedule("gaussian", lambda0=1.0, width=0.4)
    theta = late.effective_time(t)
    got = propagate_two_cavity(s0, t, JcParams(1.0), schedules=(CouplingSchedule("constant", 1.0), late))
    ref = propagate_two_cavity(s0, t, JcParams(1.0), JcParams(theta / t))
    assert np.allclose(got.amps, ref.amps, atol=1e-13)
    assert '"tau"' in purity_curve(2.0, [0.0, 1.0], JcParams(1.0)).header_json()
