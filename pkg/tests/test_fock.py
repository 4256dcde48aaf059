import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import poisson

from jctransfer.errors import DegenerateState, TruncationTooSmall, WindowOutOfRange
from jctransfer.fock import (
    FieldState,
    FockBasisSpec,
    McsLabel,
    apply_annihilation,
    apply_creation,
    apply_modified_annihilation,
    apply_number,
    estimate_phi,
    make_coherent,
    make_fock,
    make_mcs,
    make_tophat,
    tophat_window,
)


def test_default_truncation_rule():
    basis = FockBasisSpec.for_mean(100.0)
    assert basis.n_max >= 220
    assert poisson.sf(basis.n_max, 100.0) < 1e-12


def test_basis_rejects_bad_values():
    with pytest.raises(ValueError):
        FockBasisSpec(-1)
    with pytest.raises(ValueError):
        FockBasisSpec(10, tail_tol=0.0)


@pytest.mark.parametrize("alpha", [0.5, 3.0, 5.0 + 2.0j, 10.0])
def test_coherent_matches_poisson(alpha):
    st_ = make_coherent(alpha, FockBasisSpec.for_alpha(alpha))
    n = np.arange(st_.basis.dim)
    ref = poisson.pmf(n, abs(alpha) ** 2)
    assert np.max(np.abs(st_.probabilities - ref)) < 1e-12
    assert st_.mean_photon == pytest.approx(abs(alpha) ** 2, rel=1e-10)
    assert st_.photon_std == pytest.approx(abs(alpha), rel=1e-9)
    assert st_.norm == pytest.approx(1.0, abs=1e-14)


def test_coherent_phases_follow_argument():
    alpha = 2.0 * cmath.exp(0.7j)
    f = make_coherent(alpha, FockBasisSpec.for_alpha(alpha)).amps
    ratio = f[1:6] / f[:5]
    assert np.allclose(np.angle(ratio), 0.7)


@pytest.mark.parametrize("a, b", [(1.0, 1.5), (2.0, 2.0j), (3.0 - 1.0j, -0.5)])
def test_coherent_overlap_analytic(a, b):
    basis = FockBasisSpec.for_mean(max(abs(a), abs(b)) ** 2)
    got = make_coherent(a, basis).inner(make_coherent(b, basis))
    ref = cmath.exp(-abs(a) ** 2 / 2 - abs(b) ** 2 / 2 + a.conjugate() * b)
    assert abs(got - ref) < 1e-12


def test_coherent_needs_room():
    with pytest.raises(TruncationTooSmall):
        make_coherent(10.0, FockBasisSpec(80))


def test_zero_phase_mcs_is_bitwise_coherent():
    basis = FockBasisSpec.for_alpha(4.0)
    coh = make_coherent(4.0, basis)
    assert np.array_equal(make_mcs(McsLabel(4.0, 0.0), basis).amps, coh.amps)
    assert np.array_equal(make_mcs(McsLabel(4.0, g_kind="zero"), basis).amps, coh.amps)


def test_mcs_phase_and_custom_table():
    basis = FockBasisSpec.for_alpha(3.0)
    gamma = 1.3
    mcs = make_mcs(McsLabel(3.0, gamma), basis)
    n = np.arange(basis.dim)
    coh = make_coherent(3.0, basis).amps
    assert np.allclose(mcs.amps, coh * np.exp(-1j * gamma * np.sqrt(n)))
    table = gamma * np.sqrt(n)
    custom = make_mcs(McsLabel(3.0, g_kind="custom", table=table), basis)
    assert np.allclose(custom.amps, mcs.amps)
    with pytest.raises(ValueError):
        McsLabel(3.0, g_kind="custom", table=[0.1, 0.2])


def test_field_state_is_immutable():
    st_ = make_fock(2, FockBasisSpec(4))
    with pytest.raises(ValueError):
        st_.amps[0] = 1.0


def test_tophat_windows_hold_delta_levels():
    for delta in (4, 5, 10, 20):
        for closed in ("left", "right"):
            lo, hi = tophat_window(49, delta, closed)
            assert hi - lo + 1 == delta
    assert tophat_window(49, 10, "left") == (44, 53)
    assert tophat_window(49, 10, "right") == (45, 54)


def test_tophat_state():
    basis = FockBasisSpec(80)
    st_ = make_tophat(49, 10, basis)
    assert st_.norm == pytest.approx(1.0)
    assert np.count_nonzero(st_.amps) == 10
    assert st_.n_bar == 49.0
    with pytest.raises(WindowOutOfRange):
        make_tophat(49, 10, FockBasisSpec(50))
    with pytest.raises(WindowOutOfRange):
        make_tophat(2, 10, basis)


def test_ladder_operators_on_fock():
    basis = FockBasisSpec(6)
    down = apply_annihilation(make_fock(4, basis))
    assert down.amps[3] == pytest.approx(2.0)
    up, lost = apply_creation(make_fock(4, basis))
    assert up.amps[5] == pytest.approx(math.sqrt(5))
    assert lost == 0.0
    _, lost = apply_creation(make_fock(6, basis))
    assert lost == pytest.approx(7.0)
    assert apply_number(make_fock(3, basis)).amps[3] == 3


def _matrix(op, basis, **kw):
    cols = []
    for k in range(basis.dim):
        cols.append(op(make_fock(k, basis), **kw).amps)
    return np.array(cols).T


def test_deformed_operator_commutator():
    basis = FockBasisSpec(12)
    b = _matrix(apply_modified_annihilation, basis, gamma=0.9)
    comm = b @ b.conj().T - b.conj().T @ b
    # the last level is distorted by truncation
    assert np.allclose(comm[:-1, :-1], np.eye(basis.dim - 1), atol=1e-12)


@pytest.mark.parametrize("gamma", [0.0, 1.0, 3.0 * math.pi])
def test_mcs_is_deformed_eigenstate(gamma):
    alpha = 3.0 + 1.0j
    basis = FockBasisSpec.for_alpha(alpha)
    mcs = make_mcs(McsLabel(alpha, gamma), basis)
    out = apply_modified_annihilation(mcs, gamma=gamma)
    assert np.max(np.abs(out.amps - alpha * mcs.amps)) < 1e-6


def test_estimate_phi_coherent():
    phi, res = estimate_phi(make_coherent(5.0 * cmath.exp(0.4j), FockBasisSpec.for_alpha(5.0)))
    assert phi == pytest.approx(0.4, abs=1e-12)
    assert res < 0.02


def test_estimate_phi_degenerate():
    with pytest.raises(DegenerateState):
        estimate_phi(make_fock(3, FockBasisSpec(6)))


def test_csv_round_trip(tmp_path):
    st_ = make_coherent(1.0 + 0.5j, FockBasisSpec(20))
    path = tmp_path / "f.csv"
    st_.to_csv(str(path))
    rows = np.loadtxt(path, delimiter=",", skiprows=1)
    assert np.allclose(rows[:, 1] + 1j * rows[:, 2], st_.amps, atol=1e-11)


@settings(max_examples=50, deadline=None)
@given(
    r=st.floats(0.0, 6.0),
    theta=st.floats(-math.pi, math.pi),
    gamma=st.floats(-20.0, 20.0),
)
def test_mcs_norm_and_photon_statistics(r, theta, gamma):
    alpha = r * cmath.exp(1j * theta)
    basis = FockBasisSpec.for_alpha(alpha)
    coh = make_coherent(alpha, basis)
    mcs = make_mcs(McsLabel(alpha, gamma), basis)
    assert mcs.norm == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(mcs.probabilities, coh.probabilities, atol=1e-15)
    assert isinstance(mcs, FieldState)
