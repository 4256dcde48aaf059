import math

import numpy as np
import pytest

from jctransfer.dynamics import AtomFieldState, JcParams, attractor_time
from jctransfer.fock import FockBasisSpec, make_coherent
from jctransfer.metrics import (
    DissipationParams,
    dissipation_factor,
    fidelity_peak,
    loschmidt_echo,
    read_fidelity,
    write_fidelity,
)
from jctransfer.protocols import QubitState, target_write_state


@pytest.fixture(scope="module")
def setup():
    field = make_coherent(5.0, FockBasisSpec.for_alpha(5.0))
    return field, JcParams(1.0), QubitState.normalized(1.0, 1.0)


def test_write_fidelity_zero_time(setup):
    field, p, q = setup
    # initial state vs attractor-like target: the atom overlap alone bounds it
    assert 0.0 <= write_fidelity(0.0, q, field, p) <= 1.0


def test_read_equals_write_pointwise(setup):
    field, p, q = setup
    start = AtomFieldState.product(q.c1, q.c2, field)
    target = target_write_state(q, field, p)
    for t in np.linspace(0.0, 40.0, 13):
        assert read_fidelity(t, target, start, p) == pytest.approx(write_fidelity(t, q, field, p), abs=1e-12)


def test_fidelity_peak_on_known_curve():
    tau = 3.0
    t0 = 1.0137 * tau
    t_m, f_m = fidelity_peak(lambda t: math.exp(-((t - t0) ** 2)), tau)
    assert t_m == pytest.approx(t0, abs=1e-6)
    assert f_m == pytest.approx(1.0, abs=1e-12)
    # peak outside the window is clamped to the edge
    t_m, _ = fidelity_peak(lambda t: -t, tau)
    assert t_m == pytest.approx(0.8 * tau)


def test_loschmidt_starts_at_one(setup):
    field, p, q = setup
    assert loschmidt_echo(q, field, 0.0, p) == pytest.approx(1.0, abs=1e-12)
    tau = attractor_time(field, p)
    assert 0.9 < loschmidt_echo(q, field, tau, p) <= 1.0 + 1e-12


def test_dissipation_factor_depends_on_ratio_only():
    a = dissipation_factor(DissipationParams(0.01, 1.0, 25.0))
    b = dissipation_factor(DissipationParams(10.0, 1000.0, 25.0))
    assert a == pytest.approx(b, rel=1e-14)
    assert a == pytest.approx(math.exp(-4 * math.pi * 0.01 * 125.0))
    assert dissipation_factor(DissipationParams(0.0, 1.0, 25.0)) == 1.0
    with pytest.raises(ValueError):
        DissipationParams(-1.0, 1.0, 1.0)
