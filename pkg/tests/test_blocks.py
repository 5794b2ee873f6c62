"""Junction coefficients and assembled trips.

The first- and second-order junction entries below were frozen from the
quadrature + mirrored-ladder extraction at n_max = 40 and double-checked
against the closed forms that exist for a handful of entries (the 2/pi^2
family at first order, the -n^2 pi^2 / 240 diagonal at second order).
"""

import math

import numpy as np
import pytest

from cavityent import blocks
from cavityent.bogoliubov import check_identities, mirror
from cavityent.series import H2Matrix

BOSON_FIRST = {
    # (m, n): (alpha1, beta1)
    (1, 2): (0.2865795841254588, 0.01061405867132745),
    (1, 4): (0.015010545724835645, 0.003242277876580471),
    (2, 3): (0.4963704001172458, 0.003970963200973913),
    (3, 4): (0.7019737518063783, 0.0020465707049994036),
}

BOSON_SECOND = {
    (1, 1): (-0.04112335168873378, 0.006332573985433059),
    (1, 3): (0.07677837912017516, 0.0034276062182429425),
    (2, 2): (-0.16449340667683351, 0.0015831434891675153),
    (2, 4): (0.17911224010306973, 0.0013267573438063768),
}

FERMION_FIRST = {
    (-1, 2): 0.007505272862412706,
    (0, 1): 0.20264236728470458,
    (1, 2): 0.4052847345694626,
}

FERMION_SECOND = {
    (1, 1): -0.10294420793169527,
    (0, 2): 0.045911161340887456,
    (1, -1): -0.0047494304936432094,
    (0, 0): -0.020697504578702806,
}


def _bidx(m):
    return m - 1


def _fidx(kappa, n_max=40):
    return kappa + n_max


def test_default_ladder():
    assert np.allclose(blocks.DEFAULT_LADDER, [0.02, 0.01, 0.005, 0.0025])


def test_boson_junction_frozen_entries(boson_junction):
    a1 = boson_junction.alpha.order(1)
    b1 = boson_junction.beta.order(1)
    for (m, n), (va, vb) in BOSON_FIRST.items():
        assert a1[_bidx(m), _bidx(n)] == pytest.approx(va, abs=1e-9)
        assert b1[_bidx(m), _bidx(n)] == pytest.approx(vb, abs=1e-9)
    a2 = boson_junction.alpha.order(2)
    b2 = boson_junction.beta.order(2)
    for (m, n), (va, vb) in BOSON_SECOND.items():
        assert a2[_bidx(m), _bidx(n)] == pytest.approx(va, abs=1e-9)
        assert b2[_bidx(m), _bidx(n)] == pytest.approx(vb, abs=1e-9)


def test_fermion_junction_frozen_entries(fermion_junction):
    a1 = fermion_junction.a.order(1)
    for (k, kp), v in FERMION_FIRST.items():
        assert a1[_fidx(k), _fidx(kp)] == pytest.approx(v, abs=1e-9)
    a2 = fermion_junction.a.order(2)
    for (k, kp), v in FERMION_SECOND.items():
        assert a2[_fidx(k), _fidx(kp)] == pytest.approx(v, abs=1e-9)


def test_first_order_closed_forms(boson_junction, fermion_junction):
    a1 = fermion_junction.a.order(1)
    assert a1[_fidx(1), _fidx(2)] == pytest.approx(4 / math.pi**2, abs=1e-9)
    assert a1[_fidx(0), _fidx(1)] == pytest.approx(2 / math.pi**2, abs=1e-9)
    a2 = boson_junction.alpha.order(2)
    for n in (1, 2, 3):
        assert a2[_bidx(n), _bidx(n)] == pytest.approx(
            -(n**2) * math.pi**2 / 240, abs=1e-9
        )


def test_junction_entries_are_real(boson_junction, fermion_junction):
    assert np.max(np.abs(boson_junction.alpha.data.imag)) == 0.0
    assert np.max(np.abs(boson_junction.beta.data.imag)) == 0.0
    assert np.max(np.abs(fermion_junction.a.data.imag)) == 0.0


def test_boson_parity_selection(boson_junction):
    modes = blocks.boson_modes(40)
    total = modes[:, None] + modes[None, :]
    diff = modes[:, None] - modes[None, :]
    b1 = boson_junction.beta.order(1)
    assert np.max(np.abs(b1[total % 2 == 0])) <= 1e-10
    a1 = boson_junction.alpha.order(1)
    off_even = (diff % 2 == 0) & (diff != 0)
    assert np.max(np.abs(a1[off_even])) <= 1e-10
    assert np.max(np.abs(np.diag(a1))) <= 1e-12


def test_fermion_parity_selection(fermion_junction):
    modes = blocks.fermion_modes(40)
    same_parity = (modes[:, None] - modes[None, :]) % 2 == 0
    a1 = fermion_junction.a.order(1)
    assert np.max(np.abs(a1[same_parity])) <= 1e-10


def test_fermion_first_order_antisymmetric(fermion_junction):
    a1 = fermion_junction.a.order(1)
    assert np.max(np.abs(a1 + a1.T)) <= 1e-10


def test_beta_decays_along_columns(boson_junction):
    b1 = np.abs(boson_junction.beta.order(1))
    for m in (1, 2):
        tail = [b1[_bidx(q), _bidx(m)] for q in range(2 * m + 1, 31)]
        tail = [v for v in tail if v > 1e-12]
        assert all(b < a for a, b in zip(tail, tail[1:]))


def test_mirror_action_on_junction(boson_junction):
    m = mirror(boson_junction)
    # every first-order entry sits on an odd-parity slot, so negating h
    # flips the whole order; second order is even and survives unchanged
    assert np.allclose(m.beta.order(1), -boson_junction.beta.order(1), atol=1e-14)
    assert np.allclose(m.alpha.order(1), -boson_junction.alpha.order(1), atol=1e-14)
    assert np.allclose(m.alpha.order(2), boson_junction.alpha.order(2), atol=1e-14)
    check_identities(m, tol=5e-8, window=blocks.interior_window("boson", 40))


def test_junction_gate_passes(boson_junction, fermion_junction):
    for species, j in (("boson", boson_junction), ("fermion", fermion_junction)):
        check_identities(j, tol=5e-8, window=blocks.interior_window(species, 40))


def test_junction_is_memoized(boson_junction):
    assert blocks.junction("boson", 40) is boson_junction


def test_interior_window():
    assert blocks.interior_window("boson", 40) == (1, 20)
    lo, hi = blocks.interior_window("fermion", 40)
    assert (lo, hi) == (-20, 20)


def test_accelerated_phases_at_unit_period():
    p = blocks.accelerated_phases("boson", 12, 1.0)
    assert np.allclose(np.diag(p.alpha.order(0)), 1.0, atol=1e-13)
    pf = blocks.accelerated_phases("fermion", 12, 1.0)
    assert np.allclose(np.diag(pf.a.order(0)), -1.0, atol=1e-13)


def test_trip_diagonal_mixing_vanishes(boson_trip, fermion_trip):
    assert np.max(np.abs(np.diag(boson_trip.alpha.order(1)))) <= 1e-14
    assert np.max(np.abs(np.diag(boson_trip.beta.order(1)))) <= 1e-14
    assert np.max(np.abs(np.diag(fermion_trip.a.order(1)))) <= 1e-14


def test_trip_interference_amplitudes(boson_junction, boson_trip):
    u = 0.3
    a1_j = boson_junction.alpha.order(1)
    b1_j = boson_junction.beta.order(1)
    a1_t = boson_trip.alpha.order(1)
    b1_t = boson_trip.beta.order(1)
    for m, n in [(1, 2), (1, 4), (2, 3)]:
        i, j = _bidx(m), _bidx(n)
        assert abs(b1_t[i, j]) == pytest.approx(
            2 * abs(b1_j[i, j]) * abs(math.sin(math.pi * (m + n) * u)), rel=1e-10
        )
        assert abs(a1_t[i, j]) == pytest.approx(
            2 * abs(a1_j[i, j]) * abs(math.sin(math.pi * (m - n) * u)), rel=1e-10
        )


def test_fermion_trip_interference_amplitudes(fermion_junction, fermion_trip):
    u = 0.3
    a1_j = fermion_junction.a.order(1)
    a1_t = fermion_trip.a.order(1)
    for k, kp in [(-1, 2), (0, 1)]:
        i, j = _fidx(k), _fidx(kp)
        assert abs(a1_t[i, j]) == pytest.approx(
            2 * abs(a1_j[i, j]) * abs(math.sin(math.pi * (k - kp) * u)), rel=1e-10
        )


def test_boson_trip_is_periodic(boson_trip):
    shifted = blocks.one_way_trip("boson", 40, 1.3)
    assert np.allclose(shifted.alpha.data, boson_trip.alpha.data, atol=1e-12)
    assert np.allclose(shifted.beta.data, boson_trip.beta.data, atol=1e-12)


def test_fermion_trip_flips_sign_after_one_period(fermion_trip):
    shifted = blocks.one_way_trip("fermion", 40, 1.3)
    assert np.allclose(shifted.a.data, -fermion_trip.a.data, atol=1e-12)


def test_trip_at_unit_u_is_identity_in_interior():
    t = blocks.one_way_trip("boson", 40, 1.0)
    modes = blocks.boson_modes(40)
    lo, hi = blocks.interior_window("boson", 40)
    sel = (modes >= lo) & (modes <= hi)
    dev = (t.alpha - H2Matrix.identity(40)).data[:, sel][:, :, sel]
    assert np.max(np.abs(dev[:2])) < 1e-10
    assert np.max(np.abs(dev[2])) < 1e-5  # truncated-ladder tail
    assert np.max(np.abs(t.beta.data[:, sel][:, :, sel])) < 1e-5


def test_scenario_single_arc_matches_trip(boson_trip):
    s = blocks.scenario("boson", 40, [("arc", 0.3)])
    assert np.allclose(s.alpha.data, boson_trip.alpha.data)
    assert np.allclose(s.beta.data, boson_trip.beta.data)


def test_scenario_chains_in_order(fermion_trip):
    from cavityent.bogoliubov import compose

    theta = 0.7
    s = blocks.scenario("fermion", 40, [("coast", theta), ("arc", 0.3)])
    want = compose(fermion_trip, blocks.coast_phases("fermion", 40, theta))
    assert np.allclose(s.a.data, want.a.data, atol=1e-14)


def test_scenario_rejects_unknown_segment():
    with pytest.raises(ValueError):
        blocks.scenario("boson", 12, [("drift", 0.1)])
    with pytest.raises(ValueError):
        blocks.scenario("boson", 12, [])
