"""Tests for the canonical-form reduction of three-qubit states."""

import numpy as np
import pytest

from crsp.canonical import (
    CanonicalThreeQubit,
    canonical_state,
    decompose,
    load_channel,
    save_channel,
    verify_canonical,
)
from crsp.errors import InvalidCoefficientsError
from crsp.qcore import PureState, apply_local, fidelity, haar_random_state

INV2 = 1.0 / np.sqrt(2.0)
INV3 = 1.0 / np.sqrt(3.0)


def state_from_amplitudes(amps):
    return PureState(("c", "a", "b"), np.asarray(amps, dtype=np.complex128))


def ghz():
    amp = np.zeros(8)
    amp[0] = amp[7] = INV2
    return state_from_amplitudes(amp)


def transformed(state, channel):
    out = apply_local(state, channel.u_c, (state.wires[0],))
    out = apply_local(out, channel.u_a, (state.wires[1],))
    return apply_local(out, channel.u_b, (state.wires[2],))


def test_canonical_state_ghz():
    state = canonical_state([INV2, 0, 0, 0, INV2], 0.0)
    np.testing.assert_allclose(state.amplitudes, ghz().amplitudes, atol=1e-15)


def test_canonical_state_basis_and_family_member():
    state = canonical_state([1, 0, 0, 0, 0], 0.0)
    np.testing.assert_allclose(np.abs(state.amplitudes[0]), 1.0)
    member = canonical_state([0.5, 0.5, 0, 0, INV2], 0.0)
    np.testing.assert_allclose(member.amplitudes[[0, 4, 7]], [0.5, 0.5, INV2],
                               atol=1e-15)
    assert np.all(member.amplitudes[[1, 2, 3, 5, 6]] == 0)


def test_canonical_state_places_phase_on_second_slot():
    state = canonical_state([0.5, 0.5, 0.5, 0.5, 0.0], 1.2)
    assert np.angle(state.amplitudes[4]) == pytest.approx(1.2, abs=1e-12)
    assert state.amplitudes[0] == pytest.approx(0.5)


def test_coefficient_validation():
    with pytest.raises(InvalidCoefficientsError):
        CanonicalThreeQubit.from_coefficients([0.9, 0, 0, 0, 0])
    with pytest.raises(InvalidCoefficientsError):
        CanonicalThreeQubit.from_coefficients([np.nan, 0, 0, 0, 1.0])
    with pytest.raises(InvalidCoefficientsError):
        CanonicalThreeQubit.from_coefficients([0.5, 0.5, 0.5, 0.5, 0.0], mu=7.0)


def test_decompose_ghz():
    channel = decompose(ghz())
    np.testing.assert_allclose(channel.a, [INV2, 0, 0, 0, INV2], atol=1e-9)
    assert channel.mu == pytest.approx(0.0, abs=1e-9)
    assert channel.source_fidelity >= 1.0 - 1e-9


def test_decompose_basis_state():
    channel = decompose(state_from_amplitudes([1, 0, 0, 0, 0, 0, 0, 0]))
    np.testing.assert_allclose(channel.a, [1, 0, 0, 0, 0], atol=1e-9)
    assert channel.degenerate


def test_decompose_w_state():
    amp = np.zeros(8)
    amp[4] = amp[2] = amp[1] = INV3
    channel = decompose(state_from_amplitudes(amp))
    np.testing.assert_allclose(channel.a, [INV3, 0, INV3, INV3, 0], atol=1e-9)
    assert channel.mu == pytest.approx(0.0, abs=1e-9)
    assert channel.source_fidelity >= 1.0 - 1e-9


def test_verify_canonical_mismatch_gives_overlap():
    wrong = CanonicalThreeQubit.from_coefficients([1, 0, 0, 0, 0])
    assert verify_canonical(ghz(), wrong) == pytest.approx(0.5, abs=1e-12)


def test_decompose_haar_sweep():
    rng = np.random.default_rng(30)
    for _ in range(200):
        state = haar_random_state(3, seed=int(rng.integers(1 << 31)))
        channel = decompose(state)
        assert channel.source_fidelity >= 1.0 - 1e-9
        assert verify_canonical(state, channel) >= 1.0 - 1e-9
        assert 0.0 <= channel.mu <= np.pi + 1e-12
        norm = sum(v * v for v in channel.a)
        assert norm == pytest.approx(1.0, abs=1e-10)


def test_transformed_support_and_phases():
    # After the local unitaries the state must live on the five canonical
    # slots with real-positive amplitudes away from the phase-carrying one.
    rng = np.random.default_rng(31)
    for _ in range(100):
        state = haar_random_state(3, seed=int(rng.integers(1 << 31)))
        channel = decompose(state)
        amps = transformed(state, channel).amplitudes
        assert np.max(np.abs(amps[[1, 2, 3]])) <= 1e-9
        for idx in (0, 5, 6, 7):
            if abs(amps[idx]) > 1e-9:
                assert abs(np.angle(amps[idx])) <= 1e-6
        if abs(amps[4]) > 1e-9:
            assert abs(np.angle(amps[4]) - channel.mu) % (2 * np.pi) <= 1e-6


def test_round_trip_coefficients():
    rng = np.random.default_rng(32)
    for _ in range(200):
        raw = rng.uniform(0.05, 1.0, size=5)
        raw /= np.linalg.norm(raw)
        while np.min(raw) <= 0.05:
            raw = rng.uniform(0.05, 1.0, size=5)
            raw /= np.linalg.norm(raw)
        mu = rng.uniform(0.05, np.pi - 0.05)
        channel = decompose(canonical_state(raw, mu))
        np.testing.assert_allclose(channel.a, raw, atol=1e-8)
        assert channel.mu == pytest.approx(mu, abs=1e-8)


def test_local_unitary_invariance():
    rng = np.random.default_rng(33)
    for _ in range(40):
        state = haar_random_state(3, seed=int(rng.integers(1 << 31)))
        base = decompose(state)
        rotated = state
        for wire in state.wires:
            raw = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            q, _ = np.linalg.qr(raw)
            rotated = apply_local(rotated, q, (wire,))
        again = decompose(rotated)
        np.testing.assert_allclose(again.a, base.a, atol=1e-8)
        assert again.mu == pytest.approx(base.mu, abs=1e-7)


def test_mu_convention_when_phase_slot_empty():
    # Decomposing may legitimately return an alternate form with a nonzero
    # phase slot; the convention only pins mu to 0 when that slot is empty
    # in the form actually returned.
    rng = np.random.default_rng(34)
    for _ in range(30):
        raw = rng.uniform(0.1, 1.0, size=4)
        amps = np.zeros(8, dtype=np.complex128)
        amps[[0, 5, 6, 7]] = raw / np.linalg.norm(raw)
        channel = decompose(state_from_amplitudes(amps))
        assert channel.source_fidelity >= 1.0 - 1e-9
        if channel.a[1] < 1e-10:
            assert channel.mu == 0.0
    forced = CanonicalThreeQubit.from_coefficients([0.6, 0, 0, 0, 0.8], mu=1.0)
    assert forced.mu == 0.0


def test_degenerate_flag_for_product_states():
    qubit = np.array([0.6, 0.8])
    pair = haar_random_state(2, seed=44, wires=("a", "b"))
    amps = np.kron(qubit, pair.amplitudes)
    channel = decompose(state_from_amplitudes(amps))
    assert channel.degenerate
    assert channel.source_fidelity >= 1.0 - 1e-9
    generic = decompose(haar_random_state(3, seed=45))
    assert not generic.degenerate


def test_channel_json_round_trip(tmp_path):
    channel = decompose(haar_random_state(3, seed=46))
    path = tmp_path / "chan.json"
    save_channel(channel, path)
    loaded = load_channel(path)
    np.testing.assert_allclose(loaded.a, channel.a, atol=1e-15)
    assert loaded.mu == channel.mu
    assert loaded.source_fidelity == channel.source_fidelity
    np.testing.assert_allclose(loaded.u_c.matrix, channel.u_c.matrix, atol=1e-15)


def test_canonical_state_from_channel_object():
    channel = CanonicalThreeQubit.from_coefficients([0.5, 0.5, 0.5, 0.5, 0.0], mu=0.3)
    direct = canonical_state(channel)
    explicit = canonical_state([0.5, 0.5, 0.5, 0.5, 0.0], 0.3)
    assert fidelity(direct, explicit) == pytest.approx(1.0, abs=1e-12)
