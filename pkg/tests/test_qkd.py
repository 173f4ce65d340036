import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from satcv.atmosphere import BeamWanderParams, FadingDistribution
from satcv.errors import (
    DomainError,
    HeraldImpossibleError,
    PreconditionError,
    ProtocolError,
    UnsupportedConfigurationError,
)
from satcv.fock import tmsv_fock
from satcv.gaussian import (
    CovarianceState,
    log_negativity_gaussian,
    single_mode_transfer_cov,
    symplectic_eigenvalues,
    tmsv_cov,
    two_mode_transfer_cov,
)
from satcv.qkd import (
    ChannelPoint,
    NonGaussianSource,
    ProtocolConfig,
    RateResult,
    SwapConfig,
    ensemble_covariance,
    entanglement_fading,
    entanglement_swap,
    keyrate_collective,
    keyrate_fading,
    keyrate_fixed,
    log_negativity_standard_form,
    modulation_variance,
    nongauss_keyrate,
    optimize_swap_gain,
    optimize_threshold,
    swap_fading,
)

ALL_PROTOCOLS = [
    ProtocolConfig(s, d, r)
    for s, d, r in itertools.product(("coherent", "squeezed"), ("homodyne", "heterodyne"), ("direct", "reverse"))
]
COH_HOM_RR = ProtocolConfig("coherent", "homodyne", "reverse")
WANDER = FadingDistribution.from_beam_wander(BeamWanderParams(0.7, 1.0, 0.8))


def g_bits(x):
    if x <= 1:
        return 0.0
    a, b = (x + 1) / 2, (x - 1) / 2
    return a * math.log2(a) - b * math.log2(b)


def closed_form_coherent_homodyne_reverse(v, tau, omega):
    """Textbook GG02 rate with reverse reconciliation, ideal detector, excess noise from omega."""
    chi = (1 - tau) * omega / tau
    i_ab = 0.5 * math.log2((v + chi) / (1 + chi))
    a = v * v * (1 - 2 * tau) + 2 * tau + tau * tau * (v + chi) ** 2
    b = tau * tau * (v * chi + 1) ** 2
    disc = math.sqrt(a * a - 4 * b)
    l1, l2 = math.sqrt((a + disc) / 2), math.sqrt((a - disc) / 2)
    l3 = math.sqrt(v * (1 + v * chi) / (v + chi))
    return i_ab, g_bits(l1) + g_bits(l2) - g_bits(l3)


# ---------------------------------------------------------------------------
# protocol plumbing


def test_protocol_validation_and_eb_mapping():
    assert ProtocolConfig("squeezed").alice_kind == "homodyne"
    assert ProtocolConfig("coherent").alice_kind == "heterodyne"
    with pytest.raises(ProtocolError):
        ProtocolConfig("squeezed", alice_detection="heterodyne")
    with pytest.raises(ProtocolError):
        ProtocolConfig("cat")
    with pytest.raises(ProtocolError):
        ProtocolConfig(efficiency=0.0)
    with pytest.raises(DomainError):
        ChannelPoint(1.2)
    with pytest.raises(DomainError):
        ChannelPoint(0.5, 0.9)


def test_modulation_variance_helpers():
    assert modulation_variance(5.0, "squeezed") == pytest.approx(4.8)
    assert modulation_variance(5.0, "coherent") == pytest.approx(4.0)
    with pytest.raises(DomainError):
        modulation_variance(0.5, "coherent")


def test_rate_result_serialises():
    r = keyrate_fixed(10.0, ChannelPoint(0.5, 1.0), COH_HOM_RR)
    d = json.loads(r.to_json())
    assert set(d) >= {"key_rate", "key_rate_raw", "mutual_info", "holevo", "lower_bound", "scenario"}
    assert d["key_rate"] == r.key_rate
    with pytest.raises(DomainError):
        RateResult(-0.1, -0.1, 0.0, 0.1)


# ---------------------------------------------------------------------------
# single channel


@pytest.mark.parametrize("tau", [0.05, 0.25, 0.6, 0.95])
@pytest.mark.parametrize("omega", [1.0, 1.05, 1.3])
def test_matches_closed_form(tau, omega):
    v = 20.0
    r = keyrate_fixed(v, ChannelPoint(tau, omega), COH_HOM_RR)
    i_ab, holevo = closed_form_coherent_homodyne_reverse(v, tau, omega)
    assert r.mutual_info == pytest.approx(i_ab, abs=1e-10)
    assert r.holevo == pytest.approx(holevo, abs=1e-9)


def test_lossless_channel_decouples_eve():
    cm = CovarianceState(np.zeros(4), tmsv_cov(math.cosh(1.0)))
    r = keyrate_collective(cm, COH_HOM_RR)
    assert r.holevo == 0.0
    assert r.key_rate == pytest.approx(r.mutual_info)
    assert r.key_rate > 0


def test_efficiency_scales_mutual_information_only():
    cm = single_mode_transfer_cov(8.0, 0.4, 1.02)
    full = keyrate_collective(cm, COH_HOM_RR)
    part = keyrate_collective(cm, ProtocolConfig(efficiency=0.9))
    assert part.key_rate_raw == pytest.approx(0.9 * full.mutual_info - full.holevo)
    assert part.key_rate <= full.key_rate


def test_six_db_reverse_reconciliation_is_positive():
    assert keyrate_fixed(20.0, ChannelPoint(0.25, 1.0), COH_HOM_RR).key_rate > 0


def test_fixed_channel_edge_cases():
    zero = keyrate_fixed(20.0, ChannelPoint(0.0, 1.0), COH_HOM_RR)
    assert zero.key_rate == 0.0
    assert zero.selection_probability == 1.0
    ident = keyrate_fixed(5.0, ChannelPoint(1.0, 1.0), COH_HOM_RR)
    pristine = keyrate_collective(CovarianceState(np.zeros(4), tmsv_cov(5.0)), COH_HOM_RR)
    assert ident.key_rate == pytest.approx(pristine.key_rate, abs=1e-12)


@pytest.mark.parametrize("protocol", ALL_PROTOCOLS, ids=lambda p: f"{p.state_type}-{p.detection}-{p.reconciliation}")
def test_rate_non_increasing_in_noise(protocol):
    for v in (3.0, 20.0):
        rates = [keyrate_fixed(v, ChannelPoint(0.6, w), protocol).key_rate for w in np.linspace(1.0, 2.0, 21)]
        assert np.all(np.diff(rates) <= 1e-12)
        lossy = [keyrate_fixed(v, ChannelPoint(t, 1.05), protocol).key_rate for t in np.linspace(0.05, 1.0, 20)]
        assert np.all(np.diff(lossy) >= -1e-12)


@settings(max_examples=50, deadline=None)
@given(
    st.floats(1.01, 40.0),
    st.floats(0.0, 1.0),
    st.floats(1.0, 3.0),
    st.sampled_from(["coherent", "squeezed"]),
    st.sampled_from(["homodyne", "heterodyne"]),
)
def test_reference_symmetry_and_flooring(v, tau, omega, state, det):
    direct = keyrate_fixed(v, ChannelPoint(tau, omega), ProtocolConfig(state, det, "direct"))
    reverse = keyrate_fixed(v, ChannelPoint(tau, omega), ProtocolConfig(state, det, "reverse"))
    assert direct.mutual_info == pytest.approx(reverse.mutual_info, abs=1e-9)
    assert direct.key_rate >= 0 and reverse.key_rate >= 0
    assert direct.key_rate == pytest.approx(max(0.0, direct.key_rate_raw))


@settings(max_examples=30, deadline=None)
@given(st.floats(1.01, 40.0), st.sampled_from(ALL_PROTOCOLS))
def test_purification_at_identity_channel(v, protocol):
    assert abs(keyrate_fixed(v, ChannelPoint(1.0, 1.0), protocol).holevo) < 1e-9


@settings(max_examples=30, deadline=None)
@given(st.floats(1.01, 40.0), st.floats(0.05, 1.0), st.floats(1.0, 2.0), st.floats(0.01, 1.0))
def test_efficiency_monotone(v, tau, omega, xi):
    cm = single_mode_transfer_cov(v, tau, omega)
    low = keyrate_collective(cm, ProtocolConfig(efficiency=xi))
    full = keyrate_collective(cm, ProtocolConfig(efficiency=1.0))
    assert low.key_rate <= full.key_rate + 1e-12


# ---------------------------------------------------------------------------
# fading


@pytest.mark.parametrize("protocol", ALL_PROTOCOLS, ids=lambda p: f"{p.state_type}-{p.detection}-{p.reconciliation}")
def test_point_mass_reduces_to_fixed_channel(protocol):
    for eta in (0.3, 0.8):
        fading = keyrate_fading(12.0, FadingDistribution.point_mass(eta), 1.1, protocol)
        fixed = keyrate_fixed(12.0, ChannelPoint(eta * eta, 1.1), protocol)
        assert fading.key_rate == pytest.approx(fixed.key_rate, abs=1e-8)


def test_postselection_at_zero_equals_per_eta():
    a = keyrate_fading(20.0, WANDER, 1.02, COH_HOM_RR)
    b = keyrate_fading(20.0, WANDER, 1.02, COH_HOM_RR, scenario="postselected", eta_th=0.0)
    assert a.key_rate == b.key_rate
    assert b.selection_probability == pytest.approx(1.0)
    c = keyrate_fading(20.0, WANDER, 1.02, COH_HOM_RR, scenario="postselected", eta_th=0.8)
    assert c.selection_probability < 1.0


def test_ensemble_never_beats_per_eta():
    rng = np.random.default_rng(3)
    for _ in range(6):
        wander = BeamWanderParams(float(rng.uniform(0.3, 1.5)), 1.0, float(rng.uniform(0.6, 2.0)))
        dist = FadingDistribution.from_beam_wander(wander)
        v, omega = float(rng.uniform(2.0, 30.0)), float(rng.uniform(1.0, 1.2))
        protocol = ALL_PROTOCOLS[int(rng.integers(len(ALL_PROTOCOLS)))]
        ens = keyrate_fading(v, dist, omega, protocol, scenario="ensemble", n_bins=100)
        per = keyrate_fading(v, dist, omega, protocol, n_bins=100)
        assert ens.lower_bound
        assert ens.key_rate <= per.key_rate + 1e-12


def test_ensemble_covariance_moments():
    v = 10.0
    cov = ensemble_covariance(v, FadingDistribution.point_mass(0.7), 1.3).cov
    assert np.allclose(cov, single_mode_transfer_cov(v, 0.49, 1.3), atol=1e-12)


def test_fading_grid_refinement():
    coarse = keyrate_fading(20.0, WANDER, 1.02, COH_HOM_RR, n_bins=200).key_rate
    fine = keyrate_fading(20.0, WANDER, 1.02, COH_HOM_RR, n_bins=400).key_rate
    assert abs(coarse - fine) < 1e-3


def test_unnormalised_distribution_rejected():
    class Leaky:
        def bins(self, n):
            return np.array([0.5]), np.array([0.9])

    with pytest.raises(DomainError):
        keyrate_fading(5.0, Leaky(), 1.0, COH_HOM_RR)


def test_signed_integration_flag():
    signed = keyrate_fading(20.0, WANDER, 1.3, COH_HOM_RR, signed=True)
    floored = keyrate_fading(20.0, WANDER, 1.3, COH_HOM_RR)
    assert signed.key_rate <= floored.key_rate


# ---------------------------------------------------------------------------
# post-selection threshold


def test_threshold_zero_for_pure_loss():
    eta_th, res = optimize_threshold(20.0, WANDER, 1.0, COH_HOM_RR)
    assert eta_th == 0.0
    assert res.key_rate == pytest.approx(keyrate_fading(20.0, WANDER, 1.0, COH_HOM_RR).key_rate)


def test_threshold_on_point_mass_follows_sign():
    good = FadingDistribution.point_mass(0.9)
    assert optimize_threshold(20.0, good, 1.0, COH_HOM_RR)[0] == 0.0
    bad = FadingDistribution.point_mass(0.2)
    assert keyrate_fixed(20.0, ChannelPoint(0.04, 1.3), COH_HOM_RR).key_rate_raw < 0
    eta_th, res = optimize_threshold(20.0, bad, 1.3, COH_HOM_RR)
    assert eta_th > 0.2
    assert res.key_rate == 0.0
    assert res.selection_probability == 0.0


# ---------------------------------------------------------------------------
# entanglement over fading


def test_entanglement_point_mass_and_vacuum():
    pm = FadingDistribution.point_mass(0.8)
    v = math.cosh(1.0)
    e = entanglement_fading(v, pm)
    assert e.value == pytest.approx(log_negativity_gaussian(single_mode_transfer_cov(v, 0.64)), abs=1e-12)
    for scenario in ("per_eta", "ensemble"):
        assert entanglement_fading(1.0, WANDER, scenario=scenario, n_bins=50).value == 0.0
        assert entanglement_fading(lambda: tmsv_fock(0.0, 4), WANDER, scenario=scenario, n_bins=20).value == pytest.approx(0.0, abs=1e-12)
    assert entanglement_fading(v, WANDER, scenario="ensemble").label == "gaussian_entanglement_only"


def test_entanglement_fock_agrees_with_gaussian():
    r = 0.3
    gauss = entanglement_fading(math.cosh(2 * r), WANDER, n_bins=30).value
    fock = entanglement_fading(lambda: tmsv_fock(r, 16), WANDER, n_bins=30).value
    assert fock == pytest.approx(gauss, abs=1e-4)


def test_entanglement_two_channels_vs_single():
    # equal split of the same total loss over two arms keeps more log-negativity here
    v = math.cosh(1.0)
    table = []
    for total in (0.9, 0.5, 0.1, 0.01):
        single = log_negativity_gaussian(single_mode_transfer_cov(v, total))
        split = log_negativity_gaussian(two_mode_transfer_cov(v, math.sqrt(total), math.sqrt(total)))
        table.append((total, single, split))
    assert all(split >= single for _, single, split in table)
    pm = FadingDistribution.point_mass(0.8)
    both = entanglement_fading(v, pm, second=pm).value
    assert both == pytest.approx(log_negativity_gaussian(two_mode_transfer_cov(v, 0.64, 0.64)), abs=1e-12)


def test_entropy_measure_needs_pure_state():
    pm = FadingDistribution.point_mass(1.0)
    v = math.cosh(1.0)
    assert entanglement_fading(v, pm, measure="entropy_pure").value == pytest.approx(0.95138951389, abs=1e-9)
    with pytest.raises(PreconditionError):
        entanglement_fading(v, FadingDistribution.point_mass(0.5), measure="entropy_pure")


def test_log_negativity_standard_form_vectorised():
    v = math.cosh(1.0)
    vals = log_negativity_standard_form([v, 1.0], [v, 1.0], [math.sinh(1.0), 0.0])
    assert vals == pytest.approx([1 / math.log(2), 0.0])


# ---------------------------------------------------------------------------
# swapping


def test_swap_examples():
    assert log_negativity_gaussian(entanglement_swap(SwapConfig(0.0, 0.0)).cov) == 0.0
    r = 0.4
    out = log_negativity_gaussian(entanglement_swap(SwapConfig(r, r)).cov)
    assert 0 < out < 2 * r / math.log(2)
    assert log_negativity_gaussian(entanglement_swap(SwapConfig(r, r, tau_a=0.0)).cov) == 0.0


def test_optimal_gains_closed_form():
    r = 0.2
    g = math.tanh(2 * r) / math.sqrt(2)
    gains = optimize_swap_gain(SwapConfig(r, r)).per_party()
    assert gains["a"] == pytest.approx((g, g), abs=1e-12)
    assert gains["b"] == pytest.approx((g, -g), abs=1e-12)


def test_user_gains():
    cfg = SwapConfig(0.3, 0.3, 0.8, 0.7)
    opt = optimize_swap_gain(cfg).per_party()
    same = entanglement_swap(SwapConfig(0.3, 0.3, 0.8, 0.7, gains=opt))
    assert np.allclose(same.cov, entanglement_swap(cfg).cov, atol=1e-12)
    off = entanglement_swap(SwapConfig(0.3, 0.3, 0.8, 0.7, gains={"a": (0.0, 0.0), "b": (0.0, 0.0)}))
    assert log_negativity_gaussian(off.cov) <= log_negativity_gaussian(entanglement_swap(cfg).cov)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 1.2), st.floats(0.0, 1.2), st.floats(0.0, 1.0), st.floats(0.0, 1.0), st.floats(1.0, 2.0))
def test_swap_physical_and_bounded_by_arms(r_a, r_b, tau_a, tau_b, v_n):
    out = entanglement_swap(SwapConfig(r_a, r_b, tau_a, tau_b, v_n))
    assert symplectic_eigenvalues(out.cov)[0] >= 1 - 1e-9
    arm_a = log_negativity_gaussian(single_mode_transfer_cov(math.cosh(2 * r_a), tau_a, v_n))
    arm_b = log_negativity_gaussian(single_mode_transfer_cov(math.cosh(2 * r_b), tau_b, v_n))
    assert log_negativity_gaussian(out.cov) <= min(arm_a, arm_b) + 1e-9


def test_swap_fading_point_masses():
    pm = FadingDistribution.point_mass(0.9)
    cfg = SwapConfig(0.4, 0.4)
    fixed = log_negativity_gaussian(entanglement_swap(SwapConfig(0.4, 0.4, 0.81, 0.81)).cov)
    assert swap_fading(cfg, pm, pm) == pytest.approx(fixed, abs=1e-12)


# ---------------------------------------------------------------------------
# non-Gaussian key rates


def test_nongauss_errors():
    with pytest.raises(HeraldImpossibleError):
        nongauss_keyrate(NonGaussianSource(0.0, "subtract"), WANDER, 1.0, COH_HOM_RR, n_bins=10)
    with pytest.raises(UnsupportedConfigurationError):
        nongauss_keyrate(NonGaussianSource(0.3), WANDER, 1.2, COH_HOM_RR)


def test_nongauss_plain_source_matches_gaussian_fading():
    r = 0.3
    ours = nongauss_keyrate(NonGaussianSource(r, cutoff=16), WANDER, 1.0, COH_HOM_RR, n_bins=40)
    ref = keyrate_fading(math.cosh(2 * r), WANDER, 1.0, COH_HOM_RR, n_bins=40)
    assert ours.lower_bound
    assert ours.key_rate == pytest.approx(ref.key_rate, abs=1e-6)


def test_nongauss_subtraction_point_mass_recorded():
    # per-pulse rate rises with subtraction at eta = 0.9 but the herald probability dominates
    pm = FadingDistribution.point_mass(0.9)
    plain = nongauss_keyrate(NonGaussianSource(0.3), pm, 1.0, COH_HOM_RR)
    sub_src = NonGaussianSource(0.3, "subtract", bs_tau=0.95)
    sub = nongauss_keyrate(sub_src, pm, 1.0, COH_HOM_RR)
    p_c = sub_src().creation_probability
    assert plain.key_rate == pytest.approx(0.0941639551, abs=1e-8)
    assert sub.key_rate / p_c == pytest.approx(0.1859649086, abs=1e-8)
    assert p_c == pytest.approx(2.6546623598e-4, rel=1e-8)
    assert sub.key_rate < plain.key_rate
