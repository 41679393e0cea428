import math

import numpy as np
import pytest

from cfleo import montecarlo as mc
from cfleo.channel import path_loss
from cfleo.config import NetworkConfig
from cfleo.errors import ParameterError
from cfleo.geometry import mean_interferer_count, mean_service_count

CFG = NetworkConfig.reference()
TH = np.arange(-5.0, 16.0)


def _one_link(cfg, r=800.0, amp=1.0, phase=0.3, users=1):
    return mc.Links(1, np.array([0]), np.array([r]), np.array([True]), np.array([amp]),
                    np.array([phase]), np.array([users]))


def test_empty_constellation_snapshot():
    snap = mc.draw_snapshot(NetworkConfig.reference(sap_density=0.0), np.random.default_rng(0))
    assert snap.service_saps == [] and snap.interfering_saps == []
    assert mc.sinr_of(snap, CFG).sinr == 0.0


def test_zenith_dome_has_no_interferers():
    cfg = CFG.with_geometry(dome_angle_rad=math.pi / 2)
    rng = np.random.default_rng(1)
    assert all(not mc.draw_snapshot(cfg, rng).interfering_saps for _ in range(200))


def test_snapshot_points_sit_at_sampled_distances():
    snap = mc.draw_snapshot(CFG, np.random.default_rng(2))
    re = CFG.geometry.earth_radius_km
    ut = np.array([0.0, 0.0, re])
    d = [np.linalg.norm(p.position_km - ut) for p in snap.service_saps + snap.interfering_saps]
    ref = np.concatenate((snap.links.distance_km[snap.links.serving],
                          snap.links.distance_km[~snap.links.serving]))
    np.testing.assert_allclose(d, ref, rtol=1e-9)
    assert len(snap.users_per_sap) == len(snap.service_saps)
    assert min(snap.users_per_sap) >= 1


def test_mean_service_and_interferer_counts():
    links = mc.draw_links(CFG, 10_000, np.random.default_rng(3))
    n_srv = np.bincount(links.trial[links.serving], minlength=links.n_trials)
    n_int = np.bincount(links.trial[~links.serving], minlength=links.n_trials)
    assert n_srv.mean() == pytest.approx(mean_service_count(CFG.geometry, 1e-5), rel=0.03)
    assert n_int.mean() == pytest.approx(mean_interferer_count(CFG.geometry, 1e-5), rel=0.03)


def test_link_fading_power():
    links = mc.draw_links(CFG, 20_000, np.random.default_rng(4))
    assert links.amplitude.size > 1_000_000
    assert np.mean(links.amplitude ** 2) == pytest.approx(CFG.channel.omega, rel=0.01)


def test_single_link_noiseless_sinr_is_unbounded():
    cfg = NetworkConfig.reference(noise_power=1e-300)
    ds, mui, isi, ok = mc.link_powers(_one_link(cfg), cfg)
    sinr = mc.sinr_from_parts(ds, mui, isi, cfg.noise_to_signal, ok)
    assert mui[0] == 0.0 and isi[0] == 0.0
    assert sinr[0] > 1e30


def test_single_link_snr():
    ds, mui, isi, ok = mc.link_powers(_one_link(CFG, amp=0.7), CFG)
    beta = path_loss(800.0, CFG.channel)
    sinr = mc.sinr_from_parts(ds, mui, isi, CFG.noise_to_signal, ok)[0]
    assert sinr == pytest.approx(beta * 0.49 / CFG.noise_to_signal, rel=1e-12)


def test_nearest_reduces_to_single_link_snr():
    links = _one_link(CFG, amp=1.3)
    beta = path_loss(800.0, CFG.channel)
    assert mc.nearest_sinr(links, CFG)[0] == pytest.approx(beta * 1.69 / CFG.noise_to_signal,
                                                           rel=1e-12)


def test_nearest_picks_closest_and_sidelobe_interference():
    links = mc.Links(1, np.array([0, 0]), np.array([900.0, 600.0]), np.array([True, True]),
                     np.array([1.0, 1.0]), np.array([0.0, 0.0]), np.array([1, 1]))
    want = 600.0 ** -2 / (0.1 * 900.0 ** -2 + CFG.noise_to_signal)
    assert mc.nearest_sinr(links, CFG)[0] == pytest.approx(want, rel=1e-12)


def test_noiseless_single_user_training_recovers_phase():
    rng = np.random.default_rng(5)
    links = mc.draw_links(CFG, 50, rng)
    links.users[:] = 1
    sel, est, n_co = mc._train_links(links, CFG, 1, rng, noiseless=True)
    assert np.all(n_co == 0)
    np.testing.assert_allclose(np.exp(1j * np.angle(est)), np.exp(1j * links.phase[sel]),
                               atol=1e-12)


def test_two_users_on_one_pilot_closed_form():
    g1, g2 = 0.003 * np.exp(0.4j), 0.002 * np.exp(-2.1j)
    beta, omega = 0.003 ** 2, 1.0
    est = mc.lmmse_estimate(g1, np.array([g2]), 0.0, beta, omega, 0.0)
    want = beta * omega * (g1 + g2) / (abs(g1) ** 2 + abs(g2) ** 2)
    assert abs(est - want) <= 1e-12 * abs(want)


def test_forced_pilot_sharing_in_training():
    rng = np.random.default_rng(6)
    links = mc.draw_links(CFG, 20, rng)
    links.users[links.serving] = 2
    _, _, n_co = mc._train_links(links, CFG, 1, rng, noiseless=True)
    assert np.all(n_co == 1)


def test_uplink_train_record():
    rng = np.random.default_rng(7)
    snap = mc.draw_snapshot(CFG, rng)
    tr = mc.uplink_train(snap, CFG, CFG.pilot_len, rng)
    assert tr.estimate.size == len(snap.service_saps)
    np.testing.assert_allclose(np.abs(tr.estimated_phase), 1.0)
    assert set(tr.pilot_assignment.values()) <= set(range(CFG.pilot_len))
    s = mc.sinr_of(snap, CFG, mc.TRAINED, tr)
    assert s.sinr == pytest.approx(s.ds_power / (s.mui_power + s.isi_power + s.noise_power))


def test_training_rejects_bad_pool():
    rng = np.random.default_rng(8)
    snap = mc.draw_snapshot(CFG, rng)
    with pytest.raises(ParameterError):
        mc.uplink_train(snap, CFG, 0, rng)
    with pytest.raises(ParameterError):
        mc.uplink_train(snap, CFG, CFG.pilot_len + 1, rng)


def test_energy_accounting_per_snapshot():
    rng = np.random.default_rng(9)
    for tp in (20, 200):
        cfg = NetworkConfig.reference(pilot_len=tp)
        links = mc.draw_links(cfg, 5_000, rng)
        perfect = mc.link_powers(links, cfg, mc.PERFECT)[0]
        trained = mc.link_powers(links, cfg, mc.TRAINED, None, rng)[0]
        plain = mc.link_powers(links, cfg, mc.NO_BEAMFORMING)[0]
        assert np.all(perfect >= trained * (1 - 1e-12))
        assert np.all(trained >= plain)


def test_trained_dss_dominated_by_perfect():
    perfect = mc.empirical_dss_ccdf(CFG, 10_000, mc.PERFECT, rng=10)
    trained = mc.simulate_cell_free(CFG, 10_000, mc.TRAINED, rng=10).ds
    cc = mc.ccdf_from_samples(trained, perfect.x)
    assert np.all(cc <= np.array(perfect.ccdf) + 1e-12)
    assert perfect.ccdf[0] == 1.0


def test_unknown_csi_mode():
    with pytest.raises(ParameterError):
        mc.link_powers(_one_link(CFG), CFG, "oracle")


def test_coverage_estimator_basics():
    batch = mc.simulate_cell_free(CFG, 4_000, rng=11)
    c = mc.curve_from_sinr(batch.sinr, TH)
    cov = np.array(c.coverage)
    assert np.all(np.diff(cov) <= 0)
    tiny = mc.curve_from_sinr(batch.sinr, [-120.0]).coverage[0]
    assert tiny == pytest.approx(np.mean(batch.has_service), abs=1e-12)
    lo, hi = mc.coverage_bounds(c, 4_000)
    assert np.all(lo <= cov) and np.all(cov <= hi)


def test_outage_counts_as_uncovered():
    cfg = NetworkConfig.reference(sap_density=1e-8)
    batch = mc.simulate_cell_free(cfg, 2_000, rng=12)
    assert np.all(batch.sinr[~batch.has_service] == 0.0)
    c = mc.curve_from_sinr(batch.sinr, [-120.0])
    assert c.coverage[0] == pytest.approx(np.mean(batch.has_service))


def test_wilson_interval_reference_values():
    lo, hi = mc.wilson_interval(50, 100)
    assert float(lo) == pytest.approx(0.40383, abs=1e-5)
    assert float(hi) == pytest.approx(0.59617, abs=1e-5)
    lo, hi = mc.wilson_interval(0, 10)
    assert float(lo) == 0.0 and float(hi) == pytest.approx(0.27753, abs=1e-5)


def test_determinism_across_threads():
    a = mc.estimate_coverage(CFG, TH, 3_000, rng=13, threads=1)
    b = mc.estimate_coverage(CFG, TH, 3_000, rng=13, threads=4)
    c = mc.estimate_coverage(CFG, TH, 3_000, rng=13, threads=1)
    assert a == b == c
    n1 = mc.simulate_nearest(CFG, 3_000, rng=14, threads=1)
    n4 = mc.simulate_nearest(CFG, 3_000, rng=14, threads=3)
    assert n1.tobytes() == n4.tobytes()


def test_trained_determinism_across_threads():
    a = mc.simulate_cell_free(CFG, 2_000, mc.TRAINED, rng=15, threads=1).sinr
    b = mc.simulate_cell_free(CFG, 2_000, mc.TRAINED, rng=15, threads=2).sinr
    assert a.tobytes() == b.tobytes()


def test_master_seed():
    assert mc.master_seed(7) == 7
    g1, g2 = np.random.default_rng(1), np.random.default_rng(1)
    assert mc.master_seed(g1) == mc.master_seed(g2)
    with pytest.raises(ParameterError):
        mc.master_seed("seven")
    with pytest.raises(ParameterError):
        mc.simulate_cell_free(CFG, 0)


def test_cell_free_beats_nearest_at_reference_densities():
    cf = np.array(mc.estimate_coverage(CFG, TH, 5_000, rng=16).coverage)
    near = np.array(mc.nearest_satellite_coverage(CFG, TH, 5_000, rng=16).coverage)
    assert np.all(cf >= near)
