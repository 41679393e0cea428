import math

import numpy as np
import pytest
from scipy import stats

from cfleo import constellation as cs
from cfleo.config import NetworkConfig
from cfleo.errors import ParameterError

CFG = NetworkConfig.reference()
TH = np.arange(-5.0, 16.0)


def _central_angles(points):
    d = np.array([p.direction for p in points])
    cosang = np.clip(d @ d.T, -1.0, 1.0)
    iu = np.triu_indices(len(points), 1)
    return np.degrees(np.arccos(cosang[iu]))


def test_single_plane_symmetry():
    spec = cs.WalkerSpec((cs.ShellSpec(30.0, 1, 4, 500.0),))
    pts = cs.generate(spec)
    assert len(pts) == 4
    ang = np.round(_central_angles(pts), 9)
    assert set(ang.tolist()) == {90.0, 180.0}


def test_inclination_bounds_latitude():
    spec = cs.WalkerSpec((cs.ShellSpec(53.0, 28, 40, 550.0),), cs.RANDOM)
    pos = cs.generate_array(spec, np.random.default_rng(0), 5)
    lat = np.degrees(np.arcsin(pos[..., 2] / np.linalg.norm(pos, axis=-1)))
    assert lat.max() <= 53.0 + 1e-9


def test_counts_and_radii():
    spec = cs.WalkerSpec((cs.ShellSpec(33.0, 3, 5, 500.0), cs.ShellSpec(53.0, 2, 7, 1200.0)))
    pts = cs.generate(spec)
    assert len(pts) == spec.count == 29
    radii = sorted({p.radius_km for p in pts})
    re = spec.earth_radius_km
    assert radii == [re + 500.0, re + 1200.0]
    pos = cs.generate_array(spec)[0]
    np.testing.assert_allclose(np.linalg.norm(pos[:15], axis=1), re + 500.0, rtol=1e-14)


def test_starlink_like_matches_ppp_count():
    spec = cs.starlink_like()
    target = 4 * math.pi * (spec.earth_radius_km + 500.0) ** 2 * 1e-5
    assert spec.count == 3 * 28 * 71 == 5964
    assert abs(spec.count - target) < 3 * 28 / 2
    assert [s.inclination_deg for s in spec.shells] == [33.0, 43.0, 53.0]


def test_random_mode_longitudes_uniform():
    spec = cs.starlink_like(phase_mode=cs.RANDOM)
    pos = cs.generate_array(spec, np.random.default_rng(1), 100).reshape(-1, 3)
    lat = np.degrees(np.arcsin(pos[:, 2] / np.linalg.norm(pos, axis=1)))
    band = np.abs(lat - 20.0) < 2.0
    lon = np.degrees(np.arctan2(pos[band, 1], pos[band, 0]))
    counts, _ = np.histogram(lon, bins=36, range=(-180.0, 180.0))
    assert stats.chisquare(counts).pvalue > 0.01


def test_random_mode_needs_rng():
    spec = cs.starlink_like()
    with pytest.raises(ParameterError):
        cs.generate(spec)


def test_random_mode_is_seeded():
    spec = cs.starlink_like()
    a = cs.generate_array(spec, np.random.default_rng(2))
    b = cs.generate_array(spec, np.random.default_rng(2))
    assert a.tobytes() == b.tobytes()


@pytest.mark.parametrize("kw", [dict(num_planes=0), dict(sats_per_plane=0),
                                dict(inclination_deg=95.0), dict(altitude_km=0.0)])
def test_shell_validation(kw):
    base = dict(inclination_deg=53.0, num_planes=2, sats_per_plane=2, altitude_km=500.0)
    base.update(kw)
    with pytest.raises(ParameterError):
        cs.ShellSpec(**base)


def test_walker_validation():
    with pytest.raises(ParameterError):
        cs.WalkerSpec(())
    with pytest.raises(ParameterError):
        cs.WalkerSpec((cs.ShellSpec(53.0, 2, 2, 500.0),), "drifting")


def test_empty_constellation_has_no_coverage():
    curve = cs.coverage_at_latitude([], 20.0, CFG, TH, 500, rng=3)
    assert set(curve.coverage) == {0.0}


def test_fixed_points_coverage():
    pts = cs.generate(cs.starlink_like(phase_mode=cs.FIXED))
    curve = cs.coverage_at_latitude(pts, 20.0, CFG, TH, 1_000, rng=4)
    assert 0.0 < curve.coverage[0] <= 1.0
    assert np.all(np.diff(curve.coverage) <= 0)


def test_latitude_changes_coverage():
    spec = cs.starlink_like(phase_mode=cs.RANDOM)
    low = cs.coverage_at_latitude(spec, 0.0, CFG, TH, 2_000, rng=5)
    high = cs.coverage_at_latitude(spec, 50.0, CFG, TH, 2_000, rng=5)
    assert low.coverage != high.coverage
    assert max(abs(a - b) for a, b in zip(low.coverage, high.coverage)) > 0.05


def test_coverage_deterministic_and_thread_independent():
    spec = cs.starlink_like(phase_mode=cs.RANDOM)
    a = cs.coverage_at_latitude(spec, 20.0, CFG, TH, 1_500, rng=6, threads=1)
    b = cs.coverage_at_latitude(spec, 20.0, CFG, TH, 1_500, rng=6, threads=3)
    assert a == b


def test_observer_position():
    p = cs.observer_position(90.0, 10.0)
    np.testing.assert_allclose(p, [0.0, 0.0, 10.0], atol=1e-12)
