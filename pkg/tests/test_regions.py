import numpy as np # type: ignore
import pytest # type: ignore

from services.regions import (
    band,
    recurrence_regions,
    region_ball_exterior,
    region_box,
    region_cylinder_tall,
    region_K,
    region_M_superlevel,
    sphere_directions,
)


@pytest.mark.parametrize("name", ["R0", "R1", "R2", "K"])
def test_recurrence_samples_satisfy_predicates(small_rp, name):
    region = recurrence_regions(small_rp, rho=28.0, k_max=6)[name].with_samples(256)
    pts = region.sample()
    assert pts.shape[1] == 3
    assert pts.shape[0] > 0
    assert np.all(region.contains(pts))


def test_sampling_is_deterministic_by_seed(small_rp):
    region = recurrence_regions(small_rp, k_max=4)["R1"].with_samples(128)
    a = region.with_seed(3).sample()
    b = region.with_seed(3).sample()
    c = region.with_seed(4).sample()
    np.testing.assert_array_equal(a, b)
    assert a.shape != c.shape or not np.array_equal(a, c)


def test_region_R1_probes_the_band_edge(small_rp):
    pts = recurrence_regions(small_rp, k_max=8)["R1"].with_samples(512).sample()
    t = band(pts, 0.0)
    assert np.min(t) < 1.1 * small_rp.R1
    assert np.max(np.abs(pts[:, 2])) > small_rp.R3 * 2.0**7


def test_region_K_shells(small_rp):
    region = region_K(small_rp, rho=5.0)
    # |ζ| ≤ 1 core plus log₂ R₃ geometric shells
    assert [s.name for s in region.shells] == ["core", "z0", "z1"]
    pts = region.with_samples(200).sample()
    assert np.all(np.abs(pts[:, 2] - 5.0) <= small_rp.R3)


def test_cylinder_is_cylinder(small_rp):
    pts = region_cylinder_tall(small_rp, k_max=3).with_samples(100).sample()
    assert np.all(pts[:, 0] ** 2 + pts[:, 1] ** 2 <= small_rp.R0)
    assert np.all(np.abs(pts[:, 2]) >= small_rp.R3)


def test_sphere_directions_are_unit():
    d = sphere_directions(500, seed=2)
    assert d.shape == (500, 3)
    np.testing.assert_allclose(np.linalg.norm(d, axis=1), 1.0, rtol=1e-12)
    # quasi-uniform: the mean direction is near the origin
    assert np.linalg.norm(d.mean(axis=0)) < 0.05


def test_ball_exterior_and_superlevel(reversed_params):
    outer = region_ball_exterior(10.0, k_max=5).with_samples(64)
    pts = outer.sample()
    norms = np.linalg.norm(pts, axis=1)
    assert np.all((norms >= 10.0) & (norms <= 320.0))
    assert outer.name == "|X|>=10"

    level = region_M_superlevel(reversed_params, 8.0, k_max=5).with_samples(64)
    pts = level.sample()
    assert np.all(2.0 * reversed_params.sigma * pts[:, 2] - pts[:, 0] ** 2 >= 8.0)


def test_box_contains():
    box = region_box(2.0)
    assert box.contains(np.array([[0.0, 1.0, -2.0], [0.0, 2.5, 0.0]])).tolist() == [True, False]
