"""Action plan tests: arcs, morphology, surface, gestures, timing."""

import numpy as np
import pytest

from airsig.plan import (MorphologyConfig, SurfaceConfig, assign_timestamps,
                         fit_planar_arc, generate_gesture_plan,
                         generate_morphology_2d, generate_signature_plan,
                         make_action_plan, project_to_surface)


# ------------------------------------------------------------ planar arcs

def test_fit_planar_arc_half_circle():
    arc = fit_planar_arc((0, 0, 0), (2, 0, 0), (1, 1, 0))
    assert np.allclose(arc.center, (1, 0, 0), atol=1e-12)
    assert arc.radius == pytest.approx(1.0, abs=1e-12)
    assert not arc.is_degenerate_segment
    assert arc.length == pytest.approx(np.pi, abs=1e-9)
    # arc really passes through the midpoint
    assert np.allclose(arc.point_at_fraction(0.5), (1, 1, 0), atol=1e-9)


def test_fit_planar_arc_through_three_points_randomized():
    rng = np.random.default_rng(10)
    for _ in range(100):
        p1, p2, pm = rng.normal(scale=5.0, size=(3, 3))
        arc = fit_planar_arc(p1, p2, pm)
        if arc.is_degenerate_segment:
            continue
        scale = max(1.0, arc.radius)
        assert np.linalg.norm(arc.point_at_fraction(0.0) - p1) < 1e-9 * scale
        assert np.linalg.norm(arc.point_at_fraction(1.0) - p2) < 1e-9 * scale
        # pm on the circle and inside the swept arc
        assert abs(np.linalg.norm(pm - arc.center) - arc.radius) < 1e-9 * scale
        f = np.linspace(0.0, 1.0, 4001)
        gap = np.linalg.norm(arc.point_at_fraction(f) - pm, axis=1).min()
        assert gap < 2e-3 * scale


def test_fit_planar_arc_collinear_degenerates():
    arc = fit_planar_arc((0, 0, 0), (2, 2, 2), (1, 1, 1))
    assert arc.is_degenerate_segment
    assert arc.length == pytest.approx(np.sqrt(12.0))
    assert np.allclose(arc.point_at_fraction(0.5), (1, 1, 1))
    t = arc.tangent_at_fraction(np.array([0.1, 0.9]))
    assert np.allclose(t, 1.0 / np.sqrt(3.0), atol=1e-12)


def test_fit_planar_arc_coincident_endpoints_raise():
    with pytest.raises(ValueError):
        fit_planar_arc((1, 2, 3), (1, 2, 3), (0, 0, 0))


def test_arc_tangents_are_unit_and_travel_forward():
    arc = fit_planar_arc((0, 0, 0), (2, 0, 0), (1, 1, 0))
    f = np.linspace(0.0, 1.0, 11)
    t = arc.tangent_at_fraction(f)
    assert np.allclose(np.linalg.norm(t, axis=1), 1.0, atol=1e-12)
    p = arc.point_at_fraction(f)
    steps = p[1:] - p[:-1]
    dots = np.sum(steps * t[:-1], axis=1)
    assert np.all(dots > 0.0)


# ------------------------------------------------------------ 3D projection

def test_project_to_surface_flat():
    cfg = SurfaceConfig()
    pts = project_to_surface([(1.0, 2.0), (3.0, 4.0)], cfg)
    assert np.allclose(pts[:, 2], 0.0)
    assert np.allclose(pts[:, :2], [(1, 2), (3, 4)])


def test_project_to_surface_value_at_origin():
    cfg = SurfaceConfig(ax=2.0, ay=3.0, wx=1.0, wy=1.0, phx=0.4, phy=1.1)
    pts = project_to_surface([(0.0, 0.0)], cfg)
    assert pts[0, 2] == pytest.approx(2.0 * np.sin(0.4) + 3.0 * np.sin(1.1), abs=1e-12)


def test_project_to_surface_sine_peak():
    wx = 0.5
    phx = 0.3
    x_peak = (np.pi / 2.0 - phx) / wx
    cfg = SurfaceConfig(ax=1.0, ay=0.0, wx=wx, wy=1.0, phx=phx, phy=0.0)
    pts = project_to_surface([(x_peak, 0.0)], cfg)
    assert pts[0, 2] == pytest.approx(1.0, abs=1e-12)


# -------------------------------------------------------------- morphology

def test_morphology_deterministic_in_seed():
    cfg = MorphologyConfig()
    t1, m1 = generate_morphology_2d(cfg, seed=42)
    t2, m2 = generate_morphology_2d(cfg, seed=42)
    assert np.array_equal(t1, t2) and np.array_equal(m1, m2)
    t3, _ = generate_morphology_2d(cfg, seed=43)
    assert t3.shape != t1.shape or not np.allclose(t3, t1)


def test_morphology_single_letter_v():
    cfg = MorphologyConfig(text="V", flourish_probability=0.0)
    targets, midpoints = generate_morphology_2d(cfg, seed=0)
    assert len(targets) == 3
    assert len(midpoints) == 2
    # down-up pair: apex below the two ends
    assert targets[1, 1] < targets[0, 1] and targets[1, 1] < targets[2, 1]


def test_morphology_flourish_only_closes():
    cfg = MorphologyConfig(text="", flourish_probability=1.0)
    targets, _ = generate_morphology_2d(cfg, seed=1)
    gap = np.linalg.norm(targets[0] - targets[-1])
    assert gap <= 0.1 * cfg.canvas_size


def test_morphology_invalid_config_rejected():
    with pytest.raises(ValueError):
        MorphologyConfig(word_counts={})
    with pytest.raises(ValueError):
        MorphologyConfig(word_counts={1: 0.2, 2: 0.2})


def test_generated_plans_satisfy_invariants():
    cfg = MorphologyConfig()
    surface = SurfaceConfig.for_canvas(cfg.canvas_size)
    for seed in range(300):
        plan = generate_signature_plan(cfg, surface, seed)
        k = plan.n_targets
        assert len(plan.links) == k - 1 == len(plan.midpoints)
        for j, arc in enumerate(plan.links):
            scale = max(1.0, abs(arc.radius))
            assert np.linalg.norm(arc.point_at_fraction(0.0) - plan.targets[j]) < 1e-9 * scale
            assert np.linalg.norm(arc.point_at_fraction(1.0) - plan.targets[j + 1]) < 1e-9 * scale
            if not arc.is_degenerate_segment:
                assert abs(np.linalg.norm(plan.midpoints[j] - arc.center) - arc.radius) \
                    < 1e-9 * scale


def test_surface_projection_only_adds_z():
    cfg = MorphologyConfig()
    t2, _ = generate_morphology_2d(cfg, seed=5)
    surface = SurfaceConfig.for_canvas(cfg.canvas_size)
    p3 = project_to_surface(t2, surface)
    assert np.allclose(p3[:, :2], t2)


# ----------------------------------------------------------------- gestures

def test_gesture_plan_targets_inside_cube():
    cfg = MorphologyConfig()
    for seed in range(50):
        plan = generate_gesture_plan(cfg, seed)
        assert 5 <= plan.n_targets <= 10
        assert np.all(plan.targets >= 0.0) and np.all(plan.targets <= cfg.cube_size)


def test_gesture_plan_sagitta_bounds():
    cfg = MorphologyConfig()
    for seed in range(50):
        plan = generate_gesture_plan(cfg, seed)
        for j, arc in enumerate(plan.links):
            d = np.linalg.norm(plan.targets[j + 1] - plan.targets[j])
            h = arc.sagitta
            assert h >= (d / 20.0) * (1.0 - 1e-9)
            assert h <= (d / 5.0) * (1.0 + 1e-9)


def test_gesture_arc_radius_identity():
    # circle geometry: r = (d^2/4 + h^2) / (2h)
    cfg = MorphologyConfig()
    plan = generate_gesture_plan(cfg, seed=8)
    for j, arc in enumerate(plan.links):
        d = np.linalg.norm(plan.targets[j + 1] - plan.targets[j])
        h = arc.sagitta
        assert arc.radius == pytest.approx((d * d / 4.0 + h * h) / (2.0 * h), rel=1e-9)


def test_gesture_plan_deterministic():
    cfg = MorphologyConfig()
    a = generate_gesture_plan(cfg, seed=77)
    b = generate_gesture_plan(cfg, seed=77)
    assert np.array_equal(a.targets, b.targets)
    assert np.array_equal(a.midpoints, b.midpoints)


# ------------------------------------------------------------------- timing

def test_assign_timestamps_zero_sd_is_uniform():
    plan = make_action_plan([(0, 0, 0), (1, 0, 0), (2, 0, 0)],
                            [(0.5, 0, 0), (1.5, 0, 0)])
    timed = assign_timestamps(plan, seed=0, mean_gap=0.1, sd_gap=0.0)
    assert np.allclose(np.diff(timed.timestamps), 0.1, atol=1e-15)
    assert timed.timestamps[0] == 0.0


def test_assign_timestamps_strictly_increasing():
    plan = make_action_plan([(0, 0, 0), (1, 0, 0), (2, 0, 0), (3, 0, 0)],
                            [(0.5, 0, 0), (1.5, 0, 0), (2.5, 0, 0)])
    for seed in range(200):
        timed = assign_timestamps(plan, seed=seed)
        assert np.all(np.diff(timed.timestamps) > 0.0)
        # rejection rule keeps every gap above half the mean
        assert np.all(np.diff(timed.timestamps) > 0.05)


def test_assign_timestamps_expected_duration():
    # 21 targets -> expected duration (N-1) * 0.1 = 2.0 s
    targets = [(float(i), 0.0, 0.0) for i in range(21)]
    midpoints = [(i + 0.5, 0.0, 0.0) for i in range(20)]
    plan = make_action_plan(targets, midpoints)
    totals = [assign_timestamps(plan, seed=s).timestamps[-1] for s in range(1000)]
    assert 1.99 <= np.mean(totals) <= 2.01


def test_assign_timestamps_deterministic():
    plan = make_action_plan([(0, 0, 0), (1, 0, 0), (2, 0, 0)],
                            [(0.5, 0, 0), (1.5, 0, 0)])
    a = assign_timestamps(plan, seed=3)
    b = assign_timestamps(plan, seed=3)
    assert np.array_equal(a.timestamps, b.timestamps)


def test_make_action_plan_drops_zero_links():
    with pytest.warns(UserWarning):
        plan = make_action_plan([(0, 0, 0), (0, 0, 0), (2, 0, 0)],
                                [(0, 0, 0), (1, 0.5, 0)])
    assert plan.n_targets == 2
    assert len(plan.links) == 1
