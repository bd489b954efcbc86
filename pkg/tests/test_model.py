"""Core model tests: lognormal primitives, reconstruction, SNR metrics."""

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import erf
from scipy.stats import lognorm

from airsig.model import (LognormalStroke, SigmaLogSignature, Trajectory3D,
                          lognormal_area, reconstruct_trajectory,
                          reconstruct_velocity, snr_t, snr_v,
                          stroke_velocity_vector, unit_lognormal, wrap_angle)
from airsig.plan import assign_timestamps, make_action_plan


def straight_plan(p0, p1, ts=(0.0, 1.0)):
    p0 = np.asarray(p0, float)
    p1 = np.asarray(p1, float)
    mid = 0.5 * (p0 + p1)
    return make_action_plan([p0, p1], [mid], timestamps=np.asarray(ts))


def make_stroke(**kw):
    base = dict(D=1.0, t0=0.0, mu=0.0, sigma2=0.25,
                theta_s=0.0, theta_e=0.0, phi_s=np.pi / 2, phi_e=np.pi / 2)
    base.update(kw)
    return LognormalStroke(**base)


def single_stroke_signature(stroke, p0=(0.0, 0.0, 0.0)):
    direction = np.array([np.sin(stroke.phi_s) * np.cos(stroke.theta_s),
                          np.sin(stroke.phi_s) * np.sin(stroke.theta_s),
                          np.cos(stroke.phi_s)])
    plan = straight_plan(p0, np.asarray(p0) + stroke.D * direction)
    return SigmaLogSignature(plan=plan, strokes=(stroke,))


# ---------------------------------------------------------------- lognormal

def test_unit_lognormal_matches_scipy_pdf():
    # independent oracle: scipy's lognorm pdf with scale = exp(mu)
    assert unit_lognormal(1.0, 0.0, 0.0, 1.0) == pytest.approx(
        lognorm.pdf(1.0, s=1.0, scale=1.0), abs=1e-12)
    assert unit_lognormal(1.0, 0.0, 0.0, 1.0) == pytest.approx(
        1.0 / np.sqrt(2.0 * np.pi), abs=1e-12)
    rng = np.random.default_rng(7)
    for _ in range(20):
        mu = rng.uniform(-2.0, 1.0)
        s2 = rng.uniform(0.005, 1.0)
        t0 = rng.uniform(-1.0, 1.0)
        t = t0 + rng.uniform(0.05, 3.0)
        want = lognorm.pdf(t - t0, s=np.sqrt(s2), scale=np.exp(mu))
        assert unit_lognormal(t, t0, mu, s2) == pytest.approx(want, rel=1e-12)


def test_unit_lognormal_outside_support():
    assert unit_lognormal(0.0, 0.0, 0.3, 1.0) == 0.0
    assert unit_lognormal(-5.0, 0.0, 0.0, 1.0) == 0.0
    vals = unit_lognormal(np.array([-1.0, 0.0, 0.5]), 0.0, 0.0, 1.0)
    assert vals[0] == 0.0 and vals[1] == 0.0 and vals[2] > 0.0


def test_unit_lognormal_rejects_bad_sigma2():
    with pytest.raises(ValueError):
        unit_lognormal(1.0, 0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        unit_lognormal(1.0, 0.0, 0.0, -1.0)


def test_unit_lognormal_peak_location():
    # mode of the lognormal pdf sits at t0 + exp(mu - sigma2)
    t = np.linspace(1e-4, 4.0, 400001)
    vals = unit_lognormal(t, 0.0, 0.0, 0.25)
    t_star = t[np.argmax(vals)]
    assert t_star == pytest.approx(np.exp(-0.25), abs=t[1] - t[0])
    assert np.exp(-0.25) == pytest.approx(0.7788007830714049, abs=1e-12)


def test_unit_lognormal_peak_location_randomized():
    rng = np.random.default_rng(3)
    for _ in range(20):
        mu = rng.uniform(-2.0, 1.0)
        s2 = rng.uniform(0.005, 1.0)
        peak = np.exp(mu - s2)
        t = np.linspace(max(peak - 0.5, 1e-6), peak + 0.5, 20001)
        vals = unit_lognormal(t, 0.0, mu, s2)
        assert t[np.argmax(vals)] == pytest.approx(peak, abs=t[1] - t[0])


def test_unit_lognormal_area_is_one():
    rng = np.random.default_rng(11)
    for _ in range(100):
        mu = rng.uniform(-2.0, 1.0)
        s2 = rng.uniform(0.005, 1.0)
        hi = np.exp(mu + 8.0 * np.sqrt(s2))
        t = np.linspace(0.0, hi, 40001)
        area = np.trapezoid(unit_lognormal(t, 0.0, mu, s2), t)
        assert area == pytest.approx(1.0, abs=1e-3)


def test_unit_lognormal_area_quad_oracle():
    val, _ = quad(lambda t: unit_lognormal(t, 0.5, -0.3, 0.1), 0.5, np.inf)
    assert val == pytest.approx(1.0, abs=1e-9)


def test_lognormal_area_closed_form():
    # W is the erf-based cdf of the same lognormal
    assert lognormal_area(0.0, 0.0, 0.0, 1.0) == 0.0
    t = np.array([0.5, 1.0, 2.0])
    want = lognorm.cdf(t, s=1.0, scale=1.0)
    got = lognormal_area(t, 0.0, 0.0, 1.0)
    assert np.allclose(got, want, atol=1e-12)


def test_wrap_angle_keeps_half_turns():
    assert wrap_angle(np.pi) == pytest.approx(np.pi)
    assert wrap_angle(-np.pi) == pytest.approx(-np.pi)
    assert wrap_angle(1.5 * np.pi) == pytest.approx(-0.5 * np.pi)
    assert wrap_angle(-1.5 * np.pi) == pytest.approx(0.5 * np.pi)
    assert wrap_angle(0.3) == pytest.approx(0.3)


# ---------------------------------------------------------- stroke velocity

def test_stroke_velocity_zero_before_onset():
    stroke = make_stroke(t0=1.0)
    assert np.allclose(stroke_velocity_vector(0.5, stroke), 0.0)
    assert np.allclose(stroke_velocity_vector(1.0, stroke), 0.0)


def test_stroke_velocity_straight_stroke_speed():
    stroke = make_stroke(D=2.5, theta_s=0.4, theta_e=0.4, phi_s=1.1, phi_e=1.1)
    t = np.linspace(0.01, 3.0, 200)
    v = stroke_velocity_vector(t, stroke)
    speed = np.linalg.norm(v, axis=1)
    lam = unit_lognormal(t, stroke.t0, stroke.mu, stroke.sigma2)
    assert np.allclose(speed, 2.5 * lam, atol=1e-12)
    # constant direction
    direction = v[50] / speed[50]
    for k in (10, 100, 180):
        assert np.allclose(v[k] / speed[k], direction, atol=1e-12)


def test_stroke_velocity_mid_arc_angle_at_median():
    stroke = make_stroke(theta_s=0.2, theta_e=1.0, phi_s=1.0, phi_e=1.4)
    t_med = stroke.t0 + np.exp(stroke.mu)
    assert lognormal_area(t_med, stroke.t0, stroke.mu, stroke.sigma2) \
        == pytest.approx(0.5, abs=1e-12)
    v = stroke_velocity_vector(t_med, stroke)
    theta_mid = 0.6
    phi_mid = 1.2
    direction = v / np.linalg.norm(v)
    want = np.array([np.sin(phi_mid) * np.cos(theta_mid),
                     np.sin(phi_mid) * np.sin(theta_mid),
                     np.cos(phi_mid)])
    assert np.allclose(direction, want, atol=1e-12)


# ------------------------------------------------------------- reconstruct

def test_reconstruct_velocity_single_stroke():
    stroke = make_stroke()
    sig = single_stroke_signature(stroke)
    t = np.linspace(0.0, 3.0, 50)
    assert np.allclose(reconstruct_velocity(sig, t),
                       stroke_velocity_vector(t, stroke), atol=1e-12)


def test_reconstruct_velocity_disjoint_strokes_superpose():
    s1 = make_stroke(D=1.0, t0=0.0, mu=-1.0, sigma2=0.01)
    s2 = make_stroke(D=2.0, t0=10.0, mu=-1.0, sigma2=0.01, theta_s=1.0, theta_e=1.0)
    plan = straight_plan((0, 0, 0), (1, 0, 0), ts=(0.0, 1.0))
    plan2 = make_action_plan(
        [(0, 0, 0), (1, 0, 0), (1 + 2 * np.cos(1.0), 2 * np.sin(1.0), 0)],
        [(0.5, 0, 0), (1 + np.cos(1.0), np.sin(1.0), 0)],
        timestamps=np.array([0.0, 1.0, 11.0]))
    sig_both = SigmaLogSignature(plan=plan2, strokes=(s1, s2))
    t = np.linspace(0.0, 14.0, 2000)
    speed_both = np.linalg.norm(reconstruct_velocity(sig_both, t), axis=1)
    alone = np.linalg.norm(stroke_velocity_vector(t, s1), axis=1) \
        + np.linalg.norm(stroke_velocity_vector(t, s2), axis=1)
    peak = alone.max()
    assert np.max(np.abs(speed_both - alone)) < 1e-9 * peak


def test_reconstruct_velocity_before_first_onset():
    sig = single_stroke_signature(make_stroke(t0=5.0))
    v = reconstruct_velocity(sig, np.linspace(0.0, 4.0, 10))
    assert np.allclose(v, 0.0)


def test_reconstruct_trajectory_zero_span_single_point():
    # horizon t0 + exp(mu + 5 sigma) stays negative -> one-sample output
    stroke = make_stroke(t0=-2.0, mu=np.log(0.5), sigma2=1e-4)
    sig = single_stroke_signature(stroke, p0=(3.0, 1.0, 2.0))
    traj = reconstruct_trajectory(sig, 100.0, origin=(3.0, 1.0, 2.0))
    assert len(traj) == 1
    assert np.allclose(traj.points[0], (3.0, 1.0, 2.0))


def test_reconstruct_trajectory_straight_displacement():
    stroke = make_stroke()
    sig = single_stroke_signature(stroke)
    traj = reconstruct_trajectory(sig, 100.0)
    want = lognormal_area(traj.times[-1], stroke.t0, stroke.mu, stroke.sigma2)
    got = np.linalg.norm(traj.points[-1] - traj.points[0])
    assert got == pytest.approx(want, rel=5e-3)
    assert want == pytest.approx(1.0, abs=2e-2)


def test_reconstruct_trajectory_grid_refinement():
    plan = straight_plan((0, 0, 0), (5, 0, 0))
    plan = assign_timestamps(plan, seed=4)
    from airsig.synthesis import plan_to_signature
    sig = plan_to_signature(plan)
    t100 = reconstruct_trajectory(sig, 100.0)
    t200 = reconstruct_trajectory(sig, 200.0)
    gap = np.linalg.norm(t100.points[-1] - t200.points[-1])
    assert gap < 0.01 * t200.path_length


def test_reconstruct_translation_equivariance():
    sig = single_stroke_signature(make_stroke())
    a = reconstruct_trajectory(sig, 50.0, origin=(0.0, 0.0, 0.0))
    b = reconstruct_trajectory(sig, 50.0, origin=(2.0, -1.0, 4.0))
    assert np.allclose(b.points - a.points, [2.0, -1.0, 4.0], atol=1e-12)


def test_reconstruct_z_rotation_equivariance():
    alpha = 0.7
    s = make_stroke(theta_s=0.2, theta_e=0.9, phi_s=1.2, phi_e=1.2)
    s_rot = make_stroke(theta_s=0.2 + alpha, theta_e=0.9 + alpha,
                        phi_s=1.2, phi_e=1.2)
    a = reconstruct_trajectory(single_stroke_signature(s), 50.0)
    b = reconstruct_trajectory(single_stroke_signature(s_rot), 50.0)
    c, sn = np.cos(alpha), np.sin(alpha)
    rz = np.array([[c, -sn, 0.0], [sn, c, 0.0], [0.0, 0.0, 1.0]])
    assert np.allclose(b.points, a.points @ rz.T, atol=1e-9)


# -------------------------------------------------------------------- SNRs

def rendered_example():
    plan = straight_plan((0, 0, 0), (10, 4, 2))
    plan = assign_timestamps(plan, seed=9)
    from airsig.synthesis import plan_to_signature, render_full_signature
    sig = plan_to_signature(plan)
    traj, _ = render_full_signature(sig, 100.0)
    return traj


def test_snr_v_identical_hits_cap():
    traj = rendered_example()
    assert snr_v(traj, traj) == 100.0


def test_snr_v_doubled_velocity_is_zero_db():
    traj = rendered_example()
    doubled = Trajectory3D(times=traj.times,
                           points=traj.points[0] + 2.0 * (traj.points - traj.points[0]),
                           fm=traj.fm)
    assert snr_v(traj, doubled) == pytest.approx(0.0, abs=1e-9)


def test_snr_v_known_noise_power():
    traj = rendered_example()
    t = traj.times
    dt = np.diff(t)
    v = np.diff(traj.points, axis=0) / dt[:, None]
    rng = np.random.default_rng(5)
    noise = rng.standard_normal(v.shape)
    p_sig = np.sum(np.sum(v ** 2, axis=1) * dt)
    p_noise = np.sum(np.sum(noise ** 2, axis=1) * dt)
    noise *= np.sqrt(0.01 * p_sig / p_noise)
    pts = np.vstack([traj.points[0],
                     traj.points[0] + np.cumsum((v + noise) * dt[:, None], axis=0)])
    noisy = Trajectory3D(times=t, points=pts, fm=traj.fm)
    assert snr_v(traj, noisy) == pytest.approx(20.0, abs=1.0)


def test_snr_v_needs_three_points():
    t = Trajectory3D(times=np.array([0.0, 1.0]), points=np.zeros((2, 3)) + [[0, 0, 0], [1, 0, 0]])
    with pytest.raises(ValueError):
        snr_v(t, t)


def test_snr_t_identical_hits_cap():
    traj = rendered_example()
    assert snr_t(traj, traj) == 100.0


def test_snr_t_offset_equal_to_variance_is_zero_db():
    traj = rendered_example()
    t = traj.times
    span = t[-1] - t[0]
    s_bar = np.trapezoid(traj.points, t, axis=0) / span
    num = np.trapezoid(np.sum((traj.points - s_bar) ** 2, axis=1), t)
    d = np.sqrt(num / span)
    off = Trajectory3D(times=t, points=traj.points + [d, 0.0, 0.0], fm=traj.fm)
    assert snr_t(traj, off) == pytest.approx(0.0, abs=1e-9)


def test_snr_t_constant_reconstruction_is_zero_db():
    traj = rendered_example()
    t = traj.times
    s_bar = np.trapezoid(traj.points, t, axis=0) / (t[-1] - t[0])
    const = Trajectory3D(times=t, points=np.tile(s_bar, (len(t), 1)), fm=traj.fm)
    assert snr_t(traj, const) == pytest.approx(0.0, abs=1e-9)


def test_snr_t_degenerate_observed_raises():
    t = np.linspace(0.0, 1.0, 10)
    flat = Trajectory3D(times=t, points=np.ones((10, 3)))
    other = Trajectory3D(times=t, points=np.random.default_rng(0).normal(size=(10, 3)))
    with pytest.raises(ValueError):
        snr_t(flat, other)


def test_snr_common_time_shift_invariance():
    traj = rendered_example()
    doubled = Trajectory3D(times=traj.times,
                           points=traj.points[0] + 2.0 * (traj.points - traj.points[0]))
    shift = 3.7
    a = Trajectory3D(times=traj.times + shift, points=traj.points)
    b = Trajectory3D(times=doubled.times + shift, points=doubled.points)
    assert snr_v(a, b) == pytest.approx(snr_v(traj, doubled), abs=1e-9)
    assert snr_t(a, b) == pytest.approx(snr_t(traj, doubled), abs=1e-9)


# ------------------------------------------------------------------- types

def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory3D(times=np.array([0.0, 0.0]), points=np.zeros((2, 3)))
    with pytest.raises(ValueError):
        Trajectory3D(times=np.array([0.0, 1.0]), points=np.zeros((3, 3)))


def test_stroke_validation():
    with pytest.raises(ValueError):
        make_stroke(sigma2=0.0)
    with pytest.raises(ValueError):
        make_stroke(D=0.0)


def test_signature_validation():
    plan = straight_plan((0, 0, 0), (1, 0, 0))
    with pytest.raises(ValueError):
        SigmaLogSignature(plan=plan, strokes=())
    s1 = make_stroke(t0=1.0)
    s2 = make_stroke(t0=0.0)
    plan2 = make_action_plan([(0, 0, 0), (1, 0, 0), (2, 0, 0)],
                             [(0.5, 0, 0), (1.5, 0, 0)])
    with pytest.raises(ValueError):
        SigmaLogSignature(plan=plan2, strokes=(s1, s2))
