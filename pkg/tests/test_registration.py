import math

import numpy as np
import pytest

from meshfab.errors import NoCorrespondences, NoPairs, ZeroMeasuredDistance
from meshfab.orientation import Pose
from meshfab.registration import (
    deviation_report,
    estimate_scale,
    register_icp,
    surface_samples,
)

from helpers import make_box, make_plate, make_subdivided_cube, rotation_about_axis


def rotation_angle_deg(r):
    c = (np.trace(r) - 1.0) / 2.0
    return math.degrees(math.acos(min(1.0, max(-1.0, c))))


def perturbed(pose_rot, pose_t, rng, max_deg=5.0, max_mm=5.0):
    axis = rng.standard_normal(3)
    d_rot = rotation_about_axis(axis, rng.uniform(-max_deg, max_deg))
    return Pose(rotation=d_rot @ pose_rot,
                translation=pose_t + rng.uniform(-max_mm, max_mm, 3))


def test_estimate_scale_exact_ratio():
    p0, p1 = np.zeros(3), np.array([500.0, 0.0, 0.0])
    est = estimate_scale([((p0, p1), 1000.0)])
    assert math.isclose(est.scale, 2.0, rel_tol=1e-12)
    assert est.residual_mm == 0.0


def test_estimate_scale_consistent_pairs():
    pairs = [
        ((np.zeros(3), np.array([500.0, 0, 0])), 1000.0),
        ((np.zeros(3), np.array([0, 250.0, 0])), 500.0),
    ]
    est = estimate_scale(pairs)
    assert math.isclose(est.scale, 2.0, rel_tol=1e-12)
    assert est.residual_mm < 1e-12


def test_estimate_scale_inconsistent_pairs_closed_form():
    pairs = [
        ((np.zeros(3), np.array([500.0, 0, 0])), 1000.0),
        ((np.zeros(3), np.array([520.0, 0, 0])), 1000.0),
    ]
    est = estimate_scale(pairs)
    # hand least squares: sum(t*m)/sum(m^2)
    expected = (1000.0 * 500.0 + 1000.0 * 520.0) / (500.0**2 + 520.0**2)
    assert math.isclose(est.scale, expected, rel_tol=1e-12)
    assert est.residual_mm > 0


def test_estimate_scale_errors():
    with pytest.raises(NoPairs):
        estimate_scale([])
    with pytest.raises(ZeroMeasuredDistance):
        estimate_scale([((np.zeros(3), np.zeros(3)), 100.0)])


def test_surface_samples_deterministic_and_on_surface():
    m = make_subdivided_cube(4, size=100.0)
    s1 = surface_samples(m, 500)
    s2 = surface_samples(m, 500)
    assert np.array_equal(s1, s2)
    assert s1.shape == (500, 3)
    # all samples on the cube surface: one coordinate at 0 or 100
    on_face = np.isclose(s1, 0.0, atol=1e-9) | np.isclose(s1, 100.0, atol=1e-9)
    assert on_face.any(axis=1).all()


def test_self_registration_identity():
    m = make_subdivided_cube(5, size=100.0)
    result = register_icp(m, m, initial=Pose.identity())
    assert result.rmse < 1e-6
    assert rotation_angle_deg(result.pose.rotation) < 1e-6
    assert np.abs(result.pose.translation).max() < 1e-6


def test_known_transform_recovered_from_perturbed_seed():
    m = make_subdivided_cube(5, size=100.0)
    rng = np.random.default_rng(123)
    t_rot = rotation_about_axis([1, 1, 0], 25.0)
    t_vec = np.array([40.0, -25.0, 60.0])
    scan = m.transformed(m.vertices @ t_rot.T + t_vec)
    # ground truth scan->design pose is the inverse transform
    true_pose = Pose(rotation=t_rot.T, translation=-(t_rot.T @ t_vec))
    seed = perturbed(true_pose.rotation, true_pose.translation, rng)
    result = register_icp(scan, m, initial=seed)
    assert result.converged
    # compose recovered pose with the forward transform: identity
    residual_rot = result.pose.rotation @ t_rot
    assert rotation_angle_deg(residual_rot) < 0.1
    moved = result.pose.apply(scan.vertices)
    assert np.sqrt(np.mean((moved - m.vertices) ** 2)) < 1e-3


def test_rmse_trace_monotone_non_increasing():
    m = make_subdivided_cube(4, size=100.0)
    rng = np.random.default_rng(5)
    scan = m.transformed(m.vertices @ rotation_about_axis([0, 0, 1], 4.0).T + rng.uniform(-3, 3, 3))
    result = register_icp(scan, m, initial=Pose.identity())
    trace = np.asarray(result.rmse_trace)
    assert len(trace) >= 2
    assert (np.diff(trace) <= 1e-12).all()


def test_noisy_scan_rmse_matches_noise_level():
    m = make_subdivided_cube(6, size=100.0)
    hits = 0
    for seed in range(10):
        rng = np.random.default_rng(seed)
        noisy = m.transformed(m.vertices + rng.normal(0.0, 0.5, m.vertices.shape))
        result = register_icp(noisy, m, initial=Pose.identity())
        assert result.converged
        if 0.3 <= result.rmse <= 0.7:
            hits += 1
    assert hits == 10


def test_disjoint_meshes_no_correspondences():
    a = make_box(100.0, 100.0, 100.0)
    b = make_box(100.0, 100.0, 100.0, center=(10000.0, 0.0, 0.0))
    with pytest.raises(NoCorrespondences):
        register_icp(a, b, initial=Pose.identity(), inlier_distance=50.0)


def test_principal_frame_seeding_without_initial():
    # a box is 180-degree symmetric, so assert surface coincidence, not
    # vertex identity: any symmetry-equivalent pose is a correct answer
    base = make_box(160.0, 80.0, 40.0)
    rot = rotation_about_axis([0.3, 1.0, 0.2], 140.0)
    scan = base.transformed(base.vertices @ rot.T + np.array([300.0, -120.0, 50.0]))
    result = register_icp(scan, base, sample_count=200)
    assert result.rmse < 1e-3
    report = deviation_report(scan, base, result.pose, sample_count=300)
    assert report.max < 1e-3


def test_registration_with_recovered_scale():
    m = make_subdivided_cube(5, size=100.0)
    shrunk = m.transformed(m.vertices * 0.5)  # scan at half scale
    pairs = [((shrunk.vertices[0], shrunk.vertices[10]),
              float(np.linalg.norm(m.vertices[0] - m.vertices[10])))]
    est = estimate_scale(pairs)
    assert math.isclose(est.scale, 2.0, rel_tol=1e-9)
    initial = Pose(rotation=np.eye(3), translation=np.zeros(3), scale=est.scale)
    result = register_icp(shrunk, m, initial=initial)
    assert result.rmse < 1e-6
    assert result.pose.scale == est.scale


def test_deviation_identity_zero():
    m = make_subdivided_cube(4, size=100.0)
    report = deviation_report(m, m, Pose.identity(), sample_count=500)
    assert report.max < 1e-6
    assert abs(report.mean) < 1e-6
    assert report.threshold_exceeded == ()


def test_deviation_constant_offset_plane():
    design = make_plate(100.0, 100.0, nx=6, ny=6, z=0.0)
    scan = make_plate(100.0, 100.0, nx=6, ny=6, z=2.0)  # +2 mm off the design
    report = deviation_report(scan, design, Pose.identity(), sample_count=400)
    assert math.isclose(report.mean, 2.0, abs_tol=1e-6)
    assert math.isclose(report.max, 2.0, abs_tol=1e-6)
    assert abs(report.mean) <= report.max
    assert report.p95 <= report.max


def test_deviation_threshold_flags_all():
    design = make_plate(100.0, 100.0, nx=6, ny=6, z=0.0)
    scan = make_plate(100.0, 100.0, nx=6, ny=6, z=2.0)
    report = deviation_report(scan, design, Pose.identity(),
                              sample_count=400, threshold=1.0)
    assert len(report.threshold_exceeded) == 400
    mags = np.abs(report.distances)[list(report.threshold_exceeded)]
    assert (np.diff(mags) <= 1e-12).all()  # sorted worst first
