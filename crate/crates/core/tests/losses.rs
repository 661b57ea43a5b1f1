mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use common::*;
use nalgebra::{Rotation3, Vector3};
use physimetrics_core::gradcheck::{finite_diff_grad, relative_error};
use physimetrics_core::kinematics::{fk_position_jacobian, forward_kinematics_frame, PoseSequence, Rotation6D, Skeleton};
use physimetrics_core::losses::*;
use physimetrics_core::representation::{rep_from_motion, InteractionClip, MotionRep};
use physimetrics_core::Trajectory;
use proptest::prelude::*;
use rand::Rng;

fn cfg(mode: McMode) -> LossConfig {
    LossConfig {
        mc_mode: mode,
        ..LossConfig::default()
    }
}

fn single_joint() -> Skeleton<f64> {
    Skeleton::new(vec!["root".into()], vec![None], vec![Vector3::zeros()], 0, 0, 0).unwrap()
}

fn random_rep(seed: u64, frames: usize) -> (Skeleton<f64>, MotionRep<f64>) {
    let s = Skeleton::<f64>::smpl22();
    let pose = random_sequence(&mut rng(seed), &s, frames, 1.0, 30.0);
    let rep = rep_from_motion(&s, &pose).unwrap();
    (s, rep)
}

fn rep_with_flat(rep: &MotionRep<f64>, flat: &[f64]) -> MotionRep<f64> {
    MotionRep::from_flat(rep.joints(), rep.frames(), flat, rep.fps()).unwrap()
}

fn markers(rng: &mut impl Rng, frames: usize, k: usize, center: Vector3<f64>, spread: f64) -> Trajectory<f64> {
    Trajectory::from_fn(frames, k, |_, _| {
        center + Vector3::new(rng.gen_range(-spread..spread), rng.gen_range(-spread..spread), rng.gen_range(-spread..spread))
    })
}

#[test]
fn simple_loss_examples_and_gradient() {
    let (_, gt) = random_rep(1, 3);
    assert_eq!(simple_loss(&gt, &gt).unwrap(), 0.0);
    let flat = gt.to_flat();
    let e = flat.len() as f64;
    assert_eq!(flat.len(), 3 * 264);
    let shifted = rep_with_flat(&gt, &flat.iter().map(|x| x + 0.1).collect::<Vec<_>>());
    assert!((simple_loss(&shifted, &gt).unwrap() - 0.01).abs() < 1e-12);
    let mut one = flat.clone();
    one[100] += 0.3;
    let l = simple_loss(&rep_with_flat(&gt, &one), &gt).unwrap();
    assert!((l - 0.09 / e).abs() < 1e-15);

    let mut rng = rng(2);
    let pred: Vec<f64> = flat.iter().map(|x| x + rng.gen_range(-0.2..0.2)).collect();
    let fd = finite_diff_grad(|x| simple_loss(&rep_with_flat(&gt, x), &gt).unwrap(), &pred, 1e-6);
    let analytic: Vec<f64> = pred.iter().zip(&flat).map(|(p, g)| 2.0 * (p - g) / e).collect();
    assert!(relative_error(&fd, &analytic, 1e-12) < 1e-6);
}

#[test]
fn mc_toy_value_internal_mode() {
    let s = single_joint();
    let p = Trajectory::from_fn(3, 1, |t, _| Vector3::new(t as f64, 0.0, 0.0));
    let v = Trajectory::new(
        3,
        1,
        vec![Vector3::new(1.1, 0.0, 0.0), Vector3::new(1.0, 0.0, 0.0), Vector3::new(1.0, 0.0, 0.0)],
    )
    .unwrap();
    let rep = MotionRep::new(p, v, vec![Rotation6D::identity(); 3], 30.0).unwrap();
    let l = mc_loss(&rep, &rep, &s, &cfg(McMode::Internal)).unwrap();
    assert!((l - 0.1f64.powi(2) / 6.0).abs() < 1e-15, "{l}");
}

#[test]
fn mc_zero_at_consistent_gt_in_both_modes() {
    let (s, rep) = random_rep(3, 5);
    for mode in [McMode::GtAnchored, McMode::Internal] {
        assert!(mc_loss(&rep, &rep, &s, &cfg(mode)).unwrap() < 1e-10);
    }
}

#[test]
fn mc_second_term_by_hand() {
    // rotate the chain's middle joint: only the tip moves, by e
    let s = chain3();
    let pose = PoseSequence::rest(&s, vec![Vector3::zeros(); 4], 30.0).unwrap();
    let gt = rep_from_motion(&s, &pose).unwrap();
    let mut pred = gt.clone();
    for t in 0..4 {
        pred.rotations_mut(t)[1] = Rotation6D::new(Vector3::y(), -Vector3::x());
    }
    // FK tip moves from (2,0,0) to (1,1,0): e = (−1, 1, 0)
    let e2 = 2.0;
    let expected = e2 * 4.0 / (4.0 * 3.0 * 3.0);
    let l = mc_loss(&pred, &gt, &s, &cfg(McMode::GtAnchored)).unwrap();
    assert!((l - expected).abs() < 1e-15, "{l} vs {expected}");
}

/// Gradient of the FK term w.r.t. the 6D rotations: finite differences of
/// the loss against `−2/(3JT) · J_rotᵀ (x̃ − FK)` from the analytic Jacobian.
#[test]
fn mc_rotation_gradient_matches_jacobian_chain() {
    let (s, gt) = random_rep(7, 3);
    let n = s.joint_count();
    let mut rng = rng(8);
    let mut pred = gt.clone();
    for (i, rot) in gt.all_rotations().iter().enumerate() {
        let jitter = Rotation3::from_euler_angles(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2), 0.1);
        let m = jitter.matrix() * rot.to_matrix().unwrap();
        pred.rotations_mut(i / n)[i % n] = rot6d(&Rotation3::from_matrix_unchecked(m));
    }
    let frames = pred.frames();
    let scale = -2.0 / (3.0 * n as f64 * frames as f64);
    let mut analytic = Vec::new();
    for t in 0..frames {
        let root = pred.positions().get(t, s.root());
        let fk = forward_kinematics_frame(&s, &root, pred.rotations(t)).unwrap();
        let jac = fk_position_jacobian(&s, &root, pred.rotations(t)).unwrap();
        let resid = nalgebra::DVector::from_iterator(
            3 * n,
            (0..n).flat_map(|j| (gt.positions().get(t, j) - fk.positions[j]).iter().copied().collect::<Vec<_>>()),
        );
        let g = jac.columns(0, 6 * n).transpose() * resid * scale;
        analytic.extend(g.iter().copied());
    }
    let x: Vec<f64> = pred.all_rotations().iter().flat_map(|r| r.to_array()).collect();
    let base = pred.clone();
    let f = |x: &[f64]| {
        let mut p = base.clone();
        for t in 0..frames {
            for j in 0..n {
                let k = (t * n + j) * 6;
                p.rotations_mut(t)[j] = Rotation6D::from_slice(&x[k..k + 6]);
            }
        }
        mc_loss(&p, &gt, &s, &cfg(McMode::GtAnchored)).unwrap()
    };
    let fd = finite_diff_grad(f, &x, 1e-6);
    let err = relative_error(&fd, &analytic, 1e-12);
    assert!(err < 1e-3, "relative error {err}");
}

#[test]
fn mi_toy_value() {
    let a = Trajectory::from_fn(1, 1, |_, _| Vector3::<f64>::zeros());
    let gt_b = Trajectory::from_fn(1, 1, |_, _| Vector3::new(0.05, 0.0, 0.0));
    let pred_b = Trajectory::from_fn(1, 1, |_, _| Vector3::new(0.0, 0.2, 0.0));
    let l = mi_loss(&a, &pred_b, &a, &gt_b, &LossConfig::default()).unwrap();
    assert!((l - 0.0625).abs() < 1e-15, "{l}");
}

#[test]
fn mi_at_ground_truth_is_mean_contact_distance_squared() {
    let mut rng = rng(4);
    let (t, k) = (3, 67);
    let a = markers(&mut rng, t, k, Vector3::zeros(), 0.3);
    let b = markers(&mut rng, t, k, Vector3::new(0.35, 0.0, 0.0), 0.3);
    let mut sum = 0.0;
    let mut contacts = 0;
    for f in 0..t {
        for x in a.frame(f) {
            for y in b.frame(f) {
                let d = (x - y).norm();
                if d < 0.1 {
                    sum += d * d;
                    contacts += 1;
                }
            }
        }
    }
    assert!(contacts > 0);
    let l = mi_loss(&a, &b, &a, &b, &LossConfig::default()).unwrap();
    let expected = sum / (t * k * k) as f64;
    assert!(l > 0.0);
    assert!((l - expected).abs() <= 1e-15 * expected.max(1.0), "{l} vs {expected}");
}

#[test]
fn mi_far_apart_is_zero() {
    let mut rng = rng(5);
    let a = markers(&mut rng, 2, 67, Vector3::zeros(), 0.3);
    let b = markers(&mut rng, 2, 67, Vector3::new(3.0, 0.0, 0.0), 0.3);
    let b2 = markers(&mut rng, 2, 67, Vector3::new(0.0, 3.0, 0.0), 0.3);
    assert_eq!(mi_loss(&a, &b, &a, &b2, &LossConfig::default()).unwrap(), 0.0);
}

/// Analytic MI gradient w.r.t. person a's predicted markers.
fn mi_grad_a(pa: &Trajectory<f64>, pb: &Trajectory<f64>, ga: &Trajectory<f64>, gb: &Trajectory<f64>) -> Vec<f64> {
    let (t, k, l) = (pa.frames(), pa.points(), pb.points());
    let n = (t * k * l) as f64;
    let mut g = vec![0.0; t * k * 3];
    for f in 0..t {
        for i in 0..k {
            for j in 0..l {
                let d = pa.get(f, i) - pb.get(f, j);
                let mp = d.norm();
                let mg = (ga.get(f, i) - gb.get(f, j)).norm();
                let mut coef = 0.0;
                if mg < 0.1 {
                    coef += 2.0 * mp;
                }
                if mp < 1.0 {
                    coef += 2.0 * (mp - mg);
                }
                for c in 0..3 {
                    g[(f * k + i) * 3 + c] += coef / n * d[c] / mp;
                }
            }
        }
    }
    g
}

fn min_gap_to_thresholds(pa: &Trajectory<f64>, pb: &Trajectory<f64>, ga: &Trajectory<f64>, gb: &Trajectory<f64>) -> f64 {
    let mut gap = f64::INFINITY;
    for f in 0..pa.frames() {
        for i in 0..pa.points() {
            for j in 0..pb.points() {
                let mp = (pa.get(f, i) - pb.get(f, j)).norm();
                let mg = (ga.get(f, i) - gb.get(f, j)).norm();
                gap = gap.min((mp - 1.0).abs()).min((mg - 0.1).abs());
            }
        }
    }
    gap
}

#[test]
fn mi_gradient_matches_finite_differences_away_from_thresholds() {
    let mut rng = rng(6);
    let mut checked = 0;
    for _ in 0..40 {
        let ga = markers(&mut rng, 2, 6, Vector3::zeros(), 0.4);
        let gb = markers(&mut rng, 2, 6, Vector3::new(0.5, 0.0, 0.0), 0.4);
        let noise = markers(&mut rng, 2, 6, Vector3::zeros(), 0.1);
        let pa = Trajectory::from_fn(2, 6, |t, j| ga.get(t, j) + noise.get(t, j));
        let pb = gb.clone();
        if min_gap_to_thresholds(&pa, &pb, &ga, &gb) < 1e-3 {
            continue;
        }
        let x = pa.to_flat();
        let f = |x: &[f64]| {
            let a = Trajectory::from_flat(2, 6, x).unwrap();
            mi_loss(&a, &pb, &ga, &gb, &LossConfig::default()).unwrap()
        };
        let fd = finite_diff_grad(f, &x, 1e-7);
        let analytic = mi_grad_a(&pa, &pb, &ga, &gb);
        let err = relative_error(&fd, &analytic, 1e-12);
        assert!(err < 1e-3, "relative error {err}");
        checked += 1;
    }
    assert!(checked >= 20, "only {checked} samples clear of thresholds");
}

#[test]
fn mi_gradient_vanishes_in_masked_region() {
    let mut rng = rng(12);
    // all predicted distances ≥ 1 m, all true distances ≥ 0.1 m
    let ga = markers(&mut rng, 2, 5, Vector3::zeros(), 0.2);
    let gb = markers(&mut rng, 2, 5, Vector3::new(0.6, 0.0, 0.0), 0.1);
    let pa = markers(&mut rng, 2, 5, Vector3::zeros(), 0.2);
    let pb = markers(&mut rng, 2, 5, Vector3::new(2.0, 0.0, 0.0), 0.2);
    let x = pa.to_flat();
    let f = |x: &[f64]| {
        let a = Trajectory::from_flat(2, 5, x).unwrap();
        mi_loss(&a, &pb, &ga, &gb, &LossConfig::default()).unwrap()
    };
    assert_eq!(f(&x), 0.0);
    let fd = finite_diff_grad(f, &x, 1e-6);
    assert!(fd.iter().all(|g| *g == 0.0));
}

#[test]
fn mi_mask_source_switch() {
    let a = Trajectory::from_fn(1, 1, |_, _| Vector3::<f64>::zeros());
    let gt_b = Trajectory::from_fn(1, 1, |_, _| Vector3::new(0.5, 0.0, 0.0));
    let pred_b = Trajectory::from_fn(1, 1, |_, _| Vector3::new(1.2, 0.0, 0.0));
    let pred_mask = mi_loss(&a, &pred_b, &a, &gt_b, &LossConfig::default()).unwrap();
    assert_eq!(pred_mask, 0.0);
    let gt_cfg = LossConfig {
        mi_range_mask: MaskSource::GroundTruth,
        ..LossConfig::default()
    };
    let gt_mask = mi_loss(&a, &pred_b, &a, &gt_b, &gt_cfg).unwrap();
    assert!((gt_mask - 0.49).abs() < 1e-12);
}

#[test]
fn velocity_loss_examples() {
    let (_, gt) = random_rep(9, 4);
    assert_eq!(velocity_loss(&gt, &gt).unwrap(), 0.0);
    let mut all = gt.clone();
    all.velocities_mut().data_mut().iter_mut().for_each(|v| *v += Vector3::repeat(0.2));
    assert!((velocity_loss(&all, &gt).unwrap() - 0.04).abs() < 1e-12);
    let mut one = gt.clone();
    one.velocities_mut().frame_mut(2).iter_mut().for_each(|v| *v += Vector3::repeat(0.2));
    assert!((velocity_loss(&one, &gt).unwrap() - 0.04 / 4.0).abs() < 1e-12);
}

fn reversed(rep: &MotionRep<f64>) -> MotionRep<f64> {
    let t = rep.frames();
    let p = Trajectory::from_fn(t, rep.joints(), |f, j| rep.positions().get(t - 1 - f, j));
    let v = Trajectory::from_fn(t, rep.joints(), |f, j| -rep.velocities().get(t - 1 - f, j));
    let r = (0..t).flat_map(|f| rep.rotations(t - 1 - f).to_vec()).collect();
    MotionRep::new(p, v, r, rep.fps()).unwrap()
}

#[test]
fn velocity_loss_is_time_reversal_invariant() {
    let (_, gt) = random_rep(10, 5);
    let (_, pred) = random_rep(11, 5);
    let a = velocity_loss(&pred, &gt).unwrap();
    let b = velocity_loss(&reversed(&pred), &reversed(&gt)).unwrap();
    assert!((a - b).abs() < 1e-15);
}

fn planted_rep(s: &Skeleton<f64>, frames: usize) -> MotionRep<f64> {
    // rest pose with the feet just above z = 0
    let rest = s.rest_positions();
    let lift = -rest[s.left_foot()].z.min(rest[s.right_foot()].z) + 0.01;
    let pose = PoseSequence::rest(s, vec![Vector3::new(0.0, 0.0, lift); frames], 30.0).unwrap();
    rep_from_motion(s, &pose).unwrap()
}

#[test]
fn foot_contact_examples() {
    let s = Skeleton::<f64>::smpl22();
    let gt = planted_rep(&s, 4);
    let c = LossConfig::default();
    assert_eq!(foot_contact_loss(&gt, &gt, &s, &c).unwrap(), 0.0);
    let mut sliding = gt.clone();
    for t in 0..4 {
        for foot in [s.left_foot(), s.right_foot()] {
            *sliding.velocities_mut().get_mut(t, foot) = Vector3::new(0.1, 0.0, 0.0);
        }
    }
    let l = foot_contact_loss(&sliding, &gt, &s, &c).unwrap();
    assert!((l - 0.01 / 3.0).abs() < 1e-15, "{l}");
    let airborne = gt.transformed(&s, &nalgebra::Matrix3::identity(), &Vector3::new(0.0, 0.0, 1.0)).unwrap();
    assert_eq!(foot_contact_loss(&sliding, &airborne, &s, &c).unwrap(), 0.0);
}

#[test]
fn bone_length_loss_examples() {
    let s = Skeleton::<f64>::smpl22();
    let (_, rep) = random_rep(13, 3);
    let p = rep.positions();
    assert_eq!(bone_length_loss(p, p, &s).unwrap(), 0.0);

    let root = s.root();
    let scaled = Trajectory::from_fn(3, 22, |t, j| p.get(t, root) + (p.get(t, j) - p.get(t, root)) * 1.1);
    let expected = s.bones().map(|(_, c)| (0.1 * s.rest_offset(c).norm()).powi(2)).sum::<f64>() / 21.0;
    assert!((bone_length_loss(&scaled, p, &s).unwrap() - expected).abs() < 1e-12);

    let head = s.joint_index("head").unwrap();
    let neck = s.parent(head).unwrap();
    let mut longer = p.clone();
    for t in 0..3 {
        let dir = (p.get(t, head) - p.get(t, neck)).normalize();
        *longer.get_mut(t, head) += dir * 0.02;
    }
    let l = bone_length_loss(&longer, p, &s).unwrap();
    assert!((l - 0.02f64.powi(2) / 21.0).abs() < 1e-12, "{l}");
}

fn facing_clip(s: &Skeleton<f64>, yaw_a: f64, yaw_b: f64) -> InteractionClip<f64> {
    let person = |yaw: f64| {
        let mut pose = PoseSequence::rest(s, vec![Vector3::new(0.0, 0.0, 0.9); 2], 30.0).unwrap();
        for t in 0..2 {
            pose.rotations_mut(t)[s.root()] = rot6d(&Rotation3::from_axis_angle(&Vector3::z_axis(), yaw));
        }
        rep_from_motion(s, &pose).unwrap()
    };
    InteractionClip::new(vec![person(yaw_a), person(yaw_b)], None).unwrap()
}

#[test]
fn relative_orientation_examples() {
    let s = Skeleton::<f64>::smpl22();
    let gt = facing_clip(&s, 0.3, 0.3);
    assert_eq!(relative_orientation_loss(&gt, &gt, &s).unwrap(), 0.0);
    let pred = facing_clip(&s, 0.3 + FRAC_PI_2, 0.3);
    let l = relative_orientation_loss(&pred, &gt, &s).unwrap();
    assert!((l - FRAC_PI_2.powi(2)).abs() < 1e-12);
    let eps = 0.01;
    let pred = facing_clip(&s, PI - eps, 0.0);
    let gt = facing_clip(&s, -PI + eps, 0.0);
    let l = relative_orientation_loss(&pred, &gt, &s).unwrap();
    assert!((l - (2.0 * eps).powi(2)).abs() < 1e-12, "{l}");
}

fn rigid(rep: &MotionRep<f64>, s: &Skeleton<f64>, g: &Rotation3<f64>, d: Vector3<f64>) -> MotionRep<f64> {
    rep.transformed(s, g.matrix(), &d).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn losses_are_non_negative_and_rigid_invariant(
        seed in any::<u64>(),
        euler in prop::array::uniform3(-3.0..3.0f64),
        shift in prop::array::uniform3(-2.0..2.0f64),
    ) {
        let (s, gt) = random_rep(seed, 4);
        let (_, pred) = random_rep(seed.wrapping_add(1), 4);
        let g = Rotation3::from_euler_angles(euler[0], euler[1], euler[2]);
        let d = Vector3::from(shift);
        let (gp, gg) = (rigid(&pred, &s, &g, d), rigid(&gt, &s, &g, d));
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(1.0);

        let a = simple_loss(&pred, &gt).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!(close(a, simple_loss(&gp, &gg).unwrap()));
        for mode in [McMode::GtAnchored, McMode::Internal] {
            let a = mc_loss(&pred, &gt, &s, &cfg(mode)).unwrap();
            prop_assert!(a >= 0.0);
            prop_assert!(close(a, mc_loss(&gp, &gg, &s, &cfg(mode)).unwrap()));
        }
        let a = velocity_loss(&pred, &gt).unwrap();
        prop_assert!(close(a, velocity_loss(&gp, &gg).unwrap()));
        let a = bone_length_loss(pred.positions(), gt.positions(), &s).unwrap();
        prop_assert!(close(a, bone_length_loss(gp.positions(), gg.positions(), &s).unwrap()));

        let (pa, pb) = (pred.positions(), gt.positions());
        let m = |x: &Trajectory<f64>| x.map(|v| g * v + d);
        let a = mi_loss(pa, pb, pb, pa, &LossConfig::default()).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!(close(a, mi_loss(&m(pa), &m(pb), &m(pb), &m(pa), &LossConfig::default()).unwrap()));
    }

    #[test]
    fn ground_losses_are_yaw_invariant(seed in any::<u64>(), yaw in -3.0..3.0f64, dx in -2.0..2.0f64) {
        let s = Skeleton::<f64>::smpl22();
        let gt = planted_rep(&s, 4);
        let (_, other) = random_rep(seed, 4);
        let mut pred = gt.clone();
        for t in 0..4 {
            pred.velocities_mut().frame_mut(t).copy_from_slice(other.velocities().frame(t));
        }
        let g = Rotation3::from_axis_angle(&Vector3::z_axis(), yaw);
        let d = Vector3::new(dx, -dx, 0.0);
        let c = LossConfig::default();
        let a = foot_contact_loss(&pred, &gt, &s, &c).unwrap();
        let b = foot_contact_loss(&rigid(&pred, &s, &g, d), &rigid(&gt, &s, &g, d), &s, &c).unwrap();
        prop_assert!((a - b).abs() < 1e-12);

        let clip = |x: &MotionRep<f64>, y: &MotionRep<f64>| InteractionClip::new(vec![x.clone(), y.clone()], None).unwrap();
        let (_, q) = random_rep(seed.wrapping_add(7), 4);
        let a = relative_orientation_loss(&clip(&other, &q), &clip(&gt, &pred), &s).unwrap();
        let b = relative_orientation_loss(
            &clip(&rigid(&other, &s, &g, d), &rigid(&q, &s, &g, d)),
            &clip(&rigid(&gt, &s, &g, d), &rigid(&pred, &s, &g, d)),
            &s,
        ).unwrap();
        prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
    }
}

#[test]
fn shape_mismatches_are_errors() {
    let (s, a) = random_rep(1, 3);
    let (_, b) = random_rep(1, 4);
    assert!(simple_loss(&a, &b).is_err());
    assert!(mc_loss(&a, &b, &s, &LossConfig::default()).is_err());
    assert!(velocity_loss(&a, &b).is_err());
}
