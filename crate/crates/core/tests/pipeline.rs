use tempyr_core::metrics::{evaluate_sequence, psnr, tcc};
use tempyr_core::pyramid::{
    interpolate, interpolate_independent, IdentityFlowRefiner, IdentityFrameRefiner,
};
use tempyr_core::synth::{derive_seed, variable_acceleration_scene, Scene, SceneSpec};
use tempyr_core::{FlowSolverConfig, MotionModelKind};

#[test]
fn static_quad_is_reproduced() {
    let sc = Scene::new(SceneSpec::static_scene(32, 32, 11)).unwrap();
    let quad = sc.quad().unwrap();
    for kind in MotionModelKind::ALL {
        let r = interpolate(
            &quad,
            kind,
            &FlowSolverConfig::default(),
            &mut IdentityFlowRefiner::default(),
            &mut IdentityFrameRefiner,
        )
        .unwrap();
        assert_eq!(r.frames.len(), 7);
        for f in &r.frames {
            assert!(psnr(f, quad.first()).unwrap() >= 50.0);
        }
    }
}

#[test]
fn cubic_beats_linear_on_accelerating_scene() {
    let cfg = FlowSolverConfig::default();
    let sc = Scene::new(variable_acceleration_scene(derive_seed(1, 0), 48, false)).unwrap();
    let quad = sc.quad().unwrap();
    let truth = sc.truth(7).unwrap();
    let run = |kind| {
        let r = interpolate(
            &quad,
            kind,
            &cfg,
            &mut IdentityFlowRefiner::default(),
            &mut IdentityFrameRefiner,
        )
        .unwrap();
        evaluate_sequence(&r.frames, &truth).unwrap().mean_psnr
    };
    assert!(run(MotionModelKind::Cubic) > run(MotionModelKind::Linear));
}

#[test]
fn baseline_produces_requested_frames() {
    let sc = Scene::new(variable_acceleration_scene(3, 32, true)).unwrap();
    let quad = sc.quad().unwrap();
    let frames = interpolate_independent(&quad, 3, &FlowSolverConfig::default()).unwrap();
    assert_eq!(frames.len(), 3);
    let truth = sc.truth(3).unwrap();
    let mut seq = vec![quad.first().clone()];
    seq.extend(frames);
    seq.push(quad.second().clone());
    let mut gt = vec![quad.first().clone()];
    gt.extend(truth);
    gt.push(quad.second().clone());
    let v = tcc(&seq, &gt).unwrap();
    assert!(v > 0.5 && v <= 1.0);
}
