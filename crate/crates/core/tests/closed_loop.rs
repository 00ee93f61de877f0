//! Detector plus follower against a stationary subject.

use std::sync::Arc;

use daas_core::analytics::{follow_object, vip_detection, FollowObject, Pid, PidGains};
use daas_core::runtime::run;
use daas_core::runtime::build_graph;
use daas_core::{ClockMode, Environment, EnvironmentConfig, Frame, SimTime};
use parking_lot::Mutex;
use proptest::prelude::*;

const CONFIG: &str = r#"{
  "robots": [{
    "id": "uav", "max_speed": 1.0, "takeoff_height": 1.5,
    "sensors": [{
      "id": "camera", "kind": "camera", "rate": 30,
      "params": { "target_position": [3.0, 0.4, 1.3], "target_width": 0.4, "target_height": 0.3 }
    }]
  }],
  "compute": [{
    "id": "edge", "kind": "edge", "capacity": 2,
    "service_times": { "vip_detect": 50, "follow_nav": 5 }
  }]
}"#;

#[test]
fn box_centres_within_fifteen_seconds() {
    let env = Environment::from_config(EnvironmentConfig::from_json(CONFIG).unwrap()).unwrap();
    let uav = env.get_robot_by_id("uav").unwrap();
    let edge = env.get_compute_resource_by_id("edge").unwrap();
    let camera = uav.get_sensor_by_id("camera").unwrap().get_data_stream::<Frame>().unwrap();
    let boxes = Arc::new(Mutex::new(Vec::new()));
    let sink = boxes.clone();
    let _ = camera.subscribe(move |_, f| sink.lock().push((f.timestamp(), f.get_data().target_box())));

    let detect = vip_detection();
    detect.deploy(&edge).unwrap();
    let follow = follow_object();
    follow.deploy(&edge).unwrap();
    let cmds = follow.generate_navigation(&detect.analyse(&camera).unwrap()).unwrap();
    uav.start_mission().unwrap();
    uav.navigate_streams(&[cmds]).unwrap();
    let graph = build_graph(&env, env.app_description()).unwrap();
    run(&graph, SimTime::from_secs(25), ClockMode::Virtual).unwrap();

    let boxes = boxes.lock();
    let off = |b: &daas_core::BoundingBox| ((b.cx - 0.5).powi(2) + (b.cy - 0.5).powi(2)).sqrt();
    let first = boxes.iter().find_map(|(_, b)| b.as_ref()).unwrap();
    assert!(off(first) > 0.1, "starts off-centre");
    let settled: Vec<_> = boxes
        .iter()
        .filter(|(t, _)| *t >= SimTime::from_secs(15) && *t <= SimTime::from_secs(20))
        .collect();
    assert!(!settled.is_empty());
    for (t, b) in settled {
        let b = b.as_ref().unwrap_or_else(|| panic!("target lost at {t}"));
        assert!(off(b) <= 0.05, "at {t}: {b:?}");
    }
}

#[test]
fn zero_error_from_rest_commands_nothing() {
    let mut f = FollowObject::default();
    // 0.4 * 0.5 is exactly the default target area
    let b = daas_core::BoundingBox {
        label: "v".into(),
        confidence: 1.0,
        cx: 0.5,
        cy: 0.5,
        w: 0.4,
        h: 0.5,
    };
    let cmd = f.command(&b, 1.0 / 15.0);
    let still = daas_core::NavigationCommand::velocity(0.0, 0.0, 0.0, 0.0, f.frame_period).unwrap();
    assert_eq!(cmd.kind, still.kind);
}

#[test]
fn pid_fixed_point_at_zero() {
    let mut pid = Pid::new(PidGains::new(1.2, 0.05, 0.1));
    for _ in 0..100 {
        assert_eq!(pid.update(0.0, 0.05), 0.0);
    }
}

proptest! {
    #[test]
    fn pid_integral_and_output_stay_clamped(
        errors in prop::collection::vec(-10.0f64..10.0, 1..500),
        dt in 0.001f64..0.5,
    ) {
        let gains = PidGains::new(1.2, 0.05, 0.1);
        let mut pid = Pid::new(gains);
        for e in errors {
            let u = pid.update(e, dt);
            prop_assert!(u.abs() <= gains.output_clamp);
            prop_assert!(pid.integral().abs() <= gains.integral_clamp);
        }
    }
}
