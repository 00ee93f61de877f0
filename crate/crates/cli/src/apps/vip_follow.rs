//! Follows a person wearing a hazard vest; lands when they raise a hand and
//! hovers if they fall.

use daas_core::analytics::{body_pose, follow_object, vip_detection};
use daas_core::{Environment, Frame, Result};

pub fn compose(env: &Environment) -> Result<()> {
    let tello = env.get_robot_by_id("tello")?;
    let edge = env.get_compute_resource_by_id("edge")?;
    let edge_cloud = env.get_compute_resource_by_id("edge_cloud")?;
    let camera = tello.get_sensor_by_id("camera")?.get_data_stream::<Frame>()?;

    let detector = vip_detection();
    detector.deploy(&edge_cloud)?;
    let follower = follow_object();
    follower.deploy(&edge)?;
    let pose = body_pose();
    pose.deploy(&edge_cloud)?;

    let boxes = detector.analyse(&camera)?;
    let follow_cmds = follower.generate_navigation(&boxes)?;
    let pose_cmds = pose.generate_navigation(&camera)?;

    tello.start_mission()?;
    // later sources take priority: pose overrides following
    tello.navigate_streams(&[follow_cmds, pose_cmds])
}
