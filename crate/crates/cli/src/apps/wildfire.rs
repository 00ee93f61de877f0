//! Sweeps a sector with a down-facing camera and raises fire alerts from
//! cloud-hosted detection.

use daas_core::analytics::{fire_alert, fire_detection, get_rectangular_survey_path, DEFAULT_SWATH};
use daas_core::{Environment, Frame, Result};

pub fn compose(env: &Environment) -> Result<()> {
    let scout = env.get_robot_by_id("scout")?;
    let cloud = env.get_compute_resource_by_id("cloud")?;
    let camera = scout.get_sensor_by_id("camera")?.get_data_stream::<Frame>()?;

    let detector = fire_detection();
    detector.deploy(&cloud)?;
    let alerts = fire_alert();
    alerts.deploy(&cloud)?;

    let boxes = detector.analyse(&camera)?;
    alerts.analyse(&boxes)?;

    scout.start_mission()?;
    scout.navigate(&get_rectangular_survey_path(40.0, 20.0, 15.0, DEFAULT_SWATH, 2.0)?)
}
