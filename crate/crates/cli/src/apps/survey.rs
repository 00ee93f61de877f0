//! Lawnmower survey of a field, logging GPS, imagery and flight metrics.

use daas_core::analytics::{get_rectangular_survey_path, monitoring, save_data, DEFAULT_SWATH};
use daas_core::drone::{GpsFix, Odometry};
use daas_core::{Environment, Frame, Result};

pub fn compose(env: &Environment) -> Result<()> {
    let px4 = env.get_robot_by_id("px4")?;
    let edge = env.get_compute_resource_by_id("edge")?;
    let gps = px4.get_sensor_by_id("gps")?.get_data_stream::<GpsFix>()?;
    let camera = px4.get_sensor_by_id("camera")?.get_data_stream::<Frame>()?;
    let odom = px4.get_sensor_by_id("odom")?.get_data_stream::<Odometry>()?;

    let save_gps = save_data::<GpsFix>(None);
    save_gps.deploy(&edge)?;
    save_gps.analyse(&gps)?;
    let save_images = save_data::<Frame>(None);
    save_images.deploy(&edge)?;
    save_images.analyse(&camera)?;
    let monitor = monitoring(&["battery", "trajectory"])?;
    monitor.deploy(&edge)?;
    monitor.analyse(&odom)?;

    px4.start_mission()?;
    px4.navigate(&get_rectangular_survey_path(30.0, 60.0, 10.0, DEFAULT_SWATH, 1.0)?)
}
