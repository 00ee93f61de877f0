//! Boustrophedon coverage path over a rectangle anchored at the origin.

use crate::aerodata::{ListData, NavigationCommand};
use crate::error::{DaasError, Result};

/// Default distance between adjacent passes, in metres.
pub const DEFAULT_SWATH: f64 = 10.0;

/// Takes off, then flies passes along x over `length`. The first pass lies
/// on y = 0 and the last on y = width; the fewest passes are used that keep
/// spacing within `swath`. The path returns to the origin at `height` and
/// lands.
pub fn get_rectangular_survey_path(
    length: f64,
    width: f64,
    height: f64,
    swath: f64,
    speed: f64,
) -> Result<ListData<NavigationCommand>> {
    for (name, v) in [
        ("length", length),
        ("width", width),
        ("height", height),
        ("swath", swath),
        ("speed", speed),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(DaasError::InvalidArgument(format!("{name} must be positive, got {v}")));
        }
    }
    if swath > length.min(width) {
        return Err(DaasError::InvalidArgument(format!(
            "swath {swath} exceeds the shorter side {}",
            length.min(width)
        )));
    }
    let gaps = (width / swath - 1e-9).ceil() as usize;
    let spacing = width / gaps as f64;
    let mut cmds = Vec::with_capacity(2 * gaps + 5);
    cmds.push(NavigationCommand::takeoff(height)?);
    for i in 0..=gaps {
        let y = spacing * i as f64;
        let (a, b, yaw) = if i % 2 == 0 {
            (0.0, length, 0.0)
        } else {
            (length, 0.0, std::f64::consts::PI)
        };
        cmds.push(NavigationCommand::waypoint(a, y, height, yaw, speed)?);
        cmds.push(NavigationCommand::waypoint(b, y, height, yaw, speed)?);
    }
    cmds.push(NavigationCommand::waypoint(0.0, 0.0, height, 0.0, speed)?);
    cmds.push(NavigationCommand::land());
    Ok(ListData::new(cmds))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aerodata::NavKind;

    fn ys(path: &ListData<NavigationCommand>) -> Vec<f64> {
        path.iter()
            .filter_map(|c| match c.kind {
                NavKind::Waypoint { y, .. } => Some(y),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn pass_count_and_spacing() {
        let p = get_rectangular_survey_path(30.0, 60.0, 10.0, 10.0, 1.0).unwrap();
        // takeoff + 7 passes * 2 endpoints + return + land
        assert_eq!(p.len(), 17);
        assert_eq!(p.items()[0], NavigationCommand::takeoff(10.0).unwrap());
        let y = ys(&p);
        assert_eq!(y[12], 60.0);
        assert!(p.items().last().unwrap().is_land());
    }

    #[test]
    fn swath_equal_to_width_gives_edge_passes() {
        let p = get_rectangular_survey_path(20.0, 10.0, 5.0, 10.0, 2.0).unwrap();
        assert_eq!(ys(&p), vec![0.0, 0.0, 10.0, 10.0, 0.0]);
    }

    #[test]
    fn uneven_width_never_exceeds_swath() {
        let p = get_rectangular_survey_path(20.0, 25.0, 5.0, 10.0, 2.0).unwrap();
        let y = ys(&p);
        let passes: Vec<f64> = y[..y.len() - 1].iter().step_by(2).copied().collect();
        assert_eq!(passes.len(), 4);
        assert!(passes.windows(2).all(|w| w[1] - w[0] <= 10.0 + 1e-9));
    }

    #[test]
    fn bad_arguments() {
        assert!(get_rectangular_survey_path(0.0, 10.0, 5.0, 10.0, 1.0).is_err());
        assert!(get_rectangular_survey_path(10.0, 10.0, 5.0, -1.0, 1.0).is_err());
        assert!(get_rectangular_survey_path(10.0, 30.0, 5.0, 12.0, 1.0).is_err());
    }
}
