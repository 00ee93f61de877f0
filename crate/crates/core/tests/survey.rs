use daas_core::aerodata::{ListData, NavKind, NavigationCommand};
use daas_core::analytics::get_rectangular_survey_path;
use proptest::prelude::*;

fn waypoints(p: &ListData<NavigationCommand>) -> Vec<(f64, f64)> {
    p.iter()
        .filter_map(|c| match c.kind {
            NavKind::Waypoint { x, y, .. } => Some((x, y)),
            _ => None,
        })
        .collect()
}

fn seg_dist(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    let (qx, qy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - qx).powi(2) + (p.1 - qy).powi(2)).sqrt()
}

proptest! {
    #[test]
    fn grid_is_covered_within_half_swath(
        length in 5.0f64..80.0,
        width in 5.0f64..80.0,
        swath in 1.0f64..5.0,
    ) {
        let p = get_rectangular_survey_path(length, width, 10.0, swath, 1.0).unwrap();
        let mut pts = vec![(0.0, 0.0)];
        pts.extend(waypoints(&p));
        let steps = |extent: f64| (extent / 0.5).floor() as usize;
        for i in 0..=steps(length) {
            for j in 0..=steps(width) {
                let g = (i as f64 * 0.5, j as f64 * 0.5);
                let d = pts.windows(2).map(|w| seg_dist(g, w[0], w[1])).fold(f64::MAX, f64::min);
                prop_assert!(d <= swath / 2.0 + 1e-9, "{g:?} is {d} away");
            }
        }
        // closed-form length: passes, spacing legs and the return leg
        let n = (width / swath - 1e-9).ceil() + 1.0;
        let last = pts[pts.len() - 2];
        let expected = n * length + width + (last.0.powi(2) + last.1.powi(2)).sqrt();
        let flown: f64 = pts[1..].windows(2).map(|w| seg_dist(w[0], w[1], w[1])).sum();
        prop_assert!((flown - expected).abs() < 1e-6);
    }
}

#[test]
fn swath_equal_to_width_flies_two_passes() {
    let p = get_rectangular_survey_path(30.0, 10.0, 5.0, 10.0, 1.0).unwrap();
    let ys: Vec<f64> = waypoints(&p).iter().map(|w| w.1).collect();
    assert_eq!(ys, [0.0, 0.0, 10.0, 10.0, 0.0]);
    assert!(matches!(p.items()[0].kind, NavKind::Takeoff { height } if height == 5.0));
}
