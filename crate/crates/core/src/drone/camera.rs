//! Synthetic pinhole camera: renders a bright rectangular subject on a dark
//! background and annotates each frame with ground truth.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use nalgebra::Vector3;
use serde::Deserialize;

use crate::aerodata::BoundingBox;
use crate::config::SensorSpec;
use crate::error::{DaasError, Result};
use crate::time::SimTime;

pub const TARGET_INTENSITY: u8 = 255;
pub const POSE_LABEL: &str = "pose_label";
pub const TARGET_BOX: &str = "target_box";

/// 8-bit grayscale image with metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub width: u32,
    pub height: u32,
    pub pixels: Arc<[u8]>,
    pub annotations: BTreeMap<String, String>,
}

impl Frame {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self> {
        if pixels.len() != (width as usize) * (height as usize) {
            return Err(DaasError::InvalidArgument(format!(
                "frame buffer has {} bytes, expected {}x{}",
                pixels.len(),
                width,
                height
            )));
        }
        Ok(Self {
            width,
            height,
            pixels: pixels.into(),
            annotations: BTreeMap::new(),
        })
    }

    pub fn black(width: u32, height: u32) -> Self {
        Self::new(width, height, vec![0; (width * height) as usize]).expect("sized buffer")
    }

    pub fn pixel(&self, x: u32, y: u32) -> u8 {
        self.pixels[(y * self.width + x) as usize]
    }

    pub fn pose_label(&self) -> Option<&str> {
        self.annotations.get(POSE_LABEL).map(String::as_str)
    }

    /// Ground-truth box of the rendered subject, if visible.
    pub fn target_box(&self) -> Option<BoundingBox> {
        let raw = self.annotations.get(TARGET_BOX)?;
        let v: Vec<f64> = raw.split(',').filter_map(|s| s.parse().ok()).collect();
        match v[..] {
            [cx, cy, w, h] => Some(BoundingBox::new("truth", 1.0, cx, cy, w, h)),
            _ => None,
        }
    }

    /// Binary PGM (P5) encoding.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }
}

/// Piecewise-linear subject trajectory, clamped at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetScript {
    points: Vec<(SimTime, Vector3<f64>)>,
}

#[derive(Deserialize)]
struct ScriptRow {
    t_ms: f64,
    x: f64,
    y: f64,
    z: f64,
}

impl TargetScript {
    pub fn stationary(p: Vector3<f64>) -> Self {
        Self {
            points: vec![(SimTime::ZERO, p)],
        }
    }

    /// Parses CSV with header `t_ms,x,y,z`; rows must be in time order.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = rdr
            .headers()
            .map_err(|e| DaasError::Parse(format!("target script: {e}")))?
            .clone();
        if headers.iter().collect::<Vec<_>>() != ["t_ms", "x", "y", "z"] {
            return Err(DaasError::Parse(
                "target script header must be `t_ms,x,y,z`".into(),
            ));
        }
        let mut points = Vec::new();
        for row in rdr.deserialize::<ScriptRow>() {
            let row = row.map_err(|e| DaasError::Parse(format!("target script: {e}")))?;
            let t = SimTime::from_millis_f64(row.t_ms);
            if points.last().is_some_and(|(prev, _)| *prev > t) {
                return Err(DaasError::Parse("target script rows out of time order".into()));
            }
            points.push((t, Vector3::new(row.x, row.y, row.z)));
        }
        if points.is_empty() {
            return Err(DaasError::Parse("target script has no rows".into()));
        }
        Ok(Self { points })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }

    pub fn position(&self, t: SimTime) -> Vector3<f64> {
        let pts = &self.points;
        let i = pts.partition_point(|(pt, _)| *pt <= t);
        if i == 0 {
            return pts[0].1;
        }
        if i == pts.len() {
            return pts[i - 1].1;
        }
        let (t0, p0) = pts[i - 1];
        let (t1, p1) = pts[i];
        let span = (t1 - t0).as_secs_f64();
        if span == 0.0 {
            return p1;
        }
        let a = (t - t0).as_secs_f64() / span;
        p0 + (p1 - p0) * a
    }
}

/// Camera parameters read from the sensor's `params`.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraModel {
    pub width: u32,
    pub height: u32,
    pub focal_px: f64,
    /// 0 looks along the heading, -90 straight down.
    pub pitch_deg: f64,
    pub target: Option<TargetScript>,
    pub target_size: (f64, f64),
    /// `(t, label)` sorted by time; the label holds until the next entry.
    pub pose_events: Vec<(SimTime, String)>,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            width: 160,
            height: 120,
            focal_px: 360.0,
            pitch_deg: 0.0,
            target: None,
            target_size: (0.5, 0.4),
            pose_events: Vec::new(),
        }
    }
}

impl CameraModel {
    /// `base_dir` resolves a relative `target_script` path.
    pub fn from_spec(spec: &SensorSpec, base_dir: Option<&Path>) -> Result<Self> {
        let mut m = Self::default();
        let bad = |what: &str| DaasError::Validation(format!("camera `{}`: {what}", spec.id));
        if let Some(w) = spec.param_f64("width") {
            m.width = w as u32;
        }
        if let Some(h) = spec.param_f64("height") {
            m.height = h as u32;
        }
        if m.width == 0 || m.height == 0 {
            return Err(bad("frame size must be positive"));
        }
        if let Some(f) = spec.param_f64("focal_px") {
            if !(f > 0.0) {
                return Err(bad("focal_px must be > 0"));
            }
            m.focal_px = f;
        }
        if let Some(p) = spec.param_f64("pitch_deg") {
            m.pitch_deg = p;
        }
        if let Some(w) = spec.param_f64("target_width") {
            m.target_size.0 = w;
        }
        if let Some(h) = spec.param_f64("target_height") {
            m.target_size.1 = h;
        }
        if let Some(rel) = spec.param_str("target_script") {
            let path = match base_dir {
                Some(dir) => dir.join(rel),
                None => Path::new(rel).to_path_buf(),
            };
            m.target = Some(TargetScript::from_path(&path)?);
        } else if let Some(v) = spec.params.get("target_position") {
            let p: [f64; 3] = serde_json::from_value(v.clone())
                .map_err(|_| bad("target_position must be [x, y, z]"))?;
            m.target = Some(TargetScript::stationary(Vector3::from(p)));
        }
        if let Some(v) = spec.params.get("pose_events") {
            let events: Vec<(f64, String)> = serde_json::from_value(v.clone())
                .map_err(|_| bad("pose_events must be [[t_ms, label], ...]"))?;
            m.pose_events = events
                .into_iter()
                .map(|(t, l)| (SimTime::from_millis_f64(t), l))
                .collect();
            m.pose_events.sort_by_key(|(t, _)| *t);
        }
        Ok(m)
    }

    pub fn pose_label(&self, t: SimTime) -> &str {
        self.pose_events
            .iter()
            .rev()
            .find(|(at, _)| *at <= t)
            .map_or("normal", |(_, l)| l.as_str())
    }

    /// Projects the subject at time `t` for a camera at `eye` with heading
    /// `yaw`. Returns the pixel rectangle `[x0, x1) x [y0, y1)` in continuous
    /// image coordinates, unclipped.
    pub fn project(&self, eye: Vector3<f64>, yaw: f64, t: SimTime) -> Option<[f64; 4]> {
        let target = self.target.as_ref()?.position(t);
        let pitch = self.pitch_deg.to_radians();
        let fwd = Vector3::new(yaw.cos() * pitch.cos(), yaw.sin() * pitch.cos(), pitch.sin());
        let right = Vector3::new(yaw.sin(), -yaw.cos(), 0.0);
        let up = right.cross(&fwd);
        let d = target - eye;
        let depth = d.dot(&fwd);
        if depth < 0.1 {
            return None;
        }
        let (w, h) = (self.width as f64, self.height as f64);
        let u = self.focal_px * d.dot(&right) / depth + w / 2.0;
        let v = -self.focal_px * d.dot(&up) / depth + h / 2.0;
        let hw = self.focal_px * self.target_size.0 / 2.0 / depth;
        let hh = self.focal_px * self.target_size.1 / 2.0 / depth;
        Some([u - hw, u + hw, v - hh, v + hh])
    }

    pub fn render(&self, eye: Vector3<f64>, yaw: f64, t: SimTime) -> Frame {
        let mut frame = Frame::black(self.width, self.height);
        let (w, h) = (self.width as f64, self.height as f64);
        if let Some([x0, x1, y0, y1]) = self.project(eye, yaw, t) {
            let (cx0, cx1) = (x0.clamp(0.0, w), x1.clamp(0.0, w));
            let (cy0, cy1) = (y0.clamp(0.0, h), y1.clamp(0.0, h));
            if cx1 > cx0 && cy1 > cy0 {
                let mut px = vec![0u8; (self.width * self.height) as usize];
                // pixel (i, j) is lit when its center lies inside the rectangle
                let cols = first_center(cx0)..first_center(cx1);
                let rows = first_center(cy0)..first_center(cy1);
                for j in rows {
                    let row = j * self.width as usize;
                    for i in cols.clone() {
                        px[row + i] = TARGET_INTENSITY;
                    }
                }
                frame.pixels = px.into();
                frame.annotations.insert(
                    TARGET_BOX.into(),
                    format!(
                        "{:.6},{:.6},{:.6},{:.6}",
                        (cx0 + cx1) / 2.0 / w,
                        (cy0 + cy1) / 2.0 / h,
                        (cx1 - cx0) / w,
                        (cy1 - cy0) / h
                    ),
                );
            }
        }
        frame
            .annotations
            .insert(POSE_LABEL.into(), self.pose_label(t).to_string());
        frame
    }
}

// Index of the first pixel whose center (i + 0.5) is >= x.
fn first_center(x: f64) -> usize {
    (x - 0.5).ceil().max(0.0) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cam() -> CameraModel {
        CameraModel {
            target: Some(TargetScript::stationary(Vector3::new(3.0, 0.0, 1.5))),
            ..CameraModel::default()
        }
    }

    #[test]
    fn centered_target_renders_at_center() {
        let f = cam().render(Vector3::new(0.0, 0.0, 1.5), 0.0, SimTime::ZERO);
        let b = f.target_box().unwrap();
        assert!((b.cx - 0.5).abs() < 1e-9 && (b.cy - 0.5).abs() < 1e-9);
        // 360 * 0.5 / 3 = 60 px wide, 48 px tall
        assert!((b.w * 160.0 - 60.0).abs() < 1e-9);
        assert!((b.h * 120.0 - 48.0).abs() < 1e-9);
        let lit = f.pixels.iter().filter(|&&p| p == TARGET_INTENSITY).count();
        assert_eq!(lit, 60 * 48);
        assert_eq!(f.pose_label(), Some("normal"));
    }

    #[test]
    fn target_to_the_right_moves_right_in_image() {
        let f = cam().render(Vector3::new(0.0, 0.0, 1.5), 0.2, SimTime::ZERO);
        assert!(f.target_box().unwrap().cx > 0.5);
        let f = cam().render(Vector3::new(0.0, 0.0, 1.2), 0.0, SimTime::ZERO);
        assert!(f.target_box().unwrap().cy < 0.5, "drone below target sees it high");
    }

    #[test]
    fn behind_camera_is_invisible() {
        let f = cam().render(Vector3::new(0.0, 0.0, 1.5), std::f64::consts::PI, SimTime::ZERO);
        assert!(f.target_box().is_none());
        assert!(f.pixels.iter().all(|&p| p == 0));
    }

    #[test]
    fn downward_camera_sees_ground_target() {
        let m = CameraModel {
            pitch_deg: -90.0,
            target: Some(TargetScript::stationary(Vector3::new(1.0, 0.0, 0.0))),
            ..CameraModel::default()
        };
        let b = m.render(Vector3::new(0.0, 0.0, 10.0), 0.0, SimTime::ZERO)
            .target_box()
            .unwrap();
        // ahead of the drone shows up toward the top of the image
        assert!(b.cy < 0.5);
        assert!((b.cx - 0.5).abs() < 1e-9);
    }

    #[test]
    fn script_interpolates_and_clamps() {
        let s = TargetScript::from_csv("t_ms,x,y,z\n0,0,0,1\n1000,2,0,1\n").unwrap();
        assert_eq!(s.position(SimTime::from_millis(500)), Vector3::new(1.0, 0.0, 1.0));
        assert_eq!(s.position(SimTime::from_secs(5)), Vector3::new(2.0, 0.0, 1.0));
        assert!(TargetScript::from_csv("t,x,y,z\n0,0,0,0\n").is_err());
        assert!(TargetScript::from_csv("t_ms,x,y,z\n5,0,0,0\n1,0,0,0\n").is_err());
    }

    #[test]
    fn pose_schedule_holds_until_next_event() {
        let m = CameraModel {
            pose_events: vec![
                (SimTime::from_secs(2), "fall".into()),
                (SimTime::from_secs(4), "normal".into()),
            ],
            ..CameraModel::default()
        };
        assert_eq!(m.pose_label(SimTime::from_secs(1)), "normal");
        assert_eq!(m.pose_label(SimTime::from_secs(3)), "fall");
        assert_eq!(m.pose_label(SimTime::from_secs(4)), "normal");
    }

    #[test]
    fn pgm_encoding() {
        let f = Frame::black(2, 1);
        assert_eq!(f.to_pgm(), b"P5\n2 1\n255\n\0\0".to_vec());
        assert!(Frame::new(2, 2, vec![0; 3]).is_err());
    }
}
