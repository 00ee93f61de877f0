//! summary.txt and plot.svg. Every summary figure can be recomputed from
//! the CSV files of the same run.

use std::fmt::Write;

use daas_core::runtime::{FrameRecord, RunMetrics, TrajectorySample};

/// Mean, median and 95th percentile in milliseconds. Percentiles use the
/// nearest-rank rule on the sorted sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    pub median: f64,
    pub p95: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Self {
            mean: v.iter().sum::<f64>() / v.len() as f64,
            median: nearest_rank(&v, 50.0),
            p95: nearest_rank(&v, 95.0),
        })
    }
}

pub fn nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let rank = ((p / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub app: String,
    pub frames: usize,
    /// t_command - t_capture.
    pub end_to_end: Option<Stats>,
    /// t_infer_end - t_dispatch: first-stage inference including network legs.
    pub inference: Option<Stats>,
    /// end_to_end - inference.
    pub overhead: Option<Stats>,
    /// Polyline length of the sampled trajectory.
    pub distance_m: f64,
    pub final_battery: Option<f64>,
}

fn ms(records: &[FrameRecord], f: impl Fn(&FrameRecord) -> f64) -> Option<Stats> {
    Stats::of(&records.iter().map(f).collect::<Vec<_>>())
}

pub fn path_length(samples: &[TrajectorySample]) -> f64 {
    samples
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            ((b.x - a.x).powi(2) + (b.y - a.y).powi(2) + (b.z - a.z).powi(2)).sqrt()
        })
        .sum()
}

impl Summary {
    pub fn from_metrics(app: &str, m: &RunMetrics) -> Self {
        let f = &m.frames;
        Self {
            app: app.into(),
            frames: f.len(),
            end_to_end: ms(f, |r| r.end_to_end().as_millis_f64()),
            inference: ms(f, |r| r.inference().as_millis_f64()),
            overhead: ms(f, |r| {
                r.end_to_end().as_millis_f64() - r.inference().as_millis_f64()
            }),
            distance_m: path_length(&m.trajectory),
            final_battery: m.battery.last().map(|b| b.percent),
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "app: {}", self.app);
        let _ = writeln!(s, "frames: {}", self.frames);
        for (name, st) in [
            ("end_to_end_ms", self.end_to_end),
            ("inference_ms", self.inference),
            ("overhead_ms", self.overhead),
        ] {
            match st {
                Some(st) => {
                    let _ = writeln!(
                        s,
                        "{name}: mean {:.3} median {:.3} p95 {:.3}",
                        st.mean, st.median, st.p95
                    );
                }
                None => {
                    let _ = writeln!(s, "{name}: n/a");
                }
            }
        }
        let _ = writeln!(s, "distance_m: {:.3}", self.distance_m);
        match self.final_battery {
            Some(b) => {
                let _ = writeln!(s, "final_battery_pct: {b:.3}");
            }
            None => {
                let _ = writeln!(s, "final_battery_pct: n/a");
            }
        }
        s
    }
}

const PANEL: f64 = 360.0;
const PAD: f64 = 40.0;

/// Top-down trajectory on the left, end-to-end latency histogram on the right.
pub fn render_svg(m: &RunMetrics) -> String {
    let width = 2.0 * PANEL + 3.0 * PAD;
    let height = PANEL + 2.0 * PAD;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    trajectory_panel(&mut s, &m.trajectory);
    histogram_panel(&mut s, &m.frames, 2.0 * PAD + PANEL);
    s.push_str("</svg>\n");
    s
}

fn frame(s: &mut String, x0: f64, title: &str) {
    let _ = writeln!(
        s,
        r#"<rect x="{x0}" y="{PAD}" width="{PANEL}" height="{PANEL}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{title}</text>"#,
        x0 + PANEL / 2.0,
        PAD - 10.0
    );
}

fn trajectory_panel(s: &mut String, t: &[TrajectorySample]) {
    frame(s, PAD, "trajectory (top-down, m)");
    if t.is_empty() {
        return;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in t {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    let span = (x1 - x0).max(y1 - y0).max(1.0) * 1.1;
    let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
    let scale = PANEL / span;
    let mut points = String::new();
    for p in t {
        let px = PAD + PANEL / 2.0 + (p.x - cx) * scale;
        // image y grows downward
        let py = PAD + PANEL / 2.0 - (p.y - cy) * scale;
        let _ = write!(points, "{px:.1},{py:.1} ");
    }
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#,
        points.trim_end()
    );
    let _ = writeln!(
        s,
        r#"<text x="{PAD}" y="{}">x {x0:.1}..{x1:.1}  y {y0:.1}..{y1:.1}</text>"#,
        PAD + PANEL + 16.0
    );
}

fn histogram_panel(s: &mut String, frames: &[FrameRecord], x0: f64) {
    const BINS: usize = 20;
    frame(s, x0, "end-to-end latency histogram (ms)");
    let values: Vec<f64> = frames.iter().map(|r| r.end_to_end().as_millis_f64()).collect();
    let Some(max) = values.iter().copied().reduce(f64::max) else {
        return;
    };
    let lo = values.iter().copied().fold(f64::MAX, f64::min);
    let width = ((max - lo) / BINS as f64).max(1e-3);
    let mut counts = [0usize; BINS];
    for v in &values {
        counts[(((v - lo) / width) as usize).min(BINS - 1)] += 1;
    }
    let top = *counts.iter().max().unwrap_or(&1) as f64;
    let bar = PANEL / BINS as f64;
    for (i, &c) in counts.iter().enumerate() {
        let h = PANEL * c as f64 / top;
        let _ = writeln!(
            s,
            r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{h:.1}" fill="darkorange"/>"#,
            x0 + i as f64 * bar,
            PAD + PANEL - h,
            bar - 1.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{x0}" y="{}">{lo:.1} .. {max:.1} ms, n = {}</text>"#,
        PAD + PANEL + 16.0,
        values.len()
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_percentiles() {
        let v: Vec<f64> = (1..=20).map(f64::from).collect();
        let st = Stats::of(&v).unwrap();
        assert_eq!(st.median, 10.0);
        assert_eq!(st.p95, 19.0);
        assert_eq!(st.mean, 10.5);
        assert!(Stats::of(&[]).is_none());
    }
}
