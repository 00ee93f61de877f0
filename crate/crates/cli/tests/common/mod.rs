#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

pub fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

/// Numeric columns of a CSV file keyed by header; non-numeric cells are NaN.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> Table {
        let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default().split(',').map(String::from).collect();
        let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
        Table { header, rows }
    }

    pub fn col(&self, name: &str) -> Vec<f64> {
        let i = self
            .header
            .iter()
            .position(|h| h == name)
            .unwrap_or_else(|| panic!("no column {name} in {:?}", self.header));
        self.rows.iter().map(|r| r[i].parse().unwrap_or(f64::NAN)).collect()
    }

    pub fn text(&self, name: &str) -> Vec<String> {
        let i = self.header.iter().position(|h| h == name).unwrap();
        self.rows.iter().map(|r| r[i].clone()).collect()
    }
}

/// (t_s, x, y, z) rows of `trajectory.csv`.
pub fn trajectory(out: &Path) -> Vec<[f64; 4]> {
    let t = Table::read(&out.join("trajectory.csv"));
    let (ts, xs, ys, zs) = (t.col("t_ms"), t.col("x"), t.col("y"), t.col("z"));
    (0..ts.len()).map(|i| [ts[i] / 1000.0, xs[i], ys[i], zs[i]]).collect()
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Battery never rises and no trajectory step exceeds `max_speed * dt`.
/// Positions are printed to the millimetre, hence the slack.
pub fn check_run_invariants(out: &Path, max_speed: f64) -> Result<(), String> {
    let battery = Table::read(&out.join("battery.csv")).col("percent");
    if let Some(w) = battery.windows(2).find(|w| w[1] > w[0]) {
        return Err(format!("battery rose {} -> {}", w[0], w[1]));
    }
    let traj = trajectory(out);
    for w in traj.windows(2) {
        let [t0, x0, y0, z0] = w[0];
        let [t1, x1, y1, z1] = w[1];
        let d = ((x1 - x0).powi(2) + (y1 - y0).powi(2) + (z1 - z0).powi(2)).sqrt();
        if d > max_speed * (t1 - t0) + 2e-3 {
            return Err(format!("jump of {d:.4} m between t={t0} and t={t1}"));
        }
    }
    Ok(())
}

pub fn dir_files(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let bytes = fs::read(&p).unwrap();
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), bytes));
            }
        }
    }
    out.sort();
    out
}
