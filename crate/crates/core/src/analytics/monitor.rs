use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use super::{resolve_dir, Analytic, Context, Transform};
use crate::aerodata::AeroData;
use crate::compute::ComputeHandle;
use crate::drone::Odometry;
use crate::error::{DaasError, Result};
use crate::runtime::{BatterySample, TrajectorySample};
use crate::sim::RuntimeSettings;

pub const METRICS: [&str; 2] = ["battery", "trajectory"];

/// Logs selected odometry metrics and passes each item through unchanged.
#[derive(Debug)]
pub struct Monitoring {
    metrics: Vec<String>,
    battery: Option<BufWriter<File>>,
    trajectory: Option<BufWriter<File>>,
    dir: Option<PathBuf>,
}

impl Monitoring {
    pub fn new(metrics: &[&str]) -> Result<Self> {
        if metrics.is_empty() {
            return Err(DaasError::Validation("monitoring needs at least one metric".into()));
        }
        if let Some(bad) = metrics.iter().find(|m| !METRICS.contains(m)) {
            return Err(DaasError::Validation(format!(
                "unknown metric '{bad}', expected one of {METRICS:?}"
            )));
        }
        Ok(Self {
            metrics: metrics.iter().map(|m| m.to_string()).collect(),
            battery: None,
            trajectory: None,
            dir: None,
        })
    }

    pub fn metrics(&self) -> &[String] {
        &self.metrics
    }

    pub fn with_dir(mut self, dir: PathBuf) -> Self {
        self.dir = Some(dir);
        self
    }

    fn log(&mut self, item: &AeroData<Odometry>) -> std::io::Result<()> {
        let (t, o) = (item.timestamp(), item.get_data());
        if let Some(w) = self.battery.as_mut() {
            writeln!(w, "{}", BatterySample { t, percent: o.battery }.csv_row())?;
            w.flush()?;
        }
        if let Some(w) = self.trajectory.as_mut() {
            let p = o.position;
            let s = TrajectorySample { t, x: p.x, y: p.y, z: p.z, yaw: o.yaw };
            writeln!(w, "{}", s.csv_row())?;
            w.flush()?;
        }
        Ok(())
    }
}

fn open(dir: &std::path::Path, name: &str, header: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir)?;
    let mut w = BufWriter::new(File::create(dir.join(name))?);
    writeln!(w, "{header}")?;
    w.flush()?;
    Ok(w)
}

impl Transform for Monitoring {
    type Input = Odometry;
    type Output = Odometry;

    fn name(&self) -> &str {
        "monitoring"
    }

    fn on_deploy(&mut self, _: &ComputeHandle, settings: &RuntimeSettings) -> Result<()> {
        let dir = resolve_dir(&self.dir, settings);
        for m in &self.metrics {
            match m.as_str() {
                "battery" => {
                    self.battery = Some(open(&dir, "battery.csv", BatterySample::CSV_HEADER)?)
                }
                _ => {
                    self.trajectory =
                        Some(open(&dir, "trajectory.csv", TrajectorySample::CSV_HEADER)?)
                }
            }
        }
        Ok(())
    }

    fn process(&mut self, item: &AeroData<Odometry>, _: &mut Context) -> Vec<Odometry> {
        let _ = self.log(item);
        vec![*item.get_data()]
    }
}

pub fn monitoring(metrics: &[&str]) -> Result<Analytic<Monitoring>> {
    Ok(Analytic::new(Monitoring::new(metrics)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_unknown_metrics() {
        assert!(Monitoring::new(&[]).unwrap_err().is_validation());
        assert!(Monitoring::new(&["battery", "altitude"]).unwrap_err().is_validation());
        assert_eq!(Monitoring::new(&["trajectory"]).unwrap().metrics(), ["trajectory"]);
    }
}
