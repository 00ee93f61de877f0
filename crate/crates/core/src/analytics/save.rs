//! Persists a stream to disk: one CSV row per item, or one file per item
//! plus a manifest for payloads with a binary form.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::marker::PhantomData;
use std::path::{Path, PathBuf};

use super::{resolve_dir, Analytic, Context, Transform};
use crate::aerodata::{AeroData, BoundingBox};
use crate::compute::ComputeHandle;
use crate::drone::{BatteryLevel, Frame, GpsFix, Odometry};
use crate::error::Result;
use crate::sim::RuntimeSettings;

/// How an item type is written.
pub trait Persist: Clone + Send + 'static {
    /// Columns after `t_ms`.
    fn csv_header() -> &'static str;
    fn csv_fields(&self) -> String;
    /// Binary form with its file extension; such items go to separate files.
    fn blob(&self) -> Option<(Vec<u8>, &'static str)> {
        None
    }
}

impl Persist for GpsFix {
    fn csv_header() -> &'static str {
        "x,y,z"
    }
    fn csv_fields(&self) -> String {
        let p = self.position;
        format!("{:.3},{:.3},{:.3}", p.x, p.y, p.z)
    }
}

impl Persist for Odometry {
    fn csv_header() -> &'static str {
        "x,y,z,vx,vy,vz,yaw,battery"
    }
    fn csv_fields(&self) -> String {
        let (p, v) = (self.position, self.velocity);
        format!(
            "{:.3},{:.3},{:.3},{:.3},{:.3},{:.3},{:.4},{:.3}",
            p.x, p.y, p.z, v.x, v.y, v.z, self.yaw, self.battery
        )
    }
}

impl Persist for BatteryLevel {
    fn csv_header() -> &'static str {
        "percent"
    }
    fn csv_fields(&self) -> String {
        format!("{:.3}", self.percent)
    }
}

impl Persist for BoundingBox {
    fn csv_header() -> &'static str {
        "label,confidence,cx,cy,w,h"
    }
    fn csv_fields(&self) -> String {
        format!(
            "{},{:.3},{:.4},{:.4},{:.4},{:.4}",
            self.label, self.confidence, self.cx, self.cy, self.w, self.h
        )
    }
}

impl Persist for Frame {
    fn csv_header() -> &'static str {
        "seq,filename"
    }
    fn csv_fields(&self) -> String {
        String::new()
    }
    fn blob(&self) -> Option<(Vec<u8>, &'static str)> {
        Some((self.to_pgm(), "pgm"))
    }
}

#[derive(Debug)]
pub struct SaveData<E> {
    explicit: Option<PathBuf>,
    dir: Option<PathBuf>,
    out: Option<BufWriter<File>>,
    written: u64,
    _item: PhantomData<fn(E)>,
}

impl<E: Persist> SaveData<E> {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Self {
            explicit: dir,
            dir: None,
            out: None,
            written: 0,
            _item: PhantomData,
        }
    }

    /// Items written so far.
    pub fn written(&self) -> u64 {
        self.written
    }

    fn write(&mut self, item: &AeroData<E>, stream: &str) -> std::io::Result<()> {
        let dir = self.dir.clone().unwrap_or_else(|| PathBuf::from("."));
        let blob = item.get_data().blob();
        if self.out.is_none() {
            let (file, header) = match &blob {
                Some(_) => {
                    fs::create_dir_all(dir.join(stream))?;
                    (format!("{stream}_manifest.csv"), "seq,t_ms,filename".to_string())
                }
                None => (format!("{stream}.csv"), format!("t_ms,{}", E::csv_header())),
            };
            let mut w = BufWriter::new(File::create(dir.join(file))?);
            writeln!(w, "{header}")?;
            self.out = Some(w);
        }
        let w = self.out.as_mut().expect("opened above");
        let t = item.timestamp().fmt_ms();
        match blob {
            Some((bytes, ext)) => {
                let name = format!("{stream}/{:06}.{ext}", self.written);
                fs::write(dir.join(&name), bytes)?;
                writeln!(w, "{},{t},{name}", self.written)?;
            }
            None => writeln!(w, "{t},{}", item.get_data().csv_fields())?,
        }
        w.flush()?;
        self.written += 1;
        Ok(())
    }
}

fn probe(dir: &Path) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let p = dir.join(".save_data_probe");
    fs::write(&p, b"")?;
    fs::remove_file(p)
}

impl<E: Persist> Transform for SaveData<E> {
    type Input = E;
    type Output = ();

    fn name(&self) -> &str {
        "save_data"
    }

    fn on_deploy(&mut self, _: &ComputeHandle, settings: &RuntimeSettings) -> Result<()> {
        let dir = resolve_dir(&self.explicit, settings);
        probe(&dir)?;
        self.dir = Some(dir);
        Ok(())
    }

    fn process(&mut self, item: &AeroData<E>, ctx: &mut Context) -> Vec<()> {
        // a failing disk must not stop the mission; the item is skipped
        let _ = self.write(item, &ctx.input);
        Vec::new()
    }
}

/// Writes under `dir`, or the run's output directory when `None`.
pub fn save_data<E: Persist>(dir: Option<PathBuf>) -> Analytic<SaveData<E>> {
    Analytic::new(SaveData::new(dir))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::SimTime;
    use nalgebra::Vector3;

    #[test]
    fn csv_rows_have_header_and_one_line_per_item() {
        let tmp = tempfile::tempdir().unwrap();
        let mut s = SaveData::<GpsFix>::new(Some(tmp.path().into()));
        s.dir = Some(tmp.path().into());
        for i in 0..3 {
            let fix = GpsFix { position: Vector3::new(i as f64, 0.0, 1.0) };
            s.write(&AeroData::new(fix, SimTime::from_millis(i * 100)), "gps").unwrap();
        }
        let text = fs::read_to_string(tmp.path().join("gps.csv")).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "t_ms,x,y,z");
        assert_eq!(lines[3], "200.000,2.000,0.000,1.000");
    }

    #[test]
    fn frames_go_to_numbered_files() {
        let tmp = tempfile::tempdir().unwrap();
        let mut s = SaveData::<Frame>::new(None);
        s.dir = Some(tmp.path().into());
        for i in 0..2 {
            s.write(&AeroData::new(Frame::black(4, 3), SimTime::from_millis(i)), "cam").unwrap();
        }
        assert!(tmp.path().join("cam/000001.pgm").exists());
        let manifest = fs::read_to_string(tmp.path().join("cam_manifest.csv")).unwrap();
        assert_eq!(manifest.lines().nth(2), Some("1,1.000,cam/000001.pgm"));
    }
}
