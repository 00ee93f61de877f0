//! Per-frame latency records, run metrics and their CSV forms.

use std::collections::BTreeMap;
use std::io::Write;

use crate::aerodata::Trace;
use crate::analytics::AlertRecord;
use crate::compute::InferenceJob;
use crate::drone::MissionReport;
use crate::time::SimTime;

/// Timeline of one camera frame from capture to the command it produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameRecord {
    pub frame_seq: u64,
    pub t_capture: SimTime,
    pub t_dispatch: SimTime,
    pub t_infer_start: SimTime,
    pub t_infer_end: SimTime,
    pub t_command: SimTime,
    /// Compute latency charged along the analytic chain.
    pub compute: SimTime,
}

impl FrameRecord {
    pub const CSV_HEADER: &'static str =
        "frame_seq,t_capture_ms,t_dispatch_ms,t_infer_start_ms,t_infer_end_ms,t_command_ms";

    pub(crate) fn from_trace(t: &Trace, t_command: SimTime) -> Option<Self> {
        Some(Self {
            frame_seq: t.frame_seq,
            t_capture: t.t_capture,
            t_dispatch: t.t_dispatch?,
            t_infer_start: t.t_infer_start?,
            t_infer_end: t.t_infer_end?,
            t_command,
            compute: t.compute,
        })
    }

    pub fn end_to_end(&self) -> SimTime {
        self.t_command - self.t_capture
    }

    /// Detector latency as seen by the dispatcher, network legs included.
    pub fn inference(&self) -> SimTime {
        self.t_infer_end - self.t_dispatch
    }

    /// Queue wait plus outbound network delay before inference starts.
    pub fn wait(&self) -> SimTime {
        self.t_infer_start - self.t_dispatch
    }

    /// End-to-end time not spent in analytic compute.
    pub fn overhead(&self) -> SimTime {
        self.end_to_end().saturating_sub(self.compute)
    }

    /// The four stage durations; they sum to [`end_to_end`](Self::end_to_end)
    /// when timestamps are ordered.
    pub fn stages(&self) -> Option<[SimTime; 4]> {
        let ordered = self.t_capture <= self.t_dispatch
            && self.t_dispatch <= self.t_infer_start
            && self.t_infer_start <= self.t_infer_end
            && self.t_infer_end <= self.t_command;
        ordered.then(|| {
            [
                self.t_dispatch - self.t_capture,
                self.t_infer_start - self.t_dispatch,
                self.t_infer_end - self.t_infer_start,
                self.t_command - self.t_infer_end,
            ]
        })
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.frame_seq,
            self.t_capture.fmt_ms(),
            self.t_dispatch.fmt_ms(),
            self.t_infer_start.fmt_ms(),
            self.t_infer_end.fmt_ms(),
            self.t_command.fmt_ms()
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: SimTime,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub yaw: f64,
}

impl TrajectorySample {
    pub const CSV_HEADER: &'static str = "t_ms,x,y,z,yaw";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.3},{:.3},{:.3},{:.3}",
            self.t.fmt_ms(),
            self.x,
            self.y,
            self.z,
            self.yaw
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatterySample {
    pub t: SimTime,
    pub percent: f64,
}

impl BatterySample {
    pub const CSV_HEADER: &'static str = "t_ms,percent";

    pub fn csv_row(&self) -> String {
        format!("{},{:.3}", self.t.fmt_ms(), self.percent)
    }
}

/// Everything a run produced.
#[derive(Debug, Clone, Default)]
pub struct RunMetrics {
    pub frames: Vec<FrameRecord>,
    pub trajectory: Vec<TrajectorySample>,
    pub battery: Vec<BatterySample>,
    pub jobs: Vec<InferenceJob>,
    pub alerts: Vec<AlertRecord>,
    pub reports: Vec<MissionReport>,
    /// Per-stream evicted-unread counts.
    pub drop_counts: BTreeMap<String, u64>,
    /// Peak resident set size of this process, if the OS reports it.
    pub peak_rss_bytes: Option<u64>,
    pub simulated: SimTime,
    pub wall_time: std::time::Duration,
}

pub fn write_csv<T>(
    mut w: impl Write,
    header: &str,
    rows: &[T],
    row: impl Fn(&T) -> String,
) -> std::io::Result<()> {
    writeln!(w, "{header}")?;
    for r in rows {
        writeln!(w, "{}", row(r))?;
    }
    Ok(())
}

/// `VmHWM` from `/proc/self/status`, in bytes.
pub fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}
