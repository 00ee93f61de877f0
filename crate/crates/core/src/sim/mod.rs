//! Shared simulation core: clock, event calendar, runtime settings and the
//! run journal that analytics and robots append to.

pub mod calendar;

use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use parking_lot::{Mutex, RwLock};

use crate::analytics::AlertRecord;
use crate::compute::InferenceJob;
use crate::runtime::graph::GraphRecorder;
use crate::runtime::metrics::FrameRecord;
use crate::time::SimTime;

use calendar::Calendar;

/// How the simulation clock relates to wall time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClockMode {
    /// Time jumps from event to event; plumbing costs nothing.
    #[default]
    Virtual,
    /// Events are paced against the host clock and timestamps are measured.
    Wall,
}

impl std::str::FromStr for ClockMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "virtual" => Ok(ClockMode::Virtual),
            "wall" => Ok(ClockMode::Wall),
            other => Err(format!("unknown mode `{other}` (expected virtual|wall)")),
        }
    }
}

/// Graph-level knobs shared by every component.
#[derive(Debug, Clone)]
pub struct RuntimeSettings {
    /// Physics integration step.
    pub tick: SimTime,
    /// Vision analytics see every n-th camera frame.
    pub frame_cadence: u32,
    /// A navigation source stays eligible this long after its last command.
    pub freshness: SimTime,
    /// Where analytics without an explicit path write their files.
    pub output_dir: Option<PathBuf>,
}

impl Default for RuntimeSettings {
    fn default() -> Self {
        Self {
            tick: SimTime::from_millis(20),
            frame_cadence: 2,
            freshness: SimTime::from_secs(2),
            output_dir: None,
        }
    }
}

struct Clock {
    mode: ClockMode,
    now: SimTime,
    wall_anchor: Option<(Instant, SimTime)>,
}

impl Clock {
    fn read(&mut self) -> SimTime {
        if let (ClockMode::Wall, Some((origin, base))) = (self.mode, self.wall_anchor) {
            let measured = base + SimTime::from_micros(origin.elapsed().as_micros() as u64);
            self.now = self.now.max(measured);
        }
        self.now
    }
}

/// Everything recorded while a run executes.
#[derive(Default)]
pub struct Journal {
    pub jobs: Mutex<Vec<InferenceJob>>,
    pub alerts: Mutex<Vec<AlertRecord>>,
    pub frames: Mutex<Vec<FrameRecord>>,
}

struct Shared {
    seed: u64,
    clock: Mutex<Clock>,
    calendar: Mutex<Calendar>,
    settings: RwLock<RuntimeSettings>,
    journal: Journal,
    recorder: Mutex<GraphRecorder>,
    next_id: AtomicU64,
}

/// Handle to the simulation core. Cloning is cheap and shares state.
#[derive(Clone)]
pub struct Simulation {
    shared: Arc<Shared>,
}

impl Simulation {
    pub fn new(seed: u64) -> Self {
        Self {
            shared: Arc::new(Shared {
                seed,
                clock: Mutex::new(Clock {
                    mode: ClockMode::Virtual,
                    now: SimTime::ZERO,
                    wall_anchor: None,
                }),
                calendar: Mutex::new(Calendar::new()),
                settings: RwLock::new(RuntimeSettings::default()),
                journal: Journal::default(),
                recorder: Mutex::new(GraphRecorder::default()),
                next_id: AtomicU64::new(0),
            }),
        }
    }

    pub fn seed(&self) -> u64 {
        self.shared.seed
    }

    pub fn now(&self) -> SimTime {
        self.shared.clock.lock().read()
    }

    pub fn mode(&self) -> ClockMode {
        self.shared.clock.lock().mode
    }

    /// Switches clock mode. Entering wall mode anchors the current simulation
    /// time to the present host instant.
    pub fn set_mode(&self, mode: ClockMode) {
        let mut clock = self.shared.clock.lock();
        let now = clock.read();
        clock.mode = mode;
        clock.wall_anchor = match mode {
            ClockMode::Wall => Some((Instant::now(), now)),
            ClockMode::Virtual => None,
        };
    }

    pub fn settings(&self) -> RuntimeSettings {
        self.shared.settings.read().clone()
    }

    pub fn update_settings(&self, f: impl FnOnce(&mut RuntimeSettings)) {
        f(&mut self.shared.settings.write());
    }

    pub fn journal(&self) -> &Journal {
        &self.shared.journal
    }

    pub(crate) fn recorder(&self) -> parking_lot::MutexGuard<'_, GraphRecorder> {
        self.shared.recorder.lock()
    }

    /// Process-unique identifier for streams, jobs and similar.
    pub fn next_id(&self) -> u64 {
        self.shared.next_id.fetch_add(1, Ordering::Relaxed)
    }

    /// Schedules `action` at `at`; times in the past run at the current time.
    pub fn schedule_at(&self, at: SimTime, action: impl FnOnce() + Send + 'static) {
        let at = at.max(self.now());
        self.shared.calendar.lock().schedule(at, Box::new(action));
    }

    pub fn schedule_in(&self, delay: SimTime, action: impl FnOnce() + Send + 'static) {
        let at = self.now() + delay;
        self.shared.calendar.lock().schedule(at, Box::new(action));
    }

    /// Discards every scheduled event. Pending events hold handles back into
    /// the simulation, so clearing them also breaks those reference cycles.
    pub fn clear_pending(&self) {
        let old = std::mem::replace(&mut *self.shared.calendar.lock(), Calendar::new());
        drop(old);
    }

    pub fn pending_events(&self) -> usize {
        self.shared.calendar.lock().len()
    }

    /// Executes every event due at or before `limit`, then advances the clock
    /// to `limit`.
    pub fn run_until(&self, limit: SimTime) {
        self.run_until_or(limit, || false);
    }

    /// Like [`run_until`](Self::run_until) but returns early, without
    /// advancing to `limit`, once `stop` reports true. Returns whether it
    /// stopped early.
    pub fn run_until_or(&self, limit: SimTime, mut stop: impl FnMut() -> bool) -> bool {
        loop {
            if stop() {
                return true;
            }
            let next = self.shared.calendar.lock().pop_due(limit);
            match next {
                Some((at, _, action)) => {
                    self.advance_to(at);
                    action();
                }
                None => break,
            }
        }
        self.advance_to(limit);
        false
    }

    fn advance_to(&self, at: SimTime) {
        let sleep_for = {
            let mut clock = self.shared.clock.lock();
            match (clock.mode, clock.wall_anchor) {
                (ClockMode::Wall, Some((origin, base))) => {
                    let target = origin + Duration::from_micros(at.saturating_sub(base).as_micros());
                    target.checked_duration_since(Instant::now())
                }
                _ => {
                    clock.now = clock.now.max(at);
                    None
                }
            }
        };
        if let Some(d) = sleep_for {
            std::thread::sleep(d);
        }
        let mut clock = self.shared.clock.lock();
        clock.read();
        clock.now = clock.now.max(at);
    }
}

impl std::fmt::Debug for Simulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Simulation")
            .field("seed", &self.shared.seed)
            .field("now", &self.now())
            .finish()
    }
}
