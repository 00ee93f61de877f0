//! Priority merge of navigation command streams.

use crate::aerodata::NavigationCommand;
use crate::time::SimTime;

/// Chooses the command a robot follows among several sources.
///
/// Source `i` has priority `i`. The active command is the latest one from the
/// highest-priority source heard within the freshness window. A Land that
/// becomes active is latched for good.
#[derive(Debug, Clone)]
pub struct NavigationMerger {
    freshness: SimTime,
    last: Vec<Option<(SimTime, NavigationCommand)>>,
    latched: Option<(SimTime, NavigationCommand)>,
}

impl NavigationMerger {
    pub fn new(sources: usize, freshness: SimTime) -> Self {
        Self {
            freshness,
            last: vec![None; sources],
            latched: None,
        }
    }

    pub fn sources(&self) -> usize {
        self.last.len()
    }

    /// Records a command from `source` received at `at`.
    pub fn push(&mut self, source: usize, cmd: NavigationCommand, at: SimTime) {
        if let Some(slot) = self.last.get_mut(source) {
            *slot = Some((at, cmd));
        }
    }

    /// The active command at `now` and when it arrived.
    pub fn active(&mut self, now: SimTime) -> Option<(SimTime, NavigationCommand)> {
        if self.latched.is_some() {
            return self.latched;
        }
        let winner = self
            .last
            .iter()
            .rev()
            .flatten()
            .find(|(at, _)| now.saturating_sub(*at) <= self.freshness)
            .copied();
        if let Some((_, cmd)) = winner {
            if cmd.is_land() {
                self.latched = winner;
            }
        }
        winner
    }

    pub fn is_terminal(&self) -> bool {
        self.latched.is_some()
    }
}
