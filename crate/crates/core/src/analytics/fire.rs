use super::{AlertRecord, Analytic, Context, Transform};
use crate::aerodata::{AeroData, BoundingBox};
use crate::time::SimTime;

/// Raises a fire alert for confident detections, at most once per window.
#[derive(Debug, Clone)]
pub struct FireAlert {
    pub threshold: f64,
    pub window: SimTime,
    last: Option<SimTime>,
}

impl Default for FireAlert {
    fn default() -> Self {
        Self {
            threshold: 0.5,
            window: SimTime::from_secs(2),
            last: None,
        }
    }
}

impl FireAlert {
    /// Alert for a box observed at `t`, if not below threshold or suppressed.
    pub fn check(&mut self, b: &BoundingBox, t: SimTime) -> Option<AlertRecord> {
        if b.confidence < self.threshold {
            return None;
        }
        if self.last.is_some_and(|last| t.saturating_sub(last) < self.window) {
            return None;
        }
        self.last = Some(t);
        Some(AlertRecord {
            t,
            kind: "fire".into(),
            source: "fire_alert".into(),
            label: b.label.clone(),
            confidence: b.confidence,
            bbox: Some(b.clone()),
        })
    }
}

impl Transform for FireAlert {
    type Input = BoundingBox;
    type Output = AlertRecord;

    fn name(&self) -> &str {
        "fire_alert"
    }

    fn process(&mut self, item: &AeroData<BoundingBox>, ctx: &mut Context) -> Vec<AlertRecord> {
        let alert = self.check(item.get_data(), item.timestamp());
        if let Some(a) = &alert {
            ctx.alert(a.clone());
        }
        alert.into_iter().collect()
    }

    fn stamp(out: &mut AlertRecord, t: SimTime) {
        out.t = t;
    }
}

pub fn fire_alert() -> Analytic<FireAlert> {
    Analytic::new(FireAlert::default())
}
