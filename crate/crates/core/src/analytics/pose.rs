//! Emergency commands from body pose. The label comes from the frame's
//! annotations in simulation; a real classifier plugs in behind the same
//! transform.

use super::{AlertRecord, Analytic, Context, Transform};
use crate::aerodata::{AeroData, NavigationCommand};
use crate::drone::Frame;

#[derive(Debug, Clone, Default)]
pub struct BodyPose {
    in_fall: bool,
}

impl BodyPose {
    /// Commands for one observed label. A fall alert is raised only on
    /// entering the fall state.
    pub fn react(&mut self, label: &str, ctx: &mut Context) -> Vec<NavigationCommand> {
        let was_fall = std::mem::replace(&mut self.in_fall, label == "fall");
        match label {
            "hand_raised" => vec![NavigationCommand::land()],
            "fall" => {
                if !was_fall {
                    ctx.alert(AlertRecord {
                        t: ctx.now,
                        kind: "fall".into(),
                        source: "body_pose".into(),
                        label: label.into(),
                        confidence: 1.0,
                        bbox: None,
                    });
                }
                vec![NavigationCommand::hover()]
            }
            _ => Vec::new(),
        }
    }
}

impl Transform for BodyPose {
    type Input = Frame;
    type Output = NavigationCommand;

    fn name(&self) -> &str {
        "body_pose"
    }

    fn is_vision(&self) -> bool {
        true
    }

    fn process(&mut self, item: &AeroData<Frame>, ctx: &mut Context) -> Vec<NavigationCommand> {
        let label = item.get_data().pose_label().unwrap_or("normal").to_string();
        self.react(&label, ctx)
    }
}

pub fn body_pose() -> Analytic<BodyPose> {
    Analytic::new(BodyPose::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::RuntimeSettings;
    use crate::time::SimTime;

    fn ctx() -> Context {
        Context::new(SimTime::ZERO, "camera", RuntimeSettings::default())
    }

    #[test]
    fn rule_table() {
        let mut p = BodyPose::default();
        let mut c = ctx();
        assert_eq!(p.react("hand_raised", &mut c), vec![NavigationCommand::land()]);
        assert!(p.react("normal", &mut c).is_empty());
        assert_eq!(p.react("fall", &mut c), vec![NavigationCommand::hover()]);
        assert_eq!(c.alerts.len(), 1);
        assert_eq!(c.alerts[0].kind, "fall");
    }

    #[test]
    fn continued_fall_does_not_realert() {
        let mut p = BodyPose::default();
        let mut c = ctx();
        for _ in 0..5 {
            p.react("fall", &mut c);
        }
        p.react("normal", &mut c);
        p.react("fall", &mut c);
        assert_eq!(c.alerts.len(), 2);
    }
}
