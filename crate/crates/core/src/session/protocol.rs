use super::{AnnotationTrack, Interval, Label};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    IsolatedMovement,
    IsometricContraction,
    GestureClassification,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::IsolatedMovement => "isolated_movement",
            Task::IsometricContraction => "isometric_contraction",
            Task::GestureClassification => "gesture_classification",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSpec {
    pub task: Task,
    pub movement_duration: f64,
    pub rest_duration: f64,
    pub repetitions: u32,
    pub gestures: Vec<Label>,
}

impl ProtocolSpec {
    /// Open/close blocks of 5 s movement and 5 s rest. Healthy sessions use
    /// 8 repetitions, the stroke variant 3.
    pub fn gesture_classification(repetitions: u32) -> Self {
        ProtocolSpec {
            task: Task::GestureClassification,
            movement_duration: 5.0,
            rest_duration: 5.0,
            repetitions,
            gestures: vec![Label::HandOpen, Label::HandClose],
        }
    }

    /// Thumb abduction, finger extension and finger flexion held 5 s each.
    pub fn isolated_movement(repetitions: u32) -> Self {
        ProtocolSpec {
            task: Task::IsolatedMovement,
            movement_duration: 5.0,
            rest_duration: 5.0,
            repetitions,
            gestures: vec![Label::ThumbAbduction, Label::FingerExtension, Label::FingerFlexion],
        }
    }

    pub fn isometric_contraction(repetitions: u32) -> Self {
        ProtocolSpec { task: Task::IsometricContraction, ..Self::isolated_movement(repetitions) }
    }

    pub fn check(&self) -> Result<(), String> {
        if self.repetitions == 0 {
            return Err("repetitions must be at least 1".into());
        }
        if !(self.movement_duration > 0.0 && self.movement_duration.is_finite()) {
            return Err(format!("movement_duration {} must be positive", self.movement_duration));
        }
        if !(self.rest_duration > 0.0 && self.rest_duration.is_finite()) {
            return Err(format!("rest_duration {} must be positive", self.rest_duration));
        }
        if self.gestures.is_empty() {
            return Err("protocol lists no gestures".into());
        }
        if self.gestures.contains(&Label::Relax) {
            return Err("relax is implicit and cannot be a protocol gesture".into());
        }
        Ok(())
    }

    /// Length of one gesture-plus-rest block.
    pub fn block_duration(&self) -> f64 {
        self.movement_duration + self.rest_duration
    }

    pub fn duration(&self) -> f64 {
        self.repetitions as f64 * self.gestures.len() as f64 * self.block_duration()
    }
}

/// Expands a protocol into alternating gesture/rest intervals starting at
/// `start`: each repetition visits every gesture in order, each followed
/// by its rest.
pub fn expand_protocol(spec: &ProtocolSpec, start: f64) -> AnnotationTrack {
    let block = spec.block_duration();
    let mut intervals = Vec::with_capacity(2 * spec.repetitions as usize * spec.gestures.len());
    let mut k = 0usize;
    for _ in 0..spec.repetitions {
        for &g in &spec.gestures {
            let t0 = start + k as f64 * block;
            let t1 = t0 + spec.movement_duration;
            let t2 = start + (k + 1) as f64 * block;
            intervals.push(Interval::new(t0, t1, g));
            intervals.push(Interval::new(t1, t2, Label::Relax));
            k += 1;
        }
    }
    AnnotationTrack::new(intervals).expect("protocol expansion yields a valid track")
}
