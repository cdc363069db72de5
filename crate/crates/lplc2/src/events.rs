//! Per-frame detection records emitted by the ensemble.

/// Snapshot of one live attention field at the end of a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct AfSnapshot {
    pub id: u64,
    pub cx: usize,
    pub cy: usize,
    pub radius: usize,
    /// This frame's integrated response.
    pub response: f64,
    /// Frames since the field was created (0 on its birth frame).
    pub age_frames: usize,
    /// Response sum over the trailing accumulation window.
    pub windowed_sum: f64,
}

/// Everything that happened during one frame: the surviving fields plus the
/// creation/removal delta against the previous frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectionEvent {
    pub frame_index: usize,
    pub afs: Vec<AfSnapshot>,
    pub created: Vec<u64>,
    pub removed: Vec<u64>,
}
