use std::time::{Duration, Instant};

use lyapforge_core::deadline::Deadline;

/// Wall-clock deadline; a non-positive or non-finite budget never expires.
#[derive(Clone, Copy, Debug)]
pub struct Timer {
    end: Option<Instant>,
}

impl Timer {
    pub fn after_secs(secs: f64) -> Timer {
        let end = (secs.is_finite() && secs > 0.0).then(|| Instant::now() + Duration::from_secs_f64(secs));
        Timer { end }
    }

    pub fn unlimited() -> Timer {
        Timer { end: None }
    }
}

impl Deadline for Timer {
    fn expired(&self) -> bool {
        self.end.is_some_and(|e| Instant::now() >= e)
    }
}
