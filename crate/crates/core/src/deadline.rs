//! Cooperative wall-clock deadline passed down through long-running phases.

use std::time::{Duration, Instant};

/// An optional point in time after which work should stop and report
/// cancellation. `Deadline::none()` never expires.
#[derive(Clone, Copy, Debug)]
pub struct Deadline(Option<Instant>);

impl Deadline {
    pub fn none() -> Deadline {
        Deadline(None)
    }

    pub fn after(d: Duration) -> Deadline {
        Deadline(Some(Instant::now() + d))
    }

    pub fn at(t: Instant) -> Deadline {
        Deadline(Some(t))
    }

    pub fn expired(&self) -> bool {
        match self.0 {
            None => false,
            Some(t) => Instant::now() >= t,
        }
    }

    /// The earlier of two deadlines.
    pub fn min(self, other: Deadline) -> Deadline {
        match (self.0, other.0) {
            (None, b) => Deadline(b),
            (a, None) => Deadline(a),
            (Some(a), Some(b)) => Deadline(Some(a.min(b))),
        }
    }

    pub fn instant(&self) -> Option<Instant> {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn none_never_expires() {
        assert!(!Deadline::none().expired());
    }

    #[test]
    fn zero_duration_expires_immediately() {
        assert!(Deadline::after(Duration::from_secs(0)).expired());
    }

    #[test]
    fn min_picks_earlier() {
        let soon = Deadline::after(Duration::from_millis(1));
        let later = Deadline::after(Duration::from_secs(3600));
        let m = soon.min(later);
        assert_eq!(m.instant(), soon.instant());
        assert_eq!(Deadline::none().min(later).instant(), later.instant());
    }
}
