//! Time source used for per-evaluation timing in traces.

/// Monotonic millisecond clock.
pub trait Clock {
    fn now_millis(&self) -> f64;
}

/// Clock that always reads zero. Used in `no_std` builds and when timing is
/// disabled for reproducible output.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullClock;

impl Clock for NullClock {
    fn now_millis(&self) -> f64 {
        0.0
    }
}

#[cfg(feature = "std")]
#[derive(Debug, Clone, Copy)]
pub struct WallClock(std::time::Instant);

#[cfg(feature = "std")]
impl WallClock {
    pub fn new() -> Self {
        WallClock(std::time::Instant::now())
    }
}

#[cfg(feature = "std")]
impl Default for WallClock {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(feature = "std")]
impl Clock for WallClock {
    fn now_millis(&self) -> f64 {
        self.0.elapsed().as_secs_f64() * 1e3
    }
}
