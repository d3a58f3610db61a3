//! Time sources and the oracle timing accumulator.

/// Monotone time source in seconds.
pub trait Clock {
    fn now(&self) -> f64;
}

/// A clock that never advances. Timings collected with it are all zero.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullClock;

impl Clock for NullClock {
    fn now(&self) -> f64 {
        0.0
    }
}

#[cfg(feature = "std")]
#[derive(Debug, Clone, Copy)]
pub struct StdClock {
    origin: std::time::Instant,
}

#[cfg(feature = "std")]
impl StdClock {
    pub fn new() -> Self {
        Self {
            origin: std::time::Instant::now(),
        }
    }
}

#[cfg(feature = "std")]
impl Default for StdClock {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(feature = "std")]
impl Clock for StdClock {
    fn now(&self) -> f64 {
        self.origin.elapsed().as_secs_f64()
    }
}

/// Wall time spent inside oracle callbacks, split by category.
#[derive(Debug, Default, Clone, Copy, PartialEq)]
pub struct OracleTimings {
    /// Objective and constraint values.
    pub function_s: f64,
    /// Objective gradient and constraint Jacobian.
    pub jacobian_s: f64,
    /// Lagrangian Hessian.
    pub hessian_s: f64,
}

impl OracleTimings {
    pub fn total(&self) -> f64 {
        self.function_s + self.jacobian_s + self.hessian_s
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Category {
    Function,
    Jacobian,
    Hessian,
}

/// Pairs a clock with a caller-owned accumulator.
pub struct Timer<'c> {
    clock: &'c dyn Clock,
    pub timings: OracleTimings,
}

impl<'c> Timer<'c> {
    pub fn new(clock: &'c dyn Clock) -> Self {
        Self {
            clock,
            timings: OracleTimings::default(),
        }
    }

    pub fn now(&self) -> f64 {
        self.clock.now()
    }

    pub(crate) fn time<T>(&mut self, category: Category, f: impl FnOnce() -> T) -> T {
        let start = self.clock.now();
        let out = f();
        let elapsed = (self.clock.now() - start).max(0.0);
        match category {
            Category::Function => self.timings.function_s += elapsed,
            Category::Jacobian => self.timings.jacobian_s += elapsed,
            Category::Hessian => self.timings.hessian_s += elapsed,
        }
        out
    }
}
