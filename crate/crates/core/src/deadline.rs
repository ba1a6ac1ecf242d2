//! Cooperative cancellation for long-running solvers.

/// Polled by solvers between iterations; once expired the solver returns `Unknown`.
pub trait Deadline {
    fn expired(&self) -> bool;
}

/// A deadline that never expires.
#[derive(Clone, Copy, Debug, Default)]
pub struct Never;

impl Deadline for Never {
    fn expired(&self) -> bool {
        false
    }
}

impl<D: Deadline + ?Sized> Deadline for &D {
    fn expired(&self) -> bool {
        (**self).expired()
    }
}
