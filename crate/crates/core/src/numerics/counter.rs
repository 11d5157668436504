//! Multiply-add accounting.
//!
//! Every matrix product records `m·k·n` multiply-adds into a thread-local
//! accumulator. [`OpCounter::measure`] brackets a region and reports how many
//! were executed inside it on the calling thread, so concurrent measurements on
//! separate threads never interfere.

use std::cell::Cell;

thread_local! {
    static MULTIPLY_ADDS: Cell<u64> = const { Cell::new(0) };
}

pub(crate) fn record(n: usize) {
    MULTIPLY_ADDS.with(|c| c.set(c.get().wrapping_add(n as u64)));
}

fn current() -> u64 {
    MULTIPLY_ADDS.with(|c| c.get())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpCounter {
    pub multiply_adds: u64,
}

impl OpCounter {
    /// Runs `f` and returns its result with the multiply-adds it performed.
    pub fn measure<R>(f: impl FnOnce() -> R) -> (R, OpCounter) {
        let start = current();
        let out = f();
        let multiply_adds = current().wrapping_sub(start);
        (out, OpCounter { multiply_adds })
    }
}
