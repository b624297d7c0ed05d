//! Per-thread event counters used to check what a timed region did.

use std::cell::Cell;

thread_local! {
    static DISK_WRITES: Cell<u64> = const { Cell::new(0) };
    static DIAGNOSTICS: Cell<u64> = const { Cell::new(0) };
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct Counters {
    pub disk_writes: u64,
    pub diagnostic_reductions: u64,
}

pub fn record_disk_write() {
    DISK_WRITES.with(|c| c.set(c.get() + 1));
}

pub fn record_diagnostic() {
    DIAGNOSTICS.with(|c| c.set(c.get() + 1));
}

/// Counters of the calling thread.
pub fn snapshot() -> Counters {
    Counters {
        disk_writes: DISK_WRITES.with(Cell::get),
        diagnostic_reductions: DIAGNOSTICS.with(Cell::get),
    }
}
