//! Completion detection by counting outstanding messages.
//!
//! The counter starts at one, a token held by the seeding phase. Every message
//! is counted before it becomes consumable and released only after its
//! processing (including all enqueues it causes) has finished. Seeding drops
//! its token once the initial broadcast is enqueued, so the counter can reach
//! zero exactly once: when nothing is queued or in flight.

use std::sync::atomic::{AtomicBool, AtomicI64, AtomicUsize, Ordering};

use crate::error::{Error, Result};

#[derive(Debug)]
pub struct Termination {
    outstanding: AtomicI64,
    seeding_done: AtomicBool,
    completed: AtomicBool,
    signals: AtomicUsize,
}

impl Default for Termination {
    fn default() -> Self {
        Self::new()
    }
}

impl Termination {
    pub fn new() -> Self {
        Termination {
            outstanding: AtomicI64::new(1),
            seeding_done: AtomicBool::new(false),
            completed: AtomicBool::new(false),
            signals: AtomicUsize::new(0),
        }
    }

    /// Accounts for `n` messages about to be enqueued.
    #[inline]
    pub fn add(&self, n: usize) {
        if n > 0 {
            self.outstanding.fetch_add(n as i64, Ordering::AcqRel);
        }
    }

    /// Releases `n` fully processed messages.
    #[inline]
    pub fn finish(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Ok(());
        }
        let before = self.outstanding.fetch_sub(n as i64, Ordering::AcqRel);
        if before < n as i64 {
            return Err(Error::Internal(format!("outstanding counter underflow ({before} - {n})")));
        }
        if before == n as i64 {
            self.signal();
        }
        Ok(())
    }

    /// Marks seeding complete and drops the seeding token.
    pub fn seeding_complete(&self) -> Result<()> {
        if self.seeding_done.swap(true, Ordering::AcqRel) {
            return Err(Error::Internal("seeding completed twice".into()));
        }
        self.finish(1)
    }

    fn signal(&self) {
        debug_assert!(self.seeding_done.load(Ordering::Acquire));
        self.signals.fetch_add(1, Ordering::AcqRel);
        self.completed.store(true, Ordering::Release);
    }

    #[inline]
    pub fn is_complete(&self) -> bool {
        self.completed.load(Ordering::Acquire)
    }

    pub fn outstanding(&self) -> i64 {
        self.outstanding.load(Ordering::Acquire)
    }

    pub fn signals(&self) -> usize {
        self.signals.load(Ordering::Acquire)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn empty_seed_completes() {
        let t = Termination::new();
        t.add(4);
        t.seeding_complete().unwrap();
        assert!(!t.is_complete());
        for _ in 0..4 {
            t.finish(1).unwrap();
        }
        assert!(t.is_complete());
        assert_eq!(t.signals(), 1);
        assert_eq!(t.outstanding(), 0);
    }

    #[test]
    fn no_completion_while_seeding() {
        let t = Termination::new();
        t.add(1);
        t.finish(1).unwrap();
        assert!(!t.is_complete());
        t.seeding_complete().unwrap();
        assert!(t.is_complete());
        assert!(t.seeding_complete().is_err());
    }

    #[test]
    fn underflow_is_fatal() {
        let t = Termination::new();
        t.seeding_complete().unwrap();
        assert!(matches!(t.finish(1), Err(Error::Internal(_))));
    }

    #[test]
    fn concurrent_chains_signal_once() {
        let t = Arc::new(Termination::new());
        t.add(8);
        std::thread::scope(|s| {
            for _ in 0..8 {
                let t = Arc::clone(&t);
                s.spawn(move || {
                    // each seed spawns a chain of 1000 successors
                    for _ in 0..1000 {
                        t.add(1);
                        t.finish(1).unwrap();
                    }
                    t.finish(1).unwrap();
                });
            }
            t.seeding_complete().unwrap();
        });
        assert_eq!(t.signals(), 1);
        assert_eq!(t.outstanding(), 0);
    }
}
