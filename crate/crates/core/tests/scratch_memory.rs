//! Peak heap use of each scaling strategy, measured with a counting
//! allocator. Kept in its own test binary so no other test shares the
//! counters.

mod common;

use std::alloc::{GlobalAlloc, Layout, System};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use common::{random_counts, rng};
use rankjoint_core::linalg::{
    ca_target, correspondence_matrix, margins, scratch_bytes, ScalingStrategy,
};

struct Counting;

static CURRENT: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);
static SERIAL: Mutex<()> = Mutex::new(());

unsafe impl GlobalAlloc for Counting {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let ptr = unsafe { System.alloc(layout) };
        if !ptr.is_null() {
            let now = CURRENT.fetch_add(layout.size(), Ordering::SeqCst) + layout.size();
            PEAK.fetch_max(now, Ordering::SeqCst);
        }
        ptr
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        unsafe { System.dealloc(ptr, layout) };
        CURRENT.fetch_sub(layout.size(), Ordering::SeqCst);
    }
}

#[global_allocator]
static GLOBAL: Counting = Counting;

/// Peak bytes allocated by `f` above the level at entry, excluding nothing.
fn peak_during<T>(f: impl FnOnce() -> T) -> (T, usize) {
    let base = CURRENT.load(Ordering::SeqCst);
    PEAK.store(base, Ordering::SeqCst);
    let out = f();
    (out, PEAK.load(Ordering::SeqCst) - base)
}

#[test]
fn strategies_stay_within_their_scratch_budget() {
    let _guard = SERIAL.lock().unwrap();
    let (m, p) = (600, 40);
    let counts = random_counts(&mut rng(1), m, p);
    let pm = correspondence_matrix(&counts).unwrap();
    let (r, c) = margins(&pm).unwrap();
    let output = m * p * std::mem::size_of::<f64>();
    let mut peaks = Vec::new();
    for s in ScalingStrategy::ALL {
        let (t, peak) = peak_during(|| ca_target(s, &pm, &r, &c).unwrap());
        drop(t);
        let scratch = peak - output;
        let budget = scratch_bytes(s, m, p);
        // transient margin copies are allowed on top of the declared budget
        let slack = (m + p) * std::mem::size_of::<f64>();
        assert!(scratch <= budget + slack, "{s}: {scratch} > {budget} + {slack}");
        peaks.push(scratch);
    }
    let (full, sparse, vect) = (peaks[0], peaks[1], peaks[2]);
    assert!(full >= m * m * std::mem::size_of::<f64>());
    assert!(sparse < output);
    assert!(vect < output);
}
