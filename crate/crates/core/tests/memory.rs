//! Peak heap use of the fast estimator grows linearly in n.

use std::alloc::{GlobalAlloc, Layout, System};
use std::sync::atomic::{AtomicUsize, Ordering};

use fastdcov::datagen::RngStream;
use fastdcov::{bias_corrected_dcor2_fast, omega_fast, PairedSample};

struct Counting;

static LIVE: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);

unsafe impl GlobalAlloc for Counting {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = unsafe { System.alloc(layout) };
        if !p.is_null() {
            let now = LIVE.fetch_add(layout.size(), Ordering::SeqCst) + layout.size();
            PEAK.fetch_max(now, Ordering::SeqCst);
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        unsafe { System.dealloc(ptr, layout) };
        LIVE.fetch_sub(layout.size(), Ordering::SeqCst);
    }
}

#[global_allocator]
static GLOBAL: Counting = Counting;

/// Extra bytes allocated at peak while `f` runs.
fn peak_during(f: impl FnOnce()) -> usize {
    let base = LIVE.load(Ordering::SeqCst);
    PEAK.store(base, Ordering::SeqCst);
    f();
    PEAK.load(Ordering::SeqCst) - base
}

#[test]
fn fast_estimator_memory_is_linear() {
    const WORDS_PER_POINT: usize = 16;
    for k in [10u32, 14, 17] {
        let n = 1usize << k;
        let mut rng = RngStream::new(1, k as u64);
        let x: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let y: Vec<f64> = x.iter().map(|v| v + rng.normal()).collect();
        let s = PairedSample::new(x, y).unwrap();
        let omega = peak_during(|| {
            omega_fast(&s).unwrap();
        });
        let dcor = peak_during(|| {
            bias_corrected_dcor2_fast(&s).unwrap();
        });
        let words = omega.max(dcor) as f64 / 8.0 / n as f64;
        println!(
            "n=2^{k}: peak {omega} bytes (omega), {dcor} bytes (dcor), {words:.1} words per point"
        );
        assert!(
            omega <= WORDS_PER_POINT * 8 * n,
            "omega peak {omega} at n={n}"
        );
        assert!(dcor <= WORDS_PER_POINT * 8 * n, "dcor peak {dcor} at n={n}");
    }
}
