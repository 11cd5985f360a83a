//! Shared fixtures for the benchmarks.

use ebf_core::{HypothesisRegion, MultiTestBatch, RngStream, TestSummary};

/// `m` tests with unit standard errors; a tenth carry a true mean of 3.
pub fn synthetic_batch(m: usize, pi_h: f64, seed: u64) -> MultiTestBatch {
    let mut rng = RngStream::new(seed, 0);
    let tests = (0..m)
        .map(|i| {
            let mu = if i % 10 == 0 { 3.0 } else { 0.0 };
            TestSummary { id: format!("t{i}"), estimate: mu + rng.normal(), se: 1.0 }
        })
        .collect();
    MultiTestBatch::new(tests, pi_h, HypothesisRegion::Point { value: 0.0 }, HypothesisRegion::Full)
        .expect("synthetic batch is valid")
}
