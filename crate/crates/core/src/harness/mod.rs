//! Experiment engine: threshold exponents, seeded lemma audits, threshold
//! scans, identity suites and report serialization.

pub mod audit;
pub mod config;
pub mod report;
pub mod sampling;
pub mod scan;
pub mod thresholds;
pub mod verify;

pub use audit::{audit_lemma, LemmaAuditReport, LemmaId};
pub use config::{parse_rational, Experiment, ExperimentConfig, SizeSpec, VarietyChoice};
pub use report::Format;
pub use scan::{scan_thresholds, ScanReport, ScanRow};
pub use thresholds::{threshold_exponent, TheoremParams, ThresholdRule};
pub use verify::{verify_identities, Fault, VerifyOptions, VerifySummary};

use crate::ambient::PointSet;
use crate::combinatorics::{indicator_counts, RepCount};
use crate::error::Result;

/// `[μ_1, ..., μ_top]` for `a`, each level one convolution from the last.
pub(crate) fn levels(a: &PointSet, top: u32) -> Result<Vec<RepCount>> {
    let base = indicator_counts(a);
    let mut out = vec![base.clone()];
    for _ in 1..top {
        let next = out.last().expect("non-empty").convolve(&base)?;
        out.push(next);
    }
    Ok(out)
}
