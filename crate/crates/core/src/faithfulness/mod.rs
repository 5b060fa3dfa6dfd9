//! Executable checks of qualitative and quantitative faithfulness.
//!
//! Qualitative probes move one feature at a time by `±delta` for each
//! `delta` in `step_fractions * eps` and compare the classifier output with
//! the sign of that feature's score. Output comparisons use the label
//! log-odds, which is strictly increasing in `C_l(x)` and does not saturate
//! at probabilities near 0 or 1. Quantitative probes measure the first-order
//! remainder `e(h) = C_l(x + h) - C_l(x) - h . s` on halving step sizes.

mod qualitative;
mod quantitative;
mod report;

pub use qualitative::{
    adaptive_probe, both_signs_violated, qualitative_probe, strong_probe, AdaptiveVerdict,
    FeatureStatus, QualitativeVerdict, StrongStatus, StrongVerdict, DEFAULT_STEP_FRACTIONS, SLACK,
};
pub use quantitative::{
    error_decay, error_dominance, quantitative_error, sign_agreement, unit_direction,
    DominanceRecord, ErrorDecayRecord, SignAgreement, ASYMPTOTIC_GATE, DECAY_FACTOR,
};
pub use report::{probe_csv, ProbeRecord};
