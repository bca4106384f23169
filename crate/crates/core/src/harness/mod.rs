//! Evaluation protocols, metrics and the statistics used to compare
//! baseline and IV-perturbed performance.

mod folds;
mod gap;
mod metrics;
mod protocol;
mod report;
mod stats;

pub use folds::{folds_are_usable, split, stratified_folds};
pub use gap::{estimate_iv_gap, GapEstimate};
pub use metrics::{auc, metrics, Metric, Metrics};
pub use protocol::{
    evaluate, evaluate_augmented, evaluate_imprecise, evaluate_standard, Candidate, CiBasis,
    Protocol, ProtocolConfig,
};
pub use report::{ConditionSummary, EvalReport, Provenance, ReportEntry, REPORT_SCHEMA_VERSION};
pub use stats::{
    confidence_interval, kolmogorov_survival, ks_check, ks_statistic, overlap, Interval, KsResult,
    Verdict,
};
