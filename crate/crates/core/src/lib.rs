//! Individual-variation (IV) modelling for tabular classification.
//!
//! * [`iv`]: CV estimation, the class-conditional Gaussian perturbation
//!   model, dataset ingestion and a synthetic cohort generator.
//! * [`learners`]: the baseline classifier zoo (SVM, logistic regression,
//!   kNN, Gaussian naive Bayes, random forest, extra trees, gradient boosting).
//! * [`robust`]: IV-aware learners (augmentation, KND, SMM, WSF) and the WSF
//!   generalization bound.
//! * [`harness`]: metrics, confidence intervals, KS checks and the three
//!   evaluation protocols.

pub mod error;
pub mod harness;
pub mod iv;
pub mod learners;
pub mod rng;
pub mod robust;

pub use error::{Error, Result};

/// Binary class label, 0 or 1.
pub type Label = u8;
